//! Turns a corpus into a feature matrix under one of the feature regimes.

use std::fmt;

use rayon::prelude::*;

use crate::corpus::{tokenize_clean, LabeledCorpus, Stopwords, TweetRecord};
use crate::dmd::{sentence_feature, HodmdConfig};
use crate::embed::{average_embedding, token_matrix, PrecomputedTable, SentenceVector, WordVectorTable};
use crate::error::{Error, Result};
use crate::learn::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureKind {
    /// Mean of the tweet's word vectors.
    Average,
    /// DMD extrapolation over the word-vector signal; order >= 2 is HODMD.
    Dmd(HodmdConfig),
    /// Sentence vectors looked up by tweet id.
    Precomputed,
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureKind::Average => f.write_str("avg"),
            FeatureKind::Dmd(cfg) if cfg.order == 1 => f.write_str("dmd"),
            FeatureKind::Dmd(cfg) => write!(f, "hodmd({})", cfg.order),
            FeatureKind::Precomputed => f.write_str("precomputed"),
        }
    }
}

pub trait Featurize: Sync {
    fn dim(&self) -> Result<usize>;

    fn featurize(&self, corpus: &LabeledCorpus) -> Result<FeatureMatrix>;
}

#[derive(Debug, Clone, Copy)]
pub struct Featurizer<'a> {
    pub kind: FeatureKind,
    pub stopwords: &'a Stopwords,
    pub vectors: Option<&'a WordVectorTable>,
    pub precomputed: Option<&'a PrecomputedTable>,
}

impl<'a> Featurizer<'a> {
    fn vectors(&self) -> Result<&'a WordVectorTable> {
        self.vectors
            .ok_or_else(|| Error::invalid(format!("feature `{}` needs a word-vector table", self.kind)))
    }

    fn precomputed(&self) -> Result<&'a PrecomputedTable> {
        self.precomputed
            .ok_or_else(|| Error::invalid("feature `precomputed` needs a precomputed-vector table"))
    }

    pub fn featurize_record(&self, record: &TweetRecord) -> Result<SentenceVector> {
        match self.kind {
            FeatureKind::Average => {
                let tokens = tokenize_clean(&record.text, self.stopwords);
                Ok(average_embedding(&tokens, self.vectors()?))
            }
            FeatureKind::Dmd(cfg) => {
                let tokens = tokenize_clean(&record.text, self.stopwords);
                Ok(sentence_feature(&token_matrix(&tokens, self.vectors()?), &cfg))
            }
            FeatureKind::Precomputed => self.precomputed()?.get(&record.id).cloned(),
        }
    }
}

impl Featurize for Featurizer<'_> {
    fn dim(&self) -> Result<usize> {
        match self.kind {
            FeatureKind::Average | FeatureKind::Dmd(_) => Ok(self.vectors()?.dim()),
            FeatureKind::Precomputed => self
                .precomputed()?
                .dim()
                .ok_or_else(|| Error::invalid("precomputed-vector table is empty")),
        }
    }

    fn featurize(&self, corpus: &LabeledCorpus) -> Result<FeatureMatrix> {
        if let FeatureKind::Dmd(cfg) = self.kind {
            cfg.validate()?;
        }
        let dim = self.dim()?;
        let rows: Vec<SentenceVector> = corpus
            .records
            .par_iter()
            .map(|r| self.featurize_record(r))
            .collect::<Result<_>>()?;
        let mut matrix = FeatureMatrix::new(dim);
        for (record, row) in corpus.records.iter().zip(&rows) {
            matrix
                .push_row(record.id.clone(), row)
                .map_err(|e| e.context(format!("tweet `{}`", record.id)))?;
        }
        Ok(matrix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Label, Split};
    use crate::embed::{load_precomputed, load_vec_table};

    fn corpus() -> LabeledCorpus {
        let record = |id: &str, text: &str| TweetRecord {
            id: id.into(),
            text: text.into(),
            label: Some(Label::Not),
        };
        LabeledCorpus {
            records: vec![record("1", "good dog"), record("2", "the bad cat!"), record("3", "")],
            split: Split::Train,
        }
    }

    #[test]
    fn average_rows_in_order() {
        let table = load_vec_table("4 2\ngood 1 0\ndog 0 1\nbad -1 0\ncat 0 -1\n".as_bytes(), None)
            .unwrap();
        let sw = Stopwords::english();
        let f = Featurizer {
            kind: FeatureKind::Average,
            stopwords: &sw,
            vectors: Some(&table),
            precomputed: None,
        };
        let m = f.featurize(&corpus()).unwrap();
        assert_eq!(m.ids(), ["1", "2", "3"]);
        assert_eq!(m.row(0), &[0.5, 0.5]);
        assert_eq!(m.row(1), &[-0.5, -0.5]);
        assert_eq!(m.row(2), &[0.0, 0.0]);
    }

    #[test]
    fn precomputed_lookup_and_missing_id() {
        let table = load_precomputed("1 0.1 0.2\n2 0.3 0.4\n".as_bytes()).unwrap();
        let sw = Stopwords::english();
        let f = Featurizer {
            kind: FeatureKind::Precomputed,
            stopwords: &sw,
            vectors: None,
            precomputed: Some(&table),
        };
        assert!(matches!(f.featurize(&corpus()), Err(Error::MissingId(id)) if id == "3"));
    }

    #[test]
    fn kind_names() {
        assert_eq!(FeatureKind::Dmd(HodmdConfig::with_order(1)).to_string(), "dmd");
        assert_eq!(FeatureKind::Dmd(HodmdConfig::with_order(3)).to_string(), "hodmd(3)");
    }
}
