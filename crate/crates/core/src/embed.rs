//! Word-vector tables, averaged sentence vectors, per-tweet word-vector
//! matrices and precomputed sentence-encoder vectors.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, BufReader, Read};
use std::ops::Deref;

use nalgebra::DMatrix;

use crate::corpus::TokenSeq;
use crate::error::{Error, Result};

/// A fixed-length feature vector for one tweet.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceVector(Vec<f64>);

impl SentenceVector {
    pub fn new(values: Vec<f64>) -> Self {
        SentenceVector(values)
    }

    pub fn zeros(dim: usize) -> Self {
        SentenceVector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for SentenceVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone)]
pub struct WordVectorTable {
    dim: usize,
    entries: HashMap<String, Vec<f64>>,
}

impl WordVectorTable {
    pub fn new(dim: usize) -> Self {
        WordVectorTable {
            dim,
            entries: HashMap::new(),
        }
    }

    pub fn insert(&mut self, token: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: vector.len(),
            });
        }
        self.entries.insert(token.into(), vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.entries.get(token).map(Vec::as_slice)
    }
}

/// Reads the fastText `.vec` text layout: a `count dim` header followed by
/// `token v1 .. v_dim` rows.
pub fn load_vec_table<R: Read>(
    source: R,
    vocab_filter: Option<&HashSet<String>>,
) -> Result<WordVectorTable> {
    let mut lines = BufReader::new(source).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing `count dim` header"))??;
    let mut parts = header.split_whitespace();
    let (_count, dim) = match (parts.next(), parts.next(), parts.next()) {
        (Some(c), Some(d), None) => (
            c.parse::<usize>()
                .map_err(|_| Error::parse(1, "header count is not an integer"))?,
            d.parse::<usize>()
                .map_err(|_| Error::parse(1, "header dim is not an integer"))?,
        ),
        _ => return Err(Error::parse(1, "header must be `count dim`")),
    };
    if dim == 0 {
        return Err(Error::parse(1, "dim must be positive"));
    }

    let mut table = WordVectorTable::new(dim);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else {
            continue;
        };
        let wanted = vocab_filter.is_none_or(|f| f.contains(token));
        let mut values = Vec::with_capacity(if wanted { dim } else { 0 });
        let mut n = 0;
        for field in fields {
            n += 1;
            if wanted {
                values.push(parse_float(field, line_no)?);
            }
        }
        if n != dim {
            return Err(Error::parse(
                line_no,
                format!("expected {dim} values, found {n}"),
            ));
        }
        if wanted {
            table.entries.insert(token.to_string(), values);
        }
    }
    Ok(table)
}

fn parse_float(field: &str, line: usize) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(line, format!("`{field}` is not a finite number"))),
    }
}

/// Mean of the in-vocabulary token vectors; the zero vector when none are known.
pub fn average_embedding(tokens: &TokenSeq, table: &WordVectorTable) -> SentenceVector {
    let mut sum = vec![0.0; table.dim];
    let mut used = 0usize;
    for v in tokens.tokens.iter().filter_map(|t| table.get(t)) {
        sum.iter_mut().zip(v).for_each(|(s, x)| *s += x);
        used += 1;
    }
    if used > 0 {
        let inv = 1.0 / used as f64;
        sum.iter_mut().for_each(|s| *s *= inv);
    }
    SentenceVector(sum)
}

/// A tweet's word vectors as columns, in token order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSequence {
    columns: DMatrix<f64>,
}

impl EmbeddingSequence {
    pub fn from_matrix(columns: DMatrix<f64>) -> Self {
        EmbeddingSequence { columns }
    }

    pub fn from_columns(dim: usize, columns: &[Vec<f64>]) -> Result<Self> {
        let mut m = DMatrix::zeros(dim, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.len(),
                });
            }
            m.column_mut(j).copy_from_slice(c);
        }
        Ok(EmbeddingSequence { columns: m })
    }

    pub fn dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn len(&self) -> usize {
        self.columns.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.ncols() == 0
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.columns
    }
}

/// Looks each token up in order, skipping unknown tokens.
pub fn token_matrix(tokens: &TokenSeq, table: &WordVectorTable) -> EmbeddingSequence {
    let found: Vec<&[f64]> = tokens.tokens.iter().filter_map(|t| table.get(t)).collect();
    let mut m = DMatrix::zeros(table.dim, found.len());
    for (j, v) in found.into_iter().enumerate() {
        m.column_mut(j).copy_from_slice(v);
    }
    EmbeddingSequence { columns: m }
}

/// Sentence vectors keyed by tweet id.
#[derive(Debug, Clone, Default)]
pub struct PrecomputedTable {
    dim: Option<usize>,
    entries: HashMap<String, SentenceVector>,
}

impl PrecomputedTable {
    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Result<&SentenceVector> {
        self.entries
            .get(id)
            .ok_or_else(|| Error::MissingId(id.to_string()))
    }
}

/// Reads `id v1 .. v_dim` lines; the first line fixes the dimension.
pub fn load_precomputed<R: Read>(source: R) -> Result<PrecomputedTable> {
    let mut table = PrecomputedTable::default();
    for (i, line) in BufReader::new(source).lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let mut fields = line.split_whitespace();
        let Some(id) = fields.next() else {
            continue;
        };
        let values = fields
            .map(|f| parse_float(f, line_no))
            .collect::<Result<Vec<_>>>()?;
        match table.dim {
            None if values.is_empty() => return Err(Error::parse(line_no, "no values")),
            None => table.dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(Error::parse(
                    line_no,
                    format!("expected {d} values, found {}", values.len()),
                ))
            }
            Some(_) => {}
        }
        if table
            .entries
            .insert(id.to_string(), SentenceVector(values))
            .is_some()
        {
            return Err(Error::DuplicateId(id.to_string()));
        }
    }
    Ok(table)
}
