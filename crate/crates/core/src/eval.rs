//! Confusion matrices, macro-averaged metrics, control-parameter sweeps and
//! report rendering.
//!
//! Precision, recall and F1 are computed per class and averaged without
//! class weights. A zero denominator yields 0 for that class.

use std::fmt::Write as _;

use crate::corpus::{Label, LabeledCorpus};
use crate::error::{Error, Result};
use crate::features::Featurize;
use crate::learn::{train_linear_svm, Model};
use crate::rks::RksMap;

const CLASSES: [Label; 2] = [Label::Off, Label::Not];

fn index(label: Label) -> usize {
    match label {
        Label::Off => 0,
        Label::Not => 1,
    }
}

/// Counts indexed by `(gold, predicted)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    counts: [[u64; 2]; 2],
}

impl ConfusionMatrix {
    pub fn from_pairs<G, P>(gold: G, predicted: P) -> Result<Self>
    where
        G: IntoIterator<Item = Label>,
        P: IntoIterator<Item = Label>,
    {
        let mut cm = ConfusionMatrix::default();
        let mut gold = gold.into_iter();
        let mut predicted = predicted.into_iter();
        loop {
            match (gold.next(), predicted.next()) {
                (Some(g), Some(p)) => cm.add(g, p, 1),
                (None, None) => return Ok(cm),
                _ => return Err(Error::invalid("gold and predicted label counts differ")),
            }
        }
    }

    pub fn add(&mut self, gold: Label, predicted: Label, n: u64) {
        self.counts[index(gold)][index(predicted)] += n;
    }

    pub fn get(&self, gold: Label, predicted: Label) -> u64 {
        self.counts[index(gold)][index(predicted)]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Per-class scores as fractions in `[0, 1]`, OFF first.
pub fn per_class(cm: &ConfusionMatrix) -> [ClassScores; 2] {
    CLASSES.map(|c| {
        let tp = cm.get(c, c) as f64;
        let predicted: f64 = CLASSES.iter().map(|g| cm.get(*g, c) as f64).sum();
        let actual: f64 = CLASSES.iter().map(|p| cm.get(c, *p) as f64).sum();
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, actual);
        let f1 = ratio(2.0 * precision * recall, precision + recall);
        ClassScores {
            precision,
            recall,
            f1,
        }
    })
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Accuracy and macro-averaged scores, in percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

pub fn macro_metrics(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::invalid("confusion matrix is empty"));
    }
    let correct: u64 = CLASSES.iter().map(|c| cm.get(*c, *c)).sum();
    let [off, not] = per_class(cm);
    let mean = |a: f64, b: f64| 50.0 * (a + b);
    Ok(MetricsReport {
        accuracy: 100.0 * correct as f64 / total as f64,
        macro_precision: mean(off.precision, not.precision),
        macro_recall: mean(off.recall, not.recall),
        macro_f1: mean(off.f1, not.f1),
    })
}

/// Featurizes a labeled corpus, predicts and scores it.
pub fn evaluate(model: &Model, corpus: &LabeledCorpus, featurizer: &dyn Featurize) -> Result<MetricsReport> {
    let gold = corpus.labels()?;
    let features = featurizer.featurize(corpus)?;
    let predicted = model.predict(&features)?;
    let cm = ConfusionMatrix::from_pairs(gold, predicted.iter().map(|p| p.label))?;
    macro_metrics(&cm)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub c: f64,
    pub accuracy: f64,
}

/// Trains one linear SVM per `C` on `train` and reports its test accuracy,
/// in the order given. `map`, when present, lifts features before training.
pub fn sweep_control_parameter(
    train: &LabeledCorpus,
    test: &LabeledCorpus,
    featurizer: &dyn Featurize,
    c_values: &[f64],
    epochs: usize,
    seed: u64,
    map: Option<&RksMap>,
) -> Result<Vec<SweepPoint>> {
    if c_values.is_empty() {
        return Err(Error::invalid("no C values to sweep"));
    }
    let train_labels = train.labels()?;
    let test_gold = test.labels()?;
    let mut train_features = featurizer.featurize(train)?;
    let mut test_features = featurizer.featurize(test)?;
    if let Some(map) = map {
        train_features = train_features.lift(map)?;
        test_features = test_features.lift(map)?;
    }
    c_values
        .iter()
        .map(|&c| {
            let model = train_linear_svm(&train_features, &train_labels, c, epochs, seed)
                .map(Model::Linear)
                .map_err(|e| e.context(format!("C = {c}")))?;
            let predicted = model.predict(&test_features)?;
            let cm = ConfusionMatrix::from_pairs(
                test_gold.iter().copied(),
                predicted.iter().map(|p| p.label),
            )?;
            Ok(SweepPoint {
                c,
                accuracy: macro_metrics(&cm)?.accuracy,
            })
        })
        .collect()
}

/// `C,accuracy` rows with a header.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("C,accuracy\n");
    for p in points {
        let _ = writeln!(out, "{},{}", p.c, format_percent(p.accuracy));
    }
    out
}

/// Formats with exactly two decimals, rounding half up on the shortest
/// decimal representation (`99.995` renders as `100.00`).
pub fn format_percent(value: f64) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    let repr = value.abs().to_string();
    let (int_part, frac_part) = repr.split_once('.').unwrap_or((&repr, ""));
    let digits: Vec<u8> = frac_part.bytes().chain(std::iter::repeat(b'0')).take(3).collect();
    let mut scaled: u128 = format!("{int_part}{}", std::str::from_utf8(&digits[..2]).expect("ascii"))
        .parse()
        .expect("decimal digits");
    if digits[2] >= b'5' {
        scaled += 1;
    }
    let sign = if value < 0.0 && scaled > 0 { "-" } else { "" };
    format!("{sign}{}.{:02}", scaled / 100, scaled % 100)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedReport {
    pub tsv: String,
    pub text: String,
}

const REPORT_HEADER: [&str; 5] = ["name", "acc", "prec", "recall", "f1"];

/// Renders reports as TSV and as an aligned plain-text table.
pub fn render_report(reports: &[(String, MetricsReport)]) -> RenderedReport {
    let rows: Vec<[String; 5]> = reports
        .iter()
        .map(|(name, m)| {
            [
                name.clone(),
                format_percent(m.accuracy),
                format_percent(m.macro_precision),
                format_percent(m.macro_recall),
                format_percent(m.macro_f1),
            ]
        })
        .collect();

    let mut tsv = REPORT_HEADER.join("\t");
    tsv.push('\n');
    for r in &rows {
        tsv.push_str(&r.join("\t"));
        tsv.push('\n');
    }

    let mut widths = REPORT_HEADER.map(str::len);
    for r in &rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut text = String::new();
    let header = REPORT_HEADER.map(String::from);
    for r in std::iter::once(&header).chain(&rows) {
        let mut line = format!("{:<width$}", r[0], width = widths[0]);
        for (cell, w) in r.iter().zip(widths).skip(1) {
            let _ = write!(line, "  {cell:>w$}");
        }
        text.push_str(line.trim_end());
        text.push('\n');
    }
    RenderedReport { tsv, text }
}
