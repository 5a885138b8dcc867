//! Confusion matrix, accuracy and per-class precision/recall/F1.
//!
//! Any 0/0 ratio is reported as 0. The headline number is F1 of the
//! positive (`Yes`) class.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};

use crate::corpus::{Dataset, Label};
use crate::error::{Error, Result};

/// One row of a prediction file.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub id: String,
    pub label: Label,
    /// Positive-class confidence in `[0, 1]`.
    pub score: f64,
}

pub const PREDICTION_HEADER: &str = "tweet_id\tlabel\tscore";

pub fn write_predictions<W: Write>(predictions: &[Prediction], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{PREDICTION_HEADER}")?;
    for p in predictions {
        writeln!(out, "{}\t{}\t{:.6}", p.id, p.label, p.score)?;
    }
    Ok(())
}

pub fn read_predictions<R: Read>(reader: R, source: &str) -> Result<Vec<Prediction>> {
    let mut lines = BufReader::new(reader).lines().enumerate();
    match lines.next() {
        Some((_, header)) => {
            let header = header.map_err(|e| Error::io(source, e))?;
            if header.trim_start_matches('\u{feff}').trim_end() != PREDICTION_HEADER {
                return Err(Error::parse(source, 1, format!("expected header {PREDICTION_HEADER:?}")));
            }
        }
        None => return Err(Error::parse(source, 1, "missing header row")),
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        let n = idx + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(source, n, format!("expected 3 columns, found {}", fields.len())));
        }
        let label = Label::parse(fields[1]).ok_or_else(|| Error::Label {
            path: source.to_string(),
            line: n,
            label: fields[1].to_string(),
        })?;
        let score: f64 = fields[2]
            .trim()
            .parse()
            .ok()
            .filter(|s: &f64| (0.0..=1.0).contains(s))
            .ok_or_else(|| Error::parse(source, n, format!("score {:?} not in [0, 1]", fields[2])))?;
        out.push(Prediction {
            id: fields[0].trim().to_string(),
            label,
            score,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ClassMetrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ClassMetrics {
            precision,
            recall,
            f1,
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub positive: Label,
    /// Counts with respect to `positive`.
    pub confusion: Confusion,
    pub accuracy: f64,
    pub per_class: BTreeMap<Label, ClassMetrics>,
    pub headline_f1_positive: f64,
}

impl EvalReport {
    pub fn from_confusion(confusion: Confusion, positive: Label) -> Self {
        let Confusion { tp, fp, fn_, tn } = confusion;
        let pos = ClassMetrics::from_counts(tp, fp, fn_);
        let neg = ClassMetrics::from_counts(tn, fn_, fp);
        let per_class = BTreeMap::from([(positive, pos), (positive.other(), neg)]);
        EvalReport {
            positive,
            confusion,
            accuracy: ratio(tp + tn, confusion.total()),
            per_class,
            headline_f1_positive: pos.f1,
        }
    }

    /// Scores aligned label slices with `Yes` as the positive class.
    pub fn from_labels(gold: &[Label], predicted: &[Label]) -> Result<Self> {
        Self::from_labels_with_positive(gold, predicted, Label::Yes)
    }

    pub fn from_labels_with_positive(gold: &[Label], predicted: &[Label], positive: Label) -> Result<Self> {
        if gold.len() != predicted.len() {
            return Err(Error::Alignment(format!(
                "{} gold labels but {} predictions",
                gold.len(),
                predicted.len()
            )));
        }
        let mut c = Confusion::default();
        for (g, p) in gold.iter().zip(predicted) {
            match (*g == positive, *p == positive) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        Ok(Self::from_confusion(c, positive))
    }

    pub fn class(&self, label: Label) -> ClassMetrics {
        self.per_class[&label]
    }
}

/// Aligns predictions to gold rows by tweet id and scores them.
pub fn evaluate(gold: &Dataset, predictions: &[Prediction]) -> Result<EvalReport> {
    evaluate_with_positive(gold, predictions, Label::Yes)
}

pub fn evaluate_with_positive(
    gold: &Dataset,
    predictions: &[Prediction],
    positive: Label,
) -> Result<EvalReport> {
    let gold_labels = gold.labels()?;
    let mut by_id: HashMap<&str, &Prediction> = HashMap::with_capacity(predictions.len());
    let mut duplicates = Vec::new();
    for p in predictions {
        if by_id.insert(p.id.as_str(), p).is_some() {
            duplicates.push(p.id.as_str());
        }
    }
    let mut missing = Vec::new();
    let mut predicted = Vec::with_capacity(gold.len());
    for row in gold.rows() {
        match by_id.remove(row.id.as_str()) {
            Some(p) => predicted.push(p.label),
            None => missing.push(row.id.as_str()),
        }
    }
    let mut extra: Vec<&str> = by_id.into_keys().collect();
    extra.sort_unstable();
    if !(missing.is_empty() && extra.is_empty() && duplicates.is_empty()) {
        let mut msg = String::new();
        for (what, ids) in [("missing", &missing), ("extra", &extra), ("duplicate", &duplicates)] {
            if !ids.is_empty() {
                if !msg.is_empty() {
                    msg.push_str("; ");
                }
                let _ = write!(msg, "{what} ids: {}", ids.join(", "));
            }
        }
        return Err(Error::Alignment(msg));
    }
    EvalReport::from_labels_with_positive(&gold_labels, &predicted, positive)
}

/// Fixed-width table in percent (two decimals), one row per class, followed
/// by the raw confusion counts and the headline fraction.
pub fn format_report(report: &EvalReport, model: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<6} {:<10} {:>9} {:>10} {:>8} {:>9}",
        "Class", "Model", "Accuracy", "Precision", "Recall", "F1 Score"
    );
    for (n, label) in [Label::No, Label::Yes].into_iter().enumerate() {
        let m = report.class(label);
        let accuracy = if n == 0 {
            format!("{:.2}", report.accuracy * 100.0)
        } else {
            String::new()
        };
        let _ = writeln!(
            out,
            "{:<6} {:<10} {:>9} {:>10.2} {:>8.2} {:>9.2}",
            label.as_str(),
            if n == 0 { model } else { "" },
            accuracy,
            m.precision * 100.0,
            m.recall * 100.0,
            m.f1 * 100.0
        );
    }
    let c = report.confusion;
    let _ = writeln!(out, "tp={} fp={} fn={} tn={}", c.tp, c.fp, c.fn_, c.tn);
    let _ = writeln!(
        out,
        "F1 ({} class): {:.4}",
        report.positive, report.headline_f1_positive
    );
    out
}
