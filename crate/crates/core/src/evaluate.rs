//! Confusion counts and minority-class metrics.

use serde::{Deserialize, Serialize};

use crate::label::{class_counts, Label};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
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

pub fn confusion(y_true: &[Label], y_pred: &[Label], positive: Label) -> Result<Confusion> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    let mut c = Confusion::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t == positive, p == positive) {
            (true, true) => c.tp += 1,
            (false, true) => c.fp += 1,
            (true, false) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub positive_class: Label,
    /// Rows per class, indexed by [`Label::index`].
    pub support: [usize; 2],
    pub confusion: Confusion,
    /// Set when any ratio was 0/0 and reported as 0.
    pub degenerate: bool,
}

fn ratio(num: usize, den: usize, degenerate: &mut bool) -> f64 {
    if den == 0 {
        *degenerate = true;
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Harmonic mean of precision and recall, 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

pub fn metrics(c: &Confusion, positive: Label) -> MetricsReport {
    let mut degenerate = false;
    let accuracy = ratio(c.tp + c.tn, c.total(), &mut degenerate);
    let precision = ratio(c.tp, c.tp + c.fp, &mut degenerate);
    let recall = ratio(c.tp, c.tp + c.fn_, &mut degenerate);
    let f1 = f1_score(precision, recall);
    if precision + recall == 0.0 {
        degenerate = true;
    }
    let mut support = [0; 2];
    support[positive.index()] = c.tp + c.fn_;
    support[positive.other().index()] = c.fp + c.tn;
    MetricsReport {
        accuracy,
        precision,
        recall,
        f1,
        positive_class: positive,
        support,
        confusion: *c,
        degenerate,
    }
}

/// Confusion + metrics in one step.
pub fn evaluate(y_true: &[Label], y_pred: &[Label], positive: Label) -> Result<MetricsReport> {
    let c = confusion(y_true, y_pred, positive)?;
    let mut m = metrics(&c, positive);
    m.support = class_counts(y_true);
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Authentic as A, Fake as F};

    #[test]
    fn confusion_hand_count() {
        let c = confusion(&[F, F, A, A], &[F, A, F, A], F).unwrap();
        assert_eq!(c, Confusion { tp: 1, fp: 1, fn_: 1, tn: 1 });
        let m = metrics(&c, F);
        assert_eq!((m.accuracy, m.precision, m.recall, m.f1), (0.5, 0.5, 0.5, 0.5));
        assert!(!m.degenerate);
    }

    #[test]
    fn perfect_and_empty() {
        let y = [F, A, A, F, A];
        let c = confusion(&y, &y, F).unwrap();
        assert_eq!((c.fp, c.fn_), (0, 0));
        let m = metrics(&c, F);
        assert_eq!((m.accuracy, m.precision, m.recall, m.f1), (1.0, 1.0, 1.0, 1.0));
        let e = confusion(&[], &[], F).unwrap();
        assert_eq!(e, Confusion::default());
        let me = metrics(&e, F);
        assert!(me.degenerate);
        assert_eq!(me.f1, 0.0);
        assert!(confusion(&[F], &[], F).is_err());
    }

    #[test]
    fn table_four_rfc_row_is_consistent() {
        assert_eq!(format!("{:.3}", f1_score(0.846, 0.742)), "0.791");
    }

    #[test]
    fn support_counts_truth() {
        let m = evaluate(&[F, A, A], &[A, A, A], F).unwrap();
        assert_eq!(m.support, [2, 1]);
        assert!(m.degenerate);
        assert_eq!(m.f1, 0.0);
    }
}
