//! Confusion tables, rate metrics and tie-aware ROC/AUC.

use std::io::Write;

use crate::error::{Error, Result};

/// Counts of a binary prediction against binary truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionTable {
    /// True positives.
    pub alpha1: u64,
    /// False negatives.
    pub alpha2: u64,
    /// False positives.
    pub alpha3: u64,
    /// True negatives.
    pub alpha4: u64,
}

impl ConfusionTable {
    pub fn new(alpha1: u64, alpha2: u64, alpha3: u64, alpha4: u64) -> Self {
        Self {
            alpha1,
            alpha2,
            alpha3,
            alpha4,
        }
    }

    pub fn n(&self) -> u64 {
        self.alpha1 + self.alpha2 + self.alpha3 + self.alpha4
    }
}

fn check_binary(v: &[f64], what: &str) -> Result<()> {
    match v.iter().position(|&x| x != 0.0 && x != 1.0) {
        Some(i) => Err(Error::InvalidArgument(format!(
            "{what}[{i}] = {} is not binary",
            v[i]
        ))),
        None => Ok(()),
    }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!("lengths {a} and {b} differ")));
    }
    Ok(())
}

pub fn confusion(y: &[f64], yhat: &[f64]) -> Result<ConfusionTable> {
    check_lengths(y.len(), yhat.len())?;
    check_binary(y, "y")?;
    check_binary(yhat, "yhat")?;
    let mut ct = ConfusionTable::default();
    for (&t, &p) in y.iter().zip(yhat) {
        match (t == 1.0, p == 1.0) {
            (true, true) => ct.alpha1 += 1,
            (true, false) => ct.alpha2 += 1,
            (false, true) => ct.alpha3 += 1,
            (false, false) => ct.alpha4 += 1,
        }
    }
    Ok(ct)
}

/// Rate metrics; `None` marks a metric whose denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub accuracy: Option<f64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub precision: Option<f64>,
    pub npv: Option<f64>,
    pub balanced_accuracy: Option<f64>,
    pub f1: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn basic_metrics(ct: &ConfusionTable) -> MetricReport {
    let ConfusionTable {
        alpha1: tp,
        alpha2: fneg,
        alpha3: fpos,
        alpha4: tn,
    } = *ct;
    let sensitivity = ratio(tp, tp + fneg);
    let specificity = ratio(tn, tn + fpos);
    MetricReport {
        accuracy: ratio(tp + tn, ct.n()),
        sensitivity,
        specificity,
        precision: ratio(tp, tp + fpos),
        npv: ratio(tn, tn + fneg),
        balanced_accuracy: sensitivity.zip(specificity).map(|(a, b)| (a + b) / 2.0),
        f1: ratio(2 * tp, 2 * tp + fpos + fneg),
    }
}

impl MetricReport {
    pub fn rows(&self) -> [(&'static str, Option<f64>); 7] {
        [
            ("accuracy", self.accuracy),
            ("sensitivity", self.sensitivity),
            ("specificity", self.specificity),
            ("precision", self.precision),
            ("npv", self.npv),
            ("balanced_accuracy", self.balanced_accuracy),
            ("f1", self.f1),
        ]
    }

    /// `metric,value` lines; undefined metrics are written as `undefined`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "metric,value")?;
        for (name, v) in self.rows() {
            match v {
                Some(v) => writeln!(w, "{name},{v}")?,
                None => writeln!(w, "{name},undefined")?,
            }
        }
        Ok(())
    }
}

/// ROC points `(fpr, tpr)` from `(0, 0)` to `(1, 1)` and the trapezoidal area.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// Sweep thresholds over distinct score values, highest first.
///
/// Tied scores move the curve diagonally, so the trapezoidal area equals
/// `P(s+ > s-) + P(s+ = s-) / 2`.
pub fn roc_auc(y: &[f64], scores: &[f64]) -> Result<RocCurve> {
    check_lengths(y.len(), scores.len())?;
    check_binary(y, "y")?;
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::InvalidArgument(format!("score {i} is not finite")));
    }
    let pos = y.iter().filter(|&&v| v == 1.0).count();
    let neg = y.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::InvalidArgument("roc_auc needs both classes".into()));
    }
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let (p, q) = (pos as f64, neg as f64);
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut area = 0.0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (tp0, fp0) = (tp, fp);
        while i < order.len() && scores[order[i]] == s {
            if y[order[i]] == 1.0 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        // Accumulate in counts so the area is exact up to one final division.
        area += (fp - fp0) as f64 * (tp + tp0) as f64;
        points.push((fp as f64 / q, tp as f64 / p));
    }
    Ok(RocCurve {
        points,
        auc: area / (2.0 * p * q),
    })
}

pub fn auc(y: &[f64], scores: &[f64]) -> Result<f64> {
    roc_auc(y, scores).map(|c| c.auc)
}

impl RocCurve {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "fpr,tpr")?;
        for (f, t) in &self.points {
            writeln!(w, "{f},{t}")?;
        }
        Ok(())
    }
}
