use std::io::Write;

use crate::error::{Error, Result};
use crate::metrics::auc;

/// Predictions are clamped to `[LOSS_CLAMP, 1 - LOSS_CLAMP]` inside the loss.
pub const LOSS_CLAMP: f64 = 1e-12;

/// `-sum_i y_i ln(yhat_i) + (1 - y_i) ln(1 - yhat_i)`.
pub fn cross_entropy(y: &[f64], yhat: &[f64]) -> Result<f64> {
    if y.len() != yhat.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {} predictions",
            y.len(),
            yhat.len()
        )));
    }
    Ok(y.iter()
        .zip(yhat)
        .map(|(&t, &p)| {
            let p = p.clamp(LOSS_CLAMP, 1.0 - LOSS_CLAMP);
            -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
        })
        .sum())
}

/// Cross-entropy divided by the number of examples.
pub fn mean_cross_entropy(y: &[f64], yhat: &[f64]) -> Result<f64> {
    Ok(cross_entropy(y, yhat)? / y.len().max(1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub eta: f64,
    pub epochs: usize,
    pub seed: u64,
    pub init_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            eta: 0.5,
            epochs: 100,
            seed: 0,
            init_scale: 0.1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) {
            return Err(Error::InvalidArgument(format!("learning rate must be positive, got {}", self.eta)));
        }
        if !(self.init_scale > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "init_scale must be positive, got {}",
                self.init_scale
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub train_auc: f64,
    pub val_auc: f64,
}

/// Per-epoch mean losses and AUCs, recorded after each update.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LearningCurve {
    pub records: Vec<EpochRecord>,
}

impl LearningCurve {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// 1-based epoch of the lowest validation loss (earliest on ties).
    pub fn best_val_epoch(&self) -> Option<usize> {
        self.records
            .iter()
            .fold(None::<&EpochRecord>, |best, r| match best {
                Some(b) if b.val_loss <= r.val_loss => Some(b),
                _ => Some(r),
            })
            .map(|r| r.epoch)
    }

    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "epoch,train_loss,val_loss,train_auc,val_auc")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.epoch, r.train_loss, r.val_loss, r.train_auc, r.val_auc
            )?;
        }
        Ok(())
    }
}

/// AUC, or NaN when a split holds a single class.
pub(crate) fn auc_or_nan(y: &[f64], scores: &[f64]) -> f64 {
    auc(y, scores).unwrap_or(f64::NAN)
}

pub(crate) fn record(
    epoch: usize,
    train: (&[f64], &[f64]),
    val: (&[f64], &[f64]),
) -> Result<EpochRecord> {
    let train_loss = mean_cross_entropy(train.0, train.1)?;
    let val_loss = mean_cross_entropy(val.0, val.1)?;
    if !train_loss.is_finite() || !val_loss.is_finite() || train.1.iter().any(|p| !p.is_finite()) {
        return Err(Error::Diverged { epoch });
    }
    Ok(EpochRecord {
        epoch,
        train_loss,
        val_loss,
        train_auc: auc_or_nan(train.0, train.1),
        val_auc: auc_or_nan(val.0, val.1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_values() {
        assert!(cross_entropy(&[1.0], &[1.0 - LOSS_CLAMP]).unwrap() < 1e-11);
        let ln2 = std::f64::consts::LN_2;
        assert!((cross_entropy(&[1.0, 0.0], &[0.5, 0.5]).unwrap() - 2.0 * ln2).abs() < 1e-15);
        assert!((cross_entropy(&[0.0], &[0.5]).unwrap() - ln2).abs() < 1e-15);
        assert!(cross_entropy(&[1.0], &[0.0]).unwrap().is_finite());
        assert!(cross_entropy(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn best_epoch_prefers_earliest() {
        let rec = |epoch, val_loss| EpochRecord {
            epoch,
            train_loss: 0.0,
            val_loss,
            train_auc: 0.5,
            val_auc: 0.5,
        };
        let c = LearningCurve {
            records: vec![rec(1, 0.6), rec(2, 0.4), rec(3, 0.4), rec(4, 0.5)],
        };
        assert_eq!(c.best_val_epoch(), Some(2));
        assert_eq!(LearningCurve::default().best_val_epoch(), None);
    }
}
