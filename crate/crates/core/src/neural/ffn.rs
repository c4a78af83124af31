//! One-hidden-layer feed-forward classifier:
//! `yhat = sigmoid(w2 . relu(W1 x + b1) + b2)`.
//!
//! Inputs are consumed sparsely: zero entries and gated-off features never
//! enter the forward or backward pass.

use ndarray::{Array1, Array2};
use rand::Rng;
use rayon::prelude::*;

use super::activation::Activation;
use super::rnn::output_delta;
use super::train::{record, LearningCurve, TrainConfig};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::screening::GateMask;
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct FfnParams {
    /// `H x p`.
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array1<f64>,
    pub b2: f64,
    pub hidden_activation: Activation,
}

impl FfnParams {
    pub fn zeros(inputs: usize, hidden: usize) -> Self {
        Self {
            w1: Array2::zeros((hidden, inputs)),
            b1: Array1::zeros(hidden),
            w2: Array1::zeros(hidden),
            b2: 0.0,
            hidden_activation: Activation::Relu,
        }
    }

    pub fn random(inputs: usize, hidden: usize, scale: f64, seed: u64) -> Self {
        let mut rng = seed::rng(seed::derive(seed, "ffn-init"));
        let mut p = Self::zeros(inputs, hidden);
        let mut draw = || rng.gen_range(-scale..=scale);
        p.w1.mapv_inplace(|_| draw());
        p.b1.mapv_inplace(|_| draw());
        p.w2.mapv_inplace(|_| draw());
        p.b2 = draw();
        p
    }

    pub fn inputs(&self) -> usize {
        self.w1.ncols()
    }

    pub fn hidden(&self) -> usize {
        self.b1.len()
    }

    pub fn param_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + 1
    }

    /// Flattened as `W1, b1, w2, b2`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        out.extend(self.w1.iter());
        out.extend(self.b1.iter());
        out.extend(self.w2.iter());
        out.push(self.b2);
        out
    }

    pub fn set_from_slice(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} parameters",
                flat.len(),
                self.param_count()
            )));
        }
        let mut it = flat.iter().copied();
        for x in self.w1.iter_mut().chain(self.b1.iter_mut()).chain(self.w2.iter_mut()) {
            *x = it.next().expect("length checked");
        }
        self.b2 = it.next().expect("length checked");
        Ok(())
    }
}

/// Row-wise sparse view of a dataset after gating.
struct SparseRows {
    rows: Vec<Vec<(usize, f64)>>,
    labels: Vec<f64>,
}

impl SparseRows {
    fn build(ds: &LabeledDataset<f64>, mask: Option<&GateMask>, inputs: usize) -> Result<Self> {
        if ds.p() != inputs {
            return Err(Error::DimensionMismatch(format!(
                "dataset has {} features, model expects {inputs}",
                ds.p()
            )));
        }
        if let Some(m) = mask {
            if m.len() != inputs {
                return Err(Error::DimensionMismatch(format!(
                    "gate covers {} features, dataset has {inputs}",
                    m.len()
                )));
            }
        }
        let mut rows = vec![Vec::new(); ds.n()];
        for j in 0..ds.p() {
            if mask.is_some_and(|m| !m.passes(j)) {
                continue;
            }
            for (i, &x) in ds.column(j).iter().enumerate() {
                if x != 0.0 {
                    rows[i].push((j, x));
                }
            }
        }
        Ok(Self {
            rows,
            labels: ds.response().to_vec(),
        })
    }
}

struct Pass {
    pre: Array1<f64>,
    act: Array1<f64>,
    out_pre: f64,
    yhat: f64,
}

fn forward(p: &FfnParams, row: &[(usize, f64)]) -> Pass {
    let mut pre = p.b1.clone();
    for &(j, x) in row {
        pre.scaled_add(x, &p.w1.column(j));
    }
    let act = pre.mapv(|z| p.hidden_activation.value(z));
    let out_pre = p.w2.dot(&act) + p.b2;
    Pass {
        pre,
        act,
        out_pre,
        yhat: Activation::Sigmoid.value(out_pre),
    }
}

const CHUNK: usize = 64;

fn gradients_sparse(p: &FfnParams, data: &SparseRows) -> FfnParams {
    let (h, d) = (p.hidden(), p.inputs());
    let partials: Vec<FfnParams> = data
        .rows
        .par_chunks(CHUNK)
        .zip(data.labels.par_chunks(CHUNK))
        .map(|(rows, ys)| {
            let mut g = FfnParams::zeros(d, h);
            for (row, &y) in rows.iter().zip(ys) {
                let f = forward(p, row);
                let dz = output_delta(Activation::Sigmoid, f.out_pre, f.yhat, y);
                g.b2 += dz;
                g.w2.scaled_add(dz, &f.act);
                let da: Array1<f64> = f
                    .pre
                    .iter()
                    .zip(p.w2.iter())
                    .map(|(&a, &w)| dz * w * p.hidden_activation.value_and_derivative(a).1)
                    .collect();
                g.b1 += &da;
                for &(j, x) in row {
                    g.w1.column_mut(j).scaled_add(x, &da);
                }
            }
            g
        })
        .collect();
    let mut total = FfnParams::zeros(d, h);
    for g in &partials {
        total.w1 += &g.w1;
        total.b1 += &g.b1;
        total.w2 += &g.w2;
        total.b2 += g.b2;
    }
    total
}

/// Gradients of the summed cross-entropy, returned in an [`FfnParams`] of the
/// same shape.
pub fn ffn_gradients(p: &FfnParams, data: &LabeledDataset<f64>, mask: Option<&GateMask>) -> Result<FfnParams> {
    let rows = SparseRows::build(data, mask, p.inputs())?;
    let mut g = gradients_sparse(p, &rows);
    g.hidden_activation = p.hidden_activation;
    Ok(g)
}

fn predict_sparse(p: &FfnParams, data: &SparseRows) -> Vec<f64> {
    data.rows.par_iter().map(|r| forward(p, r).yhat).collect()
}

pub fn predict_ffn(p: &FfnParams, data: &LabeledDataset<f64>, mask: Option<&GateMask>) -> Result<Vec<f64>> {
    Ok(predict_sparse(p, &SparseRows::build(data, mask, p.inputs())?))
}

/// Full-batch gradient descent on the mean cross-entropy from a seeded
/// random start.
pub fn train_ffn(
    train: &LabeledDataset<f64>,
    val: &LabeledDataset<f64>,
    hidden: usize,
    cfg: &TrainConfig,
    mask: Option<&GateMask>,
) -> Result<(FfnParams, LearningCurve)> {
    cfg.validate()?;
    if hidden == 0 {
        return Err(Error::InvalidArgument("hidden layer must have at least one unit".into()));
    }
    let p0 = FfnParams::random(train.p(), hidden, cfg.init_scale, cfg.seed);
    train_ffn_from(p0, train, val, cfg, mask)
}

pub fn train_ffn_from(
    mut p: FfnParams,
    train: &LabeledDataset<f64>,
    val: &LabeledDataset<f64>,
    cfg: &TrainConfig,
    mask: Option<&GateMask>,
) -> Result<(FfnParams, LearningCurve)> {
    cfg.validate()?;
    if train.n() == 0 || val.n() == 0 {
        return Err(Error::InvalidArgument("training and validation sets must be non-empty".into()));
    }
    let tr = SparseRows::build(train, mask, p.inputs())?;
    let va = SparseRows::build(val, mask, p.inputs())?;
    let step = cfg.eta / train.n() as f64;
    let mut curve = LearningCurve::default();
    for epoch in 1..=cfg.epochs {
        let g = gradients_sparse(&p, &tr);
        p.w1.scaled_add(-step, &g.w1);
        p.b1.scaled_add(-step, &g.b1);
        p.w2.scaled_add(-step, &g.w2);
        p.b2 -= step * g.b2;
        let yt = predict_sparse(&p, &tr);
        let yv = predict_sparse(&p, &va);
        curve.records.push(record(epoch, (&tr.labels, &yt), (&va.labels, &yv))?);
    }
    Ok((p, curve))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable(n: usize) -> LabeledDataset<f64> {
        let x: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let noise: Vec<f64> = (0..n).map(|i| ((i * 7) % 5) as f64 / 5.0).collect();
        let y: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { 0.0 }).collect();
        LabeledDataset::from_columns(vec![x, noise], y).unwrap()
    }

    #[test]
    fn loss_decreases_on_separable_data() {
        let ds = separable(40);
        let cfg = TrainConfig {
            eta: 1.0,
            epochs: 60,
            ..TrainConfig::default()
        };
        let (_, curve) = train_ffn(&ds, &ds, 4, &cfg, None).unwrap();
        let first = curve.records[0].train_loss;
        let last = curve.last().unwrap().train_loss;
        assert!(last < first * 0.5, "{first} -> {last}");
        assert_eq!(curve.last().unwrap().train_auc, 1.0);
    }

    #[test]
    fn gating_matches_zeroed_column_exactly() {
        let ds = separable(30);
        let mask = GateMask::from_mask(vec![1.0, 0.0], vec![true, false]).unwrap();
        let zeroed = ds.with_column(1, vec![0.0; 30]).unwrap();
        let cfg = TrainConfig {
            epochs: 10,
            ..TrainConfig::default()
        };
        let (a, ca) = train_ffn(&ds, &ds, 3, &cfg, Some(&mask)).unwrap();
        let (b, cb) = train_ffn(&zeroed, &zeroed, 3, &cfg, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(ca, cb);
    }

    #[test]
    fn zero_model_predicts_half() {
        let ds = separable(4);
        let p = FfnParams::zeros(2, 3);
        assert_eq!(predict_ffn(&p, &ds, None).unwrap(), vec![0.5; 4]);
    }

    #[test]
    fn shape_errors() {
        let ds = separable(4);
        let p = FfnParams::zeros(3, 2);
        assert!(predict_ffn(&p, &ds, None).is_err());
        let m = GateMask::open(5);
        assert!(predict_ffn(&FfnParams::zeros(2, 2), &ds, Some(&m)).is_err());
        assert!(train_ffn(&ds, &ds, 0, &TrainConfig::default(), None).is_err());
    }

    #[test]
    fn flat_round_trip() {
        let p = FfnParams::random(3, 2, 0.5, 1);
        let mut q = FfnParams::zeros(3, 2);
        q.set_from_slice(&p.to_vec()).unwrap();
        assert_eq!(p, q);
        assert!(q.set_from_slice(&[0.0]).is_err());
    }
}
