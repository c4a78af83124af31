//! Many-to-one recurrent classifier:
//! `h_t = g(W h_{t-1} + U x_t + b)`, `yhat = sigmoid(V h_T + c)`, `h_0 = 0`.
//!
//! An input gate over time steps replaces a blocked `x_t` by zeros, so the
//! step still applies `W` and `b`. A hidden gate replaces a blocked `h_t` by
//! zeros for everything downstream of step `t`.

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use rayon::prelude::*;

use super::activation::Activation;
use super::train::{record, LearningCurve, TrainConfig};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::screening::{discretize, gate_threshold, GateMask};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct RnnParams {
    /// Hidden-to-hidden, `H x H`.
    pub w: Array2<f64>,
    /// Input-to-hidden, `H x D`.
    pub u: Array2<f64>,
    /// Hidden-to-output, length `H`.
    pub v: Array1<f64>,
    pub b: Array1<f64>,
    pub c: f64,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
}

/// Gradients with the same shapes as [`RnnParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct RnnGrads {
    pub w: Array2<f64>,
    pub u: Array2<f64>,
    pub v: Array1<f64>,
    pub b: Array1<f64>,
    pub c: f64,
}

impl RnnGrads {
    fn zeros(hidden: usize, input: usize) -> Self {
        Self {
            w: Array2::zeros((hidden, hidden)),
            u: Array2::zeros((hidden, input)),
            v: Array1::zeros(hidden),
            b: Array1::zeros(hidden),
            c: 0.0,
        }
    }

    fn add(&mut self, other: &Self) {
        self.w += &other.w;
        self.u += &other.u;
        self.v += &other.v;
        self.b += &other.b;
        self.c += other.c;
    }

    fn scale(&mut self, k: f64) {
        self.w *= k;
        self.u *= k;
        self.v *= k;
        self.b *= k;
        self.c *= k;
    }

    /// Flattened in the order `W, U, V, b, c`, matching [`RnnParams::to_vec`].
    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = Vec::new();
        out.extend(self.w.iter());
        out.extend(self.u.iter());
        out.extend(self.v.iter());
        out.extend(self.b.iter());
        out.push(self.c);
        out
    }
}

impl RnnParams {
    /// All-zero parameters with ReLU hidden units and a sigmoid output.
    pub fn zeros(hidden: usize, input: usize) -> Self {
        Self {
            w: Array2::zeros((hidden, hidden)),
            u: Array2::zeros((hidden, input)),
            v: Array1::zeros(hidden),
            b: Array1::zeros(hidden),
            c: 0.0,
            hidden_activation: Activation::Relu,
            output_activation: Activation::Sigmoid,
        }
    }

    /// Entries drawn uniformly from `[-scale, scale]`.
    pub fn random(hidden: usize, input: usize, scale: f64, seed: u64) -> Self {
        let mut rng = seed::rng(seed::derive(seed, "rnn-init"));
        let mut p = Self::zeros(hidden, input);
        let mut draw = || rng.gen_range(-scale..=scale);
        p.w.mapv_inplace(|_| draw());
        p.u.mapv_inplace(|_| draw());
        p.v.mapv_inplace(|_| draw());
        p.b.mapv_inplace(|_| draw());
        p.c = draw();
        p
    }

    pub fn with_activations(mut self, hidden: Activation, output: Activation) -> Self {
        self.hidden_activation = hidden;
        self.output_activation = output;
        self
    }

    pub fn hidden(&self) -> usize {
        self.b.len()
    }

    pub fn input(&self) -> usize {
        self.u.ncols()
    }

    /// `H^2 + H D + H + H + 1`; one copy of `W` and `U` serves every step.
    pub fn param_count(&self) -> usize {
        self.w.len() + self.u.len() + self.v.len() + self.b.len() + 1
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        out.extend(self.w.iter());
        out.extend(self.u.iter());
        out.extend(self.v.iter());
        out.extend(self.b.iter());
        out.push(self.c);
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
        for x in self
            .w
            .iter_mut()
            .chain(self.u.iter_mut())
            .chain(self.v.iter_mut())
            .chain(self.b.iter_mut())
        {
            *x = it.next().expect("length checked");
        }
        self.c = it.next().expect("length checked");
        Ok(())
    }

    fn check(&self) -> Result<()> {
        let h = self.hidden();
        if self.w.dim() != (h, h) || self.u.nrows() != h || self.v.len() != h {
            return Err(Error::DimensionMismatch("inconsistent recurrent parameter shapes".into()));
        }
        Ok(())
    }
}

/// Optional gates applied during the forward pass, both indexed by time step.
#[derive(Debug, Clone, Copy, Default)]
pub struct RnnGates<'a> {
    pub input: Option<&'a GateMask>,
    pub hidden: Option<&'a GateMask>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RnnForward {
    /// `h_1..h_T` before hidden gating.
    pub hidden: Vec<Array1<f64>>,
    /// Pre-activations `W h_{t-1} + U x_t + b`.
    pub pre: Vec<Array1<f64>>,
    pub output_pre: f64,
    pub yhat: f64,
}

fn open(mask: Option<&GateMask>, t: usize) -> bool {
    mask.is_none_or(|m| m.passes(t))
}

fn check_sequence(p: &RnnParams, x: &Array2<f64>, gates: &RnnGates<'_>) -> Result<()> {
    p.check()?;
    if x.nrows() == 0 {
        return Err(Error::InvalidArgument("empty sequence".into()));
    }
    if x.ncols() != p.input() {
        return Err(Error::DimensionMismatch(format!(
            "sequence has {} inputs per step, model expects {}",
            x.ncols(),
            p.input()
        )));
    }
    for m in [gates.input, gates.hidden].into_iter().flatten() {
        if m.len() != x.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "gate covers {} steps, sequence has {}",
                m.len(),
                x.nrows()
            )));
        }
    }
    Ok(())
}

/// Forward pass with an optional input gate over time steps.
pub fn rnn_forward(p: &RnnParams, x: &Array2<f64>, mask: Option<&GateMask>) -> Result<RnnForward> {
    rnn_forward_gated(
        p,
        x,
        &RnnGates {
            input: mask,
            hidden: None,
        },
    )
}

pub fn rnn_forward_gated(p: &RnnParams, x: &Array2<f64>, gates: &RnnGates<'_>) -> Result<RnnForward> {
    check_sequence(p, x, gates)?;
    Ok(forward_unchecked(p, x, gates))
}

fn forward_unchecked(p: &RnnParams, x: &Array2<f64>, gates: &RnnGates<'_>) -> RnnForward {
    let steps = x.nrows();
    let mut prev = Array1::<f64>::zeros(p.hidden());
    let mut hidden = Vec::with_capacity(steps);
    let mut pre = Vec::with_capacity(steps);
    for t in 0..steps {
        let mut a = p.w.dot(&prev) + &p.b;
        if open(gates.input, t) {
            a += &p.u.dot(&x.row(t));
        }
        let h = a.mapv(|z| p.hidden_activation.value(z));
        prev = if open(gates.hidden, t) {
            h.clone()
        } else {
            Array1::zeros(p.hidden())
        };
        pre.push(a);
        hidden.push(h);
    }
    let output_pre = p.v.dot(&prev) + p.c;
    RnnForward {
        hidden,
        pre,
        output_pre,
        yhat: p.output_activation.value(output_pre),
    }
}

/// d loss / d output pre-activation for one example.
pub(crate) fn output_delta(act: Activation, z: f64, yhat: f64, y: f64) -> f64 {
    match act {
        Activation::Sigmoid => yhat - y,
        _ => {
            let (_, d) = act.value_and_derivative(z);
            (-y / yhat + (1.0 - y) / (1.0 - yhat)) * d
        }
    }
}

fn example_grads(p: &RnnParams, x: &Array2<f64>, y: f64, gates: &RnnGates<'_>, out: &mut RnnGrads) {
    let fwd = forward_unchecked(p, x, gates);
    let steps = x.nrows();
    let gated = |t: usize| -> Array1<f64> {
        if open(gates.hidden, t) {
            fwd.hidden[t].clone()
        } else {
            Array1::zeros(p.hidden())
        }
    };
    let dz = output_delta(p.output_activation, fwd.output_pre, fwd.yhat, y);
    out.c += dz;
    out.v.scaled_add(dz, &gated(steps - 1));
    // Gradient flowing into the gated state h'_t.
    let mut dh = &p.v * dz;
    for t in (0..steps).rev() {
        if !open(gates.hidden, t) {
            dh.fill(0.0);
        }
        let da: Array1<f64> = fwd.pre[t]
            .iter()
            .zip(dh.iter())
            .map(|(&a, &g)| g * p.hidden_activation.value_and_derivative(a).1)
            .collect();
        out.b += &da;
        if t > 0 {
            let prev = gated(t - 1);
            outer_add(&mut out.w, &da, prev.view());
        }
        if open(gates.input, t) {
            outer_add(&mut out.u, &da, x.row(t));
        }
        dh = p.w.t().dot(&da);
    }
}

fn outer_add(m: &mut Array2<f64>, col: &Array1<f64>, row: ArrayView1<'_, f64>) {
    for (i, &ci) in col.iter().enumerate() {
        if ci == 0.0 {
            continue;
        }
        for (j, &rj) in row.iter().enumerate() {
            m[[i, j]] += ci * rj;
        }
    }
}

/// Labeled sequences; every sequence is a `T x D` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSet {
    pub sequences: Vec<Array2<f64>>,
    pub labels: Vec<f64>,
}

impl SequenceSet {
    pub fn new(sequences: Vec<Array2<f64>>, labels: Vec<f64>) -> Result<Self> {
        if sequences.len() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} sequences for {} labels",
                sequences.len(),
                labels.len()
            )));
        }
        Ok(Self { sequences, labels })
    }

    /// Treat each dataset row as a sequence of scalar steps, one per feature.
    pub fn from_rows(ds: &LabeledDataset<f64>) -> Self {
        let sequences = (0..ds.n())
            .map(|i| Array2::from_shape_fn((ds.p(), 1), |(t, _)| ds.column(t)[i]))
            .collect();
        Self {
            sequences,
            labels: ds.response().to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

const CHUNK: usize = 32;

/// Gradients of the summed cross-entropy over the batch, unrolled through time.
///
/// Examples are processed in fixed-size chunks whose partial sums are merged
/// in order, so the result does not depend on the thread count.
pub fn bptt_gradients(p: &RnnParams, batch: &SequenceSet, gates: &RnnGates<'_>) -> Result<RnnGrads> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    for x in &batch.sequences {
        check_sequence(p, x, gates)?;
    }
    let (h, d) = (p.hidden(), p.input());
    let partials: Vec<RnnGrads> = batch
        .sequences
        .par_chunks(CHUNK)
        .zip(batch.labels.par_chunks(CHUNK))
        .map(|(xs, ys)| {
            let mut g = RnnGrads::zeros(h, d);
            for (x, &y) in xs.iter().zip(ys) {
                example_grads(p, x, y, gates, &mut g);
            }
            g
        })
        .collect();
    let mut total = RnnGrads::zeros(h, d);
    for g in &partials {
        total.add(g);
    }
    Ok(total)
}

/// `theta <- theta - eta * grad` for every parameter, biases included.
pub fn gd_step(p: &RnnParams, grads: &RnnGrads, eta: f64) -> RnnParams {
    let mut next = p.clone();
    next.w.scaled_add(-eta, &grads.w);
    next.u.scaled_add(-eta, &grads.u);
    next.v.scaled_add(-eta, &grads.v);
    next.b.scaled_add(-eta, &grads.b);
    next.c -= eta * grads.c;
    next
}

pub fn predict_rnn(p: &RnnParams, data: &SequenceSet, gates: &RnnGates<'_>) -> Result<Vec<f64>> {
    for x in &data.sequences {
        check_sequence(p, x, gates)?;
    }
    Ok(data
        .sequences
        .par_iter()
        .map(|x| forward_unchecked(p, x, gates).yhat)
        .collect())
}

/// Full-batch gradient descent on the mean cross-entropy.
pub fn train_rnn(
    p0: &RnnParams,
    train: &SequenceSet,
    val: &SequenceSet,
    cfg: &TrainConfig,
    mask: Option<&GateMask>,
) -> Result<(RnnParams, LearningCurve)> {
    train_rnn_gated(
        p0,
        train,
        val,
        cfg,
        &RnnGates {
            input: mask,
            hidden: None,
        },
    )
}

pub fn train_rnn_gated(
    p0: &RnnParams,
    train: &SequenceSet,
    val: &SequenceSet,
    cfg: &TrainConfig,
    gates: &RnnGates<'_>,
) -> Result<(RnnParams, LearningCurve)> {
    cfg.validate()?;
    if train.is_empty() || val.is_empty() {
        return Err(Error::InvalidArgument("training and validation sets must be non-empty".into()));
    }
    let mut p = p0.clone();
    let mut curve = LearningCurve::default();
    let scale = 1.0 / train.len() as f64;
    for epoch in 1..=cfg.epochs {
        let mut g = bptt_gradients(&p, train, gates)?;
        g.scale(scale);
        p = gd_step(&p, &g, cfg.eta);
        let tr = predict_rnn(&p, train, gates)?;
        let va = predict_rnn(&p, val, gates)?;
        curve.records.push(record(epoch, (&train.labels, &tr), (&val.labels, &va))?);
    }
    Ok((p, curve))
}

/// Per-step I-scores of the hidden state: for step `t`, the best normalized
/// score over hidden units of the discretized `h_t[i]` against the labels.
/// Constant units score 0.
pub fn hidden_gate_scores(p: &RnnParams, data: &SequenceSet) -> Result<Vec<f64>> {
    let fwds = data
        .sequences
        .iter()
        .map(|x| rnn_forward(p, x, None))
        .collect::<Result<Vec<_>>>()?;
    let steps = fwds.first().map_or(0, |f| f.hidden.len());
    if fwds.iter().any(|f| f.hidden.len() != steps) {
        return Err(Error::DimensionMismatch("hidden gating needs equal-length sequences".into()));
    }
    let mut scores = Vec::with_capacity(steps);
    for t in 0..steps {
        let mut best = 0.0f64;
        for i in 0..p.hidden() {
            let col: Vec<f64> = fwds.iter().map(|f| f.hidden[t][i]).collect();
            let ds = LabeledDataset::from_columns(vec![col], data.labels.clone())?;
            match discretize(&ds, 0) {
                Ok(rule) => best = best.max(rule.iscore_at_best),
                Err(Error::ConstantColumn(_)) => {}
                Err(e) => return Err(e),
            }
        }
        scores.push(best);
    }
    Ok(scores)
}

/// Hidden gate keeping the top `top_fraction` of steps by [`hidden_gate_scores`].
pub fn hidden_gate(p: &RnnParams, data: &SequenceSet, top_fraction: f64) -> Result<GateMask> {
    gate_threshold(&hidden_gate_scores(p, data)?, top_fraction)
}
