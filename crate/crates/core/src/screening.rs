//! Supervised discretization, the Backward Dropping Algorithm, marginal
//! ranking and the I-score gate.

use std::io::Write;

use rand::seq::index;
use rayon::prelude::*;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::influence::iscore_normalized;
use crate::partition::{
    check_subset, partition_by_values, table_from_coded, CodedColumn, PartitionOptions, ResponseStats,
};
use crate::scalar::Scalar;
use crate::seed;

/// Binary cut `1(x > threshold)` for one column.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizationRule<T> {
    pub column: usize,
    pub threshold: T,
    pub iscore_at_best: T,
}

/// Find the observed value `t` maximizing the normalized I-score of
/// `1(x > t)`; ties go to the smallest `t`.
pub fn discretize<T: Scalar>(ds: &LabeledDataset<T>, column: usize) -> Result<DiscretizationRule<T>> {
    ds.check_column(column)?;
    let stats = ResponseStats::of(ds.response())?;
    if !(stats.variance > T::zero()) {
        return Err(Error::ConstantResponse);
    }
    let x = ds.column(column);
    let y = ds.response();
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].cmp_total(&x[b]));
    if x[order[0]].cmp_total(&x[order[order.len() - 1]]).is_eq() {
        return Err(Error::ConstantColumn(column));
    }

    let n = T::from_usize_exact(stats.n);
    let denom = n * stats.variance.clone();
    let mut best: Option<(T, T)> = None;
    let (mut left_n, mut left_sum) = (0usize, T::zero());
    let mut i = 0;
    while i < order.len() {
        let t = x[order[i]].clone();
        while i < order.len() && x[order[i]].cmp_total(&t).is_eq() {
            left_n += 1;
            left_sum = left_sum + y[order[i]].clone();
            i += 1;
        }
        // Each cell contributes (sum_cell - n_cell * mean)^2; the two
        // deviations cancel, so one square suffices.
        let dev = left_sum.clone() - T::from_usize_exact(left_n) * stats.mean.clone();
        let right_dev = (stats.sum.clone() - left_sum.clone())
            - T::from_usize_exact(stats.n - left_n) * stats.mean.clone();
        let score = (dev.clone() * dev + right_dev.clone() * right_dev) / denom.clone();
        match &best {
            Some((_, s)) if !(score > *s) => {}
            _ => best = Some((t, score)),
        }
    }
    let (threshold, iscore_at_best) = best.expect("at least two levels");
    Ok(DiscretizationRule {
        column,
        threshold,
        iscore_at_best,
    })
}

/// Replace the rule's column by its indicator.
pub fn apply_rule<T: Scalar>(ds: &LabeledDataset<T>, rule: &DiscretizationRule<T>) -> Result<LabeledDataset<T>> {
    let values = ds
        .column(rule.column)
        .iter()
        .map(|v| if *v > rule.threshold { T::one() } else { T::zero() })
        .collect();
    ds.with_column(rule.column, values)
}

/// Normalized I-score of `1(x > t)`, evaluated through an explicit partition.
pub fn threshold_score<T: Scalar>(ds: &LabeledDataset<T>, column: usize, t: &T) -> Result<T> {
    let ind: Vec<T> = ds
        .column(column)
        .iter()
        .map(|v| if v > t { T::one() } else { T::zero() })
        .collect();
    Ok(iscore_normalized(&partition_by_values(&ind, ds.response())?)?.normalized)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BdaConfig {
    pub subset_size: usize,
    pub num_draws: usize,
    pub seed: u64,
}

/// One backward-dropping trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct BdaTrace<T> {
    /// Index of the random draw that seeded this run.
    pub draw: usize,
    /// `(subset, normalized I-score)`, starting from the initial subset.
    pub steps: Vec<(Vec<usize>, T)>,
    pub return_set: Vec<usize>,
    pub return_score: T,
}

impl<T: Scalar> BdaTrace<T> {
    pub fn initial_score(&self) -> &T {
        &self.steps[0].1
    }
}

struct Scorer<'a, T> {
    coded: &'a [CodedColumn<T>],
    response: &'a [T],
    stats: &'a ResponseStats<T>,
}

impl<T: Scalar> Scorer<'_, T> {
    fn score(&self, subset: &[usize]) -> Result<T> {
        let cols: Vec<&CodedColumn<T>> = subset.iter().map(|&j| &self.coded[j]).collect();
        let table = table_from_coded(subset.to_vec(), &cols, self.response, self.stats.clone());
        Ok(iscore_normalized(&table)?.normalized)
    }

    fn run(&self, draw: usize, initial: &[usize]) -> Result<BdaTrace<T>> {
        let mut current = initial.to_vec();
        let mut steps = vec![(current.clone(), self.score(&current)?)];
        while current.len() > 1 {
            let mut best: Option<(usize, T)> = None;
            for pos in 0..current.len() {
                let mut candidate = current.clone();
                candidate.remove(pos);
                let s = self.score(&candidate)?;
                let better = match &best {
                    None => true,
                    Some((bpos, bs)) => s > *bs || (s == *bs && current[pos] > current[*bpos]),
                };
                if better {
                    best = Some((pos, s));
                }
            }
            let (pos, s) = best.expect("non-empty subset");
            current.remove(pos);
            steps.push((current.clone(), s));
        }
        let (return_set, return_score) = steps
            .iter()
            .fold(None::<&(Vec<usize>, T)>, |acc, step| match acc {
                Some(b) if !(step.1 > b.1) => Some(b),
                _ => Some(step),
            })
            .cloned()
            .expect("trace has the initial step");
        Ok(BdaTrace {
            draw,
            steps,
            return_set,
            return_score,
        })
    }
}

/// Backward dropping from one initial subset.
///
/// Each round drops the variable whose removal leaves the highest score; on
/// equal scores the variable with the larger column index goes. The return
/// set is the first subset attaining the maximum score along the trace.
pub fn bda_run<T: Scalar>(ds: &LabeledDataset<T>, initial: &[usize]) -> Result<BdaTrace<T>> {
    let checked = check_subset(ds, initial, PartitionOptions::default())?;
    let mut coded: Vec<CodedColumn<T>> = Vec::new();
    let mut local = Vec::with_capacity(initial.len());
    for c in checked {
        local.push(coded.len());
        coded.push(c);
    }
    let stats = ResponseStats::of(ds.response())?;
    let scorer = Scorer {
        coded: &coded,
        response: ds.response(),
        stats: &stats,
    };
    let trace = scorer.run(0, &local)?;
    let remap = |s: &[usize]| s.iter().map(|&l| initial[l]).collect::<Vec<_>>();
    Ok(BdaTrace {
        draw: 0,
        steps: trace.steps.iter().map(|(s, v)| (remap(s), v.clone())).collect(),
        return_set: remap(&trace.return_set),
        return_score: trace.return_score,
    })
}

/// Draw `num_draws` random size-`subset_size` subsets and run [`bda_run`] on
/// each. Traces come back sorted by return score, best first; ties keep draw
/// order.
pub fn bda_search<T: Scalar>(ds: &LabeledDataset<T>, cfg: &BdaConfig) -> Result<Vec<BdaTrace<T>>> {
    let p = ds.p();
    let all: Vec<usize> = (0..p).collect();
    // Continuous columns are reported before any size problem.
    let coded = check_subset(ds, &all, PartitionOptions::default())?;
    if cfg.subset_size == 0 || cfg.subset_size > p {
        return Err(Error::InvalidArgument(format!(
            "subset size {} must lie in 1..={p}",
            cfg.subset_size
        )));
    }
    if cfg.num_draws == 0 {
        return Err(Error::InvalidArgument("num_draws must be at least 1".into()));
    }
    let stats = ResponseStats::of(ds.response())?;

    let mut rng = seed::rng(seed::derive(cfg.seed, "bda-draws"));
    let draws: Vec<Vec<usize>> = (0..cfg.num_draws)
        .map(|_| {
            let mut s = index::sample(&mut rng, p, cfg.subset_size).into_vec();
            s.sort_unstable();
            s
        })
        .collect();

    let scorer = Scorer {
        coded: &coded,
        response: ds.response(),
        stats: &stats,
    };
    let mut traces = draws
        .par_iter()
        .enumerate()
        .map(|(b, s)| scorer.run(b, s))
        .collect::<Result<Vec<_>>>()?;
    traces.sort_by(|a, b| b.return_score.cmp_total(&a.return_score));
    Ok(traces)
}

/// Normalized single-variable I-score of every column, best first; ties keep
/// column order.
pub fn rank_marginal<T: Scalar>(ds: &LabeledDataset<T>) -> Result<Vec<(usize, T)>> {
    let stats = ResponseStats::of(ds.response())?;
    if !(stats.variance > T::zero()) {
        return Err(Error::ConstantResponse);
    }
    let all: Vec<usize> = (0..ds.p()).collect();
    let coded = check_subset(ds, &all, PartitionOptions::default())?;
    let scorer = Scorer {
        coded: &coded,
        response: ds.response(),
        stats: &stats,
    };
    let mut ranked = all
        .iter()
        .map(|&j| scorer.score(&[j]).map(|s| (j, s)))
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| b.1.cmp_total(&a.1));
    Ok(ranked)
}

/// Per-feature pass/block decisions derived from I-scores.
#[derive(Debug, Clone, PartialEq)]
pub struct GateMask {
    pub scores: Vec<f64>,
    /// Largest score among blocked features (`-inf` when nothing is blocked).
    pub threshold: f64,
    pub mask: Vec<bool>,
}

impl GateMask {
    /// Every feature passes.
    pub fn open(len: usize) -> Self {
        Self {
            scores: vec![0.0; len],
            threshold: f64::NEG_INFINITY,
            mask: vec![true; len],
        }
    }

    pub fn from_mask(scores: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        if scores.len() != mask.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} scores for {} mask entries",
                scores.len(),
                mask.len()
            )));
        }
        let threshold = scores
            .iter()
            .zip(&mask)
            .filter(|(_, &m)| !m)
            .map(|(s, _)| *s)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            scores,
            threshold,
            mask,
        })
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn kept(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn kept_indices(&self) -> Vec<usize> {
        (0..self.mask.len()).filter(|&i| self.mask[i]).collect()
    }

    pub fn passes(&self, i: usize) -> bool {
        self.mask[i]
    }
}

/// Number of features kept by a top-`fraction` gate over `len` features.
pub fn gate_keep_count(len: usize, top_fraction: f64) -> usize {
    // The small offset absorbs representation error in products like 0.05 * 800.
    ((top_fraction * len as f64 - 1e-9).ceil().max(0.0) as usize).min(len)
}

/// Keep the top `ceil(top_fraction * len)` scores; ties at the cutoff keep
/// lower indices first.
pub fn gate_threshold(scores: &[f64], top_fraction: f64) -> Result<GateMask> {
    if scores.is_empty() {
        return Err(Error::InvalidArgument("no scores to gate".into()));
    }
    if !(top_fraction > 0.0 && top_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "top_fraction must lie in (0, 1], got {top_fraction}"
        )));
    }
    let keep = gate_keep_count(scores.len(), top_fraction);
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut mask = vec![false; scores.len()];
    for &i in &order[..keep] {
        mask[i] = true;
    }
    GateMask::from_mask(scores.to_vec(), mask)
}

/// `feature,iscore` rows in ranking order.
pub fn write_ranking<W: Write, T: Scalar>(names: &[String], ranking: &[(usize, T)], mut w: W) -> std::io::Result<()> {
    writeln!(w, "feature,iscore")?;
    for (j, s) in ranking {
        writeln!(w, "{},{}", names[*j], s)?;
    }
    Ok(())
}

/// `draw,return_set,return_score` rows; sets are `;`-joined column names.
pub fn write_returns<W: Write, T: Scalar>(names: &[String], traces: &[BdaTrace<T>], mut w: W) -> std::io::Result<()> {
    writeln!(w, "draw,return_set,return_score")?;
    for t in traces {
        writeln!(w, "{},{},{}", t.draw, join_names(names, &t.return_set), t.return_score)?;
    }
    Ok(())
}

/// `draw,step,subset,iscore` rows for every step of every trace.
pub fn write_steps<W: Write, T: Scalar>(names: &[String], traces: &[BdaTrace<T>], mut w: W) -> std::io::Result<()> {
    writeln!(w, "draw,step,subset,iscore")?;
    for t in traces {
        for (i, (s, v)) in t.steps.iter().enumerate() {
            writeln!(w, "{},{},{},{}", t.draw, i, join_names(names, s), v)?;
        }
    }
    Ok(())
}

pub fn join_names(names: &[String], subset: &[usize]) -> String {
    subset.iter().map(|&j| names[j].as_str()).collect::<Vec<_>>().join(";")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::influence::subset_iscore;
    use rand::Rng;

    fn ds(cols: Vec<Vec<f64>>, y: Vec<f64>) -> LabeledDataset<f64> {
        LabeledDataset::from_columns(cols, y).unwrap()
    }

    fn xor_noise(n: usize, p: usize, seed: u64) -> LabeledDataset<f64> {
        let mut rng = seed::rng(seed);
        let cols: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..n).map(|_| f64::from(rng.gen_range(0u8..2))).collect())
            .collect();
        let y = (0..n).map(|i| (cols[0][i] + cols[1][i]) % 2.0).collect();
        ds(cols, y)
    }

    #[test]
    fn discretize_picks_best_cut() {
        let d = ds(vec![vec![1.0, 2.0, 3.0, 4.0]], vec![0.0, 0.0, 1.0, 1.0]);
        let rule = discretize(&d, 0).unwrap();
        assert_eq!((rule.threshold, rule.iscore_at_best), (2.0, 2.0));
        for (t, s) in [(1.0, 0.5), (3.0, 0.5), (4.0, 0.0)] {
            assert!((threshold_score(&d, 0, &t).unwrap() - s).abs() < 1e-12);
        }
        let applied = apply_rule(&d, &rule).unwrap();
        assert_eq!(applied.column(0), [0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn discretize_binary_and_errors() {
        let d = ds(vec![vec![0.0, 1.0, 0.0, 1.0]], vec![0.0, 1.0, 0.0, 1.0]);
        let rule = discretize(&d, 0).unwrap();
        assert_eq!(rule.threshold, 0.0);
        assert_eq!(rule.iscore_at_best, subset_iscore(&d, &[0]).unwrap().normalized);

        let c = ds(vec![vec![5.0; 4]], vec![0.0, 1.0, 0.0, 1.0]);
        assert_eq!(discretize(&c, 0).unwrap_err().to_string(), "constant column 0");
        let cy = ds(vec![vec![1.0, 2.0]], vec![1.0, 1.0]);
        assert!(matches!(discretize(&cy, 0), Err(Error::ConstantResponse)));
    }

    #[test]
    fn all_below_threshold_gives_zero_column() {
        let d = ds(vec![vec![1.0, 2.0, 3.0]], vec![0.0, 1.0, 1.0]);
        let rule = DiscretizationRule {
            column: 0,
            threshold: 3.0,
            iscore_at_best: 0.0,
        };
        assert_eq!(apply_rule(&d, &rule).unwrap().column(0), [0.0; 3]);
    }

    #[test]
    fn bda_drops_noise_first() {
        let d = xor_noise(2000, 3, 11);
        let trace = bda_run(&d, &[0, 1, 2]).unwrap();
        assert_eq!(trace.steps[1].0, vec![0, 1]);
        assert_eq!(trace.return_set, vec![0, 1]);
        assert!((trace.return_score - 500.0).abs() < 25.0, "{}", trace.return_score);
        for (s, v) in &trace.steps {
            assert_eq!(*v, subset_iscore(&d, s).unwrap().normalized);
        }
        assert!(trace.steps.windows(2).all(|w| w[0].0.len() == w[1].0.len() + 1));
    }

    #[test]
    fn bda_singleton_initial() {
        let d = xor_noise(100, 3, 1);
        let t = bda_run(&d, &[2]).unwrap();
        assert_eq!(t.steps.len(), 1);
        assert_eq!(t.return_set, vec![2]);
    }

    #[test]
    fn bda_tie_drops_larger_index() {
        // Columns 1 and 2 are identical noise, so dropping either ties.
        let x0 = vec![0.0, 0.0, 1.0, 1.0, 0.0, 1.0];
        let x1 = vec![0.0, 1.0, 0.0, 1.0, 1.0, 0.0];
        let y = vec![0.0, 0.0, 1.0, 1.0, 0.0, 1.0];
        let d = ds(vec![x0, x1.clone(), x1], y);
        let t = bda_run(&d, &[0, 1, 2]).unwrap();
        assert_eq!(t.steps[1].0, vec![0, 1]);
    }

    #[test]
    fn bda_rejects_continuous() {
        let xs: Vec<f64> = (0..100).map(f64::from).collect();
        let y: Vec<f64> = (0..100).map(|i| f64::from(i % 2)).collect();
        let d = ds(vec![xs], y);
        let err = bda_run(&d, &[0]).unwrap_err();
        assert!(err.to_string().contains("discretize"));
    }

    #[test]
    fn bda_search_finds_pair_and_is_deterministic() {
        let d = xor_noise(2000, 10, 5);
        let cfg = BdaConfig {
            subset_size: 3,
            num_draws: 50,
            seed: 2024,
        };
        let traces = bda_search(&d, &cfg).unwrap();
        assert_eq!(traces.len(), 50);
        let mut best = traces[0].return_set.clone();
        best.sort_unstable();
        assert_eq!(best, vec![0, 1]);
        assert!(traces.windows(2).all(|w| w[0].return_score >= w[1].return_score));
        assert_eq!(traces, bda_search(&d, &cfg).unwrap());

        let one = bda_search(&d, &BdaConfig { subset_size: 10, num_draws: 1, seed: 0 }).unwrap();
        assert_eq!(one[0].steps[0].0, (0..10).collect::<Vec<_>>());
        assert!(bda_search(&d, &BdaConfig { subset_size: 11, num_draws: 1, seed: 0 }).is_err());
    }

    #[test]
    fn marginal_ranking() {
        let mut d = xor_noise(2000, 4, 3);
        let dagger: Vec<f64> = d.response().to_vec();
        d = d.with_appended_column("Xdag", dagger).unwrap();
        d = d.with_appended_column("C", vec![1.0; 2000]).unwrap();
        let ranked = rank_marginal(&d).unwrap();
        assert_eq!(ranked[0].0, 4);
        let ones = d.response().iter().filter(|&&v| v == 1.0).count() as f64;
        let expect = 2.0 * ones * (2000.0 - ones) / 2000.0;
        assert!((ranked[0].1 - expect).abs() < 1e-6);
        assert_eq!(*ranked.last().unwrap(), (5, 0.0));
        for &(j, s) in &ranked {
            // Singletons of an XOR pair are null: the score is roughly chi-square(1).
            if j < 2 {
                assert!(s < 10.0, "{s}");
            }
        }
    }

    #[test]
    fn gate_examples() {
        let scores: Vec<f64> = (0..800).map(|i| f64::from(i) * 0.5).collect();
        let g = gate_threshold(&scores, 0.05).unwrap();
        assert_eq!(g.kept(), 40);
        assert!(g.mask.iter().zip(&scores).all(|(&m, &s)| m == (s > g.threshold)));
        assert!(gate_threshold(&scores, 1.0).unwrap().mask.iter().all(|&m| m));
        let flat = gate_threshold(&[1.0; 10], 0.25).unwrap();
        assert_eq!(flat.kept_indices(), vec![0, 1, 2]);
        assert!(gate_threshold(&[], 0.5).is_err());
    }
}
