//! The influence score (I-score) in its deviation, general and normalized forms.
//!
//! For a partition with cells `j`, the general form is
//! `I = sum_j n_j^2 (mean_j - mean)^2`. With a binary response this equals the
//! squared deviation of each cell's count of ones from its expectation,
//! `sum_j (n1_j - n_j * pi1)^2`. The normalized score divides by `n * sigma^2`
//! with `sigma^2` the population variance of the response.
//!
//! For a binary predictor the two cells of `I` can be written through the
//! confusion table (see [`iscore_from_confusion`]): the predicted-positive cell
//! contributes `((sensitivity - (a1 + a3) / n) * (a1 + a2))^2` and the
//! predicted-negative cell `(a2 - (a1 + a2)(a2 + a4) / n)^2`. When false
//! negatives vanish (`a2 -> 0`) the second part tends to `(mean * a4)^2`, which
//! grows with specificity; only the exact parts are computed here.

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::metrics::ConfusionTable;
use crate::partition::{build_partitions, PartitionTable};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct IScoreResult<T> {
    pub raw: T,
    pub normalized: T,
    pub n: usize,
    pub sigma2: T,
    pub cell_count: usize,
}

/// `sum_j n_j^2 (mean_j - mean)^2`, accumulated in key-sorted cell order.
pub fn iscore_raw<T: Scalar>(table: &PartitionTable<T>) -> T {
    let mean = table.global_mean();
    table.cells().iter().fold(T::zero(), |acc, (_, cell)| {
        let nj = T::from_usize_exact(cell.n_j);
        let d = cell.local_mean.clone() - mean.clone();
        acc + nj.clone() * nj * d.clone() * d
    })
}

/// `sum_j (n1_j - n_j * pi1)^2`; defined for binary responses only.
pub fn iscore_deviation_form<T: Scalar>(table: &PartitionTable<T>) -> Result<T> {
    let pi1 = table.pi1().ok_or(Error::NonBinaryResponse)?;
    Ok(table.cells().iter().fold(T::zero(), |acc, (_, cell)| {
        let d = T::from_usize_exact(cell.n1_j) - T::from_usize_exact(cell.n_j) * pi1.clone();
        acc + d.clone() * d
    }))
}

pub fn iscore_normalized<T: Scalar>(table: &PartitionTable<T>) -> Result<IScoreResult<T>> {
    let stats = table.stats();
    if !(stats.variance > T::zero()) {
        return Err(Error::ConstantResponse);
    }
    let raw = iscore_raw(table);
    let normalized = raw.clone() / (T::from_usize_exact(stats.n) * stats.variance.clone());
    Ok(IScoreResult {
        raw,
        normalized,
        n: stats.n,
        sigma2: stats.variance.clone(),
        cell_count: table.len(),
    })
}

/// Normalized I-score of a variable subset of a dataset.
pub fn subset_iscore<T: Scalar>(ds: &LabeledDataset<T>, subset: &[usize]) -> Result<IScoreResult<T>> {
    iscore_normalized(&build_partitions(ds, subset)?)
}

/// Raw I-score of a binary predictor from its confusion table, as the sum of
/// the predicted-positive and predicted-negative cell contributions.
pub fn iscore_from_confusion<T: Scalar>(ct: &ConfusionTable) -> Result<T> {
    if ct.n() == 0 {
        return Err(Error::InvalidArgument("all-zero confusion table".into()));
    }
    if ct.alpha1 + ct.alpha2 == 0 {
        return Err(Error::InvalidArgument(
            "confusion table has no actual positives; sensitivity undefined".into(),
        ));
    }
    let c = |v: u64| T::from_u64(v).expect("count representable");
    let (a1, a2, a3, a4) = (c(ct.alpha1), c(ct.alpha2), c(ct.alpha3), c(ct.alpha4));
    let n = c(ct.n());
    let positives = a1.clone() + a2.clone();
    let sensitivity = a1.clone() / positives.clone();
    let part_i = {
        let v = (sensitivity - (a1 + a3) / n.clone()) / (T::one() / positives.clone());
        v.clone() * v
    };
    let part_ii = {
        let v = a2.clone() - positives * (a2 + a4) / n;
        v.clone() * v
    };
    Ok(part_i + part_ii)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::partition_by_values;
    use crate::Exact;
    use num_traits::FromPrimitive;
    use proptest::prelude::*;

    fn table(x: &[f64], y: &[f64]) -> PartitionTable<f64> {
        partition_by_values(x, y).unwrap()
    }

    #[test]
    fn perfect_predictor() {
        let t = table(&[1.0, 1.0, 0.0, 0.0], &[1.0, 1.0, 0.0, 0.0]);
        assert_eq!(iscore_raw(&t), 2.0);
        assert_eq!(iscore_deviation_form(&t).unwrap(), 2.0);
        let r = iscore_normalized(&t).unwrap();
        assert_eq!((r.normalized, r.sigma2, r.n, r.cell_count), (2.0, 0.25, 4, 2));
    }

    #[test]
    fn independent_and_constant() {
        let t = table(&[1.0, 0.0, 1.0, 0.0], &[1.0, 1.0, 0.0, 0.0]);
        assert_eq!(iscore_raw(&t), 0.0);
        let c = table(&[1.0, 0.0, 1.0, 0.0], &[1.0; 4]);
        assert_eq!(iscore_raw(&c), 0.0);
        assert_eq!(iscore_deviation_form(&c).unwrap(), 0.0);
        assert!(matches!(iscore_normalized(&c), Err(Error::ConstantResponse)));
    }

    #[test]
    fn single_precision_matches() {
        let t32 = partition_by_values(&[1.0f32, 1.0, 0.0, 0.0], &[1.0f32, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(iscore_raw(&t32), 2.0f32);
        assert_eq!(iscore_normalized(&t32).unwrap().normalized, 2.0f32);
    }

    #[test]
    fn deviation_form_requires_binary() {
        let t = table(&[1.0, 0.0], &[0.5, 1.0]);
        assert!(matches!(iscore_deviation_form(&t), Err(Error::NonBinaryResponse)));
    }

    #[test]
    fn confusion_closed_form() {
        let ct = ConfusionTable::new(2, 0, 0, 2);
        assert_eq!(iscore_from_confusion::<f64>(&ct).unwrap(), 2.0);
        assert_eq!(iscore_from_confusion::<f64>(&ConfusionTable::new(1, 1, 1, 1)).unwrap(), 0.0);
        assert!(iscore_from_confusion::<f64>(&ConfusionTable::new(0, 0, 0, 0)).is_err());
    }

    #[test]
    fn duplicating_rows_doubles_normalized_score() {
        let x = [1.0, 1.0, 0.0, 0.0];
        let y = [1.0, 1.0, 0.0, 0.0];
        let once = iscore_normalized(&table(&x, &y)).unwrap().normalized;
        let x2: Vec<f64> = x.iter().chain(&x).copied().collect();
        let y2: Vec<f64> = y.iter().chain(&y).copied().collect();
        let twice = iscore_normalized(&table(&x2, &y2)).unwrap().normalized;
        assert_eq!(twice, 2.0 * once);
    }

    proptest! {
        #[test]
        fn deviation_form_equals_general_form_exactly(
            rows in prop::collection::vec((0u8..4, 0u8..2), 1..80)
        ) {
            let x: Vec<Exact> = rows.iter().map(|r| Exact::from_u8(r.0).unwrap()).collect();
            let y: Vec<Exact> = rows.iter().map(|r| Exact::from_u8(r.1).unwrap()).collect();
            let t = partition_by_values(&x, &y).unwrap();
            prop_assert_eq!(iscore_deviation_form(&t).unwrap(), iscore_raw(&t));
        }
    }
}
