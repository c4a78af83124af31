//! Partition retention: cells induced by the joint values of a variable subset.

use std::cmp::Ordering;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default bound on distinct values per column before a column counts as continuous.
pub const DEFAULT_MAX_LEVELS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionOptions {
    pub max_levels: usize,
}

impl Default for PartitionOptions {
    fn default() -> Self {
        Self {
            max_levels: DEFAULT_MAX_LEVELS,
        }
    }
}

/// Joint values of the selected variables, in subset order.
#[derive(Debug, Clone)]
pub struct PartitionKey<T>(pub Vec<T>);

impl<T: PartialEq> PartialEq for PartitionKey<T> {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl<T: Scalar> Eq for PartitionKey<T> {}

impl<T: Scalar> PartialOrd for PartitionKey<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for PartitionKey<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.cmp_total(b))
            .find(|o| o.is_ne())
            .unwrap_or_else(|| self.0.len().cmp(&other.0.len()))
    }
}

impl<T: Scalar> PartitionKey<T> {
    pub fn arity(&self) -> usize {
        self.0.len()
    }
}

impl<T: Scalar> std::fmt::Display for PartitionKey<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Response summary of one non-empty cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionCell<T> {
    pub n_j: usize,
    pub sum_y: T,
    /// Observations with response exactly 1.
    pub n1_j: usize,
    pub local_mean: T,
}

/// Response statistics shared by every partition of one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseStats<T> {
    pub n: usize,
    pub sum: T,
    pub mean: T,
    /// Population variance (divide by n).
    pub variance: T,
    pub ones: usize,
    pub binary: bool,
}

impl<T: Scalar> ResponseStats<T> {
    pub fn of(response: &[T]) -> Result<Self> {
        let n = response.len();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let nt = T::from_usize_exact(n);
        let sum = response.iter().fold(T::zero(), |acc, y| acc + y.clone());
        let mean = sum.clone() / nt.clone();
        let variance = response.iter().fold(T::zero(), |acc, y| {
            let d = y.clone() - mean.clone();
            acc + d.clone() * d
        }) / nt;
        let ones = response.iter().filter(|y| y.is_one()).count();
        let binary = response.iter().all(|y| y.is_zero() || y.is_one());
        Ok(Self {
            n,
            sum,
            mean,
            variance,
            ones,
            binary,
        })
    }

    /// Proportion of ones; meaningful for binary responses.
    pub fn pi1(&self) -> T {
        T::from_usize_exact(self.ones) / T::from_usize_exact(self.n)
    }
}

/// Cells of the partition induced by a variable subset, sorted by key.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionTable<T> {
    subset: Vec<usize>,
    cells: Vec<(PartitionKey<T>, PartitionCell<T>)>,
    stats: ResponseStats<T>,
}

impl<T: Scalar> PartitionTable<T> {
    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn cells(&self) -> &[(PartitionKey<T>, PartitionCell<T>)] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn n(&self) -> usize {
        self.stats.n
    }

    pub fn global_mean(&self) -> &T {
        &self.stats.mean
    }

    pub fn stats(&self) -> &ResponseStats<T> {
        &self.stats
    }

    pub fn is_binary(&self) -> bool {
        self.stats.binary
    }

    /// Proportion of response = 1, when the response is binary.
    pub fn pi1(&self) -> Option<T> {
        self.stats.binary.then(|| self.stats.pi1())
    }

    /// Expected number of ones in each cell under independence, `n_j * pi1`.
    pub fn expected_n1(&self) -> Option<Vec<T>> {
        let pi1 = self.pi1()?;
        Some(
            self.cells
                .iter()
                .map(|(_, c)| T::from_usize_exact(c.n_j) * pi1.clone())
                .collect(),
        )
    }

    pub fn get(&self, key: &PartitionKey<T>) -> Option<&PartitionCell<T>> {
        self.cells
            .binary_search_by(|(k, _)| k.cmp(key))
            .ok()
            .map(|i| &self.cells[i].1)
    }
}

/// A column recoded as dense level indices into its sorted distinct values.
#[derive(Debug, Clone)]
pub(crate) struct CodedColumn<T> {
    pub levels: Vec<T>,
    pub codes: Vec<u32>,
}

impl<T: Scalar> CodedColumn<T> {
    pub fn new(values: &[T]) -> Self {
        let mut levels = values.to_vec();
        levels.sort_by(|a, b| a.cmp_total(b));
        levels.dedup_by(|a, b| a.cmp_total(b).is_eq());
        let codes = values
            .iter()
            .map(|v| {
                levels
                    .binary_search_by(|l| l.cmp_total(v))
                    .expect("value present in its own levels") as u32
            })
            .collect();
        Self { levels, codes }
    }
}

/// Number of distinct values in a column.
pub fn distinct_count<T: Scalar>(values: &[T]) -> usize {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.cmp_total(b));
    v.dedup_by(|a, b| a.cmp_total(b).is_eq());
    v.len()
}

pub(crate) fn check_subset<T: Scalar>(
    ds: &LabeledDataset<T>,
    subset: &[usize],
    opts: PartitionOptions,
) -> Result<Vec<CodedColumn<T>>> {
    if subset.is_empty() {
        return Err(Error::InvalidArgument("empty variable subset".into()));
    }
    subset
        .iter()
        .map(|&j| {
            ds.check_column(j)?;
            let coded = CodedColumn::new(ds.column(j));
            if coded.levels.len() > opts.max_levels {
                return Err(Error::NotDiscrete {
                    column: j,
                    levels: coded.levels.len(),
                    limit: opts.max_levels,
                });
            }
            Ok(coded)
        })
        .collect()
}

/// Build the table from pre-coded columns. Cells come out in key-sorted order
/// because level codes are assigned in sorted value order.
pub(crate) fn table_from_coded<T: Scalar>(
    subset: Vec<usize>,
    columns: &[&CodedColumn<T>],
    response: &[T],
    stats: ResponseStats<T>,
) -> PartitionTable<T> {
    let n = response.len();
    let radix: Option<u64> = columns
        .iter()
        .try_fold(1u64, |acc, c| acc.checked_mul(c.levels.len() as u64));

    let mut order: Vec<usize> = (0..n).collect();
    let same = |a: usize, b: usize| columns.iter().all(|c| c.codes[a] == c.codes[b]);
    if radix.is_some() {
        let code: Vec<u64> = (0..n)
            .map(|i| {
                columns
                    .iter()
                    .fold(0u64, |acc, c| acc * c.levels.len() as u64 + u64::from(c.codes[i]))
            })
            .collect();
        order.sort_by_key(|&i| code[i]);
    } else {
        order.sort_by(|&a, &b| {
            columns
                .iter()
                .map(|c| c.codes[a].cmp(&c.codes[b]))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        });
    }

    let mut cells = Vec::new();
    let mut start = 0;
    while start < n {
        let head = order[start];
        let mut end = start + 1;
        while end < n && same(head, order[end]) {
            end += 1;
        }
        let mut sum_y = T::zero();
        let mut n1_j = 0;
        for &i in &order[start..end] {
            sum_y = sum_y + response[i].clone();
            if response[i].is_one() {
                n1_j += 1;
            }
        }
        let n_j = end - start;
        let local_mean = sum_y.clone() / T::from_usize_exact(n_j);
        let key = PartitionKey(
            columns
                .iter()
                .map(|c| c.levels[c.codes[head] as usize].clone())
                .collect(),
        );
        cells.push((
            key,
            PartitionCell {
                n_j,
                sum_y,
                n1_j,
                local_mean,
            },
        ));
        start = end;
    }
    PartitionTable {
        subset,
        cells,
        stats,
    }
}

/// Partition the dataset by the joint values of `subset`.
///
/// Every selected column must have at most [`DEFAULT_MAX_LEVELS`] distinct
/// values; continuous columns go through
/// [`crate::screening::discretize`] first.
pub fn build_partitions<T: Scalar>(ds: &LabeledDataset<T>, subset: &[usize]) -> Result<PartitionTable<T>> {
    build_partitions_with(ds, subset, PartitionOptions::default())
}

pub fn build_partitions_with<T: Scalar>(
    ds: &LabeledDataset<T>,
    subset: &[usize],
    opts: PartitionOptions,
) -> Result<PartitionTable<T>> {
    let coded = check_subset(ds, subset, opts)?;
    let stats = ResponseStats::of(ds.response())?;
    let refs: Vec<&CodedColumn<T>> = coded.iter().collect();
    Ok(table_from_coded(subset.to_vec(), &refs, ds.response(), stats))
}

/// Partition rows by the distinct values of a single predictor column that is
/// not part of a dataset (a guessed model or an engineered feature).
pub fn partition_by_values<T: Scalar>(values: &[T], response: &[T]) -> Result<PartitionTable<T>> {
    if values.len() != response.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictor values for {} responses",
            values.len(),
            response.len()
        )));
    }
    let stats = ResponseStats::of(response)?;
    let coded = CodedColumn::new(values);
    Ok(table_from_coded(vec![0], &[&coded], response, stats))
}
