//! The partition-retention feature: each row gets the training-set local mean
//! of the response in its partition cell.
//!
//! Test rows reuse the training means; cells never seen in training fall back
//! to the training global mean. The response of the transformed data is never
//! read. The feature is real valued; under a noiseless response it takes few
//! distinct values and can be partitioned directly, otherwise discretize it
//! before using it as a partition variable.

use std::io::{BufRead, Write};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::partition::{build_partitions_with, PartitionKey, PartitionOptions};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct DaggerMap<T> {
    pub subset: Vec<usize>,
    /// Training cells in key order with their local means.
    pub table: Vec<(PartitionKey<T>, T)>,
    pub fallback: T,
}

pub fn fit_dagger<T: Scalar>(train: &LabeledDataset<T>, subset: &[usize]) -> Result<DaggerMap<T>> {
    fit_dagger_with(train, subset, PartitionOptions::default())
}

pub fn fit_dagger_with<T: Scalar>(
    train: &LabeledDataset<T>,
    subset: &[usize],
    opts: PartitionOptions,
) -> Result<DaggerMap<T>> {
    let table = build_partitions_with(train, subset, opts)?;
    Ok(DaggerMap {
        subset: subset.to_vec(),
        table: table
            .cells()
            .iter()
            .map(|(k, c)| (k.clone(), c.local_mean.clone()))
            .collect(),
        fallback: table.global_mean().clone(),
    })
}

impl<T: Scalar> DaggerMap<T> {
    pub fn lookup(&self, key: &PartitionKey<T>) -> &T {
        match self.table.binary_search_by(|(k, _)| k.cmp(key)) {
            Ok(i) => &self.table[i].1,
            Err(_) => &self.fallback,
        }
    }

    /// `<source names...>,mean` rows, then a `*` row holding the fallback.
    pub fn write_csv<W: Write>(&self, names: &[String], mut w: W) -> std::io::Result<()> {
        let header: Vec<&str> = self.subset.iter().map(|&j| names[j].as_str()).collect();
        writeln!(w, "{},mean", header.join(","))?;
        for (k, v) in &self.table {
            let key: Vec<String> = k.0.iter().map(ToString::to_string).collect();
            writeln!(w, "{},{v}", key.join(","))?;
        }
        let stars = vec!["*"; self.subset.len()];
        writeln!(w, "{},{}", stars.join(","), self.fallback)
    }
}

impl DaggerMap<f64> {
    /// Read a map written by [`DaggerMap::write_csv`]; `names` resolves the header.
    pub fn read_csv<R: BufRead>(names: &[String], r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let parse_err = |row: usize, message: String| Error::Parse {
            row,
            column: None,
            message,
        };
        let (_, header) = lines.next().ok_or(Error::EmptyDataset)?;
        let header = header.map_err(|e| parse_err(0, e.to_string()))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.last() != Some(&"mean") {
            return Err(parse_err(0, "last header field must be `mean`".into()));
        }
        let subset = cols[..cols.len() - 1]
            .iter()
            .map(|c| {
                names
                    .iter()
                    .position(|n| n == c)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown column {c:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut table = Vec::new();
        let mut fallback = None;
        for (row, line) in lines {
            let line = line.map_err(|e| parse_err(row, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != subset.len() + 1 {
                return Err(parse_err(row, "ragged row".into()));
            }
            let num = |s: &str, c: usize| -> Result<f64> {
                s.trim().parse().map_err(|_| Error::Parse {
                    row,
                    column: Some(c),
                    message: format!("non-numeric cell {s:?}"),
                })
            };
            let mean = num(fields[subset.len()], subset.len())?;
            if fields[0] == "*" {
                fallback = Some(mean);
            } else {
                let key = fields[..subset.len()]
                    .iter()
                    .enumerate()
                    .map(|(c, s)| num(s, c))
                    .collect::<Result<Vec<_>>>()?;
                table.push((PartitionKey(key), mean));
            }
        }
        table.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(Self {
            subset,
            table,
            fallback: fallback.ok_or_else(|| parse_err(0, "missing fallback row".into()))?,
        })
    }
}

pub fn transform_dagger<T: Scalar>(map: &DaggerMap<T>, ds: &LabeledDataset<T>) -> Result<Vec<T>> {
    for &j in &map.subset {
        ds.check_column(j)?;
    }
    let mut key = PartitionKey(Vec::with_capacity(map.subset.len()));
    Ok((0..ds.n())
        .map(|i| {
            key.0.clear();
            key.0.extend(map.subset.iter().map(|&j| ds.column(j)[i].clone()));
            map.lookup(&key).clone()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::partition_by_values;
    use proptest::prelude::*;

    fn xor() -> LabeledDataset<f64> {
        LabeledDataset::from_columns(
            vec![vec![1.0, 1.0, 0.0, 0.0], vec![1.0, 0.0, 1.0, 0.0]],
            vec![0.0, 1.0, 1.0, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn fits_xor_cells() {
        let map = fit_dagger(&xor(), &[0, 1]).unwrap();
        let keys: Vec<(Vec<f64>, f64)> = map.table.iter().map(|(k, v)| (k.0.clone(), *v)).collect();
        assert_eq!(
            keys,
            vec![
                (vec![0.0, 0.0], 0.0),
                (vec![0.0, 1.0], 1.0),
                (vec![1.0, 0.0], 1.0),
                (vec![1.0, 1.0], 0.0)
            ]
        );
        assert_eq!(map.fallback, 0.5);
        assert!(fit_dagger(&xor(), &[]).is_err());
    }

    #[test]
    fn transforms_with_fallback() {
        let map = fit_dagger(&xor(), &[0, 1]).unwrap();
        let test = LabeledDataset::from_columns(
            vec![vec![1.0, 0.0, 2.0], vec![1.0, 1.0, 0.0]],
            vec![0.0, 0.0, 0.0],
        )
        .unwrap();
        assert_eq!(transform_dagger(&map, &test).unwrap(), vec![0.0, 1.0, 0.5]);
    }

    #[test]
    fn constant_response_map() {
        let d = xor().with_response(vec![1.0; 4]).unwrap();
        let map = fit_dagger(&d, &[0, 1]).unwrap();
        assert!(map.table.iter().all(|(_, v)| *v == 1.0));
    }

    #[test]
    fn csv_round_trip() {
        let d = xor();
        let map = fit_dagger(&d, &[1, 0]).unwrap();
        let mut buf = Vec::new();
        map.write_csv(d.column_names(), &mut buf).unwrap();
        let back = DaggerMap::read_csv(d.column_names(), buf.as_slice()).unwrap();
        assert_eq!(back, map);
    }

    fn small() -> impl Strategy<Value = (Vec<(u8, u8)>, Vec<u8>)> {
        (4usize..60).prop_flat_map(|n| {
            (
                prop::collection::vec((0u8..3, 0u8..2), n),
                prop::collection::vec(0u8..2, n),
            )
        })
    }

    fn build(xs: &[(u8, u8)], y: &[u8]) -> LabeledDataset<f64> {
        LabeledDataset::from_columns(
            vec![
                xs.iter().map(|r| f64::from(r.0)).collect(),
                xs.iter().map(|r| f64::from(r.1)).collect(),
            ],
            y.iter().map(|&v| f64::from(v)).collect(),
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn no_leakage((xs, y) in small(), other in prop::collection::vec(0u8..2, 60)) {
            let train = build(&xs, &y);
            let map = fit_dagger(&train, &[0, 1]).unwrap();
            let flipped = train.with_response(other[..xs.len()].iter().map(|&v| f64::from(v)).collect()).unwrap();
            prop_assert_eq!(transform_dagger(&map, &train).unwrap(), transform_dagger(&map, &flipped).unwrap());
        }

        #[test]
        fn self_transform_fixed_point((xs, y) in small()) {
            let train = build(&xs, &y);
            let map = fit_dagger(&train, &[0, 1]).unwrap();
            let feature = transform_dagger(&map, &train).unwrap();
            prop_assert!(map.table.iter().all(|(_, v)| (0.0..=1.0).contains(v)));
            // Grouping by the feature value and averaging the response gives
            // the value back, since equal values merge cells with equal means.
            let table = partition_by_values(&feature, train.response()).unwrap();
            for (k, c) in table.cells() {
                prop_assert!((c.local_mean - k.0[0]).abs() < 1e-12);
            }
        }
    }
}
