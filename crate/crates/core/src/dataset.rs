//! Labeled datasets, tabular/corpus ingestion and deterministic splits.

use std::collections::HashSet;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use log::warn;
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed;

/// An `n x p` feature matrix stored column-major, with a response vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset<T> {
    column_names: Vec<String>,
    columns: Vec<Vec<T>>,
    response: Vec<T>,
    binary: bool,
}

impl<T: Scalar> LabeledDataset<T> {
    pub fn new(column_names: Vec<String>, columns: Vec<Vec<T>>, response: Vec<T>) -> Result<Self> {
        if column_names.len() != columns.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} column names for {} columns",
                column_names.len(),
                columns.len()
            )));
        }
        let mut seen = HashSet::with_capacity(column_names.len());
        for name in &column_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate column name {name:?}")));
            }
        }
        let n = response.len();
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "column {j} has {} rows, response has {n}",
                    col.len()
                )));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite_value()) {
                return Err(Error::Parse {
                    row: i,
                    column: Some(j),
                    message: "non-finite value".into(),
                });
            }
        }
        if let Some(i) = response.iter().position(|v| !v.is_finite_value()) {
            return Err(Error::Parse {
                row: i,
                column: Some(columns.len()),
                message: "non-finite response".into(),
            });
        }
        let binary = response.iter().all(|y| y.is_zero() || y.is_one());
        Ok(Self {
            column_names,
            columns,
            response,
            binary,
        })
    }

    /// Dataset with default column names `X1..Xp`.
    pub fn from_columns(columns: Vec<Vec<T>>, response: Vec<T>) -> Result<Self> {
        let names = (1..=columns.len()).map(|j| format!("X{j}")).collect();
        Self::new(names, columns, response)
    }

    pub fn n(&self) -> usize {
        self.response.len()
    }

    pub fn p(&self) -> usize {
        self.columns.len()
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn column(&self, j: usize) -> &[T] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<T>] {
        &self.columns
    }

    pub fn response(&self) -> &[T] {
        &self.response
    }

    pub fn is_binary(&self) -> bool {
        self.binary
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    /// Resolve column names to indices.
    pub fn resolve(&self, names: &[impl AsRef<str>]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|name| {
                let name = name.as_ref();
                self.column_index(name)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown column {name:?}")))
            })
            .collect()
    }

    pub fn check_column(&self, j: usize) -> Result<()> {
        if j >= self.p() {
            return Err(Error::ColumnOutOfRange {
                index: j,
                width: self.p(),
            });
        }
        Ok(())
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        self.columns.iter().map(|c| c[i].clone()).collect()
    }

    /// New dataset made of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let pick = |v: &Vec<T>| rows.iter().map(|&i| v[i].clone()).collect::<Vec<_>>();
        let response = pick(&self.response);
        let binary = response.iter().all(|y| y.is_zero() || y.is_one());
        Self {
            column_names: self.column_names.clone(),
            columns: self.columns.iter().map(pick).collect(),
            response,
            binary,
        }
    }

    /// New dataset restricted to the given columns.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        for &j in cols {
            self.check_column(j)?;
        }
        Self::new(
            cols.iter().map(|&j| self.column_names[j].clone()).collect(),
            cols.iter().map(|&j| self.columns[j].clone()).collect(),
            self.response.clone(),
        )
    }

    pub fn with_column(&self, j: usize, values: Vec<T>) -> Result<Self> {
        self.check_column(j)?;
        let mut columns = self.columns.clone();
        columns[j] = values;
        Self::new(self.column_names.clone(), columns, self.response.clone())
    }

    pub fn with_appended_column(&self, name: impl Into<String>, values: Vec<T>) -> Result<Self> {
        let mut names = self.column_names.clone();
        names.push(name.into());
        let mut columns = self.columns.clone();
        columns.push(values);
        Self::new(names, columns, self.response.clone())
    }

    pub fn with_response(&self, response: Vec<T>) -> Result<Self> {
        Self::new(self.column_names.clone(), self.columns.clone(), response)
    }

    /// Convert every value to another scalar type through `f64`.
    ///
    /// Exact when the target is [`crate::Exact`], since every finite `f64` is a
    /// dyadic rational.
    pub fn cast<U: Scalar>(&self) -> LabeledDataset<U> {
        let conv = |v: &T| U::from_f64(v.to_f64_lossy()).expect("finite value converts");
        let response: Vec<U> = self.response.iter().map(conv).collect();
        let binary = response.iter().all(|y| y.is_zero() || y.is_one());
        LabeledDataset {
            column_names: self.column_names.clone(),
            columns: self.columns.iter().map(|c| c.iter().map(conv).collect()).collect(),
            response,
            binary,
        }
    }
}

fn parse_cell(text: &str, row: usize, column: usize) -> Result<f64> {
    let trimmed = text.trim();
    let value: f64 = trimmed.parse().map_err(|_| Error::Parse {
        row,
        column: Some(column),
        message: format!("non-numeric cell {trimmed:?}"),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse {
            row,
            column: Some(column),
            message: format!("non-finite cell {trimmed:?}"),
        });
    }
    Ok(value)
}

/// Read a comma-separated table whose last column is the response.
///
/// Rows are numbered from 0 counting data rows only (the header is not a row).
pub fn read_tabular<R: Read>(reader: R, has_header: bool) -> Result<LabeledDataset<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    let mut header: Option<Vec<String>> = None;
    if has_header {
        match records.next() {
            Some(rec) => {
                let rec = rec.map_err(|e| Error::Parse {
                    row: 0,
                    column: None,
                    message: e.to_string(),
                })?;
                header = Some(rec.iter().map(str::to_owned).collect());
            }
            None => return Err(Error::EmptyDataset),
        }
    }

    let mut width = header.as_ref().map(Vec::len);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (row, rec) in records.enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            row,
            column: None,
            message: e.to_string(),
        })?;
        if rec.len() == 1 && rec.get(0).is_some_and(str::is_empty) {
            continue;
        }
        let expected = *width.get_or_insert(rec.len());
        if rec.len() != expected {
            return Err(Error::Parse {
                row,
                column: None,
                message: format!("ragged row: {} fields, expected {expected}", rec.len()),
            });
        }
        let values = rec
            .iter()
            .enumerate()
            .map(|(c, cell)| parse_cell(cell, row, c))
            .collect::<Result<Vec<_>>>()?;
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let width = width.unwrap_or(0);
    if width < 2 {
        return Err(Error::Parse {
            row: 0,
            column: None,
            message: "need at least one feature column and a response column".into(),
        });
    }
    let p = width - 1;
    let mut columns = vec![Vec::with_capacity(rows.len()); p];
    let mut response = Vec::with_capacity(rows.len());
    for r in rows {
        for (c, v) in r.iter().take(p).enumerate() {
            columns[c].push(*v);
        }
        response.push(r[p]);
    }
    let names = match header {
        Some(h) => h.into_iter().take(p).collect(),
        None => (1..=p).map(|j| format!("X{j}")).collect(),
    };
    LabeledDataset::new(names, columns, response)
}

pub fn load_tabular(path: impl AsRef<Path>, has_header: bool) -> Result<LabeledDataset<f64>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_tabular(file, has_header)
}

/// Write a dataset as a header row followed by comma-separated values,
/// response last (column named `Y`).
///
/// `f64` values are written in shortest round-trip form, so reading the file
/// back reproduces every value bit for bit.
pub fn write_tabular<W: Write, T: Scalar>(ds: &LabeledDataset<T>, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let to_err = |e: csv::Error| Error::InvalidArgument(format!("write failed: {e}"));
    let mut header: Vec<&str> = ds.column_names().iter().map(String::as_str).collect();
    header.push("Y");
    wtr.write_record(&header).map_err(to_err)?;
    for i in 0..ds.n() {
        let mut rec: Vec<String> = ds.columns().iter().map(|c| c[i].to_string()).collect();
        rec.push(ds.response()[i].to_string());
        wtr.write_record(&rec).map_err(to_err)?;
    }
    wtr.flush().map_err(|e| Error::io("<writer>", e))?;
    Ok(())
}

pub fn save_tabular<T: Scalar>(ds: &LabeledDataset<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_tabular(ds, std::io::BufWriter::new(file))
}

/// How to split a dataset into training and test rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub shuffle: bool,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64, shuffle: bool) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "train_fraction must lie in (0, 1), got {train_fraction}"
            )));
        }
        Ok(Self {
            train_fraction,
            seed,
            shuffle,
        })
    }

    /// First-block 50/50 split.
    pub fn halves() -> Self {
        Self {
            train_fraction: 0.5,
            seed: 0,
            shuffle: false,
        }
    }

    /// Row indices for (train, test).
    pub fn indices(&self, n: usize) -> Result<(Vec<usize>, Vec<usize>)> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("cannot split {n} rows")));
        }
        let spec = Self::new(self.train_fraction, self.seed, self.shuffle)?;
        let mut order: Vec<usize> = (0..n).collect();
        if spec.shuffle {
            order.shuffle(&mut seed::rng(seed::derive(spec.seed, "split")));
        }
        let cut = (n as f64 * spec.train_fraction).floor() as usize;
        let test = order.split_off(cut);
        Ok((order, test))
    }
}

pub fn split<T: Scalar>(
    ds: &LabeledDataset<T>,
    spec: &SplitSpec,
) -> Result<(LabeledDataset<T>, LabeledDataset<T>)> {
    let (train, test) = spec.indices(ds.n())?;
    Ok((ds.select_rows(&train), ds.select_rows(&test)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub text: String,
    pub label: u8,
}

/// Binary-labeled text documents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextCorpus {
    documents: Vec<Document>,
}

impl TextCorpus {
    /// Build a corpus; blank documents are dropped with a warning.
    pub fn new(documents: Vec<Document>) -> Result<Self> {
        let mut kept = Vec::with_capacity(documents.len());
        for (i, doc) in documents.into_iter().enumerate() {
            if doc.label > 1 {
                return Err(Error::InvalidArgument(format!(
                    "document {i} has non-binary label {}",
                    doc.label
                )));
            }
            if doc.text.trim().is_empty() {
                warn!("dropping blank document {i}");
                continue;
            }
            kept.push(doc);
        }
        if kept.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Ok(Self { documents: kept })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.documents.iter().map(|d| d.label).collect()
    }

    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        Self::new(rows.iter().map(|&i| self.documents[i].clone()).collect())
    }
}

fn read_class_dir(dir: &Path, label: u8, out: &mut Vec<Document>) -> Result<()> {
    if !dir.is_dir() {
        return Err(Error::MissingSubdirectory(dir.to_path_buf()));
    }
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "txt"))
        .collect();
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    for path in files {
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        if text.trim().is_empty() {
            warn!("skipping blank document {}", path.display());
            continue;
        }
        out.push(Document { text, label });
    }
    Ok(())
}

/// Load `<root>/pos/*.txt` (label 1) followed by `<root>/neg/*.txt` (label 0),
/// each directory in lexicographic filename order.
pub fn load_text_corpus(root: impl AsRef<Path>) -> Result<TextCorpus> {
    let root = root.as_ref();
    let mut docs = Vec::new();
    read_class_dir(&root.join("pos"), 1, &mut docs)?;
    read_class_dir(&root.join("neg"), 0, &mut docs)?;
    TextCorpus::new(docs)
}

/// Write a corpus in the `pos/` + `neg/` layout read by [`load_text_corpus`].
pub fn save_text_corpus(corpus: &TextCorpus, root: impl AsRef<Path>) -> Result<()> {
    let root = root.as_ref();
    for sub in ["pos", "neg"] {
        let dir = root.join(sub);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    let width = corpus.len().to_string().len();
    for (i, doc) in corpus.documents().iter().enumerate() {
        let sub = if doc.label == 1 { "pos" } else { "neg" };
        let path = root.join(sub).join(format!("{i:0width$}.txt"));
        fs::write(&path, &doc.text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
