//! Sample matrices, CSV ingestion and second-moment estimates.
//!
//! A [`DataMatrix`] holds `n` samples (rows, e.g. microarray slides) of `p`
//! variables (columns, e.g. genes). Similarity matrices are always computed
//! column-wise.

use std::collections::HashSet;
use std::path::Path;

use ndarray::{Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether values are on the log scale or the raw (multiplicative) scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Log,
    Raw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Array2<f64>,
    var_names: Vec<String>,
    scale: Scale,
}

impl DataMatrix {
    pub fn new(values: Array2<f64>, var_names: Vec<String>, scale: Scale) -> Result<Self> {
        let (n, p) = values.dim();
        if n == 0 || p == 0 {
            return Err(Error::EmptyMatrix);
        }
        if var_names.len() != p {
            return Err(Error::InvalidMatrix(format!(
                "{} variable names for {} columns",
                var_names.len(),
                p
            )));
        }
        let mut seen = HashSet::with_capacity(p);
        for name in &var_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateName(name.clone()));
            }
        }
        if let Some(((row, col), v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonNumericCell {
                row,
                col,
                cell: v.to_string(),
            });
        }
        Ok(DataMatrix {
            values,
            var_names,
            scale,
        })
    }

    /// Builds a matrix with generated names `v0, v1, ...`.
    pub fn from_values(values: Array2<f64>) -> Result<Self> {
        let names = (0..values.ncols()).map(|j| format!("v{j}")).collect();
        Self::new(values, names, Scale::Log)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn with_scale(mut self, scale: Scale) -> Self {
        self.scale = scale;
        self
    }

    /// Copies the given rows, in order, into a new matrix.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let values = self.values.select(Axis(0), rows);
        Self::new(values, self.var_names.clone(), self.scale)
    }

    /// Writes the matrix in the same CSV layout [`parse_csv`] reads.
    pub fn to_csv_string(&self) -> String {
        let mut out = self.var_names.join(",");
        out.push('\n');
        for row in self.values.rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Reads a header-first numeric CSV file.
pub fn load_csv(path: impl AsRef<Path>) -> Result<DataMatrix> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let bytes = std::fs::read(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_csv(&bytes)
}

/// Parses CSV bytes. Row indices in errors are 1-based data rows (the header
/// is row 0); column indices are 0-based.
pub fn parse_csv(bytes: &[u8]) -> Result<DataMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .quoting(false)
        .from_reader(bytes);
    let mut records = reader.records();
    let header = match records.next() {
        Some(rec) => rec.map_err(|e| Error::InvalidMatrix(e.to_string()))?,
        None => return Err(Error::EmptyMatrix),
    };
    let names: Vec<String> = header.iter().map(|s| s.trim().to_string()).collect();
    let p = names.len();
    if p == 0 || (p == 1 && names[0].is_empty()) {
        return Err(Error::EmptyMatrix);
    }

    let mut flat = Vec::new();
    let mut n = 0;
    for (i, rec) in records.enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::InvalidMatrix(e.to_string()))?;
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        if rec.len() != p {
            return Err(Error::RaggedRow {
                row,
                expected: p,
                found: rec.len(),
            });
        }
        for (col, cell) in rec.iter().enumerate() {
            let v: f64 = cell
                .trim()
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::NonNumericCell {
                    row,
                    col,
                    cell: cell.to_string(),
                })?;
            flat.push(v);
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    let values = Array2::from_shape_vec((n, p), flat).expect("row lengths checked");
    DataMatrix::new(values, names, Scale::Log)
}

/// Which similarity a [`SimilarityMatrix`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Covariance,
    AbsCorrelation,
}

/// Symmetric `p x p` similarity with an active-variable mask.
///
/// Entries are written in mirrored pairs so `entries[i][j] == entries[j][i]`
/// holds bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    entries: Array2<f64>,
    metric: Metric,
    active: Vec<bool>,
}

impl SimilarityMatrix {
    pub fn new(entries: Array2<f64>, metric: Metric) -> Result<Self> {
        let (r, c) = entries.dim();
        if r != c {
            return Err(Error::DimensionMismatch {
                expected: r,
                found: c,
            });
        }
        for i in 0..r {
            for j in 0..i {
                if entries[[i, j]] != entries[[j, i]] {
                    return Err(Error::InvalidMatrix(format!(
                        "similarity not symmetric at ({j}, {i})"
                    )));
                }
            }
        }
        Ok(SimilarityMatrix {
            entries,
            metric,
            active: vec![true; r],
        })
    }

    pub fn p(&self) -> usize {
        self.entries.nrows()
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[[i, j]]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.entries[[i, j]] = value;
        self.entries[[j, i]] = value;
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.active[i]
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn deactivate(&mut self, i: usize) {
        self.active[i] = false;
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// The quantity pair selection maximizes: the entry itself for
    /// correlations, its magnitude for covariances.
    pub fn strength(&self, i: usize, j: usize) -> f64 {
        match self.metric {
            Metric::Covariance => self.entries[[i, j]].abs(),
            Metric::AbsCorrelation => self.entries[[i, j]],
        }
    }
}

fn column_means(x: &Array2<f64>) -> Vec<f64> {
    x.columns()
        .into_iter()
        .map(|c| c.sum() / c.len() as f64)
        .collect()
}

fn centered_dot(a: ArrayView1<f64>, ma: f64, b: ArrayView1<f64>, mb: f64) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - ma) * (y - mb))
        .sum()
}

/// Unbiased (`n - 1`) covariance of the columns of `x`.
pub fn covariance_of(x: &Array2<f64>) -> Result<Array2<f64>> {
    let (n, p) = x.dim();
    if n < 2 {
        return Err(Error::InsufficientSamples(n));
    }
    let means = column_means(x);
    let denom = (n - 1) as f64;
    let mut cov = Array2::zeros((p, p));
    for i in 0..p {
        for j in i..p {
            let v = centered_dot(x.column(i), means[i], x.column(j), means[j]) / denom;
            cov[[i, j]] = v;
            cov[[j, i]] = v;
        }
    }
    Ok(cov)
}

pub fn sample_covariance(x: &DataMatrix) -> Result<SimilarityMatrix> {
    let cov = covariance_of(x.values())?;
    SimilarityMatrix::new(cov, Metric::Covariance)
}

/// Absolute correlation `|c_ij| / sqrt(c_ii c_jj)` computed from a covariance
/// matrix. Pairs involving a zero-variance variable get 0, including the
/// diagonal entry of that variable.
pub fn abs_correlation_from_covariance(cov: &Array2<f64>) -> Array2<f64> {
    let p = cov.nrows();
    let mut out = Array2::zeros((p, p));
    for i in 0..p {
        for j in i..p {
            let v = abs_correlation_entry(cov[[i, j]], cov[[i, i]], cov[[j, j]], i == j);
            out[[i, j]] = v;
            out[[j, i]] = v;
        }
    }
    out
}

pub(crate) fn abs_correlation_entry(cij: f64, vi: f64, vj: f64, diagonal: bool) -> f64 {
    if vi <= 0.0 || vj <= 0.0 {
        return 0.0;
    }
    if diagonal {
        return 1.0;
    }
    (cij.abs() / (vi * vj).sqrt()).min(1.0)
}

pub fn sample_correlation(x: &DataMatrix) -> Result<SimilarityMatrix> {
    let cov = covariance_of(x.values())?;
    SimilarityMatrix::new(
        abs_correlation_from_covariance(&cov),
        Metric::AbsCorrelation,
    )
}

/// Per-slide centering: every row has its mean over variables subtracted.
pub fn global_normalize(x: &DataMatrix) -> DataMatrix {
    let mut values = x.values().clone();
    for mut row in values.rows_mut() {
        let mean = row.sum() / row.len() as f64;
        row.mapv_inplace(|v| v - mean);
    }
    DataMatrix {
        values,
        var_names: x.var_names.clone(),
        scale: x.scale,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn dm(values: Array2<f64>) -> DataMatrix {
        DataMatrix::from_values(values).unwrap()
    }

    #[test]
    fn parses_simple_csv() {
        let m = parse_csv(b"g1,g2\n1,2\n3,4\n").unwrap();
        assert_eq!(m.n(), 2);
        assert_eq!(m.p(), 2);
        assert_eq!(m.values(), &array![[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(m.var_names(), &["g1".to_string(), "g2".to_string()]);
    }

    #[test]
    fn header_only_is_empty() {
        assert_eq!(parse_csv(b"g1,g2\n"), Err(Error::EmptyMatrix));
        assert_eq!(parse_csv(b""), Err(Error::EmptyMatrix));
    }

    #[test]
    fn rejects_text_cell() {
        let err = parse_csv(b"a,b\n1,abc\n").unwrap_err();
        assert!(matches!(err, Error::NonNumericCell { row: 1, col: 1, .. }));
    }

    #[test]
    fn rejects_non_finite_and_ragged() {
        assert!(matches!(
            parse_csv(b"a,b\n1,NaN\n").unwrap_err(),
            Error::NonNumericCell { .. }
        ));
        assert!(matches!(
            parse_csv(b"a,b\n1,inf\n").unwrap_err(),
            Error::NonNumericCell { .. }
        ));
        assert_eq!(
            parse_csv(b"a,b\n1,2\n3\n").unwrap_err(),
            Error::RaggedRow {
                row: 2,
                expected: 2,
                found: 1
            }
        );
    }

    #[test]
    fn rejects_duplicate_names() {
        assert_eq!(
            parse_csv(b"a,a\n1,2\n").unwrap_err(),
            Error::DuplicateName("a".into())
        );
    }

    #[test]
    fn missing_file() {
        let err = load_csv("/definitely/not/here.csv").unwrap_err();
        assert!(matches!(err, Error::MissingFile(_)));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let m = dm(array![[0.1, -2.5e-7], [1.0 / 3.0, 12345.678]]);
        let back = parse_csv(m.to_csv_string().as_bytes()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn covariance_two_by_two() {
        let s = sample_covariance(&dm(array![[1.0, 2.0], [3.0, 4.0]])).unwrap();
        assert_eq!(s.entries(), &array![[2.0, 2.0], [2.0, 2.0]]);
        assert_eq!(s.metric(), Metric::Covariance);
    }

    #[test]
    fn constant_column_has_zero_covariance() {
        let s = sample_covariance(&dm(array![
            [1.0, 5.0, 2.0],
            [3.0, 5.0, 0.0],
            [4.0, 5.0, 1.0]
        ]))
        .unwrap();
        for k in 0..3 {
            assert_eq!(s.get(1, k), 0.0);
            assert_eq!(s.get(k, 1), 0.0);
        }
    }

    #[test]
    fn one_sample_is_insufficient() {
        assert_eq!(
            sample_covariance(&dm(array![[1.0, 2.0]])).unwrap_err(),
            Error::InsufficientSamples(1)
        );
        assert_eq!(
            sample_correlation(&dm(array![[1.0, 2.0]])).unwrap_err(),
            Error::InsufficientSamples(1)
        );
    }

    fn brute_abs_corr(rows: &[[f64; 2]]) -> f64 {
        let n = rows.len() as f64;
        let mut sums = [0.0; 2];
        for r in rows {
            sums[0] += r[0];
            sums[1] += r[1];
        }
        let m = [sums[0] / n, sums[1] / n];
        let (mut c, mut v0, mut v1) = (0.0, 0.0, 0.0);
        for r in rows {
            c += (r[0] - m[0]) * (r[1] - m[1]);
            v0 += (r[0] - m[0]).powi(2);
            v1 += (r[1] - m[1]).powi(2);
        }
        c.abs() / (v0 * v1).sqrt()
    }

    #[test]
    fn correlation_examples() {
        let s = sample_correlation(&dm(array![[1.0, 2.0], [2.0, 4.0], [5.0, 10.0]])).unwrap();
        assert!((s.get(0, 1) - 1.0).abs() < 1e-12);

        let s = sample_correlation(&dm(array![[1.0, 7.0], [2.0, 7.0]])).unwrap();
        assert_eq!(s.get(0, 1), 0.0);
        assert_eq!(s.get(1, 1), 0.0);
        assert_eq!(s.get(0, 0), 1.0);

        let rows = [[1.0, 2.0], [3.0, 4.0], [2.0, 8.0]];
        let s = sample_correlation(&dm(array![[1.0, 2.0], [3.0, 4.0], [2.0, 8.0]])).unwrap();
        assert!((s.get(0, 1) - brute_abs_corr(&rows)).abs() < 1e-12);
        // By hand: cov = 1, var0 = 1, var1 = 28/3.
        assert!((s.get(0, 1) - 1.0 / (28.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn global_normalize_examples() {
        let out = global_normalize(&dm(array![[1.0, 2.0, 3.0]]));
        assert_eq!(out.values(), &array![[-1.0, 0.0, 1.0]]);
        let out = global_normalize(&dm(array![[4.5, 4.5, 4.5]]));
        assert_eq!(out.values(), &array![[0.0, 0.0, 0.0]]);
        let out = global_normalize(&dm(array![[0.0, 2.0], [4.0, 8.0]]));
        assert_eq!(out.values(), &array![[-1.0, 1.0], [-2.0, 2.0]]);
    }

    #[test]
    fn similarity_rejects_asymmetry() {
        let err = SimilarityMatrix::new(array![[1.0, 0.5], [0.4, 1.0]], Metric::Covariance);
        assert!(err.is_err());
    }
}
