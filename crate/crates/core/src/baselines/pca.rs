//! Global PCA through a cyclic Jacobi eigensolver built on the same rotation
//! kernel as the treelet transform.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::data::{Metric, SimilarityMatrix};
use crate::error::{Error, Result};
use crate::rotation::PlaneRotation;

pub const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    components: Array2<f64>,
    eigenvalues: Vec<f64>,
    sweeps: usize,
}

impl PcaModel {
    /// Columns are principal directions, ordered by descending eigenvalue.
    pub fn components(&self) -> &Array2<f64> {
        &self.components
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn p(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Scores of `x` on every component.
    pub fn project(&self, x: &[f64]) -> Result<Array1<f64>> {
        if x.len() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                found: x.len(),
            });
        }
        Ok(self.components.t().dot(&Array1::from(x.to_vec())))
    }

    /// Cumulative fraction of the total variance in the leading `K`
    /// components, for `K = 0..=p`.
    pub fn energy_fractions(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.p() + 1);
        out.push(0.0);
        let mut acc = 0.0;
        for &v in &self.eigenvalues {
            acc += v.max(0.0);
            out.push(acc);
        }
        let total = acc;
        let p = self.p() as f64;
        out.iter()
            .enumerate()
            .map(|(k, &v)| if total > 0.0 { v / total } else { k as f64 / p })
            .collect()
    }

    pub fn to_document(&self) -> PcaDocument {
        PcaDocument {
            eigenvalues: self.eigenvalues.clone(),
            components: self
                .components
                .columns()
                .into_iter()
                .map(|c| c.to_vec())
                .collect(),
            sweeps: self.sweeps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaDocument {
    pub eigenvalues: Vec<f64>,
    /// One vector per component.
    pub components: Vec<Vec<f64>>,
    pub sweeps: usize,
}

fn max_off_diagonal(a: &Array2<f64>) -> f64 {
    let p = a.nrows();
    let mut m = 0.0f64;
    for i in 0..p {
        for j in i + 1..p {
            m = m.max(a[[i, j]].abs());
        }
    }
    m
}

/// Full eigendecomposition of a covariance matrix.
///
/// Sweeps run over all pairs in row order until the largest off-diagonal
/// entry falls below `1e-12 * trace`. Pairs whose entry is exactly zero are
/// skipped, so block-diagonal inputs keep block-supported eigenvectors.
pub fn pca_fit(s: &SimilarityMatrix) -> Result<PcaModel> {
    if s.metric() != Metric::Covariance {
        return Err(Error::WrongMetric {
            expected: "covariance",
        });
    }
    let mut a = s.entries().clone();
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let p = a.nrows();
    let mut v = Array2::<f64>::eye(p);

    let trace: f64 = a.diag().sum();
    let scale = if trace > 0.0 {
        trace
    } else {
        a.iter().map(|x| x * x).sum::<f64>().sqrt()
    };
    let tol = 1e-12 * scale;

    let mut sweeps = 0;
    loop {
        let off = max_off_diagonal(&a);
        if off == 0.0 || off < tol {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                residual: off,
            });
        }
        for i in 0..p {
            for j in i + 1..p {
                if a[[i, j]] == 0.0 {
                    continue;
                }
                let rot = PlaneRotation::decorrelating(a[[i, i]], a[[j, j]], a[[i, j]])?;
                rot.rotate_symmetric(&mut a, i, j);
                rot.rotate_columns(&mut v, i, j);
            }
        }
        sweeps += 1;
    }

    let raw: Vec<f64> = a.diag().to_vec();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&x, &y| raw[y].total_cmp(&raw[x]).then(x.cmp(&y)));

    let mut components = Array2::zeros((p, p));
    let mut eigenvalues = Vec::with_capacity(p);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src).to_owned();
        let mut lead = 0;
        for r in 1..p {
            if col[r].abs() > col[lead].abs() {
                lead = r;
            }
        }
        if col[lead] < 0.0 {
            col.mapv_inplace(|x| -x);
        }
        components.column_mut(dst).assign(&col);
        let lambda = raw[src];
        eigenvalues.push(if lambda < 0.0 && lambda > -tol {
            0.0
        } else {
            lambda
        });
    }

    Ok(PcaModel {
        components,
        eigenvalues,
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn cov(m: Array2<f64>) -> SimilarityMatrix {
        SimilarityMatrix::new(m, Metric::Covariance).unwrap()
    }

    #[test]
    fn diagonal_input_is_a_permutation() {
        let model = pca_fit(&cov(array![
            [3.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 2.0]
        ]))
        .unwrap();
        assert_eq!(model.eigenvalues(), &[3.0, 2.0, 1.0]);
        assert_eq!(
            model.components(),
            &array![[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]]
        );
        assert_eq!(model.sweeps(), 0);
    }

    #[test]
    fn two_by_two_closed_form() {
        let model = pca_fit(&cov(array![[2.0, 1.0], [1.0, 1.0]])).unwrap();
        let s5 = 5.0f64.sqrt();
        assert!((model.eigenvalues()[0] - (3.0 + s5) / 2.0).abs() < 1e-12);
        assert!((model.eigenvalues()[1] - (3.0 - s5) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn equicorrelated_three() {
        let m = array![[1.0, 0.5, 0.5], [0.5, 1.0, 0.5], [0.5, 0.5, 1.0]];
        let model = pca_fit(&cov(m)).unwrap();
        let ev = model.eigenvalues();
        assert!((ev[0] - 2.0).abs() < 1e-12);
        assert!((ev[1] - 0.5).abs() < 1e-12);
        assert!((ev[2] - 0.5).abs() < 1e-12);
        let top = model.components().column(0);
        for &x in top.iter() {
            assert!((x - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_correlation_metric() {
        let s = SimilarityMatrix::new(Array2::eye(2), Metric::AbsCorrelation).unwrap();
        assert!(matches!(pca_fit(&s), Err(Error::WrongMetric { .. })));
    }

    #[test]
    fn zero_matrix() {
        let model = pca_fit(&cov(Array2::zeros((3, 3)))).unwrap();
        assert_eq!(model.eigenvalues(), &[0.0, 0.0, 0.0]);
        assert_eq!(
            model.energy_fractions(),
            vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]
        );
    }

    #[test]
    fn projection_and_energy() {
        let model = pca_fit(&cov(array![[4.0, 0.0], [0.0, 1.0]])).unwrap();
        assert_eq!(model.project(&[2.0, 3.0]).unwrap().to_vec(), vec![2.0, 3.0]);
        assert_eq!(model.energy_fractions(), vec![0.0, 0.8, 1.0]);
        assert!(model.project(&[1.0]).is_err());
    }
}
