//! The treelet transform.
//!
//! Starting from the sample covariance, each level finds the most similar
//! pair among the active variables, decorrelates it with a Jacobi rotation,
//! keeps one rotated coordinate active (the *sum* variable) and freezes the
//! other as a *difference* (detail) coordinate. After `L` levels the rotations
//! define an orthonormal basis whose coefficients split into `p - L` coarse
//! values and `L` residuals.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::data::{abs_correlation_entry, covariance_of, DataMatrix, Metric, SimilarityMatrix};
use crate::dendrogram::{Dendrogram, MergeNode};
use crate::error::{Error, Result};
use crate::rotation::PlaneRotation;

/// Which rotated coordinate of a merged pair stays active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Retention {
    /// Keep the coordinate with the larger post-rotation variance; on a tie
    /// keep the lower index.
    #[default]
    MaxVariance,
    /// Always keep the coordinate at the lower original index, regardless of
    /// variance.
    LowIndex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TreeletConfig {
    pub metric: Metric,
    pub retention: Retention,
}

/// One merge step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiRotation {
    pub alpha: usize,
    pub beta: usize,
    pub theta: f64,
    pub c: f64,
    pub s: f64,
    pub sum_index: usize,
    pub var_sum: f64,
    pub var_diff: f64,
}

impl JacobiRotation {
    pub fn diff_index(&self) -> usize {
        if self.sum_index == self.alpha {
            self.beta
        } else {
            self.alpha
        }
    }

    fn plane(&self) -> PlaneRotation {
        PlaneRotation {
            theta: self.theta,
            c: self.c,
            s: self.s,
        }
    }

    #[inline]
    fn apply(&self, x: &mut [f64]) {
        let (u, v) = self.plane().apply(x[self.alpha], x[self.beta]);
        x[self.alpha] = u;
        x[self.beta] = v;
    }

    #[inline]
    fn apply_inverse(&self, y: &mut [f64]) {
        let (u, v) = self.plane().apply_inverse(y[self.alpha], y[self.beta]);
        y[self.alpha] = u;
        y[self.beta] = v;
    }
}

/// A fitted treelet decomposition. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeletBasis {
    p: usize,
    rotations: Vec<JacobiRotation>,
    basis: Array2<f64>,
    active_per_level: Vec<Vec<usize>>,
    diff_indices: Vec<usize>,
}

impl TreeletBasis {
    /// Replays a rotation sequence, validating that each merge only touches
    /// variables that are still active.
    pub fn from_rotations(p: usize, rotations: Vec<JacobiRotation>) -> Result<Self> {
        if p == 0 {
            return Err(Error::EmptyMatrix);
        }
        if rotations.len() > p - 1 {
            return Err(Error::InvalidLevel {
                level: rotations.len(),
                min: 0,
                max: p - 1,
            });
        }
        let mut active = vec![true; p];
        let mut basis = Array2::eye(p);
        let mut active_per_level = Vec::with_capacity(rotations.len() + 1);
        let mut diff_indices = Vec::with_capacity(rotations.len());
        active_per_level.push((0..p).collect::<Vec<_>>());

        for (level, rot) in rotations.iter().enumerate() {
            let bad =
                |why: &str| Error::InvalidMatrix(format!("rotation at level {}: {why}", level + 1));
            if rot.alpha >= rot.beta || rot.beta >= p {
                return Err(bad("requires alpha < beta < p"));
            }
            if !active[rot.alpha] || !active[rot.beta] {
                return Err(bad("merges a frozen difference variable"));
            }
            if rot.sum_index != rot.alpha && rot.sum_index != rot.beta {
                return Err(bad("sum_index is not one of the pair"));
            }
            if !rot.theta.is_finite() {
                return Err(bad("non-finite angle"));
            }
            rot.plane().rotate_columns(&mut basis, rot.alpha, rot.beta);
            let diff = rot.diff_index();
            active[diff] = false;
            diff_indices.push(diff);
            active_per_level.push((0..p).filter(|&i| active[i]).collect());
        }

        Ok(TreeletBasis {
            p,
            rotations,
            basis,
            active_per_level,
            diff_indices,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of rotations, i.e. the top level.
    pub fn levels(&self) -> usize {
        self.rotations.len()
    }

    pub fn rotations(&self) -> &[JacobiRotation] {
        &self.rotations
    }

    /// Columns are the basis vectors; coefficients at the top level are
    /// `basis^T x`.
    pub fn basis(&self) -> &Array2<f64> {
        &self.basis
    }

    pub fn active_at(&self, level: usize) -> &[usize] {
        &self.active_per_level[level]
    }

    pub fn active_per_level(&self) -> &[Vec<usize>] {
        &self.active_per_level
    }

    pub fn diff_indices(&self) -> &[usize] {
        &self.diff_indices
    }

    fn check_level(&self, level: usize) -> Result<()> {
        if level > self.levels() {
            return Err(Error::InvalidLevel {
                level,
                min: 0,
                max: self.levels(),
            });
        }
        Ok(())
    }

    /// All `p` coefficients of `x` after the first `level` rotations, in
    /// coordinate order.
    pub fn coefficients(&self, x: &[f64], level: usize) -> Result<Vec<f64>> {
        if x.len() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                found: x.len(),
            });
        }
        self.check_level(level)?;
        let mut y = x.to_vec();
        for rot in &self.rotations[..level] {
            rot.apply(&mut y);
        }
        Ok(y)
    }

    pub fn forward(&self, x: &[f64], level: usize) -> Result<CoarseRepresentation> {
        let y = self.coefficients(x, level)?;
        let coarse_indices = self.active_per_level[level].clone();
        let coarse_coeffs = coarse_indices.iter().map(|&i| y[i]).collect();
        let detail = self.diff_indices[..level]
            .iter()
            .enumerate()
            .map(|(l, &index)| DetailCoeff {
                index,
                level: l + 1,
                value: y[index],
            })
            .collect();
        Ok(CoarseRepresentation {
            level,
            coarse_indices,
            coarse_coeffs,
            detail,
        })
    }

    pub fn inverse(&self, rep: &CoarseRepresentation) -> Result<Vec<f64>> {
        self.check_level(rep.level)?;
        let found = rep.coarse_coeffs.len() + rep.detail.len();
        if found != self.p || rep.coarse_indices.len() != rep.coarse_coeffs.len() {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                found,
            });
        }
        let mut seen = vec![false; self.p];
        let mut y = vec![0.0; self.p];
        let placements = rep
            .coarse_indices
            .iter()
            .copied()
            .zip(rep.coarse_coeffs.iter().copied())
            .chain(rep.detail.iter().map(|d| (d.index, d.value)));
        for (i, v) in placements {
            if i >= self.p || seen[i] {
                return Err(Error::InvalidMatrix(format!(
                    "coefficient index {i} out of range or repeated"
                )));
            }
            seen[i] = true;
            y[i] = v;
        }
        for rot in self.rotations[..rep.level].iter().rev() {
            rot.apply_inverse(&mut y);
        }
        Ok(y)
    }

    /// Coefficients for every row of `x` (n x p), at `level`.
    pub fn transform(&self, x: &DataMatrix, level: usize) -> Result<Array2<f64>> {
        self.transform_values(x.values(), level)
    }

    pub fn transform_values(&self, x: &Array2<f64>, level: usize) -> Result<Array2<f64>> {
        if x.ncols() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                found: x.ncols(),
            });
        }
        self.check_level(level)?;
        let mut out = x.to_owned();
        for rot in &self.rotations[..level] {
            let plane = rot.plane();
            for mut row in out.rows_mut() {
                let (u, v) = plane.apply(row[rot.alpha], row[rot.beta]);
                row[rot.alpha] = u;
                row[rot.beta] = v;
            }
        }
        Ok(out)
    }

    /// Top-`k` coefficient indices at `level`, ranked by empirical variance
    /// over the rows of `x` (descending, ties to the lower index).
    pub fn select_features(&self, x: &DataMatrix, k: usize, level: usize) -> Result<Vec<usize>> {
        if k == 0 || k > self.p {
            return Err(Error::InvalidK { k, p: self.p });
        }
        let coeffs = self.transform(x, level)?;
        let scores = column_variances(&coeffs);
        Ok(rank_descending(&scores).into_iter().take(k).collect())
    }

    pub fn to_document(&self, var_names: &[String]) -> BasisDocument {
        BasisDocument {
            p: self.p,
            var_names: var_names.to_vec(),
            rotations: self.rotations.iter().map(RotationRecord::from).collect(),
        }
    }
}

/// Empirical (`n - 1`) variance of each column; zero when `n < 2`.
pub fn column_variances(x: &Array2<f64>) -> Vec<f64> {
    let n = x.nrows();
    if n < 2 {
        return vec![0.0; x.ncols()];
    }
    x.columns()
        .into_iter()
        .map(|c| {
            let mean = c.sum() / n as f64;
            c.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
        })
        .collect()
}

/// Indices sorted by descending score; equal scores keep index order.
pub fn rank_descending(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetailCoeff {
    pub index: usize,
    /// Level at which this coordinate was frozen (1-based).
    pub level: usize,
    pub value: f64,
}

/// `x` at one level: the active sum coefficients plus the frozen residuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseRepresentation {
    pub level: usize,
    pub coarse_indices: Vec<usize>,
    pub coarse_coeffs: Vec<f64>,
    pub detail: Vec<DetailCoeff>,
}

impl CoarseRepresentation {
    pub fn detail_coeffs(&self) -> Vec<f64> {
        self.detail.iter().map(|d| d.value).collect()
    }

    /// Same representation with all residuals set to zero.
    pub fn coarse_only(&self) -> Self {
        let mut out = self.clone();
        for d in &mut out.detail {
            d.value = 0.0;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationRecord {
    pub alpha: usize,
    pub beta: usize,
    pub theta: f64,
    pub sum_index: usize,
    pub var_sum: f64,
    pub var_diff: f64,
}

impl From<&JacobiRotation> for RotationRecord {
    fn from(r: &JacobiRotation) -> Self {
        RotationRecord {
            alpha: r.alpha,
            beta: r.beta,
            theta: r.theta,
            sum_index: r.sum_index,
            var_sum: r.var_sum,
            var_diff: r.var_diff,
        }
    }
}

impl From<&RotationRecord> for JacobiRotation {
    fn from(r: &RotationRecord) -> Self {
        let plane = PlaneRotation::new(r.theta);
        JacobiRotation {
            alpha: r.alpha,
            beta: r.beta,
            theta: r.theta,
            c: plane.c,
            s: plane.s,
            sum_index: r.sum_index,
            var_sum: r.var_sum,
            var_diff: r.var_diff,
        }
    }
}

/// Serialized form of a basis: `{p, var_names, rotations}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisDocument {
    pub p: usize,
    pub var_names: Vec<String>,
    pub rotations: Vec<RotationRecord>,
}

impl BasisDocument {
    pub fn to_basis(&self) -> Result<TreeletBasis> {
        if self.var_names.len() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                found: self.var_names.len(),
            });
        }
        TreeletBasis::from_rotations(self.p, self.rotations.iter().map(Into::into).collect())
    }
}

/// Active pair with the largest similarity; ties go to the lexicographically
/// smallest `(i, j)`.
pub fn most_similar_pair(s: &SimilarityMatrix) -> Result<(usize, usize)> {
    let active: Vec<usize> = (0..s.p()).filter(|&i| s.is_active(i)).collect();
    if active.len() < 2 {
        return Err(Error::TooFewActive);
    }
    let mut best = (active[0], active[1]);
    let mut best_val = f64::NEG_INFINITY;
    for (pos, &i) in active.iter().enumerate() {
        for &j in &active[pos + 1..] {
            let v = s.strength(i, j);
            if v > best_val {
                best_val = v;
                best = (i, j);
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeletFit {
    pub basis: TreeletBasis,
    pub dendrogram: Dendrogram,
}

/// Runs `level` merge steps on `x`.
pub fn treelet_fit(x: &DataMatrix, level: usize, config: TreeletConfig) -> Result<TreeletFit> {
    treelet_fit_inspect(x, level, config, |_, _| {})
}

/// As [`treelet_fit`], calling `observe(level, working_covariance)` before the
/// first merge (level 0) and after every merge.
pub fn treelet_fit_inspect(
    x: &DataMatrix,
    level: usize,
    config: TreeletConfig,
    mut observe: impl FnMut(usize, &Array2<f64>),
) -> Result<TreeletFit> {
    let p = x.p();
    if p < 2 || level == 0 || level > p - 1 {
        return Err(Error::InvalidLevel {
            level,
            min: 1,
            max: p.saturating_sub(1),
        });
    }
    let mut cov = covariance_of(x.values())?;
    let mut sim = match config.metric {
        Metric::Covariance => SimilarityMatrix::new(cov.clone(), Metric::Covariance)?,
        Metric::AbsCorrelation => SimilarityMatrix::new(
            crate::data::abs_correlation_from_covariance(&cov),
            Metric::AbsCorrelation,
        )?,
    };
    observe(0, &cov);

    let mut rotations = Vec::with_capacity(level);
    let mut nodes = Vec::with_capacity(level);
    for l in 1..=level {
        let (alpha, beta) = most_similar_pair(&sim)?;
        let similarity = sim.get(alpha, beta);
        let (a, b, c_ab) = (cov[[alpha, alpha]], cov[[beta, beta]], cov[[alpha, beta]]);
        let plane = PlaneRotation::decorrelating(a, b, c_ab)?;
        plane.rotate_symmetric(&mut cov, alpha, beta);
        let (va, vb) = (cov[[alpha, alpha]], cov[[beta, beta]]);

        let sum_index = match config.retention {
            Retention::MaxVariance if vb > va => beta,
            _ => alpha,
        };
        let (var_sum, var_diff) = if sum_index == alpha {
            (va, vb)
        } else {
            (vb, va)
        };
        let diff = if sum_index == alpha { beta } else { alpha };

        sim.deactivate(diff);
        for k in 0..p {
            if k == sum_index || !sim.is_active(k) {
                continue;
            }
            let v = match config.metric {
                Metric::Covariance => cov[[sum_index, k]],
                Metric::AbsCorrelation => {
                    abs_correlation_entry(cov[[sum_index, k]], var_sum, cov[[k, k]], false)
                }
            };
            sim.set(sum_index, k, v);
        }

        rotations.push(JacobiRotation {
            alpha,
            beta,
            theta: plane.theta,
            c: plane.c,
            s: plane.s,
            sum_index,
            var_sum,
            var_diff,
        });
        nodes.push(MergeNode {
            level: l,
            alpha,
            beta,
            sum_index,
            similarity,
            theta: plane.theta,
            var_sum,
            var_diff,
        });
        observe(l, &cov);
    }

    Ok(TreeletFit {
        basis: TreeletBasis::from_rotations(p, rotations)?,
        dendrogram: Dendrogram::new(x.var_names().to_vec(), nodes)?,
    })
}

/// Reconstruction of `x` from its top-level coefficients, i.e. `basis * y`.
pub fn synthesize(basis: &TreeletBasis, y: &[f64]) -> Result<Array1<f64>> {
    if y.len() != basis.p() {
        return Err(Error::DimensionMismatch {
            expected: basis.p(),
            found: y.len(),
        });
    }
    Ok(basis.basis().dot(&Array1::from(y.to_vec())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::f64::consts::{FRAC_PI_4, SQRT_2};

    fn pair_basis() -> TreeletBasis {
        // Two samples (0,0),(1,1): covariance [[0.5,0.5],[0.5,0.5]].
        let x = DataMatrix::from_values(array![[0.0, 0.0], [1.0, 1.0]]).unwrap();
        treelet_fit(&x, 1, TreeletConfig::default()).unwrap().basis
    }

    fn sim(entries: Array2<f64>) -> SimilarityMatrix {
        SimilarityMatrix::new(entries, Metric::AbsCorrelation).unwrap()
    }

    #[test]
    fn pair_selection_tie_break() {
        assert_eq!(most_similar_pair(&sim(Array2::eye(3))).unwrap(), (0, 1));

        let mut m = Array2::<f64>::eye(6);
        m[[2, 4]] = 0.9;
        m[[4, 2]] = 0.9;
        m[[0, 5]] = 0.3;
        m[[5, 0]] = 0.3;
        assert_eq!(most_similar_pair(&sim(m.clone())).unwrap(), (2, 4));

        let mut m = Array2::<f64>::eye(6);
        for (i, j) in [(1, 3), (2, 5)] {
            m[[i, j]] = 0.7;
            m[[j, i]] = 0.7;
        }
        assert_eq!(most_similar_pair(&sim(m)).unwrap(), (1, 3));
    }

    #[test]
    fn pair_selection_uses_magnitude_for_covariance() {
        let m = array![[1.0, 0.2, -0.8], [0.2, 1.0, 0.1], [-0.8, 0.1, 1.0]];
        let s = SimilarityMatrix::new(m, Metric::Covariance).unwrap();
        assert_eq!(most_similar_pair(&s).unwrap(), (0, 2));
    }

    #[test]
    fn pair_selection_skips_inactive() {
        let mut s = sim(array![[1.0, 0.9, 0.1], [0.9, 1.0, 0.2], [0.1, 0.2, 1.0]]);
        s.deactivate(0);
        assert_eq!(most_similar_pair(&s).unwrap(), (1, 2));
        s.deactivate(1);
        assert_eq!(most_similar_pair(&s), Err(Error::TooFewActive));
    }

    #[test]
    fn perfectly_correlated_pair() {
        // Covariance [[1,1],[1,1]].
        let x = DataMatrix::from_values(array![[-1.0, -1.0], [1.0, 1.0], [0.0, 0.0]]).unwrap();
        let fit = treelet_fit(&x, 1, TreeletConfig::default()).unwrap();
        let rot = fit.basis.rotations()[0];
        assert!((rot.theta - FRAC_PI_4).abs() < 1e-15);
        assert_eq!((rot.alpha, rot.beta, rot.sum_index), (0, 1, 0));
        assert!((rot.var_sum - 2.0).abs() < 1e-12);
        assert!(rot.var_diff.abs() < 1e-12);
        let b = fit.basis.basis();
        assert!((b[[0, 0]] - 1.0 / SQRT_2).abs() < 1e-15);
        assert!((b[[1, 0]] - 1.0 / SQRT_2).abs() < 1e-15);
        assert_eq!(fit.dendrogram.nodes().len(), 1);
    }

    #[test]
    fn forward_examples() {
        let basis = pair_basis();
        let rep = basis.forward(&[3.0, -4.0], 0).unwrap();
        assert_eq!(rep.coarse_coeffs, vec![3.0, -4.0]);
        assert!(rep.detail.is_empty());

        let rep = basis.forward(&[1.0, 1.0], 1).unwrap();
        assert_eq!(rep.coarse_indices, vec![0]);
        assert!((rep.coarse_coeffs[0] - SQRT_2).abs() < 1e-15);
        assert!(rep.detail_coeffs()[0].abs() < 1e-15);

        // Golden sign: the difference coordinate of (1, -1) is -sqrt(2).
        let rep = basis.forward(&[1.0, -1.0], 1).unwrap();
        assert!(rep.coarse_coeffs[0].abs() < 1e-15);
        assert!((rep.detail_coeffs()[0] + SQRT_2).abs() < 1e-15);
        assert_eq!(rep.detail[0].index, 1);
        assert_eq!(rep.detail[0].level, 1);
    }

    #[test]
    fn inverse_examples() {
        let basis = pair_basis();
        let rep = CoarseRepresentation {
            level: 1,
            coarse_indices: vec![0],
            coarse_coeffs: vec![SQRT_2],
            detail: vec![DetailCoeff {
                index: 1,
                level: 1,
                value: 0.0,
            }],
        };
        let x = basis.inverse(&rep).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);

        let x0 = vec![0.25, -7.5];
        let rep = basis.forward(&x0, 0).unwrap();
        assert_eq!(basis.inverse(&rep).unwrap(), x0);
    }

    #[test]
    fn dimension_and_level_errors() {
        let basis = pair_basis();
        assert!(matches!(
            basis.forward(&[1.0], 0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            basis.forward(&[1.0, 2.0], 2),
            Err(Error::InvalidLevel { .. })
        ));
        let mut rep = basis.forward(&[1.0, 2.0], 1).unwrap();
        rep.detail.clear();
        assert!(matches!(
            basis.inverse(&rep),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn invalid_fit_levels() {
        let x = DataMatrix::from_values(array![[1.0, 2.0, 3.0], [2.0, 1.0, 0.0]]).unwrap();
        assert!(matches!(
            treelet_fit(&x, 0, TreeletConfig::default()),
            Err(Error::InvalidLevel { .. })
        ));
        assert!(matches!(
            treelet_fit(&x, 3, TreeletConfig::default()),
            Err(Error::InvalidLevel {
                level: 3,
                min: 1,
                max: 2
            })
        ));
        let one = DataMatrix::from_values(array![[1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(
            treelet_fit(&one, 1, TreeletConfig::default()),
            Err(Error::InsufficientSamples(1))
        );
    }

    #[test]
    fn all_zero_covariance_merges_in_order() {
        let x = DataMatrix::from_values(Array2::from_elem((4, 4), 2.5)).unwrap();
        let fit = treelet_fit(&x, 3, TreeletConfig::default()).unwrap();
        let pairs: Vec<_> = fit
            .basis
            .rotations()
            .iter()
            .map(|r| (r.alpha, r.beta))
            .collect();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (0, 3)]);
        assert!(fit.basis.rotations().iter().all(|r| r.theta == 0.0));
        assert_eq!(fit.basis.basis(), &Array2::<f64>::eye(4));
    }

    #[test]
    fn low_index_retention_keeps_alpha() {
        // Variable 1 has far more variance; max-variance keeps it, low-index
        // keeps 0.
        let x = DataMatrix::from_values(array![[0.0, 0.0], [1.0, 10.0], [2.0, 19.0]]).unwrap();
        let maxvar = treelet_fit(&x, 1, TreeletConfig::default()).unwrap();
        let lowidx = treelet_fit(
            &x,
            1,
            TreeletConfig {
                retention: Retention::LowIndex,
                ..Default::default()
            },
        )
        .unwrap();
        let r = maxvar.basis.rotations()[0];
        assert!(r.var_sum >= r.var_diff);
        assert_eq!(lowidx.basis.rotations()[0].sum_index, 0);
        assert_eq!(lowidx.basis.diff_indices(), &[1]);
    }

    #[test]
    fn select_features_on_pair() {
        let x = DataMatrix::from_values(array![[-1.0, -1.0], [1.0, 1.0], [0.5, 0.5]]).unwrap();
        let fit = treelet_fit(&x, 1, TreeletConfig::default()).unwrap();
        let sum = fit.basis.rotations()[0].sum_index;
        assert_eq!(fit.basis.select_features(&x, 1, 1).unwrap(), vec![sum]);
        let mut all = fit.basis.select_features(&x, 2, 1).unwrap();
        all.sort();
        assert_eq!(all, vec![0, 1]);
        assert_eq!(
            fit.basis.select_features(&x, 0, 1),
            Err(Error::InvalidK { k: 0, p: 2 })
        );
        assert_eq!(
            fit.basis.select_features(&x, 3, 1),
            Err(Error::InvalidK { k: 3, p: 2 })
        );
    }

    #[test]
    fn replay_rejects_frozen_merge() {
        let basis = pair_basis();
        let mut rots = basis.rotations().to_vec();
        rots.push(rots[0]);
        assert!(TreeletBasis::from_rotations(3, rots).is_err());
    }

    #[test]
    fn document_round_trip() {
        let x = DataMatrix::from_values(array![
            [0.3, 1.0, -2.0, 0.1],
            [1.7, 0.2, 0.4, -0.9],
            [-0.5, 2.2, 1.1, 0.3],
            [0.9, -1.4, 0.6, 1.5]
        ])
        .unwrap();
        let fit = treelet_fit(&x, 3, TreeletConfig::default()).unwrap();
        let doc = fit.basis.to_document(x.var_names());
        let text = serde_json::to_string(&doc).unwrap();
        let back: BasisDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_basis().unwrap(), fit.basis);
    }

    #[test]
    fn rank_descending_ties() {
        assert_eq!(rank_descending(&[1.0, 3.0, 3.0, 2.0]), vec![1, 2, 3, 0]);
    }
}
