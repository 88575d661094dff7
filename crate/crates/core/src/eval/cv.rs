//! Nearest-centroid cross-validation on treelet coefficients, in a clean
//! (external) protocol and a leaky one that fits the transform and ranks the
//! features on every row before splitting.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::treelet::{column_variances, rank_descending, treelet_fit, TreeletBasis, TreeletConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvMode {
    #[default]
    Clean,
    Leaky,
}

/// How treelet coefficients are ranked before the top `K` are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureScore {
    /// Empirical variance (unsupervised).
    Variance,
    /// Welch two-sample statistic `|m1 - m0| / sqrt(v0/n0 + v1/n1)`.
    #[default]
    Separation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub k: usize,
    pub mode: CvMode,
    pub seed: u64,
    /// Treelet level; `None` means the full tree (`p - 1`).
    pub level: Option<usize>,
    pub treelet: TreeletConfig,
    pub score: FeatureScore,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 5,
            k: 10,
            mode: CvMode::Clean,
            seed: 0,
            level: None,
            treelet: TreeletConfig::default(),
            score: FeatureScore::Separation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub mode: CvMode,
    pub folds: usize,
    pub k: usize,
    pub level: usize,
    pub n: usize,
    pub per_fold_accuracy: Vec<f64>,
    pub mean_accuracy: f64,
    /// Central 95% range of the accuracy of a classifier that always
    /// predicts the majority class, i.e. `Binomial(n, majority rate) / n`.
    pub chance_interval: [f64; 2],
}

impl CvReport {
    pub fn within_chance(&self) -> bool {
        self.mean_accuracy >= self.chance_interval[0]
            && self.mean_accuracy <= self.chance_interval[1]
    }
}

/// Everything a fold's predictions depend on.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldModel {
    pub basis: TreeletBasis,
    pub level: usize,
    pub features: Vec<usize>,
    pub centroids: [Vec<f64>; 2],
}

impl FoldModel {
    pub fn predict(&self, coeffs: &[f64]) -> u8 {
        let dist = |c: &[f64]| -> f64 {
            self.features
                .iter()
                .zip(c)
                .map(|(&f, m)| (coeffs[f] - m).powi(2))
                .sum()
        };
        if dist(&self.centroids[1]) < dist(&self.centroids[0]) {
            1
        } else {
            0
        }
    }
}

fn check_labels(y: &[u8], n: usize) -> Result<()> {
    if y.len() != n {
        return Err(Error::InvalidCv(format!(
            "{} labels for {} rows",
            y.len(),
            n
        )));
    }
    if let Some(bad) = y.iter().find(|&&c| c > 1) {
        return Err(Error::InvalidCv(format!("label {bad} is not binary")));
    }
    Ok(())
}

/// Fold index of every row. Each class is shuffled with `seed` and dealt
/// round-robin, the deal continuing across classes so fold sizes differ by
/// at most one.
pub fn stratified_folds(y: &[u8], folds: usize, seed: u64) -> Result<Vec<usize>> {
    let n = y.len();
    if folds < 2 || folds > n {
        return Err(Error::InvalidCv(format!(
            "folds must lie in 2..={n}, got {folds}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; n];
    let mut next = 0;
    for class in 0..=1u8 {
        let mut rows: Vec<usize> = (0..n).filter(|&i| y[i] == class).collect();
        rows.shuffle(&mut rng);
        for r in rows {
            assignment[r] = next % folds;
            next += 1;
        }
    }
    Ok(assignment)
}

/// A seeded permutation of `y`, for null-distribution runs.
pub fn shuffled_labels(y: &[u8], seed: u64) -> Vec<u8> {
    let mut out = y.to_vec();
    out.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    out
}

/// Per-coefficient ranking scores.
pub fn feature_scores(coeffs: &Array2<f64>, y: &[u8], score: FeatureScore) -> Vec<f64> {
    match score {
        FeatureScore::Variance => column_variances(coeffs),
        FeatureScore::Separation => {
            let rows = |c: u8| -> Vec<usize> { (0..y.len()).filter(|&i| y[i] == c).collect() };
            let (r0, r1) = (rows(0), rows(1));
            let g0 = coeffs.select(ndarray::Axis(0), &r0);
            let g1 = coeffs.select(ndarray::Axis(0), &r1);
            let (v0, v1) = (column_variances(&g0), column_variances(&g1));
            let (n0, n1) = (r0.len().max(1) as f64, r1.len().max(1) as f64);
            (0..coeffs.ncols())
                .map(|j| {
                    let m0 = g0.column(j).sum() / n0;
                    let m1 = g1.column(j).sum() / n1;
                    let num = (m1 - m0).abs();
                    let den = (v0[j] / n0 + v1[j] / n1).sqrt();
                    if num == 0.0 {
                        0.0
                    } else if den == 0.0 {
                        f64::INFINITY
                    } else {
                        num / den
                    }
                })
                .collect()
        }
    }
}

fn class_centroids(coeffs: &Array2<f64>, y: &[u8], features: &[usize]) -> [Vec<f64>; 2] {
    let centroid = |class: u8| -> Vec<f64> {
        let rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        features
            .iter()
            .map(|&f| rows.iter().map(|&r| coeffs[[r, f]]).sum::<f64>() / rows.len() as f64)
            .collect()
    };
    [centroid(0), centroid(1)]
}

fn resolve_level(cfg: &CvConfig, p: usize) -> Result<usize> {
    let level = cfg.level.unwrap_or(p.saturating_sub(1));
    if p < 2 || level == 0 || level > p - 1 {
        return Err(Error::InvalidLevel {
            level,
            min: 1,
            max: p.saturating_sub(1),
        });
    }
    Ok(level)
}

/// Fits the transform, ranks features and computes class centroids using
/// only the rows of `x`.
pub fn fit_fold_model(x: &DataMatrix, y: &[u8], cfg: &CvConfig) -> Result<FoldModel> {
    check_labels(y, x.n())?;
    let level = resolve_level(cfg, x.p())?;
    if cfg.k == 0 || cfg.k > x.p() {
        return Err(Error::InvalidK { k: cfg.k, p: x.p() });
    }
    let basis = treelet_fit(x, level, cfg.treelet)?.basis;
    let coeffs = basis.transform(x, level)?;
    let scores = feature_scores(&coeffs, y, cfg.score);
    let features: Vec<usize> = rank_descending(&scores).into_iter().take(cfg.k).collect();
    let centroids = class_centroids(&coeffs, y, &features);
    Ok(FoldModel {
        basis,
        level,
        features,
        centroids,
    })
}

pub fn chance_interval(y: &[u8]) -> [f64; 2] {
    let n = y.len();
    let ones = y.iter().filter(|&&c| c == 1).count();
    let majority = ones.max(n - ones) as f64 / n as f64;
    let dist = Binomial::new(majority, n as u64).expect("valid binomial");
    [
        dist.inverse_cdf(0.025) as f64 / n as f64,
        dist.inverse_cdf(0.975) as f64 / n as f64,
    ]
}

pub fn nearest_centroid_cv(x: &DataMatrix, y: &[u8], cfg: &CvConfig) -> Result<CvReport> {
    nearest_centroid_cv_detailed(x, y, cfg).map(|(report, _)| report)
}

/// As [`nearest_centroid_cv`], also returning the model used for each fold.
pub fn nearest_centroid_cv_detailed(
    x: &DataMatrix,
    y: &[u8],
    cfg: &CvConfig,
) -> Result<(CvReport, Vec<FoldModel>)> {
    check_labels(y, x.n())?;
    if cfg.k == 0 || cfg.k > x.p() {
        return Err(Error::InvalidK { k: cfg.k, p: x.p() });
    }
    let level = resolve_level(cfg, x.p())?;
    let assignment = stratified_folds(y, cfg.folds, cfg.seed)?;

    let leaky = match cfg.mode {
        CvMode::Leaky => Some(fit_fold_model(x, y, cfg)?),
        CvMode::Clean => None,
    };

    let mut accuracies = Vec::with_capacity(cfg.folds);
    let mut models = Vec::with_capacity(cfg.folds);
    for fold in 0..cfg.folds {
        let train: Vec<usize> = (0..x.n()).filter(|&i| assignment[i] != fold).collect();
        let test: Vec<usize> = (0..x.n()).filter(|&i| assignment[i] == fold).collect();
        let y_train: Vec<u8> = train.iter().map(|&i| y[i]).collect();
        for class in 0..=1u8 {
            if !y_train.contains(&class) {
                return Err(Error::DegenerateFold { fold, class });
            }
        }
        let x_train = x.select_rows(&train)?;

        let model = match &leaky {
            None => fit_fold_model(&x_train, &y_train, cfg)?,
            Some(global) => {
                let coeffs = global.basis.transform(&x_train, level)?;
                FoldModel {
                    centroids: class_centroids(&coeffs, &y_train, &global.features),
                    ..global.clone()
                }
            }
        };

        let x_test = x.select_rows(&test)?;
        let coeffs = model.basis.transform(&x_test, level)?;
        let correct = coeffs
            .rows()
            .into_iter()
            .zip(&test)
            .filter(|(row, &i)| model.predict(row.as_slice().expect("standard layout")) == y[i])
            .count();
        accuracies.push(correct as f64 / test.len() as f64);
        models.push(model);
    }

    let mean = accuracies.iter().sum::<f64>() / accuracies.len() as f64;
    Ok((
        CvReport {
            mode: cfg.mode,
            folds: cfg.folds,
            k: cfg.k,
            level,
            n: x.n(),
            per_fold_accuracy: accuracies,
            mean_accuracy: mean,
            chance_interval: chance_interval(y),
        },
        models,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn folds_are_stratified_and_balanced() {
        let y: Vec<u8> = (0..23).map(|i| (i % 3 == 0) as u8).collect();
        let a = stratified_folds(&y, 5, 1).unwrap();
        let mut sizes = [0usize; 5];
        for &f in &a {
            sizes[f] += 1;
        }
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for fold in 0..5 {
            let ones = (0..23).filter(|&i| a[i] == fold && y[i] == 1).count();
            assert!((1..=2).contains(&ones));
        }
        assert_eq!(a, stratified_folds(&y, 5, 1).unwrap());
    }

    #[test]
    fn fold_count_validation() {
        let y = [0, 1, 0];
        assert!(stratified_folds(&y, 4, 0).is_err());
        assert!(stratified_folds(&y, 1, 0).is_err());
    }

    #[test]
    fn chance_interval_for_forty_balanced() {
        let y: Vec<u8> = (0..40).map(|i| (i % 2) as u8).collect();
        assert_eq!(chance_interval(&y), [0.35, 0.65]);
    }

    #[test]
    fn singleton_class_degenerates() {
        let x = DataMatrix::from_values(array![[0.0, 1.0], [1.0, 0.0], [2.0, 1.0], [0.5, 2.0]])
            .unwrap();
        let cfg = CvConfig {
            folds: 2,
            k: 1,
            ..Default::default()
        };
        let err = nearest_centroid_cv(&x, &[0, 0, 0, 1], &cfg).unwrap_err();
        assert!(matches!(err, Error::DegenerateFold { class: 1, .. }));
    }

    #[test]
    fn separation_score_prefers_shifted_column() {
        let coeffs = array![[0.0, 5.0], [1.0, -5.0], [10.0, 5.0], [11.0, -5.0]];
        let s = feature_scores(&coeffs, &[0, 0, 1, 1], FeatureScore::Separation);
        assert!(s[0] > s[1]);
        assert_eq!(s[1], 0.0);
    }
}
