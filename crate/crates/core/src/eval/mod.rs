//! Comparisons of the treelet transform against the baselines on data with
//! known structure, and the cross-validation leakage experiment.

mod cv;
mod purity;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use cv::{
    chance_interval, feature_scores, fit_fold_model, nearest_centroid_cv,
    nearest_centroid_cv_detailed, shuffled_labels, stratified_folds, CvConfig, CvMode, CvReport,
    FeatureScore, FoldModel,
};
pub use purity::{merge_purity, merge_purity_slots, BlockPurity, PurityScore};

use crate::baselines::{dissimilarity_from_similarity, hc_fit, pca_fit, Linkage};
use crate::data::{
    abs_correlation_from_covariance, covariance_of, DataMatrix, Metric, SimilarityMatrix,
};
use crate::error::{Error, Result};
use crate::treelet::{column_variances, treelet_fit, TreeletBasis, TreeletConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyPoint {
    pub k: usize,
    pub fraction: f64,
}

/// Fraction of total variance carried by the top-`K` coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyCurve {
    pub level: usize,
    pub points: Vec<EnergyPoint>,
}

impl EnergyCurve {
    /// From per-coefficient variances. With zero total variance every
    /// coefficient gets an equal share.
    pub fn from_variances(level: usize, variances: &[f64]) -> Self {
        let mut sorted: Vec<f64> = variances.iter().map(|v| v.max(0.0)).collect();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut cumulative = Vec::with_capacity(sorted.len() + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for v in &sorted {
            acc += v;
            cumulative.push(acc);
        }
        let p = sorted.len() as f64;
        let points = cumulative
            .iter()
            .enumerate()
            .map(|(k, &c)| EnergyPoint {
                k,
                fraction: if acc > 0.0 { c / acc } else { k as f64 / p },
            })
            .collect();
        EnergyCurve { level, points }
    }

    pub fn fractions(&self) -> Vec<f64> {
        self.points.iter().map(|pt| pt.fraction).collect()
    }
}

pub fn energy_curve(basis: &TreeletBasis, x: &DataMatrix, level: usize) -> Result<EnergyCurve> {
    let coeffs = basis.transform(x, level)?;
    Ok(EnergyCurve::from_variances(
        level,
        &column_variances(&coeffs),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub treelet: TreeletConfig,
    /// `None` means the full tree.
    pub level: Option<usize>,
    pub linkage: Linkage,
    /// Entries below this magnitude do not count toward a PCA component's
    /// support.
    pub support_tol: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            treelet: TreeletConfig::default(),
            level: None,
            linkage: Linkage::Average,
            support_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub energy: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub purity: Option<PurityScore>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_merge: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub n: usize,
    pub p: usize,
    pub blocks: usize,
    pub level: usize,
    pub treelet: MethodSummary,
    pub pca: MethodSummary,
    pub hc: MethodSummary,
    /// Number of blocks each PCA component touches, in component order.
    pub pca_component_blocks: Vec<usize>,
    /// `|<top PCA component, first treelet sum vector>|`.
    pub top_component_alignment: f64,
}

/// Wall-clock milliseconds per method. Kept apart from the report, which
/// must be reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub treelet_ms: f64,
    pub pca_ms: f64,
    pub hc_ms: f64,
}

/// Number of distinct labels among the entries of `v` above `tol`.
pub fn support_blocks(v: &[f64], labels: &[usize], tol: f64) -> usize {
    let mut seen: Vec<usize> = v
        .iter()
        .zip(labels)
        .filter(|(x, _)| x.abs() > tol)
        .map(|(_, &l)| l)
        .collect();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

pub fn compare_report(
    x: &DataMatrix,
    labels: &[usize],
    cfg: &CompareConfig,
) -> Result<(CompareReport, Timings)> {
    let p = x.p();
    if labels.len() != p {
        return Err(Error::LabelMismatch {
            labels: labels.len(),
            p,
        });
    }
    let level = cfg.level.unwrap_or(p.saturating_sub(1));

    let t0 = Instant::now();
    let fit = treelet_fit(x, level, cfg.treelet)?;
    let treelet_energy = energy_curve(&fit.basis, x, level)?;
    let treelet_purity = merge_purity(&fit.dendrogram, labels)?;
    let treelet_ms = t0.elapsed().as_secs_f64() * 1e3;

    let t1 = Instant::now();
    let cov = covariance_of(x.values())?;
    let pca = pca_fit(&SimilarityMatrix::new(cov.clone(), Metric::Covariance)?)?;
    let pca_ms = t1.elapsed().as_secs_f64() * 1e3;

    let t2 = Instant::now();
    let corr = SimilarityMatrix::new(
        abs_correlation_from_covariance(&cov),
        Metric::AbsCorrelation,
    )?;
    let hc = hc_fit(&dissimilarity_from_similarity(&corr)?, cfg.linkage)?;
    let hc_purity = merge_purity_slots(hc.slot_merges(), labels);
    let hc_ms = t2.elapsed().as_secs_f64() * 1e3;

    let first = fit.basis.rotations()[0];
    // Sum vector of the first merge, before later levels rotate it further.
    let mut first_sum = vec![0.0; p];
    first_sum[first.alpha] = if first.sum_index == first.alpha {
        first.c
    } else {
        -first.s
    };
    first_sum[first.beta] = if first.sum_index == first.alpha {
        first.s
    } else {
        first.c
    };
    let top = pca.components().column(0);
    let alignment = top
        .iter()
        .zip(&first_sum)
        .map(|(a, b)| a * b)
        .sum::<f64>()
        .abs();

    let pca_component_blocks = pca
        .components()
        .columns()
        .into_iter()
        .map(|c| support_blocks(&c.to_vec(), labels, cfg.support_tol))
        .collect();

    let hc_first = hc.slot_merges()[0];
    let mut blocks = labels.to_vec();
    blocks.sort_unstable();
    blocks.dedup();

    Ok((
        CompareReport {
            n: x.n(),
            p,
            blocks: blocks.len(),
            level,
            treelet: MethodSummary {
                energy: treelet_energy.fractions(),
                purity: Some(treelet_purity),
                first_merge: Some((first.alpha, first.beta)),
            },
            pca: MethodSummary {
                energy: pca.energy_fractions(),
                purity: None,
                first_merge: None,
            },
            hc: MethodSummary {
                energy: Vec::new(),
                purity: Some(hc_purity),
                first_merge: Some((hc_first.left, hc_first.right)),
            },
            pca_component_blocks,
            top_component_alignment: alignment,
        },
        Timings {
            treelet_ms,
            pca_ms,
            hc_ms,
        },
    ))
}
