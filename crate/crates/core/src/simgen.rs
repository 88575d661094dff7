//! Synthetic expression data under three dependence regimes: independent
//! equicorrelated blocks (pathways), blocks plus one shared global factor,
//! and the multiplicative driver/modulator model.
//!
//! Random-stream layout for the block model: for each sample, for each block,
//! one block factor followed by `(epsilon, noise)` for each variable of the
//! block. The global factor for every sample is drawn after the whole block
//! matrix, so `global_loading = 0` reproduces the block model bit for bit.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{DataMatrix, Scale};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub size: usize,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockModelSpec {
    pub seed: u64,
    pub n: usize,
    pub blocks: Vec<BlockSpec>,
    #[serde(default)]
    pub noise_sd: f64,
    /// Optional declared dimension, checked against the block sizes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
}

impl BlockModelSpec {
    pub fn uniform(
        seed: u64,
        n: usize,
        blocks: usize,
        size: usize,
        rho: f64,
        noise_sd: f64,
    ) -> Self {
        BlockModelSpec {
            seed,
            n,
            blocks: vec![BlockSpec { size, rho }; blocks],
            noise_sd,
            p: None,
        }
    }

    pub fn p(&self) -> usize {
        self.blocks.iter().map(|b| b.size).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::spec("n", "must be at least 1"));
        }
        if self.blocks.is_empty() {
            return Err(Error::spec("blocks", "at least one block is required"));
        }
        for (i, b) in self.blocks.iter().enumerate() {
            if b.size == 0 {
                return Err(Error::spec(
                    format!("blocks[{i}].size"),
                    "must be at least 1",
                ));
            }
            if !(0.0..1.0).contains(&b.rho) {
                return Err(Error::spec(
                    format!("blocks[{i}].rho"),
                    "must lie in [0, 1)",
                ));
            }
        }
        if !(self.noise_sd.is_finite() && self.noise_sd >= 0.0) {
            return Err(Error::spec("noise_sd", "must be finite and non-negative"));
        }
        if let Some(p) = self.p {
            if p != self.p() {
                return Err(Error::spec(
                    "p",
                    format!("declared {p} but block sizes sum to {}", self.p()),
                ));
            }
        }
        Ok(())
    }

    /// Block index of every variable.
    pub fn labels(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .enumerate()
            .flat_map(|(b, blk)| std::iter::repeat_n(b, blk.size))
            .collect()
    }

    /// Covariance of the generating distribution.
    pub fn population_covariance(&self) -> Array2<f64> {
        let labels = self.labels();
        let p = labels.len();
        let mut cov = Array2::zeros((p, p));
        for i in 0..p {
            for j in 0..p {
                cov[[i, j]] = if i == j {
                    1.0 + self.noise_sd * self.noise_sd
                } else if labels[i] == labels[j] {
                    self.blocks[labels[i]].rho
                } else {
                    0.0
                };
            }
        }
        cov
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalFactorSpec {
    pub block: BlockModelSpec,
    pub global_loading: f64,
}

impl GlobalFactorSpec {
    pub fn validate(&self) -> Result<()> {
        self.block.validate()?;
        if !(self.global_loading.is_finite() && self.global_loading >= 0.0) {
            return Err(Error::spec(
                "global_loading",
                "must be finite and non-negative",
            ));
        }
        Ok(())
    }

    pub fn population_covariance(&self) -> Array2<f64> {
        let g2 = self.global_loading * self.global_loading;
        self.block.population_covariance().mapv(|v| v + g2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriverModulatorSpec {
    pub seed: u64,
    pub n: usize,
    pub drivers: usize,
    pub modulators_per_driver: usize,
    pub log_driver_sd: f64,
    pub log_factor_sd: f64,
}

impl DriverModulatorSpec {
    pub fn p(&self) -> usize {
        self.drivers * (self.modulators_per_driver + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::spec("n", "must be at least 1"));
        }
        if self.drivers == 0 {
            return Err(Error::spec("drivers", "must be at least 1"));
        }
        if self.modulators_per_driver == 0 {
            return Err(Error::spec("modulators_per_driver", "must be at least 1"));
        }
        if !(self.log_driver_sd.is_finite() && self.log_driver_sd > 0.0) {
            return Err(Error::spec("log_driver_sd", "must be positive"));
        }
        if !(self.log_factor_sd.is_finite() && self.log_factor_sd > 0.0) {
            return Err(Error::spec("log_factor_sd", "must be positive"));
        }
        Ok(())
    }

    /// Driver index of every column; each driver is followed by its
    /// modulators.
    pub fn labels(&self) -> Vec<usize> {
        (0..self.drivers)
            .flat_map(|k| std::iter::repeat_n(k, self.modulators_per_driver + 1))
            .collect()
    }

    /// Correlation matrix of the log-scale data: logs are additive Gaussians
    /// `log D_k` (driver) and `log D_k + log U` (modulator).
    pub fn log_population_correlation(&self) -> Array2<f64> {
        let vd = self.log_driver_sd * self.log_driver_sd;
        let vu = self.log_factor_sd * self.log_factor_sd;
        let labels = self.labels();
        let m1 = self.modulators_per_driver + 1;
        let is_driver = |i: usize| i.is_multiple_of(m1);
        let p = self.p();
        let mut out = Array2::zeros((p, p));
        for i in 0..p {
            for j in 0..p {
                out[[i, j]] = if i == j {
                    1.0
                } else if labels[i] != labels[j] {
                    0.0
                } else if is_driver(i) || is_driver(j) {
                    (vd / (vd + vu)).sqrt()
                } else {
                    vd / (vd + vu)
                };
            }
        }
        out
    }
}

/// A spec file: `{"model": "block" | "global_factor" | "driver_modulator", ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum SimSpec {
    Block(BlockModelSpec),
    GlobalFactor(GlobalFactorSpec),
    DriverModulator(DriverModulatorSpec),
}

impl SimSpec {
    pub fn generate(&self) -> Result<Simulated> {
        match self {
            SimSpec::Block(s) => gen_block(s),
            SimSpec::GlobalFactor(s) => gen_global_factor(s),
            SimSpec::DriverModulator(s) => gen_driver_modulator(s),
        }
    }
}

/// Generated data with its ground-truth grouping (block or driver index per
/// variable).
#[derive(Debug, Clone, PartialEq)]
pub struct Simulated {
    pub data: DataMatrix,
    pub labels: Vec<usize>,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn block_values(spec: &BlockModelSpec, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let p = spec.p();
    let mut values = Array2::zeros((spec.n, p));
    for r in 0..spec.n {
        let mut col = 0;
        for blk in &spec.blocks {
            let z = normal(rng);
            let shared = blk.rho.sqrt() * z;
            let own = (1.0 - blk.rho).sqrt();
            for _ in 0..blk.size {
                let eps = normal(rng);
                let noise = normal(rng);
                values[[r, col]] = shared + own * eps + spec.noise_sd * noise;
                col += 1;
            }
        }
    }
    values
}

fn names(p: usize) -> Vec<String> {
    (0..p).map(|j| format!("g{j}")).collect()
}

pub fn gen_block(spec: &BlockModelSpec) -> Result<Simulated> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let values = block_values(spec, &mut rng);
    Ok(Simulated {
        data: DataMatrix::new(values, names(spec.p()), Scale::Log)?,
        labels: spec.labels(),
    })
}

pub fn gen_global_factor(spec: &GlobalFactorSpec) -> Result<Simulated> {
    spec.validate()?;
    let block = &spec.block;
    let mut rng = ChaCha8Rng::seed_from_u64(block.seed);
    let mut values = block_values(block, &mut rng);
    let factors: Vec<f64> = (0..block.n).map(|_| normal(&mut rng)).collect();
    if spec.global_loading != 0.0 {
        for (mut row, z) in values.rows_mut().into_iter().zip(factors) {
            let shift = spec.global_loading * z;
            row.mapv_inplace(|v| v + shift);
        }
    }
    Ok(Simulated {
        data: DataMatrix::new(values, names(block.p()), Scale::Log)?,
        labels: block.labels(),
    })
}

/// Raw-scale output: `D_k = exp(sd_D * N)` per driver and sample, and
/// `D_k * exp(sd_U * N)` for each of its modulators.
pub fn gen_driver_modulator(spec: &DriverModulatorSpec) -> Result<Simulated> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let m = spec.modulators_per_driver;
    let p = spec.p();
    let mut values = Array2::zeros((spec.n, p));
    for r in 0..spec.n {
        for k in 0..spec.drivers {
            let base = k * (m + 1);
            let driver = (spec.log_driver_sd * normal(&mut rng)).exp();
            values[[r, base]] = driver;
            for j in 1..=m {
                let factor = (spec.log_factor_sd * normal(&mut rng)).exp();
                values[[r, base + j]] = driver * factor;
            }
        }
    }
    let var_names = (0..spec.drivers)
        .flat_map(|k| {
            std::iter::once(format!("d{k}")).chain((1..=m).map(move |j| format!("d{k}_m{j}")))
        })
        .collect();
    Ok(Simulated {
        data: DataMatrix::new(values, var_names, Scale::Raw)?,
        labels: spec.labels(),
    })
}

/// Elementwise natural log; every entry must be positive.
pub fn log_transform(x: &DataMatrix) -> Result<DataMatrix> {
    if let Some(((row, col), &value)) = x.values().indexed_iter().find(|(_, v)| **v <= 0.0) {
        return Err(Error::NonPositiveEntry { row, col, value });
    }
    DataMatrix::new(x.values().mapv(f64::ln), x.var_names().to_vec(), Scale::Log)
}
