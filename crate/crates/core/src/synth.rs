//! Equicorrelated Gaussian benchmark data, support-recovery metrics and the
//! replicated benchmark harness.
//!
//! Randomness comes from ChaCha8 seeded with `spec.seed + replicate`; each
//! purpose draws from its own stream of that seed (see [`Stream`]), so adding
//! draws for one purpose never shifts another.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{cv_select, ic_select, CvConfig, IcConfig, InformationCriterion, POLISH_EVERY};
use crate::design::{Design, DenseMatrix};
use crate::error::{Error, Result};
use crate::lasso::Coefficients;
use crate::model::{build_grid, standardize_design, Dataset, ModelConstants, DEFAULT_GRID_RATIO, DEFAULT_GRID_SIZE};
use crate::selector::{fos_run_with, FosOptions, SelectionReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n: usize,
    pub p: usize,
    /// Pairwise correlation of the design rows.
    pub rho: f64,
    pub support_size: usize,
    /// Target `||X beta||^2 / n`.
    pub snr: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.p == 0 {
            return Err(Error::InvalidParameter(format!(
                "need n >= 2 and p >= 1 (n = {}, p = {})",
                self.n, self.p
            )));
        }
        if self.support_size == 0 || self.support_size > self.p {
            return Err(Error::InvalidParameter(format!(
                "support size {} must be in 1..={}",
                self.support_size, self.p
            )));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::InvalidParameter(format!("rho must be in [0, 1), got {}", self.rho)));
        }
        if !(self.snr > 0.0 && self.snr.is_finite()) {
            return Err(Error::InvalidParameter(format!("snr must be positive, got {}", self.snr)));
        }
        Ok(())
    }
}

/// Independent random streams drawn from one replicate seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Design = 0,
    Support = 1,
    Signs = 2,
    Noise = 3,
    Folds = 4,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub dataset: Dataset,
    pub beta: Coefficients,
    /// Sorted 1-based indices.
    pub support: Vec<usize>,
}

/// Draws `X` with rows from `N(0, (1 - rho) I + rho 11^T)`, standardizes it,
/// plants `support_size` entries of `+-1` rescaled so that
/// `||X beta||^2 / n = snr`, and adds standard normal noise.
pub fn gen_synthetic(spec: &SynthSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let SynthSpec { n, p, rho, .. } = *spec;

    // X = sqrt(1 - rho) Z + sqrt(rho) z0 1^T
    let mut design_rng = stream_rng(spec.seed, Stream::Design);
    let shared: Vec<f64> = (0..n).map(|_| design_rng.sample(StandardNormal)).collect();
    let (a, b) = ((1.0 - rho).sqrt(), rho.sqrt());
    let mut raw = DenseMatrix::zeros(n, p);
    for j in 0..p {
        let col = raw.column_mut(j);
        for (v, z0) in col.iter_mut().zip(&shared) {
            let z: f64 = design_rng.sample(StandardNormal);
            *v = a * z + b * z0;
        }
    }
    let mut noise_rng = stream_rng(spec.seed, Stream::Noise);
    let noise: Vec<f64> = (0..n).map(|_| noise_rng.sample(StandardNormal)).collect();
    let standardized = standardize_design(&raw, &noise)?;
    let x = standardized.x();

    let mut support_rng = stream_rng(spec.seed, Stream::Support);
    let mut support: Vec<usize> = sample(&mut support_rng, p, spec.support_size).into_vec();
    support.sort_unstable();
    let mut sign_rng = stream_rng(spec.seed, Stream::Signs);
    let mut beta = vec![0.0; p];
    for &j in &support {
        beta[j] = if sign_rng.gen::<bool>() { 1.0 } else { -1.0 };
    }
    let mut signal = vec![0.0; n];
    x.matvec(&beta, &mut signal);
    let power = signal.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if power == 0.0 || !power.is_finite() {
        return Err(Error::DegenerateSignal);
    }
    let scale = (spec.snr / power).sqrt();
    beta.iter_mut().for_each(|v| *v *= scale);
    let y: Vec<f64> = signal
        .iter()
        .zip(&noise)
        .map(|(s, e)| scale * s + e)
        .collect();
    let x = x.clone();
    Ok(SyntheticData {
        dataset: Dataset::from_parts_unchecked(x, y),
        beta: Coefficients(beta),
        support: support.into_iter().map(|j| j + 1).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportErrors {
    pub hamming: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// False positives `|estimated \ truth|` plus false negatives `|truth \ estimated|`.
pub fn hamming_distance(estimated: &[usize], truth: &[usize]) -> SupportErrors {
    let est: BTreeSet<_> = estimated.iter().collect();
    let tru: BTreeSet<_> = truth.iter().collect();
    let false_positives = est.difference(&tru).count();
    let false_negatives = tru.difference(&est).count();
    SupportErrors {
        hamming: false_positives + false_negatives,
        false_positives,
        false_negatives,
    }
}

/// Calibration methods compared by the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "fos")]
    Fos,
    #[serde(rename = "lasso_cv")]
    LassoCv,
    #[serde(rename = "lasso_bic")]
    LassoBic,
    #[serde(rename = "lasso_aic")]
    LassoAic,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Fos => "fos",
            Method::LassoCv => "lasso_cv",
            Method::LassoBic => "lasso_bic",
            Method::LassoAic => "lasso_aic",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fos" => Ok(Method::Fos),
            "lasso_cv" => Ok(Method::LassoCv),
            "lasso_bic" => Ok(Method::LassoBic),
            "lasso_aic" => Ok(Method::LassoAic),
            other => Err(Error::UnknownMethod(other.to_string())),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Settings shared by every method in a benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    pub grid_size: usize,
    pub grid_ratio: f64,
    pub constants: ModelConstants,
    pub fos: FosOptions,
    pub folds: usize,
    pub noise_variance: f64,
    /// Run replicates on the current rayon pool instead of sequentially.
    pub parallel: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            grid_size: DEFAULT_GRID_SIZE,
            grid_ratio: DEFAULT_GRID_RATIO,
            constants: ModelConstants::default(),
            fos: FosOptions {
                accelerated: true,
                polish_every: Some(POLISH_EVERY),
                ..FosOptions::default()
            },
            folds: 10,
            noise_variance: 1.0,
            parallel: false,
        }
    }
}

/// One method on one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub method: String,
    pub replicate: usize,
    pub hamming: usize,
    #[serde(rename = "fp")]
    pub false_positives: usize,
    #[serde(rename = "fn")]
    pub false_negatives: usize,
    #[serde(rename = "wall_time_s")]
    pub wall_time: f64,
}

/// Runs one calibration method on a dataset. Timing covers grid construction
/// and selection, not data generation.
pub fn run_method(dataset: &Dataset, method: Method, config: &BenchConfig, seed: u64) -> Result<SelectionReport> {
    let start = Instant::now();
    let grid = build_grid(dataset, config.grid_size, config.grid_ratio)?;
    let mut report = match method {
        Method::Fos => fos_run_with(dataset, &grid, &config.constants, &config.fos)?,
        Method::LassoCv => {
            let cv = CvConfig {
                folds: config.folds,
                seed,
                ..CvConfig::for_dataset(dataset)
            };
            cv_select(dataset, &grid, &cv)?
        }
        Method::LassoBic | Method::LassoAic => {
            let criterion = if method == Method::LassoBic {
                InformationCriterion::Bic
            } else {
                InformationCriterion::Aic
            };
            let ic = IcConfig {
                criterion,
                noise_variance: config.noise_variance,
            };
            let tol = crate::baselines::default_path_tol(dataset);
            ic_select(dataset, &grid, &ic, tol)?
        }
    };
    report.wall_time = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Generates replicate `spec.seed + r` for each `r` in `0..replicates`, runs
/// every method on the same dataset and scores the supports.
///
/// Rows are ordered by replicate, then by the order of `methods`.
pub fn run_benchmark(
    spec: &SynthSpec,
    methods: &[Method],
    replicates: usize,
    config: &BenchConfig,
) -> Result<Vec<BenchResult>> {
    if replicates == 0 {
        return Err(Error::InvalidParameter("replicates must be at least 1".into()));
    }
    spec.validate()?;
    let one = |replicate: usize| -> Result<Vec<BenchResult>> {
        let seed = spec.seed.wrapping_add(replicate as u64);
        let data = gen_synthetic(&SynthSpec { seed, ..*spec })?;
        methods
            .iter()
            .map(|&method| {
                let report = run_method(&data.dataset, method, config, seed)?;
                let errors = hamming_distance(&report.support, &data.support);
                Ok(BenchResult {
                    method: method.name().to_string(),
                    replicate,
                    hamming: errors.hamming,
                    false_positives: errors.false_positives,
                    false_negatives: errors.false_negatives,
                    wall_time: report.wall_time,
                })
            })
            .collect()
    };
    let per_replicate: Vec<Result<Vec<BenchResult>>> = if config.parallel {
        (0..replicates).into_par_iter().map(one).collect()
    } else {
        (0..replicates).map(one).collect()
    };
    let mut rows = Vec::with_capacity(replicates * methods.len());
    for r in per_replicate {
        rows.extend(r?);
    }
    Ok(rows)
}

/// Mean and sample standard deviation of one method's rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub replicates: usize,
    pub hamming_mean: f64,
    pub hamming_sd: f64,
    pub fp_mean: f64,
    pub fn_mean: f64,
    pub wall_time_mean: f64,
    pub wall_time_sd: f64,
}

pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let k = values.len();
    if k == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / k as f64;
    if k == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1) as f64;
    (mean, var.sqrt())
}

/// Per-method summaries in order of first appearance.
pub fn summarize(rows: &[BenchResult]) -> Vec<MethodSummary> {
    let mut order: Vec<&str> = Vec::new();
    for row in rows {
        if !order.contains(&row.method.as_str()) {
            order.push(&row.method);
        }
    }
    order
        .into_iter()
        .map(|method| {
            let mine: Vec<&BenchResult> = rows.iter().filter(|r| r.method == method).collect();
            let col = |f: &dyn Fn(&BenchResult) -> f64| mine.iter().map(|r| f(r)).collect::<Vec<_>>();
            let (hamming_mean, hamming_sd) = mean_sd(&col(&|r| r.hamming as f64));
            let (wall_time_mean, wall_time_sd) = mean_sd(&col(&|r| r.wall_time));
            MethodSummary {
                method: method.to_string(),
                replicates: mine.len(),
                hamming_mean,
                hamming_sd,
                fp_mean: mean_sd(&col(&|r| r.false_positives as f64)).0,
                fn_mean: mean_sd(&col(&|r| r.false_negatives as f64)).0,
                wall_time_mean,
                wall_time_sd,
            }
        })
        .collect()
}
