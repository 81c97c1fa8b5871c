//! Standard calibration over the same Lasso path: K-fold cross-validation and
//! BIC/AIC. Path points are solved to a fixed gap tolerance, not an
//! `r`-dependent one.

use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{norm_sq, Design, DenseMatrix};
use crate::error::{Error, Result};
use crate::lasso::{solve_to_gap, solve_to_gap_cached, Coefficients, GramCache, Solution, SolverOptions, DEFAULT_MAX_ITERS};
use crate::model::{column_location_scale, Dataset, TuningGrid};
use crate::selector::{GridStep, SelectionReport};
use crate::synth::{stream_rng, Stream};

/// Update count between active-set steps on path solves.
pub const POLISH_EVERY: usize = 5;

/// Entries with magnitude at or below this count as zero.
pub const NONZERO_TOL: f64 = 1e-12;

/// Fixed path tolerance `1e-7 ||Y||^2`.
pub fn default_path_tol<X: Design>(dataset: &Dataset<X>) -> f64 {
    let tol = 1e-7 * norm_sq(dataset.y());
    if tol > 0.0 {
        tol
    } else {
        f64::MIN_POSITIVE
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvConfig {
    pub folds: usize,
    pub seed: u64,
    /// Gap tolerance for every path point.
    pub tol: f64,
    pub max_iters: usize,
    /// Fit folds on the current rayon pool.
    pub parallel: bool,
}

impl CvConfig {
    pub fn for_dataset<X: Design>(dataset: &Dataset<X>) -> Self {
        CvConfig {
            folds: 10,
            seed: 0,
            tol: default_path_tol(dataset),
            max_iters: DEFAULT_MAX_ITERS,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InformationCriterion {
    #[serde(rename = "bic")]
    Bic,
    #[serde(rename = "aic")]
    Aic,
}

impl std::str::FromStr for InformationCriterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bic" => Ok(InformationCriterion::Bic),
            "aic" => Ok(InformationCriterion::Aic),
            other => Err(Error::InvalidParameter(format!("unknown criterion `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcConfig {
    pub criterion: InformationCriterion,
    /// Noise variance `sigma^2`.
    pub noise_variance: f64,
}

impl Default for IcConfig {
    fn default() -> Self {
        IcConfig {
            criterion: InformationCriterion::Bic,
            noise_variance: 1.0,
        }
    }
}

/// `RSS / (n sigma^2) + penalty * |S| / n` with penalty `log n` (BIC) or `2` (AIC).
pub fn information_criterion(
    criterion: InformationCriterion,
    rss: f64,
    n: usize,
    support_size: usize,
    noise_variance: f64,
) -> f64 {
    let nf = n as f64;
    let per_feature = match criterion {
        InformationCriterion::Bic => nf.ln(),
        InformationCriterion::Aic => 2.0,
    };
    rss / (nf * noise_variance) + per_feature * support_size as f64 / nf
}

/// Seeded shuffle of `0..n` cut into `folds` contiguous blocks whose sizes
/// differ by at most one. Each block is sorted.
pub fn fold_partition(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 folds, got {folds}")));
    }
    if folds > n {
        return Err(Error::TooFewSamples { n, required: folds });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(seed, Stream::Folds));
    let base = n / folds;
    let extra = n % folds;
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for k in 0..folds {
        let size = base + usize::from(k < extra);
        let mut block = order[start..start + size].to_vec();
        block.sort_unstable();
        out.push(block);
        start += size;
    }
    Ok(out)
}

/// Solves every grid point with warm starts, keeping the best iterate when a
/// point runs out of iterations.
fn fit_path<X: Design>(
    dataset: &Dataset<X>,
    penalties: impl Iterator<Item = f64>,
    tol: f64,
    max_iters: usize,
) -> Result<Vec<(Solution, bool)>> {
    let mut options = SolverOptions {
        max_iters,
        initial_step: 1.0,
        accelerated: true,
        polish_every: Some(POLISH_EVERY),
    };
    let mut warm = Coefficients::zeros(dataset.p());
    let mut cache = GramCache::default();
    let mut out = Vec::new();
    for r in penalties {
        let (sol, hit) = match solve_to_gap_cached(dataset, &warm, r, tol, &options, &mut cache) {
            Ok(sol) => (sol, false),
            Err(Error::MaxItersExceeded(sol)) => (*sol, true),
            Err(e) => return Err(e),
        };
        options.initial_step = sol.trace.final_step_size;
        warm = sol.beta.clone();
        out.push((sol, hit));
    }
    Ok(out)
}

fn path_steps(grid: &TuningGrid, path: Vec<(Solution, bool)>, tol: f64) -> (Vec<GridStep>, Vec<Coefficients>) {
    let mut steps = Vec::with_capacity(path.len());
    let mut betas = Vec::with_capacity(path.len());
    for (k, (sol, hit)) in path.into_iter().enumerate() {
        steps.push(GridStep {
            index: k + 1,
            r: grid.get(k),
            gap_bound: tol,
            trace: sol.trace,
            max_iters_hit: hit,
            test_passed: None,
        });
        betas.push(sol.beta);
    }
    (steps, betas)
}

/// Training and held-out designs for one fold, both scaled with the training
/// rows' means and spreads.
fn split_fold(dataset: &Dataset, held_out: &[usize]) -> Result<(Dataset, DenseMatrix, Vec<f64>)> {
    let n = dataset.n();
    let mut is_test = vec![false; n];
    held_out.iter().for_each(|&i| is_test[i] = true);
    let train: Vec<usize> = (0..n).filter(|&i| !is_test[i]).collect();
    let x = dataset.x();
    let mut x_train = x.select_rows(&train);
    let mut x_test = x.select_rows(held_out);
    for j in 0..x.ncols() {
        let (mean, scale) = column_location_scale(x_train.column(j))
            .ok_or(Error::ConstantColumn { column: j + 1 })?;
        x_train.column_mut(j).iter_mut().for_each(|v| *v = (*v - mean) / scale);
        x_test.column_mut(j).iter_mut().for_each(|v| *v = (*v - mean) / scale);
    }
    let y_train = train.iter().map(|&i| dataset.y()[i]).collect();
    let y_test = held_out.iter().map(|&i| dataset.y()[i]).collect();
    Ok((Dataset::from_parts_unchecked(x_train, y_train), x_test, y_test))
}

/// Held-out sum of squared errors at every grid point for one fold.
fn fold_errors(dataset: &Dataset, grid: &TuningGrid, held_out: &[usize], config: &CvConfig) -> Result<Vec<f64>> {
    let (train, x_test, y_test) = split_fold(dataset, held_out)?;
    // same per-sample penalty as the full-data objective
    let shrink = train.n() as f64 / dataset.n() as f64;
    let path = fit_path(&train, grid.values().iter().map(|r| r * shrink), config.tol, config.max_iters)?;
    let mut pred = vec![0.0; y_test.len()];
    Ok(path
        .iter()
        .map(|(sol, _)| {
            x_test.matvec(sol.beta.as_slice(), &mut pred);
            pred.iter().zip(&y_test).map(|(a, b)| (a - b) * (a - b)).sum()
        })
        .collect())
}

/// K-fold cross-validation over the grid, then a refit at the selected `r` on
/// all samples. The support is every nonzero coefficient.
pub fn cv_select(dataset: &Dataset, grid: &TuningGrid, config: &CvConfig) -> Result<SelectionReport> {
    let start = Instant::now();
    let folds = fold_partition(dataset.n(), config.folds, config.seed)?;
    let per_fold: Vec<Result<Vec<f64>>> = if config.parallel {
        folds.par_iter().map(|f| fold_errors(dataset, grid, f, config)).collect()
    } else {
        folds.iter().map(|f| fold_errors(dataset, grid, f, config)).collect()
    };
    let mut cv_error = vec![0.0; grid.len()];
    for errors in per_fold {
        for (acc, e) in cv_error.iter_mut().zip(errors?) {
            *acc += e;
        }
    }
    let n = dataset.n() as f64;
    cv_error.iter_mut().for_each(|e| *e /= n);
    // strict `<` keeps the larger r on ties
    let best = cv_error
        .iter()
        .enumerate()
        .fold(0, |best, (k, e)| if *e < cv_error[best] { k } else { best });
    let r = grid.get(best);

    let options = SolverOptions {
        max_iters: config.max_iters,
        initial_step: 1.0,
        accelerated: true,
        polish_every: Some(POLISH_EVERY),
    };
    let (sol, hit) = match solve_to_gap(dataset, &Coefficients::zeros(dataset.p()), r, config.tol, &options) {
        Ok(sol) => (sol, false),
        Err(Error::MaxItersExceeded(sol)) => (*sol, true),
        Err(e) => return Err(e),
    };
    let support = sol.beta.support(NONZERO_TOL);
    Ok(SelectionReport {
        method: "lasso_cv".into(),
        r_tilde: r,
        r_tilde_index: best + 1,
        support,
        threshold: 0.0,
        per_grid: vec![GridStep {
            index: best + 1,
            r,
            gap_bound: config.tol,
            trace: sol.trace,
            max_iters_hit: hit,
            test_passed: None,
        }],
        beta_tilde: sol.beta,
        path_exhausted: false,
        max_iters_hit: hit,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Fits the whole path and keeps the `r` minimizing BIC or AIC; the smallest
/// `r` wins ties.
pub fn ic_select<X: Design>(
    dataset: &Dataset<X>,
    grid: &TuningGrid,
    config: &IcConfig,
    tol: f64,
) -> Result<SelectionReport> {
    let start = Instant::now();
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("path tolerance must be positive, got {tol}")));
    }
    if !(config.noise_variance > 0.0 && config.noise_variance.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise variance must be positive, got {}",
            config.noise_variance
        )));
    }
    let n = dataset.n();
    let path = fit_path(dataset, grid.values().iter().copied(), tol, DEFAULT_MAX_ITERS)?;
    let (steps, betas) = path_steps(grid, path, tol);
    let mut xb = vec![0.0; n];
    let scores: Vec<f64> = betas
        .iter()
        .map(|beta| {
            dataset.x().matvec(beta.as_slice(), &mut xb);
            let rss = dataset.y().iter().zip(&xb).map(|(a, b)| (a - b) * (a - b)).sum();
            let size = beta.support(NONZERO_TOL).len();
            information_criterion(config.criterion, rss, n, size, config.noise_variance)
        })
        .collect();
    let best = scores
        .iter()
        .enumerate()
        .fold(0, |best, (k, s)| if *s <= scores[best] { k } else { best });
    let beta = betas[best].clone();
    let method = match config.criterion {
        InformationCriterion::Bic => "lasso_bic",
        InformationCriterion::Aic => "lasso_aic",
    };
    Ok(SelectionReport {
        method: method.into(),
        r_tilde: grid.get(best),
        r_tilde_index: best + 1,
        support: beta.support(NONZERO_TOL),
        beta_tilde: beta,
        threshold: 0.0,
        max_iters_hit: steps.iter().any(|s| s.max_iters_hit),
        per_grid: steps,
        path_exhausted: false,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
