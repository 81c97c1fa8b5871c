//! The FOS driver: a warm-started walk down the tuning grid where each point
//! is solved only to a gap of `C c^2 r^2 / n`, stopped by a sup-norm
//! comparison against every earlier iterate, then thresholded at `6 c r / n`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::design::Design;
use crate::error::{Error, Result};
use crate::lasso::{solve_to_gap_cached, Coefficients, GramCache, SolveTrace, SolverOptions, DEFAULT_MAX_ITERS};
use crate::model::{Dataset, ModelConstants, TuningGrid};

/// Gap tolerance at tuning parameter `r`: `C c^2 r^2 / n`.
pub fn gap_bound(constants: &ModelConstants, r: f64, n: usize) -> f64 {
    constants.cap_c * constants.c * constants.c * r * r / n as f64
}

/// Sup-norm stopping test at grid position `stats_it` (1-based).
///
/// Passes iff for every `k` in `1..=stats_it`
/// `||beta^{r_stats_it} - beta^{r_k}||_inf / (r_stats_it + r_k) <= c / n`.
/// `betas[k-1]` holds the iterate for `r_k`. With `skip_first` the comparison
/// against `r_1` (the all-zeros start) is left out.
pub fn av_test(
    betas: &[Coefficients],
    grid: &TuningGrid,
    stats_it: usize,
    constants: &ModelConstants,
    n: usize,
) -> Result<bool> {
    av_test_from(betas, grid, stats_it, constants, n, 1)
}

fn av_test_from(
    betas: &[Coefficients],
    grid: &TuningGrid,
    stats_it: usize,
    constants: &ModelConstants,
    n: usize,
    first_k: usize,
) -> Result<bool> {
    if stats_it < 2 || stats_it > betas.len() || stats_it > grid.len() {
        return Err(Error::IndexOutOfRange {
            index: stats_it,
            len: betas.len().min(grid.len()),
        });
    }
    let limit = constants.c / n as f64;
    let current = &betas[stats_it - 1];
    let r_current = grid.get(stats_it - 1);
    Ok((first_k..=stats_it).all(|k| {
        let dist = current.sup_distance(&betas[k - 1]);
        dist / (r_current + grid.get(k - 1)) - limit <= 0.0
    }))
}

/// Sorted 1-based indices `j` with `|beta_j| >= 6 c r_tilde / n`.
pub fn threshold_support(beta: &Coefficients, r_tilde: f64, constants: &ModelConstants, n: usize) -> Vec<usize> {
    let cutoff = support_threshold(r_tilde, constants, n);
    beta.0
        .iter()
        .enumerate()
        .filter(|(_, b)| b.abs() >= cutoff)
        .map(|(j, _)| j + 1)
        .collect()
}

pub fn support_threshold(r_tilde: f64, constants: &ModelConstants, n: usize) -> f64 {
    6.0 * constants.c * r_tilde / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FosOptions {
    pub max_iters: usize,
    pub accelerated: bool,
    /// Abort on the first grid point that exhausts `max_iters`.
    pub strict: bool,
    /// Leave the all-zeros iterate at `r_1` out of the stopping test.
    pub skip_first_comparison: bool,
    /// Active-set step interval passed to the solver.
    pub polish_every: Option<usize>,
}

impl Default for FosOptions {
    fn default() -> Self {
        FosOptions {
            max_iters: DEFAULT_MAX_ITERS,
            accelerated: false,
            strict: false,
            skip_first_comparison: false,
            polish_every: None,
        }
    }
}

/// Per-grid-point record of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridStep {
    /// 1-based grid position.
    pub index: usize,
    pub r: f64,
    pub gap_bound: f64,
    pub trace: SolveTrace,
    /// Whether the solver hit its iteration limit here.
    pub max_iters_hit: bool,
    /// Stopping-test outcome after this point was solved; `None` for
    /// calibrators without one.
    pub test_passed: Option<bool>,
}

/// Output of one calibration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub method: String,
    pub r_tilde: f64,
    /// 1-based grid position of `r_tilde`.
    pub r_tilde_index: usize,
    pub beta_tilde: Coefficients,
    /// Sorted 1-based feature indices.
    pub support: Vec<usize>,
    pub threshold: f64,
    pub per_grid: Vec<GridStep>,
    /// The stopping test never rejected and the whole grid was visited.
    pub path_exhausted: bool,
    /// Some grid point used a best-effort iterate after `max_iters`.
    pub max_iters_hit: bool,
    pub wall_time: f64,
}

impl SelectionReport {
    /// Total proximal-gradient updates across the run.
    pub fn total_iterations(&self) -> usize {
        self.per_grid.iter().map(|s| s.trace.iterations).sum()
    }

    /// `stats_it` at exit (1-based index of the last solved grid point).
    pub fn stats_it(&self) -> usize {
        self.per_grid.last().map_or(1, |s| s.index)
    }
}

/// Walk state: stored iterates `beta^{r_1..r_stats_it}` and the current choice.
#[derive(Debug, Clone)]
pub struct FosState {
    pub betas: Vec<Coefficients>,
    pub stats_it: usize,
    pub stats_cont: bool,
    pub r_tilde: f64,
}

impl FosState {
    fn new(p: usize, grid: &TuningGrid) -> Self {
        FosState {
            betas: vec![Coefficients::zeros(p)],
            stats_it: 1,
            stats_cont: true,
            r_tilde: grid.r_min(),
        }
    }

    /// 1-based grid position of `r_tilde`.
    pub fn r_tilde_index(&self, grid: &TuningGrid) -> usize {
        if self.stats_cont {
            grid.len()
        } else {
            self.stats_it - 1
        }
    }
}

/// Runs the full scheme with default options.
pub fn fos_run<X: Design>(
    dataset: &Dataset<X>,
    grid: &TuningGrid,
    constants: &ModelConstants,
    max_iters: usize,
) -> Result<SelectionReport> {
    let options = FosOptions {
        max_iters,
        ..FosOptions::default()
    };
    fos_run_with(dataset, grid, constants, &options)
}

pub fn fos_run_with<X: Design>(
    dataset: &Dataset<X>,
    grid: &TuningGrid,
    constants: &ModelConstants,
    options: &FosOptions,
) -> Result<SelectionReport> {
    let start = Instant::now();
    let n = dataset.n();
    let m = grid.len();
    let mut state = FosState::new(dataset.p(), grid);
    let mut steps = Vec::new();
    let mut solver = SolverOptions {
        max_iters: options.max_iters,
        initial_step: 1.0,
        accelerated: options.accelerated,
        polish_every: options.polish_every,
    };
    let mut cache = GramCache::default();
    let first_k = if options.skip_first_comparison { 2 } else { 1 };

    while state.stats_cont && state.stats_it < m {
        state.stats_it += 1;
        let r = grid.get(state.stats_it - 1);
        let bound = gap_bound(constants, r, n);
        let warm = &state.betas[state.stats_it - 2];
        let (solution, hit) = match solve_to_gap_cached(dataset, warm, r, bound, &solver, &mut cache) {
            Ok(sol) => (sol, false),
            Err(Error::MaxItersExceeded(sol)) if !options.strict => (*sol, true),
            Err(e) => return Err(e),
        };
        solver.initial_step = solution.trace.final_step_size;
        state.betas.push(solution.beta);
        state.stats_cont = av_test_from(&state.betas, grid, state.stats_it, constants, n, first_k)?;
        steps.push(GridStep {
            index: state.stats_it,
            r,
            gap_bound: bound,
            trace: solution.trace,
            max_iters_hit: hit,
            test_passed: Some(state.stats_cont),
        });
    }
    if !state.stats_cont {
        state.r_tilde = grid.get(state.stats_it - 2);
    }
    let r_tilde_index = state.r_tilde_index(grid);
    let beta_tilde = state.betas[r_tilde_index - 1].clone();
    let support = threshold_support(&beta_tilde, state.r_tilde, constants, n);
    Ok(SelectionReport {
        method: "fos".into(),
        r_tilde: state.r_tilde,
        r_tilde_index,
        beta_tilde,
        support,
        threshold: support_threshold(state.r_tilde, constants, n),
        max_iters_hit: steps.iter().any(|s| s.max_iters_hit),
        path_exhausted: state.stats_cont,
        per_grid: steps,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
