//! Lasso objective `||Y - X theta||^2 + r ||theta||_1`, its Fenchel dual, and
//! a proximal-gradient solver that stops on a duality-gap certificate.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::design::{dot, norm_inf, norm_l1, norm_sq, Design};
use crate::error::{Error, Result};
use crate::model::Dataset;

pub const DEFAULT_MAX_ITERS: usize = 10_000;

/// Regression vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coefficients(pub Vec<f64>);

impl Coefficients {
    pub fn zeros(p: usize) -> Self {
        Coefficients(vec![0.0; p])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// 1-based indices of entries with `|beta_j| > tol`.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, b)| b.abs() > tol)
            .map(|(j, _)| j + 1)
            .collect()
    }

    pub fn sup_distance(&self, other: &Coefficients) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Point of the dual problem `max D(nu, r)` subject to `||X^T nu||_inf <= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DualPoint(pub Vec<f64>);

impl DualPoint {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `||X^T nu||_inf`; feasible points have this at most one.
    pub fn constraint_value<X: Design>(&self, x: &X) -> f64 {
        let mut out = vec![0.0; x.n_features()];
        x.rmatvec(&self.0, &mut out);
        norm_inf(&out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    /// Proximal-gradient updates performed.
    pub iterations: usize,
    pub final_gap: f64,
    /// Backtracking step-size parameter `L` in effect at exit.
    pub final_step_size: f64,
    /// Gap observed at each check, in order; one more entry than `iterations`
    /// when the bound was met.
    pub gaps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub beta: Coefficients,
    pub nu: DualPoint,
    pub trace: SolveTrace,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Step-size parameter `L` to start backtracking from.
    pub initial_step: f64,
    /// FISTA momentum with gradient-mapping restarts instead of the plain update.
    pub accelerated: bool,
    /// Every this many updates (and before the first), also try an active-set
    /// step: solve the normal equations on the current support with its signs
    /// fixed, move toward that solution up to the first sign change, and keep
    /// the result if the objective went down.
    pub polish_every: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iters: DEFAULT_MAX_ITERS,
            initial_step: 1.0,
            accelerated: false,
            polish_every: None,
        }
    }
}

fn check_dims<X: Design>(dataset: &Dataset<X>, beta_len: Option<usize>, nu_len: Option<usize>) -> Result<()> {
    if let Some(len) = beta_len {
        if len != dataset.p() {
            return Err(Error::DimensionMismatch {
                expected: dataset.p(),
                found: len,
            });
        }
    }
    if let Some(len) = nu_len {
        if len != dataset.n() {
            return Err(Error::DimensionMismatch {
                expected: dataset.n(),
                found: len,
            });
        }
    }
    Ok(())
}

fn check_r(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tuning parameter must be positive, got {r}")))
    }
}

/// `||Y - X beta||^2 + r ||beta||_1`.
pub fn objective_value<X: Design>(dataset: &Dataset<X>, beta: &Coefficients, r: f64) -> Result<f64> {
    check_dims(dataset, Some(beta.len()), None)?;
    check_r(r)?;
    let mut xb = vec![0.0; dataset.n()];
    dataset.x().matvec(&beta.0, &mut xb);
    Ok(residual_sq(dataset.y(), &xb) + r * norm_l1(&beta.0))
}

fn residual_sq(y: &[f64], xb: &[f64]) -> f64 {
    y.iter().zip(xb).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `D(nu, r) = -r^2 ||nu + 2Y/r||^2 / 4 + ||Y||^2`.
pub fn dual_value<X: Design>(dataset: &Dataset<X>, nu: &DualPoint, r: f64) -> Result<f64> {
    check_dims(dataset, None, Some(nu.0.len()))?;
    check_r(r)?;
    Ok(dual_value_unchecked(dataset.y(), &nu.0, r))
}

fn dual_value_unchecked(y: &[f64], nu: &[f64], r: f64) -> f64 {
    // r^2/4 ||nu + 2Y/r||^2 == ||(r/2) nu + Y||^2
    let half = 0.5 * r;
    let shifted: f64 = nu
        .iter()
        .zip(y)
        .map(|(v, yi)| {
            let t = half * v + yi;
            t * t
        })
        .sum();
    norm_sq(y) - shifted
}

/// Dual-feasible rescaling `nu = 2 s (X beta - Y) / r` of the residual, with
/// `s` the point closest to `-2Y/r` along that ray inside the feasible set.
pub fn dual_feasible_point<X: Design>(dataset: &Dataset<X>, beta: &Coefficients, r: f64) -> Result<DualPoint> {
    check_dims(dataset, Some(beta.len()), None)?;
    check_r(r)?;
    let mut xb = vec![0.0; dataset.n()];
    dataset.x().matvec(&beta.0, &mut xb);
    let diff = residual_diff(dataset.y(), &xb);
    let mut xtd = vec![0.0; dataset.p()];
    dataset.x().rmatvec(&diff, &mut xtd);
    match dual_scale(dataset.y(), &diff, &xtd, r) {
        Scale::ZeroResidual => Err(Error::ZeroResidual),
        Scale::ZeroCorrelation(_) => Err(Error::ZeroCorrelation),
        Scale::Clamped(s) => Ok(scale_residual(&diff, s, r)),
    }
}

enum Scale {
    ZeroResidual,
    /// Residual orthogonal to every column: any scale is feasible, this is the
    /// unconstrained optimum.
    ZeroCorrelation(f64),
    Clamped(f64),
}

/// `X beta - Y`.
fn residual_diff(y: &[f64], xb: &[f64]) -> Vec<f64> {
    xb.iter().zip(y).map(|(a, b)| a - b).collect()
}

fn dual_scale(y: &[f64], diff: &[f64], xtd: &[f64], r: f64) -> Scale {
    let dd = norm_sq(diff);
    if dd == 0.0 {
        return Scale::ZeroResidual;
    }
    let unconstrained = -dot(y, diff) / dd;
    let corr = 2.0 * norm_inf(xtd);
    if corr == 0.0 {
        return Scale::ZeroCorrelation(unconstrained);
    }
    let bound = r / corr;
    Scale::Clamped(unconstrained.max(-bound).min(bound))
}

fn scale_residual(diff: &[f64], s: f64, r: f64) -> DualPoint {
    let factor = 2.0 * s / r;
    DualPoint(diff.iter().map(|d| factor * d).collect())
}

/// `f(beta, r) - D(nu, r)`; nonnegative for feasible `nu` and an upper bound on
/// the suboptimality of `beta`.
pub fn duality_gap<X: Design>(
    dataset: &Dataset<X>,
    beta: &Coefficients,
    nu: &DualPoint,
    r: f64,
) -> Result<f64> {
    check_dims(dataset, Some(beta.len()), Some(nu.0.len()))?;
    Ok(objective_value(dataset, beta, r)? - dual_value_unchecked(dataset.y(), &nu.0, r))
}

/// Elementwise `sign(a_j) max(|a_j| - b, 0)`.
pub fn soft_threshold(a: &[f64], b: f64) -> Vec<f64> {
    a.iter().map(|&v| shrink(v, b)).collect()
}

#[inline]
fn shrink(v: f64, b: f64) -> f64 {
    if v > b {
        v - b
    } else if v < -b {
        v + b
    } else {
        0.0
    }
}

/// One update `T_{r/L}(beta - (2/L) X^T (X beta - Y))` at a fixed `L`.
pub fn prox_gradient_step<X: Design>(
    dataset: &Dataset<X>,
    beta: &Coefficients,
    r: f64,
    l: f64,
) -> Result<Coefficients> {
    check_dims(dataset, Some(beta.len()), None)?;
    check_r(r)?;
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidParameter(format!("step size must be positive, got {l}")));
    }
    let mut xb = vec![0.0; dataset.n()];
    dataset.x().matvec(&beta.0, &mut xb);
    let diff = residual_diff(dataset.y(), &xb);
    let mut xtd = vec![0.0; dataset.p()];
    dataset.x().rmatvec(&diff, &mut xtd);
    let mut out = vec![0.0; dataset.p()];
    prox_into(&beta.0, &xtd, r, l, &mut out);
    Ok(Coefficients(out))
}

fn prox_into(point: &[f64], half_grad: &[f64], r: f64, l: f64, out: &mut [f64]) {
    let step = 2.0 / l;
    let thresh = r / l;
    for ((o, &b), &g) in out.iter_mut().zip(point).zip(half_grad) {
        *o = shrink(b - step * g, thresh);
    }
}

/// Cached quantities at one primal iterate.
#[derive(Clone)]
struct Iterate {
    beta: Vec<f64>,
    /// `X beta`
    xb: Vec<f64>,
    /// `X beta - Y`
    diff: Vec<f64>,
    /// `X^T (X beta - Y)`, half the gradient of the smooth part
    xtd: Vec<f64>,
    /// `||X beta - Y||^2`
    fit: f64,
}

impl Iterate {
    fn new<X: Design>(dataset: &Dataset<X>, beta: Vec<f64>, xb: Vec<f64>) -> Self {
        let diff = residual_diff(dataset.y(), &xb);
        let mut xtd = vec![0.0; dataset.p()];
        dataset.x().rmatvec(&diff, &mut xtd);
        let fit = norm_sq(&diff);
        Iterate { beta, xb, diff, xtd, fit }
    }

    fn objective(&self, r: f64) -> f64 {
        self.fit + r * norm_l1(&self.beta)
    }

    /// Duality gap and certifying dual point.
    fn certify(&self, y: &[f64], r: f64) -> (f64, DualPoint) {
        let primal = self.objective(r);
        match dual_scale(y, &self.diff, &self.xtd, r) {
            // nu = 0 is feasible with D(0, r) = 0
            Scale::ZeroResidual => (primal, DualPoint(vec![0.0; y.len()])),
            Scale::ZeroCorrelation(s) | Scale::Clamped(s) => {
                let nu = scale_residual(&self.diff, s, r);
                // f - D, expanded via Y^T d = beta^T X^T d - ||d||^2
                let gap = (1.0 - s) * (1.0 - s) * self.fit
                    + r * norm_l1(&self.beta)
                    + 2.0 * s * dot(&self.beta, &self.xtd);
                (gap.max(0.0), nu)
            }
        }
    }
}

/// Smooth-part value and half-gradient at an extrapolated point, from which a
/// backtracking prox step is taken.
struct Anchor<'a> {
    point: &'a [f64],
    xtd: &'a [f64],
    fit: f64,
}

/// Backtracking prox step from `anchor`. Doubles `l` until the quadratic upper
/// bound of the smooth part holds at the candidate.
fn backtracking_step<X: Design>(dataset: &Dataset<X>, anchor: &Anchor<'_>, r: f64, l: &mut f64) -> Iterate {
    let p = dataset.p();
    let n = dataset.n();
    let mut theta = vec![0.0; p];
    let mut xt = vec![0.0; n];
    loop {
        prox_into(anchor.point, anchor.xtd, r, *l, &mut theta);
        dataset.x().matvec(&theta, &mut xt);
        let fit = residual_sq(dataset.y(), &xt);
        let mut lin = 0.0;
        let mut quad = 0.0;
        for ((t, b), g) in theta.iter().zip(anchor.point).zip(anchor.xtd) {
            let d = t - b;
            lin += g * d;
            quad += d * d;
        }
        let bound = anchor.fit + 2.0 * lin + 0.5 * *l * quad;
        let slack = 1e-12 * anchor.fit.abs().max(1.0);
        if quad == 0.0 || fit <= bound + slack || !l.is_finite() {
            return Iterate::new(dataset, theta, xt);
        }
        *l *= 2.0;
    }
}

/// Runs proximal-gradient updates from `warm_start` until the duality gap at
/// the current iterate is at most `gap_bound`.
///
/// The gap is checked before every update, so a warm start that already meets
/// the bound is returned unchanged after zero iterations. On hitting
/// `max_iters` the error carries the iterate with the smallest gap seen.
pub fn solve_to_gap<X: Design>(
    dataset: &Dataset<X>,
    warm_start: &Coefficients,
    r: f64,
    gap_bound: f64,
    options: &SolverOptions,
) -> Result<Solution> {
    solve_to_gap_cached(dataset, warm_start, r, gap_bound, options, &mut GramCache::default())
}

/// State reused by the active-set step across solves on one dataset: lazily
/// filled columns of `X^T X`, `X^T Y`, and a Cholesky factor of the Gram
/// matrix on the most recent support.
#[derive(Debug, Clone, Default)]
pub struct GramCache {
    xty: Option<Vec<f64>>,
    columns: HashMap<usize, Vec<f64>>,
    factor: Factor,
}

fn gram_column<'a, X: Design>(columns: &'a mut HashMap<usize, Vec<f64>>, dataset: &Dataset<X>, j: usize) -> &'a [f64] {
    columns.entry(j).or_insert_with(|| {
        let mut xj = vec![0.0; dataset.n()];
        dataset.x().column_into(j, &mut xj);
        let mut out = vec![0.0; dataset.p()];
        dataset.x().rmatvec(&xj, &mut out);
        out
    })
}

impl GramCache {
    /// Reshapes the factor to cover exactly `active`; `false` if some column
    /// would make it singular.
    fn sync_factor<X: Design>(&mut self, dataset: &Dataset<X>, active: &[usize]) -> bool {
        let mut wanted = vec![false; dataset.p()];
        active.iter().for_each(|&j| wanted[j] = true);
        for pos in (0..self.factor.order.len()).rev() {
            let j = self.factor.order[pos];
            if wanted[j] {
                wanted[j] = false;
            } else {
                self.factor.remove(pos);
            }
        }
        for &j in active {
            if wanted[j] && !self.factor.push(j, gram_column(&mut self.columns, dataset, j)) {
                return false;
            }
        }
        true
    }
}

/// Lower-triangular `L` with `L L^T` the Gram matrix of `order`, stored by rows.
#[derive(Debug, Clone, Default)]
struct Factor {
    order: Vec<usize>,
    rows: Vec<Vec<f64>>,
}

impl Factor {
    fn push(&mut self, j: usize, gram_col: &[f64]) -> bool {
        let mut row: Vec<f64> = self.order.iter().map(|&i| gram_col[i]).collect();
        for i in 0..row.len() {
            let li = &self.rows[i];
            row[i] = (row[i] - dot(&li[..i], &row[..i])) / li[i];
        }
        let d2 = gram_col[j] - norm_sq(&row);
        if !(d2 > 1e-10 * gram_col[j]) {
            return false;
        }
        row.push(d2.sqrt());
        self.order.push(j);
        self.rows.push(row);
        true
    }

    /// Deletes position `pos`, restoring triangularity with Givens rotations.
    fn remove(&mut self, pos: usize) {
        self.order.remove(pos);
        self.rows.remove(pos);
        for c in pos..self.rows.len() {
            let (x, y) = (self.rows[c][c], self.rows[c][c + 1]);
            let h = x.hypot(y);
            let (cs, sn) = (x / h, y / h);
            for row in &mut self.rows[c..] {
                let (u, v) = (row[c], row[c + 1]);
                row[c] = cs * u + sn * v;
                row[c + 1] = cs * v - sn * u;
            }
            self.rows[c].truncate(c + 1);
        }
    }

    /// Solves `L L^T z = b` in place.
    fn solve(&self, b: &mut [f64]) {
        for i in 0..b.len() {
            let li = &self.rows[i];
            b[i] = (b[i] - dot(&li[..i], &b[..i])) / li[i];
        }
        for i in (0..b.len()).rev() {
            let li = &self.rows[i];
            b[i] /= li[i];
            let bi = b[i];
            for (bm, &l) in b[..i].iter_mut().zip(&li[..i]) {
                *bm -= l * bi;
            }
        }
    }
}

/// [`solve_to_gap`] sharing Gram columns with earlier solves on `dataset`.
pub fn solve_to_gap_cached<X: Design>(
    dataset: &Dataset<X>,
    warm_start: &Coefficients,
    r: f64,
    gap_bound: f64,
    options: &SolverOptions,
    cache: &mut GramCache,
) -> Result<Solution> {
    check_dims(dataset, Some(warm_start.len()), None)?;
    check_r(r)?;
    if !(gap_bound > 0.0) {
        return Err(Error::InvalidParameter(format!("gap bound must be positive, got {gap_bound}")));
    }
    if !(options.initial_step > 0.0 && options.initial_step.is_finite()) {
        return Err(Error::InvalidParameter("initial step size must be positive".into()));
    }
    let y = dataset.y();
    let mut l = options.initial_step;
    let mut xb = vec![0.0; dataset.n()];
    dataset.x().matvec(&warm_start.0, &mut xb);
    let mut current = Iterate::new(dataset, warm_start.0.clone(), xb);
    // FISTA state
    let mut previous: Option<Iterate> = None;
    let mut t = 1.0f64;
    let mut momentum = 0.0f64;

    let mut gaps = Vec::new();
    let mut best: Option<(f64, Vec<f64>, DualPoint)> = None;
    let mut iterations = 0;
    loop {
        let (gap, nu) = current.certify(y, r);
        gaps.push(gap);
        if gap <= gap_bound {
            return Ok(Solution {
                beta: Coefficients(current.beta),
                nu,
                trace: SolveTrace {
                    iterations,
                    final_gap: gap,
                    final_step_size: l,
                    gaps,
                },
            });
        }
        if best.as_ref().map_or(true, |(g, _, _)| gap < *g) {
            best = Some((gap, current.beta.clone(), nu));
        }
        if iterations == options.max_iters {
            break;
        }
        iterations += 1;

        if let Some(every) = options.polish_every {
            if (iterations - 1) % every.max(1) == 0 {
                if let Some(better) = polish(dataset, &current, r, cache) {
                    current = better;
                    previous = None;
                    t = 1.0;
                    momentum = 0.0;
                }
            }
        }

        let (next, restart) = match (&previous, options.accelerated && momentum > 0.0) {
            (Some(prev), true) => {
                let extrapolate = |a: &[f64], b: &[f64]| -> Vec<f64> {
                    a.iter().zip(b).map(|(x, z)| x + momentum * (x - z)).collect()
                };
                // every cached quantity is affine in beta
                let point = extrapolate(&current.beta, &prev.beta);
                let xb = extrapolate(&current.xb, &prev.xb);
                let xtd = extrapolate(&current.xtd, &prev.xtd);
                let fit = residual_sq(y, &xb);
                let anchor = Anchor {
                    point: &point,
                    xtd: &xtd,
                    fit,
                };
                let next = backtracking_step(dataset, &anchor, r, &mut l);
                // gradient-mapping restart: momentum points uphill
                let uphill: f64 = point
                    .iter()
                    .zip(&next.beta)
                    .zip(&current.beta)
                    .map(|((a, b), c)| (a - b) * (b - c))
                    .sum();
                (next, uphill > 0.0)
            }
            _ => {
                let anchor = Anchor {
                    point: &current.beta,
                    xtd: &current.xtd,
                    fit: current.fit,
                };
                (backtracking_step(dataset, &anchor, r, &mut l), false)
            }
        };
        if options.accelerated {
            if restart {
                t = 1.0;
                momentum = 0.0;
            } else {
                let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
                momentum = (t - 1.0) / t_next;
                t = t_next;
            }
        }
        previous = Some(std::mem::replace(&mut current, next));
    }
    let (gap, beta, nu) = best.expect("at least one gap check precedes the limit");
    Err(Error::MaxItersExceeded(Box::new(Solution {
        beta: Coefficients(beta),
        nu,
        trace: SolveTrace {
            iterations,
            final_gap: gap,
            final_step_size: l,
            gaps,
        },
    })))
}

/// Active-set refinement; `None` when the support is empty, too large, or its
/// Gram matrix is numerically singular, or when nothing lowers the objective.
///
/// On the current support with its signs fixed the objective is a quadratic.
/// Its minimizer is approached along a segment that stops at the first sign
/// change; the coordinate that hit zero is dropped and the solve repeats on the
/// smaller support, so every accepted move lowers the objective.
fn polish<X: Design>(dataset: &Dataset<X>, current: &Iterate, r: f64, cache: &mut GramCache) -> Option<Iterate> {
    const MAX_DROPS: usize = 16;
    let n = dataset.n();
    let active: Vec<usize> = (0..current.beta.len()).filter(|&j| current.beta[j] != 0.0).collect();
    if active.is_empty() || active.len() >= n {
        return None;
    }
    if !cache.sync_factor(dataset, &active) {
        return None;
    }
    let xty = cache.xty.get_or_insert_with(|| dataset.xty());
    let factor = &mut cache.factor;
    let mut beta = current.beta.clone();
    for _ in 0..MAX_DROPS {
        let mut z: Vec<f64> = factor
            .order
            .iter()
            .map(|&j| xty[j] - 0.5 * r * current.beta[j].signum())
            .collect();
        factor.solve(&mut z);
        let mut step = 1.0f64;
        let mut crossing = None;
        for (pos, &j) in factor.order.iter().enumerate() {
            if z[pos] * current.beta[j] <= 0.0 {
                let s = beta[j] / (beta[j] - z[pos]);
                if s < step {
                    step = s;
                    crossing = Some(pos);
                }
            }
        }
        for (pos, &j) in factor.order.iter().enumerate() {
            beta[j] += step * (z[pos] - beta[j]);
        }
        match crossing {
            Some(pos) => {
                beta[factor.order[pos]] = 0.0;
                factor.remove(pos);
                if factor.order.is_empty() {
                    break;
                }
            }
            None => break,
        }
    }
    let mut xb = vec![0.0; n];
    dataset.x().matvec(&beta, &mut xb);
    let candidate = Iterate::new(dataset, beta, xb);
    (candidate.objective(r) < current.objective(r)).then_some(candidate)
}

/// High-accuracy Lasso solve from zero, used as ground truth.
pub fn reference_lasso<X: Design>(dataset: &Dataset<X>, r: f64, tol: f64) -> Result<Coefficients> {
    let options = SolverOptions {
        max_iters: 1_000_000,
        initial_step: 1.0,
        accelerated: true,
        polish_every: None,
    };
    solve_to_gap(dataset, &Coefficients::zeros(dataset.p()), r, tol, &options).map(|s| s.beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::DenseMatrix;

    /// X = (1, -1)^T, Y = (3, -1).
    fn two_by_one() -> Dataset {
        let x = DenseMatrix::from_columns(&[vec![1.0, -1.0]]).unwrap();
        Dataset::from_standardized(x, vec![3.0, -1.0]).unwrap()
    }

    #[test]
    fn objective_examples() {
        let ds = two_by_one();
        assert_eq!(objective_value(&ds, &Coefficients(vec![1.0]), 4.0).unwrap(), 8.0);
        let zero = Coefficients::zeros(1);
        assert_eq!(objective_value(&ds, &zero, 4.0).unwrap(), 10.0);
        assert_eq!(objective_value(&ds, &zero, 8.0).unwrap(), 10.0);
        assert!(matches!(
            objective_value(&ds, &Coefficients::zeros(2), 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn dual_value_examples() {
        let ds = two_by_one();
        let r = 8.0;
        let at_center = DualPoint(ds.y().iter().map(|v| -2.0 * v / r).collect());
        assert_eq!(dual_value(&ds, &at_center, r).unwrap(), 10.0);
        assert_eq!(dual_value(&ds, &DualPoint(vec![0.0, 0.0]), r).unwrap(), 0.0);
        assert_eq!(dual_value(&ds, &DualPoint(vec![-0.75, 0.25]), r).unwrap(), 10.0);
    }

    #[test]
    fn dual_point_examples() {
        let ds = two_by_one();
        let zero = Coefficients::zeros(1);
        let nu = dual_feasible_point(&ds, &zero, 8.0).unwrap();
        assert_eq!(nu.0, vec![-0.75, 0.25]);
        assert_eq!(nu.constraint_value(ds.x()), 1.0);
        let nu = dual_feasible_point(&ds, &zero, 16.0).unwrap();
        assert_eq!(nu.0, vec![-0.375, 0.125]);
    }

    #[test]
    fn dual_point_guards() {
        // exact fit: column (1,-1), Y = (2,-2), beta = 2
        let x = DenseMatrix::from_columns(&[vec![1.0, -1.0]]).unwrap();
        let ds = Dataset::from_standardized(x, vec![2.0, -2.0]).unwrap();
        let err = dual_feasible_point(&ds, &Coefficients(vec![2.0]), 1.0).unwrap_err();
        assert!(matches!(err, Error::ZeroResidual));
        // residual (1,1) is orthogonal to the column
        let x = DenseMatrix::from_columns(&[vec![1.0, -1.0]]).unwrap();
        let ds = Dataset::from_standardized(x, vec![1.0, 1.0]).unwrap();
        let err = dual_feasible_point(&ds, &Coefficients::zeros(1), 1.0).unwrap_err();
        assert!(matches!(err, Error::ZeroCorrelation));
    }

    #[test]
    fn gap_is_zero_at_r_max_from_zero() {
        let ds = two_by_one();
        let zero = Coefficients::zeros(1);
        let nu = dual_feasible_point(&ds, &zero, 8.0).unwrap();
        assert_eq!(duality_gap(&ds, &zero, &nu, 8.0).unwrap(), 0.0);
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(&[2.0, -3.0, 0.5], 1.0), vec![1.0, -2.0, 0.0]);
        let a = [0.3, -7.5, 0.0, 2.0];
        assert_eq!(soft_threshold(&a, 0.0), a.to_vec());
        assert_eq!(soft_threshold(&a, 7.5), vec![0.0; 4]);
    }

    #[test]
    fn prox_step_examples() {
        let ds = two_by_one();
        let zero = Coefficients::zeros(1);
        assert_eq!(prox_gradient_step(&ds, &zero, 4.0, 2.0).unwrap().0, vec![2.0]);
        // r >= r_max keeps zero fixed for any L
        for l in [0.5, 2.0, 40.0] {
            assert_eq!(prox_gradient_step(&ds, &zero, 8.0, l).unwrap().0, vec![0.0]);
        }
        // closed-form solution at r = 4 is 1 and is a fixed point at L = 2n
        let fixed = prox_gradient_step(&ds, &Coefficients(vec![1.0]), 4.0, 4.0).unwrap();
        assert_eq!(fixed.0, vec![1.0]);
        assert!(prox_gradient_step(&ds, &zero, 4.0, 0.0).is_err());
    }

    #[test]
    fn solve_from_zero_at_r_max_takes_no_iterations() {
        let ds = two_by_one();
        let sol = solve_to_gap(&ds, &Coefficients::zeros(1), 8.0, 1e-12, &SolverOptions::default()).unwrap();
        assert_eq!(sol.trace.iterations, 0);
        assert_eq!(sol.trace.final_gap, 0.0);
        assert_eq!(sol.beta.0, vec![0.0]);
    }

    #[test]
    fn huge_bound_returns_warm_start() {
        let ds = two_by_one();
        let warm = Coefficients(vec![0.37]);
        let sol = solve_to_gap(&ds, &warm, 4.0, 1e300, &SolverOptions::default()).unwrap();
        assert_eq!(sol.trace.iterations, 0);
        assert_eq!(sol.beta, warm);
    }

    #[test]
    fn reference_on_two_by_one() {
        let ds = two_by_one();
        let beta = reference_lasso(&ds, 4.0, 1e-14).unwrap();
        assert!((beta.0[0] - 1.0).abs() < 1e-6);
        assert_eq!(reference_lasso(&ds, 8.0, 1e-12).unwrap().0, vec![0.0]);
        assert_eq!(reference_lasso(&ds, 20.0, 1e-12).unwrap().0, vec![0.0]);
    }

    #[test]
    fn iteration_limit_reports_best_iterate() {
        let ds = two_by_one();
        let opts = SolverOptions {
            max_iters: 1,
            // L = 8 > 2n, so one step does not land on the solution
            initial_step: 8.0,
            ..SolverOptions::default()
        };
        let err = solve_to_gap(&ds, &Coefficients::zeros(1), 4.0, 1e-300, &opts).unwrap_err();
        let Error::MaxItersExceeded(sol) = err else {
            panic!("expected MaxItersExceeded");
        };
        assert_eq!(sol.trace.iterations, 1);
        assert_eq!(sol.trace.gaps.len(), 2);
        assert_eq!(sol.trace.final_gap, sol.trace.gaps.iter().cloned().fold(f64::INFINITY, f64::min));
    }

    #[test]
    fn invalid_arguments() {
        let ds = two_by_one();
        let zero = Coefficients::zeros(1);
        let opts = SolverOptions::default();
        assert!(solve_to_gap(&ds, &zero, 0.0, 1.0, &opts).is_err());
        assert!(solve_to_gap(&ds, &zero, 1.0, 0.0, &opts).is_err());
        assert!(dual_value(&ds, &DualPoint(vec![0.0]), 1.0).is_err());
    }

    #[test]
    fn factor_updates_match_direct_solve() {
        // Gram of columns (1,0,0,1), (1,1,0,0), (0,1,1,0), (0,0,1,1)+(1,0,0,0)
        let x = DenseMatrix::from_columns(&[
            vec![1.0, 0.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0, 0.0],
            vec![0.0, 1.0, 1.0, 0.0],
            vec![1.0, 0.0, 1.0, 1.0],
        ])
        .unwrap();
        let gram: Vec<Vec<f64>> = (0..4)
            .map(|j| (0..4).map(|i| dot(x.column(i), x.column(j))).collect())
            .collect();
        let mut f = Factor::default();
        for j in [2, 0, 3, 1] {
            assert!(f.push(j, &gram[j]));
        }
        f.remove(1);
        f.remove(0);
        assert_eq!(f.order, vec![3, 1]);
        // G_{31} system with rhs chosen so z = (1, -2)
        let mut b = vec![gram[3][3] - 2.0 * gram[3][1], gram[1][3] - 2.0 * gram[1][1]];
        f.solve(&mut b);
        assert!((b[0] - 1.0).abs() < 1e-12 && (b[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn polished_path_matches_plain_solver() {
        let x = DenseMatrix::from_rows(&[
            vec![1.2, -0.3, 0.5],
            vec![-0.7, 1.1, 0.2],
            vec![0.4, 0.9, -1.3],
            vec![-0.9, -1.7, 0.6],
        ])
        .unwrap();
        let ds = Dataset::from_parts_unchecked(x, vec![1.0, -2.0, 0.5, 0.5]);
        let plain = reference_lasso(&ds, 0.8, 1e-12).unwrap();
        let opts = SolverOptions {
            accelerated: true,
            polish_every: Some(1),
            ..SolverOptions::default()
        };
        let sol = solve_to_gap(&ds, &Coefficients::zeros(3), 0.8, 1e-12, &opts).unwrap();
        assert!(sol.beta.sup_distance(&plain) < 1e-5);
    }
}
