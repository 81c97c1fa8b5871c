use fos_core::{gap_bound, Coefficients, Dataset, ModelConstants, TuningGrid};

use super::soft;

/// The grid walk replayed on an orthogonal design using only `z = X^T Y`,
/// `||Y||^2` and `X^T X = n I`; no matrix products.
pub struct Oracle {
    n: f64,
    z: Vec<f64>,
    yy: f64,
}

#[derive(Debug, PartialEq)]
pub struct Trace {
    pub stats_it: usize,
    pub gap_checks: Vec<usize>,
    pub outcomes: Vec<bool>,
    pub r_tilde_index: usize,
    pub support: Vec<usize>,
}

impl Oracle {
    pub fn new(ds: &Dataset) -> Self {
        Oracle {
            n: ds.n() as f64,
            z: ds.xty(),
            yy: ds.y().iter().map(|v| v * v).sum(),
        }
    }

    fn fit(&self, beta: &[f64]) -> f64 {
        let bz: f64 = beta.iter().zip(&self.z).map(|(b, z)| b * z).sum();
        let bb: f64 = beta.iter().map(|b| b * b).sum();
        self.yy - 2.0 * bz + self.n * bb
    }

    fn xtd(&self, beta: &[f64]) -> Vec<f64> {
        beta.iter().zip(&self.z).map(|(b, z)| self.n * b - z).collect()
    }

    fn gap(&self, beta: &[f64], r: f64) -> f64 {
        let fit = self.fit(beta);
        let l1: f64 = beta.iter().map(|b| b.abs()).sum();
        if fit == 0.0 {
            return fit + r * l1;
        }
        let xtd = self.xtd(beta);
        let bz: f64 = beta.iter().zip(&self.z).map(|(b, z)| b * z).sum();
        let unconstrained = -(bz - self.yy) / fit;
        let corr = 2.0 * xtd.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let s = if corr == 0.0 {
            unconstrained
        } else {
            unconstrained.clamp(-r / corr, r / corr)
        };
        let bx: f64 = beta.iter().zip(&xtd).map(|(b, g)| b * g).sum();
        ((1.0 - s) * (1.0 - s) * fit + r * l1 + 2.0 * s * bx).max(0.0)
    }

    fn step(&self, beta: &[f64], r: f64, l: &mut f64) -> Vec<f64> {
        let xtd = self.xtd(beta);
        let fit = self.fit(beta);
        loop {
            let point: Vec<f64> = beta.iter().zip(&xtd).map(|(b, g)| b - 2.0 / *l * g).collect();
            let theta = soft(&point, r / *l);
            let lin: f64 = theta.iter().zip(beta).zip(&xtd).map(|((t, b), g)| g * (t - b)).sum();
            let quad: f64 = theta.iter().zip(beta).map(|(t, b)| (t - b) * (t - b)).sum();
            let bound = fit + 2.0 * lin + 0.5 * *l * quad;
            if quad == 0.0 || self.fit(&theta) <= bound + 1e-12 * fit.abs().max(1.0) {
                return theta;
            }
            *l *= 2.0;
        }
    }

    pub fn run(&self, grid: &TuningGrid, k: &ModelConstants) -> Trace {
        let n = self.n as usize;
        let mut betas = vec![Coefficients::zeros(self.z.len())];
        let mut l = 1.0;
        let mut stats_it = 1;
        let mut cont = true;
        let mut gap_checks = Vec::new();
        let mut outcomes = Vec::new();
        while cont && stats_it < grid.len() {
            stats_it += 1;
            let r = grid.get(stats_it - 1);
            let bound = gap_bound(k, r, n);
            let mut beta = betas[stats_it - 2].0.clone();
            let mut checks = 1;
            while self.gap(&beta, r) > bound {
                beta = self.step(&beta, r, &mut l);
                checks += 1;
            }
            gap_checks.push(checks);
            betas.push(Coefficients(beta));
            // the product of indicators, written out
            let current = &betas[stats_it - 1];
            let limit = k.c / n as f64;
            cont = (1..=stats_it).all(|j| {
                current.sup_distance(&betas[j - 1]) / (r + grid.get(j - 1)) <= limit
            });
            outcomes.push(cont);
        }
        let r_tilde_index = if cont { grid.len() } else { stats_it - 1 };
        let r_tilde = grid.get(r_tilde_index - 1);
        let cutoff = 6.0 * k.c * r_tilde / n as f64;
        let support = betas[r_tilde_index - 1]
            .0
            .iter()
            .enumerate()
            .filter(|(_, b)| b.abs() >= cutoff)
            .map(|(j, _)| j + 1)
            .collect();
        Trace {
            stats_it,
            gap_checks,
            outcomes,
            r_tilde_index,
            support,
        }
    }
}

pub fn fos_trace(ds: &Dataset, grid: &TuningGrid, k: &ModelConstants) -> Trace {
    let report = fos_core::fos_run(ds, grid, k, 100_000).unwrap();
    Trace {
        stats_it: report.stats_it(),
        gap_checks: report.per_grid.iter().map(|s| s.trace.gaps.len()).collect(),
        outcomes: report.per_grid.iter().map(|s| s.test_passed.unwrap()).collect(),
        r_tilde_index: report.r_tilde_index,
        support: report.support,
    }
}
