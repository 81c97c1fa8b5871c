#![allow(dead_code)]

pub mod oracle;

use fos_core::{solve_to_gap, Coefficients, Dataset, DenseMatrix, Error, Solution, SolverOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normals(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

/// `n x p` design with centered, mutually orthogonal columns of squared norm
/// `n`, so `X^T X = n I`. Needs `p < n`.
pub fn orthogonal_design(n: usize, p: usize, seed: u64) -> DenseMatrix {
    assert!(p < n);
    let mut rng = rng(seed);
    let ones = vec![1.0 / (n as f64).sqrt(); n];
    let mut basis: Vec<Vec<f64>> = vec![ones];
    while basis.len() < p + 1 {
        let mut v = normals(&mut rng, n);
        // reorthogonalize once
        for _ in 0..2 {
            for b in &basis {
                let proj: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    let scale = (n as f64).sqrt();
    let cols: Vec<Vec<f64>> = basis[1..]
        .iter()
        .map(|b| b.iter().map(|x| x * scale).collect())
        .collect();
    DenseMatrix::from_columns(&cols).unwrap()
}

/// Orthogonal design with `Y = X beta + sigma * noise`.
pub fn orthogonal_dataset(n: usize, beta: &[f64], sigma: f64, seed: u64) -> Dataset {
    let x = orthogonal_design(n, beta.len(), seed);
    let mut y = vec![0.0; n];
    for (j, &b) in beta.iter().enumerate() {
        y.iter_mut().zip(x.column(j)).for_each(|(yi, xi)| *yi += b * xi);
    }
    let noise = normals(&mut rng(seed ^ 0x5eed), n);
    y.iter_mut().zip(noise).for_each(|(yi, e)| *yi += sigma * e);
    Dataset::from_standardized(x, y).unwrap()
}

/// Random standardized Gaussian dataset with a sparse signal plus noise.
pub fn random_dataset(n: usize, p: usize, seed: u64) -> Dataset {
    let mut rng = rng(seed);
    let raw = DenseMatrix::from_column_major(n, p, normals(&mut rng, n * p)).unwrap();
    let noise = normals(&mut rng, n);
    let mut y = noise;
    for j in 0..p.min(3) {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        y.iter_mut().zip(raw.column(j)).for_each(|(yi, xi)| *yi += sign * 1.5 * xi);
    }
    fos_core::standardize_design(&raw, &y).unwrap()
}

/// `T_b(a)` elementwise.
pub fn soft(a: &[f64], b: f64) -> Vec<f64> {
    a.iter()
        .map(|&v| if v > b { v - b } else if v < -b { v + b } else { 0.0 })
        .collect()
}

pub fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// `solve_to_gap` from zero, keeping the last iterate if the iteration cap hits.
pub fn solve_from_zero(ds: &Dataset, r: f64, bound: f64, options: &SolverOptions) -> Solution {
    match solve_to_gap(ds, &Coefficients::zeros(ds.p()), r, bound, options) {
        Ok(sol) => sol,
        Err(Error::MaxItersExceeded(sol)) => *sol,
        Err(e) => panic!("solve failed: {e}"),
    }
}
