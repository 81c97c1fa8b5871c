//! Standardized datasets, model constants and the tuning-parameter grid.

use serde::{Deserialize, Serialize};

use crate::design::{norm_inf, norm_sq, Design, DenseMatrix};
use crate::error::{Error, Result};

/// Column sums must vanish to within `n * SUM_TOL`.
pub const SUM_TOL: f64 = 1e-10;
/// Column sums of squares must equal `n` to within `n * SUM_SQ_TOL`.
pub const SUM_SQ_TOL: f64 = 1e-8;

/// Response plus a design whose columns satisfy `sum_i X_ij = 0` and
/// `sum_i X_ij^2 = n`.
#[derive(Debug, Clone)]
pub struct Dataset<X: Design = DenseMatrix> {
    x: X,
    y: Vec<f64>,
}

impl<X: Design> Dataset<X> {
    /// Wraps a design that the caller guarantees is standardized.
    pub(crate) fn from_parts_unchecked(x: X, y: Vec<f64>) -> Self {
        debug_assert_eq!(x.n_samples(), y.len());
        Dataset { x, y }
    }

    pub fn x(&self) -> &X {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.n_features()
    }

    /// `X^T Y`.
    pub fn xty(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.p()];
        self.x.rmatvec(&self.y, &mut out);
        out
    }

    /// Smallest tuning parameter whose Lasso solution is zero, `2 ||X^T Y||_inf`.
    pub fn r_max(&self) -> f64 {
        2.0 * norm_inf(&self.xty())
    }
}

impl Dataset<DenseMatrix> {
    /// Accepts an already standardized design after checking the column invariants.
    pub fn from_standardized(x: DenseMatrix, y: Vec<f64>) -> Result<Self> {
        check_shape(&x, &y)?;
        let n = x.nrows() as f64;
        for (j, col) in x.columns().enumerate() {
            let sum: f64 = col.iter().sum();
            let sum_sq: f64 = col.iter().map(|v| v * v).sum();
            if sum.abs() > n * SUM_TOL || (sum_sq - n).abs() > n * SUM_SQ_TOL {
                return Err(Error::NotStandardized {
                    column: j + 1,
                    sum,
                    sum_sq,
                });
            }
        }
        Ok(Dataset { x, y })
    }

    /// Restricts to a subset of samples and re-standardizes the columns.
    pub fn subsample(&self, rows: &[usize]) -> Result<Self> {
        let y = rows.iter().map(|&i| self.y[i]).collect::<Vec<_>>();
        standardize_design(&self.x.select_rows(rows), &y)
    }
}

fn check_shape(x: &DenseMatrix, y: &[f64]) -> Result<()> {
    check_response(x.nrows(), x.ncols(), y)?;
    if !x.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    Ok(())
}

/// Shape and finiteness checks shared by the dense and sparse constructors.
pub(crate) fn check_response(n: usize, p: usize, y: &[f64]) -> Result<()> {
    if n != y.len() {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: y.len(),
        });
    }
    if n < 2 {
        return Err(Error::TooFewSamples { n, required: 2 });
    }
    if p == 0 {
        return Err(Error::InvalidParameter("design has no columns".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    Ok(())
}

/// Mean and population scale `sqrt(sum (x - mean)^2 / n)` of one column.
///
/// Returns `None` for a column without spread.
pub(crate) fn column_location_scale(col: &[f64]) -> Option<(f64, f64)> {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
    let magnitude = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if ss <= n * (f64::EPSILON * magnitude).powi(2) || ss == 0.0 {
        return None;
    }
    Some((mean, (ss / n).sqrt()))
}

/// Centers every column and rescales it so that its sum of squares equals `n`.
/// The response is passed through unchanged.
pub fn standardize_design(x_raw: &DenseMatrix, y_raw: &[f64]) -> Result<Dataset> {
    check_shape(x_raw, y_raw)?;
    let mut x = x_raw.clone();
    for j in 0..x.ncols() {
        let col = x.column_mut(j);
        let (mean, scale) =
            column_location_scale(col).ok_or(Error::ConstantColumn { column: j + 1 })?;
        for v in col.iter_mut() {
            *v = (*v - mean) / scale;
        }
    }
    Ok(Dataset {
        x,
        y: y_raw.to_vec(),
    })
}

/// Constants of the sup-norm bound (`c`) and the restricted eigenvalue
/// condition (`cap_c`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants {
    pub c: f64,
    pub cap_c: f64,
}

impl Default for ModelConstants {
    fn default() -> Self {
        ModelConstants { c: 0.75, cap_c: 1.0 }
    }
}

impl ModelConstants {
    pub fn new(c: f64, cap_c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) || !(cap_c > 0.0 && cap_c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "constants must be positive and finite (c = {c}, C = {cap_c})"
            )));
        }
        Ok(ModelConstants { c, cap_c })
    }
}

pub const DEFAULT_GRID_SIZE: usize = 100;
pub const DEFAULT_GRID_RATIO: f64 = 1000.0;

/// Geometric grid `r_1 = r_max > ... > r_M = r_max / u`.
///
/// Indices are zero-based; reports label grid point `k` as `r_{k+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningGrid {
    values: Vec<f64>,
    u: f64,
}

impl TuningGrid {
    pub fn from_r_max(r_max: f64, m: usize, u: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!("grid size must be >= 2, got {m}")));
        }
        if !(u > 1.0 && u.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid ratio must be > 1, got {u}")));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::DegenerateGrid { r_max });
        }
        let last = (m - 1) as f64;
        let mut values: Vec<f64> = (0..m)
            .map(|k| r_max * u.powf(-(k as f64) / last))
            .collect();
        values[0] = r_max;
        values[m - 1] = r_max / u;
        Ok(TuningGrid { values, u })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn r_max(&self) -> f64 {
        self.values[0]
    }

    pub fn r_min(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn ratio(&self) -> f64 {
        self.u
    }
}

/// Relative size of `||X^T Y||_inf` against its Cauchy-Schwarz ceiling
/// `sqrt(n) ||Y||` below which the response counts as orthogonal to the design.
pub const DEGENERATE_CORRELATION: f64 = 1e-12;

/// Grid of `m` values from `2 ||X^T Y||_inf` down to that value over `u`.
pub fn build_grid<X: Design>(dataset: &Dataset<X>, m: usize, u: f64) -> Result<TuningGrid> {
    let r_max = dataset.r_max();
    let ceiling = 2.0 * (dataset.n() as f64).sqrt() * norm_sq(dataset.y()).sqrt();
    if r_max <= DEGENERATE_CORRELATION * ceiling {
        return Err(Error::DegenerateGrid { r_max });
    }
    TuningGrid::from_r_max(r_max, m, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn col(v: &[f64]) -> DenseMatrix {
        DenseMatrix::from_columns(&[v.to_vec()]).unwrap()
    }

    #[test]
    fn standardizes_one_two_three() {
        let ds = standardize_design(&col(&[1.0, 2.0, 3.0]), &[0.0, 0.0, 1.0]).unwrap();
        let expected = 1.5f64.sqrt();
        let c = ds.x().column(0);
        assert!((c[0] + expected).abs() < 1e-15);
        assert!(c[1].abs() < 1e-15);
        assert!((c[2] - expected).abs() < 1e-15);
        assert_eq!(ds.y(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn standardized_column_is_left_alone() {
        let ds = standardize_design(&col(&[1.0, -1.0]), &[3.0, -1.0]).unwrap();
        assert_eq!(ds.x().column(0), &[1.0, -1.0]);
    }

    #[test]
    fn constant_column_is_an_error() {
        let x = DenseMatrix::from_columns(&[vec![1.0, 2.0, 4.0], vec![5.0, 5.0, 5.0]]).unwrap();
        let err = standardize_design(&x, &[1.0, 2.0, 3.0]).unwrap_err();
        assert!(matches!(err, Error::ConstantColumn { column: 2 }));
    }

    #[test]
    fn non_finite_and_shape_errors() {
        let err = standardize_design(&col(&[1.0, f64::NAN]), &[1.0, 2.0]).unwrap_err();
        assert!(matches!(err, Error::NonFiniteInput));
        let err = standardize_design(&col(&[1.0, 2.0]), &[1.0, f64::INFINITY]).unwrap_err();
        assert!(matches!(err, Error::NonFiniteInput));
        let err = standardize_design(&col(&[1.0]), &[1.0]).unwrap_err();
        assert!(matches!(err, Error::TooFewSamples { .. }));
        let err = standardize_design(&col(&[1.0, 2.0]), &[1.0]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn r_max_on_two_by_one() {
        let ds = Dataset::from_standardized(col(&[1.0, -1.0]), vec![3.0, -1.0]).unwrap();
        assert_eq!(ds.xty(), vec![4.0]);
        assert_eq!(ds.r_max(), 8.0);
    }

    #[test]
    fn three_point_grid() {
        let g = TuningGrid::from_r_max(8.0, 3, 1000.0).unwrap();
        assert_eq!(g.get(0), 8.0);
        assert!((g.get(1) - 8.0 / 1000f64.sqrt()).abs() < 1e-15);
        assert!((g.get(1) - 0.252_982_212_813_470_3).abs() < 1e-12);
        assert_eq!(g.get(2), 0.008);
    }

    #[test]
    fn orthogonal_response_gives_degenerate_grid() {
        let ds = Dataset::from_standardized(col(&[1.0, -1.0]), vec![1.0, 1.0]).unwrap();
        let err = build_grid(&ds, 10, 1000.0).unwrap_err();
        assert!(matches!(err, Error::DegenerateGrid { .. }));
    }

    #[test]
    fn grid_parameter_guards() {
        assert!(TuningGrid::from_r_max(1.0, 1, 10.0).is_err());
        assert!(TuningGrid::from_r_max(1.0, 5, 1.0).is_err());
        assert!(matches!(
            TuningGrid::from_r_max(f64::INFINITY, 5, 10.0),
            Err(Error::DegenerateGrid { .. })
        ));
    }

    #[test]
    fn from_standardized_rejects_raw_columns() {
        let err = Dataset::from_standardized(col(&[1.0, 2.0]), vec![0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NotStandardized { column: 1, .. }));
    }

    #[test]
    fn constants_validation() {
        assert_eq!(ModelConstants::default(), ModelConstants { c: 0.75, cap_c: 1.0 });
        assert!(ModelConstants::new(0.0, 1.0).is_err());
        assert!(ModelConstants::new(1.0, -1.0).is_err());
    }

    fn raw_matrix() -> impl Strategy<Value = (DenseMatrix, Vec<f64>)> {
        (2usize..12, 1usize..6).prop_flat_map(|(n, p)| {
            (
                proptest::collection::vec(-50.0f64..50.0, n * p),
                proptest::collection::vec(-5.0f64..5.0, n),
            )
                .prop_map(move |(data, y)| (DenseMatrix::from_column_major(n, p, data).unwrap(), y))
        })
    }

    proptest! {
        #[test]
        fn standardization_invariants_and_idempotence((x, y) in raw_matrix()) {
            let Ok(ds) = standardize_design(&x, &y) else { return Ok(()); };
            let n = ds.n() as f64;
            for c in ds.x().columns() {
                let s: f64 = c.iter().sum();
                let ss: f64 = c.iter().map(|v| v * v).sum();
                prop_assert!(s.abs() <= n * SUM_TOL);
                prop_assert!((ss - n).abs() <= n * SUM_SQ_TOL);
            }
            let again = standardize_design(ds.x(), ds.y()).unwrap();
            for (a, b) in again.x().as_column_major().iter().zip(ds.x().as_column_major()) {
                prop_assert!((a - b).abs() <= 1e-10);
            }
        }

        #[test]
        fn grid_is_geometric(r_max in 1e-3f64..1e4, m in 2usize..200, u in 1.5f64..1e4) {
            let g = TuningGrid::from_r_max(r_max, m, u).unwrap();
            prop_assert_eq!(g.len(), m);
            prop_assert_eq!(g.r_max(), r_max);
            prop_assert!((g.r_min() - r_max / u).abs() <= 1e-12 * r_max / u);
            let ratio = u.powf(1.0 / (m - 1) as f64);
            for w in g.values().windows(2) {
                prop_assert!(w[0] > w[1]);
                prop_assert!((w[0] / w[1] / ratio - 1.0).abs() <= 1e-12);
            }
        }
    }
}
