//! Feature selection for sparse linear regression.
//!
//! The [`selector`] module walks a geometric grid of Lasso tuning parameters
//! with warm starts, solves each point only as precisely as a duality-gap
//! bound proportional to `r^2` requires, stops the walk with a sup-norm
//! comparison test, and thresholds the selected estimate.

pub mod baselines;
pub mod design;
pub mod error;
pub mod graph;
pub mod io;
pub mod lasso;
pub mod model;
pub mod selector;
pub mod sparse;
pub mod synth;

pub use design::{Design, DenseMatrix};
pub use error::{Error, ErrorKind, Result};
pub use lasso::{
    dual_feasible_point, dual_value, duality_gap, objective_value, prox_gradient_step,
    reference_lasso, soft_threshold, solve_to_gap, solve_to_gap_cached, Coefficients, DualPoint,
    GramCache, Solution, SolveTrace, SolverOptions,
};
pub use model::{build_grid, standardize_design, Dataset, ModelConstants, TuningGrid};
pub use selector::{
    av_test, fos_run, fos_run_with, gap_bound, threshold_support, FosOptions, FosState, GridStep,
    SelectionReport,
};
pub use baselines::{cv_select, ic_select, CvConfig, IcConfig, InformationCriterion};
pub use synth::{
    gen_synthetic, hamming_distance, run_benchmark, BenchConfig, BenchResult, Method, SynthSpec,
};
pub use graph::{
    combine, combine_or_rule, edge_hamming, neighborhood_regressions, neighborhood_regressions_with,
    CombineRule, GraphConfig, GraphEstimate, NeighborhoodMethod,
};
pub use sparse::{standardize_sparse, SparseDesign, StandardizedSparse};
