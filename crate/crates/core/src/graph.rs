//! Neighborhood selection: regress every node on all others, then join the
//! per-node supports into an undirected graph.

use std::collections::BTreeSet;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{cv_select, CvConfig};
use crate::design::DenseMatrix;
use crate::error::{Error, Result};
use crate::model::{build_grid, standardize_design, ModelConstants, DEFAULT_GRID_RATIO, DEFAULT_GRID_SIZE};
use crate::selector::{fos_run_with, FosOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NeighborhoodMethod {
    #[serde(rename = "fos")]
    Fos,
    #[serde(rename = "lasso_cv")]
    LassoCv,
}

impl FromStr for NeighborhoodMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fos" => Ok(NeighborhoodMethod::Fos),
            "lasso_cv" | "lassocv" | "cv" => Ok(NeighborhoodMethod::LassoCv),
            other => Err(Error::UnknownMethod(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CombineRule {
    #[default]
    #[serde(rename = "or")]
    Or,
    #[serde(rename = "and")]
    And,
}

impl FromStr for CombineRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "or" => Ok(CombineRule::Or),
            "and" => Ok(CombineRule::And),
            other => Err(Error::InvalidParameter(format!("unknown combine rule `{other}`"))),
        }
    }
}

/// Undirected graph on nodes `1..=p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEstimate {
    pub p: usize,
    /// Unordered pairs stored as `(i, j)` with `i < j`, 1-based.
    pub edges: BTreeSet<(usize, usize)>,
    /// Selected neighbors of each node, 1-based labels.
    pub per_node_supports: Vec<Vec<usize>>,
}

impl GraphEstimate {
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.p];
        for &(i, j) in &self.edges {
            deg[i - 1] += 1;
            deg[j - 1] += 1;
        }
        deg
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphConfig {
    pub method: NeighborhoodMethod,
    pub constants: ModelConstants,
    pub grid_size: usize,
    pub grid_ratio: f64,
    pub fos: FosOptions,
    pub folds: usize,
    pub seed: u64,
    /// Run nodes on the current rayon pool.
    pub parallel: bool,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            method: NeighborhoodMethod::Fos,
            constants: ModelConstants::default(),
            grid_size: DEFAULT_GRID_SIZE,
            grid_ratio: DEFAULT_GRID_RATIO,
            fos: FosOptions::default(),
            folds: 10,
            seed: 0,
            parallel: false,
        }
    }
}

pub fn neighborhood_regressions(
    data: &DenseMatrix,
    method: NeighborhoodMethod,
    constants: &ModelConstants,
) -> Result<Vec<Vec<usize>>> {
    let config = GraphConfig {
        method,
        constants: *constants,
        ..GraphConfig::default()
    };
    neighborhood_regressions_with(data, &config)
}

/// Selected neighbors of every node. Node `j`'s predictors are the other
/// columns, standardized; its response is column `j`, centered only. Each node
/// gets its own grid. Errors carry the 1-based node label.
pub fn neighborhood_regressions_with(data: &DenseMatrix, config: &GraphConfig) -> Result<Vec<Vec<usize>>> {
    let p = data.ncols();
    if p < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 nodes, got {p}")));
    }
    let node = |j: usize| node_support(data, j, config).map_err(|e| Error::Node { node: j + 1, source: Box::new(e) });
    if config.parallel {
        (0..p).into_par_iter().map(node).collect()
    } else {
        (0..p).map(node).collect()
    }
}

fn node_support(data: &DenseMatrix, j: usize, config: &GraphConfig) -> Result<Vec<usize>> {
    let others: Vec<usize> = (0..data.ncols()).filter(|&k| k != j).collect();
    let column = data.column(j);
    let mean = column.iter().sum::<f64>() / column.len() as f64;
    let y: Vec<f64> = column.iter().map(|v| v - mean).collect();
    let dataset = standardize_design(&data.select_columns(&others), &y).map_err(|e| match e {
        Error::ConstantColumn { column } => Error::ConstantColumn {
            column: others[column - 1] + 1,
        },
        e => e,
    })?;
    let grid = build_grid(&dataset, config.grid_size, config.grid_ratio)?;
    let report = match config.method {
        NeighborhoodMethod::Fos => fos_run_with(&dataset, &grid, &config.constants, &config.fos)?,
        NeighborhoodMethod::LassoCv => {
            let cv = CvConfig {
                folds: config.folds,
                seed: config.seed.wrapping_add(j as u64),
                ..CvConfig::for_dataset(&dataset)
            };
            cv_select(&dataset, &grid, &cv)?
        }
    };
    Ok(report.support.iter().map(|&k| others[k - 1] + 1).collect())
}

/// Edge `{i, j}` iff `j` is in support `i` or `i` is in support `j`.
pub fn combine_or_rule(per_node_supports: &[Vec<usize>]) -> GraphEstimate {
    combine(per_node_supports, CombineRule::Or)
}

/// Joins per-node supports (1-based labels). Self-references and labels
/// outside `1..=p` are ignored.
pub fn combine(per_node_supports: &[Vec<usize>], rule: CombineRule) -> GraphEstimate {
    let p = per_node_supports.len();
    let mut directed = BTreeSet::new();
    for (i, support) in per_node_supports.iter().enumerate() {
        for &j in support {
            if j >= 1 && j <= p && j != i + 1 {
                directed.insert((i + 1, j));
            }
        }
    }
    let edges = directed
        .iter()
        .filter(|&&(i, j)| match rule {
            CombineRule::Or => true,
            CombineRule::And => directed.contains(&(j, i)),
        })
        .map(|&(i, j)| (i.min(j), i.max(j)))
        .collect();
    GraphEstimate {
        p,
        edges,
        per_node_supports: per_node_supports.to_vec(),
    }
}

/// Falsely included plus falsely omitted edges.
pub fn edge_hamming(estimate: &BTreeSet<(usize, usize)>, truth: &BTreeSet<(usize, usize)>) -> usize {
    estimate.symmetric_difference(truth).count()
}
