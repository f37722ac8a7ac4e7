//! Dense linear programming with optimality certificates.
//!
//! [`solve`] runs a two-phase simplex method and returns primal and dual
//! solutions whose residuals have been recomputed from scratch by
//! [`check_certificates`]. [`enumerate_vertices`] is a brute-force oracle
//! over basic feasible solutions, used to cross-check the simplex on small
//! polyhedra.

mod certificate;
mod linalg;
mod simplex;
mod vertex;

use serde::{Deserialize, Serialize};

pub use certificate::{check_certificates, Residuals};
pub use simplex::solve_with;
pub use vertex::{
    enumerate_vertices, enumerate_vertices_with, EqualityPolytope, Polyhedron, VertexLimits,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=", alias = "le")]
    Le,
    #[serde(rename = ">=", alias = "ge")]
    Ge,
    #[serde(rename = "=", alias = "eq", alias = "==")]
    Eq,
}

/// One constraint row `a·x rel b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    #[serde(rename = "a")]
    pub coeffs: Vec<f64>,
    #[serde(rename = "rel")]
    pub relation: Relation,
    #[serde(rename = "b")]
    pub rhs: f64,
}

/// Variable bounds; `None` means unbounded on that side.
///
/// Serialized as a two-element array `[lower, upper]` with `null` for a
/// missing bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    from = "(Option<f64>, Option<f64>)",
    into = "(Option<f64>, Option<f64>)"
)]
pub struct VarBounds {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl VarBounds {
    pub const NONNEG: VarBounds = VarBounds {
        lower: Some(0.0),
        upper: None,
    };
    pub const FREE: VarBounds = VarBounds {
        lower: None,
        upper: None,
    };
}

impl Default for VarBounds {
    fn default() -> Self {
        VarBounds::NONNEG
    }
}

impl From<(Option<f64>, Option<f64>)> for VarBounds {
    fn from((lower, upper): (Option<f64>, Option<f64>)) -> Self {
        VarBounds { lower, upper }
    }
}

impl From<VarBounds> for (Option<f64>, Option<f64>) {
    fn from(b: VarBounds) -> Self {
        (b.lower, b.upper)
    }
}

/// A linear program `opt c·x` subject to rows and per-variable bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub sense: Sense,
    #[serde(rename = "c")]
    pub objective: Vec<f64>,
    #[serde(default)]
    pub rows: Vec<Row>,
    /// Defaults to `x ≥ 0` for every variable when absent.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bounds: Vec<VarBounds>,
}

impl LpProblem {
    /// All variables start nonnegative.
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            sense,
            objective,
            rows: Vec::new(),
            bounds: vec![VarBounds::NONNEG; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.rows.push(Row {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn set_bounds(&mut self, var: usize, lower: Option<f64>, upper: Option<f64>) -> &mut Self {
        self.ensure_bounds();
        self.bounds[var] = VarBounds { lower, upper };
        self
    }

    pub fn set_free(&mut self, var: usize) -> &mut Self {
        self.set_bounds(var, None, None)
    }

    /// Bounds of `var`, treating an empty bound list as all-nonnegative.
    pub fn bound(&self, var: usize) -> VarBounds {
        self.bounds.get(var).copied().unwrap_or_default()
    }

    fn ensure_bounds(&mut self) {
        if self.bounds.is_empty() {
            self.bounds = vec![VarBounds::NONNEG; self.objective.len()];
        }
    }

    /// Checks shapes and finiteness.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if let Some(j) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "objective coefficient {j} is not finite"
            )));
        }
        if !self.bounds.is_empty() && self.bounds.len() != n {
            return Err(Error::Dimension(format!(
                "{} bounds for {} variables",
                self.bounds.len(),
                n
            )));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(Error::Dimension(format!(
                    "row {i} has {} coefficients for {} variables",
                    row.coeffs.len(),
                    n
                )));
            }
            if row.coeffs.iter().any(|a| !a.is_finite()) || !row.rhs.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "row {i} has a non-finite entry"
                )));
            }
        }
        for (j, b) in self.bounds.iter().enumerate() {
            let bad = |v: Option<f64>| v.is_some_and(|x| !x.is_finite());
            if bad(b.lower) || bad(b.upper) {
                return Err(Error::InvalidInput(format!(
                    "bounds of variable {j} must be finite or null"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    pub pivots: usize,
    pub phase_one_iterations: usize,
    pub refactorizations: usize,
}

impl std::ops::AddAssign for SolveStats {
    fn add_assign(&mut self, rhs: Self) {
        self.pivots += rhs.pivots;
        self.phase_one_iterations += rhs.phase_one_iterations;
        self.refactorizations += rhs.refactorizations;
    }
}

/// Result of [`solve`].
///
/// Duals are shadow prices `∂(optimal value)/∂b_i`: for a maximization a
/// `≤` row has a nonnegative multiplier, for a minimization a `≥` row does.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: Option<f64>,
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    pub residuals: Option<Residuals>,
    /// Improving direction in the original variables when unbounded.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ray: Option<Vec<f64>>,
    pub stats: SolveStats,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Optimal value; panics unless the status is optimal.
    pub fn value(&self) -> f64 {
        self.objective.expect("LP solution has no optimal value")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Absolute tolerance on primal, dual and complementarity residuals.
    pub feas_tol: f64,
    /// Relative tolerance on the duality gap.
    pub gap_tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-9,
            gap_tol: 1e-7,
            max_iterations: 200_000,
        }
    }
}

/// Solves with default options.
pub fn solve(p: &LpProblem) -> Result<LpSolution> {
    solve_with(p, &SolverOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let txt = r#"{"sense": "max", "c": [1, 1],
                      "rows": [{"a": [1, 1], "rel": "<=", "b": 1}],
                      "bounds": [[0, null], [null, 3]]}"#;
        let p: LpProblem = serde_json::from_str(txt).unwrap();
        assert_eq!(
            p.bound(1),
            VarBounds {
                lower: None,
                upper: Some(3.0)
            }
        );
        let back: LpProblem = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn validation() {
        let mut p = LpProblem::new(Sense::Max, vec![1.0, 2.0]);
        p.add_row(vec![1.0], Relation::Le, 1.0);
        assert!(matches!(p.validate(), Err(Error::Dimension(_))));
        assert!(matches!(solve(&p), Err(Error::Dimension(_))));
    }
}
