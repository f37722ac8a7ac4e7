use serde::{Deserialize, Serialize};

use super::{LpProblem, LpSolution, Relation, Sense, SolverOptions};

/// Residuals of a claimed optimal primal/dual pair, recomputed from the
/// problem data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// Largest violation of a row or a variable bound.
    pub primal_infeasibility: f64,
    /// Largest sign violation of a row multiplier or a reduced cost.
    pub dual_infeasibility: f64,
    /// Largest product of a multiplier with the slack it should annihilate.
    pub complementarity: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `|primal_objective - dual_objective|`.
    pub duality_gap: f64,
}

impl Residuals {
    pub fn within(&self, opts: &SolverOptions) -> bool {
        self.primal_infeasibility <= opts.feas_tol
            && self.dual_infeasibility <= opts.feas_tol
            && self.complementarity <= opts.feas_tol
            && self.duality_gap <= opts.gap_tol * (1.0 + self.primal_objective.abs())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

/// Recomputes primal feasibility, dual feasibility and complementary
/// slackness of `s` against `p`. Never fails; large residuals are reported.
///
/// The dual is read with the shadow-price convention of [`LpSolution`].
/// Reduced costs `d = c - Aᵀy` are derived from it and must have the sign
/// that the active variable bounds allow.
pub fn check_certificates(p: &LpProblem, s: &LpSolution) -> Residuals {
    let n = p.num_vars();
    let x = &s.primal;
    let mut primal_inf = 0.0f64;
    let mut dual_inf = 0.0f64;
    let mut comp = 0.0f64;

    if x.len() != n || s.dual.len() != p.rows.len() {
        return Residuals {
            primal_infeasibility: f64::INFINITY,
            dual_infeasibility: f64::INFINITY,
            complementarity: f64::INFINITY,
            primal_objective: f64::NAN,
            dual_objective: f64::NAN,
            duality_gap: f64::INFINITY,
        };
    }

    // Work with the minimization form: max c·x == -min (-c)·x, y_min = -y.
    let flip = if p.sense == Sense::Max { -1.0 } else { 1.0 };
    let y: Vec<f64> = s.dual.iter().map(|v| flip * v).collect();
    let c: Vec<f64> = p.objective.iter().map(|v| flip * v).collect();

    let mut dual_obj = 0.0;
    let mut reduced = c.clone();
    for (i, row) in p.rows.iter().enumerate() {
        let ax = dot(&row.coeffs, x);
        let slack = row.rhs - ax; // ≥ 0 wanted for ≤ rows
        let (viol, sign_viol) = match row.relation {
            Relation::Le => ((-slack).max(0.0), y[i].max(0.0)),
            Relation::Ge => (slack.max(0.0), (-y[i]).max(0.0)),
            Relation::Eq => (slack.abs(), 0.0),
        };
        primal_inf = primal_inf.max(viol);
        dual_inf = dual_inf.max(sign_viol);
        if row.relation != Relation::Eq {
            comp = comp.max((y[i] * slack).abs());
        }
        dual_obj += row.rhs * y[i];
        for (j, &a) in row.coeffs.iter().enumerate() {
            reduced[j] -= a * y[i];
        }
    }

    for j in 0..n {
        let b = p.bound(j);
        let d = reduced[j];
        if let Some(l) = b.lower {
            primal_inf = primal_inf.max(l - x[j]);
        }
        if let Some(u) = b.upper {
            primal_inf = primal_inf.max(x[j] - u);
        }
        if d > 0.0 {
            match b.lower {
                Some(l) => {
                    dual_obj += l * d;
                    comp = comp.max(d * (x[j] - l).abs());
                }
                None => dual_inf = dual_inf.max(d),
            }
        } else if d < 0.0 {
            match b.upper {
                Some(u) => {
                    dual_obj += u * d;
                    comp = comp.max(-d * (u - x[j]).abs());
                }
                None => dual_inf = dual_inf.max(-d),
            }
        }
    }

    let primal_obj = dot(&p.objective, x);
    let dual_obj = flip * dual_obj;
    Residuals {
        primal_infeasibility: primal_inf.max(0.0),
        dual_infeasibility: dual_inf,
        complementarity: comp,
        primal_objective: primal_obj,
        dual_objective: dual_obj,
        duality_gap: (primal_obj - dual_obj).abs(),
    }
}
