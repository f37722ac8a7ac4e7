use serde::{Deserialize, Serialize};

use crate::lp::SolverOptions;

/// Tolerances shared by the duality checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Membership verdict boundary: a support value `≤ 1 + verdict` is a member.
    pub verdict: f64,
    /// Residual allowed when re-verifying a stored certificate.
    pub certificate: f64,
    /// Relative tolerance on primal/dual gaps: `|p - d| ≤ gap · (1 + |p|)`.
    pub gap: f64,
    pub lp: SolverOptions,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            verdict: 1e-7,
            certificate: 1e-9,
            gap: 1e-7,
            lp: SolverOptions::default(),
        }
    }
}

impl Tolerances {
    pub fn gap_ok(&self, primal: f64, gap: f64) -> bool {
        gap <= self.gap * (1.0 + primal.abs())
    }
}
