use serde::Serialize;

use super::{member_primal, GeneratorSet, Regime};
use crate::error::{invalid, Result};
use crate::model::{gamma, FuncOnSpace};
use crate::tolerance::Tolerances;

/// `H_k = {f ≤ h + γ/k : h ∈ H}`, described by the generators `h_j + γ/k`.
pub fn exhaustion_relax(h: &GeneratorSet, k: i64) -> Result<GeneratorSet> {
    if k <= 0 {
        return invalid(format!("relaxation index must be positive, got {k}"));
    }
    if h.regime() != Regime::Nonneg {
        return invalid("exhaustion needs a generator set in the nonneg regime");
    }
    let bump = gamma(h.space()).scale(1.0 / k as f64);
    let gens = h
        .generators()
        .iter()
        .map(|g| g.add(&bump))
        .collect::<Result<Vec<_>>>()?;
    GeneratorSet::new(h.space().clone(), gens, Regime::BoundedBelow)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightnessProbe {
    /// Smallest level `ℓ` with `-ε + n·1_{K_ℓᶜ} ∈ H`, if any.
    pub level: Option<u32>,
    /// Levels tried, in order.
    pub tried: Vec<u32>,
}

/// Searches for a compact `K_ℓ` with `-ε + n·1_{K_ℓᶜ} ∈ H`, assuming `H`
/// is normalized.
///
/// Only levels below the top one are candidates: the top level is the
/// whole space and stands in for the part of the space that escapes every
/// compact. On a space with a single level, `K₁ = Ω` and level 1 is tried.
pub fn tightness_probe(
    h: &GeneratorSet,
    n: f64,
    eps: f64,
    tol: &Tolerances,
) -> Result<TightnessProbe> {
    if !(n > 0.0 && n.is_finite()) || !(eps > 0.0 && eps.is_finite()) {
        return invalid("tightness probe needs positive finite n and eps");
    }
    let space = h.space();
    let top = space.max_level();
    let last = if top <= 1 { 1 } else { top - 1 };
    let mut tried = Vec::new();
    for level in 1..=last {
        tried.push(level);
        let outside: Vec<bool> = space
            .in_compact(level)
            .into_iter()
            .map(|inside| !inside)
            .collect();
        let f = FuncOnSpace::indicator(space.clone(), &outside, n)?.shift(-eps);
        if member_primal(h, &f, tol)?.is_member() {
            return Ok(TightnessProbe {
                level: Some(level),
                tried,
            });
        }
    }
    Ok(TightnessProbe { level: None, tried })
}
