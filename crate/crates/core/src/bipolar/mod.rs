//! Generator-described monotone convex sets, their polars and bipolars.
//!
//! A [`GeneratorSet`] `{h_1, …, h_J}` stands for
//! `H = {f : f ≤ Σ_j λ_j h_j for some λ ≥ 0 with Σ_j λ_j = 1}`.
//! Its polar is the polyhedron `{μ ≥ 0 : ⟨h_j, μ⟩ ≤ 1 for all j}`, and
//! membership in `H` can be decided two ways: directly over the weights
//! λ ([`member_primal`]) or through the polar ([`bipolar_contains`]).
//!
//! On a finite space every function is continuous, so the distinction
//! between continuous and upper semicontinuous test functions disappears
//! and `H° = (H ∩ C_b)°` holds trivially; nothing here models it.

mod exhaustion;
mod superhedge;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use exhaustion::{exhaustion_relax, tightness_probe, TightnessProbe};
pub use superhedge::{
    biconjugation_report, conjugate_at, normalize, superhedge_dual, superhedge_price,
    BiconjugationEntry, DualPrice, Normalization, PriceStatus, SuperhedgePrice,
};

use crate::error::{invalid, Result};
use crate::lp::{
    solve_with, LpProblem, LpStatus, Polyhedron, Relation, Residuals, Sense, SolveStats,
};
use crate::model::{
    check_same_space, pair_values, ExtReal, FiniteSpace, FuncOnSpace, MeasureOnSpace,
};
use crate::tolerance::Tolerances;

/// Which function class the generators live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Nonnegative generators (`H ⊂ 𝓛⁰₊`).
    Nonneg,
    /// Generators only bounded below.
    BoundedBelow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSet {
    space: Arc<FiniteSpace>,
    generators: Vec<FuncOnSpace>,
    regime: Regime,
}

impl GeneratorSet {
    pub fn new(
        space: Arc<FiniteSpace>,
        generators: Vec<FuncOnSpace>,
        regime: Regime,
    ) -> Result<Self> {
        if generators.is_empty() {
            return invalid("a generator set needs at least one generator");
        }
        for (j, g) in generators.iter().enumerate() {
            check_same_space(&space, g.space())?;
            if regime == Regime::Nonneg && !g.is_nonnegative() {
                return invalid(format!(
                    "generator {j} has a negative value in the nonneg regime"
                ));
            }
        }
        Ok(Self {
            space,
            generators,
            regime,
        })
    }

    /// Finite generators given as rows of values.
    pub fn from_rows(space: Arc<FiniteSpace>, rows: &[Vec<f64>], regime: Regime) -> Result<Self> {
        let gens = rows
            .iter()
            .map(|r| FuncOnSpace::from_reals(space.clone(), r))
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, gens, regime)
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn generators(&self) -> &[FuncOnSpace] {
        &self.generators
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Points where some generator is `+∞`; every polar measure vanishes there.
    pub fn forced_points(&self) -> Vec<bool> {
        (0..self.space.len())
            .map(|w| self.generators.iter().any(|g| g.value(w).is_infinite()))
            .collect()
    }

    /// Generator values with `+∞` replaced by 0, one row per generator.
    pub(crate) fn finite_rows(&self) -> Vec<Vec<f64>> {
        self.generators
            .iter()
            .map(|g| {
                g.values()
                    .iter()
                    .map(|v| v.finite().unwrap_or(0.0))
                    .collect()
            })
            .collect()
    }

    /// `Σ_j λ_j h_j` with `0·(+∞) = 0`.
    pub fn combination(&self, weights: &[f64]) -> Vec<ExtReal> {
        (0..self.space.len())
            .map(|w| {
                self.generators
                    .iter()
                    .zip(weights)
                    .fold(ExtReal::ZERO, |acc, (g, &l)| {
                        acc + g.value(w).scale(l.max(0.0))
                    })
            })
            .collect()
    }

    /// `max_j ⟨h_j, μ⟩`, the support function of `H` at `μ`.
    pub fn support_of_h(&self, mu: &[f64]) -> ExtReal {
        self.generators
            .iter()
            .map(|g| pair_values(g.values(), mu))
            .reduce(ExtReal::max)
            .expect("generator sets are nonempty")
    }

    /// Shifts every generator by `c`.
    pub fn shifted(&self, c: f64, regime: Regime) -> Result<GeneratorSet> {
        let gens = self.generators.iter().map(|g| g.shift(c)).collect();
        GeneratorSet::new(self.space.clone(), gens, regime)
    }
}

/// `H° = {μ ≥ 0 : ⟨h_j, μ⟩ ≤ 1 ∀j}`. Points where a generator is `+∞`
/// contribute a row `μ(ω) ≤ 0`, after the generator rows.
pub fn polar(h: &GeneratorSet) -> Polyhedron {
    let n = h.space.len();
    let mut a = h.finite_rows();
    let mut b = vec![1.0; a.len()];
    for (w, forced) in h.forced_points().into_iter().enumerate() {
        if forced {
            let mut row = vec![0.0; n];
            row[w] = 1.0;
            a.push(row);
            b.push(0.0);
        }
    }
    Polyhedron::new(n, a, b).expect("generator rows are finite")
}

/// `sup {⟨f, μ⟩ : μ ∈ H°}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportValue {
    pub value: ExtReal,
    /// A maximizer when the value is finite.
    pub maximizer: Option<MeasureOnSpace>,
    /// For an infinite value: a polar measure with `⟨f, μ⟩ > 1`.
    pub witness: Option<MeasureOnSpace>,
    /// Optimal dual weights `w ≥ 0` on the generator rows: `Σ_j w_j h_j ≥ f`
    /// off the forced points and `Σ_j w_j` equals the value.
    pub generator_weights: Option<Vec<f64>>,
    pub residuals: Option<Residuals>,
    pub stats: SolveStats,
}

pub fn support_over_polar(
    h: &GeneratorSet,
    f: &FuncOnSpace,
    tol: &Tolerances,
) -> Result<SupportValue> {
    check_same_space(h.space(), f.space())?;
    let forced = h.forced_points();
    let space = h.space.clone();
    let n = space.len();

    if let Some(w) = (0..n).find(|&w| f.value(w).is_infinite() && !forced[w]) {
        return Ok(SupportValue {
            value: ExtReal::PosInf,
            maximizer: None,
            witness: Some(small_dirac(h, w)?),
            generator_weights: None,
            residuals: None,
            stats: SolveStats::default(),
        });
    }

    let c: Vec<f64> = (0..n)
        .map(|w| {
            if forced[w] {
                0.0
            } else {
                f.value(w).finite().unwrap_or(0.0)
            }
        })
        .collect();
    let lp = polar(h).to_lp(Sense::Max, c.clone());
    let sol = solve_with(&lp, &tol.lp)?;
    match sol.status {
        LpStatus::Optimal => {
            let mu = MeasureOnSpace::from_solver(space, &sol.primal, tol.lp.feas_tol)?;
            let weights = sol.dual[..h.len()].iter().map(|&y| y.max(0.0)).collect();
            Ok(SupportValue {
                value: ExtReal::Finite(sol.value()),
                maximizer: Some(mu),
                witness: None,
                generator_weights: Some(weights),
                residuals: sol.residuals,
                stats: sol.stats,
            })
        }
        LpStatus::Unbounded => {
            let ray = sol.ray.clone().unwrap_or_default();
            let gain: f64 = c.iter().zip(&ray).map(|(a, b)| a * b).sum();
            let witness = if gain > 0.0 {
                let w: Vec<f64> = ray.iter().map(|r| r.max(0.0) * 2.0 / gain).collect();
                Some(MeasureOnSpace::new(space, w)?)
            } else {
                None
            };
            Ok(SupportValue {
                value: ExtReal::PosInf,
                maximizer: None,
                witness,
                generator_weights: None,
                residuals: sol.residuals,
                stats: sol.stats,
            })
        }
        // 0 is always in the polar
        LpStatus::Infeasible => unreachable!("the polar always contains the zero measure"),
    }
}

/// A positive point mass at an unforced point, scaled into the polar.
fn small_dirac(h: &GeneratorSet, w: usize) -> Result<MeasureOnSpace> {
    let peak = h
        .generators
        .iter()
        .filter_map(|g| g.value(w).finite())
        .fold(0.0f64, f64::max);
    let mass = if peak > 0.0 { 1.0 / peak } else { 1.0 };
    MeasureOnSpace::dirac(h.space.clone(), w, mass)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Member,
    NonMember,
}

/// Evidence for a membership verdict.
///
/// A member carries convex weights λ with `Σ_j λ_j h_j ≥ f`; a non-member
/// carries a polar measure `μ'` with `⟨f, μ'⟩ > 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipCertificate {
    pub verdict: Verdict,
    pub weights: Option<Vec<f64>>,
    /// `Σ_j λ_j h_j - f`, `+∞` where the combination is infinite.
    pub slack: Option<Vec<ExtReal>>,
    pub separating: Option<MeasureOnSpace>,
    /// Support value over the polar (bipolar route) or the best uniform
    /// slack `max_λ min_ω (Σλh - f)(ω)` (primal route). `None` when a
    /// non-member was decided without solving.
    pub value: Option<ExtReal>,
    pub residuals: Option<Residuals>,
    pub stats: SolveStats,
}

impl MembershipCertificate {
    pub fn is_member(&self) -> bool {
        self.verdict == Verdict::Member
    }

    /// Re-checks the stored evidence from scratch at tolerance `tol`.
    pub fn verify(&self, h: &GeneratorSet, f: &FuncOnSpace, tol: f64) -> bool {
        match self.verdict {
            Verdict::Member => {
                let Some(lambda) = &self.weights else {
                    return false;
                };
                if lambda.len() != h.len() || lambda.iter().any(|&l| l < -tol) {
                    return false;
                }
                let total: f64 = lambda.iter().sum();
                if (total - 1.0).abs() > tol {
                    return false;
                }
                h.combination(lambda)
                    .iter()
                    .zip(f.values())
                    .all(|(&dom, &fv)| match (dom, fv) {
                        (ExtReal::PosInf, _) => true,
                        (_, ExtReal::PosInf) => false,
                        (ExtReal::Finite(d), ExtReal::Finite(x)) => d - x >= -tol,
                    })
            }
            Verdict::NonMember => {
                let Some(mu) = &self.separating else {
                    return false;
                };
                let on_polar = h
                    .generators
                    .iter()
                    .all(|g| pair_values(g.values(), mu.weights()) <= ExtReal::Finite(1.0 + tol));
                let separates = pair_values(f.values(), mu.weights()) >= ExtReal::Finite(1.0 + tol);
                on_polar && separates
            }
        }
    }
}

fn slack_of(h: &GeneratorSet, lambda: &[f64], f: &FuncOnSpace) -> Vec<ExtReal> {
    h.combination(lambda)
        .into_iter()
        .zip(f.values())
        .map(|(d, &fv)| match (d, fv) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => {
                ExtReal::from_f64(a - b).unwrap_or(ExtReal::ZERO)
            }
            (ExtReal::PosInf, _) => ExtReal::PosInf,
            // f is not dominated here; ExtReal has no -∞
            (ExtReal::Finite(_), ExtReal::PosInf) => ExtReal::Finite(f64::MIN),
        })
        .collect()
}

/// Decides `f ∈ H` directly: is there λ in the simplex with `Σλ_j h_j ≥ f`?
///
/// Solves `max t` s.t. `Σ_j λ_j h_j(ω) - t ≥ f(ω)`, `Σλ = 1`; `f` is a
/// member iff `t ≥ -certificate`. A non-member's separating measure is
/// read off the optimal dual. With infinite generator values the support
/// of λ decides which points are dominated automatically; the largest
/// feasible support is found by a fixpoint over generator subsets.
pub fn member_primal(
    h: &GeneratorSet,
    f: &FuncOnSpace,
    tol: &Tolerances,
) -> Result<MembershipCertificate> {
    check_same_space(h.space(), f.space())?;
    let n = h.space.len();
    let ng = h.len();
    let inf_gens: Vec<Vec<usize>> = (0..n)
        .map(|w| {
            (0..ng)
                .filter(|&j| h.generators[j].value(w).is_infinite())
                .collect()
        })
        .collect();
    let any_inf = inf_gens.iter().any(|v| !v.is_empty());
    let mut active = vec![true; ng];
    let mut stats = SolveStats::default();

    loop {
        let covered: Vec<bool> = (0..n)
            .map(|w| inf_gens[w].iter().any(|&j| active[j]))
            .collect();
        let idx: Vec<usize> = (0..ng).filter(|&j| active[j]).collect();

        let blocked = (0..n).find(|&w| f.value(w).is_infinite() && !covered[w]);
        if idx.is_empty() || blocked.is_some() {
            let separating = match blocked {
                Some(w) if inf_gens[w].is_empty() => Some(small_dirac(h, w)?),
                _ => None,
            };
            return Ok(MembershipCertificate {
                verdict: Verdict::NonMember,
                weights: None,
                slack: None,
                separating,
                value: None,
                residuals: None,
                stats,
            });
        }

        let rows: Vec<usize> = (0..n).filter(|&w| !covered[w]).collect();
        let k = idx.len();
        // variables: λ over idx, then t
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        let mut lp = LpProblem::new(Sense::Max, c);
        lp.set_free(k);
        for &w in &rows {
            let mut a: Vec<f64> = idx
                .iter()
                .map(|&j| {
                    h.generators[j]
                        .value(w)
                        .finite()
                        .expect("uncovered point is finite")
                })
                .collect();
            a.push(-1.0);
            let fv = f.value(w).finite().expect("blocked points handled above");
            lp.add_row(a, Relation::Ge, fv);
        }
        let mut simplex_row = vec![1.0; k];
        simplex_row.push(0.0);
        lp.add_row(simplex_row, Relation::Eq, 1.0);
        let sol = solve_with(&lp, &tol.lp)?;
        stats += sol.stats;

        let (t_star, lambda_sub) = match sol.status {
            LpStatus::Optimal => (sol.value(), sol.primal[..k].to_vec()),
            LpStatus::Unbounded => (f64::INFINITY, vec![1.0 / k as f64; k]),
            LpStatus::Infeasible => unreachable!("the simplex row alone is feasible"),
        };

        if t_star < -tol.certificate {
            let mut nu = vec![0.0; n];
            for (r, &w) in rows.iter().enumerate() {
                nu[w] = (-sol.dual[r]).max(0.0);
            }
            let separating = separating_from_dual(h, f, &nu)?;
            return Ok(MembershipCertificate {
                verdict: Verdict::NonMember,
                weights: None,
                slack: None,
                separating,
                value: Some(ExtReal::Finite(t_star)),
                residuals: None,
                stats,
            });
        }

        if !any_inf {
            let lambda = expand(&idx, &lambda_sub, ng);
            return Ok(member_cert(h, f, lambda, t_star, stats));
        }

        // Which active generators can carry positive weight?
        let floor = t_star.min(0.0);
        let mut keep = vec![false; ng];
        let mut sum = vec![0.0; ng];
        let mut kept = 0usize;
        for (pos, &j) in idx.iter().enumerate() {
            let mut c = vec![0.0; k];
            c[pos] = 1.0;
            let mut lp = LpProblem::new(Sense::Max, c);
            for &w in &rows {
                let a = idx
                    .iter()
                    .map(|&i| h.generators[i].value(w).finite().unwrap_or(0.0))
                    .collect();
                lp.add_row(a, Relation::Ge, f.value(w).finite().unwrap_or(0.0) + floor);
            }
            lp.add_row(vec![1.0; k], Relation::Eq, 1.0);
            let s = solve_with(&lp, &tol.lp)?;
            stats += s.stats;
            if s.status == LpStatus::Optimal && s.value() > 1e-9 {
                keep[j] = true;
                kept += 1;
                for (p, &i) in idx.iter().enumerate() {
                    sum[i] += s.primal[p];
                }
            }
        }
        if kept == k {
            let lambda = sum.iter().map(|v| v / kept as f64).collect();
            return Ok(member_cert(h, f, lambda, t_star, stats));
        }
        active = keep;
    }
}

fn expand(idx: &[usize], sub: &[f64], ng: usize) -> Vec<f64> {
    let mut out = vec![0.0; ng];
    for (&j, &v) in idx.iter().zip(sub) {
        out[j] = v.max(0.0);
    }
    out
}

fn member_cert(
    h: &GeneratorSet,
    f: &FuncOnSpace,
    lambda: Vec<f64>,
    t: f64,
    stats: SolveStats,
) -> MembershipCertificate {
    let slack = slack_of(h, &lambda, f);
    MembershipCertificate {
        verdict: Verdict::Member,
        weights: Some(lambda),
        slack: Some(slack),
        separating: None,
        value: ExtReal::from_f64(t),
        residuals: None,
        stats,
    }
}

/// Scales a probability `ν` with `⟨f, ν⟩ > max_j ⟨h_j, ν⟩` into a polar
/// measure separating `f`.
fn separating_from_dual(
    h: &GeneratorSet,
    f: &FuncOnSpace,
    nu: &[f64],
) -> Result<Option<MeasureOnSpace>> {
    let total: f64 = nu.iter().sum();
    if total <= 0.0 {
        return Ok(None);
    }
    let nu: Vec<f64> = nu.iter().map(|v| v / total).collect();
    let a = match pair_values(f.values(), &nu) {
        ExtReal::Finite(a) => a,
        ExtReal::PosInf => return Ok(None),
    };
    let s = match h.support_of_h(&nu) {
        ExtReal::Finite(s) => s,
        ExtReal::PosInf => return Ok(None),
    };
    let scale = if s > 0.0 && a > s {
        1.0 / s
    } else if s <= 0.0 && a > 0.0 {
        2.0 / a
    } else {
        return Ok(None);
    };
    let w = nu.iter().map(|v| v * scale).collect();
    Ok(Some(MeasureOnSpace::new(h.space.clone(), w)?))
}

/// Decides `f ∈ H°°` through the polar: member iff
/// `sup_{μ ∈ H°} ⟨f, μ⟩ ≤ 1 + verdict`.
///
/// A member carries λ read off the dual of the support LP; a non-member
/// carries the maximizing polar measure, rescaled so the generators are
/// tight.
pub fn bipolar_contains(
    h: &GeneratorSet,
    f: &FuncOnSpace,
    tol: &Tolerances,
) -> Result<MembershipCertificate> {
    let sv = support_over_polar(h, f, tol)?;
    let member = sv.value <= ExtReal::Finite(1.0 + tol.verdict);
    if member {
        let w = sv
            .generator_weights
            .clone()
            .unwrap_or_else(|| vec![0.0; h.len()]);
        let total: f64 = w.iter().sum();
        let lambda: Vec<f64> = if total > 0.0 {
            w.iter().map(|v| v / total).collect()
        } else {
            vec![1.0 / h.len() as f64; h.len()]
        };
        let slack = slack_of(h, &lambda, f);
        return Ok(MembershipCertificate {
            verdict: Verdict::Member,
            weights: Some(lambda),
            slack: Some(slack),
            separating: None,
            value: Some(sv.value),
            residuals: sv.residuals,
            stats: sv.stats,
        });
    }
    let separating = match (&sv.maximizer, &sv.witness) {
        (Some(mu), _) => {
            let peak = h.support_of_h(mu.weights()).finite().unwrap_or(0.0);
            if peak > 0.0 {
                Some(mu.scale(1.0 / peak)?)
            } else {
                Some(mu.clone())
            }
        }
        (None, Some(wit)) => Some(wit.clone()),
        (None, None) => None,
    };
    Ok(MembershipCertificate {
        verdict: Verdict::NonMember,
        weights: None,
        slack: None,
        separating,
        value: Some(sv.value),
        residuals: sv.residuals,
        stats: sv.stats,
    })
}
