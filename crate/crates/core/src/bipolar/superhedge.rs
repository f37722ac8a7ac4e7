//! The superhedging functional `φ(f) = inf {m : m + h ≥ f, h ∈ H}`, its
//! dual over probability measures, and the normalization shift.
//!
//! Points where some generator is `+∞` are dominated at arbitrarily small
//! cost (put weight `ε` on that generator), so the LPs below keep rows only
//! at the points where every generator is finite. The infimum is then
//! exact but may not be attained by the returned λ.

use serde::Serialize;

use super::GeneratorSet;
use crate::error::{invalid, Result};
use crate::lp::{solve_with, LpProblem, LpStatus, Relation, Residuals, Sense, SolveStats};
use crate::model::{check_same_space, pair_values, ExtReal, FuncOnSpace, MeasureOnSpace};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceStatus {
    Finite,
    PlusInfinity,
    /// The generator set dominates everything; only possible when every
    /// point carries an infinite generator value.
    MinusInfinity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperhedgePrice {
    pub status: PriceStatus,
    pub value: Option<f64>,
    pub weights: Option<Vec<f64>>,
    pub residuals: Option<Residuals>,
    pub stats: SolveStats,
}

impl SuperhedgePrice {
    /// The value on the extended line, `-∞` as `f64::NEG_INFINITY`.
    pub fn as_f64(&self) -> f64 {
        status_value(self.status, self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualPrice {
    pub status: PriceStatus,
    pub value: Option<f64>,
    pub measure: Option<MeasureOnSpace>,
    /// `max_j ⟨h_j, μ⟩` at the optimum.
    pub level: Option<f64>,
    pub residuals: Option<Residuals>,
    pub stats: SolveStats,
}

impl DualPrice {
    pub fn as_f64(&self) -> f64 {
        status_value(self.status, self.value)
    }
}

fn status_value(status: PriceStatus, value: Option<f64>) -> f64 {
    match status {
        PriceStatus::Finite => value.unwrap_or(f64::NAN),
        PriceStatus::PlusInfinity => f64::INFINITY,
        PriceStatus::MinusInfinity => f64::NEG_INFINITY,
    }
}

/// Points where every generator is finite.
fn finite_points(h: &GeneratorSet) -> Vec<usize> {
    let forced = h.forced_points();
    (0..forced.len()).filter(|&w| !forced[w]).collect()
}

/// `φ(f) = min m` s.t. `m + Σ_j λ_j h_j ≥ f`, λ in the simplex.
pub fn superhedge_price(
    h: &GeneratorSet,
    f: &FuncOnSpace,
    tol: &Tolerances,
) -> Result<SuperhedgePrice> {
    check_same_space(h.space(), f.space())?;
    let pts = finite_points(h);
    if pts.iter().any(|&w| f.value(w).is_infinite()) {
        return Ok(SuperhedgePrice {
            status: PriceStatus::PlusInfinity,
            value: None,
            weights: None,
            residuals: None,
            stats: SolveStats::default(),
        });
    }
    if pts.is_empty() {
        return Ok(SuperhedgePrice {
            status: PriceStatus::MinusInfinity,
            value: None,
            weights: None,
            residuals: None,
            stats: SolveStats::default(),
        });
    }
    let rows = h.finite_rows();
    let k = h.len();
    // variables: m, then λ
    let mut c = vec![0.0; k + 1];
    c[0] = 1.0;
    let mut lp = LpProblem::new(Sense::Min, c);
    lp.set_free(0);
    for &w in &pts {
        let mut a = vec![1.0];
        a.extend(rows.iter().map(|r| r[w]));
        lp.add_row(a, Relation::Ge, f.value(w).to_f64());
    }
    let mut simplex = vec![0.0];
    simplex.extend(std::iter::repeat_n(1.0, k));
    lp.add_row(simplex, Relation::Eq, 1.0);
    let sol = solve_with(&lp, &tol.lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(SuperhedgePrice {
            status: PriceStatus::Finite,
            value: Some(sol.value()),
            weights: Some(sol.primal[1..].iter().map(|v| v.max(0.0)).collect()),
            residuals: sol.residuals,
            stats: sol.stats,
        }),
        // m only meets finite rows from below
        _ => unreachable!("superhedging LP is feasible and bounded when rows exist"),
    }
}

/// `φ*(μ)`: `+∞` unless μ is a probability, else `max_j ⟨h_j, μ⟩`.
pub fn conjugate_at(h: &GeneratorSet, mu: &MeasureOnSpace, tol: &Tolerances) -> Result<ExtReal> {
    check_same_space(h.space(), mu.space())?;
    if !mu.is_probability(tol.certificate) {
        return Ok(ExtReal::PosInf);
    }
    Ok(h.support_of_h(mu.weights()))
}

/// `sup_μ ⟨f, μ⟩ - φ*(μ)` over probability measures, as the LP
/// `max ⟨f, μ⟩ - t` s.t. `⟨h_j, μ⟩ ≤ t`, `Σμ = 1`, μ ≥ 0, t free.
pub fn superhedge_dual(h: &GeneratorSet, f: &FuncOnSpace, tol: &Tolerances) -> Result<DualPrice> {
    check_same_space(h.space(), f.space())?;
    let pts = finite_points(h);
    let empty = |status| DualPrice {
        status,
        value: None,
        measure: None,
        level: None,
        residuals: None,
        stats: SolveStats::default(),
    };
    if let Some(&w) = pts.iter().find(|&&w| f.value(w).is_infinite()) {
        let mut out = empty(PriceStatus::PlusInfinity);
        out.measure = Some(MeasureOnSpace::dirac(h.space().clone(), w, 1.0)?);
        return Ok(out);
    }
    if pts.is_empty() {
        // no probability has finite conjugate
        return Ok(empty(PriceStatus::MinusInfinity));
    }
    let rows = h.finite_rows();
    let p = pts.len();
    // variables: μ over pts, then t
    let mut c: Vec<f64> = pts.iter().map(|&w| f.value(w).to_f64()).collect();
    c.push(-1.0);
    let mut lp = LpProblem::new(Sense::Max, c);
    lp.set_free(p);
    for r in &rows {
        let mut a: Vec<f64> = pts.iter().map(|&w| r[w]).collect();
        a.push(-1.0);
        lp.add_row(a, Relation::Le, 0.0);
    }
    let mut mass = vec![1.0; p];
    mass.push(0.0);
    lp.add_row(mass, Relation::Eq, 1.0);
    let sol = solve_with(&lp, &tol.lp)?;
    if sol.status != LpStatus::Optimal {
        unreachable!("the dual LP is feasible and bounded over probabilities");
    }
    let mut weights = vec![0.0; h.space().len()];
    for (i, &w) in pts.iter().enumerate() {
        weights[w] = sol.primal[i];
    }
    Ok(DualPrice {
        status: PriceStatus::Finite,
        value: Some(sol.value()),
        measure: Some(MeasureOnSpace::from_solver(
            h.space().clone(),
            &weights,
            tol.lp.feas_tol,
        )?),
        level: Some(sol.primal[p]),
        residuals: sol.residuals,
        stats: sol.stats,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiconjugationEntry {
    pub primal: SuperhedgePrice,
    pub dual: DualPrice,
    pub gap: f64,
    /// `⟨f, μ*⟩ - φ*(μ*)` recomputed at the dual maximizer.
    pub conjugate_value: Option<f64>,
    pub within_tol: bool,
}

/// Primal and dual superhedging values for each `f`, with their gap.
/// Gap violations are reported in `within_tol`, never raised.
pub fn biconjugation_report(
    h: &GeneratorSet,
    fs: &[FuncOnSpace],
    tol: &Tolerances,
) -> Result<Vec<BiconjugationEntry>> {
    fs.iter()
        .map(|f| {
            let primal = superhedge_price(h, f, tol)?;
            let dual = superhedge_dual(h, f, tol)?;
            let (p, d) = (primal.as_f64(), dual.as_f64());
            let gap = if p == d { 0.0 } else { (p - d).abs() };
            let conjugate_value = match (&dual.measure, dual.status) {
                (Some(mu), PriceStatus::Finite) => {
                    let phi_star = conjugate_at(h, mu, tol)?;
                    pair_values(f.values(), mu.weights())
                        .minus_conjugate(phi_star)
                        .map(ExtReal::to_f64)
                }
                _ => None,
            };
            let conj_ok = match conjugate_value {
                Some(v) if d.is_finite() => (v - d).abs() <= tol.gap * (1.0 + d.abs()),
                _ => true,
            };
            let within_tol = conj_ok && (gap == 0.0 || (p.is_finite() && tol.gap_ok(p, gap)));
            Ok(BiconjugationEntry {
                primal,
                dual,
                gap,
                conjugate_value,
                within_tol,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Normalization {
    /// `m = max_λ min_ω Σ_j λ_j h_j(ω)`; `H - m` is normalized.
    pub shift: f64,
    pub weights: Vec<f64>,
    #[serde(skip)]
    pub shifted: GeneratorSet,
    pub residuals: Option<Residuals>,
    pub stats: SolveStats,
}

/// Finds the unique `m` with `φ_{H-m}(0) = 0` and returns `H - m`.
pub fn normalize(h: &GeneratorSet, tol: &Tolerances) -> Result<Normalization> {
    let pts = finite_points(h);
    if pts.is_empty() {
        return invalid(
            "every point carries an infinite generator value; the set has no finite normalization",
        );
    }
    let rows = h.finite_rows();
    let k = h.len();
    // variables: s, then λ
    let mut c = vec![0.0; k + 1];
    c[0] = 1.0;
    let mut lp = LpProblem::new(Sense::Max, c);
    lp.set_free(0);
    for &w in &pts {
        let mut a = vec![-1.0];
        a.extend(rows.iter().map(|r| r[w]));
        lp.add_row(a, Relation::Ge, 0.0);
    }
    let mut simplex = vec![0.0];
    simplex.extend(std::iter::repeat_n(1.0, k));
    lp.add_row(simplex, Relation::Eq, 1.0);
    let sol = solve_with(&lp, &tol.lp)?;
    if sol.status != LpStatus::Optimal {
        unreachable!("the normalization LP is bounded by the finite rows");
    }
    let m = sol.value();
    Ok(Normalization {
        shift: m,
        weights: sol.primal[1..].iter().map(|v| v.max(0.0)).collect(),
        shifted: h.shifted(-m, super::Regime::BoundedBelow)?,
        residuals: sol.residuals,
        stats: sol.stats,
    })
}
