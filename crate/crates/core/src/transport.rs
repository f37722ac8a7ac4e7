//! Transport duality with marginal constraints given by two polars.
//!
//! For generator sets `H₁`, `H₂` the product set
//! `H = {f ≤ f₁ ⊕ f₂ : f_i ∈ t_i H_i, t₁ + t₂ = 1}` has polar
//! `{μ ≥ 0 : μ₁ ∈ H₁°, μ₂ ∈ H₂°}`, so membership reduces to the transport
//! value `π(f) = sup {⟨f, μ⟩ : μ₁ ∈ H₁°, μ₂ ∈ H₂°} ≤ 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bipolar::{polar, GeneratorSet, Regime};
use crate::error::{invalid, Result};
use crate::lp::{
    solve_with, LpProblem, LpStatus, Polyhedron, Relation, Residuals, Sense, SolveStats,
};
use crate::model::{
    check_same_space, dot, marginal_weights, oplus, ExtReal, FuncOnSpace, MeasureOnSpace,
    ProductSpace,
};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct TransportInstance {
    product: ProductSpace,
    h1: GeneratorSet,
    h2: GeneratorSet,
}

impl TransportInstance {
    pub fn new(h1: GeneratorSet, h2: GeneratorSet) -> Result<Self> {
        if h1.regime() != Regime::Nonneg || h2.regime() != Regime::Nonneg {
            return invalid("transport marginal sets must be in the nonneg regime");
        }
        let product = ProductSpace::new(h1.space().clone(), h2.space().clone());
        Ok(Self { product, h1, h2 })
    }

    pub fn product(&self) -> &ProductSpace {
        &self.product
    }

    pub fn left(&self) -> &GeneratorSet {
        &self.h1
    }

    pub fn right(&self) -> &GeneratorSet {
        &self.h2
    }

    fn check_claim(&self, f: &FuncOnSpace) -> Result<()> {
        check_same_space(f.space(), self.product.space())?;
        if !f.is_nonnegative() {
            return invalid("transport claims must be nonnegative");
        }
        Ok(())
    }

    /// Product cells where some marginal polar forces zero mass.
    fn forced_cells(&self) -> Vec<bool> {
        let f1 = self.h1.forced_points();
        let f2 = self.h2.forced_points();
        (0..self.product.len())
            .map(|k| {
                let (i, j) = self.product.split_index(k);
                f1[i] || f2[j]
            })
            .collect()
    }

    /// The coupling polytope `{μ ≥ 0 : μ₁ ∈ H₁°, μ₂ ∈ H₂°}` on the product.
    pub fn coupling_polytope(&self) -> Polyhedron {
        let (n1, n2) = (self.h1.space().len(), self.h2.space().len());
        let p1 = polar(&self.h1);
        let p2 = polar(&self.h2);
        let mut a = Vec::with_capacity(p1.num_rows() + p2.num_rows());
        for row in &p1.a {
            a.push((0..n1 * n2).map(|k| row[k / n2]).collect());
        }
        for row in &p2.a {
            a.push((0..n1 * n2).map(|k| row[k % n2]).collect());
        }
        let b = p1.b.iter().chain(&p2.b).copied().collect();
        Polyhedron::new(n1 * n2, a, b).expect("polar rows are finite")
    }
}

/// An optimal coupling with the slack of every marginal polar row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingCertificate {
    pub coupling: MeasureOnSpace,
    pub left_marginal: Vec<f64>,
    pub right_marginal: Vec<f64>,
    /// `b - A μ₁` over the rows of `polar(H₁)`.
    pub left_slack: Vec<f64>,
    pub right_slack: Vec<f64>,
}

impl CouplingCertificate {
    fn build(t: &TransportInstance, weights: Vec<f64>, tol: f64) -> Result<Self> {
        let coupling = MeasureOnSpace::from_solver(t.product.space().clone(), &weights, tol)?;
        let (w1, w2) = marginal_weights(t.h1.space().len(), t.h2.space().len(), coupling.weights());
        let slack = |p: &Polyhedron, w: &[f64]| -> Vec<f64> {
            p.a.iter()
                .zip(&p.b)
                .map(|(row, b)| b - dot(row, w))
                .collect()
        };
        Ok(Self {
            left_slack: slack(&polar(&t.h1), &w1),
            right_slack: slack(&polar(&t.h2), &w2),
            left_marginal: w1,
            right_marginal: w2,
            coupling,
        })
    }

    pub fn min_slack(&self) -> f64 {
        self.left_slack
            .iter()
            .chain(&self.right_slack)
            .fold(f64::INFINITY, |m, &s| m.min(s))
    }

    pub fn verify(&self, tol: f64) -> bool {
        self.coupling.weights().iter().all(|&w| w >= 0.0) && self.min_slack() >= -tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportValue {
    pub value: ExtReal,
    pub certificate: Option<CouplingCertificate>,
    /// A feasible direction with positive gain when the value is infinite.
    pub ray: Option<Vec<f64>>,
    pub residuals: Option<Residuals>,
    pub stats: SolveStats,
}

/// `π(f) = max ⟨f, μ⟩` over couplings with marginals in the polars.
pub fn transport_value(
    t: &TransportInstance,
    f: &FuncOnSpace,
    tol: &Tolerances,
) -> Result<TransportValue> {
    t.check_claim(f)?;
    let forced = t.forced_cells();
    if let Some(k) = (0..forced.len()).find(|&k| !forced[k] && f.value(k).is_infinite()) {
        let mut ray = vec![0.0; forced.len()];
        ray[k] = 1.0;
        return Ok(TransportValue {
            value: ExtReal::PosInf,
            certificate: None,
            ray: Some(ray),
            residuals: None,
            stats: SolveStats::default(),
        });
    }
    let c: Vec<f64> = (0..forced.len())
        .map(|k| if forced[k] { 0.0 } else { f.value(k).to_f64() })
        .collect();
    let lp = t.coupling_polytope().to_lp(Sense::Max, c);
    let sol = solve_with(&lp, &tol.lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(TransportValue {
            value: ExtReal::Finite(sol.value()),
            certificate: Some(CouplingCertificate::build(
                t,
                sol.primal.clone(),
                tol.lp.feas_tol,
            )?),
            ray: None,
            residuals: sol.residuals,
            stats: sol.stats,
        }),
        LpStatus::Unbounded => Ok(TransportValue {
            value: ExtReal::PosInf,
            certificate: None,
            ray: sol.ray.clone(),
            residuals: sol.residuals,
            stats: sol.stats,
        }),
        LpStatus::Infeasible => unreachable!("the zero coupling is always feasible"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitValue {
    pub value: ExtReal,
    pub f1: Option<Vec<f64>>,
    pub f2: Option<Vec<f64>>,
    /// Multipliers on the rows of `polar(H₁)` and `polar(H₂)`:
    /// `π_i(f_i) ≤ b_iᵀ y_i`.
    pub y1: Option<Vec<f64>>,
    pub y2: Option<Vec<f64>>,
    pub residuals: Option<Residuals>,
    pub stats: SolveStats,
}

/// The cheapest superhedge `f ≤ f₁ ⊕ f₂`, priced by `π₁(f₁) + π₂(f₂)`,
/// with each `π_i` replaced by its dual `min {b_iᵀ y : A_iᵀ y ≥ f_i, y ≥ 0}`.
pub fn superhedge_split(
    t: &TransportInstance,
    f: &FuncOnSpace,
    tol: &Tolerances,
) -> Result<SplitValue> {
    t.check_claim(f)?;
    let forced = t.forced_cells();
    if (0..forced.len()).any(|k| !forced[k] && f.value(k).is_infinite()) {
        return Ok(SplitValue {
            value: ExtReal::PosInf,
            f1: None,
            f2: None,
            y1: None,
            y2: None,
            residuals: None,
            stats: SolveStats::default(),
        });
    }
    let p1 = polar(&t.h1);
    let p2 = polar(&t.h2);
    let (r1, r2) = (p1.num_rows(), p2.num_rows());
    let (n1, n2) = (t.h1.space().len(), t.h2.space().len());
    // variables: y1 | y2 | f1 | f2, all ≥ 0
    let (o2, of1, of2) = (r1, r1 + r2, r1 + r2 + n1);
    let nv = of2 + n2;
    let mut c = vec![0.0; nv];
    c[..r1].copy_from_slice(&p1.b);
    c[o2..of1].copy_from_slice(&p2.b);
    let mut lp = LpProblem::new(Sense::Min, c);
    let marginal_rows =
        |p: &Polyhedron, off_y: usize, off_f: usize, n: usize, lp: &mut LpProblem| {
            for w in 0..n {
                let mut a = vec![0.0; nv];
                for (r, row) in p.a.iter().enumerate() {
                    a[off_y + r] = row[w];
                }
                a[off_f + w] = -1.0;
                lp.add_row(a, Relation::Ge, 0.0);
            }
        };
    marginal_rows(&p1, 0, of1, n1, &mut lp);
    marginal_rows(&p2, o2, of2, n2, &mut lp);
    for (k, &skip) in forced.iter().enumerate() {
        if skip {
            continue;
        }
        let (i, j) = t.product.split_index(k);
        let mut a = vec![0.0; nv];
        a[of1 + i] = 1.0;
        a[of2 + j] = 1.0;
        lp.add_row(a, Relation::Ge, f.value(k).to_f64());
    }
    let sol = solve_with(&lp, &tol.lp)?;
    if sol.status != LpStatus::Optimal {
        // a cell with f > 0 that no generator can cover on either side
        return Ok(SplitValue {
            value: ExtReal::PosInf,
            f1: None,
            f2: None,
            y1: None,
            y2: None,
            residuals: sol.residuals,
            stats: sol.stats,
        });
    }
    let x = &sol.primal;
    let clip = |s: &[f64]| s.iter().map(|v| v.max(0.0)).collect::<Vec<_>>();
    Ok(SplitValue {
        value: ExtReal::Finite(sol.value()),
        y1: Some(clip(&x[..r1])),
        y2: Some(clip(&x[o2..of1])),
        f1: Some(clip(&x[of1..of2])),
        f2: Some(clip(&x[of2..])),
        residuals: sol.residuals,
        stats: sol.stats,
    })
}

/// The product set as a generator list: `{h ⊕ 0 : h ∈ H₁} ∪ {0 ⊕ h : h ∈ H₂}`.
/// Its polar coincides with the coupling polytope.
pub fn product_generators(t: &TransportInstance) -> Result<GeneratorSet> {
    let z1 = FuncOnSpace::zero(t.h1.space().clone());
    let z2 = FuncOnSpace::zero(t.h2.space().clone());
    let mut gens = Vec::with_capacity(t.h1.len() + t.h2.len());
    for g in t.h1.generators() {
        gens.push(oplus(&t.product, g, &z2)?);
    }
    for g in t.h2.generators() {
        gens.push(oplus(&t.product, &z1, g)?);
    }
    GeneratorSet::new(t.product.space().clone(), gens, Regime::Nonneg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductPolarCheck {
    /// Both marginals lie in their polars.
    pub verdict: bool,
    pub left_slack: Vec<f64>,
    pub right_slack: Vec<f64>,
    /// `max_i sup_{h ∈ H_i} ⟨h, μ_i⟩`.
    pub marginal_sup: ExtReal,
    /// Largest `⟨h, μ⟩` over sampled members `t g₁ ⊕ (1-t) g₂` of the product set.
    pub sampled_sup: ExtReal,
    /// `sampled_sup` agrees with `marginal_sup` and with the verdict.
    pub consistent: bool,
}

/// Tests `μ ∈ H°` through its marginals, cross-checked against `⟨h, μ⟩`
/// over `samples` random members of the product set. The pure generators
/// `h ⊕ 0` and `0 ⊕ h` are always among the samples, so the sampled
/// supremum is exact.
pub fn product_polar_check(
    t: &TransportInstance,
    mu: &MeasureOnSpace,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<ProductPolarCheck> {
    check_same_space(mu.space(), t.product.space())?;
    let (n1, n2) = (t.h1.space().len(), t.h2.space().len());
    let (w1, w2) = marginal_weights(n1, n2, mu.weights());
    let slack = |p: &Polyhedron, w: &[f64]| -> Vec<f64> {
        p.a.iter()
            .zip(&p.b)
            .map(|(row, b)| b - dot(row, w))
            .collect()
    };
    let left_slack = slack(&polar(&t.h1), &w1);
    let right_slack = slack(&polar(&t.h2), &w2);
    let eps = tol.certificate;
    let verdict = left_slack.iter().chain(&right_slack).all(|&s| s >= -eps);
    let marginal_sup = t.h1.support_of_h(&w1).max(t.h2.support_of_h(&w2));

    let pair = |h: &FuncOnSpace| crate::model::pair_values(h.values(), mu.weights());
    let mut sampled_sup = ExtReal::Finite(0.0);
    for g in product_generators(t)?.generators() {
        sampled_sup = sampled_sup.max(pair(g));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let g1 = random_member(&t.h1, &mut rng);
        let g2 = random_member(&t.h2, &mut rng);
        let s: f64 = rng.gen();
        let h = oplus(&t.product, &g1.scale(s), &g2.scale(1.0 - s))?;
        sampled_sup = sampled_sup.max(pair(&h));
    }
    let agree = match (sampled_sup, marginal_sup) {
        (ExtReal::Finite(a), ExtReal::Finite(b)) => {
            (a - b.max(0.0)).abs() <= tol.gap * (1.0 + b.abs())
        }
        (a, b) => a == b,
    };
    let consistent = agree && (verdict == (sampled_sup <= ExtReal::Finite(1.0 + eps)));
    Ok(ProductPolarCheck {
        verdict,
        left_slack,
        right_slack,
        marginal_sup,
        sampled_sup,
        consistent,
    })
}

/// A random convex combination of the generators.
fn random_member(h: &GeneratorSet, rng: &mut ChaCha8Rng) -> FuncOnSpace {
    let raw: Vec<f64> = (0..h.len()).map(|_| rng.gen::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    let lambda: Vec<f64> = raw.iter().map(|v| v / total).collect();
    FuncOnSpace::new(h.space().clone(), h.combination(&lambda)).expect("combination keeps shape")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportDualityEntry {
    pub value: TransportValue,
    pub split: SplitValue,
    pub gap: f64,
    pub within_tol: bool,
}

/// `π(f)` against the split superhedge for each claim.
pub fn duality_report(
    t: &TransportInstance,
    fs: &[FuncOnSpace],
    tol: &Tolerances,
) -> Result<Vec<TransportDualityEntry>> {
    fs.iter()
        .map(|f| {
            let value = transport_value(t, f, tol)?;
            let split = superhedge_split(t, f, tol)?;
            let (p, d) = (value.value.to_f64(), split.value.to_f64());
            let gap = if p == d { 0.0 } else { (p - d).abs() };
            let within_tol = gap == 0.0 || tol.gap_ok(p, gap);
            Ok(TransportDualityEntry {
                value,
                split,
                gap,
                within_tol,
            })
        })
        .collect()
}
