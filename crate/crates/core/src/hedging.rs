//! Semistatic superhedging in discrete time.
//!
//! The underlying moves on finite grids `X_1, …, X_T ⊂ (0, ∞)`; paths are
//! enumerated lexicographically. A hedge combines cash `m`, a dynamic
//! position `θ_t` per history node and a static option `g(S_T)` whose
//! model price `max_k ⟨g, q_k⟩` must be nonpositive. Its LP dual runs over
//! the martingale measures whose terminal law lies in `conv(Q)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lp::{
    solve_with, EqualityPolytope, LpProblem, LpStatus, Relation, Residuals, Sense, SolveStats,
};
use crate::model::{check_same_space, FiniteSpace, FuncOnSpace};
use crate::tolerance::Tolerances;

/// Tolerance on `Σ q_k = 1`.
const PROB_TOL: f64 = 1e-12;

/// Wire format of a market.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSpec {
    pub grids: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
    #[serde(rename = "S0", default, skip_serializing_if = "Option::is_none")]
    pub s0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketModel {
    spec: MarketSpec,
    space: Arc<FiniteSpace>,
    /// Grid indices of each path.
    paths: Vec<Vec<usize>>,
    /// `strides[t]` = number of paths sharing a prefix of length `t + 1`.
    strides: Vec<usize>,
}

impl TryFrom<MarketSpec> for MarketModel {
    type Error = crate::Error;

    fn try_from(spec: MarketSpec) -> Result<Self> {
        MarketModel::new(spec.grids, spec.q, spec.s0)
    }
}

impl MarketModel {
    pub fn new(grids: Vec<Vec<f64>>, q: Vec<Vec<f64>>, s0: Option<f64>) -> Result<Self> {
        if grids.len() < 2 {
            return invalid(format!(
                "the horizon must be at least 2, got {}",
                grids.len()
            ));
        }
        for (t, g) in grids.iter().enumerate() {
            if g.is_empty() {
                return invalid(format!("grid {} is empty", t + 1));
            }
            if let Some(x) = g.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                return invalid(format!(
                    "grid {} contains {x}; prices must be strictly positive, since with the state 0 the duality can fail",
                    t + 1
                ));
            }
            if g.windows(2).any(|w| w[0] >= w[1]) {
                return invalid(format!("grid {} must be strictly increasing", t + 1));
            }
        }
        let last = grids.last().expect("horizon checked").len();
        if q.is_empty() {
            return invalid("Q needs at least one probability vector");
        }
        for (k, qk) in q.iter().enumerate() {
            if qk.len() != last {
                return invalid(format!(
                    "Q[{k}] has {} entries, the terminal grid has {last}",
                    qk.len()
                ));
            }
            if let Some(i) = qk.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
                return invalid(format!("Q[{k}] has an invalid weight at index {i}"));
            }
            let total: f64 = qk.iter().sum();
            if (total - 1.0).abs() > PROB_TOL {
                return invalid(format!("Q[{k}] sums to {total}, not 1"));
            }
        }
        if let Some(s) = s0 {
            if !(s.is_finite() && s > 0.0) {
                return invalid(format!("S0 must be strictly positive, got {s}"));
            }
        }

        let t_len = grids.len();
        let mut strides = vec![1; t_len];
        for t in (0..t_len - 1).rev() {
            strides[t] = strides[t + 1] * grids[t + 1].len();
        }
        let total = strides[0] * grids[0].len();
        let paths: Vec<Vec<usize>> = (0..total)
            .map(|p| {
                (0..t_len)
                    .map(|t| (p / strides[t]) % grids[t].len())
                    .collect()
            })
            .collect();
        let labels = paths
            .iter()
            .map(|idx| {
                let xs: Vec<String> = idx
                    .iter()
                    .enumerate()
                    .map(|(t, &i)| grids[t][i].to_string())
                    .collect();
                format!("({})", xs.join(","))
            })
            .collect();
        let space = FiniteSpace::new(labels, vec![1; total], None)?;
        Ok(Self {
            spec: MarketSpec { grids, q, s0 },
            space: Arc::new(space),
            paths,
            strides,
        })
    }

    pub fn spec(&self) -> &MarketSpec {
        &self.spec
    }

    pub fn horizon(&self) -> usize {
        self.spec.grids.len()
    }

    pub fn grids(&self) -> &[Vec<f64>] {
        &self.spec.grids
    }

    pub fn q(&self) -> &[Vec<f64>] {
        &self.spec.q
    }

    pub fn s0(&self) -> Option<f64> {
        self.spec.s0
    }

    pub fn is_extended(&self) -> bool {
        self.spec.s0.is_some()
    }

    /// The same market with the extended block switched on or off.
    pub fn with_s0(&self, s0: Option<f64>) -> Result<Self> {
        Self::new(self.spec.grids.clone(), self.spec.q.clone(), s0)
    }

    /// The path space `Ω = X_1 × … × X_T`.
    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    /// Price path of path index `p`.
    pub fn path(&self, p: usize) -> Vec<f64> {
        self.paths[p]
            .iter()
            .enumerate()
            .map(|(t, &i)| self.spec.grids[t][i])
            .collect()
    }

    fn price(&self, p: usize, t: usize) -> f64 {
        self.spec.grids[t][self.paths[p][t]]
    }

    /// Terminal grid index of path `p`.
    pub fn terminal_index(&self, p: usize) -> usize {
        *self.paths[p].last().expect("nonempty path")
    }

    /// Number of history nodes `X_1 × … × X_{t-1}` for the trade
    /// at time `t` (1-based, `t ≥ 2`).
    pub fn num_nodes(&self, t: usize) -> usize {
        self.spec.grids[..t - 1].iter().map(Vec::len).product()
    }

    /// History node of path `p` at trading time `t` (1-based, `t ≥ 2`).
    pub fn node_of(&self, p: usize, t: usize) -> usize {
        p / self.strides[t - 2]
    }

    /// Offsets of each time's θ block in a flat vector.
    fn theta_offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.horizon());
        let mut acc = 0;
        for t in 2..=self.horizon() {
            off.push(acc);
            acc += self.num_nodes(t);
        }
        off.push(acc);
        off
    }
}

/// A dynamic strategy together with a static option.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    /// `theta[t - 2][node]`: position held over `(t-1, t]`.
    pub theta: Vec<Vec<f64>>,
    /// Static payoff per terminal grid point.
    pub g: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta1: Option<f64>,
}

impl Strategy {
    pub fn zero(m: &MarketModel) -> Self {
        Self {
            theta: (2..=m.horizon())
                .map(|t| vec![0.0; m.num_nodes(t)])
                .collect(),
            g: vec![0.0; m.grids()[m.horizon() - 1].len()],
            theta1: m.s0().map(|_| 0.0),
        }
    }

    fn check_shape(&self, m: &MarketModel) -> Result<()> {
        let ok = self.theta.len() == m.horizon() - 1
            && self
                .theta
                .iter()
                .enumerate()
                .all(|(i, th)| th.len() == m.num_nodes(i + 2))
            && self.g.len() == m.grids()[m.horizon() - 1].len();
        if !ok {
            return invalid("strategy shape does not match the market");
        }
        Ok(())
    }
}

/// `max_k ⟨g, q_k⟩`. Entries of `g` may be `+∞`; they only count where
/// some `q_k` puts mass.
pub fn price_option(m: &MarketModel, g: &[f64]) -> Result<f64> {
    let n = m.grids()[m.horizon() - 1].len();
    if g.len() != n {
        return invalid(format!(
            "option has {} values, the terminal grid has {n}",
            g.len()
        ));
    }
    Ok(m.q()
        .iter()
        .map(|qk| {
            qk.iter()
                .zip(g)
                .filter(|(q, _)| **q > 0.0)
                .fold(0.0, |acc, (q, v)| acc + q * v)
        })
        .fold(f64::NEG_INFINITY, f64::max))
}

/// `Σ_{t≥2} θ_t(ω_{1:t-1})(ω_t - ω_{t-1})`, plus `θ₁(ω₁ - S₀)` in extended mode.
pub fn gains(m: &MarketModel, s: &Strategy, path: usize) -> Result<f64> {
    s.check_shape(m)?;
    if path >= m.num_paths() {
        return invalid(format!("path index {path} out of range"));
    }
    let mut total = 0.0;
    for t in 2..=m.horizon() {
        let node = m.node_of(path, t);
        total += s.theta[t - 2][node] * (m.price(path, t - 1) - m.price(path, t - 2));
    }
    if let (Some(th1), Some(s0)) = (s.theta1, m.s0()) {
        total += th1 * (m.price(path, 0) - s0);
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HedgeStatus {
    Optimal,
    /// Superhedging is unbounded below and `M(Q)` is empty.
    Arbitrage,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HedgePrimal {
    pub status: HedgeStatus,
    pub price: Option<f64>,
    pub strategy: Option<Strategy>,
    pub residuals: Option<Residuals>,
    pub stats: SolveStats,
}

fn check_claim(m: &MarketModel, f: &FuncOnSpace) -> Result<Vec<f64>> {
    check_same_space(m.space(), f.space())?;
    f.finite_values()
        .ok_or_else(|| crate::Error::InvalidInput("hedging claims must be finite".into()))
}

/// `inf {m : m + (θ·S)_T + g(S_T) ≥ f, max_k ⟨g, q_k⟩ ≤ 0}`.
pub fn superhedge_primal(
    m: &MarketModel,
    f: &FuncOnSpace,
    tol: &Tolerances,
) -> Result<HedgePrimal> {
    let fv = check_claim(m, f)?;
    let off = m.theta_offsets();
    let n_theta = *off.last().expect("offsets");
    let nx = m.grids()[m.horizon() - 1].len();
    let g0 = 1 + n_theta;
    let th1 = g0 + nx;
    let nv = th1 + usize::from(m.is_extended());

    let mut c = vec![0.0; nv];
    c[0] = 1.0;
    let mut lp = LpProblem::new(Sense::Min, c);
    for j in 0..nv {
        lp.set_free(j);
    }
    for p in 0..m.num_paths() {
        let mut a = vec![0.0; nv];
        a[0] = 1.0;
        for t in 2..=m.horizon() {
            a[1 + off[t - 2] + m.node_of(p, t)] = m.price(p, t - 1) - m.price(p, t - 2);
        }
        a[g0 + m.terminal_index(p)] = 1.0;
        if let Some(s0) = m.s0() {
            a[th1] = m.price(p, 0) - s0;
        }
        lp.add_row(a, Relation::Ge, fv[p]);
    }
    for qk in m.q() {
        let mut a = vec![0.0; nv];
        a[g0..g0 + nx].copy_from_slice(qk);
        lp.add_row(a, Relation::Le, 0.0);
    }
    let sol = solve_with(&lp, &tol.lp)?;
    match sol.status {
        LpStatus::Optimal => {
            let x = &sol.primal;
            let theta = (2..=m.horizon())
                .map(|t| x[1 + off[t - 2]..1 + off[t - 1]].to_vec())
                .collect();
            Ok(HedgePrimal {
                status: HedgeStatus::Optimal,
                price: Some(sol.value()),
                strategy: Some(Strategy {
                    theta,
                    g: x[g0..g0 + nx].to_vec(),
                    theta1: m.s0().map(|_| x[th1]),
                }),
                residuals: sol.residuals,
                stats: sol.stats,
            })
        }
        LpStatus::Unbounded => Ok(HedgePrimal {
            status: HedgeStatus::Arbitrage,
            price: None,
            strategy: None,
            residuals: None,
            stats: sol.stats,
        }),
        LpStatus::Infeasible => unreachable!("cash alone superhedges a finite claim"),
    }
}

/// The constraint system of `M(Q)` over the variables `(μ over paths, α over Q)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartingalePolytope {
    pub num_paths: usize,
    pub num_q: usize,
    /// Equality rows `a · (μ, α) = b`, all variables nonnegative.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl MartingalePolytope {
    pub fn num_vars(&self) -> usize {
        self.num_paths + self.num_q
    }

    /// `opt ⟨c, μ⟩` over the polytope.
    pub fn to_lp(&self, sense: Sense, c: &[f64]) -> LpProblem {
        let mut obj = c.to_vec();
        obj.resize(self.num_vars(), 0.0);
        let mut lp = LpProblem::new(sense, obj);
        for (row, &b) in self.a.iter().zip(&self.b) {
            lp.add_row(row.clone(), Relation::Eq, b);
        }
        lp
    }

    pub fn to_equality_polytope(&self) -> EqualityPolytope {
        EqualityPolytope::new(self.num_vars(), self.a.clone(), self.b.clone()).expect("finite rows")
    }
}

/// Rows: total mass 1; one martingale row per history node; terminal law
/// `Σ_k α_k q_k`; and `Σ μ(ω)(ω₁ - S₀) = 0` in extended mode. `Σα = 1`
/// follows from the mass and terminal rows.
pub fn martingale_polytope(m: &MarketModel) -> MartingalePolytope {
    let np = m.num_paths();
    let nq = m.q().len();
    let nv = np + nq;
    let mut a = Vec::new();
    let mut b = Vec::new();

    let mut mass = vec![0.0; nv];
    mass[..np].fill(1.0);
    a.push(mass);
    b.push(1.0);

    for t in 2..=m.horizon() {
        let nodes = m.num_nodes(t);
        let mut rows = vec![vec![0.0; nv]; nodes];
        for p in 0..np {
            rows[m.node_of(p, t)][p] = m.price(p, t - 1) - m.price(p, t - 2);
        }
        for r in rows {
            a.push(r);
            b.push(0.0);
        }
    }

    let nx = m.grids()[m.horizon() - 1].len();
    for x in 0..nx {
        let mut row = vec![0.0; nv];
        for (p, r) in row.iter_mut().enumerate().take(np) {
            if m.terminal_index(p) == x {
                *r = 1.0;
            }
        }
        for (k, qk) in m.q().iter().enumerate() {
            row[np + k] = -qk[x];
        }
        a.push(row);
        b.push(0.0);
    }

    if let Some(s0) = m.s0() {
        let mut row = vec![0.0; nv];
        for (p, r) in row.iter_mut().enumerate().take(np) {
            *r = m.price(p, 0) - s0;
        }
        a.push(row);
        b.push(0.0);
    }

    MartingalePolytope {
        num_paths: np,
        num_q: nq,
        a,
        b,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingalePoint {
    pub mu: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl MartingalePoint {
    /// Largest violation of the defining constraints (including `Σα = 1`
    /// and sign constraints).
    pub fn violation(&self, m: &MarketModel) -> f64 {
        let poly = martingale_polytope(m);
        if self.mu.len() != poly.num_paths || self.alpha.len() != poly.num_q {
            return f64::INFINITY;
        }
        let x: Vec<f64> = self.mu.iter().chain(&self.alpha).copied().collect();
        let rows = poly
            .a
            .iter()
            .zip(&poly.b)
            .map(|(row, b)| (crate::model::dot(row, &x) - b).abs());
        let neg = x.iter().map(|v| -v);
        let alpha_mass = (self.alpha.iter().sum::<f64>() - 1.0).abs();
        rows.chain(neg).fold(alpha_mass, f64::max)
    }

    pub fn verify(&self, m: &MarketModel, tol: f64) -> bool {
        self.violation(m) <= tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HedgeDual {
    pub status: HedgeStatus,
    pub value: Option<f64>,
    pub point: Option<MartingalePoint>,
    pub residuals: Option<Residuals>,
    pub stats: SolveStats,
}

/// `sup {⟨f, μ⟩ : μ ∈ M(Q)}`.
pub fn superhedge_dual(m: &MarketModel, f: &FuncOnSpace, tol: &Tolerances) -> Result<HedgeDual> {
    let fv = check_claim(m, f)?;
    let poly = martingale_polytope(m);
    let sol = solve_with(&poly.to_lp(Sense::Max, &fv), &tol.lp)?;
    match sol.status {
        LpStatus::Optimal => {
            let clip = |s: &[f64]| s.iter().map(|v| v.max(0.0)).collect::<Vec<_>>();
            Ok(HedgeDual {
                status: HedgeStatus::Optimal,
                value: Some(sol.value()),
                point: Some(MartingalePoint {
                    mu: clip(&sol.primal[..poly.num_paths]),
                    alpha: clip(&sol.primal[poly.num_paths..]),
                }),
                residuals: sol.residuals,
                stats: sol.stats,
            })
        }
        LpStatus::Infeasible => Ok(HedgeDual {
            status: HedgeStatus::Arbitrage,
            value: None,
            point: None,
            residuals: None,
            stats: sol.stats,
        }),
        LpStatus::Unbounded => unreachable!("M(Q) consists of probability measures"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Attainability {
    Member,
    NonMember,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttainabilityReport {
    pub verdict: Attainability,
    pub primal: HedgePrimal,
    pub dual: HedgeDual,
    /// `|primal - dual|` when both are optimal.
    pub gap: Option<f64>,
    /// The dual side reaches the same verdict.
    pub consistent: bool,
}

/// Is `f` superhedgeable at zero cost, i.e. `f ≤ (θ·S)_T + g(S_T)` with
/// `g` priced at most 0? Equivalent to `⟨f, μ⟩ ≤ 0` on `M(Q)`.
pub fn attainability_check(
    m: &MarketModel,
    f: &FuncOnSpace,
    tol: &Tolerances,
) -> Result<AttainabilityReport> {
    let primal = superhedge_primal(m, f, tol)?;
    let dual = superhedge_dual(m, f, tol)?;
    let p = primal.price.unwrap_or(f64::NEG_INFINITY);
    let d = dual.value.unwrap_or(f64::NEG_INFINITY);
    let verdict = if p <= tol.verdict {
        Attainability::Member
    } else {
        Attainability::NonMember
    };
    let gap = match (primal.price, dual.value) {
        (Some(p), Some(d)) => Some((p - d).abs()),
        _ => None,
    };
    let consistent =
        (d <= tol.verdict) == (verdict == Attainability::Member) && primal.status == dual.status;
    Ok(AttainabilityReport {
        verdict,
        primal,
        dual,
        gap,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9
    }

    fn standard() -> MarketModel {
        MarketModel::new(
            vec![vec![2.0], vec![1.0, 2.0, 3.0]],
            vec![vec![1.0 / 3.0; 3]],
            None,
        )
        .unwrap()
    }

    fn claim(m: &MarketModel, v: &[f64]) -> FuncOnSpace {
        FuncOnSpace::from_reals(m.space().clone(), v).unwrap()
    }

    #[test]
    fn validation() {
        assert!(MarketModel::new(vec![vec![1.0]], vec![vec![1.0]], None).is_err());
        assert!(MarketModel::new(vec![vec![0.0], vec![1.0]], vec![vec![1.0]], None).is_err());
        assert!(
            MarketModel::new(vec![vec![1.0], vec![2.0, 1.0]], vec![vec![0.5, 0.5]], None).is_err()
        );
        assert!(
            MarketModel::new(vec![vec![1.0], vec![1.0, 2.0]], vec![vec![0.5, 0.6]], None).is_err()
        );
        assert!(MarketModel::new(vec![vec![1.0], vec![1.0, 2.0]], vec![], None).is_err());
        assert!(MarketModel::new(
            vec![vec![1.0], vec![1.0, 2.0]],
            vec![vec![0.5, 0.5]],
            Some(-1.0)
        )
        .is_err());
    }

    #[test]
    fn path_enumeration() {
        let m = MarketModel::new(
            vec![vec![1.0, 2.0], vec![1.0, 2.0, 3.0], vec![4.0, 5.0]],
            vec![vec![0.5, 0.5]],
            None,
        )
        .unwrap();
        assert_eq!(m.num_paths(), 12);
        assert_eq!(m.path(0), vec![1.0, 1.0, 4.0]);
        assert_eq!(m.path(1), vec![1.0, 1.0, 5.0]);
        assert_eq!(m.path(11), vec![2.0, 3.0, 5.0]);
        assert_eq!(m.num_nodes(2), 2);
        assert_eq!(m.num_nodes(3), 6);
        assert_eq!(m.node_of(7, 2), 1);
        assert_eq!(m.node_of(7, 3), 3);
        assert_eq!(m.space().labels()[7], "(2,1,5)");
    }

    #[test]
    fn option_prices() {
        let m = standard();
        assert!(close(price_option(&m, &[-1.0, 0.0, 1.0]).unwrap(), 0.0));
        assert!(close(price_option(&m, &[2.5; 3]).unwrap(), 2.5));
        let m = MarketModel::new(
            vec![vec![2.0], vec![1.0, 2.0, 3.0]],
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]],
            None,
        )
        .unwrap();
        assert!(close(price_option(&m, &[-1.0, 0.0, 5.0]).unwrap(), 5.0));
        assert!(close(
            price_option(&m, &[-1.0, f64::INFINITY, 5.0]).unwrap(),
            5.0
        ));
    }

    #[test]
    fn gains_examples() {
        let m =
            MarketModel::new(vec![vec![2.0], vec![1.0, 3.0]], vec![vec![0.5, 0.5]], None).unwrap();
        let mut s = Strategy::zero(&m);
        s.theta[0][0] = 1.0;
        assert!(close(gains(&m, &s, 1).unwrap(), 1.0));
        s.theta[0][0] = -1.0;
        assert!(close(gains(&m, &s, 0).unwrap(), 1.0));

        let m = MarketModel::new(
            vec![vec![1.0, 2.0], vec![1.0, 2.0], vec![1.0, 2.0]],
            vec![vec![0.5, 0.5]],
            Some(1.5),
        )
        .unwrap();
        let s = Strategy {
            theta: vec![vec![3.0, -2.0], vec![1.0, 4.0, -1.0, 0.5]],
            g: vec![0.0, 0.0],
            theta1: Some(7.0),
        };
        // constant paths (1,1,1) and (2,2,2) only see the θ₁ term
        assert!(close(gains(&m, &s, 0).unwrap(), 7.0 * -0.5));
        assert!(close(gains(&m, &s, 7).unwrap(), 7.0 * 0.5));
    }

    #[test]
    fn primal_examples() {
        let tol = Tolerances::default();
        let m = standard();
        let f = claim(&m, &[1.0, 0.0, 1.0]);
        let p = superhedge_primal(&m, &f, &tol).unwrap();
        assert_eq!(p.status, HedgeStatus::Optimal);
        assert!(close(p.price.unwrap(), 2.0 / 3.0));
        let s = p.strategy.unwrap();
        assert!(price_option(&m, &s.g).unwrap() <= 1e-9);
        for path in 0..3 {
            let cover =
                p.price.unwrap() + gains(&m, &s, path).unwrap() + s.g[m.terminal_index(path)];
            assert!(cover >= f.value(path).to_f64() - 1e-9);
        }

        let zero = claim(&m, &[0.0; 3]);
        assert!(close(
            superhedge_primal(&m, &zero, &tol).unwrap().price.unwrap(),
            0.0
        ));
        let c = claim(&m, &[1.7; 3]);
        assert!(close(
            superhedge_primal(&m, &c, &tol).unwrap().price.unwrap(),
            1.7
        ));

        let arb =
            MarketModel::new(vec![vec![2.0], vec![3.0, 4.0]], vec![vec![0.5, 0.5]], None).unwrap();
        let p = superhedge_primal(&arb, &claim(&arb, &[0.0, 0.0]), &tol).unwrap();
        assert_eq!(p.status, HedgeStatus::Arbitrage);
        let d = superhedge_dual(&arb, &claim(&arb, &[0.0, 0.0]), &tol).unwrap();
        assert_eq!(d.status, HedgeStatus::Arbitrage);
    }

    #[test]
    fn polytope_examples() {
        let tol = Tolerances::default();
        let m =
            MarketModel::new(vec![vec![2.0], vec![1.0, 3.0]], vec![vec![0.5, 0.5]], None).unwrap();
        let v = martingale_polytope(&m)
            .to_equality_polytope()
            .vertices(&Default::default())
            .unwrap();
        assert_eq!(v.len(), 1);
        assert!(close(v[0][0], 0.5) && close(v[0][1], 0.5) && close(v[0][2], 1.0));

        let m = MarketModel::new(vec![vec![2.0], vec![2.0]], vec![vec![1.0]], None).unwrap();
        let d = superhedge_dual(&m, &claim(&m, &[3.0]), &tol).unwrap();
        assert_eq!(d.point.unwrap().mu, vec![1.0]);

        let arb =
            MarketModel::new(vec![vec![2.0], vec![3.0, 4.0]], vec![vec![0.5, 0.5]], None).unwrap();
        assert!(martingale_polytope(&arb)
            .to_equality_polytope()
            .vertices(&Default::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn dual_examples() {
        let tol = Tolerances::default();
        let m = standard();
        let d = superhedge_dual(&m, &claim(&m, &[1.0, 0.0, 1.0]), &tol).unwrap();
        assert!(close(d.value.unwrap(), 2.0 / 3.0));
        let pt = d.point.unwrap();
        assert!(pt.mu.iter().all(|&w| close(w, 1.0 / 3.0)));
        assert!(pt.verify(&m, 1e-9));

        // a terminal payoff is priced by the single q
        let d = superhedge_dual(&m, &claim(&m, &[4.0, -1.0, 0.5]), &tol).unwrap();
        assert!(close(
            d.value.unwrap(),
            price_option(&m, &[4.0, -1.0, 0.5]).unwrap()
        ));

        let mut s = Strategy::zero(&m);
        s.theta[0][0] = 2.5;
        let g: Vec<f64> = (0..3).map(|p| gains(&m, &s, p).unwrap()).collect();
        assert!(close(
            superhedge_dual(&m, &claim(&m, &g), &tol)
                .unwrap()
                .value
                .unwrap(),
            0.0
        ));
    }

    #[test]
    fn attainability_examples() {
        let tol = Tolerances::default();
        let m = standard();
        let mut s = Strategy::zero(&m);
        s.theta[0][0] = -1.5;
        s.g = vec![1.0, -2.0, 1.0];
        let f: Vec<f64> = (0..3)
            .map(|p| gains(&m, &s, p).unwrap() + s.g[m.terminal_index(p)])
            .collect();
        let r = attainability_check(&m, &claim(&m, &f), &tol).unwrap();
        assert_eq!(r.verdict, Attainability::Member);
        assert!(r.consistent);

        let r = attainability_check(&m, &claim(&m, &[0.1; 3]), &tol).unwrap();
        assert_eq!(r.verdict, Attainability::NonMember);
        assert!(r.consistent);
        let witness = r.dual.point.unwrap();
        assert!(witness.verify(&m, 1e-9));
        assert!(close(witness.mu.iter().sum::<f64>() * 0.1, 0.1));

        let r = attainability_check(
            &m,
            &claim(&m, &[1.0 - 2.0 / 3.0, -2.0 / 3.0, 1.0 - 2.0 / 3.0]),
            &tol,
        )
        .unwrap();
        assert_eq!(r.verdict, Attainability::Member);
        assert!(r.consistent && r.gap.unwrap() <= 1e-9);
    }

    #[test]
    fn extended_mode() {
        let tol = Tolerances::default();
        let base = MarketModel::new(
            vec![vec![1.0, 3.0], vec![1.0, 2.0, 3.0]],
            vec![vec![0.25, 0.5, 0.25], vec![0.5, 0.0, 0.5]],
            None,
        )
        .unwrap();
        let ext = base.with_s0(Some(2.0)).unwrap();
        let f = claim(&base, &[0.0, 1.0, 3.0, 2.0, 0.0, 1.0]);
        let fe = claim(&ext, &[0.0, 1.0, 3.0, 2.0, 0.0, 1.0]);
        let pb = superhedge_primal(&base, &f, &tol).unwrap().price.unwrap();
        let pe = superhedge_primal(&ext, &fe, &tol).unwrap();
        assert!(pe.price.unwrap() <= pb + 1e-9);
        let de = superhedge_dual(&ext, &fe, &tol).unwrap();
        assert!(close(pe.price.unwrap(), de.value.unwrap()));
        let pt = de.point.unwrap();
        assert!(pt.verify(&ext, 1e-9));
        let bary: f64 = (0..ext.num_paths())
            .map(|p| pt.mu[p] * ext.path(p)[0])
            .sum();
        assert!(close(bary, 2.0));
    }
}
