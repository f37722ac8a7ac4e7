//! Two-phase simplex on a dense tableau.
//!
//! Pricing is Dantzig's rule until a run of degenerate pivots is seen, after
//! which the phase switches to Bland's rule for good. The tableau is rebuilt
//! from an LU factorization of the basis periodically and once more at the
//! end, so reported primal and dual vectors come from a fresh solve with the
//! final basis rather than from accumulated pivot updates.

use nalgebra::DMatrix;

use super::certificate::check_certificates;
use super::linalg::lu_solve;
use super::{LpProblem, LpSolution, LpStatus, Relation, Sense, SolveStats, SolverOptions};
use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const DEGENERATE_STREAK: usize = 50;
const REFACTOR_EVERY: usize = 100;
const MAX_CLEANUPS: usize = 4;

/// Original variable `x_j = offset + Σ coef · z_col`.
#[derive(Debug, Clone)]
struct VarMap {
    offset: f64,
    cols: Vec<(usize, f64)>,
}

/// `min cost·z` s.t. `A z = b`, `b ≥ 0`, `z ≥ 0` except on free columns.
///
/// Free columns are never split: once basic they stay basic (they never
/// block a ratio test), which keeps the many free variables of the hedging
/// LPs out of long degenerate pivot sequences.
struct StdForm {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    cost: Vec<f64>,
    /// Columns at or past this index are artificial.
    art_start: usize,
    /// `-1` where a row was negated to make its rhs nonnegative.
    row_sign: Vec<f64>,
    initial_basis: Vec<usize>,
    vars: Vec<VarMap>,
    n_struct: usize,
    free: Vec<bool>,
}

fn build_std(p: &LpProblem) -> StdForm {
    let n = p.num_vars();
    let flip = if p.sense == Sense::Max { -1.0 } else { 1.0 };

    let mut vars = Vec::with_capacity(n);
    let mut n_struct = 0;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new(); // z_col ≤ width
    let mut free_cols = Vec::new();
    for j in 0..n {
        let b = p.bound(j);
        let vm = match (b.lower, b.upper) {
            (Some(l), u) => {
                let col = n_struct;
                n_struct += 1;
                if let Some(u) = u {
                    bound_rows.push((col, u - l));
                }
                VarMap {
                    offset: l,
                    cols: vec![(col, 1.0)],
                }
            }
            (None, Some(u)) => {
                let col = n_struct;
                n_struct += 1;
                VarMap {
                    offset: u,
                    cols: vec![(col, -1.0)],
                }
            }
            (None, None) => {
                let col = n_struct;
                n_struct += 1;
                free_cols.push(col);
                VarMap {
                    offset: 0.0,
                    cols: vec![(col, 1.0)],
                }
            }
        };
        vars.push(vm);
    }

    // rows over z, before slacks
    let mut rows: Vec<(Vec<f64>, Relation, f64)> =
        Vec::with_capacity(p.rows.len() + bound_rows.len());
    for row in &p.rows {
        let mut coeffs = vec![0.0; n_struct];
        let mut rhs = row.rhs;
        for (j, &a) in row.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            rhs -= a * vars[j].offset;
            for &(col, c) in &vars[j].cols {
                coeffs[col] += a * c;
            }
        }
        rows.push((coeffs, row.relation, rhs));
    }
    for &(col, width) in &bound_rows {
        let mut coeffs = vec![0.0; n_struct];
        coeffs[col] = 1.0;
        rows.push((coeffs, Relation::Le, width));
    }

    let mut cost = vec![0.0; n_struct];
    for (j, &c) in p.objective.iter().enumerate() {
        for &(col, s) in &vars[j].cols {
            cost[col] += flip * c * s;
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let mut row_sign = vec![1.0; m];
    let mut needs_art = vec![false; m];
    let mut slack_of = vec![None; m];
    let mut next_slack = n_struct;
    for (i, (_, rel, rhs)) in rows.iter().enumerate() {
        let slack_coef = match rel {
            Relation::Le => Some(1.0),
            Relation::Ge => Some(-1.0),
            Relation::Eq => None,
        };
        if let Some(s) = slack_coef {
            slack_of[i] = Some((next_slack, s));
            next_slack += 1;
        }
        if *rhs < 0.0 {
            row_sign[i] = -1.0;
        }
        let effective = slack_coef.map(|s| s * row_sign[i]);
        needs_art[i] = effective != Some(1.0);
    }
    let art_start = n_struct + n_slack;
    let n_art = needs_art.iter().filter(|&&x| x).count();
    let ncols = art_start + n_art;

    let mut a = vec![vec![0.0; ncols]; m];
    let mut b = vec![0.0; m];
    let mut initial_basis = vec![0; m];
    let mut next_art = art_start;
    for (i, (coeffs, _, rhs)) in rows.into_iter().enumerate() {
        let s = row_sign[i];
        for (k, v) in coeffs.into_iter().enumerate() {
            a[i][k] = s * v;
        }
        b[i] = s * rhs;
        if let Some((col, c)) = slack_of[i] {
            a[i][col] = s * c;
            if !needs_art[i] {
                initial_basis[i] = col;
            }
        }
        if needs_art[i] {
            a[i][next_art] = 1.0;
            initial_basis[i] = next_art;
            next_art += 1;
        }
    }
    cost.resize(ncols, 0.0);
    let mut free = vec![false; ncols];
    for c in free_cols {
        free[c] = true;
    }

    StdForm {
        a,
        b,
        cost,
        art_start,
        row_sign,
        initial_basis,
        vars,
        n_struct,
        free,
    }
}

struct Tableau {
    m: usize,
    width: usize, // ncols + 1, last entry is the rhs
    t: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn new(sf: &StdForm) -> Self {
        let m = sf.a.len();
        let ncols = sf.cost.len();
        let width = ncols + 1;
        let mut t = vec![0.0; m * width];
        for i in 0..m {
            t[i * width..i * width + ncols].copy_from_slice(&sf.a[i]);
            t[i * width + ncols] = sf.b[i];
        }
        Self {
            m,
            width,
            t,
            basis: sf.initial_basis.clone(),
        }
    }

    fn ncols(&self) -> usize {
        self.width - 1
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.width + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.t[r * self.width + self.width - 1]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.t[r * w + c];
        for k in 0..w {
            self.t[r * w + k] /= p;
        }
        self.t[r * w + c] = 1.0;
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_mut(w).chain(after.chunks_mut(w)) {
            let f = row[c];
            if f != 0.0 {
                for k in 0..w {
                    row[k] -= f * prow[k];
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Rebuilds the tableau as `B⁻¹ [A | b]`. Returns false if the basis
    /// matrix is numerically singular, leaving the tableau untouched.
    fn refactor(&mut self, sf: &StdForm) -> bool {
        let m = self.m;
        if m == 0 {
            return true;
        }
        let bmat = DMatrix::from_fn(m, m, |i, k| sf.a[i][self.basis[k]]);
        let ncols = self.ncols();
        let rhs = DMatrix::from_fn(
            m,
            self.width,
            |i, k| if k < ncols { sf.a[i][k] } else { sf.b[i] },
        );
        match lu_solve(bmat, &rhs, 1e-13) {
            Some(x) => {
                for i in 0..m {
                    for k in 0..self.width {
                        self.t[i * self.width + k] = x[(i, k)];
                    }
                }
                for (i, &bc) in self.basis.iter().enumerate() {
                    for r in 0..m {
                        self.t[r * self.width + bc] = if r == i { 1.0 } else { 0.0 };
                    }
                }
                true
            }
            None => false,
        }
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        d.truncate(self.ncols());
        for r in 0..self.m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.t[r * self.width..r * self.width + self.ncols()];
                for (dj, &a) in d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        for &bc in &self.basis {
            d[bc] = 0.0;
        }
        d
    }

    fn objective(&self, cost: &[f64]) -> f64 {
        (0..self.m).fold(0.0, |acc, r| acc + cost[self.basis[r]] * self.rhs(r))
    }
}

enum PhaseOutcome {
    Optimal,
    /// Entering column and its direction of travel.
    Unbounded(usize, f64),
}

fn run_phase(
    tab: &mut Tableau,
    sf: &StdForm,
    cost: &[f64],
    allowed: usize,
    opts: &SolverOptions,
    stats: &mut SolveStats,
    phase_one: bool,
) -> Result<PhaseOutcome> {
    let mut degenerate_run = 0usize;
    let mut bland = false;
    let mut since_refactor = 0usize;
    let scale = 1.0 + sf.b.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    loop {
        // a zero artificial sum is optimal for phase one; pivoting on would
        // only wander through degenerate bases
        if phase_one && tab.objective(cost) <= 1e-13 * scale {
            return Ok(PhaseOutcome::Optimal);
        }
        if stats.pivots >= opts.max_iterations {
            return Err(Error::Stalled {
                iterations: stats.pivots,
            });
        }
        let d = tab.reduced_costs(cost);
        let Some((col, dir)) = entering(tab, sf, &d, allowed, bland) else {
            return Ok(PhaseOutcome::Optimal);
        };

        let Some((row, ratio)) = ratio_test(tab, sf, col, dir, bland) else {
            return Ok(PhaseOutcome::Unbounded(col, dir));
        };

        tab.pivot(row, col);
        stats.pivots += 1;
        if phase_one {
            stats.phase_one_iterations += 1;
        }
        if ratio <= 1e-12 {
            degenerate_run += 1;
            if degenerate_run >= DEGENERATE_STREAK {
                bland = true;
            }
        } else {
            degenerate_run = 0;
        }
        since_refactor += 1;
        if since_refactor >= REFACTOR_EVERY {
            since_refactor = 0;
            if tab.refactor(sf) {
                stats.refactorizations += 1;
            }
        }
    }
}

/// Entering column and direction (`+1` increase, `-1` decrease). Nonbasic
/// free columns go first: they can move either way and, once basic, never
/// leave. Otherwise Dantzig's rule, or Bland's when `bland` is set.
fn entering(
    tab: &Tableau,
    sf: &StdForm,
    d: &[f64],
    allowed: usize,
    bland: bool,
) -> Option<(usize, f64)> {
    let free =
        (0..allowed).filter(|&j| sf.free[j] && d[j].abs() > COST_TOL && !tab.basis.contains(&j));
    let free = if bland {
        free.min()
    } else {
        free.max_by(|&i, &j| d[i].abs().total_cmp(&d[j].abs()).then(j.cmp(&i)))
    };
    if let Some(j) = free {
        return Some((j, -d[j].signum()));
    }
    let bounded = (0..allowed).filter(|&j| !sf.free[j] && d[j] < -COST_TOL);
    let col = if bland {
        bounded.min()
    } else {
        bounded.min_by(|&i, &j| d[i].total_cmp(&d[j]).then(i.cmp(&j)))
    };
    col.map(|j| (j, 1.0))
}

/// Leaving row for entering column `col` moving in direction `dir`: the
/// minimum ratio over rows whose basic variable is bounded and decreases,
/// or `None` if the column is unbounded.
///
/// Ties, which are the rule in degenerate stretches, go to the largest
/// pivot element so noise-sized pivots are avoided; under Bland's rule they
/// go to the smallest basic index instead.
fn ratio_test(
    tab: &Tableau,
    sf: &StdForm,
    col: usize,
    dir: f64,
    bland: bool,
) -> Option<(usize, f64)> {
    let rows: Vec<(usize, f64, f64)> = (0..tab.m)
        .filter(|&r| !sf.free[tab.basis[r]])
        .filter_map(|r| {
            let a = dir * tab.at(r, col);
            (a > PIVOT_TOL).then(|| (r, tab.rhs(r).max(0.0) / a, a))
        })
        .collect();
    let min = rows.iter().map(|x| x.1).reduce(f64::min)?;
    let tied = rows
        .into_iter()
        .filter(|x| x.1 - min <= 1e-12 * (1.0 + min.abs()));
    let pick = if bland {
        tied.min_by_key(|x| tab.basis[x.0])
    } else {
        tied.max_by(|x, y| {
            x.2.total_cmp(&y.2)
                .then(tab.basis[y.0].cmp(&tab.basis[x.0]))
        })
    };
    pick.map(|(r, ratio, _)| (r, ratio))
}

/// Pivots basic artificials out of the basis where a structural or slack
/// column can replace them. Artificials left behind sit in redundant rows.
fn drive_out_artificials(tab: &mut Tableau, art_start: usize, stats: &mut SolveStats) {
    for r in 0..tab.m {
        if tab.basis[r] < art_start {
            continue;
        }
        let candidate = (0..art_start)
            .filter(|&j| !tab.basis.contains(&j))
            .find(|&j| tab.at(r, j).abs() > 1e-7);
        if let Some(j) = candidate {
            tab.pivot(r, j);
            stats.pivots += 1;
        }
    }
}

/// Solves `p` with the given options.
pub fn solve_with(p: &LpProblem, opts: &SolverOptions) -> Result<LpSolution> {
    p.validate()?;
    let sf = build_std(p);
    let mut tab = Tableau::new(&sf);
    let mut stats = SolveStats::default();
    let ncols = sf.cost.len();

    if sf.art_start < ncols {
        let mut phase1_cost = vec![0.0; ncols];
        for c in phase1_cost.iter_mut().skip(sf.art_start) {
            *c = 1.0;
        }
        // phase one is bounded below by zero
        run_phase(&mut tab, &sf, &phase1_cost, ncols, opts, &mut stats, true)?;
        if tab.refactor(&sf) {
            stats.refactorizations += 1;
        }
        let infeas = tab.objective(&phase1_cost);
        let scale = 1.0 + sf.b.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if infeas > 1e-8 * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                objective: None,
                primal: Vec::new(),
                dual: Vec::new(),
                residuals: None,
                ray: None,
                stats,
            });
        }
        drive_out_artificials(&mut tab, sf.art_start, &mut stats);
    }

    let mut cleanups = 0;
    loop {
        match run_phase(
            &mut tab,
            &sf,
            &sf.cost,
            sf.art_start,
            opts,
            &mut stats,
            false,
        )? {
            PhaseOutcome::Unbounded(col, dir) => {
                let ray = unbounded_ray(&tab, &sf, col, dir);
                return Ok(LpSolution {
                    status: LpStatus::Unbounded,
                    objective: None,
                    primal: Vec::new(),
                    dual: Vec::new(),
                    residuals: None,
                    ray: Some(ray),
                    stats,
                });
            }
            PhaseOutcome::Optimal => {}
        }
        if tab.refactor(&sf) {
            stats.refactorizations += 1;
        }
        let d = tab.reduced_costs(&sf.cost);
        let still_optimal = d[..sf.art_start]
            .iter()
            .zip(&sf.free)
            .all(|(&x, &free)| x >= -COST_TOL && (!free || x <= COST_TOL));
        let feasible = (0..tab.m).all(|r| sf.free[tab.basis[r]] || tab.rhs(r) >= -opts.feas_tol);
        if still_optimal && feasible {
            break;
        }
        cleanups += 1;
        if cleanups > MAX_CLEANUPS {
            return Err(Error::Inaccurate(
                "basis keeps losing optimality after refactorization".into(),
            ));
        }
    }

    let sol = extract(p, &sf, &tab, stats)?;
    let res = check_certificates(p, &sol);
    if !res.within(opts) {
        return Err(Error::Inaccurate(format!(
            "residuals exceed tolerance: primal {:.3e}, dual {:.3e}, complementarity {:.3e}, gap {:.3e}",
            res.primal_infeasibility, res.dual_infeasibility, res.complementarity, res.duality_gap
        )));
    }
    Ok(LpSolution {
        residuals: Some(res),
        ..sol
    })
}

fn extract(p: &LpProblem, sf: &StdForm, tab: &Tableau, stats: SolveStats) -> Result<LpSolution> {
    let m = tab.m;
    let ncols = sf.cost.len();
    let mut z = vec![0.0; ncols];
    let mut y_std = vec![0.0; m];
    if m > 0 {
        let bmat = DMatrix::from_fn(m, m, |i, k| sf.a[i][tab.basis[k]]);
        let bvec = DMatrix::from_fn(m, 1, |i, _| sf.b[i]);
        let xb = lu_solve(bmat.clone(), &bvec, 1e-14)
            .ok_or_else(|| Error::Inaccurate("final basis is singular".into()))?;
        for (k, &bc) in tab.basis.iter().enumerate() {
            let v = xb[(k, 0)];
            z[bc] = if sf.free[bc] { v } else { v.max(0.0) };
        }
        let cb = DMatrix::from_fn(m, 1, |k, _| sf.cost[tab.basis[k]]);
        let y = lu_solve(bmat.transpose(), &cb, 1e-14)
            .ok_or_else(|| Error::Inaccurate("final basis is singular".into()))?;
        for i in 0..m {
            y_std[i] = y[(i, 0)];
        }
    }

    let primal: Vec<f64> = sf
        .vars
        .iter()
        .map(|vm| {
            vm.cols
                .iter()
                .fold(vm.offset, |acc, &(c, s)| acc + s * z[c])
        })
        .collect();
    let flip = if p.sense == Sense::Max { -1.0 } else { 1.0 };
    let dual: Vec<f64> = (0..p.rows.len())
        .map(|i| flip * sf.row_sign[i] * y_std[i])
        .collect();
    let objective = super::certificate::dot(&p.objective, &primal);
    debug_assert!(sf.n_struct <= ncols);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective: Some(objective),
        primal,
        dual,
        residuals: None,
        ray: None,
        stats,
    })
}

fn unbounded_ray(tab: &Tableau, sf: &StdForm, col: usize, dir: f64) -> Vec<f64> {
    let mut dz = vec![0.0; sf.cost.len()];
    dz[col] = dir;
    for r in 0..tab.m {
        dz[tab.basis[r]] -= dir * tab.at(r, col);
    }
    sf.vars
        .iter()
        .map(|vm| vm.cols.iter().fold(0.0, |acc, &(c, s)| acc + s * dz[c]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::*;

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * (1.0 + b.abs())
    }

    #[test]
    fn textbook_max() {
        let mut p = LpProblem::new(Sense::Max, vec![1.0, 1.0]);
        p.add_row(vec![1.0, 1.0], Relation::Le, 1.0);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(approx(s.value(), 1.0));
        assert!(approx(s.dual[0], 1.0));
        let r = s.residuals.unwrap();
        assert_eq!(r.primal_infeasibility, 0.0);
        assert_eq!(r.dual_infeasibility, 0.0);
        assert_eq!(r.complementarity, 0.0);
    }

    #[test]
    fn infeasible() {
        let mut p = LpProblem::new(Sense::Max, vec![1.0]);
        p.add_row(vec![1.0], Relation::Le, -1.0);
        assert_eq!(solve(&p).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_with_ray() {
        let p = LpProblem::new(Sense::Max, vec![1.0]);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
        assert_eq!(s.ray, Some(vec![1.0]));
    }

    #[test]
    fn no_rows_min_is_at_lower_bounds() {
        let mut p = LpProblem::new(Sense::Min, vec![1.0, -1.0]);
        p.set_bounds(0, Some(2.0), None);
        p.set_bounds(1, None, Some(3.0));
        let s = solve(&p).unwrap();
        assert!(approx(s.value(), -1.0));
        assert_eq!(s.primal, vec![2.0, 3.0]);
    }

    #[test]
    fn free_variables_and_equalities() {
        // min x + y s.t. x - y = 1, x + 2y >= -2, x, y free
        let mut p = LpProblem::new(Sense::Min, vec![1.0, 1.0]);
        p.set_free(0).set_free(1);
        p.add_row(vec![1.0, -1.0], Relation::Eq, 1.0);
        p.add_row(vec![1.0, 2.0], Relation::Ge, -2.0);
        let s = solve(&p).unwrap();
        // x = y + 1, 3y + 1 >= -2 -> y >= -1, obj = 2y + 1 -> -1
        assert!(approx(s.value(), -1.0));
        assert!(approx(s.primal[0], 0.0) && approx(s.primal[1], -1.0));
        // shadow price of the >= row: d obj / d b = 2/3
        assert!(approx(s.dual[1], 2.0 / 3.0));
        assert!(approx(s.dual[0], 1.0 / 3.0));
    }

    #[test]
    fn boxed_variable() {
        let mut p = LpProblem::new(Sense::Max, vec![3.0, 2.0]);
        p.set_bounds(0, Some(-1.0), Some(1.0));
        p.add_row(vec![1.0, 1.0], Relation::Le, 4.0);
        let s = solve(&p).unwrap();
        assert!(approx(s.value(), 3.0 + 6.0));
    }

    #[test]
    fn redundant_equalities() {
        let mut p = LpProblem::new(Sense::Max, vec![1.0, 2.0]);
        p.add_row(vec![1.0, 1.0], Relation::Eq, 1.0);
        p.add_row(vec![2.0, 2.0], Relation::Eq, 2.0);
        let s = solve(&p).unwrap();
        assert!(approx(s.value(), 2.0));
    }

    #[test]
    fn deterministic() {
        let mut p = LpProblem::new(Sense::Max, vec![1.0, 2.0, -0.5]);
        p.add_row(vec![1.0, 1.0, 1.0], Relation::Le, 3.0);
        p.add_row(vec![0.5, 2.0, -1.0], Relation::Ge, 0.25);
        p.add_row(vec![1.0, -1.0, 0.0], Relation::Eq, 0.0);
        let a = solve(&p).unwrap();
        let b = solve(&p).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn stall_is_an_error() {
        let mut p = LpProblem::new(Sense::Max, vec![1.0, 1.0]);
        p.add_row(vec![1.0, 2.0], Relation::Le, 4.0);
        p.add_row(vec![3.0, 1.0], Relation::Le, 6.0);
        let opts = SolverOptions {
            max_iterations: 1,
            ..SolverOptions::default()
        };
        assert!(matches!(solve_with(&p, &opts), Err(Error::Stalled { .. })));
    }
}
