use itertools::Itertools;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::linalg::{independent_rows, lu_solve};
use super::{LpProblem, Relation, Sense};
use crate::error::{Error, Result};

/// `{x ≥ 0 : A x ≤ b}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyhedron {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    num_vars: usize,
}

impl Polyhedron {
    pub fn new(num_vars: usize, a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        check_shape(num_vars, &a, &b)?;
        Ok(Self { a, b, num_vars })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_rows(&self) -> usize {
        self.a.len()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.num_vars
            && x.iter().all(|&v| v >= -tol)
            && self
                .a
                .iter()
                .zip(&self.b)
                .all(|(row, &b)| super::certificate::dot(row, x) <= b + tol)
    }

    /// Largest violation of `x ≥ 0` or a row.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let neg = x.iter().fold(0.0f64, |m, &v| m.max(-v));
        self.a.iter().zip(&self.b).fold(neg, |m, (row, &b)| {
            m.max(super::certificate::dot(row, x) - b)
        })
    }

    /// `opt c·x` over the polyhedron.
    pub fn to_lp(&self, sense: Sense, c: Vec<f64>) -> LpProblem {
        let mut p = LpProblem::new(sense, c);
        for (row, &b) in self.a.iter().zip(&self.b) {
            p.add_row(row.clone(), Relation::Le, b);
        }
        p
    }
}

/// `{x ≥ 0 : A x = b}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualityPolytope {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    num_vars: usize,
}

impl EqualityPolytope {
    pub fn new(num_vars: usize, a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        check_shape(num_vars, &a, &b)?;
        Ok(Self { a, b, num_vars })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_rows(&self) -> usize {
        self.a.len()
    }

    /// Vertices within `limits`, in lexicographic basis order.
    pub fn vertices(&self, limits: &VertexLimits) -> Result<Vec<Vec<f64>>> {
        limits.check(self.num_vars, self.a.len())?;
        limits.check_bases(self.num_vars, self.a.len().min(self.num_vars))?;
        Ok(basic_feasible_points(self.num_vars, &self.a, &self.b))
    }
}

fn check_shape(n: usize, a: &[Vec<f64>], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "{} rows but {} right-hand sides",
            a.len(),
            b.len()
        )));
    }
    if let Some(i) = a.iter().position(|r| r.len() != n) {
        return Err(Error::Dimension(format!(
            "row {i} does not have {n} coefficients"
        )));
    }
    if a.iter().flatten().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("polyhedron data must be finite".into()));
    }
    Ok(())
}

/// Size guardrail for brute-force enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexLimits {
    pub max_vars: usize,
    pub max_rows: usize,
    /// Upper bound on the number of candidate bases examined.
    pub max_bases: u64,
}

impl Default for VertexLimits {
    fn default() -> Self {
        Self {
            max_vars: 12,
            max_rows: 24,
            max_bases: 20_000_000,
        }
    }
}

impl VertexLimits {
    fn check(&self, vars: usize, rows: usize) -> Result<()> {
        if vars > self.max_vars || rows > self.max_rows {
            return Err(Error::Guardrail(format!(
                "vertex enumeration is limited to {} variables and {} rows (got {vars} and {rows})",
                self.max_vars, self.max_rows
            )));
        }
        Ok(())
    }

    fn check_bases(&self, n: usize, k: usize) -> Result<()> {
        let count = binomial(n as u64, k as u64);
        if count > self.max_bases {
            return Err(Error::Guardrail(format!(
                "{count} candidate bases exceed the limit of {}",
                self.max_bases
            )));
        }
        Ok(())
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// All vertices of `P` under the default guardrail.
pub fn enumerate_vertices(p: &Polyhedron) -> Result<Vec<Vec<f64>>> {
    enumerate_vertices_with(p, &VertexLimits::default())
}

/// All vertices of `P`, deduplicated within `1e-9`, in lexicographic order
/// of the bases that produced them. Slacks are appended to turn `A x ≤ b`
/// into an equality system; the slack part is projected away.
pub fn enumerate_vertices_with(p: &Polyhedron, limits: &VertexLimits) -> Result<Vec<Vec<f64>>> {
    limits.check(p.num_vars, p.a.len())?;
    let n = p.num_vars;
    let m = p.a.len();
    limits.check_bases((n + m) as u64 as usize, m.min(n + m))?;
    let a: Vec<Vec<f64>> =
        p.a.iter()
            .enumerate()
            .map(|(i, row)| {
                let mut r = row.clone();
                r.extend((0..m).map(|k| if k == i { 1.0 } else { 0.0 }));
                r
            })
            .collect();
    let pts = basic_feasible_points(n + m, &a, &p.b);
    Ok(dedup(pts.into_iter().map(|x| x[..n].to_vec()).collect()))
}

const DEDUP_TOL: f64 = 1e-9;

fn dedup(points: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for x in points {
        let dup = out
            .iter()
            .any(|y| y.iter().zip(&x).all(|(a, b)| (a - b).abs() <= DEDUP_TOL));
        if !dup {
            out.push(x);
        }
    }
    out
}

fn basic_feasible_points(n: usize, a: &[Vec<f64>], b: &[f64]) -> Vec<Vec<f64>> {
    let Ok(rows) = independent_rows(a, b, 1e-10) else {
        return Vec::new();
    };
    let r = rows.len();
    if r == 0 {
        return vec![vec![0.0; n]];
    }
    let rhs = DMatrix::from_fn(r, 1, |i, _| b[rows[i]]);
    let mut found = Vec::new();
    for cols in (0..n).combinations(r) {
        let bmat = DMatrix::from_fn(r, r, |i, k| a[rows[i]][cols[k]]);
        let Some(xb) = lu_solve(bmat, &rhs, 1e-10) else {
            continue;
        };
        if xb.iter().any(|&v| v < -1e-9) {
            continue;
        }
        let mut x = vec![0.0; n];
        for (k, &c) in cols.iter().enumerate() {
            x[c] = xb[(k, 0)].max(0.0);
        }
        let consistent = a.iter().zip(b).all(|(row, &bi)| {
            (super::certificate::dot(row, &x) - bi).abs() <= 1e-8 * (1.0 + bi.abs())
        });
        if consistent {
            found.push(x);
        }
    }
    dedup(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn half_box() {
        let p = Polyhedron::new(2, vec![vec![2.0, 0.0], vec![0.0, 2.0]], vec![1.0, 1.0]).unwrap();
        let v = sorted(enumerate_vertices(&p).unwrap());
        assert_eq!(
            v,
            vec![
                vec![0.0, 0.0],
                vec![0.0, 0.5],
                vec![0.5, 0.0],
                vec![0.5, 0.5]
            ]
        );
    }

    #[test]
    fn origin_only() {
        let p = Polyhedron::new(2, vec![vec![1.0, 1.0]], vec![0.0]).unwrap();
        assert_eq!(enumerate_vertices(&p).unwrap(), vec![vec![0.0, 0.0]]);
    }

    #[test]
    fn empty() {
        let p = Polyhedron::new(1, vec![vec![-1.0], vec![1.0]], vec![-1.0, 0.0]).unwrap();
        assert!(enumerate_vertices(&p).unwrap().is_empty());
    }

    #[test]
    fn guardrail() {
        let p = Polyhedron::new(13, vec![vec![1.0; 13]], vec![1.0]).unwrap();
        assert!(matches!(enumerate_vertices(&p), Err(Error::Guardrail(_))));
        let wide = VertexLimits {
            max_vars: 13,
            ..VertexLimits::default()
        };
        // simplex corner points plus the origin
        assert_eq!(enumerate_vertices_with(&p, &wide).unwrap().len(), 14);
    }

    #[test]
    fn equality_polytope_simplex() {
        let e = EqualityPolytope::new(3, vec![vec![1.0, 1.0, 1.0]], vec![1.0]).unwrap();
        let v = sorted(e.vertices(&VertexLimits::default()).unwrap());
        assert_eq!(v.len(), 3);
        assert_eq!(v[0], vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(36, 12), 1_251_677_700);
        assert_eq!(binomial(4, 0), 1);
    }
}
