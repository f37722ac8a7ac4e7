//! Finite state spaces, extended-real functions, measures and the pairing
//! `⟨f, μ⟩ = Σ_ω f(ω) μ(ω)`.
//!
//! Everything here is immutable once built. Sums are always taken left to
//! right in point order so results are bit-reproducible.

mod ext;
mod func;
mod measure;
mod space;

use std::sync::Arc;

pub use ext::ExtReal;
pub use func::FuncOnSpace;
pub use measure::MeasureOnSpace;
pub use space::FiniteSpace;

use crate::error::{Error, Result};

pub(crate) fn check_same_space(a: &Arc<FiniteSpace>, b: &Arc<FiniteSpace>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::SpaceMismatch(format!(
            "objects live on different spaces ({} vs {} points)",
            a.len(),
            b.len()
        )))
    }
}

/// `⟨f, μ⟩` under the `0·(+∞) = 0` convention.
///
/// The result is `+∞` exactly when `f = +∞` at a point of positive mass.
pub fn pairing(f: &FuncOnSpace, mu: &MeasureOnSpace) -> Result<ExtReal> {
    check_same_space(f.space(), mu.space())?;
    Ok(pair_values(f.values(), mu.weights()))
}

pub(crate) fn pair_values(f: &[ExtReal], w: &[f64]) -> ExtReal {
    let mut acc = 0.0;
    for (&v, &m) in f.iter().zip(w) {
        match v {
            ExtReal::Finite(x) => acc += x * m,
            ExtReal::PosInf if m > 0.0 => return ExtReal::PosInf,
            ExtReal::PosInf => {}
        }
    }
    ExtReal::Finite(acc)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

/// `γ(ω) = level(ω) - 1`, the number of compacts `K_n` missing `ω`.
pub fn gamma(space: &Arc<FiniteSpace>) -> FuncOnSpace {
    let vals: Vec<f64> = space.levels().iter().map(|&l| f64::from(l - 1)).collect();
    FuncOnSpace::from_reals(space.clone(), &vals).expect("levels are valid")
}

/// The product `Ω₁ × Ω₂`, enumerated row-major (left index outer).
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSpace {
    left: Arc<FiniteSpace>,
    right: Arc<FiniteSpace>,
    space: Arc<FiniteSpace>,
}

impl ProductSpace {
    pub fn new(left: Arc<FiniteSpace>, right: Arc<FiniteSpace>) -> Self {
        let mut labels = Vec::with_capacity(left.len() * right.len());
        let mut levels = Vec::with_capacity(left.len() * right.len());
        for i in 0..left.len() {
            for j in 0..right.len() {
                labels.push(format!("({},{})", left.labels()[i], right.labels()[j]));
                levels.push(left.level(i).max(right.level(j)));
            }
        }
        let space = FiniteSpace::new(labels, levels, None)
            .expect("product of valid spaces is a valid space");
        Self {
            left,
            right,
            space: Arc::new(space),
        }
    }

    pub fn left(&self) -> &Arc<FiniteSpace> {
        &self.left
    }

    pub fn right(&self) -> &Arc<FiniteSpace> {
        &self.right
    }

    /// The product as a flat space.
    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.right.len() + j
    }

    pub fn split_index(&self, k: usize) -> (usize, usize) {
        (k / self.right.len(), k % self.right.len())
    }
}

/// `(h₁ ⊕ h₂)(ω₁, ω₂) = h₁(ω₁) + h₂(ω₂)`.
pub fn oplus(prod: &ProductSpace, h1: &FuncOnSpace, h2: &FuncOnSpace) -> Result<FuncOnSpace> {
    check_same_space(h1.space(), prod.left())?;
    check_same_space(h2.space(), prod.right())?;
    let mut values = Vec::with_capacity(prod.len());
    for &a in h1.values() {
        for &b in h2.values() {
            values.push(a + b);
        }
    }
    FuncOnSpace::new(prod.space().clone(), values)
}

/// Row and column sums of a measure on a product.
pub fn marginals(
    prod: &ProductSpace,
    mu: &MeasureOnSpace,
) -> Result<(MeasureOnSpace, MeasureOnSpace)> {
    check_same_space(mu.space(), prod.space())?;
    let (w1, w2) = marginal_weights(prod.left().len(), prod.right().len(), mu.weights());
    Ok((
        MeasureOnSpace::new(prod.left().clone(), w1)?,
        MeasureOnSpace::new(prod.right().clone(), w2)?,
    ))
}

pub(crate) fn marginal_weights(n1: usize, n2: usize, w: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut w1 = vec![0.0; n1];
    let mut w2 = vec![0.0; n2];
    for i in 0..n1 {
        for j in 0..n2 {
            let m = w[i * n2 + j];
            w1[i] += m;
            w2[j] += m;
        }
    }
    (w1, w2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(n: usize) -> Arc<FiniteSpace> {
        Arc::new(FiniteSpace::compact(n).unwrap())
    }

    fn f(s: &Arc<FiniteSpace>, v: &[ExtReal]) -> FuncOnSpace {
        FuncOnSpace::new(s.clone(), v.to_vec()).unwrap()
    }

    fn m(s: &Arc<FiniteSpace>, w: &[f64]) -> MeasureOnSpace {
        MeasureOnSpace::new(s.clone(), w.to_vec()).unwrap()
    }

    const INF: ExtReal = ExtReal::PosInf;

    fn fin(x: f64) -> ExtReal {
        ExtReal::Finite(x)
    }

    #[test]
    fn pairing_examples() {
        let s = sp(2);
        assert_eq!(
            pairing(&f(&s, &[fin(1.0), fin(2.0)]), &m(&s, &[0.5, 0.25])).unwrap(),
            fin(1.0)
        );
        assert_eq!(
            pairing(&f(&s, &[INF, fin(1.0)]), &m(&s, &[0.0, 1.0])).unwrap(),
            fin(1.0)
        );
        assert_eq!(
            pairing(&f(&s, &[INF, fin(1.0)]), &m(&s, &[0.1, 0.9])).unwrap(),
            INF
        );
    }

    #[test]
    fn pairing_space_mismatch() {
        let a = sp(2);
        let b = sp(3);
        let err = pairing(&FuncOnSpace::zero(a), &MeasureOnSpace::zero(b)).unwrap_err();
        assert!(matches!(err, Error::SpaceMismatch(_)));
    }

    #[test]
    fn gamma_examples() {
        let s = Arc::new(FiniteSpace::with_levels(vec![1, 2, 3]).unwrap());
        assert_eq!(gamma(&s).finite_values().unwrap(), vec![0.0, 1.0, 2.0]);
        assert_eq!(gamma(&sp(3)).finite_values().unwrap(), vec![0.0; 3]);
        let s = Arc::new(FiniteSpace::with_levels(vec![1, 1, 2]).unwrap());
        assert_eq!(gamma(&s).finite_values().unwrap(), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn gamma_sublevel_sets_are_compacts() {
        let s = Arc::new(FiniteSpace::with_levels(vec![3, 1, 2, 4, 2]).unwrap());
        let g = gamma(&s).finite_values().unwrap();
        for c in [0.0, 0.5, 1.0, 1.7, 2.0, 3.0, 10.0] {
            let sub: Vec<bool> = g.iter().map(|&x| x <= c).collect();
            let k = c.floor() as u32 + 1;
            assert_eq!(sub, s.in_compact(k), "c = {c}");
        }
    }

    #[test]
    fn oplus_examples() {
        let p = ProductSpace::new(sp(2), sp(2));
        let h1 = f(p.left(), &[fin(1.0), fin(2.0)]);
        let h2 = f(p.right(), &[fin(10.0), fin(20.0)]);
        let s = oplus(&p, &h1, &h2).unwrap();
        assert_eq!(s.finite_values().unwrap(), vec![11.0, 21.0, 12.0, 22.0]);
        assert_eq!(s.lower_bound(), 11.0);

        let z = oplus(
            &p,
            &FuncOnSpace::zero(p.left().clone()),
            &FuncOnSpace::zero(p.right().clone()),
        )
        .unwrap();
        assert_eq!(z.finite_values().unwrap(), vec![0.0; 4]);

        let h1 = f(p.left(), &[INF, fin(0.0)]);
        let h2 = f(p.right(), &[fin(1.0), fin(1.0)]);
        let s = oplus(&p, &h1, &h2).unwrap();
        assert_eq!(s.values(), &[INF, INF, fin(1.0), fin(1.0)]);

        assert!(oplus(&p, &h2, &FuncOnSpace::zero(sp(3))).is_err());
    }

    #[test]
    fn marginal_examples() {
        let p = ProductSpace::new(sp(2), sp(2));
        let mu = m(p.space(), &[0.1, 0.2, 0.3, 0.4]);
        let (m1, m2) = marginals(&p, &mu).unwrap();
        assert!((m1.weights()[0] - 0.3).abs() < 1e-15 && (m1.weights()[1] - 0.7).abs() < 1e-15);
        assert!((m2.weights()[0] - 0.4).abs() < 1e-15 && (m2.weights()[1] - 0.6).abs() < 1e-15);

        let nu1 = [0.25, 0.75];
        let nu2 = [0.5, 0.5];
        let prod: Vec<f64> = nu1
            .iter()
            .flat_map(|a| nu2.iter().map(move |b| a * b))
            .collect();
        let (m1, m2) = marginals(&p, &m(p.space(), &prod)).unwrap();
        assert_eq!(m1.weights(), &nu1);
        assert_eq!(m2.weights(), &nu2);

        let (m1, m2) = marginals(&p, &MeasureOnSpace::zero(p.space().clone())).unwrap();
        assert_eq!(m1.total_mass() + m2.total_mass(), 0.0);
    }

    #[test]
    fn product_levels_are_maxima() {
        let l = Arc::new(FiniteSpace::with_levels(vec![1, 2]).unwrap());
        let r = Arc::new(FiniteSpace::with_levels(vec![1, 3, 2]).unwrap());
        let p = ProductSpace::new(l, r);
        assert_eq!(p.len(), 6);
        assert_eq!(p.space().levels(), &[1, 3, 2, 2, 3, 2]);
    }

    #[test]
    fn measure_validation_names_index() {
        let err = MeasureOnSpace::new(sp(3), vec![0.1, -0.2, 0.3]).unwrap_err();
        assert!(err.to_string().contains("index 1"), "{err}");
    }
}
