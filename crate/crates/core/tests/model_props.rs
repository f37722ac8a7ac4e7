use std::sync::Arc;

use dualcone::model::{
    gamma, oplus, pairing, ExtReal, FiniteSpace, FuncOnSpace, MeasureOnSpace, ProductSpace,
};
use proptest::prelude::*;

fn space(levels: Vec<u32>) -> Arc<FiniteSpace> {
    // make the levels contiguous from 1
    let mut sorted = levels.clone();
    sorted.sort_unstable();
    sorted.dedup();
    let rank = |l: u32| sorted.iter().position(|&s| s == l).unwrap() as u32 + 1;
    Arc::new(FiniteSpace::with_levels(levels.iter().map(|&l| rank(l)).collect()).unwrap())
}

fn finite(x: ExtReal) -> f64 {
    x.finite().expect("finite pairing")
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

prop_compose! {
    fn data(max: usize)(n in 1..=max)
        (levels in prop::collection::vec(1u32..5, n),
         f in prop::collection::vec(0.0f64..5.0, n),
         g in prop::collection::vec(0.0f64..5.0, n),
         mu in prop::collection::vec(0.0f64..2.0, n))
        -> (Vec<u32>, Vec<f64>, Vec<f64>, Vec<f64>) {
        (levels, f, g, mu)
    }
}

proptest! {
    #[test]
    fn pairing_is_bilinear((levels, f, g, mu) in data(12), a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let s = space(levels);
        let fs = FuncOnSpace::from_reals(s.clone(), &f).unwrap();
        let gs = FuncOnSpace::from_reals(s.clone(), &g).unwrap();
        let m = MeasureOnSpace::new(s.clone(), mu).unwrap();
        let combo = fs.scale(a).add(&gs.scale(b)).unwrap();
        let lhs = finite(pairing(&combo, &m).unwrap());
        let rhs = a * finite(pairing(&fs, &m).unwrap()) + b * finite(pairing(&gs, &m).unwrap());
        prop_assert!(close(lhs, rhs), "{lhs} vs {rhs}");
        let scaled = finite(pairing(&fs, &m.scale(a).unwrap()).unwrap());
        prop_assert!(close(scaled, a * finite(pairing(&fs, &m).unwrap())));
    }

    #[test]
    fn pairing_is_monotone((levels, f, g, mu) in data(12)) {
        let s = space(levels);
        let lo = FuncOnSpace::from_reals(s.clone(), &f).unwrap();
        let hi = lo.add(&FuncOnSpace::from_reals(s.clone(), &g).unwrap()).unwrap();
        prop_assert!(lo.le(&hi));
        let m = MeasureOnSpace::new(s, mu).unwrap();
        prop_assert!(finite(pairing(&lo, &m).unwrap()) <= finite(pairing(&hi, &m).unwrap()));
    }

    #[test]
    fn oplus_pairs_through_marginals(
        (l1, f1, _, _) in data(5),
        (l2, f2, _, _) in data(5),
        seed in prop::collection::vec(0.0f64..1.0, 25),
    ) {
        let prod = ProductSpace::new(space(l1), space(l2));
        let h1 = FuncOnSpace::from_reals(prod.left().clone(), &f1).unwrap();
        let h2 = FuncOnSpace::from_reals(prod.right().clone(), &f2).unwrap();
        let w: Vec<f64> = (0..prod.len()).map(|k| seed[k]).collect();
        let mu = MeasureOnSpace::new(prod.space().clone(), w.clone()).unwrap();
        let (mut m1, mut m2) = (vec![0.0; prod.left().len()], vec![0.0; prod.right().len()]);
        for (k, &wk) in w.iter().enumerate() {
            let (i, j) = prod.split_index(k);
            m1[i] += wk;
            m2[j] += wk;
        }
        let lhs = finite(pairing(&oplus(&prod, &h1, &h2).unwrap(), &mu).unwrap());
        let mu1 = MeasureOnSpace::new(prod.left().clone(), m1).unwrap();
        let mu2 = MeasureOnSpace::new(prod.right().clone(), m2).unwrap();
        let rhs = finite(pairing(&h1, &mu1).unwrap()) + finite(pairing(&h2, &mu2).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn gamma_sublevels_are_compacts((levels, ..) in data(20), c in 0.0f64..5.0) {
        let s = space(levels);
        let g = gamma(&s);
        let k = c.floor() as u32 + 1;
        let below: Vec<bool> = g.values().iter().map(|v| v.to_f64() <= c).collect();
        prop_assert_eq!(below, s.in_compact(k));
    }
}

#[test]
fn infinity_only_counts_under_mass() {
    let s = Arc::new(FiniteSpace::compact(2).unwrap());
    let f = FuncOnSpace::new(s.clone(), vec![ExtReal::Finite(1.0), ExtReal::PosInf]).unwrap();
    let on = MeasureOnSpace::new(s.clone(), vec![1.0, 0.5]).unwrap();
    let off = MeasureOnSpace::new(s, vec![1.0, 0.0]).unwrap();
    assert_eq!(pairing(&f, &on).unwrap(), ExtReal::PosInf);
    assert_eq!(pairing(&f, &off).unwrap(), ExtReal::Finite(1.0));
}
