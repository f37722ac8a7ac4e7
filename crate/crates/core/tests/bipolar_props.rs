use dualcone::bipolar::{
    bipolar_contains, exhaustion_relax, member_primal, superhedge_dual, superhedge_price,
    GeneratorSet,
};
use dualcone::model::FuncOnSpace;
use dualcone::random::{instance_rng, random_generator_set, random_probe};
use dualcone::Tolerances;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn phi(h: &GeneratorSet, f: &FuncOnSpace) -> f64 {
    superhedge_price(h, f, &Tolerances::default())
        .unwrap()
        .as_f64()
}

fn setup(seed: u64) -> (ChaCha8Rng, GeneratorSet) {
    let mut rng = instance_rng(seed, 0);
    let h = random_generator_set(&mut rng);
    (rng, h)
}

fn nonneg_noise(rng: &mut ChaCha8Rng, h: &GeneratorSet, hi: f64) -> FuncOnSpace {
    let v: Vec<f64> = (0..h.space().len())
        .map(|_| rng.gen_range(0.0..hi))
        .collect();
    FuncOnSpace::from_reals(h.space().clone(), &v).unwrap()
}

const TOL: f64 = 1e-7;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn phi_is_monotone(seed in any::<u64>()) {
        let (mut rng, h) = setup(seed);
        let f = random_probe(&mut rng, &h);
        let g = f.add(&nonneg_noise(&mut rng, &h, 1.0)).unwrap();
        prop_assert!(phi(&h, &f) <= phi(&h, &g) + TOL);
    }

    #[test]
    fn phi_is_convex(seed in any::<u64>(), a in 0.0f64..=1.0) {
        let (mut rng, h) = setup(seed);
        let f = random_probe(&mut rng, &h);
        let g = random_probe(&mut rng, &h);
        let mix = f.scale(a).add(&g.scale(1.0 - a)).unwrap();
        let rhs = a * phi(&h, &f) + (1.0 - a) * phi(&h, &g);
        prop_assert!(phi(&h, &mix) <= rhs + TOL * (1.0 + rhs.abs()));
    }

    #[test]
    fn phi_is_cash_additive(seed in any::<u64>(), c in 0.0f64..3.0) {
        let (mut rng, h) = setup(seed);
        let f = random_probe(&mut rng, &h);
        let (p, q) = (phi(&h, &f), phi(&h, &f.shift(c)));
        prop_assert!((q - p - c).abs() <= TOL * (1.0 + q.abs()), "{p} + {c} vs {q}");
    }

    #[test]
    fn primal_and_dual_prices_agree(seed in any::<u64>()) {
        let (mut rng, h) = setup(seed);
        let tol = Tolerances::default();
        let f = random_probe(&mut rng, &h);
        let p = superhedge_price(&h, &f, &tol).unwrap().as_f64();
        let d = superhedge_dual(&h, &f, &tol).unwrap().as_f64();
        prop_assert!((p - d).abs() <= TOL * (1.0 + p.abs()), "{p} vs {d}");
    }

    #[test]
    fn bipolar_is_star_shaped_and_solid(seed in any::<u64>(), a in 0.0f64..=1.0) {
        let (mut rng, h) = setup(seed);
        let tol = Tolerances::default();
        let f = random_probe(&mut rng, &h);
        if bipolar_contains(&h, &f, &tol).unwrap().is_member() {
            prop_assert!(bipolar_contains(&h, &f.scale(a), &tol).unwrap().is_member());
            // any 0 ≤ g ≤ f
            let g: Vec<f64> = f
                .values()
                .iter()
                .map(|v| v.to_f64() * rng.gen_range(0.0..=1.0))
                .collect();
            let g = FuncOnSpace::from_reals(h.space().clone(), &g).unwrap();
            prop_assert!(bipolar_contains(&h, &g, &tol).unwrap().is_member());
        }
    }

    #[test]
    fn exhaustion_increases_to_phi(seed in any::<u64>()) {
        let (mut rng, h) = setup(seed);
        let f = random_probe(&mut rng, &h);
        let exact = phi(&h, &f);
        let spread = f64::from(h.space().max_level() - 1);
        let mut last = f64::NEG_INFINITY;
        for k in [1i64, 2, 3, 5, 8, 13, 100, 10_000] {
            let pk = phi(&exhaustion_relax(&h, k).unwrap(), &f);
            prop_assert!(pk >= last - TOL * (1.0 + last.abs()), "k={k}: {pk} < {last}");
            prop_assert!(pk <= exact + TOL * (1.0 + exact.abs()));
            // H ⊆ H_k ⊆ H + spread/k
            prop_assert!(exact - pk <= spread / k as f64 + TOL * (1.0 + exact.abs()));
            last = pk;
        }
    }

    #[test]
    fn membership_is_closed_under_limits(seed in any::<u64>()) {
        let (mut rng, h) = setup(seed);
        let tol = Tolerances::default();
        let raw: Vec<f64> = (0..h.len()).map(|_| rng.gen_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let lambda: Vec<f64> = raw.iter().map(|r| r / total).collect();
        let at = |w: &[f64]| {
            let v: Vec<f64> = h.combination(w).iter().map(|x| x.to_f64()).collect();
            FuncOnSpace::from_reals(h.space().clone(), &v).unwrap()
        };
        // λ⁽ⁿ⁾ → λ from a fixed corner of the simplex
        for n in [1.0, 4.0, 16.0, 256.0] {
            let mut w: Vec<f64> = lambda.iter().map(|l| l * (1.0 - 1.0 / n)).collect();
            w[0] += 1.0 / n;
            let fn_ = at(&w);
            let c = member_primal(&h, &fn_, &tol).unwrap();
            prop_assert!(c.is_member() && c.verify(&h, &fn_, tol.certificate));
        }
        let f = at(&lambda);
        let p = member_primal(&h, &f, &tol).unwrap();
        let b = bipolar_contains(&h, &f, &tol).unwrap();
        prop_assert!(p.is_member() && b.is_member());
        prop_assert!(b.verify(&h, &f, tol.certificate));
    }
}
