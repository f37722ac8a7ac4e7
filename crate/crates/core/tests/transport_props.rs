use dualcone::bipolar::{bipolar_contains, polar};
use dualcone::lp::{enumerate_vertices_with, VertexLimits};
use dualcone::model::{ExtReal, FuncOnSpace, MeasureOnSpace};
use dualcone::random::{instance_rng, random_transport, random_transport_claim};
use dualcone::transport::{
    product_generators, product_polar_check, transport_value, TransportInstance,
};
use dualcone::Tolerances;
use proptest::prelude::*;
use rand::Rng;

fn pi(t: &TransportInstance, f: &FuncOnSpace) -> ExtReal {
    transport_value(t, f, &Tolerances::default()).unwrap().value
}

fn le(a: ExtReal, b: ExtReal) -> bool {
    match (a, b) {
        (_, ExtReal::PosInf) => true,
        (ExtReal::PosInf, _) => false,
        (ExtReal::Finite(x), ExtReal::Finite(y)) => x <= y + 1e-7 * (1.0 + y.abs()),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pi_is_sublinear(seed in any::<u64>(), a in 0.0f64..4.0) {
        let mut rng = instance_rng(seed, 0);
        let t = random_transport(&mut rng);
        let f = random_transport_claim(&mut rng, &t);
        let g = random_transport_claim(&mut rng, &t);
        let sum = f.add(&g).unwrap();
        let (pf, pg) = (pi(&t, &f), pi(&t, &g));
        let both = match (pf, pg) {
            (ExtReal::Finite(x), ExtReal::Finite(y)) => ExtReal::Finite(x + y),
            _ => ExtReal::PosInf,
        };
        prop_assert!(le(pi(&t, &sum), both));
        let scaled = pi(&t, &f.scale(a));
        match pf {
            ExtReal::Finite(x) => {
                let s = scaled.finite().unwrap();
                prop_assert!((s - a * x).abs() <= 1e-7 * (1.0 + s.abs()), "{s} vs {a}·{x}");
            }
            ExtReal::PosInf if a > 0.0 => prop_assert_eq!(scaled, ExtReal::PosInf),
            ExtReal::PosInf => {}
        }
    }

    #[test]
    fn couplings_respect_marginal_polars(seed in any::<u64>()) {
        let mut rng = instance_rng(seed, 0);
        let t = random_transport(&mut rng);
        let f = random_transport_claim(&mut rng, &t);
        let v = transport_value(&t, &f, &Tolerances::default()).unwrap();
        if let Some(cert) = &v.certificate {
            prop_assert!(cert.min_slack() >= -1e-9);
            prop_assert!(polar(t.left()).contains(&cert.left_marginal, 1e-9));
            prop_assert!(polar(t.right()).contains(&cert.right_marginal, 1e-9));
        } else {
            prop_assert_eq!(v.value, ExtReal::PosInf);
        }
    }

    #[test]
    fn membership_is_pi_at_most_one(seed in any::<u64>(), scale in 0.2f64..2.0) {
        let mut rng = instance_rng(seed, 0);
        let t = random_transport(&mut rng);
        let f = random_transport_claim(&mut rng, &t).scale(scale);
        let tol = Tolerances::default();
        let gens = product_generators(&t).unwrap();
        let member = bipolar_contains(&gens, &f, &tol).unwrap().is_member();
        let v = pi(&t, &f);
        // stay off the boundary where either side may round
        if let ExtReal::Finite(x) = v {
            prop_assume!((x - 1.0).abs() > 1e-6);
        }
        prop_assert_eq!(member, le(v, ExtReal::Finite(1.0)));
    }

    #[test]
    fn sampled_sup_matches_marginal_sup(seed in any::<u64>()) {
        let mut rng = instance_rng(seed, 0);
        let t = random_transport(&mut rng);
        let w: Vec<f64> = (0..t.product().len()).map(|_| rng.gen_range(0.0..0.5)).collect();
        let mu = MeasureOnSpace::new(t.product().space().clone(), w).unwrap();
        let chk = product_polar_check(&t, &mu, 64, seed, &Tolerances::default()).unwrap();
        prop_assert!(chk.consistent);
        let (a, b) = (chk.sampled_sup.to_f64(), chk.marginal_sup.to_f64());
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
    }
}

/// Brute force over the vertices of the coupling polytope.
#[test]
fn value_matches_vertex_oracle() {
    let limits = VertexLimits {
        max_vars: 16,
        ..VertexLimits::default()
    };
    let mut bounded = 0;
    for i in 0..150 {
        let mut rng = instance_rng(31, i);
        let t = random_transport(&mut rng);
        let f = random_transport_claim(&mut rng, &t);
        let poly = t.coupling_polytope();
        let fv: Vec<f64> = f.values().iter().map(|v| v.to_f64()).collect();
        let free = (0..poly.num_vars()).any(|c| fv[c] > 0.0 && poly.a.iter().all(|r| r[c] == 0.0));
        let v = pi(&t, &f);
        if free {
            assert_eq!(v, ExtReal::PosInf, "instance {i}");
            continue;
        }
        bounded += 1;
        let best = enumerate_vertices_with(&poly, &limits)
            .unwrap()
            .iter()
            .map(|x| x.iter().zip(&fv).map(|(a, b)| a * b).sum::<f64>())
            .fold(0.0, f64::max);
        let got = v.finite().unwrap();
        assert!(
            (got - best).abs() <= 1e-7 * (1.0 + best.abs()),
            "instance {i}: {got} vs {best}"
        );
    }
    assert!(bounded > 50, "{bounded}");
}
