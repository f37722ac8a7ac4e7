use dualcone::lp::{
    check_certificates, enumerate_vertices, solve, LpProblem, LpStatus, Polyhedron, Relation,
    Sense, SolverOptions, VarBounds,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_polyhedron(rng: &mut ChaCha8Rng) -> (Polyhedron, Vec<f64>) {
    let n = rng.gen_range(1..=5);
    let m = rng.gen_range(1..=7);
    let a: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            (0..n)
                .map(|_| f64::from(rng.gen_range(-3i32..=3)))
                .collect()
        })
        .collect();
    let b: Vec<f64> = (0..m)
        .map(|_| f64::from(rng.gen_range(-1i32..=5)))
        .collect();
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    (Polyhedron::new(n, a, b).unwrap(), c)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn simplex_matches_vertex_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut optimal, mut unbounded, mut infeasible) = (0, 0, 0);
    for _ in 0..600 {
        let (poly, c) = random_polyhedron(&mut rng);
        let lp = poly.to_lp(Sense::Max, c.clone());
        let sol = solve(&lp).unwrap();
        let verts = enumerate_vertices(&poly).unwrap();
        match sol.status {
            LpStatus::Optimal => {
                optimal += 1;
                let best = verts
                    .iter()
                    .map(|v| dot(&c, v))
                    .fold(f64::NEG_INFINITY, f64::max);
                let v = sol.value();
                assert!(
                    (v - best).abs() <= 1e-7 * (1.0 + best.abs()),
                    "{v} vs {best}"
                );
                assert!(poly.contains(&sol.primal, 1e-9));
            }
            LpStatus::Infeasible => {
                infeasible += 1;
                assert!(verts.is_empty());
            }
            LpStatus::Unbounded => {
                unbounded += 1;
                assert!(!verts.is_empty());
                let ray = sol.ray.unwrap();
                assert!(dot(&c, &ray) > 1e-9);
                assert!(ray.iter().all(|&r| r >= -1e-9));
                for row in &poly.a {
                    assert!(dot(row, &ray) <= 1e-9);
                }
            }
        }
    }
    assert!(
        optimal > 100 && unbounded > 10 && infeasible > 10,
        "{optimal} {unbounded} {infeasible}"
    );
}

fn random_general(rng: &mut ChaCha8Rng) -> LpProblem {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(0..=8);
    let sense = if rng.gen_bool(0.5) {
        Sense::Max
    } else {
        Sense::Min
    };
    let c = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let mut p = LpProblem::new(sense, c);
    for _ in 0..m {
        let a = (0..n).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let rel = match rng.gen_range(0..3) {
            0 => Relation::Le,
            1 => Relation::Ge,
            _ => Relation::Eq,
        };
        p.add_row(a, rel, rng.gen_range(-5.0..5.0));
    }
    for j in 0..n {
        let b = match rng.gen_range(0..4) {
            0 => VarBounds::NONNEG,
            1 => VarBounds::FREE,
            2 => {
                let l = rng.gen_range(-3.0..1.0);
                VarBounds {
                    lower: Some(l),
                    upper: Some(l + rng.gen_range(0.0..4.0)),
                }
            }
            _ => VarBounds {
                lower: None,
                upper: Some(rng.gen_range(-1.0..3.0)),
            },
        };
        p.set_bounds(j, b.lower, b.upper);
    }
    p
}

#[test]
fn general_lps_carry_valid_certificates() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let opts = SolverOptions::default();
    let mut optimal = 0;
    for _ in 0..1000 {
        let p = random_general(&mut rng);
        let s = solve(&p).unwrap();
        if s.status == LpStatus::Optimal {
            optimal += 1;
            let r = check_certificates(&p, &s);
            assert!(r.within(&opts), "{r:?}");
            assert!(r.duality_gap <= 1e-7 * (1.0 + r.primal_objective.abs()));
        }
        if s.status == LpStatus::Unbounded {
            let ray = s.ray.unwrap();
            let gain = dot(&p.objective, &ray);
            match p.sense {
                Sense::Max => assert!(gain > 0.0),
                Sense::Min => assert!(gain < 0.0),
            }
        }
    }
    assert!(optimal > 200, "{optimal}");
}

proptest! {
    #[test]
    fn repeated_solves_are_bit_identical(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_general(&mut rng);
        let a = serde_json::to_vec(&solve(&p).unwrap()).unwrap();
        let b = serde_json::to_vec(&solve(&p).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn scaling_objective_scales_value(seed in 0u64..10_000, k in 0.1f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (poly, c) = random_polyhedron(&mut rng);
        let s1 = solve(&poly.to_lp(Sense::Max, c.clone())).unwrap();
        let s2 = solve(&poly.to_lp(Sense::Max, c.iter().map(|x| k * x).collect())).unwrap();
        prop_assert_eq!(s1.status, s2.status);
        if s1.status == LpStatus::Optimal {
            prop_assert!((k * s1.value() - s2.value()).abs() <= 1e-7 * (1.0 + s2.value().abs()));
        }
    }
}
