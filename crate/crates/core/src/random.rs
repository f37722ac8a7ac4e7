//! Seeded random instances for the verification suites.
//!
//! | quantity                    | range                      |
//! |-----------------------------|----------------------------|
//! | points per space            | 1 ..= 30 (bipolar)         |
//! | exhaustion levels           | 1 ..= 4                    |
//! | generators                  | 1 ..= 10, values in [0, 4] |
//! | probe / claim values        | [0, 5]                     |
//! | transport marginal spaces   | 1 ..= 4 points, ≤ 3 gens   |
//! | market horizon              | 2 ..= 3                    |
//! | market grid size            | 1 ..= 5, values in [0.5, 6]|
//! | market `Q`                  | 1 ..= 3 vectors            |
//! | LP size                     | ≤ 6 vars, ≤ 8 rows         |
//!
//! Values are rounded to two decimals so failing instances serialize
//! exactly.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bipolar::{GeneratorSet, Regime};
use crate::hedging::MarketModel;
use crate::lp::{LpProblem, Polyhedron, Relation, Sense};
use crate::model::{FiniteSpace, FuncOnSpace};
use crate::transport::TransportInstance;

pub const MAX_POINTS: usize = 30;
pub const MAX_GENERATORS: usize = 10;
pub const MAX_LEVEL: u32 = 4;
pub const GENERATOR_MAX: f64 = 4.0;
pub const CLAIM_MAX: f64 = 5.0;

/// The generator for instance `index` of a run seeded with `seed`; each
/// instance gets its own stream so results do not depend on scheduling.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn uniform(rng: &mut ChaCha8Rng, hi: f64) -> f64 {
    round2(rng.gen_range(0.0..=hi))
}

/// Levels in `1..=max` with every level attained.
fn random_levels(rng: &mut ChaCha8Rng, n: usize) -> Vec<u32> {
    let top = rng.gen_range(1..=MAX_LEVEL.min(n as u32));
    let mut levels: Vec<u32> = (1..=top).collect();
    levels.extend((top as usize..n).map(|_| rng.gen_range(1..=top)));
    levels.shuffle(rng);
    levels
}

pub fn random_space(rng: &mut ChaCha8Rng, max_points: usize) -> Arc<FiniteSpace> {
    let n = rng.gen_range(1..=max_points);
    Arc::new(FiniteSpace::with_levels(random_levels(rng, n)).expect("valid levels"))
}

/// Finite nonnegative generators; some entries are zeroed so the polar
/// is often unbounded in a few directions.
pub fn random_generators_on(
    rng: &mut ChaCha8Rng,
    space: &Arc<FiniteSpace>,
    max_gens: usize,
) -> GeneratorSet {
    let k = rng.gen_range(1..=max_gens);
    let sparsity = rng.gen_range(0.0..0.4);
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|_| {
            (0..space.len())
                .map(|_| {
                    if rng.gen_bool(sparsity) {
                        0.0
                    } else {
                        uniform(rng, GENERATOR_MAX)
                    }
                })
                .collect()
        })
        .collect();
    GeneratorSet::from_rows(space.clone(), &rows, Regime::Nonneg).expect("valid generators")
}

pub fn random_generator_set(rng: &mut ChaCha8Rng) -> GeneratorSet {
    let space = random_space(rng, MAX_POINTS);
    random_generators_on(rng, &space, MAX_GENERATORS)
}

/// Probes for a membership test: uniform noise, scaled convex combinations
/// of the generators around the boundary, and sparse spikes.
pub fn random_probe(rng: &mut ChaCha8Rng, h: &GeneratorSet) -> FuncOnSpace {
    let n = h.space().len();
    let values: Vec<f64> = match rng.gen_range(0..3) {
        0 => (0..n).map(|_| uniform(rng, CLAIM_MAX)).collect(),
        1 => {
            let raw: Vec<f64> = (0..h.len()).map(|_| rng.gen::<f64>()).collect();
            let total: f64 = raw.iter().sum();
            let lambda: Vec<f64> = raw.iter().map(|v| v / total).collect();
            let scale = rng.gen_range(0.6..1.4);
            h.combination(&lambda)
                .iter()
                .map(|v| {
                    let jitter = rng.gen_range(0.7..1.0);
                    round2((v.to_f64() * scale * jitter).clamp(0.0, CLAIM_MAX))
                })
                .collect()
        }
        _ => (0..n)
            .map(|_| {
                if rng.gen_bool(0.2) {
                    uniform(rng, CLAIM_MAX)
                } else {
                    0.0
                }
            })
            .collect(),
    };
    FuncOnSpace::from_reals(h.space().clone(), &values).expect("finite probe")
}

/// A random `{x ≥ 0 : Ax ≤ b}` with an objective, small integer data.
pub fn random_polyhedron(rng: &mut ChaCha8Rng) -> (Polyhedron, Vec<f64>) {
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
    let c: Vec<f64> = (0..n).map(|_| round2(rng.gen_range(-2.0..2.0))).collect();
    (Polyhedron::new(n, a, b).expect("finite data"), c)
}

/// A random LP with mixed relations and variable bounds.
pub fn random_lp(rng: &mut ChaCha8Rng) -> LpProblem {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(0..=8);
    let sense = if rng.gen_bool(0.5) {
        Sense::Max
    } else {
        Sense::Min
    };
    let c = (0..n).map(|_| round2(rng.gen_range(-3.0..3.0))).collect();
    let mut p = LpProblem::new(sense, c);
    for _ in 0..m {
        let a = (0..n).map(|_| round2(rng.gen_range(-4.0..4.0))).collect();
        let rel = match rng.gen_range(0..3) {
            0 => Relation::Le,
            1 => Relation::Ge,
            _ => Relation::Eq,
        };
        p.add_row(a, rel, round2(rng.gen_range(-5.0..5.0)));
    }
    for j in 0..n {
        match rng.gen_range(0..4) {
            0 => {}
            1 => {
                p.set_free(j);
            }
            2 => {
                let l = round2(rng.gen_range(-3.0..1.0));
                p.set_bounds(j, Some(l), Some(l + round2(rng.gen_range(0.0..4.0))));
            }
            _ => {
                p.set_bounds(j, None, Some(round2(rng.gen_range(-1.0..3.0))));
            }
        }
    }
    p
}

pub fn random_transport(rng: &mut ChaCha8Rng) -> TransportInstance {
    let s1 = random_space(rng, 4);
    let s2 = random_space(rng, 4);
    let h1 = random_generators_on(rng, &s1, 3);
    let h2 = random_generators_on(rng, &s2, 3);
    TransportInstance::new(h1, h2).expect("nonneg generators")
}

pub fn random_transport_claim(rng: &mut ChaCha8Rng, t: &TransportInstance) -> FuncOnSpace {
    let n = t.product().len();
    let sparse = rng.gen_bool(0.3);
    let values: Vec<f64> = (0..n)
        .map(|_| {
            if sparse && rng.gen_bool(0.6) {
                0.0
            } else {
                uniform(rng, CLAIM_MAX)
            }
        })
        .collect();
    FuncOnSpace::from_reals(t.product().space().clone(), &values).expect("finite claim")
}

fn random_grid(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<f64> {
    let n = rng.gen_range(1..=max_len);
    let mut g: Vec<f64> = (0..n).map(|_| round2(rng.gen_range(0.5..=6.0))).collect();
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

fn random_probability(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    // integer weights keep the sum exact after normalization
    let raw: Vec<u32> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.25) {
                0
            } else {
                rng.gen_range(1..=4)
            }
        })
        .collect();
    let total: u32 = raw.iter().sum();
    if total == 0 {
        let mut q = vec![0.0; n];
        q[rng.gen_range(0..n)] = 1.0;
        return q;
    }
    let mut q: Vec<f64> = raw
        .iter()
        .map(|&r| f64::from(r) / f64::from(total))
        .collect();
    let drift: f64 = 1.0 - q.iter().sum::<f64>();
    let last = q.iter().rposition(|&v| v > 0.0).expect("positive mass");
    q[last] += drift;
    q
}

/// A random market. Unless `allow_arbitrage` fires, the barycenter of each
/// `q_k` is added to every grid before the last, which makes `M(Q)`
/// nonempty (hold the barycenter, then jump to `q_k`).
pub fn random_market(rng: &mut ChaCha8Rng, allow_arbitrage: bool) -> MarketModel {
    let horizon = rng.gen_range(2..=3);
    let terminal = random_grid(rng, 5);
    let nq = rng.gen_range(1..=3);
    let q: Vec<Vec<f64>> = (0..nq)
        .map(|_| random_probability(rng, terminal.len()))
        .collect();
    // leave room for the barycenters so every grid keeps at most 5 points
    let mut grids: Vec<Vec<f64>> = (1..horizon).map(|_| random_grid(rng, 5 - nq)).collect();
    grids.push(terminal);
    let skip = allow_arbitrage && rng.gen_bool(0.2);
    if !skip {
        for qk in &q {
            let bary: f64 = qk.iter().zip(&grids[horizon - 1]).map(|(a, b)| a * b).sum();
            for grid in grids.iter_mut().take(horizon - 1) {
                if !grid.iter().any(|x| (x - bary).abs() <= 1e-12) {
                    grid.push(bary);
                }
                grid.sort_by(f64::total_cmp);
            }
        }
    }
    MarketModel::new(grids, q, None).expect("valid random market")
}

pub fn random_market_claim(rng: &mut ChaCha8Rng, m: &MarketModel) -> FuncOnSpace {
    let values: Vec<f64> = (0..m.num_paths())
        .map(|_| uniform(rng, CLAIM_MAX))
        .collect();
    FuncOnSpace::from_reals(m.space().clone(), &values).expect("finite claim")
}
