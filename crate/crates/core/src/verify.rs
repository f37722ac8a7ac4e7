//! Randomized cross-checks of the duality statements.
//!
//! Each suite draws `count` instances from [`crate::random`], instance `i`
//! from its own stream of `seed`, runs a battery of checks and tallies the
//! results. Instances run in parallel; the summary is ordered by index.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bipolar::{bipolar_contains, member_primal, superhedge_dual, superhedge_price};
use crate::error::Result;
use crate::hedging::{self, gains, price_option, HedgeStatus};
use crate::instance::{GeneratorSpec, Instance, TransportSpec};
use crate::lp::{check_certificates, enumerate_vertices, solve_with, LpStatus, Sense};
use crate::model::{ExtReal, FuncOnSpace};
use crate::random;
use crate::tolerance::Tolerances;
use crate::transport::{duality_report, product_generators, product_polar_check, transport_value};

pub const BIPOLAR_PROBES: usize = 5;
pub const TRANSPORT_CLAIMS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Lp,
    Bipolar,
    Transport,
    Hedge,
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lp" => Ok(Suite::Lp),
            "bipolar" => Ok(Suite::Bipolar),
            "transport" => Ok(Suite::Transport),
            "hedge" => Ok(Suite::Hedge),
            _ => Err(format!(
                "unknown suite {s:?} (expected lp, bipolar, transport or hedge)"
            )),
        }
    }
}

/// The first failing instance, as it was generated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub index: usize,
    pub reason: String,
    pub instance: Value,
    pub claims: Vec<Vec<ExtReal>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySummary {
    pub suite: Suite,
    pub seed: u64,
    pub count: usize,
    /// Instances on which every check passed.
    pub passed: usize,
    pub failed: usize,
    /// Individual checks run across all instances.
    pub checks: usize,
    /// Hedge instances whose market admits arbitrage (primal unbounded and
    /// `M(Q)` empty on both sides); counted as passes.
    pub arbitrage: Vec<usize>,
    pub first_counterexample: Option<Counterexample>,
}

impl VerifySummary {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

struct Outcome {
    checks: usize,
    failure: Option<String>,
    arbitrage: bool,
    instance: Instance,
    claims: Vec<FuncOnSpace>,
}

/// Counts checks and remembers the first failing one.
struct Battery {
    checks: usize,
    failure: Option<String>,
}

impl Battery {
    fn new() -> Self {
        Self {
            checks: 0,
            failure: None,
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(what());
        }
    }

    fn solver<T>(&mut self, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.check(false, || format!("solver error: {e}"));
                None
            }
        }
    }
}

pub fn verify(suite: Suite, seed: u64, count: usize, tol: &Tolerances) -> VerifySummary {
    let outcomes: Vec<Outcome> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = random::instance_rng(seed, i as u64);
            match suite {
                Suite::Lp => check_lp(&mut rng, tol),
                Suite::Bipolar => check_bipolar(&mut rng, tol),
                Suite::Transport => check_transport(&mut rng, tol),
                Suite::Hedge => check_hedge(&mut rng, tol),
            }
        })
        .collect();

    let mut summary = VerifySummary {
        suite,
        seed,
        count,
        passed: 0,
        failed: 0,
        checks: 0,
        arbitrage: Vec::new(),
        first_counterexample: None,
    };
    for (i, o) in outcomes.into_iter().enumerate() {
        summary.checks += o.checks;
        if o.arbitrage {
            summary.arbitrage.push(i);
        }
        match o.failure {
            None => summary.passed += 1,
            Some(reason) => {
                summary.failed += 1;
                if summary.first_counterexample.is_none() {
                    summary.first_counterexample = Some(Counterexample {
                        index: i,
                        reason,
                        instance: o.instance.to_json(),
                        claims: o.claims.iter().map(|f| f.values().to_vec()).collect(),
                    });
                }
            }
        }
    }
    summary
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn check_lp(rng: &mut rand_chacha::ChaCha8Rng, tol: &Tolerances) -> Outcome {
    let mut bat = Battery::new();
    let p = random::random_lp(rng);
    if let Some(s) = bat.solver(solve_with(&p, &tol.lp)) {
        match s.status {
            LpStatus::Optimal => {
                let r = check_certificates(&p, &s);
                bat.check(r.within(&tol.lp), || {
                    format!("certificate residuals out of tolerance: {r:?}")
                });
            }
            LpStatus::Unbounded => {
                let gain: f64 = s
                    .ray
                    .as_deref()
                    .map(|r| r.iter().zip(&p.objective).map(|(a, b)| a * b).sum())
                    .unwrap_or(0.0);
                let improving = match p.sense {
                    Sense::Max => gain > 0.0,
                    Sense::Min => gain < 0.0,
                };
                bat.check(improving, || {
                    "unbounded status without an improving ray".into()
                });
            }
            LpStatus::Infeasible => bat.check(true, String::new),
        }
    }

    // the same engine against brute force on a small polyhedron
    let (poly, c) = random::random_polyhedron(rng);
    let lp = poly.to_lp(Sense::Max, c.clone());
    if let (Some(s), Some(verts)) = (
        bat.solver(solve_with(&lp, &tol.lp)),
        bat.solver(enumerate_vertices(&poly)),
    ) {
        let best = verts
            .iter()
            .map(|v| v.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        match s.status {
            LpStatus::Optimal => bat.check(rel_close(s.value(), best, tol.gap), || {
                format!(
                    "simplex value {} differs from vertex oracle {best}",
                    s.value()
                )
            }),
            LpStatus::Infeasible => {
                bat.check(verts.is_empty(), || "infeasible but vertices exist".into())
            }
            LpStatus::Unbounded => {
                bat.check(!verts.is_empty(), || "unbounded but no vertex".into())
            }
        }
    }
    Outcome {
        checks: bat.checks,
        failure: bat.failure,
        arbitrage: false,
        instance: Instance::Lp(p),
        claims: Vec::new(),
    }
}

fn check_bipolar(rng: &mut rand_chacha::ChaCha8Rng, tol: &Tolerances) -> Outcome {
    let mut bat = Battery::new();
    let h = random::random_generator_set(rng);
    let probes: Vec<FuncOnSpace> = (0..BIPOLAR_PROBES)
        .map(|_| random::random_probe(rng, &h))
        .collect();
    for (i, f) in probes.iter().enumerate() {
        let (Some(primal), Some(bip)) = (
            bat.solver(member_primal(&h, f, tol)),
            bat.solver(bipolar_contains(&h, f, tol)),
        ) else {
            continue;
        };
        bat.check(primal.verdict == bip.verdict, || {
            format!(
                "probe {i}: member_primal says {:?}, bipolar_contains says {:?}",
                primal.verdict, bip.verdict
            )
        });
        bat.check(primal.verify(&h, f, tol.certificate), || {
            format!("probe {i}: primal certificate fails")
        });
        bat.check(bip.verify(&h, f, tol.certificate), || {
            format!("probe {i}: bipolar certificate fails")
        });
        if bip.is_member() {
            let half = f.scale(0.5);
            if let Some(c) = bat.solver(bipolar_contains(&h, &half, tol)) {
                bat.check(c.is_member(), || {
                    format!("probe {i}: f is a member but f/2 is not")
                });
            }
        }
        if let (Some(p), Some(d)) = (
            bat.solver(superhedge_price(&h, f, tol)),
            bat.solver(superhedge_dual(&h, f, tol)),
        ) {
            bat.check(rel_close(p.as_f64(), d.as_f64(), tol.gap), || {
                format!(
                    "probe {i}: superhedging price {} vs dual {}",
                    p.as_f64(),
                    d.as_f64()
                )
            });
        }
    }
    Outcome {
        checks: bat.checks,
        failure: bat.failure,
        arbitrage: false,
        instance: Instance::Bipolar(GeneratorSpec::from_set(&h)),
        claims: probes,
    }
}

fn check_transport(rng: &mut rand_chacha::ChaCha8Rng, tol: &Tolerances) -> Outcome {
    let mut bat = Battery::new();
    let t = random::random_transport(rng);
    let claims: Vec<FuncOnSpace> = (0..TRANSPORT_CLAIMS)
        .map(|_| random::random_transport_claim(rng, &t))
        .collect();
    if let Some(report) = bat.solver(duality_report(&t, &claims, tol)) {
        for (i, e) in report.iter().enumerate() {
            bat.check(e.within_tol, || {
                format!(
                    "claim {i}: transport value {} vs split {}",
                    e.value.value, e.split.value
                )
            });
            if let Some(cert) = &e.value.certificate {
                bat.check(cert.verify(tol.certificate), || {
                    format!("claim {i}: coupling leaves the polars")
                });
                if let Some(chk) =
                    bat.solver(product_polar_check(&t, &cert.coupling, 8, i as u64, tol))
                {
                    bat.check(chk.verdict && chk.consistent, || {
                        format!("claim {i}: product polar check failed")
                    });
                }
            }
        }
    }
    let Some(gens) = bat.solver(product_generators(&t)) else {
        return transport_outcome(bat, &t, claims);
    };
    for (i, f) in claims.iter().enumerate() {
        let Some(v) = bat.solver(transport_value(&t, f, tol)) else {
            continue;
        };
        // probe on both sides of the boundary π = 1
        let scales: Vec<f64> = match v.value {
            ExtReal::Finite(p) if p > 1e-9 => vec![0.8 / p, 1.25 / p],
            _ => vec![1.0],
        };
        for s in scales {
            let g = f.scale(s);
            let (Some(pi), Some(bip), Some(prim)) = (
                bat.solver(transport_value(&t, &g, tol)),
                bat.solver(bipolar_contains(&gens, &g, tol)),
                bat.solver(member_primal(&gens, &g, tol)),
            ) else {
                continue;
            };
            let inside = pi.value <= ExtReal::Finite(1.0 + tol.verdict);
            bat.check(
                bip.is_member() == inside && prim.is_member() == inside,
                || {
                    format!(
                        "claim {i} scaled by {s}: π = {}, bipolar {:?}, primal {:?}",
                        pi.value, bip.verdict, prim.verdict
                    )
                },
            );
        }
    }
    transport_outcome(bat, &t, claims)
}

fn transport_outcome(
    bat: Battery,
    t: &crate::transport::TransportInstance,
    claims: Vec<FuncOnSpace>,
) -> Outcome {
    Outcome {
        checks: bat.checks,
        failure: bat.failure,
        arbitrage: false,
        instance: Instance::Transport(TransportSpec::from_instance(t)),
        claims,
    }
}

fn check_hedge(rng: &mut rand_chacha::ChaCha8Rng, tol: &Tolerances) -> Outcome {
    let mut bat = Battery::new();
    let m = random::random_market(rng, true);
    let f = random::random_market_claim(rng, &m);
    let mut arbitrage = false;
    if let (Some(p), Some(d)) = (
        bat.solver(hedging::superhedge_primal(&m, &f, tol)),
        bat.solver(hedging::superhedge_dual(&m, &f, tol)),
    ) {
        bat.check(p.status == d.status, || {
            format!(
                "primal status {:?} but dual status {:?}",
                p.status, d.status
            )
        });
        arbitrage = p.status == HedgeStatus::Arbitrage;
        if let (Some(price), Some(value), Some(s), Some(pt)) =
            (p.price, d.value, &p.strategy, &d.point)
        {
            bat.check(rel_close(price, value, tol.gap), || {
                format!("primal {price} vs dual {value}")
            });
            let static_price = price_option(&m, &s.g).unwrap_or(f64::INFINITY);
            bat.check(static_price <= tol.certificate, || {
                format!("static option priced at {static_price}")
            });
            bat.check(pt.verify(&m, tol.certificate), || {
                "dual point leaves M(Q)".into()
            });
            let covered = (0..m.num_paths()).all(|path| {
                let g = gains(&m, s, path).unwrap_or(f64::NAN);
                price + g + s.g[m.terminal_index(path)] >= f.value(path).to_f64() - tol.certificate
            });
            bat.check(covered, || "strategy does not superhedge the claim".into());
        }
    }
    Outcome {
        checks: bat.checks,
        failure: bat.failure,
        arbitrage,
        instance: Instance::Hedge(m.spec().clone()),
        claims: vec![f],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_count_is_empty() {
        let s = verify(Suite::Bipolar, 1, 0, &Tolerances::default());
        assert_eq!((s.count, s.passed, s.failed, s.checks), (0, 0, 0, 0));
        assert!(s.all_passed());
    }

    #[test]
    fn small_runs_pass_and_repeat() {
        let tol = Tolerances::default();
        for suite in [Suite::Lp, Suite::Bipolar, Suite::Transport, Suite::Hedge] {
            let a = verify(suite, 3, 12, &tol);
            assert!(a.all_passed(), "{:?}", a.first_counterexample);
            assert_eq!(a, verify(suite, 3, 12, &tol));
        }
    }
}
