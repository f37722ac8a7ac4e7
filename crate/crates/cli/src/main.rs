mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use dualcone::bipolar::{
    self, biconjugation_report, exhaustion_relax, tightness_probe, GeneratorSet,
};
use dualcone::hedging::{attainability_check, superhedge_dual, superhedge_primal, MarketModel};
use dualcone::instance::{parse_function, parse_measure, Instance, Kind};
use dualcone::lp;
use dualcone::transport::{
    product_polar_check, superhedge_split, transport_value, TransportInstance,
};
use dualcone::verify::{verify, Suite};
use dualcone::{Error, Tolerances};

use report::{to_value, Report};

/// Polar/bipolar duality on finite spaces: linear programs, superhedging,
/// transport and semistatic hedging.
#[derive(Debug, Parser)]
#[command(name = "dualcone", version)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Relative duality-gap tolerance (also the membership verdict margin).
    #[arg(long, global = true, default_value_t = 1e-7)]
    tol: f64,

    /// Absolute feasibility tolerance on LP residuals.
    #[arg(long, global = true, default_value_t = 1e-9)]
    feas_tol: f64,

    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a linear program.
    SolveLp { instance: PathBuf },
    /// Print the polar of a generator set; with --measure, test membership.
    Polar {
        instance: PathBuf,
        /// A measure (JSON array of weights) to test against the polar.
        #[arg(long)]
        measure: Option<PathBuf>,
    },
    /// Decide membership of a probe by the primal and the bipolar route.
    BipolarCheck {
        instance: PathBuf,
        /// Function to test (JSON array of values).
        #[arg(long)]
        probe: PathBuf,
    },
    /// Superhedging price of a claim and its dual over probabilities.
    Superhedge {
        instance: PathBuf,
        /// Claim to price (JSON array of values).
        #[arg(long)]
        claim: PathBuf,
    },
    /// Superhedging price over the k-th relaxation of a generator set.
    Exhaust {
        instance: PathBuf,
        /// Relaxation index, at least 1.
        #[arg(long)]
        k: i64,
        /// Claim to price (JSON array of values).
        #[arg(long)]
        claim: PathBuf,
    },
    /// Transport value of a claim on the product space.
    Transport(TransportArgs),
    /// Semistatic superhedging in a discrete market.
    Hedge(HedgeArgs),
    /// Run a seeded randomized property suite.
    Verify {
        /// One of lp, bipolar, transport, hedge.
        #[arg(long)]
        suite: Suite,
        /// Number of random instances.
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
}

#[derive(Debug, Args)]
struct TransportArgs {
    instance: PathBuf,
    /// Claim on the product space (matrix, rows indexed by the left space).
    #[arg(long)]
    claim: Option<PathBuf>,
    /// Coupling LP, split LP, or both.
    #[arg(long, value_enum, default_value_t = Mode::Both)]
    mode: Mode,
    /// A measure on the product space to test against the product polar.
    #[arg(long)]
    measure: Option<PathBuf>,
    /// Sampled members of the product set for --measure.
    #[arg(long, default_value_t = 200)]
    samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Value,
    Split,
    Both,
}

#[derive(Debug, Args)]
struct HedgeArgs {
    market: PathBuf,
    /// Claim on the paths (JSON array, one value per path).
    #[arg(long)]
    claim: PathBuf,
    /// Add the time-0 forward position; needs S0 from --s0 or the market file.
    #[arg(long)]
    extended: bool,
    /// Time-0 price of the underlying; overrides the market file.
    #[arg(long, requires = "extended")]
    s0: Option<f64>,
    /// Superhedging LP, martingale-measure LP, or both.
    #[arg(long, value_enum, default_value_t = HedgeMode::Both)]
    mode: HedgeMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum HedgeMode {
    Primal,
    Dual,
    Both,
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let echo = argv.into_iter().skip(1).collect();
    let start = Instant::now();
    match run(&cli, echo) {
        Ok(mut report) => {
            report.wall_clock = start.elapsed().as_secs_f64();
            let text = match cli.format {
                Format::Json => report.to_json() + "\n",
                Format::Text => report.to_text(),
            };
            // a closed pipe (e.g. `| head`) is not an error of the solve
            let _ = std::io::stdout().write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("dualcone: {e}");
            ExitCode::from(if e.is_solver_failure() { 3 } else { 2 })
        }
    }
}

fn tolerances(cli: &Cli) -> Result<Tolerances, Error> {
    for (name, v) in [("--tol", cli.tol), ("--feas-tol", cli.feas_tol)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidInput(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    let mut tol = Tolerances::default();
    tol.verdict = cli.tol;
    tol.gap = cli.tol;
    tol.lp.gap_tol = cli.tol;
    tol.lp.feas_tol = cli.feas_tol;
    tol.certificate = cli.feas_tol;
    Ok(tol)
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path, kind: Kind) -> Result<Instance, Error> {
    Instance::parse(&read(path)?, kind)
        .map_err(|e| Error::InvalidInput(format!("{}: {}", path.display(), strip(e))))
}

/// Drops the error's own prefix so file names can be prepended.
fn strip(e: Error) -> String {
    match e {
        Error::InvalidInput(msg) => msg,
        other => other.to_string(),
    }
}

fn with_path(path: &Path) -> impl FnOnce(Error) -> Error + '_ {
    move |e| match e {
        Error::InvalidInput(msg) => Error::InvalidInput(format!("{}: {msg}", path.display())),
        other => other,
    }
}

fn load_generators(path: &Path) -> Result<(Instance, GeneratorSet), Error> {
    let inst = load(path, Kind::Bipolar)?;
    let Instance::Bipolar(spec) = &inst else {
        unreachable!()
    };
    let h = spec.build()?;
    Ok((inst, h))
}

fn run(cli: &Cli, echo: Vec<String>) -> Result<Report, Error> {
    let tol = tolerances(cli)?;
    match &cli.command {
        Command::SolveLp { instance } => solve_lp(echo, instance, &tol),
        Command::Polar { instance, measure } => polar(echo, instance, measure.as_deref(), &tol),
        Command::BipolarCheck { instance, probe } => bipolar_check(echo, instance, probe, &tol),
        Command::Superhedge { instance, claim } => superhedge(echo, instance, claim, &tol),
        Command::Exhaust { instance, k, claim } => exhaust(echo, instance, *k, claim, &tol),
        Command::Transport(args) => transport(echo, args, cli.seed, &tol),
        Command::Hedge(args) => hedge(echo, args, &tol),
        Command::Verify { suite, count } => {
            let summary = verify(*suite, cli.seed, *count, &tol);
            let status = if summary.all_passed() {
                "passed"
            } else {
                "failed"
            };
            let mut r = Report::new(echo, status);
            r.primal = json!(format!("{}/{}", summary.passed, summary.count));
            r.certificate = to_value(&summary);
            Ok(r)
        }
    }
}

fn solve_lp(echo: Vec<String>, path: &Path, tol: &Tolerances) -> Result<Report, Error> {
    let inst = load(path, Kind::Lp)?;
    let Instance::Lp(p) = &inst else {
        unreachable!()
    };
    let sol = lp::solve_with(p, &tol.lp)?;
    let mut r = Report::new(echo, to_value(&sol.status).as_str().unwrap_or_default());
    r.primal = to_value(&sol.objective);
    if let Some(res) = &sol.residuals {
        r.dual = json!(res.dual_objective);
        r.gap = json!(res.duality_gap);
    }
    r.certificate = json!({"x": sol.primal, "y": sol.dual, "ray": sol.ray});
    r.residuals = to_value(&sol.residuals);
    r.stats = to_value(&sol.stats);
    r.instance = inst.to_json();
    Ok(r)
}

fn polar(
    echo: Vec<String>,
    path: &Path,
    measure: Option<&Path>,
    tol: &Tolerances,
) -> Result<Report, Error> {
    let (inst, h) = load_generators(path)?;
    let p = bipolar::polar(&h);
    let mut r = Report::new(echo, "ok");
    let mut cert = json!({
        "a": to_value(&p).get("a").cloned(),
        "b": to_value(&p).get("b").cloned(),
        "forced_points": h.forced_points(),
    });
    if let Some(mpath) = measure {
        let mu = parse_measure(&read(mpath)?, h.space()).map_err(with_path(mpath))?;
        let violation = p.violation(mu.weights());
        let member = violation <= tol.certificate;
        r.status = if member { "member" } else { "non_member" }.into();
        r.primal = to_value(&h.support_of_h(mu.weights()));
        cert["measure"] = to_value(&mu);
        cert["violation"] = json!(violation);
    }
    r.certificate = cert;
    r.instance = inst.to_json();
    Ok(r)
}

fn bipolar_check(
    echo: Vec<String>,
    path: &Path,
    probe: &Path,
    tol: &Tolerances,
) -> Result<Report, Error> {
    let (inst, h) = load_generators(path)?;
    let f = parse_function(&read(probe)?, h.space()).map_err(with_path(probe))?;
    let primal = bipolar::member_primal(&h, &f, tol)?;
    let dual = bipolar::bipolar_contains(&h, &f, tol)?;
    let status = if primal.verdict != dual.verdict {
        "disagreement"
    } else if primal.is_member() {
        "member"
    } else {
        "non_member"
    };
    let mut r = Report::new(echo, status);
    r.primal = to_value(&primal.value);
    r.dual = to_value(&dual.value);
    r.gap = dual
        .residuals
        .map_or(Value::Null, |res| json!(res.duality_gap));
    r.residuals = json!({"primal": primal.residuals, "bipolar": dual.residuals});
    r.stats = json!({"primal": primal.stats, "bipolar": dual.stats});
    r.certificate = json!({
        "primal": primal,
        "bipolar": dual,
        "primal_verified": primal.verify(&h, &f, tol.certificate),
        "bipolar_verified": dual.verify(&h, &f, tol.certificate),
    });
    r.instance = inst.to_json();
    Ok(r)
}

fn price_report(
    echo: Vec<String>,
    h: &GeneratorSet,
    f: &dualcone::model::FuncOnSpace,
    tol: &Tolerances,
) -> Result<Report, Error> {
    let entry = biconjugation_report(h, std::slice::from_ref(f), tol)?
        .pop()
        .expect("one claim");
    let mut r = Report::new(
        echo,
        to_value(&entry.primal.status).as_str().unwrap_or_default(),
    );
    r.primal = to_value(&entry.primal.value);
    r.dual = to_value(&entry.dual.value);
    r.gap = json!(entry.gap);
    r.residuals = json!({"primal": entry.primal.residuals, "dual": entry.dual.residuals});
    r.stats = json!({"primal": entry.primal.stats, "dual": entry.dual.stats});
    r.certificate = json!({
        "weights": entry.primal.weights,
        "measure": entry.dual.measure,
        "conjugate": entry.conjugate_value,
        "within_tol": entry.within_tol,
    });
    Ok(r)
}

fn superhedge(
    echo: Vec<String>,
    path: &Path,
    claim: &Path,
    tol: &Tolerances,
) -> Result<Report, Error> {
    let (inst, h) = load_generators(path)?;
    let f = parse_function(&read(claim)?, h.space()).map_err(with_path(claim))?;
    let mut r = price_report(echo, &h, &f, tol)?;
    r.instance = inst.to_json();
    Ok(r)
}

fn exhaust(
    echo: Vec<String>,
    path: &Path,
    k: i64,
    claim: &Path,
    tol: &Tolerances,
) -> Result<Report, Error> {
    let (inst, h) = load_generators(path)?;
    let f = parse_function(&read(claim)?, h.space()).map_err(with_path(claim))?;
    let hk = exhaustion_relax(&h, k)?;
    let base = bipolar::superhedge_price(&h, &f, tol)?;
    let probe = tightness_probe(&h, f64::from(h.space().max_level()), 0.5, tol)?;
    let mut r = price_report(echo, &hk, &f, tol)?;
    if let Value::Object(cert) = &mut r.certificate {
        cert.insert("k".into(), json!(k));
        cert.insert(
            "relaxed_generators".into(),
            to_value(&hk.generators().to_vec()),
        );
        cert.insert("unrelaxed_price".into(), to_value(&base.value));
        cert.insert("tightness".into(), to_value(&probe));
    }
    r.instance = inst.to_json();
    Ok(r)
}

fn transport(
    echo: Vec<String>,
    args: &TransportArgs,
    seed: u64,
    tol: &Tolerances,
) -> Result<Report, Error> {
    let inst = load(&args.instance, Kind::Transport)?;
    let Instance::Transport(spec) = &inst else {
        unreachable!()
    };
    let t: TransportInstance = spec.build()?;
    let space = t.product().space().clone();
    if args.claim.is_none() && args.measure.is_none() {
        return Err(Error::InvalidInput(
            "transport needs --claim, --measure or both".into(),
        ));
    }
    let mut r = Report::new(echo, "ok");
    let mut cert = serde_json::Map::new();
    let mut residuals = serde_json::Map::new();
    let mut stats = serde_json::Map::new();
    if let Some(claim) = &args.claim {
        let f = parse_function(&read(claim)?, &space).map_err(with_path(claim))?;
        let value = matches!(args.mode, Mode::Value | Mode::Both)
            .then(|| transport_value(&t, &f, tol))
            .transpose()?;
        let split = matches!(args.mode, Mode::Split | Mode::Both)
            .then(|| superhedge_split(&t, &f, tol))
            .transpose()?;
        if let Some(v) = &value {
            r.primal = to_value(&v.value);
            r.status = if v.value.is_finite() {
                "optimal"
            } else {
                "unbounded"
            }
            .into();
            let n2 = t.right().space().len();
            let matrix = v.certificate.as_ref().map(|c| {
                c.coupling
                    .weights()
                    .chunks(n2)
                    .map(<[f64]>::to_vec)
                    .collect::<Vec<_>>()
            });
            cert.insert("coupling".into(), to_value(&matrix));
            cert.insert("marginals".into(), to_value(&v.certificate));
            cert.insert("ray".into(), to_value(&v.ray));
            residuals.insert("value".into(), to_value(&v.residuals));
            stats.insert("value".into(), to_value(&v.stats));
        }
        if let Some(s) = &split {
            r.dual = to_value(&s.value);
            if value.is_none() {
                r.status = if s.value.is_finite() {
                    "optimal"
                } else {
                    "unbounded"
                }
                .into();
            }
            cert.insert("split".into(), to_value(s));
            residuals.insert("split".into(), to_value(&s.residuals));
            stats.insert("split".into(), to_value(&s.stats));
        }
        if let (Some(v), Some(s)) = (&value, &split) {
            r.gap = match (v.value.finite(), s.value.finite()) {
                (Some(a), Some(b)) => json!((a - b).abs()),
                _ if v.value == s.value => json!(0.0),
                _ => json!("inf"),
            };
        }
    }
    if let Some(mpath) = &args.measure {
        let mu = parse_measure(&read(mpath)?, &space).map_err(with_path(mpath))?;
        let check = product_polar_check(&t, &mu, args.samples, seed, tol)?;
        if args.claim.is_none() {
            r.status = if check.verdict {
                "member"
            } else {
                "non_member"
            }
            .into();
        }
        cert.insert("product_polar".into(), to_value(&check));
    }
    r.certificate = Value::Object(cert);
    r.residuals = Value::Object(residuals);
    r.stats = Value::Object(stats);
    r.instance = inst.to_json();
    Ok(r)
}

fn hedge(echo: Vec<String>, args: &HedgeArgs, tol: &Tolerances) -> Result<Report, Error> {
    let inst = load(&args.market, Kind::Hedge)?;
    let Instance::Hedge(spec) = &inst else {
        unreachable!()
    };
    let base = MarketModel::try_from(spec.clone())?;
    let m = if args.extended {
        let s0 = args.s0.or(base.s0()).ok_or_else(|| {
            Error::InvalidInput("--extended needs S0 from --s0 or the market file".into())
        })?;
        base.with_s0(Some(s0))?
    } else {
        base.with_s0(None)?
    };
    let f = parse_function(&read(&args.claim)?, m.space()).map_err(with_path(&args.claim))?;
    let mut r = Report::new(echo, "optimal");
    match args.mode {
        HedgeMode::Both => {
            let a = attainability_check(&m, &f, tol)?;
            r.status = to_value(&a.primal.status)
                .as_str()
                .unwrap_or_default()
                .into();
            r.primal = to_value(&a.primal.price);
            r.dual = to_value(&a.dual.value);
            r.gap = to_value(&a.gap);
            r.residuals = json!({"primal": a.primal.residuals, "dual": a.dual.residuals});
            r.stats = json!({"primal": a.primal.stats, "dual": a.dual.stats});
            r.certificate = json!({
                "strategy": a.primal.strategy,
                "martingale": a.dual.point,
                "dual_status": a.dual.status,
                "attainability": a.verdict,
                "consistent": a.consistent,
            });
        }
        HedgeMode::Primal => {
            let p = superhedge_primal(&m, &f, tol)?;
            r.status = to_value(&p.status).as_str().unwrap_or_default().into();
            r.primal = to_value(&p.price);
            r.residuals = to_value(&p.residuals);
            r.stats = to_value(&p.stats);
            r.certificate = json!({"strategy": p.strategy});
        }
        HedgeMode::Dual => {
            let d = superhedge_dual(&m, &f, tol)?;
            r.status = to_value(&d.status).as_str().unwrap_or_default().into();
            r.dual = to_value(&d.value);
            r.residuals = to_value(&d.residuals);
            r.stats = to_value(&d.stats);
            r.certificate = json!({"martingale": d.point});
        }
    }
    let mut echo_spec = spec.clone();
    echo_spec.s0 = m.s0();
    r.instance = Instance::Hedge(echo_spec).to_json();
    Ok(r)
}
