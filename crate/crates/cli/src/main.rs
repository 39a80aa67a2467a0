//! `pclab`: simulation, auditing, curves, lower bounds, sweeps and the
//! session service from the command line.
//!
//! Exit codes: 0 on success, 1 on failed checks or runtime errors, 2 on
//! invalid configuration.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use partial_correction::analytics::{policy_curve, ValuePolicy};
use partial_correction::experiments::criteria::{run_all, CriteriaOptions};
use partial_correction::experiments::{
    audit_trial, run_single_query_lower_bound, run_sparse_lower_bound, run_two_point_lower_bound,
    verify_phase1_generalization, verify_upper_bound, AuditSummary, ExperimentSpec, SweepConfig,
    SweepResult, DEFAULT_TRIALS,
};
use partial_correction::output::{write_audit_rows, write_curves, write_header, write_trials};
use partial_correction::session::Session;
use partial_correction::{Instance, SpaceSpec};
use partial_correction_server::{serve, ServeOptions};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "pclab",
    version,
    about = "Learning from partial corrections: simulations and audits"
)]
struct Cli {
    /// Seed for all randomness.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for trials (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// TOML file of `[[experiment]]` tables (simulate, audit, sweep).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run trials and write one CSV row per trial.
    Simulate(SimulateArgs),
    /// Replay trials through the auditor.
    Audit(AuditArgs),
    /// Tabulate expected next threshold under the two value policies.
    Curves(CurvesArgs),
    /// Run a lower-bound construction.
    LowerBound(LowerBoundArgs),
    /// Run an experiment battery, or the acceptance criteria with `--check`.
    Sweep(SweepArgs),
    /// Start the session service.
    Serve(ServeArgs),
    /// Print |H|, c and |Q| of a space.
    Enumerate(EnumerateArgs),
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Space spec, e.g. `grid:M=100,c=4` or `triplet:n=5,m=4`.
    #[arg(long)]
    space: Option<String>,
    /// smallest | largest | glaring-flaw | random | adversarial
    #[arg(long, default_value = "random")]
    expert: String,
    /// `rule`, `base/rule` or `stick-with-it/rule`; default depends on the space.
    #[arg(long)]
    learner: Option<String>,
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Epoch length for stick-with-it learners.
    #[arg(long)]
    k: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Run exactly N steps and score the surviving version space.
    #[arg(long)]
    phase1: bool,
    /// CSV destination (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replay an exported session transcript instead of simulating.
    #[arg(long, conflicts_with_all = ["space", "phase1"])]
    replay: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AuditArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Write per-step weight summaries of one trial as CSV.
    #[arg(long)]
    emit_trace: Option<PathBuf>,
    /// Trial whose trace `--emit-trace` writes.
    #[arg(long, default_value_t = 0)]
    trial: u64,
}

#[derive(Debug, Args)]
struct CurvesArgs {
    #[arg(long, value_delimiter = ',', default_value = "4")]
    c: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "smallest,largest")]
    policies: Vec<String>,
    #[arg(long, default_value_t = 512)]
    grid: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Construction {
    Single,
    TwoPoint,
    Sparse,
}

#[derive(Debug, Args, Serialize)]
struct LowerBoundArgs {
    #[arg(long, value_enum)]
    construction: Construction,
    #[arg(long, default_value_t = 10)]
    c: usize,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Rare queries of the sparse construction.
    #[arg(long, default_value_t = 2)]
    l: usize,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Run the acceptance criteria; exit 1 if any fails.
    #[arg(long)]
    check: bool,
    /// Trials per configuration for `--check`.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    /// Score each experiment after exactly N steps instead of full runs.
    #[arg(long)]
    phase1: bool,
    /// CSV of every trial.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Directory with the UI bundle, served under `/`.
    #[arg(long = "static")]
    static_dir: Option<PathBuf>,
    /// Journal each session to `<dir>/<id>.jsonl`.
    #[arg(long)]
    journal: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EnumerateArgs {
    #[arg(long)]
    space: String,
}

enum Failure {
    Config(String),
    Run(String),
    /// A check ran and did not pass; details are already printed.
    Check,
}

type CliResult = Result<(), Failure>;

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

fn run_err(e: impl std::fmt::Display) -> Failure {
    Failure::Run(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .expect("thread pool is configured once");
    }
    eprintln!("seed={}", cli.seed);
    let result = match &cli.command {
        Command::Simulate(a) => simulate(&cli, a),
        Command::Audit(a) => audit(&cli, a),
        Command::Curves(a) => no_config(&cli, "curves").and_then(|_| curves(&cli, a)),
        Command::LowerBound(a) => no_config(&cli, "lower-bound").and_then(|_| lower_bound(&cli, a)),
        Command::Sweep(a) => sweep(&cli, a),
        Command::Serve(a) => no_config(&cli, "serve").and_then(|_| serve_cmd(a)),
        Command::Enumerate(a) => no_config(&cli, "enumerate").and_then(|_| enumerate(a)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn no_config(cli: &Cli, command: &str) -> CliResult {
    match &cli.config {
        Some(_) => Err(Failure::Config(format!("{command} does not take --config"))),
        None => Ok(()),
    }
}

fn default_learner(space: &SpaceSpec) -> &'static str {
    match space {
        SpaceSpec::Sparse { .. } => "max-ones",
        SpaceSpec::Triplet { .. } => "random",
        _ => "threshold-min",
    }
}

/// Experiments from `--config`, or a single one from the flags.
fn experiments(
    cli: &Cli,
    args: &ExperimentArgs,
    audit: bool,
) -> Result<Vec<ExperimentSpec>, Failure> {
    let mut specs = match (&cli.config, &args.space) {
        (Some(_), Some(_)) => {
            return Err(Failure::Config(
                "give either --config or --space, not both".into(),
            ))
        }
        (Some(path), None) => load_config(path)?,
        (None, Some(space)) => {
            let space: SpaceSpec = space.parse().map_err(config_err)?;
            vec![ExperimentSpec {
                name: "cli".into(),
                learner: args
                    .learner
                    .clone()
                    .unwrap_or_else(|| default_learner(&space).into()),
                space,
                expert: args.expert.clone(),
                epsilon: args.epsilon,
                delta: args.delta,
                k: args.k,
                trials: args.trials,
                seed: cli.seed,
                audit,
            }]
        }
        (None, None) => return Err(Failure::Config("--space or --config is required".into())),
    };
    for s in &mut specs {
        s.audit |= audit;
        s.resolve()
            .map_err(|e| Failure::Config(format!("experiment '{}': {e}", s.name)))?;
    }
    Ok(specs)
}

fn load_config(path: &Path) -> Result<Vec<ExperimentSpec>, Failure> {
    let cfg =
        SweepConfig::load(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    if cfg.experiment.is_empty() {
        return Err(Failure::Config(format!(
            "{}: no [[experiment]] tables",
            path.display()
        )));
    }
    Ok(cfg.experiment)
}

fn echo<C: Serialize + ?Sized>(config: &C, seed: u64) {
    let mut err = io::stderr();
    // A failed write to stderr is not worth aborting over.
    let _ = write_header(&mut err, config, seed);
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| run_err(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn simulate(cli: &Cli, args: &SimulateArgs) -> CliResult {
    if let Some(path) = &args.replay {
        return replay(path, args.out.as_deref());
    }
    let specs = experiments(cli, &args.experiment, false)?;
    echo(&specs, cli.seed);
    let mut trials = Vec::new();
    for spec in &specs {
        let r = if args.phase1 {
            verify_phase1_generalization(spec)
        } else {
            verify_upper_bound(spec)
        }
        .map_err(run_err)?;
        report_sweep(&r);
        trials.extend(r.trials);
    }
    write_trials(sink(args.out.as_deref())?, &specs, cli.seed, &trials).map_err(run_err)
}

fn report_sweep(r: &SweepResult) {
    let s = &r.summary;
    eprintln!(
        "{}: {} on {} with {}: {} trials, failure rate {:.4} (tolerance {:.4}), mean steps {:.1}, p95 {}, max switches {}",
        r.spec.name, r.learner, r.spec.space, r.spec.expert, s.trials, s.failure_rate, s.tolerance,
        s.mean_steps, s.p95_steps, s.max_switches
    );
}

fn replay(path: &Path, out: Option<&Path>) -> CliResult {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    let session = Session::replay_export("replay", &text).map_err(config_err)?;
    echo(session.config(), session.config().seed);
    let mut w = sink(out)?;
    let io = |e: io::Error| run_err(e);
    writeln!(w, "step,version_space_size,hypothesis").map_err(io)?;
    for p in session.history() {
        writeln!(w, "{},{},{}", p.step, p.version_space_size, p.hypothesis).map_err(io)?;
    }
    let view = session.view();
    eprintln!(
        "replayed {} records; terminated={} hypothesis={}",
        session.transcript().records().len(),
        view.terminated,
        view.hypothesis
    );
    w.flush().map_err(io)
}

fn audit(cli: &Cli, args: &AuditArgs) -> CliResult {
    let specs = experiments(cli, &args.experiment, true)?;
    echo(&specs, cli.seed);
    let mut clean = true;
    let mut out = io::stdout().lock();
    for spec in &specs {
        let r = verify_upper_bound(spec).map_err(run_err)?;
        let summary = r.audit.clone().unwrap_or_default();
        clean &= summary.clean();
        print_audit(&mut out, spec, &r, &summary).map_err(run_err)?;
    }
    if let Some(path) = &args.emit_trace {
        let spec = &specs[0];
        if args.trial >= spec.trials {
            return Err(Failure::Config(format!(
                "--trial {} but only {} trials",
                args.trial, spec.trials
            )));
        }
        let (_, _, rows) = audit_trial(spec, args.trial).map_err(run_err)?;
        write_audit_rows(sink(Some(path))?, spec, spec.seed, &rows).map_err(run_err)?;
        eprintln!("wrote {} rows to {}", rows.len(), path.display());
    }
    if clean {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

#[derive(Serialize)]
struct AuditText<'a> {
    name: &'a str,
    space: String,
    learner: String,
    expert: &'a str,
    clean: bool,
    audit: &'a AuditSummary,
}

fn print_audit(
    out: &mut impl Write,
    spec: &ExperimentSpec,
    r: &SweepResult,
    a: &AuditSummary,
) -> io::Result<()> {
    let text = AuditText {
        name: &spec.name,
        space: spec.space.to_string(),
        learner: r.learner.to_string(),
        expert: &spec.expert,
        clean: a.clean(),
        audit: a,
    };
    let body = toml::to_string_pretty(&text).map_err(io::Error::other)?;
    writeln!(out, "[[report]]\n{body}")
}

fn curves(cli: &Cli, args: &CurvesArgs) -> CliResult {
    let policies = args
        .policies
        .iter()
        .map(|p| p.parse::<ValuePolicy>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(config_err)?;
    #[derive(Serialize)]
    struct Echo<'a> {
        c: &'a [u32],
        policies: Vec<String>,
        grid: usize,
    }
    let config = Echo {
        c: &args.c,
        policies: policies.iter().map(|p| p.to_string()).collect(),
        grid: args.grid,
    };
    echo(&config, cli.seed);
    let mut all = Vec::new();
    for &c in &args.c {
        for &p in &policies {
            all.push(policy_curve(p, c, args.grid).map_err(config_err)?);
        }
    }
    write_curves(sink(args.out.as_deref())?, &config, cli.seed, &all).map_err(run_err)?;
    let rows: usize = all.iter().map(|c| c.samples.len()).sum();
    eprintln!("{rows} rows");
    Ok(())
}

fn lower_bound(cli: &Cli, args: &LowerBoundArgs) -> CliResult {
    echo(args, cli.seed);
    match args.construction {
        Construction::Single => {
            let rounds = run_single_query_lower_bound(args.c).map_err(config_err)?;
            println!("rounds_to_half_error={rounds}");
        }
        Construction::TwoPoint => {
            let r = run_two_point_lower_bound(args.c, args.epsilon, args.trials, cli.seed)
                .map_err(config_err)?;
            let rare = r.rare_draws.iter().sum::<u64>() as f64 / r.trials as f64;
            println!("c={} epsilon={} trials={}", r.c, r.epsilon, r.trials);
            println!("mean_steps={:.3}", r.mean_steps);
            println!("p5_steps={}", r.p5_steps);
            println!("mean_rare_draws={rare:.3}");
            println!("reference={:.3}", r.c as f64 / (4.0 * r.epsilon));
        }
        Construction::Sparse => {
            let r = run_sparse_lower_bound(args.l, args.c, args.epsilon, args.trials, cli.seed)
                .map_err(config_err)?;
            println!(
                "l={} c={} epsilon={} trials={}",
                r.l, r.c, r.epsilon, r.trials
            );
            println!("mean_queries={:.3}", r.mean_queries);
            println!("reference={:.3}", r.reference);
            println!("ratio={:.3}", r.mean_queries / r.reference);
            println!(
                "min_changes={}",
                r.changes.iter().min().copied().unwrap_or(0)
            );
        }
    }
    Ok(())
}

fn sweep(cli: &Cli, args: &SweepArgs) -> CliResult {
    if args.check {
        let opts = CriteriaOptions {
            seed: cli.seed,
            trials: args.trials,
        };
        echo(&opts, cli.seed);
        let outcomes = run_all(&opts).map_err(run_err)?;
        let failed = outcomes.iter().filter(|o| !o.passed).count();
        for o in &outcomes {
            println!("{o}");
        }
        println!(
            "acceptance: {} of {} criteria passed",
            outcomes.len() - failed,
            outcomes.len()
        );
        return if failed == 0 {
            Ok(())
        } else {
            Err(Failure::Check)
        };
    }
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Failure::Config("sweep needs --config (or --check)".into()))?;
    let specs = load_config(path)?;
    for s in &specs {
        s.resolve()
            .map_err(|e| Failure::Config(format!("experiment '{}': {e}", s.name)))?;
    }
    echo(&specs, cli.seed);
    let mut trials = Vec::new();
    let mut ok = true;
    let mut out = io::stdout().lock();
    for spec in &specs {
        let r = if args.phase1 {
            verify_phase1_generalization(spec)
        } else {
            verify_upper_bound(spec)
        }
        .map_err(run_err)?;
        let pass = r.summary.within_tolerance() && r.audit.as_ref().is_none_or(AuditSummary::clean);
        ok &= pass;
        writeln!(
            out,
            "{} {}: failure rate {:.4} (tolerance {:.4}), mean steps {:.1}, max switches {}",
            if pass { "PASS" } else { "FAIL" },
            spec.name,
            r.summary.failure_rate,
            r.summary.tolerance,
            r.summary.mean_steps,
            r.summary.max_switches
        )
        .map_err(run_err)?;
        trials.extend(r.trials);
    }
    if let Some(p) = &args.out {
        write_trials(sink(Some(p))?, &specs, cli.seed, &trials).map_err(run_err)?;
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn serve_cmd(args: &ServeArgs) -> CliResult {
    let runtime = tokio::runtime::Runtime::new().map_err(run_err)?;
    runtime
        .block_on(serve(ServeOptions {
            addr: args.addr,
            static_dir: args.static_dir.clone(),
            journal_dir: args.journal.clone(),
        }))
        .map_err(run_err)
}

fn enumerate(args: &EnumerateArgs) -> CliResult {
    let spec: SpaceSpec = args.space.parse().map_err(config_err)?;
    let instance = Instance::new(spec.build().map_err(config_err)?);
    println!(
        "|H|={} c={} |Q|={}",
        instance.num_hypotheses(),
        instance.components(),
        instance.num_queries()
    );
    Ok(())
}
