//! `qfc`: entanglement-assisted capacities, rate sweeps, invariant suites and
//! feedback protocol simulation from the command line.
//!
//! Exit codes: 0 success, 1 invariant failure, 2 invalid input,
//! 3 optimizer non-convergence.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qfc_core::capacity::{entanglement_assisted_capacity, max_coherent_information, CapacityOptions};
use qfc_core::channels::by_name;
use qfc_core::feedback::{simulate_feedback_protocol, FeedbackDims, FeedbackProtocol, ProtocolTrajectory};
use qfc_core::par::map_indexed;
use qfc_core::rates::{check_capacity_ordering, erasure_feedback_rate, erasure_feedback_rate_via_protocol, RateSet};
use qfc_core::suites::{run_suite, Suite, VerifyTolerances};
use qfc_core::{Execution, QfcError, QuantumChannel};

#[derive(Parser, Debug)]
#[command(name = "qfc", version, about = "Quantum feedback capacity toolkit")]
struct Cli {
    /// Run batch loops on one thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Entanglement-assisted capacity and coherent-information maximum of one channel.
    Capacity {
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        optimizer: OptimizerArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Capacities and feedback rates over a parameter grid.
    Sweep {
        /// Channel name: identity, erasure, depolarizing or dephasing.
        #[arg(long)]
        channel: String,
        /// Grid as start:end:step (inclusive of end).
        #[arg(long)]
        param_range: String,
        #[arg(long)]
        dim: Option<usize>,
        #[command(flatten)]
        optimizer: OptimizerArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Randomized invariant suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol_inequality: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol_identity: f64,
        #[arg(long, default_value_t = 1e-7)]
        tol_theorem3: f64,
        #[arg(long, default_value_t = 1e-4)]
        tol_gradient: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Simulate a seeded random n-round feedback protocol.
    SimulateFeedback {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, default_value_t = 2)]
        rounds: usize,
        #[arg(long, default_value_t = 4)]
        messages: usize,
        #[arg(long, default_value_t = 2)]
        x_dim: usize,
        #[arg(long, default_value_t = 2)]
        y_dim: usize,
        #[arg(long, default_value_t = 2)]
        z_dim: usize,
        /// Dimension of the entangled pair shared before the first round.
        #[arg(long, default_value_t = 1)]
        shared_dim: usize,
        /// Slack allowed in the per-round bounds.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Debug)]
struct ChannelArgs {
    /// Channel name: identity, erasure, depolarizing or dephasing.
    #[arg(long, conflicts_with = "channel_file", required_unless_present = "channel_file")]
    channel: Option<String>,
    /// JSON file with `name`, `d_in`, `d_out` and `kraus` ([re, im] entries).
    #[arg(long)]
    channel_file: Option<PathBuf>,
    #[arg(long)]
    param: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct OptimizerArgs {
    /// Frank-Wolfe gap at which a start counts as converged.
    #[arg(long, default_value_t = 1e-8)]
    gap_tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    /// Random starts in addition to the maximally mixed state.
    #[arg(long, default_value_t = 4)]
    restarts: usize,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Failure carrying its exit code.
#[derive(Debug)]
enum Failure {
    Invariant(String),
    Invalid(String),
    NotConverged(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invariant(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::NotConverged(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Invariant(m) | Failure::Invalid(m) | Failure::NotConverged(m) => m,
        }
    }
}

impl From<QfcError> for Failure {
    fn from(e: QfcError) -> Self {
        match e {
            QfcError::Consistency(_) => Failure::Invariant(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

/// Output text plus an optional failure raised after the output is written.
struct Report {
    text: String,
    failure: Option<Failure>,
}

fn emit(out: &OutputArgs, text: &str) -> CliResult<()> {
    match &out.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Invalid(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn json_only(out: &OutputArgs, command: &str) -> CliResult<()> {
    if out.format == Some(Format::Csv) {
        return Err(Failure::Invalid(format!("`{command}` writes JSON only")));
    }
    Ok(())
}

fn load_channel(args: &ChannelArgs) -> CliResult<QuantumChannel> {
    match (&args.channel, &args.channel_file) {
        (Some(name), None) => Ok(by_name(name, args.param, args.dim)?),
        (None, Some(path)) => Ok(QuantumChannel::from_json_file(path)?),
        _ => Err(Failure::Invalid("give exactly one of --channel and --channel-file".into())),
    }
}

fn capacity_options(o: &OptimizerArgs, seed: u64, exec: Execution) -> CliResult<CapacityOptions> {
    if !(o.gap_tol > 0.0) || o.max_iter == 0 {
        return Err(Failure::Invalid("--gap-tol must be positive and --max-iter at least 1".into()));
    }
    Ok(CapacityOptions { gap_tol: o.gap_tol, max_iter: o.max_iter, restarts: o.restarts, seed, execution: exec })
}

#[derive(Serialize)]
struct CapacityOutput {
    channel: String,
    #[serde(rename = "C_E")]
    c_e: f64,
    #[serde(rename = "Q_E")]
    q_e: f64,
    coherent_info_max: f64,
    iterations: usize,
    stationarity_gap: f64,
    multistart_spread: f64,
    converged: bool,
    coherent_info_converged: bool,
}

fn cmd_capacity(channel: &ChannelArgs, optimizer: &OptimizerArgs, out: &OutputArgs, exec: Execution) -> CliResult<Report> {
    json_only(out, "capacity")?;
    let ch = load_channel(channel)?;
    let opts = capacity_options(optimizer, channel.seed, exec)?;
    let ea = entanglement_assisted_capacity(&ch, &opts)?;
    let ci = max_coherent_information(&ch, &opts)?;
    let body = CapacityOutput {
        channel: ch.name().to_string(),
        c_e: ea.value,
        q_e: ea.value / 2.0,
        coherent_info_max: ci.value,
        iterations: ea.iterations,
        stationarity_gap: ea.stationarity_gap,
        multistart_spread: ea.multistart_spread,
        converged: ea.converged,
        coherent_info_converged: ci.converged,
    };
    let failure = (!ea.converged).then(|| {
        Failure::NotConverged(format!(
            "capacity optimizer stopped at gap {:e} after {} iterations",
            ea.stationarity_gap, ea.iterations
        ))
    });
    Ok(Report { text: to_json(&body), failure })
}

/// Inclusive grid `start, start + step, ..` up to `end`, snapped to 12
/// decimals so that printed parameters stay short.
fn parse_range(s: &str) -> CliResult<Vec<f64>> {
    let bad = || Failure::Invalid(format!("--param-range `{s}` is not start:end:step"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<CliResult<_>>()?;
    let [start, end, step] = parts[..] else { return Err(bad()) };
    if !(start.is_finite() && end.is_finite() && step.is_finite()) || start > end || !(step > 0.0) {
        return Err(Failure::Invalid(format!(
            "--param-range needs start <= end and step > 0, got {s}"
        )));
    }
    let n = ((end - start) / step + 1e-9).floor() as usize + 1;
    if n > 100_000 {
        return Err(Failure::Invalid(format!("--param-range yields {n} points")));
    }
    Ok((0..n).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect())
}

#[derive(Serialize)]
struct SweepRow {
    param: f64,
    #[serde(rename = "C_E")]
    c_e: f64,
    #[serde(rename = "Q_E")]
    q_e: f64,
    #[serde(rename = "Q_unassisted_lb")]
    q_lb: f64,
    #[serde(rename = "Q_FB_star")]
    q_fb_star: Option<f64>,
    ordering_ok: bool,
    #[serde(skip)]
    converged: bool,
}

/// Shortest round-trip form, same as in the JSON output.
fn num(v: f64) -> String {
    serde_json::to_string(&v).expect("finite float")
}

const SWEEP_HEADER: &str = "param,C_E,Q_E,Q_unassisted_lb,Q_FB_star,ordering_ok";

fn sweep_row(name: &str, param: f64, dim: Option<usize>, opts: &CapacityOptions) -> CliResult<SweepRow> {
    let ch = by_name(name, Some(param), dim)?;
    let ea = entanglement_assisted_capacity(&ch, opts)?;
    let ci = max_coherent_information(&ch, opts)?;
    let q_fb_star = if name == "erasure" {
        // the protocol formula needs a positive feedback rate 1 - ε
        Some(if param < 1.0 { erasure_feedback_rate_via_protocol(param)? } else { erasure_feedback_rate(param)? })
    } else {
        None
    };
    let rates = RateSet {
        c_e: Some(ea.value),
        q_e: Some(ea.value / 2.0),
        q: Some(ci.value),
        q_fb_star,
        ..Default::default()
    };
    Ok(SweepRow {
        param,
        c_e: ea.value,
        q_e: ea.value / 2.0,
        q_lb: ci.value,
        q_fb_star,
        ordering_ok: check_capacity_ordering(&rates).is_empty(),
        converged: ea.converged,
    })
}

fn cmd_sweep(
    name: &str,
    range: &str,
    dim: Option<usize>,
    optimizer: &OptimizerArgs,
    out: &OutputArgs,
    exec: Execution,
) -> CliResult<Report> {
    let grid = parse_range(range)?;
    let opts = capacity_options(optimizer, 0, exec)?;
    // grid points in parallel, each optimizer sequential; rows keep grid order
    let inner = CapacityOptions { execution: Execution::Sequential, ..opts };
    let rows = map_indexed(exec, grid.len(), |i| sweep_row(name, grid[i], dim, &inner))
        .into_iter()
        .collect::<CliResult<Vec<_>>>()?;
    let text = match out.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut s = String::from(SWEEP_HEADER);
            s.push('\n');
            for r in &rows {
                let fb = r.q_fb_star.map(num).unwrap_or_default();
                let cells = [num(r.param), num(r.c_e), num(r.q_e), num(r.q_lb), fb, r.ordering_ok.to_string()];
                writeln!(s, "{}", cells.join(",")).expect("string write");
            }
            s
        }
    };
    let failure = if let Some(r) = rows.iter().find(|r| !r.converged) {
        Some(Failure::NotConverged(format!("capacity optimizer did not converge at param {}", r.param)))
    } else if let Some(r) = rows.iter().find(|r| !r.ordering_ok) {
        Some(Failure::Invariant(format!("capacity ordering violated at param {}", r.param)))
    } else {
        None
    };
    Ok(Report { text, failure })
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(suite: &str, trials: usize, seed: u64, tol: VerifyTolerances, out: &OutputArgs, exec: Execution) -> CliResult<Report> {
    json_only(out, "verify")?;
    let suite: Suite = suite.parse()?;
    let summary = run_suite(suite, trials, seed, &tol, exec)?;
    if let Some(w) = &summary.warning {
        eprintln!("warning: {w}");
    }
    let failure = (!summary.passed())
        .then(|| Failure::Invariant(format!("{} invariant check(s) failed", summary.failures.len())));
    Ok(Report { text: to_json(&summary), failure })
}

#[derive(Serialize)]
struct SimulationOutput<'a> {
    #[serde(flatten)]
    trajectory: &'a ProtocolTrajectory,
    total_mi: f64,
    lemma1_bound_holds: bool,
}

fn cmd_simulate(
    channel: &ChannelArgs,
    rounds: usize,
    messages: usize,
    dims: FeedbackDims,
    tol: f64,
    out: &OutputArgs,
) -> CliResult<Report> {
    json_only(out, "simulate-feedback")?;
    let ch = load_channel(channel)?;
    let protocol = FeedbackProtocol::random(ch, rounds, dims, messages, channel.seed)?;
    let traj = simulate_feedback_protocol(&protocol)?;
    let holds = traj.lemma_bound_holds(tol) && traj.message_invariant();
    let body = SimulationOutput { trajectory: &traj, total_mi: traj.total_mi(), lemma1_bound_holds: holds };
    let failure = (!holds).then(|| Failure::Invariant("a round violated the conditional-term bound".into()));
    Ok(Report { text: to_json(&body), failure })
}

fn run(cli: Cli) -> CliResult<()> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    let (report, out) = match &cli.command {
        Command::Capacity { channel, optimizer, output } => (cmd_capacity(channel, optimizer, output, exec)?, output),
        Command::Sweep { channel, param_range, dim, optimizer, output } => {
            (cmd_sweep(channel, param_range, *dim, optimizer, output, exec)?, output)
        }
        Command::Verify { suite, trials, seed, tol_inequality, tol_identity, tol_theorem3, tol_gradient, output } => {
            let tol = VerifyTolerances {
                inequality: *tol_inequality,
                identity: *tol_identity,
                theorem3: *tol_theorem3,
                gradient: *tol_gradient,
            };
            (cmd_verify(suite, *trials, *seed, tol, output, exec)?, output)
        }
        Command::SimulateFeedback { channel, rounds, messages, x_dim, y_dim, z_dim, shared_dim, tol, output } => {
            let dims = FeedbackDims { x: *x_dim, y: *y_dim, z: *z_dim, shared: *shared_dim };
            (cmd_simulate(channel, *rounds, *messages, dims, *tol, output)?, output)
        }
    };
    emit(out, &report.text)?;
    report.failure.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
