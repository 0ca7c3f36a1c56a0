use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use rtokit::exactnum::Rational;
use rtokit::limitwit::{self, WitnessMethod};
use rtokit::netsim::{self, ChannelConfig, SimConfig, SimReport};
use rtokit::rtocalc::{self, RtoParams, RtoState};
use rtokit::scenario::{self, ScenarioKind, ScenarioSpec};
use rtokit::steadystate::{self, ConvergenceTarget, SteadySpec};
use rtokit::trace::{Trace, TraceRow};

/// Exit codes: 0 success, 1 verification or invariant failure, 2 usage error.
fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#[derive(Parser)]
#[command(
    name = "rtokit",
    version,
    about = "Exact-rational RTO analysis: witnesses, bounds, scenarios, and a Karn-sampling simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute convergence witnesses delta(alpha, eps) and verify them exactly
    Witness(WitnessArgs),
    /// Run the rto recursion over a samples file and emit a trace CSV
    Trace(TraceArgs),
    /// Evaluate steady-state bounds and convergence cutoffs
    Bounds(BoundsArgs),
    /// Generate a preset sample scenario and detect timeouts
    Scenario(ScenarioArgs),
    /// Drive the discrete-event channel simulation
    Simulate(SimulateArgs),
}

fn run(cli: Cli) -> rtokit::Result<ExitCode> {
    match cli.command {
        Command::Witness(args) => cmd_witness(args),
        Command::Trace(args) => cmd_trace(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Scenario(args) => cmd_scenario(args),
        Command::Simulate(args) => cmd_simulate(args),
    }
}

#[derive(Args)]
struct GainArgs {
    /// Smoothing gain, in (0, 1)
    #[arg(long, default_value = "1/8")]
    alpha: Rational,
    /// Deviation gain, in (0, 1)
    #[arg(long, default_value = "1/4")]
    beta: Rational,
    /// Clock granularity, same time unit as the samples (no default: its
    /// size relative to the sample spread decides timeout behavior)
    #[arg(long)]
    g: Rational,
}

impl GainArgs {
    fn params(&self) -> rtokit::Result<RtoParams> {
        RtoParams::new(self.alpha.clone(), self.beta.clone(), self.g.clone())
    }
}

// --- witness -------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Ceiling,
    Binomial,
    Both,
    BruteForce,
}

#[derive(Args)]
struct WitnessArgs {
    /// Base of the decaying power, in [0, 1)
    #[arg(long)]
    alpha: Rational,
    /// Threshold the powers must fall below, > 0
    #[arg(long)]
    eps: Rational,
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    method: MethodArg,
    /// How many exponents past delta to verify exactly
    #[arg(long, default_value_t = 10)]
    verify: u64,
}

fn cmd_witness(args: WitnessArgs) -> rtokit::Result<ExitCode> {
    let methods: &[WitnessMethod] = match args.method {
        MethodArg::Ceiling => &[WitnessMethod::Ceiling],
        MethodArg::Binomial => &[WitnessMethod::BinomialSemiAuto],
        MethodArg::BruteForce => &[WitnessMethod::BruteForce],
        MethodArg::Both => &[WitnessMethod::Ceiling, WitnessMethod::BinomialSemiAuto],
    };
    let mut all_ok = true;
    for &method in methods {
        let witness = limitwit::witness_for(method, &args.alpha, &args.eps)?;
        println!("method={} delta={}", method.name(), witness.delta);
        if args.verify > 0 {
            let ok = witness.verify(args.verify);
            let checks = if ok { args.verify } else { 0 };
            println!(
                "verify: {}/{} exponents n in (delta, delta+{}] satisfy alpha^n < eps",
                checks, args.verify, args.verify
            );
            all_ok &= ok;
        }
    }
    Ok(if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

// --- trace ---------------------------------------------------------------

#[derive(Args)]
struct TraceArgs {
    /// File of samples: rationals separated by whitespace, commas or newlines
    #[arg(long)]
    samples: PathBuf,
    #[command(flatten)]
    gains: GainArgs,
    /// Add steady-state bound columns (needs --c, --r and both priors)
    #[arg(long)]
    bounds: bool,
    /// Steady-state center
    #[arg(long)]
    c: Option<Rational>,
    /// Steady-state radius
    #[arg(long)]
    r: Option<Rational>,
    /// srtt before the first sample (bounds mode starts from this state)
    #[arg(long)]
    srtt_prior: Option<Rational>,
    /// rttvar before the first sample
    #[arg(long)]
    rttvar_prior: Option<Rational>,
    /// Append decimal-approximation columns with this many digits
    #[arg(long)]
    decimal: Option<u32>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_samples(path: &Path) -> rtokit::Result<Vec<Rational>> {
    let mut text = String::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| rtokit::Error::InvalidParams(format!("cannot read {}: {e}", path.display())))?;
    text.split(|ch: char| ch.is_whitespace() || ch == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse())
        .collect()
}

fn cmd_trace(args: TraceArgs) -> rtokit::Result<ExitCode> {
    let params = args.gains.params()?;
    let samples = read_samples(&args.samples)?;

    let spec = if args.bounds {
        let (c, r, sp, vp) = match (&args.c, &args.r, &args.srtt_prior, &args.rttvar_prior) {
            (Some(c), Some(r), Some(sp), Some(vp)) => (c, r, sp, vp),
            _ => {
                return Err(rtokit::Error::InvalidParams(
                    "--bounds needs --c, --r, --srtt-prior and --rttvar-prior".into(),
                ))
            }
        };
        let spec = SteadySpec::new(c.clone(), r.clone(), params.clone(), sp.clone(), vp.clone())?;
        if steadystate::is_steady_state(&samples, c, r) {
            Some(spec)
        } else {
            eprintln!("warning: samples leave [c-r, c+r]; bound columns omitted");
            None
        }
    } else {
        None
    };

    let trace = match &spec {
        Some(spec) => {
            let prior = RtoState::resume(&params, 0, spec.srtt_prior.clone(), spec.rttvar_prior.clone());
            let states = rtocalc::run_from(&params, &prior, &samples)?;
            let rows = samples
                .iter()
                .zip(&states)
                .enumerate()
                .map(|(t, (sample, st))| {
                    let (lower, upper) = steadystate::srtt_bounds(spec, t as u64);
                    let rv_upper = steadystate::rttvar_upper_window(spec, t as u64, 0, None)?;
                    Ok(TraceRow {
                        step: st.step,
                        sample: sample.clone(),
                        srtt: st.srtt.clone(),
                        rttvar: st.rttvar.clone(),
                        rto: st.rto.clone(),
                        lower: Some(lower),
                        upper: Some(upper),
                        rttvar_upper: Some(rv_upper),
                        timeout: None,
                    })
                })
                .collect::<rtokit::Result<Vec<_>>>()?;
            Trace { rows }
        }
        None => {
            let states = rtocalc::run(&params, &samples)?;
            Trace::from_run(&samples, &states)
        }
    };

    write_trace(&trace, args.decimal, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn write_trace(trace: &Trace, decimals: Option<u32>, out: Option<&Path>) -> rtokit::Result<()> {
    match out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| {
                rtokit::Error::InvalidParams(format!("cannot write {}: {e}", path.display()))
            })?;
            trace.write_csv(file, decimals)
        }
        None => trace.write_csv(io::stdout().lock(), decimals),
    }
}

// --- bounds --------------------------------------------------------------

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    gains: GainArgs,
    /// Steady-state center
    #[arg(long)]
    c: Rational,
    /// Steady-state radius
    #[arg(long)]
    r: Rational,
    #[arg(long)]
    srtt_prior: Rational,
    #[arg(long)]
    rttvar_prior: Rational,
    /// Window length: bounds apply to the state after n+1 samples
    #[arg(long)]
    n: u64,
    /// Window split for the rttvar bound
    #[arg(long, default_value_t = 0)]
    m: u64,
    /// Running rttvar at the split (required when m > 0)
    #[arg(long)]
    rttvar_at: Option<Rational>,
    /// Also emit convergence cutoffs certified to within this eps
    #[arg(long)]
    eps: Option<Rational>,
}

fn cmd_bounds(args: BoundsArgs) -> rtokit::Result<ExitCode> {
    let params = args.gains.params()?;
    let spec = SteadySpec::new(
        args.c.clone(),
        args.r.clone(),
        params,
        args.srtt_prior.clone(),
        args.rttvar_prior.clone(),
    )?;
    let report = steadystate::bound_report(&spec, args.n, args.m, args.rttvar_at.as_ref())?;
    println!("L = {}", report.lower);
    println!("H = {}", report.upper);
    println!("delta_m = {}", report.delta_m);
    println!("rttvar_upper = {}", report.rttvar_upper);
    let rv_window =
        steadystate::rttvar_upper_window(&spec, args.n, args.m, args.rttvar_at.as_ref())?;
    println!("rttvar_upper_window = {rv_window}");
    println!("rttvar_steady_bound = {}", steadystate::rttvar_steady_bound(&spec, args.n));

    let mut ok = true;
    if let Some(eps) = &args.eps {
        for (name, target) in [
            ("srtt_lower", ConvergenceTarget::SrttLower),
            ("srtt_upper", ConvergenceTarget::SrttUpper),
            ("rttvar_bound", ConvergenceTarget::RttvarBound),
        ] {
            let cutoff =
                steadystate::convergence_n_for(&spec, target, eps, WitnessMethod::Ceiling)?;
            let verified = (1u32..=10)
                .all(|j| steadystate::within_eps_of_limit(&spec, target, eps, &(&cutoff + j)));
            println!("N_{name} = {cutoff} verified={verified}");
            ok &= verified;
        }
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

// --- scenario ------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PresetArg {
    Pathological,
    Uniform,
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long, value_enum)]
    preset: PresetArg,
    #[arg(long, default_value_t = 1000)]
    length: u64,
    /// Pathological: spike every this many steps
    #[arg(long, default_value_t = 100)]
    period: u64,
    /// Pathological: value of ordinary samples
    #[arg(long, default_value = "60")]
    base: Rational,
    /// Pathological: value of spike samples
    #[arg(long, default_value = "75")]
    spike: Rational,
    /// Uniform: lower edge of the sample window
    #[arg(long, default_value = "60")]
    lo: Rational,
    /// Uniform: upper edge of the sample window
    #[arg(long, default_value = "75")]
    hi: Rational,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    gains: GainArgs,
    /// Trace CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Timeout-report JSON path; without it the report goes to stdout
    /// whenever the CSV went to a file
    #[arg(long)]
    report: Option<PathBuf>,
}

fn cmd_scenario(args: ScenarioArgs) -> rtokit::Result<ExitCode> {
    let params = args.gains.params()?;
    let kind = match args.preset {
        PresetArg::Pathological => ScenarioKind::Pathological {
            period: args.period,
            base: args.base.clone(),
            spike: args.spike.clone(),
        },
        PresetArg::Uniform => ScenarioKind::Uniform {
            lo: args.lo.clone(),
            hi: args.hi.clone(),
            seed: args.seed,
        },
    };
    let spec = ScenarioSpec {
        kind,
        length: args.length,
        params,
    };
    let (samples, report) = scenario::analyze(&spec)?;

    let rows = samples
        .iter()
        .zip(&report.states)
        .map(|(sample, st)| TraceRow {
            step: st.step,
            sample: sample.clone(),
            srtt: st.srtt.clone(),
            rttvar: st.rttvar.clone(),
            rto: st.rto.clone(),
            lower: None,
            upper: None,
            rttvar_upper: None,
            timeout: Some(report.timeout_steps.contains(&st.step)),
        })
        .collect();
    let trace = Trace { rows };
    write_trace(&trace, None, args.out.as_deref())?;

    let summary = json!({
        "preset": match args.preset {
            PresetArg::Pathological => "pathological",
            PresetArg::Uniform => "uniform",
        },
        "length": args.length,
        "timeouts": {
            "count": report.timeout_steps.len(),
            "steps": report.timeout_steps,
        },
        "spike_steps": report.spike_steps,
    });
    match &args.report {
        Some(path) => write_text(path, &format!("{summary:#}\n"))?,
        None if args.out.is_some() => println!("{summary}"),
        None => {}
    }
    Ok(ExitCode::SUCCESS)
}

fn write_text(path: &Path, text: &str) -> rtokit::Result<()> {
    fs::write(path, text)
        .map_err(|e| rtokit::Error::InvalidParams(format!("cannot write {}: {e}", path.display())))
}

// --- simulate ------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReplayArg {
    Fig1,
}

#[derive(Args)]
struct SimulateArgs {
    /// Replay the scripted ambiguous-ACK timeline instead of a random run
    #[arg(long, value_enum)]
    replay: Option<ReplayArg>,
    /// Replay variant where the first copy of packet 2 is delivered
    #[arg(long)]
    lossless: bool,
    /// Per-datagram drop probability
    #[arg(long, default_value_t = 0.0)]
    drop: f64,
    /// Per-datagram duplication probability
    #[arg(long, default_value_t = 0.0)]
    dup: f64,
    /// Shorthand for --delay-min N --delay-max N
    #[arg(long)]
    delay: Option<u64>,
    #[arg(long, default_value_t = 1)]
    delay_min: u64,
    #[arg(long, default_value_t = 10)]
    delay_max: u64,
    /// Deliver ACKs in emission order
    #[arg(long)]
    fifo_acks: bool,
    #[arg(long, default_value_t = 10)]
    n_packets: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Max packets in flight
    #[arg(long, default_value_t = 1)]
    window: u64,
    /// Timer before the first sample (default 2 * max delay + 2)
    #[arg(long)]
    initial_rto: Option<u64>,
    #[arg(long, default_value_t = 200_000)]
    max_ticks: u64,
    #[command(flatten)]
    gains: GainArgs,
    /// Write samples.csv, trace.csv and invariants.json into this directory
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn report_json(report: &SimReport) -> serde_json::Value {
    json!({
        "packets_acked": report.packets_acked,
        "ticks": report.ticks,
        "samples": report.samples.iter()
            .map(|s| json!({"packet": s.packet_id, "rtt": s.rtt}))
            .collect::<Vec<_>>(),
        "ambiguous_acks": report.ambiguous_acks.iter()
            .map(|a| json!({
                "tick": a.tick, "ack": a.ack, "packet": a.packet, "tx_count": a.tx_count,
            }))
            .collect::<Vec<_>>(),
        "violations": report.violations.iter()
            .map(|v| json!({
                "invariant": v.invariant, "tick": v.tick, "details": v.details,
            }))
            .collect::<Vec<_>>(),
        "final_rto": report.final_state.as_ref().map(|s| s.rto.to_string()),
    })
}

fn cmd_simulate(args: SimulateArgs) -> rtokit::Result<ExitCode> {
    let params = args.gains.params()?;

    if let Some(ReplayArg::Fig1) = args.replay {
        let report = netsim::replay_fig1(args.lossless, &params)?;
        println!("{}", report_json(&report));
        let packet2_sampled = report.samples.iter().any(|s| s.packet_id == 2);
        if !args.lossless && packet2_sampled {
            eprintln!("replay failed: a sample was attributed to the ambiguous packet 2");
            return Ok(ExitCode::from(1));
        }
        if !report.violations.is_empty() {
            return Ok(ExitCode::from(1));
        }
        return Ok(ExitCode::SUCCESS);
    }

    let (min_delay, max_delay) = match args.delay {
        Some(d) => (d, d),
        None => (args.delay_min, args.delay_max),
    };
    let channel = ChannelConfig {
        drop_prob: args.drop,
        dup_prob: args.dup,
        min_delay,
        max_delay,
        fifo_acks: args.fifo_acks,
        seed: args.seed,
    };
    let mut cfg = SimConfig::new(channel, args.n_packets);
    cfg.window = args.window;
    cfg.max_ticks = args.max_ticks;
    if let Some(rto) = args.initial_rto {
        cfg.initial_rto = rto;
    }
    let report = netsim::run_simulation(&cfg, &params)?;

    if let Some(dir) = &args.out_dir {
        fs::create_dir_all(dir).map_err(|e| {
            rtokit::Error::InvalidParams(format!("cannot create {}: {e}", dir.display()))
        })?;
        let mut samples_csv = String::from("packet_id,rtt\n");
        for s in &report.samples {
            samples_csv.push_str(&format!("{},{}\n", s.packet_id, s.rtt));
        }
        write_text(&dir.join("samples.csv"), &samples_csv)?;

        let sample_values: Vec<Rational> =
            report.samples.iter().map(|s| Rational::from(s.rtt)).collect();
        let trace = Trace::from_run(&sample_values, &report.states);
        let file = fs::File::create(dir.join("trace.csv")).map_err(|e| {
            rtokit::Error::InvalidParams(format!("cannot write trace.csv: {e}"))
        })?;
        trace.write_csv(file, None)?;

        let log = report_json(&report)["violations"].clone();
        write_text(&dir.join("invariants.json"), &format!("{log:#}\n"))?;
    }

    println!("{}", report_json(&report));
    Ok(if report.violations.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
