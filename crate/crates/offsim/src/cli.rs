//! Command-line front end.
//!
//! Subcommands: `eval`, `sweep`, `optimize`, `emulate`, `serve`, `bitrate`.
//! Exit statuses: 0 success, 2 bad arguments, 3 profile load/validation
//! failure, 4 report I/O failure, 5 infeasible optimization, 6 transport
//! failure (connect/bind/timeout/protocol). Diagnostics go to stderr only.

use std::io::Write;
use std::net::TcpListener;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use crate::cost::evaluate_plan;
use crate::emulator::{
    emulate_event, emulate_socket, run_server, run_trials, EmulationConfig, EmulationMode,
    EmulationTrace, EmulatorError, JitterKind, JitterSpec, JitterTargets, ServerConfig, Stage,
};
use crate::phy::{link_bitrate, rate_warnings, PhyConfig};
use crate::planner::{optimize, sweep, Constraint, Objective, PlannerError};
use crate::profiles::{
    default_profile_with_overrides, load_profile, ExecutionPlan, ProfileError, SystemProfile,
};
use crate::report::{to_csv, ReportRow, CSV_HEADER};

#[derive(Parser)]
#[command(
    name = "offsim",
    version,
    about = "Cost model, planner, and emulator for split CNN inference offloading"
)]
struct Cli {
    /// Profile file (TOML). Falls back to $OFFSIM_PROFILE, then to the
    /// built-in measured defaults.
    #[arg(long, global = true, env = "OFFSIM_PROFILE", value_name = "PATH")]
    profile: Option<PathBuf>,

    /// Profile override `section.key=value`; repeatable, applied last.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Use the refined model with fitted constant overheads (the default).
    #[arg(long, global = true, conflicts_with = "idealized")]
    refined: bool,

    /// Drop the constant compute overheads and the preprocessing stage.
    #[arg(long, global = true)]
    idealized: bool,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

impl Cli {
    fn refined(&self) -> bool {
        !self.idealized
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Delay,
    Energy,
    Weighted,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Event,
    Socket,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one (exit, split) plan.
    Eval {
        #[arg(long)]
        exit: u32,
        #[arg(long)]
        split: u32,
    },
    /// Evaluate the full exit x split grid.
    Sweep {
        /// Write the report here instead of standard output.
        #[arg(long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
    /// Pick the feasible plan minimizing an objective.
    Optimize {
        #[arg(long, value_enum, default_value_t = ObjectiveArg::Delay)]
        objective: ObjectiveArg,
        /// Delay weight (weighted objective).
        #[arg(long, default_value_t = 1.0)]
        weight_delay: f64,
        /// Energy weight (weighted objective).
        #[arg(long, default_value_t = 1.0)]
        weight_energy: f64,
        /// Minimum acceptable accuracy in [0, 1].
        #[arg(long)]
        min_accuracy: Option<f64>,
        /// Maximum total delay in ms.
        #[arg(long)]
        max_delay: Option<f64>,
        /// Maximum total energy in J.
        #[arg(long)]
        max_energy: Option<f64>,
    },
    /// Replay one plan as an emulated round, n times.
    Emulate {
        #[arg(long)]
        exit: u32,
        #[arg(long)]
        split: u32,
        #[arg(long, value_enum, default_value_t = ModeArg::Event)]
        mode: ModeArg,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// none | gaussian:<std_ms> | lognormal:<mu>:<sigma>, optionally
        /// followed by @targets from {ul,dl,dev,mec} (default: all).
        #[arg(long, default_value = "none")]
        jitter: String,
        /// Task server address (socket mode).
        #[arg(long, default_value = "127.0.0.1:7878")]
        endpoint: String,
        /// Uplink shaping rate in bit/s (socket mode); defaults to the
        /// profile uplink bitrate.
        #[arg(long)]
        shaping_ul: Option<f64>,
        /// Downlink shaping rate hint passed to the trace (socket mode).
        #[arg(long)]
        shaping_dl: Option<f64>,
        /// Per-stage timeout in seconds (socket mode).
        #[arg(long, default_value_t = 30.0)]
        timeout: f64,
        /// Also print the event timeline of one round.
        #[arg(long)]
        trace: bool,
    },
    /// Serve socket-mode tasks until interrupted.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7878")]
        endpoint: String,
        /// Downlink shaping rate in bit/s; defaults to the profile downlink
        /// bitrate.
        #[arg(long)]
        shaping_dl: Option<f64>,
    },
    /// Theoretical link bitrate from physical-layer parameters.
    Bitrate {
        /// Number of resource blocks.
        #[arg(long)]
        n_rb: u64,
        /// Subcarriers per resource block.
        #[arg(long)]
        n_sub: u64,
        /// Bits per modulation symbol.
        #[arg(long)]
        n_bits: u64,
        /// Modulation symbols per subcarrier per second.
        #[arg(long)]
        n_sym: u64,
        /// Code rate in (0, 1].
        #[arg(long)]
        code_rate: f64,
    },
}

enum CliError {
    BadArgs(String),
    Profile(ProfileError),
    Io(std::io::Error),
    Infeasible(PlannerError),
    Transport(EmulatorError),
}

impl CliError {
    fn status(&self) -> i32 {
        match self {
            CliError::BadArgs(_) => 2,
            CliError::Profile(ProfileError::Override { .. }) => 2,
            CliError::Profile(_) => 3,
            CliError::Io(_) => 4,
            CliError::Infeasible(_) => 5,
            CliError::Transport(_) => 6,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::BadArgs(m) => m.clone(),
            CliError::Profile(e) => e.to_string(),
            CliError::Io(e) => format!("cannot write report: {e}"),
            CliError::Infeasible(e) => e.to_string(),
            CliError::Transport(e) => e.to_string(),
        }
    }
}

/// Parses arguments, runs the selected command, and returns the process
/// exit status.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return status;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("offsim: {}", e.message());
            e.status()
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let profile = load(&cli)?;
    let refined = cli.refined();
    match &cli.command {
        Command::Eval { exit, split } => cmd_eval(&cli, &profile, *exit, *split, refined),
        Command::Sweep { output } => cmd_sweep(&cli, &profile, output.as_deref(), refined),
        Command::Optimize {
            objective,
            weight_delay,
            weight_energy,
            min_accuracy,
            max_delay,
            max_energy,
        } => {
            let objective = match objective {
                ObjectiveArg::Delay => Objective::MinDelay,
                ObjectiveArg::Energy => Objective::MinEnergy,
                ObjectiveArg::Weighted => Objective::Weighted {
                    weight_delay: *weight_delay,
                    weight_energy: *weight_energy,
                },
            };
            let constraint = Constraint {
                min_accuracy: *min_accuracy,
                max_delay_s: max_delay.map(|ms| ms * 1e-3),
                max_energy_j: *max_energy,
            };
            cmd_optimize(&cli, &profile, objective, constraint, refined)
        }
        Command::Emulate {
            exit,
            split,
            mode,
            trials,
            seed,
            jitter,
            endpoint,
            shaping_ul,
            shaping_dl,
            timeout,
            trace,
        } => {
            let cfg = EmulationConfig {
                mode: match mode {
                    ModeArg::Event => EmulationMode::Event,
                    ModeArg::Socket => EmulationMode::Socket,
                },
                jitter: parse_jitter(jitter).map_err(CliError::BadArgs)?,
                seed: *seed,
                shaping_rate_ul: *shaping_ul,
                shaping_rate_dl: *shaping_dl,
                endpoint: endpoint.clone(),
                stage_timeout: Duration::from_secs_f64(timeout.max(0.0)),
            };
            cmd_emulate(&cli, &profile, *exit, *split, &cfg, *trials, *trace, refined)
        }
        Command::Serve {
            endpoint,
            shaping_dl,
        } => cmd_serve(&profile, endpoint, *shaping_dl, refined),
        Command::Bitrate {
            n_rb,
            n_sub,
            n_bits,
            n_sym,
            code_rate,
        } => cmd_bitrate(&cli, &profile, *n_rb, *n_sub, *n_bits, *n_sym, *code_rate),
    }
}

fn load(cli: &Cli) -> Result<SystemProfile<f64>, CliError> {
    let mut overrides = Vec::with_capacity(cli.set.len());
    for entry in &cli.set {
        let (key, value) = entry.split_once('=').ok_or_else(|| {
            CliError::BadArgs(format!("--set expects KEY=VALUE, got `{entry}`"))
        })?;
        overrides.push((key, value));
    }
    let profile = match &cli.profile {
        Some(path) => load_profile(path, &overrides),
        None => default_profile_with_overrides(&overrides),
    }
    .map_err(CliError::Profile)?;
    for warning in profile.validate().expect("loaded profile is valid") {
        eprintln!("offsim: {warning}");
    }
    Ok(profile)
}

fn checked_plan(
    exit: u32,
    split: u32,
    profile: &SystemProfile<f64>,
) -> Result<ExecutionPlan, CliError> {
    ExecutionPlan::checked(exit, split, &profile.topology)
        .map_err(|e| CliError::BadArgs(e.to_string()))
}

fn cmd_eval(
    cli: &Cli,
    profile: &SystemProfile<f64>,
    exit: u32,
    split: u32,
    refined: bool,
) -> Result<(), CliError> {
    let plan = checked_plan(exit, split, profile)?;
    let report = evaluate_plan(plan, profile, refined);
    match cli.format {
        OutputFormat::Csv => {
            println!("{CSV_HEADER}");
            println!("{}", ReportRow::rounded(&report).to_csv_line());
        }
        OutputFormat::Json => print_json(&ReportRow::full(&report)),
    }
    Ok(())
}

fn cmd_sweep(
    cli: &Cli,
    profile: &SystemProfile<f64>,
    output: Option<&std::path::Path>,
    refined: bool,
) -> Result<(), CliError> {
    let result = sweep(profile, refined);
    let rendered = match cli.format {
        OutputFormat::Csv => {
            let rows: Vec<ReportRow> = result.rows.iter().map(ReportRow::rounded).collect();
            to_csv(&rows)
        }
        OutputFormat::Json => {
            let rows: Vec<ReportRow> = result.rows.iter().map(ReportRow::full).collect();
            let mut text =
                serde_json::to_string_pretty(&rows).expect("report serialization cannot fail");
            text.push('\n');
            text
        }
    };
    match output {
        Some(path) => std::fs::write(path, rendered).map_err(CliError::Io)?,
        None => print!("{rendered}"),
    }
    Ok(())
}

fn cmd_optimize(
    cli: &Cli,
    profile: &SystemProfile<f64>,
    objective: Objective<f64>,
    constraint: Constraint<f64>,
    refined: bool,
) -> Result<(), CliError> {
    let outcome = optimize(profile, objective, constraint, refined).map_err(|e| match e {
        PlannerError::Infeasible { .. } => CliError::Infeasible(e),
        other => CliError::BadArgs(other.to_string()),
    })?;
    let binding = outcome
        .binding_constraint
        .clone()
        .unwrap_or_else(|| "none (unconstrained optimum)".to_string());
    match cli.format {
        OutputFormat::Csv => {
            println!("{CSV_HEADER}");
            println!("{}", ReportRow::rounded(&outcome.report).to_csv_line());
            println!("# binding constraint: {binding}");
        }
        OutputFormat::Json => {
            let mut value = serde_json::to_value(ReportRow::full(&outcome.report))
                .expect("report serialization cannot fail");
            value["binding_constraint"] = serde_json::Value::String(binding);
            println!(
                "{}",
                serde_json::to_string_pretty(&value).expect("json rendering cannot fail")
            );
        }
    }
    Ok(())
}

fn stage_label(stage: Stage) -> String {
    match stage {
        Stage::SegStart(i) => format!("seg_start({i})"),
        Stage::SegEnd(i) => format!("seg_end({i})"),
        Stage::PrepStart => "prep_start".into(),
        Stage::PrepEnd => "prep_end".into(),
        Stage::UlStart => "ul_start".into(),
        Stage::UlEnd => "ul_end".into(),
        Stage::MecStart(i) => format!("mec_start({i})"),
        Stage::MecEnd(i) => format!("mec_end({i})"),
        Stage::DlStart => "dl_start".into(),
        Stage::DlEnd => "dl_end".into(),
        Stage::Done => "done".into(),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_emulate(
    cli: &Cli,
    profile: &SystemProfile<f64>,
    exit: u32,
    split: u32,
    cfg: &EmulationConfig,
    trials: u64,
    trace: bool,
    refined: bool,
) -> Result<(), CliError> {
    let plan = checked_plan(exit, split, profile)?;

    let map_err = |e: EmulatorError| match e {
        EmulatorError::InvalidConfig(m) => CliError::BadArgs(m),
        EmulatorError::Trial { ref source, .. } => {
            if let EmulatorError::InvalidConfig(m) = source.as_ref() {
                CliError::BadArgs(m.clone())
            } else {
                CliError::Transport(e)
            }
        }
        other => CliError::Transport(other),
    };

    let traced: Option<EmulationTrace> = if trace {
        let run = match cfg.mode {
            EmulationMode::Event => emulate_event(plan, profile, cfg, refined),
            EmulationMode::Socket => emulate_socket(plan, profile, cfg, refined),
        };
        Some(run.map_err(map_err)?)
    } else {
        None
    };

    let run = run_trials(plan, profile, cfg, trials, refined).map_err(map_err)?;
    let stats = run.stats;
    match cli.format {
        OutputFormat::Csv => {
            if let Some(trace) = &traced {
                for event in &trace.events {
                    println!(
                        "# t_ms={:.6} stage={}",
                        event.seconds() * 1e3,
                        stage_label(event.stage)
                    );
                }
            }
            println!("trial,total_ms");
            for (i, total) in run.totals_s.iter().enumerate() {
                println!("{},{:.3}", i, total * 1e3);
            }
            println!(
                "# mean_ms={:.3} std_ms={:.3} min_ms={:.3} max_ms={:.3}",
                stats.mean_s * 1e3,
                stats.std_s * 1e3,
                stats.min_s * 1e3,
                stats.max_s * 1e3
            );
        }
        OutputFormat::Json => {
            let trace_json = traced.map(|trace| {
                trace
                    .events
                    .iter()
                    .map(|event| {
                        serde_json::json!({
                            "t_ms": event.seconds() * 1e3,
                            "stage": stage_label(event.stage),
                        })
                    })
                    .collect::<Vec<_>>()
            });
            let mut value = serde_json::json!({
                "plan": { "exit": plan.exit, "split": plan.split },
                "totals_ms": run.totals_s.iter().map(|t| t * 1e3).collect::<Vec<_>>(),
                "mean_ms": stats.mean_s * 1e3,
                "std_ms": stats.std_s * 1e3,
                "min_ms": stats.min_s * 1e3,
                "max_ms": stats.max_s * 1e3,
            });
            if let Some(trace_json) = trace_json {
                value["trace"] = serde_json::Value::Array(trace_json);
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&value).expect("json rendering cannot fail")
            );
        }
    }
    Ok(())
}

static STOP: AtomicBool = AtomicBool::new(false);

extern "C" fn request_stop(_signal: libc::c_int) {
    STOP.store(true, Ordering::SeqCst);
}

fn cmd_serve(
    profile: &SystemProfile<f64>,
    endpoint: &str,
    shaping_dl: Option<f64>,
    refined: bool,
) -> Result<(), CliError> {
    let listener = TcpListener::bind(endpoint)
        .map_err(|e| CliError::Transport(EmulatorError::Connection(e)))?;
    let addr = listener
        .local_addr()
        .map_err(|e| CliError::Transport(EmulatorError::Connection(e)))?;

    let handler: extern "C" fn(libc::c_int) = request_stop;
    unsafe {
        libc::signal(libc::SIGINT, handler as libc::sighandler_t);
        libc::signal(libc::SIGTERM, handler as libc::sighandler_t);
    }

    let cfg = ServerConfig {
        shaping_rate_dl: shaping_dl,
        refined,
        ..ServerConfig::default()
    };
    let stdout = std::io::stdout();
    let mut log = stdout.lock();
    writeln!(log, "listening on {addr}").map_err(CliError::Io)?;
    log.flush().map_err(CliError::Io)?;
    run_server(listener, profile, &cfg, &STOP, &mut log)
        .map_err(|e| CliError::Transport(EmulatorError::Io(e)))?;
    Ok(())
}

fn cmd_bitrate(
    cli: &Cli,
    profile: &SystemProfile<f64>,
    n_rb: u64,
    n_sub: u64,
    n_bits: u64,
    n_sym: u64,
    code_rate: f64,
) -> Result<(), CliError> {
    let cfg = PhyConfig {
        resource_blocks: n_rb,
        subcarriers_per_rb: n_sub,
        bits_per_symbol: n_bits,
        symbols_per_second: n_sym,
        code_rate,
    };
    cfg.validate().map_err(|e| CliError::BadArgs(e.to_string()))?;
    let bps = link_bitrate(&cfg);
    for warning in rate_warnings(bps, &profile.network) {
        eprintln!("offsim: warning: {warning}");
    }
    match cli.format {
        OutputFormat::Csv => {
            println!("bitrate_bps,bitrate_mbps");
            println!("{:.3},{:.6}", bps, bps / 1e6);
        }
        OutputFormat::Json => print_json(&serde_json::json!({
            "bitrate_bps": bps,
            "bitrate_mbps": bps / 1e6,
        })),
    }
    Ok(())
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("json rendering cannot fail")
    );
}

/// Jitter grammar: `none`, `gaussian:<std_ms>`, `lognormal:<mu>:<sigma>`,
/// each optionally followed by `@targets` with targets from
/// `{ul,dl,dev,mec}` (comma separated; all four when omitted).
fn parse_jitter(spec: &str) -> Result<JitterSpec, String> {
    let (kind_part, targets_part) = match spec.split_once('@') {
        Some((kind, targets)) => (kind, Some(targets)),
        None => (spec, None),
    };

    let parts: Vec<&str> = kind_part.split(':').collect();
    let number = |s: &str, what: &str| -> Result<f64, String> {
        s.parse()
            .map_err(|_| format!("bad jitter {what} `{s}` in `{spec}`"))
    };
    let kind = match parts.as_slice() {
        ["none"] => JitterKind::None,
        ["gaussian", std_ms] => JitterKind::Gaussian {
            std_ms: number(std_ms, "std")?,
        },
        ["lognormal", mu, sigma] => JitterKind::Lognormal {
            mu: number(mu, "mu")?,
            sigma: number(sigma, "sigma")?,
        },
        _ => {
            return Err(format!(
                "bad jitter spec `{spec}`: expected none, gaussian:<std_ms>, \
                 or lognormal:<mu>:<sigma>"
            ))
        }
    };

    let targets = match targets_part {
        None => JitterTargets::default(),
        Some(list) => {
            let mut targets = JitterTargets {
                uplink: false,
                downlink: false,
                device: false,
                mec: false,
            };
            for item in list.split(',') {
                match item {
                    "ul" => targets.uplink = true,
                    "dl" => targets.downlink = true,
                    "dev" => targets.device = true,
                    "mec" => targets.mec = true,
                    other => {
                        return Err(format!(
                            "bad jitter target `{other}` in `{spec}` (use ul, dl, dev, mec)"
                        ))
                    }
                }
            }
            targets
        }
    };

    Ok(JitterSpec { kind, targets })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jitter_grammar() {
        assert_eq!(parse_jitter("none").unwrap(), JitterSpec::default());

        let spec = parse_jitter("gaussian:2.5").unwrap();
        assert_eq!(spec.kind, JitterKind::Gaussian { std_ms: 2.5 });
        assert_eq!(spec.targets, JitterTargets::default());

        let spec = parse_jitter("gaussian:2@ul").unwrap();
        assert!(spec.targets.uplink);
        assert!(!spec.targets.downlink && !spec.targets.device && !spec.targets.mec);

        let spec = parse_jitter("lognormal:0.5:0.2@dl,mec").unwrap();
        assert_eq!(
            spec.kind,
            JitterKind::Lognormal {
                mu: 0.5,
                sigma: 0.2
            }
        );
        assert!(spec.targets.downlink && spec.targets.mec);

        assert!(parse_jitter("triangular:1").is_err());
        assert!(parse_jitter("gaussian:abc").is_err());
        assert!(parse_jitter("gaussian:1@nowhere").is_err());
    }
}
