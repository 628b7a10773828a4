//! Replays one offloading round as a timeline.
//!
//! Two modes share the same stage sequence
//! `local segments, then (prep, uplink, remote segments, downlink)` for
//! offload-active plans:
//!
//! * **event** -- a deterministic virtual-clock engine ([`emulate_event`]).
//!   Optional jitter perturbs the four constant delays (uplink, downlink,
//!   device per-segment, remote per-segment); with jitter off the result is
//!   bit-identical across runs and seeds and matches the analytical model.
//! * **socket** -- a real byte-stream harness over TCP ([`emulate_socket`],
//!   [`run_server`]): the client performs timed waits for compute stages and
//!   transmits a framed task whose on-wire size equals the profile's uplink
//!   volume, shaped by a token bucket; the server waits the remote compute
//!   time and replies with a framed result of the downlink volume.

mod bucket;
mod event;
mod socket;
pub mod wire;

use std::io;
use std::time::Duration;

use thiserror::Error;

pub use bucket::TokenBucket;
pub use event::emulate_event;
pub use socket::{emulate_socket, run_server, spawn_server, ServerConfig, ServerHandle};

use crate::profiles::{ExecutionPlan, SystemProfile};
use crate::scalar::{to_f64, Scalar};
use wire::ProtocolError;

pub const PICOS_PER_SECOND: f64 = 1e12;

#[derive(Debug, Error)]
pub enum EmulatorError {
    #[error("invalid emulation config: {0}")]
    InvalidConfig(String),
    #[error("connection failed: {0}")]
    Connection(#[source] io::Error),
    #[error("stage timed out after {0:?}")]
    Timeout(Duration),
    #[error("protocol violation: {0}")]
    Protocol(#[from] ProtocolError),
    #[error("transport error: {0}")]
    Io(#[from] io::Error),
    #[error("server reported an error: {0}")]
    Server(String),
    #[error("trial {index} failed: {source}")]
    Trial {
        index: u64,
        #[source]
        source: Box<EmulatorError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EmulationMode {
    #[default]
    Event,
    Socket,
}

/// Additive perturbation of the constant stage delays.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum JitterKind {
    #[default]
    None,
    /// Zero-mean gaussian with the given standard deviation, in ms. Jittered
    /// constants are clamped at zero.
    Gaussian { std_ms: f64 },
    /// Log-normal (always positive), parameters of the underlying normal;
    /// samples are in ms.
    Lognormal { mu: f64, sigma: f64 },
}

/// Which of the four constant delays receive jitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JitterTargets {
    pub uplink: bool,
    pub downlink: bool,
    pub device: bool,
    pub mec: bool,
}

impl Default for JitterTargets {
    fn default() -> Self {
        Self {
            uplink: true,
            downlink: true,
            device: true,
            mec: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JitterSpec {
    pub kind: JitterKind,
    pub targets: JitterTargets,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmulationConfig {
    pub mode: EmulationMode,
    pub jitter: JitterSpec,
    pub seed: u64,
    /// Uplink shaping rate in bit/s; the profile's uplink bitrate when
    /// absent.
    pub shaping_rate_ul: Option<f64>,
    /// Downlink shaping rate in bit/s; the profile's downlink bitrate when
    /// absent (used by the server side).
    pub shaping_rate_dl: Option<f64>,
    /// `host:port` of the task server (socket mode).
    pub endpoint: String,
    /// Per-stage timeout in socket mode.
    pub stage_timeout: Duration,
}

impl Default for EmulationConfig {
    fn default() -> Self {
        Self {
            mode: EmulationMode::Event,
            jitter: JitterSpec::default(),
            seed: 0,
            shaping_rate_ul: None,
            shaping_rate_dl: None,
            endpoint: "127.0.0.1:7878".to_string(),
            stage_timeout: Duration::from_secs(30),
        }
    }
}

/// Timeline stages. Local segments carry their segment index; in socket mode
/// the remote window cannot be observed per segment, so a single
/// `MecStart(i)/MecEnd(i)` pair labeled with the first remote segment spans
/// all of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    SegStart(u32),
    SegEnd(u32),
    PrepStart,
    PrepEnd,
    UlStart,
    UlEnd,
    MecStart(u32),
    MecEnd(u32),
    DlStart,
    DlEnd,
    Done,
}

/// One timestamped stage boundary. Timestamps are integer picoseconds from
/// the start of the round (virtual in event mode, monotonic wall clock in
/// socket mode).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEvent {
    pub t_ps: u64,
    pub stage: Stage,
}

impl TraceEvent {
    pub fn seconds(&self) -> f64 {
        self.t_ps as f64 / PICOS_PER_SECOND
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmulationTrace {
    pub plan: ExecutionPlan,
    pub events: Vec<TraceEvent>,
    pub measured_total_ps: u64,
}

impl EmulationTrace {
    pub fn measured_total_s(&self) -> f64 {
        self.measured_total_ps as f64 / PICOS_PER_SECOND
    }
}

/// Resolved per-stage durations for one plan, in seconds, with the constant
/// and the volume/demand-proportional parts kept apart so jitter can target
/// the constants alone.
#[derive(Debug, Clone)]
pub(crate) struct StagePlan {
    pub offload: bool,
    /// `(constant_s, work_s)` per local segment, segment indices `1..`.
    pub local: Vec<(f64, f64)>,
    pub prep_s: f64,
    pub ul_const_s: f64,
    pub ul_bits: f64,
    pub ul_rate_bps: f64,
    /// `(segment_index, constant_s, work_s)` per remote segment.
    pub mec: Vec<(u32, f64, f64)>,
    pub dl_const_s: f64,
    pub dl_bits: f64,
    pub dl_rate_bps: f64,
    /// On-wire task and result volumes.
    pub ul_volume_bytes: u64,
    pub dl_volume_bytes: u64,
}

impl StagePlan {
    pub fn build<T: Scalar>(
        plan: ExecutionPlan,
        profile: &SystemProfile<T>,
        refined: bool,
    ) -> Self {
        let compute = &profile.compute;
        let device_const = if refined {
            to_f64(compute.device_overhead_s())
        } else {
            0.0
        };
        let mec_const = if refined {
            to_f64(compute.mec_overhead_s())
        } else {
            0.0
        };
        let device_rate = to_f64(compute.device_flops());
        let mec_rate = to_f64(compute.mec_flops());

        let local = (1..=plan.split.min(plan.exit))
            .map(|i| {
                (
                    device_const,
                    to_f64(profile.splits.segment_flop(i)) / device_rate,
                )
            })
            .collect();
        let mec = ((plan.split + 1)..=plan.exit)
            .map(|i| {
                (
                    i,
                    mec_const,
                    to_f64(profile.splits.segment_flop(i)) / mec_rate,
                )
            })
            .collect();

        let offload = plan.offload_active();
        let entry = profile.splits.entry(plan.split);
        let prep_s = if refined {
            to_f64(crate::cost::preprocessing_delay(plan, profile))
        } else {
            0.0
        };
        let ul_bits = if offload { to_f64(entry.uplink_bits()) } else { 0.0 };
        let dl_bits = if offload { to_f64(entry.downlink_bits()) } else { 0.0 };

        Self {
            offload,
            local,
            prep_s,
            ul_const_s: to_f64(profile.network.uplink_overhead_s()),
            ul_bits,
            ul_rate_bps: to_f64(profile.network.uplink_bps()),
            mec,
            dl_const_s: to_f64(profile.network.downlink_overhead_s()),
            dl_bits,
            dl_rate_bps: to_f64(profile.network.downlink_bps()),
            ul_volume_bytes: wire::volume_bytes(ul_bits),
            dl_volume_bytes: wire::volume_bytes(dl_bits),
        }
    }
}

/// Summary statistics over trial totals, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialStats {
    pub n: u64,
    pub mean_s: f64,
    pub std_s: f64,
    pub min_s: f64,
    pub max_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRun {
    pub totals_s: Vec<f64>,
    pub stats: TrialStats,
}

/// Runs `n` independent emulations and summarizes the measured totals.
///
/// Event-mode trials are seeded `cfg.seed + trial_index`, so a fixed seed
/// reproduces the whole run.
pub fn run_trials<T: Scalar>(
    plan: ExecutionPlan,
    profile: &SystemProfile<T>,
    cfg: &EmulationConfig,
    n: u64,
    refined: bool,
) -> Result<TrialRun, EmulatorError> {
    if n < 1 {
        return Err(EmulatorError::InvalidConfig(
            "trial count must be >= 1".into(),
        ));
    }
    let mut totals = Vec::with_capacity(n as usize);
    for index in 0..n {
        let trace = match cfg.mode {
            EmulationMode::Event => {
                let mut trial_cfg = cfg.clone();
                trial_cfg.seed = cfg.seed.wrapping_add(index);
                emulate_event(plan, profile, &trial_cfg, refined)
            }
            EmulationMode::Socket => emulate_socket(plan, profile, cfg, refined),
        }
        .map_err(|source| EmulatorError::Trial {
            index,
            source: Box::new(source),
        })?;
        totals.push(trace.measured_total_s());
    }
    let stats = summarize(&totals);
    Ok(TrialRun {
        totals_s: totals,
        stats,
    })
}

fn summarize(totals: &[f64]) -> TrialStats {
    let n = totals.len() as u64;
    let min = totals.iter().copied().fold(f64::INFINITY, f64::min);
    let max = totals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        // Constant data: exact, avoids accumulation residue.
        return TrialStats {
            n,
            mean_s: min,
            std_s: 0.0,
            min_s: min,
            max_s: max,
        };
    }
    let mean = totals.iter().sum::<f64>() / n as f64;
    let variance = totals.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / n as f64;
    TrialStats {
        n,
        mean_s: mean,
        std_s: variance.sqrt(),
        min_s: min,
        max_s: max,
    }
}
