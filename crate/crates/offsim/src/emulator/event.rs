//! Deterministic virtual-clock replay of one offloading round.
//!
//! Time is an integer picosecond counter; each stage duration is computed in
//! seconds, rounded once to picoseconds, and added to the cursor. The
//! picosecond grid keeps the accumulated rounding error around 10^-13
//! relative on millisecond-scale rounds.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use crate::profiles::{ExecutionPlan, SystemProfile};
use crate::scalar::Scalar;

use super::{
    EmulationConfig, EmulationTrace, EmulatorError, JitterKind, Stage, StagePlan, TraceEvent,
    PICOS_PER_SECOND,
};

enum JitterSampler {
    Off,
    Gaussian(Normal<f64>),
    Lognormal(LogNormal<f64>),
}

impl JitterSampler {
    fn new(kind: JitterKind) -> Result<Self, EmulatorError> {
        match kind {
            JitterKind::None => Ok(Self::Off),
            JitterKind::Gaussian { std_ms } => {
                if !std_ms.is_finite() || std_ms < 0.0 {
                    return Err(EmulatorError::InvalidConfig(
                        "gaussian jitter std must be finite and >= 0".into(),
                    ));
                }
                Ok(Self::Gaussian(Normal::new(0.0, std_ms).expect(
                    "validated gaussian parameters",
                )))
            }
            JitterKind::Lognormal { mu, sigma } => {
                if !mu.is_finite() || !sigma.is_finite() || sigma < 0.0 {
                    return Err(EmulatorError::InvalidConfig(
                        "lognormal jitter parameters must be finite with sigma >= 0".into(),
                    ));
                }
                Ok(Self::Lognormal(LogNormal::new(mu, sigma).expect(
                    "validated lognormal parameters",
                )))
            }
        }
    }

    /// Draws one additive delay in seconds; `Off` never touches the RNG.
    fn draw_s(&self, rng: &mut ChaCha12Rng) -> f64 {
        match self {
            Self::Off => 0.0,
            Self::Gaussian(dist) => dist.sample(rng) * 1e-3,
            Self::Lognormal(dist) => dist.sample(rng) * 1e-3,
        }
    }
}

fn ps(seconds: f64) -> u64 {
    (seconds * PICOS_PER_SECOND).round() as u64
}

/// Replays `plan` on the virtual clock and returns the timestamped trace.
///
/// With `jitter = none` the trace is bit-identical across runs and seeds.
/// Jitter draws happen in schedule order (local segments, uplink, remote
/// segments, downlink), one per targeted stage instance, from a stream
/// cipher RNG seeded with `cfg.seed`.
pub fn emulate_event<T: Scalar>(
    plan: ExecutionPlan,
    profile: &SystemProfile<T>,
    cfg: &EmulationConfig,
    refined: bool,
) -> Result<EmulationTrace, EmulatorError> {
    let stages = StagePlan::build(plan, profile, refined);
    let sampler = JitterSampler::new(cfg.jitter.kind)?;
    let targets = cfg.jitter.targets;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);

    // Jittered constants never go negative.
    let mut jittered = |constant: f64, targeted: bool| -> f64 {
        if targeted {
            (constant + sampler.draw_s(&mut rng)).max(0.0)
        } else {
            constant
        }
    };

    let mut t: u64 = 0;
    let mut events = Vec::new();
    let push = |events: &mut Vec<TraceEvent>, t: u64, stage: Stage| {
        events.push(TraceEvent { t_ps: t, stage });
    };

    for (i, &(constant, work)) in stages.local.iter().enumerate() {
        let segment = i as u32 + 1;
        push(&mut events, t, Stage::SegStart(segment));
        t += ps(jittered(constant, targets.device) + work);
        push(&mut events, t, Stage::SegEnd(segment));
    }

    if stages.offload {
        push(&mut events, t, Stage::PrepStart);
        t += ps(stages.prep_s);
        push(&mut events, t, Stage::PrepEnd);

        push(&mut events, t, Stage::UlStart);
        t += ps(jittered(stages.ul_const_s, targets.uplink) + stages.ul_bits / stages.ul_rate_bps);
        push(&mut events, t, Stage::UlEnd);

        for &(segment, constant, work) in &stages.mec {
            push(&mut events, t, Stage::MecStart(segment));
            t += ps(jittered(constant, targets.mec) + work);
            push(&mut events, t, Stage::MecEnd(segment));
        }

        push(&mut events, t, Stage::DlStart);
        t += ps(jittered(stages.dl_const_s, targets.downlink) + stages.dl_bits / stages.dl_rate_bps);
        push(&mut events, t, Stage::DlEnd);
    }

    push(&mut events, t, Stage::Done);
    Ok(EmulationTrace {
        plan,
        events,
        measured_total_ps: t,
    })
}
