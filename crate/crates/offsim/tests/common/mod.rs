#![allow(dead_code)]

pub mod oracle;

use offsim::emulator::{EmulationTrace, Stage};
use offsim::profiles::{
    AccuracyProfile, CnnTopology, ComputeProfile, ExecutionPlan, NetworkProfile, PowerProfile,
    PrepModel, PrepVolume, Provenance, SplitPointEntry, SplitProfile, SystemProfile,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Relative error, degrading to absolute when the expectation is zero.
pub fn rel_err(actual: f64, expected: f64) -> f64 {
    if expected == 0.0 {
        actual.abs()
    } else {
        ((actual - expected) / expected).abs()
    }
}

/// A random but valid profile; accuracy is constant across splits for each
/// exit (as measurements show), which keeps the fully-local collapse exact.
pub fn random_profile(seed: u64) -> SystemProfile<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n: u32 = rng.gen_range(2..=6);

    let mut entries = Vec::new();
    for split_index in 0..=n {
        let last = split_index == n;
        let original_kb = if last { 0.0 } else { rng.gen_range(0.5..2000.0) };
        let compressor = !last && split_index != 0 && rng.gen_bool(0.7);
        let compressed_kb = if compressor {
            original_kb * rng.gen_range(0.05..0.9)
        } else {
            original_kb
        };
        entries.push(SplitPointEntry {
            split_index,
            original_kb,
            compressed_kb,
            ratio: (compressed_kb > 0.0).then(|| original_kb / compressed_kb),
            uplink_kb: if last { 0.0 } else { rng.gen_range(10.0..2000.0) },
            downlink_kb: if last { 0.0 } else { rng.gen_range(0.5..5.0) },
            segment_gflop: if last { 0.0 } else { rng.gen_range(0.01..1.0) },
            compressor,
        });
    }

    let mut exit_accuracies: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..0.99)).collect();
    exit_accuracies.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let accuracy_rows: Vec<(f64, Provenance)> = exit_accuracies
        .into_iter()
        .map(|a| (a, Provenance::Measured))
        .collect();

    let profile = SystemProfile {
        topology: CnnTopology {
            num_blocks: n,
            num_exits: n,
            num_splits: n,
            allow_exit_split_mismatch: false,
        },
        splits: SplitProfile { entries },
        network: NetworkProfile {
            uplink_mbps: rng.gen_range(1.0..100.0),
            downlink_mbps: rng.gen_range(1.0..100.0),
            uplink_overhead_ms: rng.gen_range(0.0..50.0),
            downlink_overhead_ms: rng.gen_range(0.0..50.0),
        },
        compute: ComputeProfile {
            device_gflops: rng.gen_range(0.5..10.0),
            mec_gflops: rng.gen_range(50.0..1000.0),
            device_overhead_ms: rng.gen_range(0.0..50.0),
            mec_overhead_ms: rng.gen_range(0.0..5.0),
            prep_overhead_ms: rng.gen_range(0.0..20.0),
            prep_rate_kb_per_ms: rng.gen_range(0.5..10.0),
            cpu_gflops: None,
            gpu_gflops: None,
            prep_model: PrepModel::Divide,
            prep_volume: PrepVolume::Compressed,
        },
        power: PowerProfile {
            idle_w: rng.gen_range(0.1..10.0),
            prep_w: rng.gen_range(0.1..10.0),
            proc_w: rng.gen_range(0.1..10.0),
            comm_w: rng.gen_range(0.1..10.0),
        },
        accuracy: AccuracyProfile::uniform_rows(&accuracy_rows, n as usize + 1),
    };
    profile
        .validate()
        .expect("generated profile must satisfy every invariant");
    profile
}

/// The exact stage sequence an event-mode trace must produce for `plan`.
pub fn expected_event_stages(plan: ExecutionPlan) -> Vec<Stage> {
    let mut stages = Vec::new();
    for i in 1..=plan.split.min(plan.exit) {
        stages.push(Stage::SegStart(i));
        stages.push(Stage::SegEnd(i));
    }
    if plan.offload_active() {
        stages.push(Stage::PrepStart);
        stages.push(Stage::PrepEnd);
        stages.push(Stage::UlStart);
        stages.push(Stage::UlEnd);
        for i in (plan.split + 1)..=plan.exit {
            stages.push(Stage::MecStart(i));
            stages.push(Stage::MecEnd(i));
        }
        stages.push(Stage::DlStart);
        stages.push(Stage::DlEnd);
    }
    stages.push(Stage::Done);
    stages
}

/// Structural checks every trace must pass, socket or event mode:
/// `local* (prep ul mec+ dl)? done`, paired boundaries, non-decreasing
/// timestamps starting at zero, total equal to the last timestamp.
pub fn assert_trace_well_formed(trace: &EmulationTrace) {
    assert!(!trace.events.is_empty());
    assert_eq!(trace.events[0].t_ps, 0, "first event must be at t = 0");
    for pair in trace.events.windows(2) {
        assert!(
            pair[0].t_ps <= pair[1].t_ps,
            "timestamps must be non-decreasing"
        );
    }
    assert_eq!(
        trace.measured_total_ps,
        trace.events.last().unwrap().t_ps,
        "measured total must equal the last timestamp"
    );
    assert_eq!(trace.events.last().unwrap().stage, Stage::Done);

    #[derive(PartialEq, Eq, Clone, Copy, Debug)]
    enum Phase {
        Local,
        Prep,
        Ul,
        Mec,
        Dl,
        Done,
    }
    let mut phase = Phase::Local;
    let mut open: Option<Stage> = None;
    let mut saw_mec = false;
    for event in &trace.events {
        match (phase, event.stage, open) {
            (Phase::Local, Stage::SegStart(_), None) => open = Some(event.stage),
            (Phase::Local, Stage::SegEnd(i), Some(Stage::SegStart(j))) if i == j => open = None,
            (Phase::Local, Stage::PrepStart, None) => phase = Phase::Prep,
            (Phase::Local, Stage::Done, None) => phase = Phase::Done,
            (Phase::Prep, Stage::PrepEnd, None) => phase = Phase::Ul,
            (Phase::Ul, Stage::UlStart, None) => open = Some(event.stage),
            (Phase::Ul, Stage::UlEnd, Some(Stage::UlStart)) => {
                open = None;
                phase = Phase::Mec;
            }
            (Phase::Mec, Stage::MecStart(_), None) => open = Some(event.stage),
            (Phase::Mec, Stage::MecEnd(_), Some(Stage::MecStart(_))) => {
                open = None;
                saw_mec = true;
            }
            (Phase::Mec, Stage::DlStart, None) if saw_mec => {
                open = Some(event.stage);
                phase = Phase::Dl;
            }
            (Phase::Dl, Stage::DlEnd, Some(Stage::DlStart)) => open = None,
            (Phase::Dl, Stage::Done, None) => phase = Phase::Done,
            other => panic!("trace violates the stage grammar at {other:?}"),
        }
    }
    assert_eq!(phase, Phase::Done, "trace must end with done");
}
