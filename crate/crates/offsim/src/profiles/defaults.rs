//! Built-in default profile.
//!
//! The values are the measured/fitted parameters shipped with the tool: data
//! volumes and per-segment computing demands for a five-block road-sign
//! classifier with five exits and split indices 0..=5, link and compute
//! constants fitted on real hardware, and the accuracy reached at each exit.
//! The same numbers ship as `profiles/paper.toml`.

use crate::scalar::{from_f64, Scalar};

use super::{
    AccuracyProfile, CnnTopology, ComputeProfile, NetworkProfile, PowerProfile, PrepModel,
    PrepVolume, Provenance, SplitPointEntry, SplitProfile, SystemProfile,
};

/// (d_orig kb, d_comp kb, stored ratio, d_ul kb, d_dl kb, segment GFLOP, compressor)
const SPLIT_ROWS: [(f64, f64, Option<f64>, f64, f64, f64, bool); 6] = [
    (10.10, 10.10, Some(1.0), 1749.8, 1.6, 0.145, false),
    (56.25, 7.03, Some(8.0), 1206.4, 1.6, 0.226, true),
    (3.52, 0.44, Some(8.0), 625.1, 1.6, 0.358, true),
    (1.53, 0.19, Some(8.0), 279.4, 1.6, 0.311, true),
    (0.56, 0.07, Some(8.0), 100.6, 1.6, 0.080, true),
    (0.0, 0.0, None, 0.0, 0.0, 0.0, false),
];

/// Accuracy per exit, constant across split points. Exits 1, 5 are measured;
/// exit 3 is known only to be just above 0.80; exits 2 and 4 are interpolated
/// placeholders and must not be treated as ground truth.
const ACCURACY_ROWS: [(f64, Provenance); 5] = [
    (0.32, Provenance::Measured),
    (0.60, Provenance::Interpolated),
    (0.82, Provenance::MeasuredApprox),
    (0.88, Provenance::Interpolated),
    (0.93, Provenance::Measured),
];

/// Returns the built-in default profile.
pub fn default_paper_profile<T: Scalar>() -> SystemProfile<T> {
    let entries = SPLIT_ROWS
        .iter()
        .enumerate()
        .map(
            |(i, &(d_orig, d_comp, ratio, d_ul, d_dl, demand, compressor))| SplitPointEntry {
                split_index: i as u32,
                original_kb: from_f64(d_orig),
                compressed_kb: from_f64(d_comp),
                ratio: ratio.map(from_f64),
                uplink_kb: from_f64(d_ul),
                downlink_kb: from_f64(d_dl),
                segment_gflop: from_f64(demand),
                compressor,
            },
        )
        .collect();

    let accuracy_rows: Vec<(T, Provenance)> = ACCURACY_ROWS
        .iter()
        .map(|&(value, provenance)| (from_f64(value), provenance))
        .collect();

    SystemProfile {
        topology: CnnTopology {
            num_blocks: 5,
            num_exits: 5,
            num_splits: 5,
            allow_exit_split_mismatch: false,
        },
        splits: SplitProfile { entries },
        network: NetworkProfile {
            uplink_mbps: from_f64(12.36),
            downlink_mbps: from_f64(9.81),
            uplink_overhead_ms: from_f64(22.81),
            downlink_overhead_ms: from_f64(7.19),
        },
        compute: ComputeProfile {
            device_gflops: from_f64(3.62),
            mec_gflops: from_f64(365.94),
            device_overhead_ms: from_f64(43.69),
            mec_overhead_ms: from_f64(1.12),
            prep_overhead_ms: from_f64(12.18),
            prep_rate_kb_per_ms: from_f64(2.33),
            cpu_gflops: Some(from_f64(20.4)),
            gpu_gflops: Some(from_f64(52000.0)),
            prep_model: PrepModel::Divide,
            prep_volume: PrepVolume::Compressed,
        },
        power: PowerProfile {
            idle_w: from_f64(4.62),
            prep_w: from_f64(4.92),
            proc_w: from_f64(5.17),
            comm_w: from_f64(0.79),
        },
        accuracy: AccuracyProfile::uniform_rows(&accuracy_rows, 6),
    }
}
