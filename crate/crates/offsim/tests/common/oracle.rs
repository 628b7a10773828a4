//! Independent brute-force oracle.
//!
//! Straight-line arithmetic over the published tables, written before and
//! apart from the library: plain f64 in table units (ms, kb, Mbps, GFLOP,
//! GFLOPS, W, J), one expression per published equation. Used to pin the
//! expected values of every cost-model operation.

const D_UL_MS: f64 = 22.81;
const B_UL_MBPS: f64 = 12.36;
const D_DL_MS: f64 = 7.19;
const B_DL_MBPS: f64 = 9.81;
const D_DEV_MS: f64 = 43.69;
const D_MEC_MS: f64 = 1.12;
const D_PREP_MS: f64 = 12.18;
const K_PREP_KB_PER_MS: f64 = 2.33;
const C_DEV_GFLOPS: f64 = 3.62;
const C_MEC_GFLOPS: f64 = 365.94;
const P_IDLE_W: f64 = 4.62;
const P_PREP_W: f64 = 4.92;
const P_PROC_W: f64 = 5.17;
const P_COMM_W: f64 = 0.79;

/// Per split row: (d_comp kb, d_ul kb, d_dl kb, demand of the next segment
/// in GFLOP). Row `i` carries the demand of segment `i + 1`.
const ROWS: [(f64, f64, f64, f64); 6] = [
    (10.10, 1749.8, 1.6, 0.145),
    (7.03, 1206.4, 1.6, 0.226),
    (0.44, 625.1, 1.6, 0.358),
    (0.19, 279.4, 1.6, 0.311),
    (0.07, 100.6, 1.6, 0.080),
    (0.0, 0.0, 0.0, 0.0),
];

const ACCURACY_BY_EXIT: [f64; 5] = [0.32, 0.60, 0.82, 0.88, 0.93];

pub const NUM_EXITS: u32 = 5;
pub const NUM_SPLITS: u32 = 5;

#[derive(Debug, Clone, Copy)]
pub struct OracleCosts {
    pub t_prep_ms: f64,
    pub t_local_ms: f64,
    pub t_mec_ms: f64,
    pub t_ul_ms: f64,
    pub t_dl_ms: f64,
    pub t_comm_ms: f64,
    pub t_comp_ms: f64,
    pub t_total_ms: f64,
    pub e_idle_j: f64,
    pub e_prep_j: f64,
    pub e_comp_j: f64,
    pub e_comm_j: f64,
    pub e_total_j: f64,
    pub accuracy: f64,
}

/// Demand of segment `i` (layers between split i-1 and split i), GFLOP.
fn segment_gflop(i: u32) -> f64 {
    ROWS[(i - 1) as usize].3
}

/// Refined-model costs of plan (exit, split) under the shipped defaults.
pub fn costs(exit: u32, split: u32) -> OracleCosts {
    assert!((1..=NUM_EXITS).contains(&exit) && split <= NUM_SPLITS);
    let offload = split < exit;

    // GFLOP / GFLOPS = seconds, so * 1e3 for ms; kb / Mbps = ms directly.
    let mut t_local_ms = 0.0;
    for i in 1..=split.min(exit) {
        t_local_ms += D_DEV_MS + segment_gflop(i) / C_DEV_GFLOPS * 1e3;
    }
    let mut t_mec_ms = 0.0;
    for i in (split + 1)..=exit {
        t_mec_ms += D_MEC_MS + segment_gflop(i) / C_MEC_GFLOPS * 1e3;
    }

    let (t_prep_ms, t_ul_ms, t_dl_ms) = if offload {
        let row = ROWS[split as usize];
        (
            D_PREP_MS + row.0 / K_PREP_KB_PER_MS,
            D_UL_MS + row.1 / B_UL_MBPS,
            D_DL_MS + row.2 / B_DL_MBPS,
        )
    } else {
        (0.0, 0.0, 0.0)
    };

    let t_comm_ms = t_ul_ms + t_dl_ms;
    let t_comp_ms = t_prep_ms + t_local_ms + t_mec_ms;
    let t_total_ms = t_comp_ms + t_comm_ms;

    let e_idle_j = (t_comm_ms + t_mec_ms) * 1e-3 * P_IDLE_W;
    let e_prep_j = t_prep_ms * 1e-3 * P_PREP_W;
    let e_comp_j = t_local_ms * 1e-3 * P_PROC_W;
    let e_comm_j = if offload {
        t_total_ms * 1e-3 * P_COMM_W
    } else {
        0.0
    };

    OracleCosts {
        t_prep_ms,
        t_local_ms,
        t_mec_ms,
        t_ul_ms,
        t_dl_ms,
        t_comm_ms,
        t_comp_ms,
        t_total_ms,
        e_idle_j,
        e_prep_j,
        e_comp_j,
        e_comm_j,
        e_total_j: e_idle_j + e_prep_j + e_comp_j + e_comm_j,
        accuracy: ACCURACY_BY_EXIT[(exit - 1) as usize],
    }
}

/// Every (exit, split) pair in sweep order.
pub fn all_plans() -> Vec<(u32, u32)> {
    let mut plans = Vec::new();
    for exit in 1..=NUM_EXITS {
        for split in 0..=NUM_SPLITS {
            plans.push((exit, split));
        }
    }
    plans
}
