//! Analytical delay, energy, and accuracy model.
//!
//! For a plan (exit `E`, split `S`) the total processing delay decomposes as
//!
//! ```text
//! t_total = t_comp + t_comm
//! t_comp  = t_prep + t_local + t_mec
//! t_comm  = t_ul + t_dl
//! ```
//!
//! with, in refined mode (the default),
//!
//! ```text
//! t_local = sum over segments i = 1..min(S,E) of  d_dev + flop_i / c_dev
//! t_mec   = sum over segments i = S+1..E     of  d_mec + flop_i / c_mec
//! t_prep  = d_prep + volume_S / k_prep            (offload-active plans only)
//! t_ul    = d_ul + uplink_volume_S / b_ul          (likewise)
//! t_dl    = d_dl + downlink_volume_S / b_dl        (likewise)
//! ```
//!
//! Idealized mode zeroes the constant overheads (`d_dev`, `d_mec`) and the
//! preprocessing stage, leaving only the volume- and demand-proportional
//! terms; communication is identical in both modes.
//!
//! Device energy is phase time times phase power. The modem term uses
//! `t_total` and applies only to offload-active plans; a fully local run
//! never powers the link, so its idle, preprocessing, and communication
//! energies are all zero.
//!
//! Everything here is a pure function of immutable inputs and safe to call
//! from any number of threads.

use thiserror::Error;

use crate::profiles::{ExecutionPlan, PrepModel, PrepVolume, SystemProfile};
use crate::scalar::{from_f64, Scalar};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CostError {
    #[error("accuracy undefined: total count is zero")]
    EmptySample,
    #[error("accuracy undefined: {n_true} correct out of {n_total}")]
    CountExceedsTotal { n_true: u64, n_total: u64 },
}

/// Per-stage delays in seconds. The aggregate fields are derived from the
/// components at construction, so the additivity identities hold exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayBreakdown<T> {
    pub t_prep: T,
    pub t_local: T,
    pub t_mec: T,
    pub t_ul: T,
    pub t_dl: T,
    pub t_comm: T,
    pub t_comp: T,
    pub t_total: T,
}

impl<T: Scalar> DelayBreakdown<T> {
    pub fn from_components(t_prep: T, t_local: T, t_mec: T, t_ul: T, t_dl: T) -> Self {
        let t_comm = t_ul + t_dl;
        let t_comp = t_prep + t_local + t_mec;
        Self {
            t_prep,
            t_local,
            t_mec,
            t_ul,
            t_dl,
            t_comm,
            t_comp,
            t_total: t_comp + t_comm,
        }
    }
}

/// Device-side energies in joules; `e_total` is derived at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown<T> {
    pub e_idle: T,
    pub e_prep: T,
    pub e_comp: T,
    pub e_comm: T,
    pub e_total: T,
}

impl<T: Scalar> EnergyBreakdown<T> {
    pub fn from_components(e_idle: T, e_prep: T, e_comp: T, e_comm: T) -> Self {
        Self {
            e_idle,
            e_prep,
            e_comp,
            e_comm,
            e_total: e_idle + e_prep + e_comp + e_comm,
        }
    }
}

/// Full cost of one execution plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostReport<T> {
    pub plan: ExecutionPlan,
    pub delay: DelayBreakdown<T>,
    pub energy: EnergyBreakdown<T>,
    pub accuracy: T,
    pub offload_active: bool,
}

/// Fraction of correctly classified inputs.
pub fn classification_accuracy<T: Scalar>(n_true: u64, n_total: u64) -> Result<T, CostError> {
    if n_total == 0 {
        return Err(CostError::EmptySample);
    }
    if n_true > n_total {
        return Err(CostError::CountExceedsTotal { n_true, n_total });
    }
    Ok(from_f64::<T>(n_true as f64) / from_f64(n_total as f64))
}

fn assert_plan_in_range<T: Scalar>(plan: ExecutionPlan, profile: &SystemProfile<T>) {
    debug_assert!(
        ExecutionPlan::checked(plan.exit, plan.split, &profile.topology).is_ok(),
        "plan {plan} out of range for the profile topology"
    );
}

/// Device-side time to prepare the split-point features for transmission,
/// in seconds. Zero when the plan never offloads.
pub fn preprocessing_delay<T: Scalar>(plan: ExecutionPlan, profile: &SystemProfile<T>) -> T {
    assert_plan_in_range(plan, profile);
    if !plan.offload_active() {
        return T::zero();
    }
    let entry = profile.splits.entry(plan.split);
    let volume_bits = match profile.compute.prep_volume {
        PrepVolume::Compressed => entry.compressed_bits(),
        PrepVolume::Uplink => entry.uplink_bits(),
    };
    let base = profile.compute.prep_overhead_s();
    match profile.compute.prep_model {
        PrepModel::Divide => base + volume_bits / profile.compute.prep_rate_bps(),
        PrepModel::Multiply => {
            // Alternative reading: k_prep as ms per kb.
            let volume_kb = volume_bits / from_f64(1e3);
            base + profile.compute.prep_rate_kb_per_ms * volume_kb * from_f64(1e-3)
        }
    }
}

/// Uplink and downlink delays in seconds; `(0, 0)` when the plan never
/// offloads.
pub fn communication_delay<T: Scalar>(
    plan: ExecutionPlan,
    profile: &SystemProfile<T>,
) -> (T, T) {
    assert_plan_in_range(plan, profile);
    if !plan.offload_active() {
        return (T::zero(), T::zero());
    }
    let entry = profile.splits.entry(plan.split);
    let network = &profile.network;
    let t_ul = network.uplink_overhead_s() + entry.uplink_bits() / network.uplink_bps();
    let t_dl = network.downlink_overhead_s() + entry.downlink_bits() / network.downlink_bps();
    (t_ul, t_dl)
}

/// `(t_prep, t_local, t_mec)` in seconds.
pub fn computing_delay<T: Scalar>(
    plan: ExecutionPlan,
    profile: &SystemProfile<T>,
    refined: bool,
) -> (T, T, T) {
    assert_plan_in_range(plan, profile);
    let compute = &profile.compute;
    let device_overhead = if refined {
        compute.device_overhead_s()
    } else {
        T::zero()
    };
    let mec_overhead = if refined {
        compute.mec_overhead_s()
    } else {
        T::zero()
    };

    let local_segments = plan.split.min(plan.exit);
    let mut t_local = T::zero();
    for segment in 1..=local_segments {
        t_local =
            t_local + device_overhead + profile.splits.segment_flop(segment) / compute.device_flops();
    }

    let mut t_mec = T::zero();
    for segment in (plan.split + 1)..=plan.exit {
        t_mec = t_mec + mec_overhead + profile.splits.segment_flop(segment) / compute.mec_flops();
    }

    let t_prep = if refined {
        preprocessing_delay(plan, profile)
    } else {
        T::zero()
    };
    (t_prep, t_local, t_mec)
}

/// Full delay breakdown for one plan.
pub fn total_delay<T: Scalar>(
    plan: ExecutionPlan,
    profile: &SystemProfile<T>,
    refined: bool,
) -> DelayBreakdown<T> {
    let (t_prep, t_local, t_mec) = computing_delay(plan, profile, refined);
    let (t_ul, t_dl) = communication_delay(plan, profile);
    DelayBreakdown::from_components(t_prep, t_local, t_mec, t_ul, t_dl)
}

/// Device energy for one plan given its delay breakdown.
///
/// `delay` must have been computed for the same plan and profile.
pub fn total_energy<T: Scalar>(
    plan: ExecutionPlan,
    profile: &SystemProfile<T>,
    delay: &DelayBreakdown<T>,
) -> EnergyBreakdown<T> {
    let power = &profile.power;
    let e_idle = (delay.t_comm + delay.t_mec) * power.idle_w;
    let e_prep = delay.t_prep * power.prep_w;
    let e_comp = delay.t_local * power.proc_w;
    let e_comm = if plan.offload_active() {
        delay.t_total * power.comm_w
    } else {
        T::zero()
    };
    EnergyBreakdown::from_components(e_idle, e_prep, e_comp, e_comm)
}

/// Evaluates one plan end to end: delays, energies, accuracy.
pub fn evaluate_plan<T: Scalar>(
    plan: ExecutionPlan,
    profile: &SystemProfile<T>,
    refined: bool,
) -> CostReport<T> {
    let delay = total_delay(plan, profile, refined);
    let energy = total_energy(plan, profile, &delay);
    CostReport {
        plan,
        delay,
        energy,
        accuracy: profile.accuracy.value(plan.exit, plan.split),
        offload_active: plan.offload_active(),
    }
}
