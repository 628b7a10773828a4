//! Domain types describing the offloading system under study, their
//! validation rules, and the configuration loader.
//!
//! A [`SystemProfile`] bundles everything the cost model needs: the network
//! topology of the CNN (blocks, exits, split points), per-split data volumes
//! and computing demands, link parameters, compute rates, fitted timing
//! constants, and power draws. Profiles are expressed in the units used by
//! the measurement tables they come from (kilobits, milliseconds, Mbps,
//! GFLOP, GFLOPS, watts); every type exposes SI accessors (bits, seconds,
//! FLOP/s, W) and all downstream arithmetic happens in SI.
//!
//! Profiles are immutable after validation and safe to share across threads.

mod config;
mod defaults;

use std::fmt;

use thiserror::Error;

use crate::scalar::{from_f64, Scalar};

pub use config::{
    default_profile_with_overrides, load_profile, profile_from_toml_str, to_toml_string,
};
pub use defaults::default_paper_profile;

/// Relative mismatch between a stored compression ratio and the ratio
/// recomputed from the volumes above which validation emits a warning.
pub const RATIO_WARN_TOLERANCE: f64 = 0.005;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("cannot read profile {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("profile parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("compression ratio undefined: compressed volume is zero")]
    UndefinedRatio,
    #[error("bad override `{key}`: {reason}")]
    Override { key: String, reason: String },
}

/// A violated profile invariant. `field` names the offending configuration
/// key (e.g. `network.b_ul`).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid profile: {field}: {message}")]
pub struct ValidationError {
    pub field: String,
    pub message: String,
}

impl ValidationError {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// A suspicious but non-fatal profile condition found during validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationWarning {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ValidationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "warning: {}: {}", self.field, self.message)
    }
}

/// An out-of-range execution plan for a given topology.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("exit out of range 1..{max}")]
    ExitOutOfRange { max: u32 },
    #[error("split out of range 0..{max}")]
    SplitOutOfRange { max: u32 },
}

/// Block/exit/split counts of the CNN.
///
/// `num_splits` is the highest split index; split indices run `0..=num_splits`
/// where 0 means full offloading and `num_splits` full local processing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CnnTopology {
    pub num_blocks: u32,
    pub num_exits: u32,
    pub num_splits: u32,
    /// Exits are normally co-located with split points (`num_exits ==
    /// num_splits`); set to relax that check for exploratory profiles.
    pub allow_exit_split_mismatch: bool,
}

impl CnnTopology {
    fn validate(&self) -> Result<(), ValidationError> {
        if self.num_blocks < 1 {
            return Err(ValidationError::new("topology.num_blocks", "must be >= 1"));
        }
        if self.num_exits < 1 {
            return Err(ValidationError::new("topology.num_exits", "must be >= 1"));
        }
        if self.num_splits < 1 {
            return Err(ValidationError::new("topology.num_splits", "must be >= 1"));
        }
        if !self.allow_exit_split_mismatch && self.num_exits != self.num_splits {
            return Err(ValidationError::new(
                "topology.num_exits",
                format!(
                    "must equal num_splits ({}) unless allow_exit_split_mismatch is set",
                    self.num_splits
                ),
            ));
        }
        Ok(())
    }
}

/// Data volumes and the computing demand attached to one split point.
///
/// Volumes are kilobits; `uplink_kb`/`downlink_kb` include transport
/// overhead. `segment_gflop` is the demand of the layer segment *after* this
/// split point (between split `i` and split `i+1`), so the demand of segment
/// `i` used by the delay sums is read from the entry at index `i - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitPointEntry<T> {
    pub split_index: u32,
    pub original_kb: T,
    pub compressed_kb: T,
    /// Stored compression ratio; `None` when the compressed volume is zero.
    pub ratio: Option<T>,
    pub uplink_kb: T,
    pub downlink_kb: T,
    pub segment_gflop: T,
    /// Whether a feature compressor runs at this split point.
    pub compressor: bool,
}

impl<T: Scalar> SplitPointEntry<T> {
    pub fn original_bits(&self) -> T {
        self.original_kb * from_f64(1e3)
    }

    pub fn compressed_bits(&self) -> T {
        self.compressed_kb * from_f64(1e3)
    }

    pub fn uplink_bits(&self) -> T {
        self.uplink_kb * from_f64(1e3)
    }

    pub fn downlink_bits(&self) -> T {
        self.downlink_kb * from_f64(1e3)
    }

    pub fn segment_flop(&self) -> T {
        self.segment_gflop * from_f64(1e9)
    }

    fn validate(&self, is_last: bool) -> Result<Option<ValidationWarning>, ValidationError> {
        let field = |name: &str| format!("splits.{}.{}", self.split_index, name);
        let nonneg = |value: T, name: &str| -> Result<(), ValidationError> {
            if !(value >= T::zero()) || !value.is_finite() {
                return Err(ValidationError::new(field(name), "must be finite and >= 0"));
            }
            Ok(())
        };
        nonneg(self.original_kb, "d_orig")?;
        nonneg(self.compressed_kb, "d_comp")?;
        nonneg(self.uplink_kb, "d_ul")?;
        nonneg(self.downlink_kb, "d_dl")?;
        nonneg(self.segment_gflop, "segment_demand")?;

        if self.compressor {
            if !(self.compressed_kb > T::zero()) {
                return Err(ValidationError::new(
                    field("d_comp"),
                    "must be > 0 when a compressor is configured",
                ));
            }
            if self.compressed_kb > self.original_kb {
                return Err(ValidationError::new(
                    field("d_comp"),
                    "must not exceed d_orig when a compressor is configured",
                ));
            }
        } else if self.compressed_kb != self.original_kb {
            return Err(ValidationError::new(
                field("d_comp"),
                "must equal d_orig when no compressor is configured",
            ));
        }

        if is_last && (self.uplink_kb != T::zero() || self.downlink_kb != T::zero()) {
            return Err(ValidationError::new(
                field("d_ul"),
                "uplink and downlink volumes must be 0 at the full-local split index",
            ));
        }

        match self.ratio {
            Some(stored) => {
                if self.compressed_kb == T::zero() {
                    return Err(ValidationError::new(
                        field("ratio"),
                        "must be omitted when the compressed volume is zero",
                    ));
                }
                let computed = self.original_kb / self.compressed_kb;
                let rel = ((computed - stored) / stored).abs();
                if rel > from_f64(RATIO_WARN_TOLERANCE) {
                    return Ok(Some(ValidationWarning {
                        field: field("ratio"),
                        message: format!(
                            "stored ratio {stored} differs from d_orig/d_comp = {computed} \
                             by more than {:.1}%",
                            RATIO_WARN_TOLERANCE * 100.0
                        ),
                    }));
                }
                Ok(None)
            }
            None => Ok(None),
        }
    }
}

/// One entry per split index, dense and sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitProfile<T> {
    pub entries: Vec<SplitPointEntry<T>>,
}

impl<T: Scalar> SplitProfile<T> {
    pub fn entry(&self, split: u32) -> &SplitPointEntry<T> {
        &self.entries[split as usize]
    }

    /// Computing demand of segment `i` (the layers between split `i - 1` and
    /// split `i`), in FLOP. Valid for `i` in `1..=num_splits`.
    pub fn segment_flop(&self, segment: u32) -> T {
        assert!(segment >= 1, "segments are numbered from 1");
        self.entries[(segment - 1) as usize].segment_flop()
    }

    fn validate(
        &self,
        topology: &CnnTopology,
        warnings: &mut Vec<ValidationWarning>,
    ) -> Result<(), ValidationError> {
        let expected = topology.num_splits as usize + 1;
        if self.entries.len() != expected {
            return Err(ValidationError::new(
                "splits",
                format!(
                    "expected {expected} entries (split indices 0..={}), found {}",
                    topology.num_splits,
                    self.entries.len()
                ),
            ));
        }
        for (i, entry) in self.entries.iter().enumerate() {
            if entry.split_index as usize != i {
                return Err(ValidationError::new(
                    format!("splits.{}.split_index", i),
                    format!("entries must be dense and sorted; expected {i}"),
                ));
            }
            if let Some(w) = entry.validate(i + 1 == expected)? {
                warnings.push(w);
            }
        }
        Ok(())
    }
}

/// Link bitrates (Mbps) and constant per-message network overheads (ms).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkProfile<T> {
    pub uplink_mbps: T,
    pub downlink_mbps: T,
    pub uplink_overhead_ms: T,
    pub downlink_overhead_ms: T,
}

impl<T: Scalar> NetworkProfile<T> {
    pub fn uplink_bps(&self) -> T {
        self.uplink_mbps * from_f64(1e6)
    }

    pub fn downlink_bps(&self) -> T {
        self.downlink_mbps * from_f64(1e6)
    }

    pub fn uplink_overhead_s(&self) -> T {
        self.uplink_overhead_ms * from_f64(1e-3)
    }

    pub fn downlink_overhead_s(&self) -> T {
        self.downlink_overhead_ms * from_f64(1e-3)
    }

    fn validate(&self) -> Result<(), ValidationError> {
        let positive = |value: T, key: &str| -> Result<(), ValidationError> {
            if !(value > T::zero()) || !value.is_finite() {
                return Err(ValidationError::new(
                    format!("network.{key}"),
                    "must be finite and > 0",
                ));
            }
            Ok(())
        };
        let nonneg = |value: T, key: &str| -> Result<(), ValidationError> {
            if !(value >= T::zero()) || !value.is_finite() {
                return Err(ValidationError::new(
                    format!("network.{key}"),
                    "must be finite and >= 0",
                ));
            }
            Ok(())
        };
        positive(self.uplink_mbps, "b_ul")?;
        positive(self.downlink_mbps, "b_dl")?;
        nonneg(self.uplink_overhead_ms, "d_ul")?;
        nonneg(self.downlink_overhead_ms, "d_dl")?;
        Ok(())
    }
}

/// How the volume-dependent part of the preprocessing delay is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PrepModel {
    /// `d_prep + volume / k_prep`, reading `k_prep` as a throughput (kb/ms).
    #[default]
    Divide,
    /// `d_prep + k_prep * volume`, reading `k_prep` as ms/kb.
    Multiply,
}

/// Which volume drives the preprocessing delay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PrepVolume {
    /// Compressed feature volume at the split point.
    #[default]
    Compressed,
    /// Transmitted uplink volume (including transport overhead).
    Uplink,
}

/// Compute rates (GFLOPS) and fitted constant per-stage delays (ms).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComputeProfile<T> {
    /// Effective device compute rate.
    pub device_gflops: T,
    /// Effective edge-server compute rate.
    pub mec_gflops: T,
    /// Constant per-segment overhead on the device.
    pub device_overhead_ms: T,
    /// Constant per-segment overhead on the edge server.
    pub mec_overhead_ms: T,
    /// Fixed delay at the start of preprocessing.
    pub prep_overhead_ms: T,
    /// Preprocessing throughput in kb/ms (see [`PrepModel`]). May be
    /// infinite, which disables the volume-dependent term in divide mode.
    pub prep_rate_kb_per_ms: T,
    /// Raw edge-server CPU rate, informational only.
    pub cpu_gflops: Option<T>,
    /// Raw edge-server GPU rate, informational only.
    pub gpu_gflops: Option<T>,
    pub prep_model: PrepModel,
    pub prep_volume: PrepVolume,
}

impl<T: Scalar> ComputeProfile<T> {
    pub fn device_flops(&self) -> T {
        self.device_gflops * from_f64(1e9)
    }

    pub fn mec_flops(&self) -> T {
        self.mec_gflops * from_f64(1e9)
    }

    pub fn device_overhead_s(&self) -> T {
        self.device_overhead_ms * from_f64(1e-3)
    }

    pub fn mec_overhead_s(&self) -> T {
        self.mec_overhead_ms * from_f64(1e-3)
    }

    pub fn prep_overhead_s(&self) -> T {
        self.prep_overhead_ms * from_f64(1e-3)
    }

    /// Preprocessing throughput in bit/s (1 kb/ms = 10^6 bit/s).
    pub fn prep_rate_bps(&self) -> T {
        self.prep_rate_kb_per_ms * from_f64(1e6)
    }

    fn validate(&self) -> Result<(), ValidationError> {
        let err = |key: &str, msg: &str| Err(ValidationError::new(format!("compute.{key}"), msg));
        if !(self.device_gflops > T::zero()) || !self.device_gflops.is_finite() {
            return err("c_dev", "must be finite and > 0");
        }
        if !(self.mec_gflops > T::zero()) || !self.mec_gflops.is_finite() {
            return err("c_mec", "must be finite and > 0");
        }
        let nonneg = |value: T, key: &'static str| -> Result<(), ValidationError> {
            if !(value >= T::zero()) || !value.is_finite() {
                return Err(ValidationError::new(
                    format!("compute.{key}"),
                    "must be finite and >= 0",
                ));
            }
            Ok(())
        };
        nonneg(self.device_overhead_ms, "d_dev")?;
        nonneg(self.mec_overhead_ms, "d_mec")?;
        nonneg(self.prep_overhead_ms, "d_prep")?;
        // Infinity is allowed here: in divide mode it turns the
        // volume-dependent preprocessing term off exactly.
        if !(self.prep_rate_kb_per_ms > T::zero()) || self.prep_rate_kb_per_ms.is_nan() {
            return err("k_prep", "must be > 0");
        }
        if let Some(rate) = self.cpu_gflops {
            if !(rate >= T::zero()) || !rate.is_finite() {
                return err("c_cpu", "must be finite and >= 0");
            }
        }
        if let Some(rate) = self.gpu_gflops {
            if !(rate >= T::zero()) || !rate.is_finite() {
                return err("c_gpu", "must be finite and >= 0");
            }
        }
        Ok(())
    }
}

/// Device power draw (watts) per offloading phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerProfile<T> {
    pub idle_w: T,
    pub prep_w: T,
    pub proc_w: T,
    pub comm_w: T,
}

impl<T: Scalar> PowerProfile<T> {
    fn validate(&self) -> Result<(), ValidationError> {
        for (value, key) in [
            (self.idle_w, "p_idle"),
            (self.prep_w, "p_prep"),
            (self.proc_w, "p_proc"),
            (self.comm_w, "p_comm"),
        ] {
            if !(value >= T::zero()) || !value.is_finite() {
                return Err(ValidationError::new(
                    format!("power.{key}"),
                    "must be finite and >= 0",
                ));
            }
        }
        Ok(())
    }
}

/// Where an accuracy value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Directly measured.
    Measured,
    /// Known only approximately (e.g. read off a rounded figure).
    MeasuredApprox,
    /// Interpolated placeholder, not ground truth.
    Interpolated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyCell<T> {
    pub value: T,
    pub provenance: Provenance,
}

/// Classification accuracy per (exit, split) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyProfile<T> {
    /// `rows[exit - 1][split]`.
    rows: Vec<Vec<AccuracyCell<T>>>,
}

impl<T: Scalar> AccuracyProfile<T> {
    pub fn new(rows: Vec<Vec<AccuracyCell<T>>>) -> Self {
        Self { rows }
    }

    /// Builds a profile whose accuracy is constant across split points for
    /// each exit, which is what measurements show for compressed features.
    pub fn uniform_rows(rows: &[(T, Provenance)], num_split_indices: usize) -> Self {
        Self {
            rows: rows
                .iter()
                .map(|&(value, provenance)| {
                    vec![AccuracyCell { value, provenance }; num_split_indices]
                })
                .collect(),
        }
    }

    pub fn cell(&self, exit: u32, split: u32) -> &AccuracyCell<T> {
        &self.rows[(exit - 1) as usize][split as usize]
    }

    pub fn value(&self, exit: u32, split: u32) -> T {
        self.cell(exit, split).value
    }

    pub fn rows(&self) -> &[Vec<AccuracyCell<T>>] {
        &self.rows
    }

    fn validate(&self, topology: &CnnTopology) -> Result<(), ValidationError> {
        if self.rows.len() != topology.num_exits as usize {
            return Err(ValidationError::new(
                "accuracy",
                format!(
                    "expected {} exit rows, found {}",
                    topology.num_exits,
                    self.rows.len()
                ),
            ));
        }
        let cols = topology.num_splits as usize + 1;
        for (i, row) in self.rows.iter().enumerate() {
            let key = format!("accuracy.exit_{}", i + 1);
            if row.len() != cols {
                return Err(ValidationError::new(
                    key,
                    format!("expected {cols} values, found {}", row.len()),
                ));
            }
            for (s, cell) in row.iter().enumerate() {
                if !(cell.value >= T::zero()) || !(cell.value <= T::one()) {
                    return Err(ValidationError::new(
                        format!("{key}.values[{s}]"),
                        "accuracy must lie in [0, 1]",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// The complete, validated description of one device/edge deployment.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemProfile<T> {
    pub topology: CnnTopology,
    pub splits: SplitProfile<T>,
    pub network: NetworkProfile<T>,
    pub compute: ComputeProfile<T>,
    pub power: PowerProfile<T>,
    pub accuracy: AccuracyProfile<T>,
}

impl<T: Scalar> SystemProfile<T> {
    /// Checks every invariant. Returns non-fatal findings (currently only
    /// stored-vs-computed compression ratio drift) as warnings.
    pub fn validate(&self) -> Result<Vec<ValidationWarning>, ValidationError> {
        let mut warnings = Vec::new();
        self.topology.validate()?;
        self.network.validate()?;
        self.compute.validate()?;
        self.power.validate()?;
        self.splits.validate(&self.topology, &mut warnings)?;
        self.accuracy.validate(&self.topology)?;
        Ok(warnings)
    }
}

/// A concrete (exit, split) choice.
///
/// Offloading is active exactly when `split < exit`; otherwise the whole
/// inference up to the exit runs on the device and the link is never used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExecutionPlan {
    pub exit: u32,
    pub split: u32,
}

impl ExecutionPlan {
    pub fn new(exit: u32, split: u32) -> Self {
        Self { exit, split }
    }

    /// Builds a plan after range-checking it against the topology.
    pub fn checked(exit: u32, split: u32, topology: &CnnTopology) -> Result<Self, PlanError> {
        if exit < 1 || exit > topology.num_exits {
            return Err(PlanError::ExitOutOfRange {
                max: topology.num_exits,
            });
        }
        if split > topology.num_splits {
            return Err(PlanError::SplitOutOfRange {
                max: topology.num_splits,
            });
        }
        Ok(Self { exit, split })
    }

    pub fn offload_active(&self) -> bool {
        self.split < self.exit
    }
}

impl fmt::Display for ExecutionPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(E={}, S={})", self.exit, self.split)
    }
}

/// Original-to-compressed volume ratio achieved by a compressor.
///
/// Errors when the compressed volume is zero (the ratio is undefined there;
/// the loader stores an absent ratio for such rows instead of calling this).
pub fn compression_ratio<T: Scalar>(
    original_kb: T,
    compressed_kb: T,
) -> Result<T, ProfileError> {
    if !(compressed_kb > T::zero()) {
        return Err(ProfileError::UndefinedRatio);
    }
    Ok(original_kb / compressed_kb)
}
