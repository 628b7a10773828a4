//! TOML configuration format for [`SystemProfile`].
//!
//! The file has sections `[topology]`, `[network]`, `[compute]`, `[power]`,
//! an array of tables `[[splits]]`, and per-exit accuracy rows under
//! `[accuracy.exit_N]`. Keys use the measurement-table units: kilobits,
//! milliseconds, Mbps, GFLOP, GFLOPS, and watts. Any section missing from a
//! file falls back to the shipped defaults wholesale; key/value overrides
//! (`section.key=value`) are applied last. See `docs/config.md` for the key
//! reference.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::scalar::{from_f64, to_f64, Scalar};

use super::{
    compression_ratio, default_paper_profile, AccuracyCell, AccuracyProfile, CnnTopology,
    ComputeProfile, NetworkProfile, PowerProfile, PrepModel, PrepVolume, ProfileError,
    Provenance, SplitPointEntry, SplitProfile, SystemProfile,
};

const SECTIONS: [&str; 6] = ["topology", "network", "compute", "power", "splits", "accuracy"];

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    topology: TopologySection,
    network: NetworkSection,
    compute: ComputeSection,
    power: PowerSection,
    splits: Vec<SplitSection>,
    accuracy: BTreeMap<String, AccuracyRowSection>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologySection {
    num_blocks: u32,
    num_exits: u32,
    num_splits: u32,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    allow_exit_split_mismatch: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkSection {
    /// Uplink bitrate [Mbps].
    b_ul: f64,
    /// Downlink bitrate [Mbps].
    b_dl: f64,
    /// Constant uplink overhead delay [ms].
    d_ul: f64,
    /// Constant downlink overhead delay [ms].
    d_dl: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComputeSection {
    /// Device compute rate [GFLOPS].
    c_dev: f64,
    /// Edge-server compute rate [GFLOPS].
    c_mec: f64,
    /// Constant per-segment device delay [ms].
    d_dev: f64,
    /// Constant per-segment edge delay [ms].
    d_mec: f64,
    /// Fixed preprocessing startup delay [ms].
    d_prep: f64,
    /// Preprocessing throughput [kb/ms].
    k_prep: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c_cpu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c_gpu: Option<f64>,
    #[serde(default)]
    prep_model: PrepModelTag,
    #[serde(default)]
    prep_volume: PrepVolumeTag,
}

#[derive(Debug, Default, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum PrepModelTag {
    #[default]
    Divide,
    Multiply,
}

#[derive(Debug, Default, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum PrepVolumeTag {
    #[default]
    Comp,
    Ul,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerSection {
    p_idle: f64,
    p_prep: f64,
    p_proc: f64,
    p_comm: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SplitSection {
    split_index: u32,
    /// Original feature volume [kb].
    d_orig: f64,
    /// Compressed feature volume [kb].
    d_comp: f64,
    /// Stored compression ratio; computed from the volumes when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ratio: Option<f64>,
    /// Transmitted uplink volume incl. transport overhead [kb].
    d_ul: f64,
    /// Returned downlink volume incl. transport overhead [kb].
    d_dl: f64,
    /// Computing demand of the segment after this split [GFLOP].
    segment_demand: f64,
    /// Inferred from `d_comp < d_orig` when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    compressor: Option<bool>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AccuracyRowSection {
    values: Vec<f64>,
    #[serde(default)]
    provenance: ProvenanceSpec,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ProvenanceSpec {
    Uniform(ProvenanceTag),
    PerCell(Vec<ProvenanceTag>),
}

impl Default for ProvenanceSpec {
    fn default() -> Self {
        ProvenanceSpec::Uniform(ProvenanceTag::Measured)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ProvenanceTag {
    Measured,
    MeasuredApprox,
    Interpolated,
}

impl From<ProvenanceTag> for Provenance {
    fn from(tag: ProvenanceTag) -> Self {
        match tag {
            ProvenanceTag::Measured => Provenance::Measured,
            ProvenanceTag::MeasuredApprox => Provenance::MeasuredApprox,
            ProvenanceTag::Interpolated => Provenance::Interpolated,
        }
    }
}

impl From<Provenance> for ProvenanceTag {
    fn from(p: Provenance) -> Self {
        match p {
            Provenance::Measured => ProvenanceTag::Measured,
            Provenance::MeasuredApprox => ProvenanceTag::MeasuredApprox,
            Provenance::Interpolated => ProvenanceTag::Interpolated,
        }
    }
}

/// Loads a profile from `path`, fills unspecified sections from the shipped
/// defaults, applies `overrides` last, and validates the result.
pub fn load_profile<T: Scalar>(
    path: &Path,
    overrides: &[(&str, &str)],
) -> Result<SystemProfile<T>, ProfileError> {
    let text = std::fs::read_to_string(path).map_err(|source| ProfileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    profile_from_toml_str(&text, overrides)
}

/// Same as [`load_profile`] but from an in-memory TOML string.
pub fn profile_from_toml_str<T: Scalar>(
    text: &str,
    overrides: &[(&str, &str)],
) -> Result<SystemProfile<T>, ProfileError> {
    let file_table: toml::Table =
        toml::from_str(text).map_err(|e| ProfileError::Parse(e.to_string()))?;
    for key in file_table.keys() {
        if !SECTIONS.contains(&key.as_str()) {
            return Err(ProfileError::Parse(format!("unknown section `{key}`")));
        }
    }

    let mut table = default_doc_table();
    for (key, value) in file_table {
        table.insert(key, value);
    }
    apply_overrides(&mut table, overrides)?;
    build_profile(table)
}

/// The shipped defaults with `overrides` applied on top.
pub fn default_profile_with_overrides<T: Scalar>(
    overrides: &[(&str, &str)],
) -> Result<SystemProfile<T>, ProfileError> {
    let mut table = default_doc_table();
    apply_overrides(&mut table, overrides)?;
    build_profile(table)
}

/// Renders a profile in the configuration format. Reloading the output
/// yields a field-wise identical profile.
pub fn to_toml_string<T: Scalar>(profile: &SystemProfile<T>) -> String {
    let doc = doc_from_profile(profile);
    toml::to_string_pretty(&doc).expect("profile serialization cannot fail")
}

fn default_doc_table() -> toml::Table {
    let doc = doc_from_profile(&default_paper_profile::<f64>());
    let mut table = toml::Table::try_from(doc).expect("default profile serializes");
    // Keys elided from rendered output still need to be override targets
    // (overrides may only replace existing keys).
    if let Some(toml::Value::Table(topology)) = table.get_mut("topology") {
        topology
            .entry("allow_exit_split_mismatch")
            .or_insert(toml::Value::Boolean(false));
    }
    table
}

fn build_profile<T: Scalar>(table: toml::Table) -> Result<SystemProfile<T>, ProfileError> {
    let doc: ConfigDoc = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| ProfileError::Parse(e.to_string()))?;
    let profile = profile_from_doc(doc)?;
    profile.validate()?;
    Ok(profile)
}

fn apply_overrides(
    table: &mut toml::Table,
    overrides: &[(&str, &str)],
) -> Result<(), ProfileError> {
    for &(key, raw_value) in overrides {
        let value = parse_override_value(raw_value);
        set_path(table, key, value).map_err(|reason| ProfileError::Override {
            key: key.to_string(),
            reason,
        })?;
    }
    Ok(())
}

/// Parses the right-hand side of an override as a TOML value, falling back
/// to a plain string (so `prep_model=multiply` works without quotes).
fn parse_override_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&wrapped) {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn set_path(table: &mut toml::Table, path: &str, value: toml::Value) -> Result<(), String> {
    let segments: Vec<&str> = path.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err("empty path segment".into());
    }
    let mut current = toml::Value::Table(std::mem::take(table));
    {
        let mut node = &mut current;
        for (i, segment) in segments.iter().enumerate() {
            let last = i + 1 == segments.len();
            match node {
                toml::Value::Table(t) => {
                    if last {
                        // Replacement only: every legitimate key already
                        // exists in the merged table, so an insert would be
                        // a typo.
                        if !t.contains_key(*segment) {
                            return Err(format!("no such key `{segment}`"));
                        }
                        t.insert(segment.to_string(), value);
                        break;
                    }
                    node = t
                        .get_mut(*segment)
                        .ok_or_else(|| format!("no such key `{segment}`"))?;
                }
                toml::Value::Array(items) => {
                    let index: usize = segment
                        .parse()
                        .map_err(|_| format!("`{segment}` is not an array index"))?;
                    if index >= items.len() {
                        return Err(format!("index {index} out of range"));
                    }
                    if last {
                        items[index] = value;
                        break;
                    }
                    node = &mut items[index];
                }
                _ => return Err(format!("`{segment}` does not address a table or array")),
            }
        }
    }
    match current {
        toml::Value::Table(t) => {
            *table = t;
            Ok(())
        }
        _ => unreachable!("root stays a table"),
    }
}

fn profile_from_doc<T: Scalar>(doc: ConfigDoc) -> Result<SystemProfile<T>, ProfileError> {
    let splits = doc
        .splits
        .into_iter()
        .map(|s| {
            let compressor = s.compressor.unwrap_or(s.d_comp < s.d_orig);
            let ratio = match s.ratio {
                Some(r) => Some(from_f64(r)),
                None if s.d_comp > 0.0 => Some(
                    compression_ratio(from_f64::<T>(s.d_orig), from_f64(s.d_comp))
                        .expect("d_comp > 0"),
                ),
                None => None,
            };
            SplitPointEntry {
                split_index: s.split_index,
                original_kb: from_f64(s.d_orig),
                compressed_kb: from_f64(s.d_comp),
                ratio,
                uplink_kb: from_f64(s.d_ul),
                downlink_kb: from_f64(s.d_dl),
                segment_gflop: from_f64(s.segment_demand),
                compressor,
            }
        })
        .collect();

    let num_exits = doc.topology.num_exits as usize;
    let mut rows: Vec<Vec<AccuracyCell<T>>> = Vec::with_capacity(num_exits);
    for exit in 1..=num_exits {
        let key = format!("exit_{exit}");
        let row = doc
            .accuracy
            .get(&key)
            .ok_or_else(|| ProfileError::Parse(format!("accuracy: missing row `{key}`")))?;
        rows.push(accuracy_row(row, &key)?);
    }
    for key in doc.accuracy.keys() {
        let well_formed = key
            .strip_prefix("exit_")
            .and_then(|n| n.parse::<usize>().ok())
            .map(|n| n >= 1 && n <= num_exits)
            .unwrap_or(false);
        if !well_formed {
            return Err(ProfileError::Parse(format!(
                "accuracy: unknown row `{key}` (expected exit_1..exit_{num_exits})"
            )));
        }
    }

    Ok(SystemProfile {
        topology: CnnTopology {
            num_blocks: doc.topology.num_blocks,
            num_exits: doc.topology.num_exits,
            num_splits: doc.topology.num_splits,
            allow_exit_split_mismatch: doc.topology.allow_exit_split_mismatch,
        },
        splits: SplitProfile { entries: splits },
        network: NetworkProfile {
            uplink_mbps: from_f64(doc.network.b_ul),
            downlink_mbps: from_f64(doc.network.b_dl),
            uplink_overhead_ms: from_f64(doc.network.d_ul),
            downlink_overhead_ms: from_f64(doc.network.d_dl),
        },
        compute: ComputeProfile {
            device_gflops: from_f64(doc.compute.c_dev),
            mec_gflops: from_f64(doc.compute.c_mec),
            device_overhead_ms: from_f64(doc.compute.d_dev),
            mec_overhead_ms: from_f64(doc.compute.d_mec),
            prep_overhead_ms: from_f64(doc.compute.d_prep),
            prep_rate_kb_per_ms: from_f64(doc.compute.k_prep),
            cpu_gflops: doc.compute.c_cpu.map(from_f64),
            gpu_gflops: doc.compute.c_gpu.map(from_f64),
            prep_model: match doc.compute.prep_model {
                PrepModelTag::Divide => PrepModel::Divide,
                PrepModelTag::Multiply => PrepModel::Multiply,
            },
            prep_volume: match doc.compute.prep_volume {
                PrepVolumeTag::Comp => PrepVolume::Compressed,
                PrepVolumeTag::Ul => PrepVolume::Uplink,
            },
        },
        power: PowerProfile {
            idle_w: from_f64(doc.power.p_idle),
            prep_w: from_f64(doc.power.p_prep),
            proc_w: from_f64(doc.power.p_proc),
            comm_w: from_f64(doc.power.p_comm),
        },
        accuracy: AccuracyProfile::new(rows),
    })
}

fn accuracy_row<T: Scalar>(
    row: &AccuracyRowSection,
    key: &str,
) -> Result<Vec<AccuracyCell<T>>, ProfileError> {
    let provenance: Vec<Provenance> = match &row.provenance {
        ProvenanceSpec::Uniform(tag) => vec![(*tag).into(); row.values.len()],
        ProvenanceSpec::PerCell(tags) => {
            if tags.len() != row.values.len() {
                return Err(ProfileError::Parse(format!(
                    "accuracy.{key}: provenance list length {} does not match values length {}",
                    tags.len(),
                    row.values.len()
                )));
            }
            tags.iter().map(|&t| t.into()).collect()
        }
    };
    Ok(row
        .values
        .iter()
        .zip(provenance)
        .map(|(&value, provenance)| AccuracyCell {
            value: from_f64(value),
            provenance,
        })
        .collect())
}

fn doc_from_profile<T: Scalar>(profile: &SystemProfile<T>) -> ConfigDoc {
    let splits = profile
        .splits
        .entries
        .iter()
        .map(|e| SplitSection {
            split_index: e.split_index,
            d_orig: to_f64(e.original_kb),
            d_comp: to_f64(e.compressed_kb),
            ratio: e.ratio.map(to_f64),
            d_ul: to_f64(e.uplink_kb),
            d_dl: to_f64(e.downlink_kb),
            segment_demand: to_f64(e.segment_gflop),
            compressor: Some(e.compressor),
        })
        .collect();

    let mut accuracy = BTreeMap::new();
    for (i, row) in profile.accuracy.rows().iter().enumerate() {
        let uniform = row.windows(2).all(|w| w[0].provenance == w[1].provenance);
        let provenance = if uniform && !row.is_empty() {
            ProvenanceSpec::Uniform(row[0].provenance.into())
        } else {
            ProvenanceSpec::PerCell(row.iter().map(|c| c.provenance.into()).collect())
        };
        accuracy.insert(
            format!("exit_{}", i + 1),
            AccuracyRowSection {
                values: row.iter().map(|c| to_f64(c.value)).collect(),
                provenance,
            },
        );
    }

    ConfigDoc {
        topology: TopologySection {
            num_blocks: profile.topology.num_blocks,
            num_exits: profile.topology.num_exits,
            num_splits: profile.topology.num_splits,
            allow_exit_split_mismatch: profile.topology.allow_exit_split_mismatch,
        },
        network: NetworkSection {
            b_ul: to_f64(profile.network.uplink_mbps),
            b_dl: to_f64(profile.network.downlink_mbps),
            d_ul: to_f64(profile.network.uplink_overhead_ms),
            d_dl: to_f64(profile.network.downlink_overhead_ms),
        },
        compute: ComputeSection {
            c_dev: to_f64(profile.compute.device_gflops),
            c_mec: to_f64(profile.compute.mec_gflops),
            d_dev: to_f64(profile.compute.device_overhead_ms),
            d_mec: to_f64(profile.compute.mec_overhead_ms),
            d_prep: to_f64(profile.compute.prep_overhead_ms),
            k_prep: to_f64(profile.compute.prep_rate_kb_per_ms),
            c_cpu: profile.compute.cpu_gflops.map(to_f64),
            c_gpu: profile.compute.gpu_gflops.map(to_f64),
            prep_model: match profile.compute.prep_model {
                PrepModel::Divide => PrepModelTag::Divide,
                PrepModel::Multiply => PrepModelTag::Multiply,
            },
            prep_volume: match profile.compute.prep_volume {
                PrepVolume::Compressed => PrepVolumeTag::Comp,
                PrepVolume::Uplink => PrepVolumeTag::Ul,
            },
        },
        power: PowerSection {
            p_idle: to_f64(profile.power.idle_w),
            p_prep: to_f64(profile.power.prep_w),
            p_proc: to_f64(profile.power.proc_w),
            p_comm: to_f64(profile.power.comm_w),
        },
        splits,
        accuracy,
    }
}
