//! Flat report rows for CSV and JSON emission.
//!
//! CSV output prints delays in ms with 3 decimals and energies in J with 4
//! decimals (accuracy with 4); JSON carries full-precision values. The
//! column order is fixed and the parser accepts exactly the writer's output,
//! so emitted CSV round-trips losslessly.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::CostReport;
use crate::scalar::{to_f64, Scalar};

pub const CSV_HEADER: &str = "exit,split,accuracy,t_prep_ms,t_local_ms,t_mec_ms,t_ul_ms,t_dl_ms,\
                              t_total_ms,e_idle_j,e_prep_j,e_comp_j,e_comm_j,e_total_j,offload_active";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("CSV parse error on line {line}: {message}")]
    Csv { line: usize, message: String },
}

/// One plan's costs with delays in milliseconds and energies in joules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub exit: u32,
    pub split: u32,
    pub accuracy: f64,
    pub t_prep_ms: f64,
    pub t_local_ms: f64,
    pub t_mec_ms: f64,
    pub t_ul_ms: f64,
    pub t_dl_ms: f64,
    pub t_total_ms: f64,
    pub e_idle_j: f64,
    pub e_prep_j: f64,
    pub e_comp_j: f64,
    pub e_comm_j: f64,
    pub e_total_j: f64,
    pub offload_active: bool,
}

fn round_to(value: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (value * scale).round() / scale
}

impl ReportRow {
    /// Full-precision row (used for JSON).
    pub fn full<T: Scalar>(report: &CostReport<T>) -> Self {
        let d = &report.delay;
        let e = &report.energy;
        let ms = |s: T| to_f64(s) * 1e3;
        Self {
            exit: report.plan.exit,
            split: report.plan.split,
            accuracy: to_f64(report.accuracy),
            t_prep_ms: ms(d.t_prep),
            t_local_ms: ms(d.t_local),
            t_mec_ms: ms(d.t_mec),
            t_ul_ms: ms(d.t_ul),
            t_dl_ms: ms(d.t_dl),
            t_total_ms: ms(d.t_total),
            e_idle_j: to_f64(e.e_idle),
            e_prep_j: to_f64(e.e_prep),
            e_comp_j: to_f64(e.e_comp),
            e_comm_j: to_f64(e.e_comm),
            e_total_j: to_f64(e.e_total),
            offload_active: report.offload_active,
        }
    }

    /// Row rounded to the CSV print precision.
    pub fn rounded<T: Scalar>(report: &CostReport<T>) -> Self {
        let mut row = Self::full(report);
        for ms in [
            &mut row.t_prep_ms,
            &mut row.t_local_ms,
            &mut row.t_mec_ms,
            &mut row.t_ul_ms,
            &mut row.t_dl_ms,
            &mut row.t_total_ms,
        ] {
            *ms = round_to(*ms, 3);
        }
        for joules in [
            &mut row.e_idle_j,
            &mut row.e_prep_j,
            &mut row.e_comp_j,
            &mut row.e_comm_j,
            &mut row.e_total_j,
        ] {
            *joules = round_to(*joules, 4);
        }
        row.accuracy = round_to(row.accuracy, 4);
        row
    }

    pub fn to_csv_line(&self) -> String {
        let mut line = String::new();
        write!(
            line,
            "{},{},{:.4},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3},{:.4},{:.4},{:.4},{:.4},{:.4},{}",
            self.exit,
            self.split,
            self.accuracy,
            self.t_prep_ms,
            self.t_local_ms,
            self.t_mec_ms,
            self.t_ul_ms,
            self.t_dl_ms,
            self.t_total_ms,
            self.e_idle_j,
            self.e_prep_j,
            self.e_comp_j,
            self.e_comm_j,
            self.e_total_j,
            self.offload_active
        )
        .expect("write to string");
        line
    }
}

/// Renders header plus one line per row.
pub fn to_csv(rows: &[ReportRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

/// Parses CSV produced by [`to_csv`] back into rows.
pub fn from_csv(text: &str) -> Result<Vec<ReportRow>, ReportError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        Some((_, header)) => {
            return Err(ReportError::Csv {
                line: 1,
                message: format!("unexpected header `{header}`"),
            })
        }
        None => {
            return Err(ReportError::Csv {
                line: 1,
                message: "empty input".into(),
            })
        }
    }

    let mut rows = Vec::new();
    for (index, line) in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| ReportError::Csv {
            line: index + 1,
            message,
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 15 {
            return Err(err(format!("expected 15 fields, found {}", fields.len())));
        }
        let int = |s: &str| -> Result<u32, ReportError> {
            s.parse().map_err(|_| err(format!("bad integer `{s}`")))
        };
        let num = |s: &str| -> Result<f64, ReportError> {
            s.parse().map_err(|_| err(format!("bad number `{s}`")))
        };
        let flag = |s: &str| -> Result<bool, ReportError> {
            s.parse().map_err(|_| err(format!("bad flag `{s}`")))
        };
        rows.push(ReportRow {
            exit: int(fields[0])?,
            split: int(fields[1])?,
            accuracy: num(fields[2])?,
            t_prep_ms: num(fields[3])?,
            t_local_ms: num(fields[4])?,
            t_mec_ms: num(fields[5])?,
            t_ul_ms: num(fields[6])?,
            t_dl_ms: num(fields[7])?,
            t_total_ms: num(fields[8])?,
            e_idle_j: num(fields[9])?,
            e_prep_j: num(fields[10])?,
            e_comp_j: num(fields[11])?,
            e_comm_j: num(fields[12])?,
            e_total_j: num(fields[13])?,
            offload_active: flag(fields[14])?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::evaluate_plan;
    use crate::planner::sweep;
    use crate::profiles::{default_paper_profile, ExecutionPlan};

    #[test]
    fn csv_round_trip_is_lossless() {
        let p = default_paper_profile::<f64>();
        let rows: Vec<ReportRow> = sweep(&p, true)
            .rows
            .iter()
            .map(ReportRow::rounded)
            .collect();
        let text = to_csv(&rows);
        let parsed = from_csv(&text).unwrap();
        assert_eq!(parsed, rows);
        assert_eq!(to_csv(&parsed), text);
    }

    #[test]
    fn fixed_decimals() {
        let p = default_paper_profile::<f64>();
        let row = ReportRow::rounded(&evaluate_plan(ExecutionPlan::new(5, 0), &p, true));
        let line = row.to_csv_line();
        assert!(line.starts_with("5,0,0.9300,16.515,"), "{line}");
        assert!(line.contains(",196.908,"), "{line}");
        assert!(line.ends_with(",true"), "{line}");
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!(from_csv("bogus header\n").is_err());
        let text = format!("{CSV_HEADER}\n1,2,3\n");
        assert!(from_csv(&text).is_err());
    }

    #[test]
    fn json_row_has_full_precision() {
        let p = default_paper_profile::<f64>();
        let report = evaluate_plan(ExecutionPlan::new(5, 0), &p, true);
        let row = ReportRow::full(&report);
        let json = serde_json::to_string(&row).unwrap();
        let back: ReportRow = serde_json::from_str(&json).unwrap();
        assert_eq!(back.t_total_ms, report.delay.t_total * 1e3);
    }
}
