//! Trajectory records and their CSV form.
//!
//! The CSV has the fixed columns
//! `t,r,r_sq,k0,p_norm_l2,q_norm_l2,p_norm_h1,q_norm_h1,rho,p0,p1,phase`
//! optionally followed by `u_1..u_N`. Floats are written with 17
//! significant digits so a record survives a write/read cycle exactly.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::solver::{BlowupEvent, K0Switch};
use crate::error::{Error, Result};
use crate::io::{fmt_f64, parse_f64};
use crate::regimes::PhaseTag;

pub const CSV_COLUMNS: [&str; 12] = [
    "t",
    "r",
    "r_sq",
    "k0",
    "p_norm_l2",
    "q_norm_l2",
    "p_norm_h1",
    "q_norm_h1",
    "rho",
    "p0",
    "p1",
    "phase",
];

/// One output time of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub t: f64,
    pub r: f64,
    pub r_sq: f64,
    /// Threshold index; N + 1 when no mode in the truncation qualifies.
    pub k0: usize,
    pub p_norm_l2: f64,
    pub q_norm_l2: f64,
    pub p_norm_h1: f64,
    pub q_norm_h1: f64,
    /// NaN when k0 = N + 1.
    pub rho: f64,
    pub p0: f64,
    pub p1: f64,
    pub phase: PhaseTag,
    pub modes: Vec<f64>,
    /// H1_0 norm; recomputed from `modes` when read back.
    pub h1: f64,
    /// Accumulated net rate int (damping - growth); NaN when read back.
    pub phi: f64,
    pub phi_rate: f64,
    pub k0_equality: bool,
}

/// Output of a spectral run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub mode_count: usize,
    pub rows: Vec<Row>,
    pub blowup: Option<BlowupEvent>,
    pub k0_switches: Vec<K0Switch>,
    /// Rows where no mode within the truncation exceeds the threshold.
    pub truncation_warnings: usize,
    /// Rows where the threshold inequality holds with equality.
    pub equality_events: usize,
    /// Rows whose top tenth of modes holds too much energy.
    pub tail_warnings: usize,
}

impl TrajectoryRecord {
    pub fn new(mode_count: usize) -> Self {
        Self {
            mode_count,
            ..Self::default()
        }
    }

    pub fn start_time(&self) -> Option<f64> {
        self.rows.first().map(|r| r.t)
    }

    pub fn end_time(&self) -> Option<f64> {
        self.rows.last().map(|r| r.t)
    }

    pub fn write_csv<W: Write>(&self, w: W, with_modes: bool) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header: Vec<String> = CSV_COLUMNS.iter().map(|s| s.to_string()).collect();
        if with_modes {
            header.extend((1..=self.mode_count).map(|k| format!("u_{k}")));
        }
        out.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![
                fmt_f64(row.t),
                fmt_f64(row.r),
                fmt_f64(row.r_sq),
                row.k0.to_string(),
                fmt_f64(row.p_norm_l2),
                fmt_f64(row.q_norm_l2),
                fmt_f64(row.p_norm_h1),
                fmt_f64(row.q_norm_h1),
                fmt_f64(row.rho),
                fmt_f64(row.p0),
                fmt_f64(row.p1),
                row.phase.as_str().to_string(),
            ];
            if with_modes {
                rec.extend(row.modes.iter().map(|v| fmt_f64(*v)));
            }
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads rows written by [`write_csv`](Self::write_csv). Run-level
    /// metadata (blow-up event, warnings) is not part of the CSV.
    pub fn read_csv<R: Read>(r: R, lambdas: Option<&[f64]>) -> Result<Self> {
        let mut input = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let header = input.headers()?.clone();
        if header.len() < CSV_COLUMNS.len() || header.iter().zip(CSV_COLUMNS).any(|(a, b)| a != b) {
            return Err(Error::Parse("trajectory CSV header does not match".into()));
        }
        let mode_count = header.len() - CSV_COLUMNS.len();
        for (k, name) in header.iter().skip(CSV_COLUMNS.len()).enumerate() {
            if name != format!("u_{}", k + 1) {
                return Err(Error::Parse(format!("unexpected column `{name}`")));
            }
        }
        if let Some(l) = lambdas {
            if mode_count > 0 && l.len() != mode_count {
                return Err(Error::Parse("mode columns do not match the basis".into()));
            }
        }
        let mut record = TrajectoryRecord::new(mode_count);
        for (line, rec) in input.records().enumerate() {
            let rec = rec?;
            if rec.len() != header.len() {
                return Err(Error::Parse(format!("row {} has {} fields", line + 1, rec.len())));
            }
            let num = |i: usize| {
                parse_f64(&rec[i]).ok_or_else(|| Error::Parse(format!("row {}: bad number `{}`", line + 1, &rec[i])))
            };
            let k0 = rec[3]
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("row {}: bad k0 `{}`", line + 1, &rec[3])))?;
            let phase = PhaseTag::parse(&rec[11])
                .ok_or_else(|| Error::Parse(format!("row {}: unknown phase `{}`", line + 1, &rec[11])))?;
            let modes = (CSV_COLUMNS.len()..rec.len()).map(num).collect::<Result<Vec<_>>>()?;
            let h1 = match lambdas {
                Some(l) if !modes.is_empty() => super::h1_norm(&modes, l),
                _ => f64::NAN,
            };
            record.rows.push(Row {
                t: num(0)?,
                r: num(1)?,
                r_sq: num(2)?,
                k0,
                p_norm_l2: num(4)?,
                q_norm_l2: num(5)?,
                p_norm_h1: num(6)?,
                q_norm_h1: num(7)?,
                rho: num(8)?,
                p0: num(9)?,
                p1: num(10)?,
                phase,
                modes,
                h1,
                phi: f64::NAN,
                phi_rate: f64::NAN,
                k0_equality: false,
            });
        }
        Ok(record)
    }
}
