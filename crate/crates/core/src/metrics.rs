//! Load-profile indices and scenario comparison reports.

use std::io::Write;

use serde::Serialize;

use crate::{Error, Result};

/// Load factor, peak-to-valley and peak compensation, all in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoadIndices {
    pub lf: f64,
    pub p2v: f64,
    pub pc: f64,
}

/// `lf = 100 mean/max`, `p2v = 100 (max - min)/max` of the total load and
/// `pc = 100 (max base - max total)/max base`.
pub fn load_indices(total: &[f64], base: &[f64]) -> Result<LoadIndices> {
    let max = |s: &[f64]| s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let peak = max(total);
    let base_peak = max(base);
    if total.is_empty() || !(peak > 0.0) {
        return Err(Error::DivisionByZero("peak of total load".into()));
    }
    if base.is_empty() || !(base_peak > 0.0) {
        return Err(Error::DivisionByZero("peak of base load".into()));
    }
    let mean = total.iter().sum::<f64>() / total.len() as f64;
    let min = total.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(LoadIndices {
        lf: 100.0 * mean / peak,
        p2v: 100.0 * (peak - min) / peak,
        pc: 100.0 * (base_peak - peak) / base_peak,
    })
}

/// Scenario feature flags as printed in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub struct FlagRow {
    pub v2g: bool,
    pub bdc: bool,
    pub res: bool,
    pub oep: bool,
    pub erq: bool,
}

/// One scenario's summary line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub scenario: String,
    #[serde(flatten)]
    pub flags: FlagRow,
    pub rho: f64,
    pub front_size: usize,
    pub f1_min: f64,
    pub f1_max: f64,
    pub f2_min: f64,
    pub f2_max: f64,
    pub f1_selected: f64,
    pub f2_selected: f64,
    pub lf: f64,
    pub p2v: f64,
    pub pc: f64,
    pub total_bev_cost: f64,
    pub carbon_kg_ev: f64,
    pub carbon_kg_cs: f64,
    pub carbon_revenue: f64,
    pub degradation_total: f64,
    pub v2g_kwh: f64,
    pub min_voltage: f64,
    pub participants: usize,
    pub rejected: usize,
}

impl ReportRow {
    /// Fill the front ranges from the front's `(f1, f2)` points.
    pub fn set_ranges(&mut self, front: &[(f64, f64)]) {
        let fold = |f: fn(&(f64, f64)) -> f64| {
            front.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)))
        };
        (self.f1_min, self.f1_max) = fold(|p| p.0);
        (self.f2_min, self.f2_max) = fold(|p| p.1);
        self.front_size = front.len();
    }

    /// Field values in [`REPORT_COLUMNS`] order.
    pub fn record(&self) -> Vec<String> {
        let r = self;
        vec![
            r.scenario.clone(),
            r.flags.v2g.to_string(),
            r.flags.bdc.to_string(),
            r.flags.res.to_string(),
            r.flags.oep.to_string(),
            r.flags.erq.to_string(),
            r.rho.to_string(),
            r.front_size.to_string(),
            r.f1_min.to_string(),
            r.f1_max.to_string(),
            r.f2_min.to_string(),
            r.f2_max.to_string(),
            r.f1_selected.to_string(),
            r.f2_selected.to_string(),
            r.lf.to_string(),
            r.p2v.to_string(),
            r.pc.to_string(),
            r.total_bev_cost.to_string(),
            r.carbon_kg_ev.to_string(),
            r.carbon_kg_cs.to_string(),
            r.carbon_revenue.to_string(),
            r.degradation_total.to_string(),
            r.v2g_kwh.to_string(),
            r.min_voltage.to_string(),
            r.participants.to_string(),
            r.rejected.to_string(),
        ]
    }
}

/// Column names of the report CSV, in order.
pub const REPORT_COLUMNS: [&str; 26] = [
    "scenario", "v2g", "bdc", "res", "oep", "erq", "rho", "front_size", "f1_min", "f1_max", "f2_min",
    "f2_max", "f1_selected", "f2_selected", "lf", "p2v", "pc", "total_bev_cost", "carbon_kg_ev",
    "carbon_kg_cs", "carbon_revenue", "degradation_total", "v2g_kwh", "min_voltage", "participants",
    "rejected",
];

/// Write the comparison table as CSV (header plus one row per scenario).
pub fn write_report_csv<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_COLUMNS)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush().map_err(|e| Error::io("report.csv", e))?;
    Ok(())
}

/// Write the comparison table as a JSON array.
pub fn write_report_json<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, rows)?;
    Ok(())
}
