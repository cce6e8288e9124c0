//! Radial distribution feeder: data model, topology, load flow and the
//! quantities derived from it (losses, voltage limits, nodal balance).

mod network;
mod sweep;

pub use network::{BranchData, BusData, DgUnit, Feeder, NetworkModel, PvUnit, StationData};
pub use sweep::{sweep_load_flow, FlowSnapshot, SweepOptions};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, DT_HOURS};

/// Statutory voltage band in p.u. (IEC 60038: -6 % / +10 %).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoltageLimits {
    pub v_min: f64,
    pub v_max: f64,
}

impl Default for VoltageLimits {
    fn default() -> Self {
        Self {
            v_min: 0.94,
            v_max: 1.10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoltageViolation {
    pub bus: usize,
    pub hour: usize,
    pub voltage: f64,
    /// Distance outside the band, always positive.
    pub excess: f64,
}

/// Loss cost over the horizon: `price * sum_t P_loss(t) * dt`.
pub fn loss_cost(flows: &[FlowSnapshot], price_per_kwh: f64) -> f64 {
    price_per_kwh * flows.iter().map(|f| f.loss_kw * DT_HOURS).sum::<f64>()
}

/// Every bus-hour whose voltage magnitude lies outside `limits`. `flows[h]` is hour `h`.
pub fn voltage_violations(
    feeder: &Feeder,
    flows: &[FlowSnapshot],
    limits: VoltageLimits,
) -> Vec<VoltageViolation> {
    let mut out = Vec::new();
    for (hour, flow) in flows.iter().enumerate() {
        for (idx, v) in flow.voltages.iter().enumerate() {
            let m = v.norm();
            let excess = if m < limits.v_min {
                limits.v_min - m
            } else if m > limits.v_max {
                m - limits.v_max
            } else {
                continue;
            };
            out.push(VoltageViolation {
                bus: feeder.bus_id(idx),
                hour,
                voltage: m,
                excess,
            });
        }
    }
    out
}

/// Inputs of one hour's nodal balance. Powers in kW (kvar for the base load).
#[derive(Debug, Clone, Copy)]
pub struct HourInputs<'a> {
    /// Consumption per bus index, `P + jQ`.
    pub base_load: &'a [Complex64],
    /// `(bus id, charging kW, discharging kW)` per station.
    pub stations: &'a [(usize, f64, f64)],
    /// `(bus id, kW)` per dispatched DG unit.
    pub dg: &'a [(usize, f64)],
    /// `(bus id, kW)` per PV unit.
    pub pv: &'a [(usize, f64)],
}

impl HourInputs<'_> {
    pub fn totals(&self) -> HourTotals {
        HourTotals {
            load_kw: self.base_load.iter().map(|s| s.re).sum(),
            charge_kw: self.stations.iter().map(|s| s.1).sum(),
            discharge_kw: self.stations.iter().map(|s| s.2).sum(),
            dg_kw: self.dg.iter().map(|d| d.1).sum(),
            pv_kw: self.pv.iter().map(|p| p.1).sum(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HourTotals {
    pub load_kw: f64,
    pub charge_kw: f64,
    pub discharge_kw: f64,
    pub dg_kw: f64,
    pub pv_kw: f64,
}

/// Net complex injection per bus index (generation positive, kW/kvar).
///
/// BEV, PV and DG injections are active power only. The slack bus entry is
/// whatever is connected there; the flow solution supplies the residual.
pub fn net_injection(feeder: &Feeder, inputs: &HourInputs<'_>) -> Result<Vec<Complex64>> {
    if inputs.base_load.len() != feeder.len() {
        return Err(Error::config(format!(
            "base load covers {} buses, feeder has {}",
            inputs.base_load.len(),
            feeder.len()
        )));
    }
    let mut inj: Vec<Complex64> = inputs.base_load.iter().map(|s| -s).collect();
    for &(bus, charge, discharge) in inputs.stations {
        inj[feeder.index_of(bus)?].re += discharge - charge;
    }
    for &(bus, p) in inputs.dg.iter().chain(inputs.pv) {
        inj[feeder.index_of(bus)?].re += p;
    }
    Ok(inj)
}

/// Network balance residual in kW:
/// `P_grid + P_DG + P_PV - P_charge + P_discharge - P_load - P_loss`.
pub fn balance_residual_kw(flow: &FlowSnapshot, totals: &HourTotals) -> f64 {
    flow.slack_kw + totals.dg_kw + totals.pv_kw - totals.charge_kw + totals.discharge_kw
        - totals.load_kw
        - flow.loss_kw
}
