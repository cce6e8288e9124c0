//! Monetary terms of the objectives and SOC dynamics.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, DT_HOURS, HOURS};

/// Tolerance of the station power balance audit, kW.
pub const BALANCE_TOLERANCE_KW: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SocLimits {
    pub min: f64,
    pub max: f64,
    /// SOC margin above the trip share required at departure.
    pub departure_reserve: f64,
    /// Discharge draws `P_d / (eta_d E)` instead of `eta_d P_d / E`.
    #[serde(default)]
    pub strict_energy_accounting: bool,
}

impl Default for SocLimits {
    fn default() -> Self {
        SocLimits {
            min: 0.05,
            max: 0.95,
            departure_reserve: 0.10,
            strict_energy_accounting: false,
        }
    }
}

impl SocLimits {
    pub fn contains(&self, soc: f64) -> bool {
        soc >= self.min - 1e-12 && soc <= self.max + 1e-12
    }

    /// SOC drop per kWh drawn from the battery at the plug, per kWh of capacity.
    pub fn discharge_coefficient(&self, eta_discharge: f64) -> f64 {
        if self.strict_energy_accounting {
            1.0 / eta_discharge
        } else {
            eta_discharge
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegradationParams {
    /// Battery replacement cost, $/kWh.
    pub battery_cost: f64,
    /// Labour cost per replacement, $.
    pub labor_cost: f64,
    /// Cycle life at the reference depth of discharge.
    pub cycle_life: f64,
    pub depth_of_discharge: f64,
}

impl Default for DegradationParams {
    fn default() -> Self {
        DegradationParams {
            battery_cost: 150.0,
            labor_cost: 300.0,
            cycle_life: 3000.0,
            depth_of_discharge: 0.8,
        }
    }
}

impl DegradationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.battery_cost > 0.0 && self.labor_cost > 0.0 && self.cycle_life > 0.0) {
            return Err(Error::config("degradation parameters must be positive"));
        }
        if !(self.depth_of_discharge > 0.0 && self.depth_of_discharge <= 1.0) {
            return Err(Error::Range {
                name: "depth_of_discharge",
                value: self.depth_of_discharge,
                min: 0.0,
                max: 1.0,
            });
        }
        Ok(())
    }

    /// Wear cost per kWh discharged for a battery of `capacity_kwh`.
    pub fn cost_per_kwh(&self, capacity_kwh: f64) -> f64 {
        (self.battery_cost * capacity_kwh + self.labor_cost)
            / (self.cycle_life * capacity_kwh * self.depth_of_discharge)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarbonParams {
    /// Emission price, $/kg.
    pub price_per_kg: f64,
    /// Displaced emissions per kWh of V2G discharge, kg/kWh.
    pub ev_factor: f64,
    /// Displaced emissions per kWh of station PV, kg/kWh.
    pub pv_factor: f64,
}

impl Default for CarbonParams {
    fn default() -> Self {
        CarbonParams {
            price_per_kg: 0.12,
            ev_factor: 0.9,
            pv_factor: 0.9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Action {
    #[default]
    Idle,
    Charge,
    Discharge,
}

/// One-hour SOC update. Bounds are not enforced here; see [`SocLimits::contains`].
#[allow(clippy::too_many_arguments)]
pub fn soc_step(
    soc_prev: f64,
    action: Action,
    p_charge_kw: f64,
    p_discharge_kw: f64,
    capacity_kwh: f64,
    eta_charge: f64,
    eta_discharge: f64,
    limits: &SocLimits,
) -> f64 {
    match action {
        Action::Idle => soc_prev,
        Action::Charge => soc_prev + eta_charge * p_charge_kw * DT_HOURS / capacity_kwh,
        Action::Discharge => {
            soc_prev - limits.discharge_coefficient(eta_discharge) * p_discharge_kw * DT_HOURS / capacity_kwh
        }
    }
}

/// `(kg, $)` credited for V2G discharge energy.
pub fn carbon_credit_ev(discharge_kw: &[f64], carbon: &CarbonParams) -> (f64, f64) {
    let kg = discharge_kw.iter().sum::<f64>() * DT_HOURS * carbon.ev_factor;
    (kg, kg * carbon.price_per_kg)
}

/// `(kg, $)` credited for station PV output, summed over every station-hour given.
pub fn carbon_credit_cs(pv_kw: &[f64], carbon: &CarbonParams) -> (f64, f64) {
    let kg = pv_kw.iter().sum::<f64>() * DT_HOURS * carbon.pv_factor;
    (kg, kg * carbon.price_per_kg)
}

/// Battery wear cost of discharging `total_discharge_kwh`.
pub fn degradation_cost(total_discharge_kwh: f64, params: &DegradationParams, capacity_kwh: f64) -> f64 {
    params.cost_per_kwh(capacity_kwh) * total_discharge_kwh
}

/// Hourly schedule of one agent over its plug-in window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentSchedule {
    pub agent: usize,
    pub station: usize,
    /// Hour of day of each slot, chronological.
    pub hours: Vec<usize>,
    pub actions: Vec<Action>,
    pub p_charge: Vec<f64>,
    pub p_discharge: Vec<f64>,
    /// SOC at plug-in followed by the SOC after every slot.
    pub soc: Vec<f64>,
}

impl AgentSchedule {
    pub fn idle(agent: usize, station: usize, hours: &[usize], soc0: f64) -> Self {
        let n = hours.len();
        AgentSchedule {
            agent,
            station,
            hours: hours.to_vec(),
            actions: vec![Action::Idle; n],
            p_charge: vec![0.0; n],
            p_discharge: vec![0.0; n],
            soc: vec![soc0; n + 1],
        }
    }

    pub fn departure_soc(&self) -> f64 {
        *self.soc.last().unwrap()
    }

    pub fn charged_kwh(&self) -> f64 {
        self.p_charge.iter().sum::<f64>() * DT_HOURS
    }

    pub fn discharged_kwh(&self) -> f64 {
        self.p_discharge.iter().sum::<f64>() * DT_HOURS
    }
}

/// Owner-side terms of one agent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct OwnerCost {
    pub energy: f64,
    pub carbon_kg: f64,
    pub carbon_revenue: f64,
    pub degradation: f64,
    pub total: f64,
}

/// Terms that enter the owner cost for a given scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OwnerTerms<'a> {
    pub eta_charge: f64,
    pub eta_discharge: f64,
    pub carbon: Option<&'a CarbonParams>,
    pub degradation: Option<&'a DegradationParams>,
}

/// Charging cost minus discharge revenue minus carbon credits plus wear.
pub fn bev_cost(
    sched: &AgentSchedule,
    prices: &[f64; HOURS],
    capacity_kwh: f64,
    terms: &OwnerTerms<'_>,
) -> OwnerCost {
    let mut energy = 0.0;
    for (k, &h) in sched.hours.iter().enumerate() {
        energy += prices[h] * sched.p_charge[k] * terms.eta_charge * DT_HOURS;
        energy -= prices[h] * sched.p_discharge[k] * terms.eta_discharge * DT_HOURS;
    }
    let (carbon_kg, carbon_revenue) = terms
        .carbon
        .map(|c| carbon_credit_ev(&sched.p_discharge, c))
        .unwrap_or((0.0, 0.0));
    let degradation = terms
        .degradation
        .map(|d| degradation_cost(sched.discharged_kwh(), d, capacity_kwh))
        .unwrap_or(0.0);
    OwnerCost {
        energy,
        carbon_kg,
        carbon_revenue,
        degradation,
        total: energy - carbon_revenue + degradation,
    }
}

/// Hourly power balance of one station. Grid exchange is the residual.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StationHour {
    pub charge_kw: f64,
    pub discharge_kw: f64,
    pub pv_kw: f64,
    pub grid_kw: f64,
}

impl StationHour {
    pub fn settle(charge_kw: f64, discharge_kw: f64, pv_kw: f64) -> Self {
        StationHour {
            charge_kw,
            discharge_kw,
            pv_kw,
            grid_kw: charge_kw - discharge_kw - pv_kw,
        }
    }

    pub fn residual_kw(&self) -> f64 {
        self.charge_kw - (self.grid_kw + self.discharge_kw + self.pv_kw)
    }
}

/// Station benefit: energy sold minus V2G energy bought back, plus the PV
/// carbon credit when given. Fails if any station-hour is out of balance.
pub fn evcs_benefit(
    flows: &[[StationHour; HOURS]],
    prices: &[[f64; HOURS]],
    carbon_cs: Option<&CarbonParams>,
) -> Result<f64> {
    let mut f1 = 0.0;
    let mut pv = Vec::with_capacity(flows.len() * HOURS);
    for (s, station) in flows.iter().enumerate() {
        for (h, fl) in station.iter().enumerate() {
            let r = fl.residual_kw();
            if r.abs() > BALANCE_TOLERANCE_KW {
                return Err(Error::Accounting { station: s, hour: h, residual_kw: r });
            }
            f1 += (fl.charge_kw - fl.discharge_kw) * prices[s][h] * DT_HOURS;
            pv.push(fl.pv_kw);
        }
    }
    if let Some(c) = carbon_cs {
        f1 += carbon_credit_cs(&pv, c).1;
    }
    Ok(f1)
}
