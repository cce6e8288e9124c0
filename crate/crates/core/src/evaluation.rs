//! Scheduling instance and full evaluation of a candidate schedule:
//! constraint audit, hourly dispatch and load flow, and objective values.

use num_complex::Complex64;
use serde::Serialize;

use crate::grid::{
    balance_residual_kw, net_injection, sweep_load_flow, DgUnit, Feeder, FlowSnapshot, HourInputs,
    SweepOptions,
};
use crate::market::{economic_dispatch, Dispatch, GridImport};
use crate::valuation::{
    bev_cost, evcs_benefit, soc_step, Action, AgentSchedule, CarbonParams, DegradationParams,
    OwnerCost, OwnerTerms, SocLimits, StationHour, BALANCE_TOLERANCE_KW,
};
use crate::{Result, HOURS};

/// Participating BEV as seen by the scheduler.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentSlot {
    pub agent: usize,
    pub station: usize,
    pub hours: Vec<usize>,
    pub capacity_kwh: f64,
    pub max_power_kw: f64,
    pub soc_initial: f64,
    pub target_soc: f64,
    /// Charging ceiling per plug-in slot, kW, never above `max_power_kw`.
    pub charge_limit_kw: Vec<f64>,
}

impl AgentSlot {
    /// Slot whose charging ceiling is `max_power_kw` in every hour.
    pub fn new(
        agent: usize,
        station: usize,
        hours: Vec<usize>,
        capacity_kwh: f64,
        max_power_kw: f64,
        soc_initial: f64,
        target_soc: f64,
    ) -> Self {
        let charge_limit_kw = vec![max_power_kw; hours.len()];
        AgentSlot { agent, station, hours, capacity_kwh, max_power_kw, soc_initial, target_soc, charge_limit_kw }
    }

    /// SOC reached by charging at every slot's ceiling, capped at `soc_max`.
    pub fn reachable_soc(&self, eta_charge: f64, soc_max: f64) -> f64 {
        let kwh: f64 = self.charge_limit_kw.iter().sum::<f64>() * crate::DT_HOURS;
        (self.soc_initial + eta_charge * kwh / self.capacity_kwh).min(soc_max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationSite {
    pub bus: usize,
    pub plugs: u32,
    /// PV output, kW (zeros when renewables are off).
    pub pv_kw: [f64; HOURS],
}

/// Everything needed to evaluate schedules for one scenario.
#[derive(Debug, Clone)]
pub struct Instance {
    pub feeder: Feeder,
    pub agents: Vec<AgentSlot>,
    pub stations: Vec<StationSite>,
    /// Prevailing tariff paid for charging and for V2G buyback.
    pub prices: [f64; HOURS],
    /// Upstream import price per hour.
    pub grid_price: [f64; HOURS],
    pub grid_capacity_kw: f64,
    pub dg_units: Vec<DgUnit>,
    /// Base consumption per hour and bus index.
    pub base_load: Vec<Vec<Complex64>>,
    pub soc: SocLimits,
    pub eta_charge: f64,
    pub eta_discharge: f64,
    pub v2g: bool,
    /// Present when battery degradation is priced.
    pub degradation: Option<DegradationParams>,
    /// Present when emission reductions are credited.
    pub carbon: Option<CarbonParams>,
    pub loss_price: f64,
    pub sweep: SweepOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Violation {
    Exclusion { agent: usize, slot: usize },
    PowerLimit { agent: usize, slot: usize, excess_kw: f64 },
    DischargeWithoutV2g { agent: usize, slot: usize },
    SocBound { agent: usize, slot: usize, soc: f64 },
    SocDrift { agent: usize, slot: usize, error: f64 },
    Readiness { agent: usize, shortfall: f64 },
    Plugs { station: usize, hour: usize, excess: u32 },
    Balance { hour: usize, residual_kw: f64 },
}

impl Violation {
    /// Positive size used to rank infeasible candidates.
    pub fn magnitude(&self) -> f64 {
        match *self {
            Violation::Exclusion { .. } | Violation::DischargeWithoutV2g { .. } => 1.0,
            Violation::PowerLimit { excess_kw, .. } => excess_kw,
            Violation::SocBound { soc, .. } => (soc - soc.clamp(0.0, 1.0)).abs().max(1e-9),
            Violation::SocDrift { error, .. } => error.abs(),
            Violation::Readiness { shortfall, .. } => shortfall,
            Violation::Plugs { excess, .. } => excess as f64,
            Violation::Balance { residual_kw, .. } => residual_kw.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Objectives {
    /// Station benefit, $ (maximised).
    pub f1: f64,
    /// Loss cost, $ (minimised).
    pub f2: f64,
    /// Aggregate owner cost, $.
    pub bev_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HourResult {
    pub base_kw: f64,
    pub charge_kw: f64,
    pub discharge_kw: f64,
    pub pv_kw: f64,
    pub dg_kw: f64,
    pub grid_kw: f64,
    pub loss_kw: f64,
    pub min_voltage: f64,
    pub residual_kw: f64,
    pub generation_cost: f64,
}

impl HourResult {
    /// Demand on the feeder: base plus net BEV load. PV counts as supply, like DG.
    pub fn total_load_kw(&self) -> f64 {
        self.base_kw + self.charge_kw - self.discharge_kw
    }
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub objectives: Objectives,
    pub violations: Vec<Violation>,
    pub hours: Vec<HourResult>,
    pub snapshots: Vec<FlowSnapshot>,
    pub owner: Vec<OwnerCost>,
    pub station_flows: Vec<[StationHour; HOURS]>,
}

impl Evaluation {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violation_sum(&self) -> f64 {
        self.violations.iter().map(Violation::magnitude).sum()
    }

    pub fn total_load(&self) -> [f64; HOURS] {
        std::array::from_fn(|h| self.hours[h].total_load_kw())
    }

    pub fn base_load(&self) -> [f64; HOURS] {
        std::array::from_fn(|h| self.hours[h].base_kw)
    }
}

/// Dispatch and load flow of one hour.
#[derive(Debug, Clone)]
pub struct HourFlow {
    pub flow: FlowSnapshot,
    pub dispatch: Dispatch,
    pub result: HourResult,
}

impl Instance {
    /// Solve hour `hour` given per-station BEV charging and discharging, kW.
    pub fn solve_hour(&self, hour: usize, charge_kw: &[f64], discharge_kw: &[f64]) -> Result<HourFlow> {
        let base_kw: f64 = self.base_load[hour].iter().map(|s| s.re).sum();
        let ch: f64 = charge_kw.iter().sum();
        let dis: f64 = discharge_kw.iter().sum();
        let pv: f64 = self.stations.iter().map(|s| s.pv_kw[hour]).sum();
        let demand = (base_kw + ch - dis - pv).max(0.0);
        let grid = GridImport { price: self.grid_price[hour], capacity_kw: self.grid_capacity_kw };
        let dispatch = economic_dispatch(demand, &self.dg_units, &grid)?;

        let stations: Vec<(usize, f64, f64)> = self
            .stations
            .iter()
            .enumerate()
            .map(|(s, st)| (st.bus, charge_kw[s], discharge_kw[s]))
            .collect();
        let dg: Vec<(usize, f64)> = self.dg_units.iter().zip(&dispatch.dg_kw).map(|(u, p)| (u.bus, *p)).collect();
        let pv_units: Vec<(usize, f64)> = self.stations.iter().map(|s| (s.bus, s.pv_kw[hour])).collect();
        let inputs = HourInputs {
            base_load: &self.base_load[hour],
            stations: &stations,
            dg: &dg,
            pv: &pv_units,
        };
        let injection = net_injection(&self.feeder, &inputs)?;
        let flow = sweep_load_flow(&self.feeder, &injection, self.sweep)?;
        let totals = inputs.totals();
        let result = HourResult {
            base_kw,
            charge_kw: ch,
            discharge_kw: dis,
            pv_kw: pv,
            dg_kw: totals.dg_kw,
            grid_kw: flow.slack_kw,
            loss_kw: flow.loss_kw,
            min_voltage: flow.min_voltage(),
            residual_kw: balance_residual_kw(&flow, &totals),
            generation_cost: dispatch.cost,
        };
        Ok(HourFlow { flow, dispatch, result })
    }

    /// Losses of one hour for the given per-station charging/discharging.
    pub fn hour_loss_kw(&self, hour: usize, charge_kw: &[f64], discharge_kw: &[f64]) -> Result<f64> {
        Ok(self.solve_hour(hour, charge_kw, discharge_kw)?.flow.loss_kw)
    }

    /// Whether the owner gains from discharging in slot `k`: the hour's
    /// revenue plus carbon credit minus wear, per kWh, must cover buying the
    /// energy back at the cheapest price of the window.
    pub fn discharge_accepted(&self, slot: &AgentSlot, k: usize) -> bool {
        let cheapest = slot.hours.iter().map(|&h| self.prices[h]).fold(f64::INFINITY, f64::min);
        let d_coef = self.soc.discharge_coefficient(self.eta_discharge);
        let carbon = self.carbon.map_or(0.0, |c| c.ev_factor * c.price_per_kg);
        let wear = self.degradation.map_or(0.0, |d| d.cost_per_kwh(slot.capacity_kwh));
        let value = self.prices[slot.hours[k]] * self.eta_discharge + carbon - wear;
        value >= cheapest * d_coef - 1e-12
    }

    fn owner_terms(&self) -> OwnerTerms<'_> {
        OwnerTerms {
            eta_charge: self.eta_charge,
            eta_discharge: self.eta_discharge,
            carbon: self.carbon.as_ref(),
            degradation: self.degradation.as_ref(),
        }
    }

    /// Constraint audit of one agent's schedule.
    pub fn audit_agent(&self, slot: &AgentSlot, s: &AgentSchedule, out: &mut Vec<Violation>) {
        let a = slot.agent;
        let n = slot.hours.len();
        if s.hours != slot.hours || s.actions.len() != n || s.soc.len() != n + 1 || slot.charge_limit_kw.len() != n {
            out.push(Violation::Exclusion { agent: a, slot: 0 });
            return;
        }
        if (s.soc[0] - slot.soc_initial).abs() > 1e-12 {
            out.push(Violation::SocDrift { agent: a, slot: 0, error: s.soc[0] - slot.soc_initial });
        }
        for k in 0..n {
            let (pc, pd) = (s.p_charge[k], s.p_discharge[k]);
            let exclusive = match s.actions[k] {
                Action::Idle => pc == 0.0 && pd == 0.0,
                Action::Charge => pd == 0.0 && pc >= 0.0,
                Action::Discharge => pc == 0.0 && pd >= 0.0,
            };
            if !exclusive {
                out.push(Violation::Exclusion { agent: a, slot: k });
            }
            if s.actions[k] == Action::Discharge && !self.v2g {
                out.push(Violation::DischargeWithoutV2g { agent: a, slot: k });
            }
            let excess = (pc - slot.charge_limit_kw[k]).max(pd - slot.max_power_kw);
            if excess > 1e-9 {
                out.push(Violation::PowerLimit { agent: a, slot: k, excess_kw: excess });
            }
            let next = soc_step(
                s.soc[k],
                s.actions[k],
                pc,
                pd,
                slot.capacity_kwh,
                self.eta_charge,
                self.eta_discharge,
                &self.soc,
            );
            if (next - s.soc[k + 1]).abs() > 1e-12 {
                out.push(Violation::SocDrift { agent: a, slot: k, error: next - s.soc[k + 1] });
            }
            if !self.soc.contains(s.soc[k + 1]) {
                out.push(Violation::SocBound { agent: a, slot: k + 1, soc: s.soc[k + 1] });
            }
        }
        let shortfall = slot.target_soc - s.departure_soc();
        if shortfall > 1e-9 {
            out.push(Violation::Readiness { agent: a, shortfall });
        }
    }

    /// Per-station charging and discharging per hour, kW.
    pub fn station_profiles(&self, schedules: &[AgentSchedule]) -> (Vec<[f64; HOURS]>, Vec<[f64; HOURS]>) {
        let mut ch = vec![[0.0; HOURS]; self.stations.len()];
        let mut dis = vec![[0.0; HOURS]; self.stations.len()];
        for (slot, s) in self.agents.iter().zip(schedules) {
            for (k, &h) in s.hours.iter().enumerate() {
                ch[slot.station][h] += s.p_charge[k];
                dis[slot.station][h] += s.p_discharge[k];
            }
        }
        (ch, dis)
    }

    pub fn evaluate(&self, schedules: &[AgentSchedule]) -> Result<Evaluation> {
        let mut violations = Vec::new();
        if schedules.len() != self.agents.len() {
            return Err(crate::Error::config(format!(
                "{} schedules for {} agents",
                schedules.len(),
                self.agents.len()
            )));
        }
        for (slot, s) in self.agents.iter().zip(schedules) {
            self.audit_agent(slot, s, &mut violations);
        }
        let mut occupancy = vec![[0u32; HOURS]; self.stations.len()];
        for slot in &self.agents {
            for &h in &slot.hours {
                occupancy[slot.station][h] += 1;
            }
        }
        for (s, occ) in occupancy.iter().enumerate() {
            for (h, &o) in occ.iter().enumerate() {
                if o > self.stations[s].plugs {
                    violations.push(Violation::Plugs { station: s, hour: h, excess: o - self.stations[s].plugs });
                }
            }
        }

        let (ch, dis) = self.station_profiles(schedules);
        let mut hours = Vec::with_capacity(HOURS);
        let mut snapshots = Vec::with_capacity(HOURS);
        for h in 0..HOURS {
            let c: Vec<f64> = ch.iter().map(|s| s[h]).collect();
            let d: Vec<f64> = dis.iter().map(|s| s[h]).collect();
            let hf = self.solve_hour(h, &c, &d)?;
            if hf.result.residual_kw.abs() >= BALANCE_TOLERANCE_KW {
                violations.push(Violation::Balance { hour: h, residual_kw: hf.result.residual_kw });
            }
            hours.push(hf.result);
            snapshots.push(hf.flow);
        }

        let station_flows: Vec<[StationHour; HOURS]> = self
            .stations
            .iter()
            .enumerate()
            .map(|(s, st)| std::array::from_fn(|h| StationHour::settle(ch[s][h], dis[s][h], st.pv_kw[h])))
            .collect();
        let prices = vec![self.prices; self.stations.len()];
        let f1 = evcs_benefit(&station_flows, &prices, self.carbon.as_ref())?;
        let f2 = self.loss_price * hours.iter().map(|r| r.loss_kw).sum::<f64>() * crate::DT_HOURS;

        let terms = self.owner_terms();
        let owner: Vec<OwnerCost> = self
            .agents
            .iter()
            .zip(schedules)
            .map(|(slot, s)| bev_cost(s, &self.prices, slot.capacity_kwh, &terms))
            .collect();
        let bev_total = owner.iter().map(|o| o.total).sum();

        Ok(Evaluation {
            objectives: Objectives { f1, f2, bev_cost: bev_total },
            violations,
            hours,
            snapshots,
            owner,
            station_flows,
        })
    }
}
