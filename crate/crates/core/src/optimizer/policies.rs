use crate::evaluation::{AgentSlot, Instance};
use crate::valuation::{Action, AgentSchedule};
use crate::{DT_HOURS, HOURS};

/// Recompute the SOC trajectory of `s` from its powers.
fn resimulate(inst: &Instance, slot: &AgentSlot, s: &mut AgentSchedule) {
    let d_coef = inst.soc.discharge_coefficient(inst.eta_discharge);
    for k in 0..s.hours.len() {
        let (pc, pd) = (s.p_charge[k], s.p_discharge[k]);
        s.actions[k] = if pc > 0.0 {
            Action::Charge
        } else if pd > 0.0 {
            Action::Discharge
        } else {
            Action::Idle
        };
        s.soc[k + 1] = s.soc[k] + (inst.eta_charge * pc - d_coef * pd) * DT_HOURS / slot.capacity_kwh;
    }
}

fn soc_feasible(inst: &Instance, slot: &AgentSlot, s: &AgentSchedule) -> bool {
    s.soc.iter().all(|&x| inst.soc.contains(x)) && s.departure_soc() >= slot.target_soc - 1e-12
}

/// Grid-side energy needed to lift the SOC from plug-in to the target.
fn charge_needed_kwh(inst: &Instance, slot: &AgentSlot) -> f64 {
    ((slot.target_soc - slot.soc_initial) * slot.capacity_kwh / inst.eta_charge).max(0.0)
}

/// Charge at full power from plug-in until the departure target is met.
pub fn uncoordinated(inst: &Instance, slot: &AgentSlot) -> AgentSchedule {
    let mut s = AgentSchedule::idle(slot.agent, slot.station, &slot.hours, slot.soc_initial);
    let mut need = charge_needed_kwh(inst, slot);
    for k in 0..slot.hours.len() {
        if need <= 1e-12 {
            break;
        }
        let p = need.min(slot.charge_limit_kw[k]);
        s.p_charge[k] = p;
        need -= p * DT_HOURS;
    }
    resimulate(inst, slot, &mut s);
    s
}

/// Owner-side value of discharging 1 kW for one hour at `price`.
fn discharge_value(inst: &Instance, slot: &AgentSlot, price: f64) -> f64 {
    let carbon = inst.carbon.map(|c| c.ev_factor * c.price_per_kg).unwrap_or(0.0);
    let wear = inst.degradation.map(|d| d.cost_per_kwh(slot.capacity_kwh)).unwrap_or(0.0);
    price * inst.eta_discharge + carbon - wear
}

/// Cost-minimising schedule for one owner.
///
/// Charging fills the cheapest plug-in hours (earliest first among equal
/// prices) until the departure target is met. With V2G enabled, discharge
/// and recharge increments are then added greedily while each increment
/// lowers the owner cost and keeps the SOC trajectory feasible.
pub fn inner_dispatch(inst: &Instance, slot: &AgentSlot, prices: &[f64; HOURS]) -> AgentSchedule {
    let n = slot.hours.len();
    let mut s = AgentSchedule::idle(slot.agent, slot.station, &slot.hours, slot.soc_initial);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| prices[slot.hours[a]].total_cmp(&prices[slot.hours[b]]).then(a.cmp(&b)));
    let mut need = charge_needed_kwh(inst, slot);
    for &k in &order {
        if need <= 1e-12 {
            break;
        }
        let p = need.min(slot.charge_limit_kw[k]);
        s.p_charge[k] = p;
        need -= p * DT_HOURS;
    }
    if need > 1e-12 {
        s.p_charge.clone_from(&slot.charge_limit_kw);
    }
    resimulate(inst, slot, &mut s);
    if !inst.v2g {
        return s;
    }

    let d_coef = inst.soc.discharge_coefficient(inst.eta_discharge);
    let quantum = slot.max_power_kw / 4.0;
    // recharge kW per kW discharged to restore the same SOC
    let restore = d_coef / inst.eta_charge;
    for _ in 0..(16 * n) {
        let mut best: Option<(f64, usize, Option<usize>, f64)> = None;
        for d in 0..n {
            if s.p_charge[d] > 0.0 || s.p_discharge[d] >= slot.max_power_kw || !inst.discharge_accepted(slot, d) {
                continue;
            }
            let pd = quantum.min(slot.max_power_kw - s.p_discharge[d]);
            let gain = discharge_value(inst, slot, prices[slot.hours[d]]) * pd;
            let mut options: Vec<(Option<usize>, f64)> = vec![(None, gain)];
            for c in 0..n {
                if c == d || s.p_discharge[c] > 0.0 {
                    continue;
                }
                let pc = pd * restore;
                if s.p_charge[c] + pc > slot.charge_limit_kw[c] + 1e-12 {
                    continue;
                }
                options.push((Some(c), gain - prices[slot.hours[c]] * inst.eta_charge * pc));
            }
            for (c, profit) in options {
                if profit <= 1e-12 || best.as_ref().is_some_and(|b| profit <= b.0 + 1e-12) {
                    continue;
                }
                let mut trial = s.clone();
                trial.p_discharge[d] += pd;
                if let Some(c) = c {
                    trial.p_charge[c] += pd * restore;
                }
                resimulate(inst, slot, &mut trial);
                if soc_feasible(inst, slot, &trial) {
                    best = Some((profit, d, c, pd));
                }
            }
        }
        let Some((_, d, c, pd)) = best else { break };
        s.p_discharge[d] += pd;
        if let Some(c) = c {
            s.p_charge[c] += pd * restore;
        }
        resimulate(inst, slot, &mut s);
    }
    s
}

/// Fleet-level valley filling and peak shaving against the feeder load.
///
/// Agents are processed in order. Each one's charging energy is poured into
/// its plug-in hours up to a common water level over the running load
/// profile (base load minus PV plus the agents already placed). With V2G,
/// discharge is then moved into the highest-load hours and recharged in the
/// lowest while this narrows the gap between them and keeps the SOC feasible.
pub fn water_filling(inst: &Instance) -> Vec<AgentSchedule> {
    let mut load: [f64; HOURS] = std::array::from_fn(|h| {
        inst.base_load[h].iter().map(|s| s.re).sum::<f64>() - inst.stations.iter().map(|s| s.pv_kw[h]).sum::<f64>()
    });
    let mut out = Vec::with_capacity(inst.agents.len());
    for slot in &inst.agents {
        let n = slot.hours.len();
        let mut s = AgentSchedule::idle(slot.agent, slot.station, &slot.hours, slot.soc_initial);
        let need = charge_needed_kwh(inst, slot);
        if need > 1e-12 {
            let fill = |w: f64| -> f64 {
                slot.hours
                    .iter()
                    .zip(&slot.charge_limit_kw)
                    .map(|(&h, &cap)| (w - load[h]).clamp(0.0, cap))
                    .sum::<f64>()
            };
            let mut lo = slot.hours.iter().map(|&h| load[h]).fold(f64::INFINITY, f64::min);
            let mut hi = lo + need + slot.max_power_kw + slot.hours.iter().map(|&h| load[h] - lo).fold(0.0, f64::max);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if fill(mid) * DT_HOURS < need {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            for (k, &h) in slot.hours.iter().enumerate() {
                s.p_charge[k] = (hi - load[h]).clamp(0.0, slot.charge_limit_kw[k]);
            }
            // Trim the bisection overshoot from the highest-level slot.
            let excess = s.charged_kwh() - need;
            if excess > 0.0 {
                let k = (0..n).max_by(|&a, &b| s.p_charge[a].total_cmp(&s.p_charge[b]).then(b.cmp(&a))).unwrap();
                s.p_charge[k] = (s.p_charge[k] - excess / DT_HOURS).max(0.0);
            }
        }
        resimulate(inst, slot, &mut s);

        if inst.v2g && n > 1 {
            let d_coef = inst.soc.discharge_coefficient(inst.eta_discharge);
            let restore = d_coef / inst.eta_charge;
            let quantum = slot.max_power_kw / 8.0;
            let net = |s: &AgentSchedule, k: usize| s.p_charge[k] - s.p_discharge[k];
            for _ in 0..(16 * n) {
                let level = |s: &AgentSchedule, k: usize| load[slot.hours[k]] + net(s, k);
                let hi_k = (0..n)
                    .filter(|&k| s.p_charge[k] == 0.0 && s.p_discharge[k] < slot.max_power_kw)
                    .max_by(|&a, &b| level(&s, a).total_cmp(&level(&s, b)).then(b.cmp(&a)));
                let lo_k = (0..n)
                    .filter(|&k| s.p_discharge[k] == 0.0 && s.p_charge[k] < slot.charge_limit_kw[k])
                    .min_by(|&a, &b| level(&s, a).total_cmp(&level(&s, b)).then(a.cmp(&b)));
                let (Some(d), Some(c)) = (hi_k, lo_k) else { break };
                if d == c {
                    break;
                }
                let pd = quantum
                    .min(slot.max_power_kw - s.p_discharge[d])
                    .min((slot.charge_limit_kw[c] - s.p_charge[c]) / restore);
                if pd <= 1e-12 || level(&s, d) - pd <= level(&s, c) + pd * restore {
                    break;
                }
                let mut trial = s.clone();
                trial.p_discharge[d] += pd;
                trial.p_charge[c] += pd * restore;
                resimulate(inst, slot, &mut trial);
                if !soc_feasible(inst, slot, &trial) {
                    break;
                }
                s = trial;
            }
        }
        for (k, &h) in slot.hours.iter().enumerate() {
            load[h] += s.p_charge[k] - s.p_discharge[k];
        }
        out.push(s);
    }
    out
}
