use rand::Rng;

use crate::evaluation::{AgentSlot, Instance};
use crate::valuation::{Action, AgentSchedule};
use crate::DT_HOURS;

/// Decision for one plug-in hour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gene {
    pub action: Action,
    /// Fraction of the agent's max power.
    pub fraction: f64,
}

impl Gene {
    pub const IDLE: Gene = Gene { action: Action::Idle, fraction: 0.0 };
}

/// Per-agent gene vectors, one gene per plug-in hour.
pub type Chromosome = Vec<Vec<Gene>>;

/// Snap a fraction to the nearest of `1/k, 2/k, ..., 1` when `levels = Some(k)`.
pub fn snap_fraction(fraction: f64, levels: Option<u32>) -> f64 {
    match levels {
        Some(k) if k > 0 => {
            let k = k as f64;
            ((fraction * k).round().clamp(1.0, k)) / k
        }
        _ => fraction.clamp(0.0, 1.0),
    }
}

pub fn random_gene<R: Rng + ?Sized>(rng: &mut R, v2g: bool, levels: Option<u32>) -> Gene {
    let action = match rng.random_range(0..if v2g { 3 } else { 2 }) {
        0 => Action::Idle,
        1 => Action::Charge,
        _ => Action::Discharge,
    };
    if action == Action::Idle {
        return Gene::IDLE;
    }
    let fraction = match levels {
        Some(k) if k > 0 => rng.random_range(1..=k) as f64 / k as f64,
        _ => rng.random::<f64>(),
    };
    Gene { action, fraction }
}

/// Genes reproducing an existing schedule.
pub fn encode(slot: &AgentSlot, sched: &AgentSchedule) -> Vec<Gene> {
    sched
        .actions
        .iter()
        .enumerate()
        .map(|(k, &action)| {
            let p = sched.p_charge[k].max(sched.p_discharge[k]);
            match action {
                Action::Idle => Gene::IDLE,
                _ => Gene { action, fraction: (p / slot.max_power_kw).clamp(0.0, 1.0) },
            }
        })
        .collect()
}

/// Decode genes into a feasible schedule. The genes themselves are left as they are.
///
/// Slots are walked chronologically. Charging is capped by the slot's ceiling
/// and the SOC ceiling. Discharging is dropped where the owner would lose by
/// it and otherwise capped so the SOC stays above the floor needed to still
/// reach the departure target charging at the remaining ceilings; any slot
/// whose SOC would end below that floor gets the minimum charge restoring it.
pub fn repair(inst: &Instance, slot: &AgentSlot, genes: &[Gene]) -> AgentSchedule {
    let n = slot.hours.len();
    let e = slot.capacity_kwh;
    let pmax = slot.max_power_kw;
    let eta_c = inst.eta_charge;
    let d_coef = inst.soc.discharge_coefficient(inst.eta_discharge);
    // SOC that charging at the ceilings can still add after slot k
    let mut headroom = vec![0.0; n + 1];
    for k in (0..n).rev() {
        headroom[k] = headroom[k + 1] + eta_c * slot.charge_limit_kw[k] * DT_HOURS / e;
    }

    let mut s = AgentSchedule::idle(slot.agent, slot.station, &slot.hours, slot.soc_initial);
    let mut soc = slot.soc_initial;
    for k in 0..n {
        let floor = inst.soc.min.max(slot.target_soc - headroom[k + 1]);
        let limit = slot.charge_limit_kw[k];
        let mut g = genes[k];
        g.fraction = g.fraction.clamp(0.0, 1.0);
        if g.action == Action::Discharge && !(inst.v2g && inst.discharge_accepted(slot, k)) {
            g = Gene::IDLE;
        }
        let (mut pc, mut pd) = (0.0, 0.0);
        match g.action {
            Action::Idle => {}
            Action::Charge => {
                let cap = ((inst.soc.max - soc) * e / (eta_c * DT_HOURS)).max(0.0);
                pc = (g.fraction * pmax).min(limit).min(cap);
            }
            Action::Discharge => {
                let cap = ((soc - floor) * e / (d_coef * DT_HOURS)).max(0.0);
                pd = (g.fraction * pmax).min(cap);
            }
        }
        let mut next = soc + (eta_c * pc - d_coef * pd) * DT_HOURS / e;
        if next < floor {
            pd = 0.0;
            let need = ((floor - soc) * e / (eta_c * DT_HOURS)).clamp(0.0, limit);
            pc = pc.max(need);
            next = soc + eta_c * pc * DT_HOURS / e;
        }
        let action = if pc > 0.0 {
            Action::Charge
        } else if pd > 0.0 {
            Action::Discharge
        } else {
            Action::Idle
        };
        s.actions[k] = action;
        s.p_charge[k] = pc;
        s.p_discharge[k] = pd;
        s.soc[k + 1] = next;
        soc = next;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::tests::toy_instance;
    use crate::rng::{stream, Domain};

    #[test]
    fn snapping() {
        assert_eq!(snap_fraction(0.3, Some(2)), 0.5);
        assert_eq!(snap_fraction(0.1, Some(2)), 0.5);
        assert_eq!(snap_fraction(0.8, Some(2)), 1.0);
        assert_eq!(snap_fraction(1.3, None), 1.0);
    }

    #[test]
    fn repaired_schedules_pass_the_audit() {
        let inst = toy_instance(3, true);
        let mut rng = stream(4, Domain::Optimizer, 0);
        for _ in 0..500 {
            for slot in &inst.agents {
                let genes: Vec<Gene> = (0..slot.hours.len()).map(|_| random_gene(&mut rng, true, None)).collect();
                let s = repair(&inst, slot, &genes);
                let mut v = Vec::new();
                inst.audit_agent(slot, &s, &mut v);
                assert!(v.is_empty(), "{v:?}");
                let again = encode(slot, &s);
                let r = repair(&inst, slot, &again);
                assert_eq!(r.actions, s.actions);
                for (a, b) in r.soc.iter().zip(&s.soc) {
                    assert!((a - b).abs() < 1e-12);
                }
                for (a, b) in r.p_charge.iter().zip(&s.p_charge).chain(r.p_discharge.iter().zip(&s.p_discharge)) {
                    assert!((a - b).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn all_idle_genes_charge_just_in_time() {
        let inst = toy_instance(1, false);
        let slot = &inst.agents[0];
        let genes = vec![Gene::IDLE; slot.hours.len()];
        let s = repair(&inst, slot, &genes);
        assert!((s.departure_soc() - slot.target_soc).abs() < 1e-12);
        assert_eq!(s.actions[0], Action::Idle);
        assert_eq!(*s.actions.last().unwrap(), Action::Charge);
    }
}
