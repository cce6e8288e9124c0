use num_complex::Complex64;

use super::Feeder;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Stop once the largest voltage update falls below this, p.u.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 100,
        }
    }
}

/// Converged operating point of one hour.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSnapshot {
    /// Complex bus voltages, p.u., by bus index.
    pub voltages: Vec<Complex64>,
    /// Sending-end complex power of the branch feeding each bus, kVA. Zero at the slack.
    pub branch_flow_kva: Vec<Complex64>,
    pub loss_kw: f64,
    pub loss_kvar: f64,
    /// Power delivered by the upstream grid at the slack bus.
    pub slack_kw: f64,
    pub slack_kvar: f64,
    pub iterations: usize,
}

impl FlowSnapshot {
    pub fn min_voltage(&self) -> f64 {
        self.voltages.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min)
    }
}

/// Backward/forward sweep load flow.
///
/// `injection_kva` is the net complex injection per bus index (generation
/// positive). Loads are constant power. Each iteration aggregates branch
/// currents from the leaves towards the slack, then updates voltages from the
/// slack outwards.
pub fn sweep_load_flow(
    feeder: &Feeder,
    injection_kva: &[Complex64],
    opts: SweepOptions,
) -> Result<FlowSnapshot> {
    let n = feeder.len();
    if injection_kva.len() != n {
        return Err(Error::config(format!(
            "injection vector covers {} buses, feeder has {n}",
            injection_kva.len()
        )));
    }
    let base = feeder.base_kva();
    let slack = feeder.slack_index();
    let v0 = Complex64::new(feeder.slack_voltage(), 0.0);
    let load_pu: Vec<Complex64> = injection_kva.iter().map(|s| -s / base).collect();
    let order = feeder.order();

    let mut v = vec![v0; n];
    let mut current = vec![Complex64::new(0.0, 0.0); n];
    let mut iterations = 0;
    let mut residual = f64::INFINITY;

    while iterations < opts.max_iterations {
        iterations += 1;
        for (i, c) in current.iter_mut().enumerate() {
            *c = if i == slack {
                Complex64::new(0.0, 0.0)
            } else {
                (load_pu[i] / v[i]).conj()
            };
        }
        for &i in order.iter().rev() {
            if let Some(p) = feeder.parent(i) {
                let ci = current[i];
                current[p] += ci;
            }
        }
        residual = 0.0;
        for &i in order {
            if let Some(p) = feeder.parent(i) {
                let updated = v[p] - feeder.branch_impedance_pu(i) * current[i];
                residual = f64::max(residual, (updated - v[i]).norm());
                v[i] = updated;
            }
        }
        if !residual.is_finite() {
            break;
        }
        if residual < opts.tolerance {
            let mut loss = Complex64::new(0.0, 0.0);
            let mut flows = vec![Complex64::new(0.0, 0.0); n];
            let mut out = Complex64::new(0.0, 0.0);
            for i in 0..n {
                if let Some(p) = feeder.parent(i) {
                    loss += feeder.branch_impedance_pu(i) * current[i].norm_sqr();
                    flows[i] = v[p] * current[i].conj() * base;
                    if p == slack {
                        out += current[i];
                    }
                }
            }
            let grid = v0 * out.conj() * base - injection_kva[slack];
            return Ok(FlowSnapshot {
                voltages: v,
                branch_flow_kva: flows,
                loss_kw: loss.re * base,
                loss_kvar: loss.im * base,
                slack_kw: grid.re,
                slack_kvar: grid.im,
                iterations,
            });
        }
    }
    Err(Error::Divergence {
        iterations,
        residual,
    })
}
