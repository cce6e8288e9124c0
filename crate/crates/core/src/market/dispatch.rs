use crate::grid::DgUnit;
use crate::{Error, Result};

/// Upstream grid modelled as a linear-cost source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridImport {
    pub price: f64,
    pub capacity_kw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dispatch {
    pub dg_kw: Vec<f64>,
    pub grid_kw: f64,
    /// System incremental cost, $/kWh.
    pub lambda: f64,
    pub cost: f64,
}

struct Unit {
    p_min: f64,
    p_max: f64,
    b: f64,
    c: f64,
}

impl Unit {
    fn output(&self, lambda: f64) -> f64 {
        if self.c > 0.0 {
            ((lambda - self.b) / (2.0 * self.c)).clamp(self.p_min, self.p_max)
        } else if lambda > self.b {
            self.p_max
        } else {
            self.p_min
        }
    }
}

/// Equal-incremental-cost dispatch of the DG units plus grid import by
/// bisection on the system lambda. Linear-cost units at the marginal price
/// share the residual in listing order, DGs first.
pub fn economic_dispatch(demand_kw: f64, dg_units: &[DgUnit], grid: &GridImport) -> Result<Dispatch> {
    let mut units: Vec<Unit> = dg_units
        .iter()
        .map(|u| Unit { p_min: u.p_min_kw, p_max: u.p_max_kw, b: u.b, c: u.c })
        .collect();
    units.push(Unit { p_min: 0.0, p_max: grid.capacity_kw, b: grid.price, c: 0.0 });

    if units.iter().any(|u| u.c < 0.0 || u.p_min > u.p_max) {
        return Err(Error::config("dispatch units need c >= 0 and p_min <= p_max"));
    }
    let p_min: f64 = units.iter().map(|u| u.p_min).sum();
    let p_max: f64 = units.iter().map(|u| u.p_max).sum();
    if !(demand_kw >= 0.0) || demand_kw > p_max + 1e-9 || demand_kw < p_min - 1e-9 {
        return Err(Error::Capacity { demand_kw, available_kw: p_max });
    }

    let total = |l: f64| units.iter().map(|u| u.output(l)).sum::<f64>();
    let mut lo = units.iter().map(|u| u.b + 2.0 * u.c * u.p_min).fold(f64::INFINITY, f64::min) - 1.0;
    let mut hi = units.iter().map(|u| u.b + 2.0 * u.c * u.p_max).fold(f64::NEG_INFINITY, f64::max) + 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if total(mid) < demand_kw {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = hi;
    // Strictly-below-lambda linear units run flat out; marginal linear units fill the gap.
    let mut out: Vec<f64> = units
        .iter()
        .map(|u| if u.c > 0.0 { u.output(lambda) } else { u.output(lo) })
        .collect();
    let mut gap = demand_kw - out.iter().sum::<f64>();
    let tol = 1e-9 * (1.0 + lambda.abs());
    for (k, u) in units.iter().enumerate() {
        if u.c == 0.0 && (u.b - lambda).abs() <= tol.max(hi - lo) && gap > 0.0 {
            let take = gap.min(u.p_max - out[k]);
            out[k] += take;
            gap -= take;
        }
    }
    // Remaining round-off goes to any unit with headroom in the needed direction.
    for (k, u) in units.iter().enumerate() {
        if gap == 0.0 {
            break;
        }
        let take = gap.clamp(u.p_min - out[k], u.p_max - out[k]);
        out[k] += take;
        gap -= take;
    }

    let grid_kw = out.pop().unwrap();
    let cost = dg_units.iter().zip(&out).map(|(u, p)| u.cost(*p)).sum::<f64>() + grid.price * grid_kw;
    Ok(Dispatch { dg_kw: out, grid_kw, lambda, cost })
}
