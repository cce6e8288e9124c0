use serde::{Deserialize, Serialize};

use super::tariff::{Period, TariffSchedule};
use crate::{Error, Result, HOURS};

/// Period-level price elasticity matrix, rows/columns in [`Period::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Pem(pub [[f64; 3]; 3]);

impl Default for Pem {
    fn default() -> Self {
        Pem([[-0.1, 0.016, 0.012], [0.016, -0.1, 0.01], [0.012, 0.01, -0.1]])
    }
}

impl Pem {
    pub fn zero() -> Self {
        Pem([[0.0; 3]; 3])
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..3 {
            for j in 0..3 {
                let e = self.0[i][j];
                let ok = if i == j { e <= 0.0 } else { e >= 0.0 };
                if !ok || !e.is_finite() {
                    return Err(Error::config(format!("elasticity ({i},{j}) = {e} has the wrong sign")));
                }
            }
        }
        Ok(())
    }

    pub fn scaled(&self, k: f64) -> Self {
        Pem(self.0.map(|row| row.map(|e| e * k)))
    }

    pub fn get(&self, row: Period, col: Period) -> f64 {
        self.0[row.index()][col.index()]
    }
}

/// Mean relative price change of each period.
pub fn relative_price_change(tariff: &TariffSchedule) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    for p in Period::ALL {
        let hours: Vec<usize> = tariff.hours_in(p).collect();
        for &h in &hours {
            if tariff.lambda0[h] == 0.0 {
                return Err(Error::DivisionByZero(format!("baseline price at hour {h}")));
            }
            out[p.index()] += (tariff.lambda[h] - tariff.lambda0[h]) / tariff.lambda0[h];
        }
        if !hours.is_empty() {
            out[p.index()] /= hours.len() as f64;
        }
    }
    Ok(out)
}

/// Demand multiplier of each period: one plus the elasticity-weighted
/// relative price change of every period, floored at zero.
pub fn demand_factors(tariff: &TariffSchedule, pem: &Pem) -> Result<[f64; 3]> {
    let r = relative_price_change(tariff)?;
    Ok(Period::ALL.map(|p| {
        let f: f64 = 1.0 + Period::ALL.iter().map(|&q| pem.get(p, q) * r[q.index()]).sum::<f64>();
        f.max(0.0)
    }))
}

/// Demand after price response, each hour scaled by its period's factor.
pub fn elastic_demand(d0: &[f64; HOURS], tariff: &TariffSchedule, pem: &Pem) -> Result<[f64; HOURS]> {
    let f = demand_factors(tariff, pem)?;
    Ok(std::array::from_fn(|h| d0[h] * f[tariff.period_of_hour[h].index()]))
}

/// Hourly TOU cost change `lambda d - lambda0 d0` and its total.
pub fn tou_cost(
    d0: &[f64; HOURS],
    d: &[f64; HOURS],
    lambda0: &[f64; HOURS],
    lambda: &[f64; HOURS],
) -> ([f64; HOURS], f64) {
    let hourly: [f64; HOURS] = std::array::from_fn(|h| lambda[h] * d[h] - lambda0[h] * d0[h]);
    (hourly, hourly.iter().sum())
}
