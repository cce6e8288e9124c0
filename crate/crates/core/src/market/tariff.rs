use serde::{Deserialize, Serialize};

use crate::{Error, Result, HOURS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Period {
    Peak,
    OffPeak,
    Valley,
}

impl Period {
    /// Row/column order of the elasticity matrix.
    pub const ALL: [Period; 3] = [Period::Peak, Period::OffPeak, Period::Valley];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Three-tier TOU tariff definition. Hours not listed as peak or valley are off-peak.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TariffConfig {
    pub peak_price: f64,
    pub offpeak_price: f64,
    pub valley_price: f64,
    pub peak_hours: Vec<usize>,
    pub valley_hours: Vec<usize>,
}

impl Default for TariffConfig {
    fn default() -> Self {
        TariffConfig {
            peak_price: 0.14,
            offpeak_price: 0.10,
            valley_price: 0.06,
            peak_hours: (10..14).chain(18..22).collect(),
            valley_hours: (0..8).collect(),
        }
    }
}

/// Per-hour period labels and prices.
pub fn label_periods(cfg: &TariffConfig) -> Result<[(Period, f64); HOURS]> {
    let mut out = [(Period::OffPeak, cfg.offpeak_price); HOURS];
    for &h in &cfg.peak_hours {
        if h >= HOURS {
            return Err(Error::config(format!("peak hour {h} out of range")));
        }
        out[h] = (Period::Peak, cfg.peak_price);
    }
    for &h in &cfg.valley_hours {
        if h >= HOURS || cfg.peak_hours.contains(&h) {
            return Err(Error::config(format!("valley hour {h} out of range or also peak")));
        }
        out[h] = (Period::Valley, cfg.valley_price);
    }
    Ok(out)
}

/// Inclusive bounds and grid step of the peak-price adjustment factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoSearch {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for RhoSearch {
    fn default() -> Self {
        RhoSearch { min: 0.0, max: 20.0, step: 0.25 }
    }
}

impl RhoSearch {
    pub fn validate(&self) -> Result<()> {
        if !(self.min <= self.max && self.step > 0.0 && self.min >= 0.0) {
            return Err(Error::config(format!("rho search {self:?}")));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.min + k as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TariffSchedule {
    pub period_of_hour: [Period; HOURS],
    pub lambda0: [f64; HOURS],
    pub lambda: [f64; HOURS],
    pub rho: f64,
}

impl TariffSchedule {
    pub fn baseline(cfg: &TariffConfig) -> Result<Self> {
        let labels = label_periods(cfg)?;
        let lambda0 = labels.map(|(_, p)| p);
        if lambda0.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::config("tariff prices must be non-negative"));
        }
        Ok(TariffSchedule {
            period_of_hour: labels.map(|(p, _)| p),
            lambda0,
            lambda: lambda0,
            rho: 0.0,
        })
    }

    /// Flat tariff, every hour off-peak.
    pub fn flat(price: f64) -> Self {
        TariffSchedule {
            period_of_hour: [Period::OffPeak; HOURS],
            lambda0: [price; HOURS],
            lambda: [price; HOURS],
            rho: 0.0,
        }
    }

    pub fn hours_in(&self, period: Period) -> impl Iterator<Item = usize> + '_ {
        (0..HOURS).filter(move |&h| self.period_of_hour[h] == period)
    }

    /// Undo the adjustment on `lambda`; exact wherever the valley floor is not active.
    pub fn unadjusted(&self) -> [f64; HOURS] {
        std::array::from_fn(|h| match self.period_of_hour[h] {
            Period::Peak => self.lambda[h] - self.rho,
            Period::Valley => self.lambda[h] + self.rho,
            Period::OffPeak => self.lambda[h],
        })
    }
}

/// Raise peak prices and lower valley prices (floored at zero) by `rho`.
pub fn adjust_prices(tariff: &TariffSchedule, rho: f64, bounds: &RhoSearch) -> Result<TariffSchedule> {
    if !(rho >= bounds.min && rho <= bounds.max) {
        return Err(Error::Range { name: "rho", value: rho, min: bounds.min, max: bounds.max });
    }
    let lambda = std::array::from_fn(|h| {
        let l0 = tariff.lambda0[h];
        match tariff.period_of_hour[h] {
            Period::Peak => l0 + rho,
            Period::Valley => (l0 - rho).max(0.0),
            Period::OffPeak => l0,
        }
    });
    Ok(TariffSchedule {
        period_of_hour: tariff.period_of_hour,
        lambda0: tariff.lambda0,
        lambda,
        rho,
    })
}
