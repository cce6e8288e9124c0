//! Time-of-use tariffs, price-elastic demand, economic dispatch and the
//! peak-price adjustment line search.

mod dispatch;
mod elasticity;
mod rho;
mod tariff;

use serde::{Deserialize, Serialize};

pub use dispatch::{economic_dispatch, Dispatch, GridImport};
pub use elasticity::{demand_factors, elastic_demand, relative_price_change, tou_cost, Pem};
pub use rho::{optimize_rho, RhoOutcome, RhoPoint};
pub use tariff::{adjust_prices, label_periods, Period, RhoSearch, TariffConfig, TariffSchedule};

use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketConfig {
    pub tariff: TariffConfig,
    pub pem: Pem,
    pub rho: RhoSearch,
    /// Price of network losses, $/kWh.
    pub loss_price: f64,
    /// Upstream import limit, kW.
    pub grid_capacity_kw: f64,
}

impl Default for MarketConfig {
    fn default() -> Self {
        MarketConfig {
            tariff: TariffConfig::default(),
            pem: Pem::default(),
            rho: RhoSearch::default(),
            loss_price: 0.1,
            grid_capacity_kw: 1e5,
        }
    }
}

impl MarketConfig {
    pub fn validate(&self) -> Result<()> {
        self.pem.validate()?;
        self.rho.validate()?;
        TariffSchedule::baseline(&self.tariff)?;
        if !(self.loss_price >= 0.0 && self.grid_capacity_kw >= 0.0) {
            return Err(crate::Error::config("loss price and grid capacity must be non-negative"));
        }
        Ok(())
    }
}
