use rayon::prelude::*;
use serde::Serialize;

use super::elasticity::{elastic_demand, tou_cost, Pem};
use super::tariff::{adjust_prices, Period, RhoSearch, TariffSchedule};
use crate::{Result, HOURS};

/// One evaluated point of the line search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoPoint {
    pub rho: f64,
    pub c_tou: f64,
    pub gen_cost: f64,
    pub total_cost: f64,
    /// Peak-hour demand reduction against the baseline, kWh.
    pub power_saved: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhoOutcome {
    pub rho: f64,
    pub tariff: TariffSchedule,
    /// Flexible demand at the chosen factor.
    pub demand: [f64; HOURS],
    pub points: Vec<RhoPoint>,
}

/// Grid line search over the peak-price adjustment factor.
///
/// `d0` is the flexible (BEV) demand under the unadjusted tariff and
/// `gen_cost` prices the generation needed to serve a given flexible demand.
/// Each point scores generation cost plus TOU cost; the smallest score wins,
/// ties going to the smaller factor.
pub fn optimize_rho<F>(
    baseline: &TariffSchedule,
    d0: &[f64; HOURS],
    pem: &Pem,
    search: &RhoSearch,
    gen_cost: F,
) -> Result<RhoOutcome>
where
    F: Fn(&[f64; HOURS]) -> Result<f64> + Sync,
{
    search.validate()?;
    let evaluated: Vec<(RhoPoint, TariffSchedule, [f64; HOURS])> = search
        .grid()
        .into_par_iter()
        .map(|rho| {
            let tariff = adjust_prices(baseline, rho, search)?;
            let d = elastic_demand(d0, &tariff, pem)?;
            let (_, c_tou) = tou_cost(d0, &d, &tariff.lambda0, &tariff.lambda);
            let g = gen_cost(&d)?;
            let power_saved = tariff
                .hours_in(Period::Peak)
                .map(|h| (d0[h] - d[h]).max(0.0))
                .sum();
            let point = RhoPoint { rho, c_tou, gen_cost: g, total_cost: g + c_tou, power_saved };
            Ok((point, tariff, d))
        })
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (k, (p, _, _)) in evaluated.iter().enumerate() {
        if p.total_cost < evaluated[best].0.total_cost {
            best = k;
        }
    }
    let points = evaluated.iter().map(|(p, _, _)| *p).collect();
    let (point, tariff, demand) = evaluated.into_iter().nth(best).unwrap();
    Ok(RhoOutcome { rho: point.rho, tariff, demand, points })
}
