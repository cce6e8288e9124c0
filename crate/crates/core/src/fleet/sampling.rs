use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use super::{BevBehavior, BevTypeSpec, FleetConfig};
use crate::{Error, Result};

/// Draws allowed before a consistent behaviour tuple is declared unreachable.
pub const MAX_DRAWS: usize = 1000;

/// Sample departure, return, daily distance and arrival SOC for one BEV of
/// type `ty` with battery `capacity_kwh`.
///
/// Departure and return are normal draws truncated to `[0, 24)` with
/// departure strictly before return; distance is log-normal. A tuple is
/// rejected and redrawn when it is inconsistent or when the trip would need
/// more energy than the battery holds.
pub fn sample_behavior<R: Rng + ?Sized>(
    cfg: &FleetConfig,
    ty: &BevTypeSpec,
    capacity_kwh: f64,
    rng: &mut R,
) -> Result<BevBehavior> {
    let p = &cfg.behavior;
    let normal = |mu: f64, sigma: f64, what: &str| {
        Normal::new(mu, sigma).map_err(|e| Error::config(format!("{what} distribution: {e}")))
    };
    let t_out_dist = normal(p.t_out_mu, p.t_out_sigma, "departure")?;
    let t_back_dist = normal(p.t_back_mu, p.t_back_sigma, "return")?;
    let dist_dist = LogNormal::new(p.distance_ln_mu, p.distance_ln_sigma)
        .map_err(|e| Error::config(format!("distance distribution: {e}")))?;

    // [departure < 0, return out of day, departure >= return, trip >= capacity]
    let mut failures = [0usize; 4];
    for _ in 0..MAX_DRAWS {
        let t_out: f64 = t_out_dist.sample(rng);
        let t_back: f64 = t_back_dist.sample(rng);
        let distance: f64 = dist_dist.sample(rng);
        let trip = distance * ty.ecpk_kwh_per_km;
        if !(0.0..24.0).contains(&t_out) {
            failures[0] += 1;
        } else if !(0.0..24.0).contains(&t_back) {
            failures[1] += 1;
        } else if t_out >= t_back {
            failures[2] += 1;
        } else if !(distance > 0.0) || trip >= capacity_kwh {
            failures[3] += 1;
        } else {
            let soc_formula = (capacity_kwh - trip) / capacity_kwh;
            let [lo, hi] = cfg.soc_init_range;
            return Ok(BevBehavior {
                t_out,
                t_back,
                distance_km: distance,
                soc_initial: soc_formula.clamp(lo, hi),
                soc_formula,
            });
        }
    }
    let names = [
        "departure time within [0, 24)",
        "return time within [0, 24)",
        "departure before return",
        "trip energy below battery capacity",
    ];
    let worst = (0..4).max_by_key(|&i| (failures[i], usize::MAX - i)).unwrap();
    Err(Error::Sampling {
        constraint: names[worst].to_string(),
        attempts: MAX_DRAWS,
    })
}
