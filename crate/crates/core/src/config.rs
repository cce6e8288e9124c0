//! Scenario configuration, presets and the shipped default parameter set.

use std::path::Path;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::fleet::FleetConfig;
use crate::grid::{Feeder, NetworkModel};
use crate::market::MarketConfig;
use crate::metrics::FlagRow;
use crate::optimizer::NsgaConfig;
use crate::rng::{stream, Domain};
use crate::valuation::{CarbonParams, DegradationParams, SocLimits};
use crate::{Error, Result, HOURS};

/// The checked-in default configuration.
pub const DEFAULTS: &str = include_str!("../data/defaults.toml");

/// Feature switches of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ScenarioFlags {
    /// Vehicle-to-grid discharging allowed.
    pub v2g: bool,
    /// Battery degradation priced.
    pub bdc: bool,
    /// Station PV in service.
    pub res: bool,
    /// Optimal peak-price adjustment with elastic demand.
    pub oep: bool,
    /// Emission reduction credits paid.
    pub erq: bool,
}

impl ScenarioFlags {
    pub const PRESETS: [&'static str; 7] = ["S1", "S2", "S3", "S4", "S5", "S6", "S7"];

    pub fn preset(name: &str) -> Option<Self> {
        let f = |v2g, bdc, res, oep, erq| ScenarioFlags { v2g, bdc, res, oep, erq };
        Some(match name {
            "S1" => f(false, false, false, false, false),
            "S2" => f(true, false, false, false, false),
            "S3" => f(true, true, false, false, false),
            "S4" => f(true, true, true, false, false),
            "S5" => f(true, true, false, true, false),
            "S6" => f(true, true, true, false, true),
            "S7" => f(true, true, true, true, true),
            _ => return None,
        })
    }

    pub fn row(&self) -> FlagRow {
        FlagRow { v2g: self.v2g, bdc: self.bdc, res: self.res, oep: self.oep, erq: self.erq }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RateTier {
    Slow,
    #[default]
    Regular,
    Fast,
}

impl std::str::FromStr for RateTier {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "slow" => Ok(RateTier::Slow),
            "regular" => Ok(RateTier::Regular),
            "fast" => Ok(RateTier::Fast),
            _ => Err(Error::config(format!("unknown rate tier `{s}`"))),
        }
    }
}

impl std::fmt::Display for RateTier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RateTier::Slow => "slow",
            RateTier::Regular => "regular",
            RateTier::Fast => "fast",
        })
    }
}

/// Max-power multipliers of the charging-rate tiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateTiers {
    pub slow: f64,
    pub regular: f64,
    pub fast: f64,
}

impl RateTiers {
    pub fn multiplier(&self, tier: RateTier) -> f64 {
        match tier {
            RateTier::Slow => self.slow,
            RateTier::Regular => self.regular,
            RateTier::Fast => self.fast,
        }
    }
}

/// Clear-sky half-sine PV shape with multiplicative Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PvConfig {
    pub sunrise_hour: f64,
    pub sunset_hour: f64,
    pub noise_sigma: f64,
}

impl PvConfig {
    pub fn clear_sky(&self, hour: usize) -> f64 {
        let h = hour as f64;
        if h <= self.sunrise_hour || h >= self.sunset_hour {
            return 0.0;
        }
        (std::f64::consts::PI * (h - self.sunrise_hour) / (self.sunset_hour - self.sunrise_hour)).sin()
    }

    /// Realised output fraction of station `station` for every hour.
    pub fn profile(&self, seed: u64, station: usize) -> Result<[f64; HOURS]> {
        let noise = Normal::new(0.0, self.noise_sigma).map_err(|e| Error::config(format!("PV noise: {e}")))?;
        let mut rng = stream(seed, Domain::Photovoltaic, station as u64);
        Ok(std::array::from_fn(|h| {
            let eps: f64 = noise.sample(&mut rng);
            self.clear_sky(h) * (1.0 + eps).max(0.0)
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Carbon,
    Pem,
    Rate,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "carbon" => Ok(SweepAxis::Carbon),
            "pem" => Ok(SweepAxis::Pem),
            "rate" => Ok(SweepAxis::Rate),
            _ => Err(Error::config(format!("unknown sweep axis `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Emission price of the first carbon sweep point, $/kg.
    pub carbon_start: f64,
    pub carbon_step: f64,
    pub carbon_count: usize,
    pub pem_scales: Vec<f64>,
    pub rate_tiers: Vec<RateTier>,
}

impl SweepConfig {
    pub fn carbon_prices(&self) -> Vec<f64> {
        (0..self.carbon_count).map(|k| self.carbon_start + k as f64 * self.carbon_step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Label written to reports.
    pub scenario: String,
    pub flags: ScenarioFlags,
    pub seed: u64,
    /// Weight of the station benefit in the final selection.
    pub alpha: f64,
    pub rate_tier: RateTier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValuationConfig {
    pub soc: SocLimits,
    pub degradation: DegradationParams,
    pub carbon: CarbonParams,
}

/// Everything a scenario run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub run: RunConfig,
    pub optimizer: NsgaConfig,
    pub rate_tiers: RateTiers,
    pub sweep: SweepConfig,
    pub pv: PvConfig,
    pub valuation: ValuationConfig,
    pub market: MarketConfig,
    pub fleet: FleetConfig,
    pub network: NetworkModel,
}

impl ScenarioConfig {
    pub fn defaults() -> Self {
        Self::from_toml_str(DEFAULTS).expect("shipped defaults parse")
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Apply preset `S1`..`S7`; `custom` keeps the configured flags.
    pub fn with_scenario(mut self, name: &str) -> Result<Self> {
        if name != "custom" {
            self.run.flags =
                ScenarioFlags::preset(name).ok_or_else(|| Error::config(format!("unknown scenario `{name}`")))?;
        }
        self.run.scenario = name.to_string();
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.run.alpha) {
            return Err(Error::Range { name: "alpha", value: self.run.alpha, min: 0.0, max: 1.0 });
        }
        self.optimizer.validate()?;
        self.market.validate()?;
        self.fleet.validate()?;
        self.valuation.degradation.validate()?;
        let soc = &self.valuation.soc;
        if !(0.0 <= soc.min && soc.min < soc.max && soc.max <= 1.0 && soc.departure_reserve >= 0.0) {
            return Err(Error::config(format!("SOC limits {soc:?}")));
        }
        let s = &self.sweep;
        if s.carbon_count == 0 || s.pem_scales.is_empty() || s.rate_tiers.is_empty() {
            return Err(Error::config("every sweep axis needs at least one point"));
        }
        if s.pem_scales.iter().any(|k| !(*k >= 0.0)) {
            return Err(Error::config("PEM scales must be non-negative"));
        }
        let t = &self.rate_tiers;
        if [t.slow, t.regular, t.fast].iter().any(|m| !(*m > 0.0)) {
            return Err(Error::config("rate tier multipliers must be positive"));
        }
        if !(self.pv.sunrise_hour < self.pv.sunset_hour && self.pv.noise_sigma >= 0.0) {
            return Err(Error::config("PV window or noise invalid"));
        }
        let feeder = Feeder::new(&self.network)?;
        for st in &self.network.stations {
            feeder.index_of(st.bus)?;
        }
        for u in &self.network.dg_units {
            feeder.index_of(u.bus)?;
        }
        for seg in &self.fleet.segments {
            for &b in &seg.buses {
                feeder.index_of(b)?;
            }
        }
        Ok(())
    }

    /// Short content hash of every setting that can change results; the
    /// worker count is left out.
    pub fn digest(&self) -> String {
        let mut canonical = self.clone();
        canonical.optimizer.workers = 0;
        let text = canonical.to_toml_string().unwrap_or_default();
        let hash = Sha256::digest(text.as_bytes());
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_and_round_trip() {
        let cfg = ScenarioConfig::defaults();
        let text = cfg.to_toml_string().unwrap();
        let back = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.digest(), back.digest());
        let mut threaded = cfg.clone();
        threaded.optimizer.workers = 4;
        assert_eq!(cfg.digest(), threaded.digest());
        threaded.run.seed += 1;
        assert_ne!(cfg.digest(), threaded.digest());
    }

    #[test]
    fn shipped_constants() {
        let cfg = ScenarioConfig::defaults();
        assert_eq!(cfg.fleet.n_bevs, 800);
        assert_eq!(cfg.fleet.soc_init_range, [0.15, 0.25]);
        assert_eq!((cfg.fleet.eta_charge, cfg.fleet.eta_discharge), (0.9, 0.9));
        let shares: Vec<f64> = cfg.fleet.types.iter().map(|t| t.share).collect();
        assert_eq!(shares, vec![0.60, 0.12, 0.13, 0.15]);
        assert_eq!(cfg.network.buses.len(), 33);
        assert_eq!(cfg.network.dg_units.len(), 10);
        let total: f64 = cfg.network.buses.iter().map(|b| b.p_kw).sum();
        assert!((total - 3715.0).abs() < 1e-9);
        assert_eq!(cfg.network.load_shape.len(), HOURS);
        assert_eq!(cfg.market.tariff.peak_price, 0.14);
        assert_eq!(cfg.sweep.carbon_prices().len(), 5);
    }

    #[test]
    fn presets_follow_the_scenario_table() {
        let on = |n: &str| {
            let f = ScenarioFlags::preset(n).unwrap();
            [f.v2g, f.bdc, f.res, f.oep, f.erq]
        };
        assert_eq!(on("S1"), [false; 5]);
        assert_eq!(on("S2"), [true, false, false, false, false]);
        assert_eq!(on("S3"), [true, true, false, false, false]);
        assert_eq!(on("S4"), [true, true, true, false, false]);
        assert_eq!(on("S5"), [true, true, false, true, false]);
        assert_eq!(on("S6"), [true, true, true, false, true]);
        assert_eq!(on("S7"), [true; 5]);
        assert!(ScenarioFlags::preset("S8").is_none());
        let cfg = ScenarioConfig::defaults().with_scenario("S4").unwrap();
        assert_eq!(cfg.run.scenario, "S4");
        assert!(ScenarioConfig::defaults().with_scenario("bogus").is_err());
    }

    #[test]
    fn pv_profile_shape() {
        let pv = PvConfig { sunrise_hour: 6.0, sunset_hour: 18.0, noise_sigma: 0.0 };
        let p = pv.profile(1, 0).unwrap();
        assert_eq!(p[12], 1.0);
        assert_eq!(p[6], 0.0);
        assert_eq!(p[18], 0.0);
        assert_eq!(p[3], 0.0);
        let noisy = PvConfig { noise_sigma: 0.1, ..pv };
        let a = noisy.profile(3, 1).unwrap();
        assert_eq!(a, noisy.profile(3, 1).unwrap());
        assert!(a.iter().all(|x| *x >= 0.0));
        assert_eq!(a[2], 0.0);
    }

    #[test]
    fn invalid_values_rejected() {
        let mut cfg = ScenarioConfig::defaults();
        cfg.run.alpha = 2.0;
        assert!(cfg.validate().is_err());
        let mut cfg = ScenarioConfig::defaults();
        cfg.sweep.carbon_count = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = ScenarioConfig::defaults();
        cfg.network.stations[0].bus = 99;
        assert!(matches!(cfg.validate(), Err(Error::UnknownBus(99))));
    }
}
