//! Stochastic fleet construction: driving behaviour, per-node counts and
//! station assignment.

mod allocation;
mod assignment;
mod sampling;

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use allocation::{allocate_counts, largest_remainder, NodeAllocation};
pub use assignment::{assign_station, plug_in_hours, RejectReason, StationState};
pub use sampling::{sample_behavior, MAX_DRAWS};

use crate::grid::{Feeder, StationData};
use crate::rng::{stream, Domain};
use crate::valuation::SocLimits;
use crate::{Error, Result, HOURS};

/// Residential load group of a network segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    A,
    B,
    C,
}

impl Group {
    pub const ALL: [Group; 3] = [Group::A, Group::B, Group::C];
}

/// One row of the BEV type table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BevTypeSpec {
    pub name: String,
    /// Energy per distance, kWh/km.
    pub ecpk_kwh_per_km: f64,
    pub share: f64,
    /// Battery capacity range, kWh.
    pub capacity_kwh: [f64; 2],
    /// Max hourly charge/discharge power as a fraction of capacity.
    pub max_power_factor: f64,
}

/// Normal parameters for departure/return hour and log-normal parameters
/// for daily distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorParams {
    pub t_out_mu: f64,
    pub t_out_sigma: f64,
    pub t_back_mu: f64,
    pub t_back_sigma: f64,
    pub distance_ln_mu: f64,
    pub distance_ln_sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupShares {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl GroupShares {
    pub fn as_array(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }
}

/// Network segment: a set of buses sharing a residential load group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub group: Group,
    pub buses: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetConfig {
    pub n_bevs: usize,
    pub behavior: BehaviorParams,
    pub group_shares: GroupShares,
    pub segments: Vec<Segment>,
    pub soc_init_range: [f64; 2],
    pub eta_charge: f64,
    pub eta_discharge: f64,
    pub max_hops: usize,
    pub types: Vec<BevTypeSpec>,
}

impl FleetConfig {
    pub fn validate(&self) -> Result<()> {
        let share_sum: f64 = self.types.iter().map(|t| t.share).sum();
        if self.types.is_empty() || (share_sum - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!("BEV type shares sum to {share_sum}, expected 1")));
        }
        for t in &self.types {
            let [lo, hi] = t.capacity_kwh;
            if !(lo > 0.0 && hi >= lo) {
                return Err(Error::config(format!("{}: capacity range [{lo}, {hi}]", t.name)));
            }
            if !(t.max_power_factor > 0.0 && t.max_power_factor <= 1.0) {
                return Err(Error::config(format!("{}: max power factor {}", t.name, t.max_power_factor)));
            }
            if !(t.ecpk_kwh_per_km > 0.0) || t.share < 0.0 {
                return Err(Error::config(format!("{}: non-positive consumption or negative share", t.name)));
            }
        }
        let g = self.group_shares.as_array();
        if g.iter().any(|s| *s < 0.0) || (g.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!("group shares {g:?} must be non-negative and sum to 1")));
        }
        for (name, eta) in [("eta_charge", self.eta_charge), ("eta_discharge", self.eta_discharge)] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::Range { name, value: eta, min: 0.0, max: 1.0 });
            }
        }
        let [lo, hi] = self.soc_init_range;
        if !(0.0..=1.0).contains(&lo) || !(lo..=1.0).contains(&hi) {
            return Err(Error::config(format!("initial SOC range [{lo}, {hi}]")));
        }
        let b = &self.behavior;
        if [b.t_out_sigma, b.t_back_sigma, b.distance_ln_sigma].iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::config("behaviour standard deviations must be non-negative"));
        }
        Ok(())
    }

    pub fn group_of(&self, bus: usize) -> Option<Group> {
        self.segments.iter().find(|s| s.buses.contains(&bus)).map(|s| s.group)
    }
}

/// Sampled daily driving pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BevBehavior {
    pub t_out: f64,
    pub t_back: f64,
    pub distance_km: f64,
    /// Arrival SOC after clamping into the configured initial range.
    pub soc_initial: f64,
    /// Arrival SOC from the energy balance before clamping.
    pub soc_formula: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BevAgent {
    pub id: usize,
    pub type_index: usize,
    pub type_name: String,
    pub capacity_kwh: f64,
    pub max_power_kw: f64,
    pub behavior: BevBehavior,
    pub group: Group,
    pub home_node: usize,
    /// Index into the fleet's station list.
    pub station: Option<usize>,
    pub reject: Option<RejectReason>,
    pub trip_energy_kwh: f64,
    /// Plug-in hours in chronological order.
    pub window: Vec<usize>,
    /// Required SOC at departure.
    pub target_soc: f64,
}

impl BevAgent {
    pub fn participates(&self) -> bool {
        self.station.is_some()
    }
}

/// Required departure SOC: trip share of the battery plus the reserve,
/// capped at the SOC ceiling.
pub fn departure_target(trip_energy_kwh: f64, capacity_kwh: f64, soc: &SocLimits) -> f64 {
    (trip_energy_kwh / capacity_kwh + soc.departure_reserve).min(soc.max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fleet {
    pub agents: Vec<BevAgent>,
    pub allocation: Vec<NodeAllocation>,
    pub stations: Vec<StationState>,
}

impl Fleet {
    pub fn participants(&self) -> impl Iterator<Item = &BevAgent> {
        self.agents.iter().filter(|a| a.participates())
    }

    pub fn rejected(&self) -> usize {
        self.agents.iter().filter(|a| !a.participates()).count()
    }

    /// One row per agent: id, type, E_b, t_out, t_back, distance_km,
    /// soc_init, group, home_node, station (bus id or `REJECTED`).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row<'a> {
            id: usize,
            #[serde(rename = "type")]
            type_name: &'a str,
            #[serde(rename = "E_b")]
            capacity_kwh: f64,
            t_out: f64,
            t_back: f64,
            distance_km: f64,
            soc_init: f64,
            group: Group,
            home_node: usize,
            station: String,
        }
        let mut w = csv::Writer::from_writer(out);
        for a in &self.agents {
            w.serialize(Row {
                id: a.id,
                type_name: &a.type_name,
                capacity_kwh: a.capacity_kwh,
                t_out: a.behavior.t_out,
                t_back: a.behavior.t_back,
                distance_km: a.behavior.distance_km,
                soc_init: a.behavior.soc_initial,
                group: a.group,
                home_node: a.home_node,
                station: match a.station {
                    Some(s) => self.stations[s].bus.to_string(),
                    None => "REJECTED".to_string(),
                },
            })?;
        }
        w.flush().map_err(|e| Error::io("fleet.csv", e))?;
        Ok(())
    }
}

/// Inputs to [`build_fleet`] beyond the fleet configuration.
pub struct FleetContext<'a> {
    pub feeder: &'a Feeder,
    pub stations: &'a [StationData],
    /// Price signal per station, aligned with `stations`.
    pub station_prices: &'a [[f64; HOURS]],
    pub soc: &'a SocLimits,
    /// Multiplier on every type's max power (charging-rate tier).
    pub power_multiplier: f64,
    pub seed: u64,
}

/// Sample, place and assign the whole fleet. Agent `i` draws from its own
/// sub-stream; assignment runs in id order.
pub fn build_fleet(cfg: &FleetConfig, ctx: &FleetContext<'_>) -> Result<Fleet> {
    cfg.validate()?;
    if ctx.station_prices.len() != ctx.stations.len() {
        return Err(Error::config("one price vector per station required"));
    }
    let feeder = ctx.feeder;
    let daily: Vec<(usize, f64)> = feeder
        .bus_ids()
        .iter()
        .enumerate()
        .map(|(i, &bus)| {
            let e = feeder.snapshot_load()[i].re * (0..HOURS).map(|h| feeder.load_factor_at(h)).sum::<f64>();
            (bus, e)
        })
        .collect();
    let allocation = allocate_counts(cfg, &daily)?;

    let mut stations: Vec<StationState> = ctx
        .stations
        .iter()
        .zip(ctx.station_prices)
        .map(|(s, p)| {
            feeder.index_of(s.bus)?;
            Ok(StationState::new(s.bus, s.plugs, *p))
        })
        .collect::<Result<_>>()?;

    let mut agents = Vec::with_capacity(cfg.n_bevs);
    for node in &allocation {
        let hops: Vec<usize> = stations
            .iter()
            .map(|s| feeder.hop_distance(node.bus, s.bus))
            .collect::<Result<_>>()?;
        for _ in 0..node.count {
            let id = agents.len();
            let mut rng = stream(ctx.seed, Domain::Fleet, id as u64);
            let type_index = pick_type(&cfg.types, &mut rng);
            let ty = &cfg.types[type_index];
            let [lo, hi] = ty.capacity_kwh;
            let capacity_kwh = lo + (hi - lo) * rng.random::<f64>();
            let behavior = sample_behavior(cfg, ty, capacity_kwh, &mut rng)?;
            let trip_energy_kwh = behavior.distance_km * ty.ecpk_kwh_per_km;
            let max_power_kw = ty.max_power_factor * capacity_kwh * ctx.power_multiplier;
            let window = plug_in_hours(behavior.t_out, behavior.t_back);
            let target_soc = departure_target(trip_energy_kwh, capacity_kwh, ctx.soc);

            let reachable = (behavior.soc_initial
                + window.len() as f64 * cfg.eta_charge * max_power_kw / capacity_kwh)
                .min(ctx.soc.max);
            let placed = if window.is_empty() {
                Err(RejectReason::EmptyWindow)
            } else if reachable + 1e-12 < target_soc {
                Err(RejectReason::WindowTooShort)
            } else {
                assign_station(&window, &hops, &mut stations, cfg.max_hops)
            };
            agents.push(BevAgent {
                id,
                type_index,
                type_name: ty.name.clone(),
                capacity_kwh,
                max_power_kw,
                behavior,
                group: node.group,
                home_node: node.bus,
                station: placed.ok(),
                reject: placed.err(),
                trip_energy_kwh,
                window,
                target_soc,
            });
        }
    }
    Ok(Fleet {
        agents,
        allocation,
        stations,
    })
}

fn pick_type<R: Rng + ?Sized>(types: &[BevTypeSpec], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, t) in types.iter().enumerate() {
        acc += t.share;
        if u < acc {
            return i;
        }
    }
    types.len() - 1
}
