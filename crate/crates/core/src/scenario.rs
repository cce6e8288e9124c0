//! Scenario orchestration: fleet, pricing, search, selection, indices and
//! artifact output.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{ScenarioConfig, SweepAxis};
use crate::evaluation::{AgentSlot, Evaluation, Instance, StationSite};
use crate::fleet::{build_fleet, Fleet, FleetContext};
use crate::grid::{Feeder, SweepOptions};
use crate::market::{demand_factors, economic_dispatch, optimize_rho, GridImport, Period, RhoOutcome, TariffSchedule};
use crate::metrics::{load_indices, write_report_csv, write_report_json, LoadIndices, ReportRow, REPORT_COLUMNS};
use crate::optimizer::{nsga2_run, select_weighted, uncoordinated, water_filling, GenerationStats};
use crate::valuation::{carbon_credit_cs, Action, AgentSchedule};
use crate::{Error, Result, HOURS};

/// Files written by [`run_scenario`], in write order.
pub const ARTIFACTS: [&str; 10] = [
    "fleet.csv",
    "tariff.csv",
    "rho.csv",
    "pareto.json",
    "convergence.csv",
    "schedule.csv",
    "voltages.csv",
    "hourly.csv",
    "report.csv",
    "report.json",
];

/// One point of the final front.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontPoint {
    pub f1: f64,
    pub f2: f64,
    pub bev_cost: f64,
}

/// Water-filling reference schedule on the same instance.
#[derive(Debug, Clone)]
pub struct BaselineRun {
    pub schedules: Vec<AgentSchedule>,
    pub evaluation: Evaluation,
    pub indices: LoadIndices,
    /// Share of charging energy drawn in valley-priced hours.
    pub valley_share: f64,
}

/// Everything a scenario run produced, before any file is written.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub config: ScenarioConfig,
    pub digest: String,
    pub fleet: Fleet,
    pub instance: Instance,
    pub tariff: TariffSchedule,
    pub rho: Option<RhoOutcome>,
    pub front: Vec<FrontPoint>,
    pub selected: usize,
    pub schedules: Vec<AgentSchedule>,
    pub evaluation: Evaluation,
    pub indices: LoadIndices,
    pub history: Vec<GenerationStats>,
    pub reference: Option<(f64, f64)>,
    pub degraded: bool,
    pub baseline: BaselineRun,
    pub row: ReportRow,
}

impl ScenarioRun {
    /// Lowest bus voltage magnitude at `hour` under the selected schedule.
    pub fn min_voltage_at(&self, hour: usize) -> f64 {
        self.evaluation.snapshots[hour].min_voltage()
    }
}

/// Feeder, fleet and scheduling instance of a configuration, priced at the
/// unadjusted tariff.
pub fn prepare(cfg: &ScenarioConfig) -> Result<(Fleet, Instance, TariffSchedule)> {
    let feeder = Feeder::new(&cfg.network)?;
    let tariff = TariffSchedule::baseline(&cfg.market.tariff)?;
    let flags = cfg.run.flags;
    let seed = cfg.run.seed;

    let stations: Vec<StationSite> = cfg
        .network
        .stations
        .iter()
        .enumerate()
        .map(|(s, st)| {
            let pv_kw = if flags.res {
                let shape = cfg.pv.profile(seed, s)?;
                shape.map(|x| x * st.pv_kw)
            } else {
                [0.0; HOURS]
            };
            Ok(StationSite { bus: st.bus, plugs: st.plugs, pv_kw })
        })
        .collect::<Result<_>>()?;

    let station_prices = vec![tariff.lambda; stations.len()];
    let ctx = FleetContext {
        feeder: &feeder,
        stations: &cfg.network.stations,
        station_prices: &station_prices,
        soc: &cfg.valuation.soc,
        power_multiplier: cfg.rate_tiers.multiplier(cfg.run.rate_tier),
        seed,
    };
    let fleet = build_fleet(&cfg.fleet, &ctx)?;

    let agents = fleet
        .participants()
        .map(|a| {
            let station = a.station.expect("participants have a station");
            AgentSlot::new(
                a.id,
                station,
                a.window.clone(),
                a.capacity_kwh,
                a.max_power_kw,
                a.behavior.soc_initial,
                a.target_soc,
            )
        })
        .collect();
    let base_load = (0..HOURS).map(|h| feeder.base_load_at(h)).collect();
    let instance = Instance {
        feeder,
        agents,
        stations,
        prices: tariff.lambda,
        grid_price: tariff.lambda0,
        grid_capacity_kw: cfg.market.grid_capacity_kw,
        dg_units: cfg.network.dg_units.clone(),
        base_load,
        soc: cfg.valuation.soc,
        eta_charge: cfg.fleet.eta_charge,
        eta_discharge: cfg.fleet.eta_discharge,
        v2g: flags.v2g,
        degradation: flags.bdc.then_some(cfg.valuation.degradation),
        carbon: flags.erq.then_some(cfg.valuation.carbon),
        loss_price: cfg.market.loss_price,
        sweep: SweepOptions::default(),
    };
    Ok((fleet, instance, tariff))
}

/// Line search over the peak-price factor, with the uncoordinated fleet
/// demand as the unadjusted flexible demand.
pub fn tune_rho(cfg: &ScenarioConfig, inst: &Instance, tariff: &TariffSchedule) -> Result<RhoOutcome> {
    let mut d0 = [0.0; HOURS];
    for slot in &inst.agents {
        let s = uncoordinated(inst, slot);
        for (k, &h) in s.hours.iter().enumerate() {
            d0[h] += s.p_charge[k];
        }
    }
    let fixed: [f64; HOURS] = std::array::from_fn(|h| {
        let base: f64 = inst.base_load[h].iter().map(|s| s.re).sum();
        let pv: f64 = inst.stations.iter().map(|s| s.pv_kw[h]).sum();
        base - pv
    });
    let gen_cost = |d: &[f64; HOURS]| -> Result<f64> {
        let mut total = 0.0;
        for h in 0..HOURS {
            let grid = GridImport { price: inst.grid_price[h], capacity_kw: inst.grid_capacity_kw };
            total += economic_dispatch((fixed[h] + d[h]).max(0.0), &inst.dg_units, &grid)?.cost;
        }
        Ok(total)
    };
    optimize_rho(tariff, &d0, &cfg.market.pem, &cfg.market.rho, gen_cost)
}

/// Scale every owner's charging ceiling by the price response of each
/// period, never above full power. Owners who could not reach their
/// departure target under the scaled ceilings keep full power.
pub fn apply_charging_envelope(inst: &mut Instance, tariff: &TariffSchedule, factors: &[f64; 3]) {
    let (eta, soc_max) = (inst.eta_charge, inst.soc.max);
    for slot in &mut inst.agents {
        let full = slot.charge_limit_kw.clone();
        for (k, &h) in slot.hours.iter().enumerate() {
            slot.charge_limit_kw[k] = slot.max_power_kw * factors[tariff.period_of_hour[h].index()].min(1.0);
        }
        if slot.reachable_soc(eta, soc_max) + 1e-12 < slot.target_soc {
            slot.charge_limit_kw = full;
        }
    }
}

fn staged<T>(stage: &'static str, digest: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage { stage, digest: digest.to_string(), source: Box::new(e) })
}

/// Run the whole pipeline in memory.
pub fn simulate(cfg: &ScenarioConfig) -> Result<ScenarioRun> {
    let digest = cfg.digest();
    let d = digest.as_str();
    staged("config", d, cfg.validate())?;
    let (fleet, mut inst, mut tariff) = staged("fleet", d, prepare(cfg))?;
    let flags = cfg.run.flags;

    let rho = if flags.oep {
        let outcome = staged("pricing", d, tune_rho(cfg, &inst, &tariff))?;
        tariff = outcome.tariff.clone();
        inst.prices = tariff.lambda;
        let factors = staged("pricing", d, demand_factors(&tariff, &cfg.market.pem))?;
        apply_charging_envelope(&mut inst, &tariff, &factors);
        Some(outcome)
    } else {
        None
    };

    let (front, selected, schedules, history, reference, degraded) = if flags.v2g {
        let outcome = staged("optimizer", d, nsga2_run(&inst, &cfg.optimizer, cfg.run.seed))?;
        let points: Vec<(f64, f64)> = outcome.front.iter().map(|c| c.point()).collect();
        let selected = staged("selection", d, select_weighted(&points, cfg.run.alpha))?;
        let front = outcome
            .front
            .iter()
            .map(|c| FrontPoint { f1: c.objectives.f1, f2: c.objectives.f2, bev_cost: c.objectives.bev_cost })
            .collect();
        let schedules = outcome.front[selected].schedules.clone();
        (front, selected, schedules, outcome.history, Some(outcome.reference), outcome.degraded)
    } else {
        let schedules: Vec<AgentSchedule> = inst.agents.iter().map(|s| uncoordinated(&inst, s)).collect();
        (Vec::new(), 0, schedules, Vec::new(), None, false)
    };

    let evaluation = staged("evaluation", d, inst.evaluate(&schedules))?;
    let front = if flags.v2g {
        front
    } else {
        let o = evaluation.objectives;
        vec![FrontPoint { f1: o.f1, f2: o.f2, bev_cost: o.bev_cost }]
    };
    let indices = staged("metrics", d, load_indices(&evaluation.total_load(), &evaluation.base_load()))?;

    let baseline = staged("baseline", d, water_filling_run(&inst, &tariff))?;

    let pv_total: Vec<f64> = (0..HOURS).map(|h| inst.stations.iter().map(|s| s.pv_kw[h]).sum()).collect();
    let (kg_cs, rev_cs) = match &inst.carbon {
        Some(c) => carbon_credit_cs(&pv_total, c),
        None => (0.0, 0.0),
    };
    let sum = |f: fn(&crate::valuation::OwnerCost) -> f64| evaluation.owner.iter().map(f).sum::<f64>();
    let mut row = ReportRow {
        scenario: cfg.run.scenario.clone(),
        flags: flags.row(),
        rho: rho.as_ref().map_or(0.0, |r| r.rho),
        front_size: 0,
        f1_min: 0.0,
        f1_max: 0.0,
        f2_min: 0.0,
        f2_max: 0.0,
        f1_selected: evaluation.objectives.f1,
        f2_selected: evaluation.objectives.f2,
        lf: indices.lf,
        p2v: indices.p2v,
        pc: indices.pc,
        total_bev_cost: evaluation.objectives.bev_cost,
        carbon_kg_ev: sum(|o| o.carbon_kg),
        carbon_kg_cs: kg_cs,
        carbon_revenue: sum(|o| o.carbon_revenue) + rev_cs,
        degradation_total: sum(|o| o.degradation),
        v2g_kwh: schedules.iter().map(AgentSchedule::discharged_kwh).sum(),
        min_voltage: evaluation.hours.iter().map(|h| h.min_voltage).fold(f64::INFINITY, f64::min),
        participants: inst.agents.len(),
        rejected: fleet.rejected(),
    };
    let points: Vec<(f64, f64)> = front.iter().map(|p| (p.f1, p.f2)).collect();
    row.set_ranges(&points);

    Ok(ScenarioRun {
        config: cfg.clone(),
        digest,
        fleet,
        instance: inst,
        tariff,
        rho,
        front,
        selected,
        schedules,
        evaluation,
        indices,
        history,
        reference,
        degraded,
        baseline,
        row,
    })
}

fn water_filling_run(inst: &Instance, tariff: &TariffSchedule) -> Result<BaselineRun> {
    let schedules = water_filling(inst);
    let evaluation = inst.evaluate(&schedules)?;
    let indices = load_indices(&evaluation.total_load(), &evaluation.base_load())?;
    let mut valley = 0.0;
    let mut total = 0.0;
    for s in &schedules {
        for (k, &h) in s.hours.iter().enumerate() {
            total += s.p_charge[k];
            if tariff.period_of_hour[h] == Period::Valley {
                valley += s.p_charge[k];
            }
        }
    }
    let valley_share = if total > 0.0 { valley / total } else { 0.0 };
    Ok(BaselineRun { schedules, evaluation, indices, valley_share })
}

/// Run a scenario and write its artifacts into `out_dir`. Files are staged
/// in a temporary directory and moved in only once all of them are written.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path) -> Result<ScenarioRun> {
    let run = simulate(cfg)?;
    staged("output", &run.digest, write_bundle(out_dir, |dir| write_artifacts(&run, dir)))?;
    Ok(run)
}

fn write_bundle<F>(out_dir: &Path, write: F) -> Result<()>
where
    F: FnOnce(&Path) -> Result<Vec<&'static str>>,
{
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let staging = tempfile::Builder::new()
        .prefix(".staging-")
        .tempdir_in(out_dir)
        .map_err(|e| Error::io(out_dir, e))?;
    let names = write(staging.path())?;
    let mut moved: Vec<PathBuf> = Vec::new();
    for name in names {
        let dest = out_dir.join(name);
        if let Err(e) = fs::rename(staging.path().join(name), &dest) {
            for p in &moved {
                let _ = fs::remove_file(p);
            }
            return Err(Error::io(dest, e));
        }
        moved.push(dest);
    }
    Ok(())
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<fs::File>> {
    let path = dir.join(name);
    fs::File::create(&path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn finish(mut w: BufWriter<fs::File>, name: &str) -> Result<()> {
    w.flush().map_err(|e| Error::io(name, e))
}

fn write_artifacts(run: &ScenarioRun, dir: &Path) -> Result<Vec<&'static str>> {
    let mut written = Vec::new();

    let w = create(dir, "fleet.csv")?;
    run.fleet.write_csv(w)?;
    written.push("fleet.csv");

    let mut w = csv::Writer::from_writer(create(dir, "tariff.csv")?);
    w.write_record(["hour", "period", "lambda0", "lambda"])?;
    for h in 0..HOURS {
        let period = match run.tariff.period_of_hour[h] {
            Period::Peak => "peak",
            Period::OffPeak => "offpeak",
            Period::Valley => "valley",
        };
        w.write_record([h.to_string(), period.into(), run.tariff.lambda0[h].to_string(), run.tariff.lambda[h].to_string()])?;
    }
    w.flush().map_err(|e| Error::io("tariff.csv", e))?;
    written.push("tariff.csv");

    if let Some(rho) = &run.rho {
        let mut w = csv::Writer::from_writer(create(dir, "rho.csv")?);
        for p in &rho.points {
            w.serialize(p)?;
        }
        w.flush().map_err(|e| Error::io("rho.csv", e))?;
        written.push("rho.csv");
    }

    #[derive(Serialize)]
    struct Pareto<'a> {
        digest: &'a str,
        seed: u64,
        degraded: bool,
        reference: Option<(f64, f64)>,
        selected: usize,
        front: &'a [FrontPoint],
    }
    let mut w = create(dir, "pareto.json")?;
    serde_json::to_writer_pretty(
        &mut w,
        &Pareto {
            digest: &run.digest,
            seed: run.config.run.seed,
            degraded: run.degraded,
            reference: run.reference,
            selected: run.selected,
            front: &run.front,
        },
    )?;
    finish(w, "pareto.json")?;
    written.push("pareto.json");

    let mut w = csv::Writer::from_writer(create(dir, "convergence.csv")?);
    w.write_record(["generation", "hypervolume", "feasible_count"])?;
    for g in &run.history {
        w.write_record([g.generation.to_string(), g.hypervolume.to_string(), g.feasible_count.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("convergence.csv", e))?;
    written.push("convergence.csv");

    let mut w = csv::Writer::from_writer(create(dir, "schedule.csv")?);
    w.write_record(["agent", "station", "hour", "action", "p_charge_kw", "p_discharge_kw", "soc_end"])?;
    for s in &run.schedules {
        let bus = run.instance.stations[s.station].bus;
        for (k, &h) in s.hours.iter().enumerate() {
            let action = match s.actions[k] {
                Action::Idle => "idle",
                Action::Charge => "charge",
                Action::Discharge => "discharge",
            };
            w.write_record([
                s.agent.to_string(),
                bus.to_string(),
                h.to_string(),
                action.into(),
                s.p_charge[k].to_string(),
                s.p_discharge[k].to_string(),
                s.soc[k + 1].to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("schedule.csv", e))?;
    written.push("schedule.csv");

    let mut w = csv::Writer::from_writer(create(dir, "voltages.csv")?);
    let mut header = vec!["bus".to_string()];
    header.extend((0..HOURS).map(|h| format!("h{h:02}")));
    w.write_record(&header)?;
    for (i, &bus) in run.instance.feeder.bus_ids().iter().enumerate() {
        let mut rec = vec![bus.to_string()];
        rec.extend(run.evaluation.snapshots.iter().map(|s| s.voltages[i].norm().to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("voltages.csv", e))?;
    written.push("voltages.csv");

    let mut w = csv::Writer::from_writer(create(dir, "hourly.csv")?);
    w.write_record([
        "hour", "base_kw", "charge_kw", "discharge_kw", "pv_kw", "dg_kw", "grid_kw", "loss_kw", "min_voltage",
        "residual_kw", "generation_cost", "baseline_charge_kw",
    ])?;
    for (h, r) in run.evaluation.hours.iter().enumerate() {
        w.write_record([
            h.to_string(),
            r.base_kw.to_string(),
            r.charge_kw.to_string(),
            r.discharge_kw.to_string(),
            r.pv_kw.to_string(),
            r.dg_kw.to_string(),
            r.grid_kw.to_string(),
            r.loss_kw.to_string(),
            r.min_voltage.to_string(),
            r.residual_kw.to_string(),
            r.generation_cost.to_string(),
            run.baseline.evaluation.hours[h].charge_kw.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("hourly.csv", e))?;
    written.push("hourly.csv");

    let rows = std::slice::from_ref(&run.row);
    write_report_csv(rows, create(dir, "report.csv")?)?;
    written.push("report.csv");
    let mut w = create(dir, "report.json")?;
    write_report_json(rows, &mut w)?;
    finish(w, "report.json")?;
    written.push("report.json");

    Ok(written)
}

/// One point of a one-axis sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: String,
    #[serde(flatten)]
    pub row: ReportRow,
}

/// Configurations of every point along `axis`, seed held fixed.
pub fn sweep_points(cfg: &ScenarioConfig, axis: SweepAxis) -> Vec<(String, ScenarioConfig)> {
    match axis {
        SweepAxis::Carbon => cfg
            .sweep
            .carbon_prices()
            .into_iter()
            .map(|p| {
                let mut c = cfg.clone();
                c.valuation.carbon.price_per_kg = p;
                (format!("{p:.2}"), c)
            })
            .collect(),
        SweepAxis::Pem => cfg
            .sweep
            .pem_scales
            .iter()
            .map(|&k| {
                let mut c = cfg.clone();
                c.market.pem = cfg.market.pem.scaled(k);
                (format!("{k}"), c)
            })
            .collect(),
        SweepAxis::Rate => cfg
            .sweep
            .rate_tiers
            .iter()
            .map(|&t| {
                let mut c = cfg.clone();
                c.run.rate_tier = t;
                (t.to_string(), c)
            })
            .collect(),
    }
}

/// Run every point of the sweep in memory.
pub fn simulate_sweep(cfg: &ScenarioConfig, axis: SweepAxis) -> Result<Vec<SweepRow>> {
    sweep_points(cfg, axis)
        .into_iter()
        .map(|(value, c)| Ok(SweepRow { axis, value, row: simulate(&c)?.row }))
        .collect()
}

/// Run a sweep and write `sweep.csv` and `sweep.json` into `out_dir`.
pub fn run_sweep(cfg: &ScenarioConfig, axis: SweepAxis, out_dir: &Path) -> Result<Vec<SweepRow>> {
    let rows = simulate_sweep(cfg, axis)?;
    let digest = cfg.digest();
    staged(
        "output",
        &digest,
        write_bundle(out_dir, |dir| {
            let mut w = csv::Writer::from_writer(create(dir, "sweep.csv")?);
            let mut header = vec!["axis", "value"];
            header.extend(REPORT_COLUMNS);
            w.write_record(&header)?;
            for r in &rows {
                let axis = match r.axis {
                    SweepAxis::Carbon => "carbon",
                    SweepAxis::Pem => "pem",
                    SweepAxis::Rate => "rate",
                };
                let mut rec = vec![axis.to_string(), r.value.clone()];
                rec.extend(r.row.record());
                w.write_record(&rec)?;
            }
            w.flush().map_err(|e| Error::io("sweep.csv", e))?;
            let mut j = create(dir, "sweep.json")?;
            serde_json::to_writer_pretty(&mut j, &rows)?;
            finish(j, "sweep.json")?;
            Ok(vec!["sweep.csv", "sweep.json"])
        }),
    )?;
    Ok(rows)
}
