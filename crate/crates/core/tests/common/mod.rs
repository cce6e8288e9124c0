#![allow(dead_code)]

pub mod newton;

use bevsched::evaluation::{AgentSlot, Instance, StationSite};
use bevsched::grid::{BranchData, BusData, Feeder, NetworkModel, SweepOptions};
use bevsched::optimizer::{evaluate_genes, Gene};
use bevsched::valuation::{Action, SocLimits};
use bevsched::HOURS;
use num_complex::Complex64;
use rand::Rng;

/// Three-bus feeder, one station at the far end, agents plugged in for
/// `window` consecutive hours starting at random times.
pub fn small_instance<R: Rng>(rng: &mut R, agents: usize, window: usize, v2g: bool) -> Instance {
    let mut m = NetworkModel::two_bus(0.01, 0.005);
    m.buses.push(BusData { id: 3, p_kw: 0.0, q_kvar: 0.0 });
    m.branches.push(BranchData { from: 2, to: 3, r_ohm: 0.02, x_ohm: 0.01 });
    let feeder = Feeder::new(&m).unwrap();
    let base_load = (0..HOURS)
        .map(|_| {
            let k: f64 = rng.random_range(0.5..1.0);
            vec![Complex64::new(0.0, 0.0), Complex64::new(60.0 * k, 20.0 * k), Complex64::new(40.0 * k, 10.0 * k)]
        })
        .collect();
    let prices: [f64; HOURS] = std::array::from_fn(|_| [0.06, 0.10, 0.14][rng.random_range(0..3)]);
    let agents = (0..agents)
        .map(|i| {
            let start = rng.random_range(0..HOURS);
            let hours = (0..window).map(|k| (start + k) % HOURS).collect();
            let soc0 = rng.random_range(0.2..0.4);
            let target = soc0 + rng.random_range(0.0..0.1);
            AgentSlot::new(i, 0, hours, rng.random_range(30.0..60.0), rng.random_range(5.0..11.0), soc0, target)
        })
        .collect();
    Instance {
        feeder,
        agents,
        stations: vec![StationSite { bus: 3, plugs: 10, pv_kw: [0.0; HOURS] }],
        prices,
        grid_price: prices,
        grid_capacity_kw: 1e4,
        dg_units: Vec::new(),
        base_load,
        soc: SocLimits::default(),
        eta_charge: 0.9,
        eta_discharge: 0.9,
        v2g,
        degradation: None,
        carbon: None,
        loss_price: 0.1,
        sweep: SweepOptions::default(),
    }
}

/// Every gene a slot can hold.
pub fn gene_alphabet(v2g: bool, levels: u32) -> Vec<Gene> {
    let mut out = vec![Gene::IDLE];
    let mut actions = vec![Action::Charge];
    if v2g {
        actions.push(Action::Discharge);
    }
    for action in actions {
        for l in 1..=levels {
            out.push(Gene { action, fraction: l as f64 / levels as f64 });
        }
    }
    out
}

/// Objective points of every feasible genotype.
pub fn enumerate_points(inst: &Instance, levels: u32) -> Vec<(f64, f64)> {
    let alphabet = gene_alphabet(inst.v2g, levels);
    let lens: Vec<usize> = inst.agents.iter().map(|a| a.hours.len()).collect();
    let total: usize = lens.iter().sum();
    let combos = alphabet.len().pow(total as u32);
    let mut points = Vec::new();
    for mut code in 0..combos {
        let mut genes = Vec::with_capacity(lens.len());
        for &n in &lens {
            let mut g = Vec::with_capacity(n);
            for _ in 0..n {
                g.push(alphabet[code % alphabet.len()]);
                code /= alphabet.len();
            }
            genes.push(g);
        }
        let c = evaluate_genes(inst, genes).unwrap();
        if c.feasible() {
            points.push(c.point());
        }
    }
    points
}
