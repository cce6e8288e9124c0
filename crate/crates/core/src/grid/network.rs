use std::collections::{HashMap, VecDeque};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, HOURS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusData {
    pub id: usize,
    /// Snapshot (peak) active load, kW.
    pub p_kw: f64,
    /// Snapshot reactive load, kvar.
    pub q_kvar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchData {
    pub from: usize,
    pub to: usize,
    pub r_ohm: f64,
    pub x_ohm: f64,
}

/// Dispatchable gas DG with quadratic cost `a + b P + c P^2` ($/h, P in kW).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgUnit {
    pub bus: usize,
    pub p_min_kw: f64,
    pub p_max_kw: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl DgUnit {
    pub fn cost(&self, p_kw: f64) -> f64 {
        self.a + self.b * p_kw + self.c * p_kw * p_kw
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationData {
    pub bus: usize,
    /// Simultaneous plug count.
    pub plugs: u32,
    /// Installed PV canopy capacity, kW (0 for none).
    pub pv_kw: f64,
}

/// PV unit at a station bus with its realised hourly output (fraction of capacity).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PvUnit {
    pub bus: usize,
    pub capacity_kw: f64,
    pub profile: [f64; HOURS],
}

impl PvUnit {
    pub fn output_kw(&self, hour: usize) -> f64 {
        self.capacity_kw * self.profile[hour]
    }
}

/// Radial feeder description as read from configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkModel {
    pub base_kv: f64,
    pub base_kva: f64,
    pub slack_bus: usize,
    pub slack_voltage: f64,
    /// Multiplier applied on top of `load_shape` to every bus load.
    pub load_scale: f64,
    /// Hourly load as a fraction of the snapshot (daily peak).
    pub load_shape: Vec<f64>,
    pub buses: Vec<BusData>,
    pub branches: Vec<BranchData>,
    #[serde(default)]
    pub dg_units: Vec<DgUnit>,
    #[serde(default)]
    pub stations: Vec<StationData>,
}

impl NetworkModel {
    /// Slack bus 1 feeding one load bus 2 through `r + jx` p.u. Bases are
    /// 1 kV / 1000 kVA so that 1 p.u. impedance is 1 ohm and 1 p.u. power is 1000 kW.
    pub fn two_bus(r_pu: f64, x_pu: f64) -> Self {
        NetworkModel {
            base_kv: 1.0,
            base_kva: 1000.0,
            slack_bus: 1,
            slack_voltage: 1.0,
            load_scale: 1.0,
            load_shape: vec![1.0; HOURS],
            buses: vec![
                BusData { id: 1, p_kw: 0.0, q_kvar: 0.0 },
                BusData { id: 2, p_kw: 0.0, q_kvar: 0.0 },
            ],
            branches: vec![BranchData { from: 1, to: 2, r_ohm: r_pu, x_ohm: x_pu }],
            dg_units: Vec::new(),
            stations: Vec::new(),
        }
    }

    pub fn impedance_base_ohm(&self) -> f64 {
        self.base_kv * self.base_kv * 1000.0 / self.base_kva
    }
}

/// Validated radial topology, oriented away from the slack bus, with
/// impedances in p.u.
#[derive(Debug, Clone)]
pub struct Feeder {
    ids: Vec<usize>,
    index: HashMap<usize, usize>,
    slack: usize,
    slack_voltage: f64,
    base_kva: f64,
    /// Parent bus index; `None` only for the slack bus.
    parent: Vec<Option<usize>>,
    /// Impedance of the branch feeding each bus, p.u. Zero for the slack.
    z_pu: Vec<Complex64>,
    depth: Vec<usize>,
    /// Breadth-first order from the slack bus.
    order: Vec<usize>,
    snapshot: Vec<Complex64>,
    load_shape: [f64; HOURS],
    load_scale: f64,
}

impl Feeder {
    pub fn new(model: &NetworkModel) -> Result<Self> {
        let n = model.buses.len();
        if n == 0 {
            return Err(Error::Topology("network has no buses".into()));
        }
        if !(model.base_kv > 0.0 && model.base_kva > 0.0) {
            return Err(Error::config("base voltage and power must be positive"));
        }
        if model.load_shape.len() != HOURS {
            return Err(Error::config(format!(
                "load shape has {} entries, expected {HOURS}",
                model.load_shape.len()
            )));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, b) in model.buses.iter().enumerate() {
            if index.insert(b.id, i).is_some() {
                return Err(Error::Topology(format!("duplicate bus id {}", b.id)));
            }
        }
        let slack = *index
            .get(&model.slack_bus)
            .ok_or(Error::UnknownBus(model.slack_bus))?;
        if model.branches.len() != n - 1 {
            return Err(Error::Topology(format!(
                "{} branches for {} buses; a radial feeder needs exactly {}",
                model.branches.len(),
                n,
                n - 1
            )));
        }

        let z_base = model.impedance_base_ohm();
        let mut adj: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); n];
        for br in &model.branches {
            if br.r_ohm < 0.0 || br.x_ohm < 0.0 || !br.r_ohm.is_finite() || !br.x_ohm.is_finite() {
                return Err(Error::Topology(format!(
                    "branch {}-{} has negative or non-finite impedance",
                    br.from, br.to
                )));
            }
            let f = *index.get(&br.from).ok_or(Error::UnknownBus(br.from))?;
            let t = *index.get(&br.to).ok_or(Error::UnknownBus(br.to))?;
            if f == t {
                return Err(Error::Topology(format!("self-loop at bus {}", br.from)));
            }
            let z = Complex64::new(br.r_ohm / z_base, br.x_ohm / z_base);
            adj[f].push((t, z));
            adj[t].push((f, z));
        }

        let mut parent = vec![None; n];
        let mut z_pu = vec![Complex64::new(0.0, 0.0); n];
        let mut depth = vec![0; n];
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::from([slack]);
        seen[slack] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &(v, z) in &adj[u] {
                if Some(v) == parent[u] {
                    continue;
                }
                if seen[v] {
                    return Err(Error::Topology(format!(
                        "loop through buses {} and {}",
                        model.buses[u].id, model.buses[v].id
                    )));
                }
                seen[v] = true;
                parent[v] = Some(u);
                z_pu[v] = z;
                depth[v] = depth[u] + 1;
                queue.push_back(v);
            }
        }
        if order.len() != n {
            let orphan = (0..n).find(|&i| !seen[i]).unwrap();
            return Err(Error::Topology(format!(
                "bus {} is not connected to the slack bus",
                model.buses[orphan].id
            )));
        }

        let mut load_shape = [0.0; HOURS];
        load_shape.copy_from_slice(&model.load_shape);
        Ok(Feeder {
            ids: model.buses.iter().map(|b| b.id).collect(),
            index,
            slack,
            slack_voltage: model.slack_voltage,
            base_kva: model.base_kva,
            parent,
            z_pu,
            depth,
            order,
            snapshot: model
                .buses
                .iter()
                .map(|b| Complex64::new(b.p_kw, b.q_kvar))
                .collect(),
            load_shape,
            load_scale: model.load_scale,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn bus_id(&self, idx: usize) -> usize {
        self.ids[idx]
    }

    pub fn bus_ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn index_of(&self, bus: usize) -> Result<usize> {
        self.index.get(&bus).copied().ok_or(Error::UnknownBus(bus))
    }

    pub fn slack_index(&self) -> usize {
        self.slack
    }

    pub fn slack_voltage(&self) -> f64 {
        self.slack_voltage
    }

    pub fn base_kva(&self) -> f64 {
        self.base_kva
    }

    pub fn parent(&self, idx: usize) -> Option<usize> {
        self.parent[idx]
    }

    pub fn branch_impedance_pu(&self, idx: usize) -> Complex64 {
        self.z_pu[idx]
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Root-to-`idx` path of bus indices, slack first.
    pub fn path_from_root(&self, idx: usize) -> Vec<usize> {
        let mut path = vec![idx];
        let mut cur = idx;
        while let Some(p) = self.parent[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Number of branches on the tree path between two buses.
    pub fn hop_distance(&self, a: usize, b: usize) -> Result<usize> {
        let (mut u, mut v) = (self.index_of(a)?, self.index_of(b)?);
        let mut hops = 0;
        while self.depth[u] > self.depth[v] {
            u = self.parent[u].unwrap();
            hops += 1;
        }
        while self.depth[v] > self.depth[u] {
            v = self.parent[v].unwrap();
            hops += 1;
        }
        while u != v {
            u = self.parent[u].unwrap();
            v = self.parent[v].unwrap();
            hops += 2;
        }
        Ok(hops)
    }

    /// Snapshot loads per bus index, kW/kvar.
    pub fn snapshot_load(&self) -> &[Complex64] {
        &self.snapshot
    }

    pub fn load_factor_at(&self, hour: usize) -> f64 {
        self.load_shape[hour] * self.load_scale
    }

    /// Base consumption per bus index at `hour`.
    pub fn base_load_at(&self, hour: usize) -> Vec<Complex64> {
        let k = self.load_factor_at(hour);
        self.snapshot.iter().map(|s| s * k).collect()
    }

    pub fn total_base_load_kw(&self, hour: usize) -> f64 {
        self.snapshot.iter().map(|s| s.re).sum::<f64>() * self.load_factor_at(hour)
    }
}
