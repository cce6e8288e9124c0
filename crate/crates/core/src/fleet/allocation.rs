use super::{FleetConfig, Group};
use crate::{Error, Result};

/// BEV count placed at one home node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeAllocation {
    pub bus: usize,
    pub group: Group,
    pub count: usize,
}

/// Integer apportionment of `total` proportional to `weights` by the
/// largest-remainder rule. Ties on the remainder go to the lower index.
pub fn largest_remainder(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || !(sum > 0.0) {
        return vec![0; weights.len()];
    }
    let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&i, &j| {
        let (ri, rj) = (quotas[i] - quotas[i].floor(), quotas[j] - quotas[j].floor());
        rj.total_cmp(&ri).then(i.cmp(&j))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Spread `cfg.n_bevs` over home nodes.
///
/// Group totals are `n_bevs * share` rounded by largest remainder; within a
/// group each node receives a share proportional to its daily base energy.
/// `base_loads` lists `(bus, daily kWh)`; buses outside every segment get no
/// vehicles. Output is ordered by group, then by segment listing order.
pub fn allocate_counts(cfg: &FleetConfig, base_loads: &[(usize, f64)]) -> Result<Vec<NodeAllocation>> {
    let shares = cfg.group_shares.as_array();
    let group_totals = largest_remainder(cfg.n_bevs, &shares);
    let mut out = Vec::new();
    for (g, group) in Group::ALL.into_iter().enumerate() {
        let nodes: Vec<(usize, f64)> = cfg
            .segments
            .iter()
            .filter(|s| s.group == group)
            .flat_map(|s| s.buses.iter().copied())
            .map(|bus| {
                let load = base_loads
                    .iter()
                    .find(|(b, _)| *b == bus)
                    .map(|(_, e)| *e)
                    .ok_or(Error::UnknownBus(bus))?;
                Ok((bus, load))
            })
            .collect::<Result<_>>()?;
        let weights: Vec<f64> = nodes.iter().map(|(_, e)| *e).collect();
        if shares[g] > 0.0 && !(weights.iter().sum::<f64>() > 0.0) {
            return Err(Error::config(format!(
                "group {group:?} has share {} but no base load",
                shares[g]
            )));
        }
        for ((bus, _), count) in nodes.iter().zip(largest_remainder(group_totals[g], &weights)) {
            out.push(NodeAllocation { bus: *bus, group, count });
        }
    }
    Ok(out)
}
