//! Schedule search: chromosome repair, owner-cost dispatch, NSGA-II,
//! weighted selection and the water-filling baseline.

mod encoding;
mod hypervolume;
mod nsga;
mod policies;
mod select;
mod sorting;

use serde::{Deserialize, Serialize};

pub use encoding::{encode, random_gene, repair, snap_fraction, Chromosome, Gene};
pub use hypervolume::{hypervolume, max_hypervolume_subset};
pub use nsga::{evaluate_genes, nsga2_run, Candidate, GenerationStats, NsgaOutcome};
pub use policies::{inner_dispatch, uncoordinated, water_filling};
pub use select::select_weighted;
pub use sorting::{constrained_dominates, crowding_distance, dominates, non_dominated_sort, pareto_filter};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NsgaConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    /// Share of the initial population seeded from the owner-cost dispatch.
    pub seed_share: f64,
    /// Discrete power levels per hour (`k` gives `1/k, ..., 1` of max power); continuous when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_levels: Option<u32>,
    /// Evaluation threads; 0 uses every core. Results do not depend on it.
    #[serde(default)]
    pub workers: usize,
}

impl Default for NsgaConfig {
    fn default() -> Self {
        NsgaConfig {
            population: 100,
            generations: 200,
            crossover_prob: 0.9,
            seed_share: 0.5,
            power_levels: None,
            workers: 0,
        }
    }
}

impl NsgaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::config("population must be at least 2"));
        }
        for (name, v) in [("crossover_prob", self.crossover_prob), ("seed_share", self.seed_share)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Range { name, value: v, min: 0.0, max: 1.0 });
            }
        }
        if self.power_levels == Some(0) {
            return Err(Error::config("power_levels must be positive"));
        }
        Ok(())
    }
}
