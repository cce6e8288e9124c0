use std::collections::HashSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::encoding::{encode, random_gene, repair, snap_fraction, Chromosome, Gene};
use super::hypervolume::{hypervolume, max_hypervolume_subset};
use super::policies::{inner_dispatch, uncoordinated};
use super::sorting::{crowding_distance, non_dominated_sort};
use super::NsgaConfig;
use crate::evaluation::{AgentSlot, Instance, Objectives};
use crate::rng::{stream, Domain};
use crate::valuation::{Action, AgentSchedule};
use crate::{Error, Result};

/// Violation charged to a candidate whose load flow does not converge.
const DIVERGED: f64 = 1e6;

#[derive(Debug, Clone)]
pub struct Candidate {
    pub genes: Chromosome,
    pub schedules: Vec<AgentSchedule>,
    pub objectives: Objectives,
    pub violation: f64,
}

impl Candidate {
    pub fn feasible(&self) -> bool {
        self.violation <= 0.0
    }

    pub fn point(&self) -> (f64, f64) {
        (self.objectives.f1, self.objectives.f2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub hypervolume: f64,
    pub feasible_count: usize,
}

#[derive(Debug, Clone)]
pub struct NsgaOutcome {
    /// Final rank-0 members with distinct objective vectors, by ascending f1.
    pub front: Vec<Candidate>,
    /// True when no feasible candidate was found and the front holds the least-violating ones.
    pub degraded: bool,
    pub history: Vec<GenerationStats>,
    /// Hypervolume reference point `(f1, f2)`.
    pub reference: (f64, f64),
}

/// Repair and evaluate one chromosome.
pub fn evaluate_genes(inst: &Instance, genes: Chromosome) -> Result<Candidate> {
    let schedules: Vec<AgentSchedule> = inst
        .agents
        .iter()
        .zip(genes.iter())
        .map(|(slot, g)| repair(inst, slot, g))
        .collect();
    match inst.evaluate(&schedules) {
        Ok(ev) => Ok(Candidate {
            genes,
            schedules,
            objectives: ev.objectives,
            violation: ev.violation_sum(),
        }),
        Err(Error::Divergence { .. }) => Ok(Candidate {
            genes,
            schedules,
            objectives: Objectives { f1: 0.0, f2: 0.0, bev_cost: 0.0 },
            violation: DIVERGED,
        }),
        Err(e) => Err(e),
    }
}

struct Ranked {
    rank: Vec<usize>,
    crowding: Vec<f64>,
}

fn rank_population(pop: &[Candidate]) -> Ranked {
    let objs: Vec<(f64, f64)> = pop.iter().map(Candidate::point).collect();
    let viol: Vec<f64> = pop.iter().map(|c| c.violation).collect();
    let mut rank = vec![0; pop.len()];
    let mut crowding = vec![0.0; pop.len()];
    for (r, front) in non_dominated_sort(&objs, &viol).into_iter().enumerate() {
        let d = crowding_distance(&front, &objs);
        for (k, &i) in front.iter().enumerate() {
            rank[i] = r;
            crowding[i] = d[k];
        }
    }
    Ranked { rank, crowding }
}

fn tournament(pop: &[Candidate], ranked: &Ranked, rng: &mut ChaCha8Rng) -> usize {
    let a = rng.random_range(0..pop.len());
    let b = rng.random_range(0..pop.len());
    let key = |i: usize| (pop[i].feasible(), pop[i].violation, ranked.rank[i], ranked.crowding[i]);
    let (ka, kb) = (key(a), key(b));
    let a_wins = if ka.0 != kb.0 {
        ka.0
    } else if !ka.0 && ka.1 != kb.1 {
        ka.1 < kb.1
    } else if ka.2 != kb.2 {
        ka.2 < kb.2
    } else if ka.3 != kb.3 {
        ka.3 > kb.3
    } else {
        a <= b
    };
    if a_wins {
        a
    } else {
        b
    }
}

fn crossover(p1: &Chromosome, p2: &Chromosome, levels: Option<u32>, rng: &mut ChaCha8Rng) -> (Chromosome, Chromosome) {
    let mut c1 = p1.clone();
    let mut c2 = p2.clone();
    for (a, (g1, g2)) in c1.iter_mut().zip(c2.iter_mut()).enumerate() {
        for k in 0..g1.len() {
            let (x, y) = (p1[a][k], p2[a][k]);
            let swap: bool = rng.random();
            let beta: f64 = rng.random();
            let (act1, act2) = if swap { (y.action, x.action) } else { (x.action, y.action) };
            g1[k] = blended(act1, beta * x.fraction + (1.0 - beta) * y.fraction, levels);
            g2[k] = blended(act2, (1.0 - beta) * x.fraction + beta * y.fraction, levels);
        }
    }
    (c1, c2)
}

fn blended(action: Action, fraction: f64, levels: Option<u32>) -> Gene {
    match action {
        Action::Idle => Gene::IDLE,
        _ => Gene { action, fraction: snap_fraction(fraction, levels) },
    }
}

fn mutate(genes: &mut Chromosome, rate: f64, v2g: bool, levels: Option<u32>, rng: &mut ChaCha8Rng) {
    for g in genes.iter_mut().flat_map(|a| a.iter_mut()) {
        if rng.random::<f64>() < rate {
            *g = random_gene(rng, v2g, levels);
        }
    }
}

fn random_chromosome(inst: &Instance, levels: Option<u32>, rng: &mut ChaCha8Rng) -> Chromosome {
    inst.agents
        .iter()
        .map(|s| (0..s.hours.len()).map(|_| random_gene(rng, inst.v2g, levels)).collect())
        .collect()
}

/// Initial population: one uncoordinated seed, a share built from the
/// owner-cost dispatch (the first verbatim, the rest mixed agent by agent with
/// random genes), and random chromosomes for the remainder. Seeds are snapped
/// to the power levels when those are discrete.
fn initial_population(inst: &Instance, cfg: &NsgaConfig, rng: &mut ChaCha8Rng) -> Vec<Chromosome> {
    let n = cfg.population;
    let levels = cfg.power_levels;
    let seed_genes = |s: &AgentSlot, sched: &AgentSchedule| -> Vec<Gene> {
        let genes = encode(s, sched);
        match levels {
            Some(_) => genes.into_iter().map(|g| blended(g.action, g.fraction, levels)).collect(),
            None => genes,
        }
    };
    let unco: Chromosome = inst.agents.iter().map(|s| seed_genes(s, &uncoordinated(inst, s))).collect();
    let inner: Chromosome = inst
        .agents
        .iter()
        .map(|s| seed_genes(s, &inner_dispatch(inst, s, &inst.prices)))
        .collect();
    let seeded = ((n as f64 * cfg.seed_share).round() as usize).clamp(1, n);
    let mut pop = vec![unco];
    for i in 1..n {
        let mut c = random_chromosome(inst, cfg.power_levels, rng);
        if i < seeded {
            let keep = if i == 1 { 1.0 } else { rng.random::<f64>() };
            for (a, genes) in c.iter_mut().enumerate() {
                if rng.random::<f64>() < keep {
                    *genes = inner[a].clone();
                }
            }
        }
        pop.push(c);
    }
    pop.truncate(n);
    pop
}

fn feasible_points(pop: &[Candidate], rank: Option<&[usize]>) -> Vec<(f64, f64)> {
    pop.iter()
        .enumerate()
        .filter(|(i, c)| c.feasible() && rank.is_none_or(|r| r[*i] == 0))
        .map(|(_, c)| c.point())
        .collect()
}

fn reference_point(pop: &[Candidate]) -> (f64, f64) {
    let mut pts = feasible_points(pop, None);
    if pts.is_empty() {
        pts = pop.iter().map(Candidate::point).collect();
    }
    let (lo1, hi1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p.0), h.max(p.0)));
    let (lo2, hi2) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p.1), h.max(p.1)));
    let span = |lo: f64, hi: f64| (hi - lo).max(0.1 * lo.abs().max(hi.abs())).max(1e-9);
    (lo1 - span(lo1, hi1), hi2 + span(lo2, hi2))
}

/// NSGA-II over (maximise f1, minimise f2).
///
/// Offspring come from feasibility-first binary tournaments, uniform crossover
/// of actions with blended power fractions, and per-gene mutation at rate
/// `1 / genes`. Survivors are taken front by front; a partially admitted
/// front is cut by crowding distance, except an overfull first front, which
/// keeps its maximum-hypervolume subset so that the hypervolume never drops.
/// Candidates repeating an objective vector already admitted only fill slots
/// left over after every front.
pub fn nsga2_run(inst: &Instance, cfg: &NsgaConfig, seed: u64) -> Result<NsgaOutcome> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::config(format!("worker pool: {e}")))?;
    let mut rng = stream(seed, Domain::Optimizer, 0);
    let levels = cfg.power_levels;
    let num_genes: usize = inst.agents.iter().map(|s| s.hours.len()).sum();
    let rate = 1.0 / num_genes.max(1) as f64;

    let eval_all = |batch: Vec<Chromosome>| -> Result<Vec<Candidate>> {
        pool.install(|| batch.into_par_iter().map(|g| evaluate_genes(inst, g)).collect())
    };

    let mut pop = eval_all(initial_population(inst, cfg, &mut rng))?;
    let reference = reference_point(&pop);
    let mut ranked = rank_population(&pop);
    let stats = |generation: usize, pop: &[Candidate], ranked: &Ranked| GenerationStats {
        generation,
        hypervolume: hypervolume(&feasible_points(pop, Some(&ranked.rank)), reference),
        feasible_count: pop.iter().filter(|c| c.feasible()).count(),
    };
    let mut history = vec![stats(0, &pop, &ranked)];

    for generation in 1..=cfg.generations {
        let mut children = Vec::with_capacity(cfg.population + 1);
        while children.len() < cfg.population {
            let a = tournament(&pop, &ranked, &mut rng);
            let b = tournament(&pop, &ranked, &mut rng);
            let (mut c1, mut c2) = if rng.random::<f64>() < cfg.crossover_prob {
                crossover(&pop[a].genes, &pop[b].genes, levels, &mut rng)
            } else {
                (pop[a].genes.clone(), pop[b].genes.clone())
            };
            mutate(&mut c1, rate, inst.v2g, levels, &mut rng);
            mutate(&mut c2, rate, inst.v2g, levels, &mut rng);
            children.push(c1);
            children.push(c2);
        }
        children.truncate(cfg.population);
        let offspring = eval_all(children)?;

        let combined: Vec<Candidate> = pop.into_iter().chain(offspring).collect();
        let objs: Vec<(f64, f64)> = combined.iter().map(Candidate::point).collect();
        let viol: Vec<f64> = combined.iter().map(|c| c.violation).collect();
        let mut survivors: Vec<usize> = Vec::with_capacity(cfg.population);
        let mut seen: HashSet<(u64, u64)> = HashSet::new();
        let mut repeats: Vec<usize> = Vec::new();
        for (r, members) in non_dominated_sort(&objs, &viol).into_iter().enumerate() {
            let room = cfg.population - survivors.len();
            if room == 0 {
                break;
            }
            let (front, dup): (Vec<usize>, Vec<usize>) =
                members.into_iter().partition(|&i| seen.insert((objs[i].0.to_bits(), objs[i].1.to_bits())));
            repeats.extend(dup);
            if front.len() <= room {
                survivors.extend(&front);
            } else if r == 0 && combined[front[0]].feasible() {
                let pts: Vec<(f64, f64)> = front.iter().map(|&i| objs[i]).collect();
                survivors.extend(max_hypervolume_subset(&pts, room, reference).into_iter().map(|k| front[k]));
            } else {
                let d = crowding_distance(&front, &objs);
                let mut order: Vec<usize> = (0..front.len()).collect();
                order.sort_by(|&x, &y| d[y].total_cmp(&d[x]).then(front[x].cmp(&front[y])));
                survivors.extend(order.into_iter().take(room).map(|k| front[k]));
            }
        }
        let room = cfg.population - survivors.len();
        survivors.extend(repeats.into_iter().take(room));
        survivors.sort_unstable();
        let mut slots: Vec<Option<Candidate>> = combined.into_iter().map(Some).collect();
        pop = survivors.into_iter().map(|i| slots[i].take().unwrap()).collect();
        ranked = rank_population(&pop);
        history.push(stats(generation, &pop, &ranked));
    }

    let any_feasible = pop.iter().any(Candidate::feasible);
    let mut front: Vec<Candidate> = Vec::new();
    for (i, c) in pop.iter().enumerate() {
        if ranked.rank[i] != 0 || (any_feasible && !c.feasible()) {
            continue;
        }
        if front.iter().any(|f| f.point() == c.point()) {
            continue;
        }
        front.push(c.clone());
    }
    front.sort_by(|a, b| a.objectives.f1.total_cmp(&b.objectives.f1).then(a.objectives.f2.total_cmp(&b.objectives.f2)));
    Ok(NsgaOutcome { front, degraded: !any_feasible, history, reference })
}
