mod common;

use bevsched::optimizer::{dominates, nsga2_run, Candidate, NsgaConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-9;

/// Dominance for (max f1, min f2) that ignores differences below `EPS`,
/// so that equal objective values summed in different orders compare equal.
fn dominates_eps(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 >= b.0 - EPS && a.1 <= b.1 + EPS && (a.0 > b.0 + EPS || a.1 < b.1 - EPS)
}

/// Non-dominated set with duplicates merged, sorted by f1.
fn front_of(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut front: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| !points.iter().any(|q| dominates_eps(*q, **p)))
        .copied()
        .collect();
    front.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    front.dedup_by(|a, b| (a.0 - b.0).abs() < EPS && (a.1 - b.1).abs() < EPS);
    front
}

fn same_front(got: &[(f64, f64)], truth: &[(f64, f64)]) -> bool {
    got.len() == truth.len()
        && got.iter().zip(truth).all(|(g, t)| (g.0 - t.0).abs() < EPS && (g.1 - t.1).abs() < EPS)
}

#[test]
fn nsga_front_matches_enumeration() {
    let start = std::time::Instant::now();
    for case in 0..24u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(case);
        let inst = common::small_instance(&mut rng, 2, 4, case % 2 == 1);
        let truth = front_of(&common::enumerate_points(&inst, 1));
        let cfg = NsgaConfig { population: 128, generations: 120, power_levels: Some(1), workers: 1, ..Default::default() };
        let out = nsga2_run(&inst, &cfg, case).unwrap();
        let raw: Vec<(f64, f64)> = out.front.iter().map(Candidate::point).collect();
        assert!(raw.iter().all(|p| !raw.iter().any(|q| dominates(*q, *p))));
        let got = front_of(&raw);
        assert!(same_front(&got, &truth), "case {case}: {} points vs {}\n{got:?}\n{truth:?}", got.len(), truth.len());
    }
    assert!(start.elapsed().as_secs_f64() < 30.0, "{:?}", start.elapsed());
}
