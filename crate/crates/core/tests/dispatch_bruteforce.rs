use bevsched::grid::DgUnit;
use bevsched::market::{economic_dispatch, GridImport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_unit<R: Rng>(rng: &mut R) -> DgUnit {
    let p_min = if rng.random_bool(0.3) { rng.random_range(0.0..50.0f64).round() } else { 0.0 };
    DgUnit {
        bus: 1,
        p_min_kw: p_min,
        p_max_kw: p_min + rng.random_range(50.0..400.0f64).round(),
        a: rng.random_range(0.0..5.0),
        b: rng.random_range(0.02..0.12),
        c: if rng.random_bool(0.1) { 0.0 } else { rng.random_range(1e-5..3e-4) },
    }
}

/// Cheapest split of `demand` between two sources with costs `c1`, `c2`,
/// searching the first source's output on a 0.1 kW grid.
fn brute<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(demand: f64, lo1: f64, hi1: f64, lo2: f64, hi2: f64, c1: F, c2: G) -> Option<f64> {
    let steps = ((hi1 - lo1) / 0.1).round() as usize;
    let mut best: Option<f64> = None;
    for k in 0..=steps {
        let p1 = (lo1 + 0.1 * k as f64).min(hi1);
        let p2 = demand - p1;
        if p2 < lo2 - 1e-9 || p2 > hi2 + 1e-9 {
            continue;
        }
        let cost = c1(p1) + c2(p2);
        best = Some(best.map_or(cost, |b: f64| b.min(cost)));
    }
    best
}

#[test]
fn two_dg_units_match_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let no_grid = GridImport { price: 1.0, capacity_kw: 0.0 };
    let mut checked = 0;
    while checked < 200 {
        let (u1, u2) = (random_unit(&mut rng), random_unit(&mut rng));
        let lo = u1.p_min_kw + u2.p_min_kw;
        let hi = u1.p_max_kw + u2.p_max_kw;
        let demand = (rng.random_range(lo..=hi) * 10.0f64).round() / 10.0;
        let d = economic_dispatch(demand, &[u1.clone(), u2.clone()], &no_grid).unwrap();
        let best = brute(demand, u1.p_min_kw, u1.p_max_kw, u2.p_min_kw, u2.p_max_kw, |p| u1.cost(p), |p| u2.cost(p)).unwrap();
        assert!((d.cost - best).abs() <= 0.01, "{u1:?} {u2:?} demand {demand}: {} vs {best}", d.cost);
        assert!((d.dg_kw.iter().sum::<f64>() + d.grid_kw - demand).abs() < 1e-6);
        checked += 1;
    }
}

#[test]
fn dg_and_grid_match_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let u = random_unit(&mut rng);
        let grid = GridImport { price: rng.random_range(0.03..0.15), capacity_kw: rng.random_range(100.0..600.0f64).round() };
        let demand = (rng.random_range(u.p_min_kw..=u.p_max_kw + grid.capacity_kw) * 10.0f64).round() / 10.0;
        let d = economic_dispatch(demand, std::slice::from_ref(&u), &grid).unwrap();
        let best = brute(demand, u.p_min_kw, u.p_max_kw, 0.0, grid.capacity_kw, |p| u.cost(p), |p| grid.price * p).unwrap();
        assert!((d.cost - best).abs() <= 0.01, "{u:?} {grid:?} demand {demand}: {} vs {best}", d.cost);
    }
}

#[test]
fn demand_outside_the_range_is_rejected() {
    let u = DgUnit { bus: 1, p_min_kw: 20.0, p_max_kw: 100.0, a: 0.0, b: 0.05, c: 1e-4 };
    let grid = GridImport { price: 0.1, capacity_kw: 50.0 };
    assert!(economic_dispatch(10.0, std::slice::from_ref(&u), &grid).is_err());
    assert!(economic_dispatch(150.5, std::slice::from_ref(&u), &grid).is_err());
    assert!(economic_dispatch(150.0, std::slice::from_ref(&u), &grid).is_ok());
}
