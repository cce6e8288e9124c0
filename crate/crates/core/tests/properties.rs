mod common;

use bevsched::config::ScenarioConfig;
use bevsched::fleet::largest_remainder;
use bevsched::market::{adjust_prices, elastic_demand, tou_cost, Pem, Period, RhoSearch, TariffConfig, TariffSchedule};
use bevsched::metrics::load_indices;
use bevsched::optimizer::{crowding_distance, dominates, hypervolume, non_dominated_sort, random_gene, repair};
use bevsched::valuation::{degradation_cost, soc_step, Action, DegradationParams, SocLimits};
use bevsched::HOURS;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn points() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0..100.0f64, 0.0..100.0f64), 1..40)
}

proptest! {
    #[test]
    fn soc_telescopes(steps in prop::collection::vec((0u8..3, 0.0..11.0f64), 1..24), soc0 in 0.05..0.95f64, cap in 20.0..100.0f64) {
        let lim = SocLimits::default();
        let mut soc = soc0;
        let mut net = 0.0;
        for (a, p) in steps {
            let action = [Action::Idle, Action::Charge, Action::Discharge][a as usize];
            let (pc, pd) = match action { Action::Charge => (p, 0.0), Action::Discharge => (0.0, p), Action::Idle => (0.0, 0.0) };
            let next = soc_step(soc, action, pc, pd, cap, 0.9, 0.9, &lim);
            let delta = (0.9 * pc - lim.discharge_coefficient(0.9) * pd) / cap;
            prop_assert!((next - soc - delta).abs() < 1e-12);
            net += delta;
            soc = next;
        }
        prop_assert!((soc - soc0 - net).abs() < 1e-9);
    }

    #[test]
    fn largest_remainder_is_exact(total in 0usize..2000, weights in prop::collection::vec(0.01..10.0f64, 1..40)) {
        let counts = largest_remainder(total, &weights);
        prop_assert_eq!(counts.iter().sum::<usize>(), total);
        let sum: f64 = weights.iter().sum();
        for (c, w) in counts.iter().zip(&weights) {
            let quota = total as f64 * w / sum;
            prop_assert!((*c as f64) >= quota.floor() && (*c as f64) <= quota.floor() + 1.0);
        }
    }

    #[test]
    fn sorting_partitions_into_nested_fronts(pts in points()) {
        let fronts = non_dominated_sort(&pts, &vec![0.0; pts.len()]);
        let mut seen = vec![false; pts.len()];
        for (r, f) in fronts.iter().enumerate() {
            for &i in f {
                prop_assert!(!seen[i]);
                seen[i] = true;
                prop_assert!(!f.iter().any(|&j| dominates(pts[j], pts[i])));
                if r > 0 {
                    prop_assert!(fronts[r - 1].iter().any(|&j| dominates(pts[j], pts[i])));
                }
            }
            let d = crowding_distance(f, &pts);
            prop_assert_eq!(d.len(), f.len());
            prop_assert!(d.iter().all(|x| *x >= 0.0));
        }
        prop_assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn hypervolume_grows_with_points(pts in points(), extra in (0.0..100.0f64, 0.0..100.0f64)) {
        let reference = (-1.0, 101.0);
        let before = hypervolume(&pts, reference);
        let mut more = pts.clone();
        more.push(extra);
        prop_assert!(hypervolume(&more, reference) >= before - 1e-9);
        prop_assert!(before >= 0.0 && before <= 102.0 * 102.0);
    }

    #[test]
    fn zero_rho_is_neutral_and_peak_falls_with_rho(d0 in prop::array::uniform24(0.0..500.0f64), r1 in 0.0..20.0f64, r2 in 0.0..20.0f64) {
        let base = TariffSchedule::baseline(&TariffConfig::default()).unwrap();
        let search = RhoSearch::default();
        let pem = Pem::default();
        let t0 = adjust_prices(&base, 0.0, &search).unwrap();
        let d = elastic_demand(&d0, &t0, &pem).unwrap();
        prop_assert_eq!(d, d0);
        prop_assert_eq!(tou_cost(&d0, &d, &t0.lambda0, &t0.lambda).1, 0.0);
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let peak = |rho: f64| -> f64 {
            let t = adjust_prices(&base, rho, &search).unwrap();
            let d = elastic_demand(&d0, &t, &pem).unwrap();
            base.hours_in(Period::Peak).map(|h| d[h]).sum()
        };
        prop_assert!(peak(hi) <= peak(lo) + 1e-9);
    }

    #[test]
    fn degradation_is_linear(e1 in 0.0..500.0f64, e2 in 0.0..500.0f64, cap in 20.0..120.0f64) {
        let p = DegradationParams::default();
        let sum = degradation_cost(e1 + e2, &p, cap);
        prop_assert!((sum - degradation_cost(e1, &p, cap) - degradation_cost(e2, &p, cap)).abs() < 1e-9 * (1.0 + sum));
        prop_assert_eq!(degradation_cost(0.0, &p, cap), 0.0);
    }

    #[test]
    fn load_indices_stay_in_range(total in prop::array::uniform24(1.0..5000.0f64), base in prop::array::uniform24(1.0..5000.0f64)) {
        let li = load_indices(&total, &base).unwrap();
        prop_assert!(li.lf > 0.0 && li.lf <= 100.0 + 1e-9);
        prop_assert!(li.p2v >= 0.0 && li.p2v < 100.0);
        prop_assert!(li.pc < 100.0);
    }

    #[test]
    fn repaired_genes_always_pass_the_audit(seed in any::<u64>(), v2g in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = common::small_instance(&mut rng, 3, 10, v2g);
        for slot in &inst.agents {
            let genes: Vec<_> = (0..slot.hours.len()).map(|_| random_gene(&mut rng, v2g, None)).collect();
            let s = repair(&inst, slot, &genes);
            let mut v = Vec::new();
            inst.audit_agent(slot, &s, &mut v);
            prop_assert!(v.is_empty(), "{:?}", v);
            prop_assert!(s.departure_soc() >= slot.target_soc.min(inst.soc.max) - 1e-9);
        }
    }

    #[test]
    fn pv_output_is_non_negative_and_dark_at_night(seed in any::<u64>(), station in 0usize..8) {
        let pv = ScenarioConfig::defaults().pv;
        let profile = pv.profile(seed, station).unwrap();
        for (h, f) in profile.iter().enumerate() {
            prop_assert!(*f >= 0.0);
            if pv.clear_sky(h) == 0.0 {
                prop_assert_eq!(*f, 0.0);
            }
        }
        prop_assert_eq!(profile.len(), HOURS);
    }
}
