use crate::{Error, Result};

/// Weighted pick from a front of `(f1, f2)` points: the benefit is negated
/// into a cost, both objectives are min-max normalised over the front, and the
/// smallest `alpha * cost1 + (1 - alpha) * f2_norm` wins. Ties go to the
/// higher benefit, then to the earlier member.
pub fn select_weighted(front: &[(f64, f64)], alpha: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Range { name: "alpha", value: alpha, min: 0.0, max: 1.0 });
    }
    if front.is_empty() {
        return Err(Error::config("cannot select from an empty front"));
    }
    let norm = |vals: Vec<f64>| -> Vec<f64> {
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        vals.iter().map(|v| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 }).collect()
    };
    let c1 = norm(front.iter().map(|p| -p.0).collect());
    let c2 = norm(front.iter().map(|p| p.1).collect());
    let score: Vec<f64> = (0..front.len()).map(|i| alpha * c1[i] + (1.0 - alpha) * c2[i]).collect();
    let mut best = 0;
    for i in 1..front.len() {
        let better = score[i] < score[best] - 1e-12
            || ((score[i] - score[best]).abs() <= 1e-12 && front[i].0 > front[best].0);
        if better {
            best = i;
        }
    }
    Ok(best)
}
