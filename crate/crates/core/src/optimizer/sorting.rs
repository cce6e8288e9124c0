/// `a` dominates `b` with the first objective maximised and the second minimised.
pub fn dominates(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 >= b.0 && a.1 <= b.1 && (a.0 > b.0 || a.1 < b.1)
}

/// Feasibility-first domination: feasible beats infeasible, smaller
/// violation beats larger among infeasible, Pareto domination among feasible.
pub fn constrained_dominates(a: (f64, f64), va: f64, b: (f64, f64), vb: f64) -> bool {
    match (va <= 0.0, vb <= 0.0) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => va < vb,
        (true, true) => dominates(a, b),
    }
}

/// Fast non-dominated sorting into fronts of indices, best front first.
pub fn non_dominated_sort(objs: &[(f64, f64)], violation: &[f64]) -> Vec<Vec<usize>> {
    let n = objs.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if constrained_dominates(objs[i], violation[i], objs[j], violation[j]) {
                dominates_list[i].push(j);
                dominated_by_count[j] += 1;
            } else if constrained_dominates(objs[j], violation[j], objs[i], violation[i]) {
                dominates_list[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each member of `front`, in `front` order.
pub fn crowding_distance(front: &[usize], objs: &[(f64, f64)]) -> Vec<f64> {
    let m = front.len();
    let mut dist = vec![0.0; m];
    if m <= 2 {
        return vec![f64::INFINITY; m];
    }
    for key in [|p: (f64, f64)| p.0, |p: (f64, f64)| p.1] {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| key(objs[front[a]]).total_cmp(&key(objs[front[b]])).then(a.cmp(&b)));
        let lo = key(objs[front[order[0]]]);
        let hi = key(objs[front[order[m - 1]]]);
        dist[order[0]] = f64::INFINITY;
        dist[order[m - 1]] = f64::INFINITY;
        if hi > lo {
            for w in 1..m - 1 {
                let gap = key(objs[front[order[w + 1]]]) - key(objs[front[order[w - 1]]]);
                dist[order[w]] += gap / (hi - lo);
            }
        }
    }
    dist
}

/// Indices of the mutually non-dominated points, first occurrence of each
/// distinct objective vector only, in input order.
pub fn pareto_filter(objs: &[(f64, f64)]) -> Vec<usize> {
    let mut keep: Vec<usize> = Vec::new();
    for (i, &p) in objs.iter().enumerate() {
        if objs.iter().any(|&q| dominates(q, p)) {
            continue;
        }
        if keep.iter().any(|&k| objs[k] == p) {
            continue;
        }
        keep.push(i);
    }
    keep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domination_directions() {
        assert!(dominates((2.0, 1.0), (1.0, 1.0)));
        assert!(dominates((1.0, 0.5), (1.0, 1.0)));
        assert!(!dominates((1.0, 1.0), (1.0, 1.0)));
        assert!(!dominates((2.0, 2.0), (1.0, 1.0)));
        assert!(constrained_dominates((0.0, 9.0), 0.0, (9.0, 0.0), 1.0));
        assert!(constrained_dominates((0.0, 9.0), 0.5, (9.0, 0.0), 1.0));
    }

    #[test]
    fn sorting_layers() {
        let objs = [(3.0, 3.0), (1.0, 1.0), (2.0, 2.0), (1.0, 2.0), (0.0, 5.0)];
        let v = [0.0; 5];
        let fronts = non_dominated_sort(&objs, &v);
        assert_eq!(fronts, vec![vec![0, 1, 2], vec![3], vec![4]]);
        let d = crowding_distance(&fronts[0], &objs);
        assert!(d[0].is_infinite() && d[1].is_infinite());
        assert!((d[2] - 2.0).abs() < 1e-12);
        assert_eq!(pareto_filter(&[(1.0, 1.0), (1.0, 1.0), (0.5, 2.0)]), vec![0]);
    }
}
