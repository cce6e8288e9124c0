/// Area dominated by `points` (first objective maximised, second minimised)
/// and bounded by `reference`. Points outside the reference box add nothing.
pub fn hypervolume(points: &[(f64, f64)], reference: (f64, f64)) -> f64 {
    let mut pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.0 > reference.0 && p.1 < reference.1)
        .copied()
        .collect();
    // sweep from the highest first objective down
    pts.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.total_cmp(&b.1)));
    let mut area = 0.0;
    let mut best_f2 = reference.1;
    for k in 0..pts.len() {
        best_f2 = best_f2.min(pts[k].1);
        let lower = pts.get(k + 1).map(|q| q.0).unwrap_or(reference.0);
        area += (pts[k].0 - lower) * (reference.1 - best_f2);
    }
    area
}

/// Indices of a `k`-subset of mutually non-dominated `points` with maximum
/// hypervolume, computed exactly by dynamic programming. Returned ascending.
pub fn max_hypervolume_subset(points: &[(f64, f64)], k: usize, reference: (f64, f64)) -> Vec<usize> {
    let n = points.len();
    if k >= n {
        return (0..n).collect();
    }
    if k == 0 {
        return Vec::new();
    }
    // Minimisation coordinates clipped to the reference box, sorted by x.
    let rx = -reference.0;
    let ry = reference.1;
    let xy: Vec<(f64, f64)> = points.iter().map(|p| ((-p.0).min(rx), p.1.min(ry))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| xy[a].0.total_cmp(&xy[b].0).then(xy[b].1.total_cmp(&xy[a].1)).then(a.cmp(&b)));

    // best[j][i]: best area of a chain of j+1 points starting at order[i]
    let mut best = vec![vec![f64::NEG_INFINITY; n]; k];
    let mut next = vec![vec![usize::MAX; n]; k];
    for i in 0..n {
        let (x, y) = xy[order[i]];
        best[0][i] = (rx - x) * (ry - y);
    }
    for j in 1..k {
        for i in 0..n {
            let (x, y) = xy[order[i]];
            for l in (i + 1)..n {
                if best[j - 1][l] == f64::NEG_INFINITY {
                    continue;
                }
                let v = (xy[order[l]].0 - x) * (ry - y) + best[j - 1][l];
                if v > best[j][i] {
                    best[j][i] = v;
                    next[j][i] = l;
                }
            }
        }
    }
    let mut start = 0;
    for i in 1..n {
        if best[k - 1][i] > best[k - 1][start] {
            start = i;
        }
    }
    let mut chosen = Vec::with_capacity(k);
    let mut i = start;
    for j in (0..k).rev() {
        chosen.push(order[i]);
        if j > 0 {
            i = next[j][i];
        }
    }
    chosen.sort_unstable();
    chosen
}
