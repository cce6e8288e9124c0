//! Polar Newton-Raphson load flow on the bus admittance matrix, used as an
//! independent reference for the sweep solver.

use bevsched::grid::NetworkModel;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub struct NrSolution {
    /// Complex voltages in the order of `model.buses`, p.u.
    pub voltages: Vec<Complex64>,
    pub loss_kw: f64,
    pub iterations: usize,
}

/// Solve with every non-slack bus as PQ. `load_kva[i]` is the consumption of
/// `model.buses[i]` in kW/kvar.
pub fn solve(model: &NetworkModel, load_kva: &[Complex64]) -> NrSolution {
    let n = model.buses.len();
    let pos = |id: usize| model.buses.iter().position(|b| b.id == id).unwrap();
    let zbase = model.base_kv * model.base_kv * 1000.0 / model.base_kva;
    let mut y = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for br in &model.branches {
        let (i, j) = (pos(br.from), pos(br.to));
        let yb = Complex64::new(1.0, 0.0) / Complex64::new(br.r_ohm / zbase, br.x_ohm / zbase);
        y[i][i] += yb;
        y[j][j] += yb;
        y[i][j] -= yb;
        y[j][i] -= yb;
    }
    let slack = pos(model.slack_bus);
    let pq: Vec<usize> = (0..n).filter(|&i| i != slack).collect();
    let m = pq.len();
    let target: Vec<Complex64> = load_kva.iter().map(|s| -s / model.base_kva).collect();

    let mut vm = vec![1.0; n];
    let mut va = vec![0.0; n];
    vm[slack] = model.slack_voltage;
    let mut iterations = 0;
    loop {
        let v: Vec<Complex64> = (0..n).map(|i| Complex64::from_polar(vm[i], va[i])).collect();
        let s: Vec<Complex64> = (0..n)
            .map(|i| v[i] * (0..n).map(|k| y[i][k] * v[k]).sum::<Complex64>().conj())
            .collect();
        let mut mismatch = DVector::zeros(2 * m);
        for (r, &i) in pq.iter().enumerate() {
            mismatch[r] = target[i].re - s[i].re;
            mismatch[m + r] = target[i].im - s[i].im;
        }
        if mismatch.amax() < 1e-13 || iterations >= 50 {
            let loss: Complex64 = s.iter().sum();
            return NrSolution { voltages: v, loss_kw: loss.re * model.base_kva, iterations };
        }
        iterations += 1;
        let mut jac = DMatrix::zeros(2 * m, 2 * m);
        for (r, &i) in pq.iter().enumerate() {
            for (c, &k) in pq.iter().enumerate() {
                let (g, b) = (y[i][k].re, y[i][k].im);
                if i == k {
                    let (p, q) = (s[i].re, s[i].im);
                    let (gii, bii) = (y[i][i].re, y[i][i].im);
                    jac[(r, c)] = -q - bii * vm[i] * vm[i];
                    jac[(r, m + c)] = p / vm[i] + gii * vm[i];
                    jac[(m + r, c)] = p - gii * vm[i] * vm[i];
                    jac[(m + r, m + c)] = q / vm[i] - bii * vm[i];
                } else {
                    let t = va[i] - va[k];
                    let (sn, cs) = t.sin_cos();
                    jac[(r, c)] = vm[i] * vm[k] * (g * sn - b * cs);
                    jac[(r, m + c)] = vm[i] * (g * cs + b * sn);
                    jac[(m + r, c)] = -vm[i] * vm[k] * (g * cs + b * sn);
                    jac[(m + r, m + c)] = vm[i] * (g * sn - b * cs);
                }
            }
        }
        let dx = jac.lu().solve(&mismatch).expect("singular Jacobian");
        for (r, &i) in pq.iter().enumerate() {
            va[i] += dx[r];
            vm[i] += dx[m + r];
        }
    }
}

/// Closed-form receiving-end voltage magnitude of a two-bus line serving
/// `p + jq` p.u. through `r + jx` p.u. from a 1 p.u. source (high-voltage root).
pub fn two_bus_voltage(r: f64, x: f64, p: f64, q: f64) -> f64 {
    let b = 2.0 * (p * r + q * x) - 1.0;
    let c = (p * p + q * q) * (r * r + x * x);
    ((-b + (b * b - 4.0 * c).sqrt()) / 2.0).sqrt()
}
