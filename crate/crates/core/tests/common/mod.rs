//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spars::gru::{gru_gradients, sequence_mse, GruParams, GruState};
use spars::signal::WindowVector;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// One GRU step written out entry by entry.
pub fn gru_step_oracle(p: &GruParams, x: &[f64], h: &[f64]) -> Vec<f64> {
    let m = h.len();
    let mut out = vec![0.0; m];
    for j in 0..m {
        let mut ar = p.b_r[j];
        let mut az = p.b_z[j];
        let mut ain = p.b_n[j];
        for (k, xk) in x.iter().enumerate() {
            ar += p.w_ir[(j, k)] * xk;
            az += p.w_iz[(j, k)] * xk;
            ain += p.w_in[(j, k)] * xk;
        }
        let mut hr = 0.0;
        let mut hz = 0.0;
        let mut hn = 0.0;
        for (k, hk) in h.iter().enumerate() {
            hr += p.w_hr[(j, k)] * hk;
            hz += p.w_hz[(j, k)] * hk;
            hn += p.w_hn[(j, k)] * hk;
        }
        let r = sigmoid(ar + hr);
        let z = sigmoid(az + hz);
        let n = (ain + r * hn).tanh();
        out[j] = (1.0 - z) * n + z * h[j];
    }
    out
}

/// Random windows and targets for a sequence of `len` steps.
pub fn random_sequence(
    r: &mut impl Rng,
    lag: usize,
    len: usize,
) -> (Vec<WindowVector>, Vec<f64>) {
    let windows = (0..len)
        .map(|t| {
            let e: Vec<f64> = (0..lag).map(|_| r.random_range(-1.0..1.0)).collect();
            WindowVector::from_entries(e, lag + t).unwrap()
        })
        .collect();
    let targets = (0..len).map(|_| r.random_range(-1.0..1.0)).collect();
    (windows, targets)
}

/// Largest relative gap between BPTT gradients and central differences,
/// relative error `|a − f| / max(|a|, |f|, floor)`.
pub fn gradient_check(
    p: &GruParams,
    windows: &[WindowVector],
    targets: &[f64],
    h0: &GruState,
    step: f64,
    floor: f64,
) -> f64 {
    let (_, g) = gru_gradients(p, windows, targets, h0).unwrap();
    let analytic: Vec<f64> = g.values().collect();
    let inputs: Vec<&[f64]> = windows.iter().map(|w| w.entries()).collect();
    let mut worst: f64 = 0.0;
    for (i, a) in analytic.iter().enumerate() {
        let mut plus = p.clone();
        *plus.values_mut().nth(i).unwrap() += step;
        let mut minus = p.clone();
        *minus.values_mut().nth(i).unwrap() -= step;
        let fp = sequence_mse(&plus, &inputs, targets, h0).unwrap();
        let fm = sequence_mse(&minus, &inputs, targets, h0).unwrap();
        let f = (fp - fm) / (2.0 * step);
        let rel = (a - f).abs() / a.abs().max(f.abs()).max(floor);
        worst = worst.max(rel);
    }
    worst
}

/// Least-squares residual of `y` on the columns of `a` listed in `support`.
pub fn support_residual(a: &DMatrix<f64>, y: &[f64], support: &[usize]) -> f64 {
    let y = DMatrix::from_column_slice(y.len(), 1, y);
    if support.is_empty() {
        return y.norm();
    }
    let sub = DMatrix::from_fn(a.nrows(), support.len(), |i, j| a[(i, support[j])]);
    let x = spars::sparse::dense_lsq(&sub, &y).unwrap();
    (sub * x - y).norm()
}

/// Smallest support size reaching residual `≤ delta·‖y‖`, by enumerating
/// every subset of columns in order of size.
pub fn min_support_size(a: &DMatrix<f64>, y: &[f64], delta: f64) -> usize {
    let n = a.ncols();
    let target = delta * y.iter().map(|v| v * v).sum::<f64>().sqrt();
    for k in 0..=n {
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let s: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
            if support_residual(a, y, &s) <= target {
                return k;
            }
        }
    }
    n
}

/// Random `rows × cols` matrix of rank at most `rank`.
pub fn low_rank(r: &mut impl Rng, rows: usize, cols: usize, rank: usize) -> DMatrix<f64> {
    let u = DMatrix::from_fn(rows, rank, |_, _| r.random_range(-1.0..1.0));
    let v = DMatrix::from_fn(rank, cols, |_, _| r.random_range(-1.0..1.0));
    u * v
}
