//! GRU block with an affine read-out, trained by full-batch gradient
//! descent with backpropagation through time.
//!
//! One step maps the lag window `x = x_L(t)` and the previous state `h`:
//!
//! ```text
//! r = σ(W_ir x + W_hr h + b_r)
//! z = σ(W_iz x + W_hz h + b_z)
//! n = tanh(W_in x + b_n + r ⊙ (W_hn h))
//! h' = (1 − z) ⊙ n + z ⊙ h
//! x̂_{t+1} = w_Aᵀ h' + b_A
//! ```
//!
//! The reset gate only scales the hidden contribution inside `tanh`; there
//! is no hidden-side bias.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::signal::{hankel_from_slice, TimeSeries, TrajectoryMatrix, WindowVector};
use crate::sparse::{sparsify_matrix, SparseSolveReport};

/// Parameters of one GRU block. Also used as the container for gradients.
#[derive(Clone, Debug, PartialEq)]
pub struct GruParams {
    pub w_ir: DMatrix<f64>,
    pub w_iz: DMatrix<f64>,
    pub w_in: DMatrix<f64>,
    pub w_hr: DMatrix<f64>,
    pub w_hz: DMatrix<f64>,
    pub w_hn: DMatrix<f64>,
    pub b_r: DVector<f64>,
    pub b_z: DVector<f64>,
    pub b_n: DVector<f64>,
    pub w_a: DVector<f64>,
    pub b_a: f64,
}

/// Gradients share the parameter layout.
pub type GruGradients = GruParams;

impl GruParams {
    pub fn zeros(hidden: usize, lag: usize) -> Self {
        let mi = || DMatrix::zeros(hidden, lag);
        let mh = || DMatrix::zeros(hidden, hidden);
        let v = || DVector::zeros(hidden);
        Self {
            w_ir: mi(),
            w_iz: mi(),
            w_in: mi(),
            w_hr: mh(),
            w_hz: mh(),
            w_hn: mh(),
            b_r: v(),
            b_z: v(),
            b_n: v(),
            w_a: v(),
            b_a: 0.0,
        }
    }

    /// Every entry uniform in `[−1/√m, 1/√m]`.
    pub fn random<R: Rng>(hidden: usize, lag: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (hidden as f64).sqrt();
        let mut p = Self::zeros(hidden, lag);
        for v in p.values_mut() {
            *v = rng.random_range(-bound..=bound);
        }
        p
    }

    /// Hidden size `m`.
    pub fn hidden(&self) -> usize {
        self.w_ir.nrows()
    }

    /// Input window length `L`.
    pub fn lag(&self) -> usize {
        self.w_ir.ncols()
    }

    /// Checks every array against `(m, L)` and that all entries are finite.
    pub fn validate(&self) -> Result<()> {
        let (m, l) = (self.hidden(), self.lag());
        if m == 0 || l == 0 {
            return Err(Error::Shape("GRU needs m >= 1 and L >= 1".into()));
        }
        let input_ok = [&self.w_ir, &self.w_iz, &self.w_in]
            .iter()
            .all(|w| w.shape() == (m, l));
        let hidden_ok = [&self.w_hr, &self.w_hz, &self.w_hn]
            .iter()
            .all(|w| w.shape() == (m, m));
        let vec_ok = [&self.b_r, &self.b_z, &self.b_n, &self.w_a]
            .iter()
            .all(|v| v.len() == m);
        if !(input_ok && hidden_ok && vec_ok) {
            return Err(Error::Shape(format!(
                "inconsistent GRU parameter shapes for m = {m}, L = {l}"
            )));
        }
        if self.values().any(|v| !v.is_finite()) {
            return Err(Error::Degenerate("non-finite GRU parameter".into()));
        }
        Ok(())
    }

    /// Names of the parameter arrays in serialisation order.
    pub const ARRAY_NAMES: [&'static str; 11] = [
        "w_ir", "w_iz", "w_in", "w_hr", "w_hz", "w_hn", "b_r", "b_z", "b_n", "w_a", "b_a",
    ];

    /// All entries in a fixed order: the matrices column-major, then the vectors, then `b_a`.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.w_ir
            .iter()
            .chain(self.w_iz.iter())
            .chain(self.w_in.iter())
            .chain(self.w_hr.iter())
            .chain(self.w_hz.iter())
            .chain(self.w_hn.iter())
            .chain(self.b_r.iter())
            .chain(self.b_z.iter())
            .chain(self.b_n.iter())
            .chain(self.w_a.iter())
            .chain(std::iter::once(&self.b_a))
            .copied()
    }

    /// Mutable counterpart of [`values`](Self::values), same order.
    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> + '_ {
        self.w_ir
            .iter_mut()
            .chain(self.w_iz.iter_mut())
            .chain(self.w_in.iter_mut())
            .chain(self.w_hr.iter_mut())
            .chain(self.w_hz.iter_mut())
            .chain(self.w_hn.iter_mut())
            .chain(self.b_r.iter_mut())
            .chain(self.b_z.iter_mut())
            .chain(self.b_n.iter_mut())
            .chain(self.w_a.iter_mut())
            .chain(std::iter::once(&mut self.b_a))
    }

    pub fn parameter_count(&self) -> usize {
        let (m, l) = (self.hidden(), self.lag());
        3 * m * l + 3 * m * m + 4 * m + 1
    }

    /// Nonzero counts of `(W_ir, W_iz, W_in)`.
    pub fn input_nnz(&self) -> [usize; 3] {
        let nz = |w: &DMatrix<f64>| w.iter().filter(|v| **v != 0.0).count();
        [nz(&self.w_ir), nz(&self.w_iz), nz(&self.w_in)]
    }

    fn norm(&self) -> f64 {
        self.values().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Hidden state `h(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GruState {
    pub h: DVector<f64>,
}

impl GruState {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            h: DVector::zeros(hidden),
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `out += W x` on column-major storage.
fn gemv_acc(out: &mut [f64], w: &DMatrix<f64>, x: &[f64]) {
    let rows = w.nrows();
    for (col, xi) in w.as_slice().chunks_exact(rows).zip(x) {
        if *xi == 0.0 {
            continue;
        }
        for (o, wji) in out.iter_mut().zip(col) {
            *o += wji * xi;
        }
    }
}

/// `out += Wᵀ v`.
fn gemv_t_acc(out: &mut [f64], w: &DMatrix<f64>, v: &[f64]) {
    let rows = w.nrows();
    for (o, col) in out.iter_mut().zip(w.as_slice().chunks_exact(rows)) {
        *o += col.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// `g += a bᵀ`.
fn outer_acc(g: &mut DMatrix<f64>, a: &[f64], b: &[f64]) {
    let rows = g.nrows();
    for (col, bi) in g.as_mut_slice().chunks_exact_mut(rows).zip(b) {
        if *bi == 0.0 {
            continue;
        }
        for (gji, aj) in col.iter_mut().zip(a) {
            *gji += aj * bi;
        }
    }
}

/// Intermediate values of one step, kept for backpropagation.
struct StepCache {
    h_prev: Vec<f64>,
    r: Vec<f64>,
    z: Vec<f64>,
    n: Vec<f64>,
    /// `W_hn h_prev`.
    u: Vec<f64>,
    h: Vec<f64>,
}

fn step_raw(p: &GruParams, x: &[f64], h_prev: &[f64]) -> StepCache {
    let m = p.hidden();
    let mut ar = p.b_r.as_slice().to_vec();
    gemv_acc(&mut ar, &p.w_ir, x);
    gemv_acc(&mut ar, &p.w_hr, h_prev);
    let mut az = p.b_z.as_slice().to_vec();
    gemv_acc(&mut az, &p.w_iz, x);
    gemv_acc(&mut az, &p.w_hz, h_prev);
    let mut u = vec![0.0; m];
    gemv_acc(&mut u, &p.w_hn, h_prev);
    let mut an = p.b_n.as_slice().to_vec();
    gemv_acc(&mut an, &p.w_in, x);

    let r: Vec<f64> = ar.into_iter().map(sigmoid).collect();
    let z: Vec<f64> = az.into_iter().map(sigmoid).collect();
    let n: Vec<f64> = (0..m).map(|j| (an[j] + r[j] * u[j]).tanh()).collect();
    let h: Vec<f64> = (0..m)
        .map(|j| (1.0 - z[j]) * n[j] + z[j] * h_prev[j])
        .collect();
    StepCache {
        h_prev: h_prev.to_vec(),
        r,
        z,
        n,
        u,
        h,
    }
}

fn readout(p: &GruParams, h: &[f64]) -> f64 {
    p.w_a.iter().zip(h).map(|(w, v)| w * v).sum::<f64>() + p.b_a
}

fn check_dims(p: &GruParams, input_len: usize, state: &GruState) -> Result<()> {
    if input_len != p.lag() {
        return Err(Error::Shape(format!(
            "window of length {input_len} for a GRU with L = {}",
            p.lag()
        )));
    }
    if state.h.len() != p.hidden() {
        return Err(Error::Shape(format!(
            "state of size {} for a GRU with m = {}",
            state.h.len(),
            p.hidden()
        )));
    }
    Ok(())
}

/// One GRU update `h(t−1) → h(t)`.
pub fn gru_step(params: &GruParams, x: &WindowVector, h_prev: &GruState) -> Result<GruState> {
    check_dims(params, x.lag(), h_prev)?;
    let c = step_raw(params, x.entries(), h_prev.h.as_slice());
    Ok(GruState {
        h: DVector::from_vec(c.h),
    })
}

/// Gate activations of one step, exposed for inspection.
#[derive(Clone, Debug, PartialEq)]
pub struct GateValues {
    pub reset: DVector<f64>,
    pub update: DVector<f64>,
    pub candidate: DVector<f64>,
    pub state: GruState,
}

pub fn gru_gates(params: &GruParams, x: &WindowVector, h_prev: &GruState) -> Result<GateValues> {
    check_dims(params, x.lag(), h_prev)?;
    let c = step_raw(params, x.entries(), h_prev.h.as_slice());
    Ok(GateValues {
        reset: DVector::from_vec(c.r),
        update: DVector::from_vec(c.z),
        candidate: DVector::from_vec(c.n),
        state: GruState {
            h: DVector::from_vec(c.h),
        },
    })
}

/// Threads the state through the windows, emitting `w_Aᵀ h(t) + b_A` per step.
pub fn gru_forward(params: &GruParams, windows: &[WindowVector], h0: &GruState) -> Result<Vec<f64>> {
    if windows.is_empty() {
        return Err(Error::Range("GRU forward pass needs at least one window".into()));
    }
    let inputs: Vec<&[f64]> = windows.iter().map(|w| w.entries()).collect();
    Ok(forward_raw(params, &inputs, h0)?.0)
}

/// Forward pass on raw window slices; returns predictions and the final state.
pub(crate) fn forward_raw(
    params: &GruParams,
    inputs: &[&[f64]],
    h0: &GruState,
) -> Result<(Vec<f64>, GruState)> {
    let mut h = h0.h.as_slice().to_vec();
    let mut out = Vec::with_capacity(inputs.len());
    for x in inputs {
        check_dims(params, x.len(), h0)?;
        let c = step_raw(params, x, &h);
        out.push(readout(params, &c.h));
        h = c.h;
    }
    Ok((out, GruState { h: DVector::from_vec(h) }))
}

/// Mean squared one-step error of the block over a window sequence.
pub fn sequence_mse(
    params: &GruParams,
    inputs: &[&[f64]],
    targets: &[f64],
    h0: &GruState,
) -> Result<f64> {
    if inputs.len() != targets.len() || inputs.is_empty() {
        return Err(Error::Shape(format!(
            "{} windows vs {} targets",
            inputs.len(),
            targets.len()
        )));
    }
    let (pred, _) = forward_raw(params, inputs, h0)?;
    Ok(pred
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t).powi(2))
        .sum::<f64>()
        / targets.len() as f64)
}

/// Loss and BPTT gradients of the mean squared error over a sequence.
pub fn gru_gradients(
    params: &GruParams,
    windows: &[WindowVector],
    targets: &[f64],
    h0: &GruState,
) -> Result<(f64, GruGradients)> {
    let inputs: Vec<&[f64]> = windows.iter().map(|w| w.entries()).collect();
    loss_and_gradients(params, &inputs, targets, h0)
}

pub(crate) fn loss_and_gradients(
    p: &GruParams,
    inputs: &[&[f64]],
    targets: &[f64],
    h0: &GruState,
) -> Result<(f64, GruGradients)> {
    if inputs.len() != targets.len() || inputs.is_empty() {
        return Err(Error::Shape(format!(
            "{} windows vs {} targets",
            inputs.len(),
            targets.len()
        )));
    }
    let m = p.hidden();
    let steps = inputs.len();

    let mut caches = Vec::with_capacity(steps);
    let mut h = h0.h.as_slice().to_vec();
    let mut loss = 0.0;
    let mut dy = Vec::with_capacity(steps);
    for (x, t) in inputs.iter().zip(targets) {
        check_dims(p, x.len(), h0)?;
        let c = step_raw(p, x, &h);
        let err = readout(p, &c.h) - t;
        loss += err * err;
        dy.push(2.0 * err / steps as f64);
        h = c.h.clone();
        caches.push(c);
    }
    loss /= steps as f64;

    let mut g = GruParams::zeros(m, p.lag());
    let mut dh_next = vec![0.0; m];
    for k in (0..steps).rev() {
        let c = &caches[k];
        let x = inputs[k];
        g.b_a += dy[k];
        for j in 0..m {
            g.w_a[j] += dy[k] * c.h[j];
        }
        let dh: Vec<f64> = (0..m).map(|j| dh_next[j] + dy[k] * p.w_a[j]).collect();

        let mut dh_prev: Vec<f64> = (0..m).map(|j| dh[j] * c.z[j]).collect();
        let da_n: Vec<f64> = (0..m)
            .map(|j| dh[j] * (1.0 - c.z[j]) * (1.0 - c.n[j] * c.n[j]))
            .collect();
        let da_z: Vec<f64> = (0..m)
            .map(|j| dh[j] * (c.h_prev[j] - c.n[j]) * c.z[j] * (1.0 - c.z[j]))
            .collect();
        let da_r: Vec<f64> = (0..m)
            .map(|j| da_n[j] * c.u[j] * c.r[j] * (1.0 - c.r[j]))
            .collect();
        let du: Vec<f64> = (0..m).map(|j| da_n[j] * c.r[j]).collect();

        outer_acc(&mut g.w_in, &da_n, x);
        outer_acc(&mut g.w_iz, &da_z, x);
        outer_acc(&mut g.w_ir, &da_r, x);
        outer_acc(&mut g.w_hn, &du, &c.h_prev);
        outer_acc(&mut g.w_hz, &da_z, &c.h_prev);
        outer_acc(&mut g.w_hr, &da_r, &c.h_prev);
        for j in 0..m {
            g.b_n[j] += da_n[j];
            g.b_z[j] += da_z[j];
            g.b_r[j] += da_r[j];
        }
        gemv_t_acc(&mut dh_prev, &p.w_hn, &du);
        gemv_t_acc(&mut dh_prev, &p.w_hz, &da_z);
        gemv_t_acc(&mut dh_prev, &p.w_hr, &da_r);
        dh_next = dh_prev;
    }
    Ok((loss, g))
}

/// Affine map of the training range onto `[−1, 1]`: `z = scale·x + offset`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Normalization {
    pub scale: f64,
    pub offset: f64,
}

impl Normalization {
    pub const IDENTITY: Normalization = Normalization {
        scale: 1.0,
        offset: 0.0,
    };

    /// Maps `[min, max]` onto `[−1, 1]`; a constant sample is shifted to 0.
    pub fn fit(values: &[f64]) -> Self {
        let (lo, hi) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(*v), hi.max(*v))
            });
        if hi > lo {
            let scale = 2.0 / (hi - lo);
            Self {
                scale,
                offset: -1.0 - scale * lo,
            }
        } else {
            Self {
                scale: 1.0,
                offset: -lo,
            }
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        self.scale * x + self.offset
    }

    pub fn invert(&self, z: f64) -> f64 {
        (z - self.offset) / self.scale
    }
}

/// Gradient-descent settings for one block.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    /// Hidden size `m`.
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Global gradient-norm clip.
    pub clip_norm: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: 8,
            epochs: 500,
            learning_rate: 0.5,
            clip_norm: 1.0,
            seed: 42,
        }
    }
}

/// Output of [`train_gru`].
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedGru {
    pub params: GruParams,
    pub normalization: Normalization,
    /// Training MSE on the normalised scale before the first and after the last update.
    pub initial_mse: f64,
    pub final_mse: f64,
}

/// Windows and next-sample targets over a normalised sample.
pub(crate) fn training_pairs(values: &[f64], lag: usize) -> (Vec<&[f64]>, Vec<f64>) {
    let inputs = (lag..values.len()).map(|i| &values[i - lag..i]).collect();
    let targets = values[lag..].to_vec();
    (inputs, targets)
}

/// Trains one block on `train` after normalising it to `[−1, 1]`.
pub fn train_gru(train: &TimeSeries, lag: usize, hyper: &TrainConfig) -> Result<TrainedGru> {
    let normalization = Normalization::fit(train.values());
    let z: Vec<f64> = train.values().iter().map(|v| normalization.apply(*v)).collect();
    let (params, initial_mse, final_mse) = train_normalized(&z, lag, hyper)?;
    Ok(TrainedGru {
        params,
        normalization,
        initial_mse,
        final_mse,
    })
}

/// Gradient descent on an already-normalised sample.
pub(crate) fn train_normalized(
    z: &[f64],
    lag: usize,
    hyper: &TrainConfig,
) -> Result<(GruParams, f64, f64)> {
    let m = hyper.hidden;
    if m == 0 || lag == 0 {
        return Err(Error::Config("GRU needs m >= 1 and L >= 1".into()));
    }
    if z.len() < lag + m.max(1) {
        return Err(Error::Range(format!(
            "GRU training with L = {lag}, m = {m} needs at least {} samples, got {}",
            lag + m,
            z.len()
        )));
    }
    if !(hyper.learning_rate > 0.0) || !(hyper.clip_norm > 0.0) {
        return Err(Error::Config(
            "learning rate and clip norm must be positive".into(),
        ));
    }
    let (inputs, targets) = training_pairs(z, lag);
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut params = GruParams::random(m, lag, &mut rng);
    let h0 = GruState::zeros(m);

    let mut initial = None;
    for epoch in 0..hyper.epochs {
        let (loss, grad) = loss_and_gradients(&params, &inputs, &targets, &h0)?;
        if !loss.is_finite() {
            return Err(Error::Training { iteration: epoch });
        }
        initial.get_or_insert(loss);
        let gnorm = grad.norm();
        if !gnorm.is_finite() {
            return Err(Error::Training { iteration: epoch });
        }
        let step = hyper.learning_rate * (hyper.clip_norm / gnorm).min(1.0);
        for (p, g) in params.values_mut().zip(grad.values()) {
            *p -= step * g;
        }
    }
    let final_mse = sequence_mse(&params, &inputs, &targets, &h0)?;
    if !final_mse.is_finite() {
        return Err(Error::Training {
            iteration: hyper.epochs,
        });
    }
    Ok((params, initial.unwrap_or(final_mse), final_mse))
}

/// Block with sparsified input weights plus the three solve reports
/// (`W_ir`, `W_iz`, `W_in`, in that order).
#[derive(Clone, Debug)]
pub struct SparsifiedGru {
    pub params: GruParams,
    pub reports: [SparseSolveReport; 3],
}

/// Replaces each input weight matrix `W` by `Âᵀ` where `Hᵀ Â ≈_δ Hᵀ Wᵀ`.
pub fn sparsify_input_weights(
    params: &GruParams,
    h: &TrajectoryMatrix,
    delta: f64,
) -> Result<SparsifiedGru> {
    params.validate()?;
    if h.lag() != params.lag() {
        return Err(Error::Shape(format!(
            "trajectory matrix with L = {} for a GRU with L = {}",
            h.lag(),
            params.lag()
        )));
    }
    let solve = |w: &DMatrix<f64>| sparsify_matrix(h.data(), &w.transpose(), delta);
    let ir = solve(&params.w_ir)?;
    let iz = solve(&params.w_iz)?;
    let inn = solve(&params.w_in)?;
    let mut out = params.clone();
    out.w_ir = ir.solution.transpose();
    out.w_iz = iz.solution.transpose();
    out.w_in = inn.solution.transpose();
    Ok(SparsifiedGru {
        params: out,
        reports: [ir, iz, inn],
    })
}

/// Trajectory matrix of a normalised sample, for [`sparsify_input_weights`].
pub(crate) fn normalized_trajectory(z: &[f64], lag: usize) -> Result<TrajectoryMatrix> {
    hankel_from_slice(z, lag)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[f64]) -> WindowVector {
        WindowVector::from_entries(v.to_vec(), v.len()).unwrap()
    }

    #[test]
    fn zero_network_is_stationary() {
        let p = GruParams::zeros(3, 2);
        let h = gru_step(&p, &w(&[0.4, -1.0]), &GruState::zeros(3)).unwrap();
        assert_eq!(h.h.as_slice(), &[0.0; 3]);
        let g = gru_gates(&p, &w(&[0.4, -1.0]), &GruState::zeros(3)).unwrap();
        assert!(g.update.iter().all(|z| *z == 0.5));
    }

    #[test]
    fn candidate_bias_only() {
        let mut p = GruParams::zeros(2, 3);
        p.b_n.fill(1.0);
        let h = gru_step(&p, &w(&[1.0, 2.0, 3.0]), &GruState::zeros(2)).unwrap();
        for v in h.h.iter() {
            assert!((v - 0.380_797_078_0).abs() < 1e-10, "{v}");
        }
    }

    #[test]
    fn saturated_update_gate_carries_state() {
        let mut p = GruParams::zeros(2, 1);
        p.b_z.fill(20.0);
        let prev = GruState {
            h: DVector::from_vec(vec![0.3, -0.7]),
        };
        let h = gru_step(&p, &w(&[5.0]), &prev).unwrap();
        assert!((h.h - prev.h).amax() < 1e-8);
    }

    #[test]
    fn shape_errors() {
        let p = GruParams::zeros(2, 3);
        assert!(matches!(
            gru_step(&p, &w(&[1.0]), &GruState::zeros(2)),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            gru_step(&p, &w(&[1.0, 2.0, 3.0]), &GruState::zeros(4)),
            Err(Error::Shape(_))
        ));
        assert!(gru_forward(&p, &[], &GruState::zeros(2)).is_err());
    }

    #[test]
    fn zero_network_predicts_bias() {
        let mut p = GruParams::zeros(3, 2);
        p.b_a = 1.25;
        let ws = vec![w(&[1.0, 2.0]), w(&[2.0, 3.0]), w(&[3.0, -4.0])];
        let out = gru_forward(&p, &ws, &GruState::zeros(3)).unwrap();
        assert_eq!(out, vec![1.25; 3]);
    }

    #[test]
    fn zero_params_zero_targets_zero_gradients() {
        let p = GruParams::zeros(2, 2);
        let ws = vec![w(&[1.0, 2.0]), w(&[2.0, 3.0])];
        let (loss, g) = gru_gradients(&p, &ws, &[0.0, 0.0], &GruState::zeros(2)).unwrap();
        assert_eq!(loss, 0.0);
        assert!(g.values().all(|v| v == 0.0));
    }

    #[test]
    fn normalization_round_trip() {
        let n = Normalization::fit(&[2.0, 6.0, 4.0]);
        assert_eq!(n.apply(2.0), -1.0);
        assert_eq!(n.apply(6.0), 1.0);
        assert!((n.invert(n.apply(3.3)) - 3.3).abs() < 1e-15);
        let c = Normalization::fit(&[3.0, 3.0]);
        assert_eq!(c.apply(3.0), 0.0);
    }

    #[test]
    fn parameter_count_matches_values() {
        let p = GruParams::zeros(3, 4);
        assert_eq!(p.values().count(), p.parameter_count());
    }
}
