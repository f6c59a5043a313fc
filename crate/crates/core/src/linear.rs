//! Sparse linear autoregressor and its companion-matrix form.
//!
//! Coefficients are stored most-recent-first: `c[0]` multiplies `x_t`,
//! `c[L-1]` multiplies `x_{t-L+1}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::signal::{hankel_from_slice, TimeSeries, WindowVector};
use crate::sparse::{dense_lsq, sparse_lsq};

/// Matrix powers up to this exponent use plain repeated multiplication.
const DIRECT_POWER_LIMIT: usize = 64;

/// Coefficients `(c_1, ..., c_L)` of `x_{t+1} ≈ c_1 x_t + ... + c_L x_{t-L+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArCoefficients {
    c: Vec<f64>,
    nnz: usize,
    delta: f64,
    residual: f64,
}

impl ArCoefficients {
    /// Wraps hand-set coefficients (no fit metadata).
    pub fn new(c: Vec<f64>) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::Range("an AR model needs L >= 1".into()));
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::Degenerate("non-finite AR coefficient".into()));
        }
        let nnz = c.iter().filter(|v| **v != 0.0).count();
        Ok(Self {
            c,
            nnz,
            delta: 0.0,
            residual: 0.0,
        })
    }

    pub(crate) fn with_fit(mut self, delta: f64, residual: f64) -> Self {
        self.delta = delta;
        self.residual = residual;
        self
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    pub fn lag(&self) -> usize {
        self.c.len()
    }

    pub fn nnz(&self) -> usize {
        self.nnz
    }

    /// Threshold used when fitting; 0 for hand-set or dense models.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Frobenius norm of the in-sample fitting residual.
    pub fn fit_residual(&self) -> f64 {
        self.residual
    }
}

/// Design matrix of the AR system on `values` (all samples but the last
/// form windows, the samples after each window are targets). Column `i`
/// multiplies `c_{i+1}`, so column order is most-recent lag first.
fn ar_system(values: &[f64], lag: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = values.len();
    if lag == 0 || n < lag + 2 {
        return Err(Error::Range(format!(
            "AR fit with L = {lag} needs at least L + 2 = {} samples, got {n}",
            lag + 2
        )));
    }
    // H_L(Σ_0)ᵀ with Σ_0 = x_1..x_{N-1}; its columns run oldest lag first.
    let ht = hankel_from_slice(&values[..n - 1], lag)?.into_data().transpose();
    let design = DMatrix::from_fn(ht.nrows(), lag, |r, i| ht[(r, lag - 1 - i)]);
    let target = DMatrix::from_column_slice(n - lag, 1, &values[lag..]);
    Ok((design, target))
}

/// Sparse AR fit of lag `L` on `train`.
pub fn fit_ar(train: &TimeSeries, lag: usize, delta: f64) -> Result<ArCoefficients> {
    let (design, target) = ar_system(train.values(), lag)?;
    let rep = sparse_lsq(&design, &target, delta, None)?;
    Ok(ArCoefficients::new(rep.solution.column(0).iter().copied().collect())?
        .with_fit(delta, rep.residual_frobenius))
}

/// Dense least-squares AR fit of lag `L` (minimum-norm when rank deficient).
pub fn fit_dense_ar(train: &TimeSeries, lag: usize) -> Result<ArCoefficients> {
    let (design, target) = ar_system(train.values(), lag)?;
    let x = dense_lsq(&design, &target)?;
    let residual = (&design * &x - &target).norm();
    Ok(ArCoefficients::new(x.column(0).iter().copied().collect())?.with_fit(0.0, residual))
}

/// `Σ c_i · x_{t-i+1}` on an oldest-first window.
pub fn predict_linear(coeffs: &ArCoefficients, w: &WindowVector) -> Result<f64> {
    predict_slice(coeffs, w.entries())
}

pub(crate) fn predict_slice(coeffs: &ArCoefficients, entries: &[f64]) -> Result<f64> {
    if entries.len() != coeffs.lag() {
        return Err(Error::Shape(format!(
            "window of length {} for an AR model with L = {}",
            entries.len(),
            coeffs.lag()
        )));
    }
    Ok(coeffs
        .c
        .iter()
        .zip(entries.iter().rev())
        .map(|(c, x)| c * x)
        .sum())
}

/// One-step in-sample residuals `x_{t+1} - L(x_L(t))` for `t = L..N-1`.
pub fn one_step_residuals(coeffs: &ArCoefficients, series: &TimeSeries) -> Result<Vec<f64>> {
    let lag = coeffs.lag();
    let x = series.values();
    if x.len() <= lag {
        return Err(Error::Range(format!(
            "need more than L = {lag} samples, got {}",
            x.len()
        )));
    }
    (lag..x.len())
        .map(|i| Ok(x[i] - predict_slice(coeffs, &x[i - lag..i])?))
        .collect()
}

/// The `L × L` matrix form of a linear AR model: ones on the superdiagonal,
/// `(c_L, ..., c_1)` along the bottom row.
#[derive(Clone, Debug, PartialEq)]
pub struct CompanionMatrix {
    data: DMatrix<f64>,
}

pub fn companion(coeffs: &ArCoefficients) -> CompanionMatrix {
    let lag = coeffs.lag();
    let mut data = DMatrix::zeros(lag, lag);
    for i in 0..lag - 1 {
        data[(i, i + 1)] = 1.0;
    }
    for (j, c) in coeffs.c.iter().rev().enumerate() {
        data[(lag - 1, j)] = *c;
    }
    CompanionMatrix { data }
}

impl CompanionMatrix {
    /// Wraps an arbitrary square matrix, e.g. for diagnostics on hand-built operators.
    pub fn from_matrix(data: DMatrix<f64>) -> Result<Self> {
        if !data.is_square() || data.is_empty() {
            return Err(Error::Shape(format!(
                "companion matrix must be square and nonempty, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Self { data })
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn lag(&self) -> usize {
        self.data.nrows()
    }

    /// `ê_{L,L}ᵀ C_L x_L(t)`.
    pub fn predict(&self, w: &WindowVector) -> Result<f64> {
        if w.lag() != self.lag() {
            return Err(Error::Shape(format!(
                "window of length {} for a {}x{} companion matrix",
                w.lag(),
                self.lag(),
                self.lag()
            )));
        }
        let x = DVector::from_column_slice(w.entries());
        Ok(self.data.row(self.lag() - 1).dot(&x.transpose()))
    }

    /// `C_L^s`.
    pub fn power(&self, s: usize) -> DMatrix<f64> {
        matrix_power(&self.data, s)
    }
}

/// Square matrix power; repeated multiplication for small exponents,
/// binary exponentiation beyond.
pub(crate) fn matrix_power(m: &DMatrix<f64>, s: usize) -> DMatrix<f64> {
    let n = m.nrows();
    if s <= DIRECT_POWER_LIMIT {
        let mut acc = DMatrix::identity(n, n);
        for _ in 0..s {
            acc = &acc * m;
        }
        return acc;
    }
    let mut acc = DMatrix::identity(n, n);
    let mut base = m.clone();
    let mut e = s;
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// Residual of the shift identity `H_L(Σ_0)ᵀ (C_L^S)ᵀ = H_L(Σ̃_0)ᵀ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftConsistency {
    /// Frobenius norm of the difference.
    pub residual: f64,
    /// `‖H_L(Σ̃_0)‖_F`, the scale for [`relative`](Self::relative).
    pub reference_norm: f64,
}

impl ShiftConsistency {
    pub fn relative(&self) -> f64 {
        if self.reference_norm == 0.0 {
            self.residual
        } else {
            self.residual / self.reference_norm
        }
    }
}

/// How exactly the linear model propagates the signal `S` steps ahead.
///
/// `Σ_0` takes the first `N - S` samples and `Σ̃_0` the same count shifted
/// by `S`.
pub fn shift_consistency(
    coeffs: &ArCoefficients,
    series: &TimeSeries,
    shift: usize,
) -> Result<ShiftConsistency> {
    let lag = coeffs.lag();
    let x = series.values();
    if shift == 0 {
        return Err(Error::Range("shift S must be >= 1".into()));
    }
    if x.len() < lag + shift {
        return Err(Error::Range(format!(
            "shift S = {shift} with L = {lag} needs at least {} samples, got {}",
            lag + shift,
            x.len()
        )));
    }
    let n0 = x.len() - shift;
    let base = hankel_from_slice(&x[..n0], lag)?.into_data();
    let shifted = hankel_from_slice(&x[shift..], lag)?.into_data();
    let propagated = companion(coeffs).power(shift) * base;
    Ok(ShiftConsistency {
        residual: (propagated - &shifted).norm(),
        reference_norm: shifted.norm(),
    })
}
