//! Signal containers, sliding windows, Hankel trajectory matrices and
//! autocorrelation-based lag / approximate-period estimation.
//!
//! All public indices are 1-based: sample `t` of a series is `x_t` with
//! `t = 1..=len`, and the window `x_L(t)` holds `(x_{t-L+1}, ..., x_t)`
//! oldest-first.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A finite, real-valued sampled signal.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    name: String,
}

impl TimeSeries {
    /// Builds a series, rejecting empty input and non-finite samples.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Range("a time series needs at least one sample".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i + 1 });
        }
        Ok(Self {
            values,
            name: String::new(),
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Index of the first sample. Always 1.
    pub fn origin_index(&self) -> usize {
        1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Never true; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Raw samples, `values()[0] == x_1`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `x_t` for 1-based `t`.
    pub fn at(&self, t: usize) -> Option<f64> {
        t.checked_sub(1).and_then(|i| self.values.get(i).copied())
    }

    /// Sub-sample `{x_from, ..., x_to}` (1-based, inclusive), re-indexed from 1.
    pub fn sample(&self, from: usize, to: usize) -> Result<TimeSeries> {
        if from == 0 || from > to || to > self.len() {
            return Err(Error::Range(format!(
                "sample [{from}, {to}] outside 1..={}",
                self.len()
            )));
        }
        Ok(TimeSeries {
            values: self.values[from - 1..to].to_vec(),
            name: self.name.clone(),
        })
    }

    /// First `n` samples.
    pub fn head(&self, n: usize) -> Result<TimeSeries> {
        self.sample(1, n)
    }
}

/// The lag-`L` window `x_L(t)`, oldest sample first.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowVector {
    entries: Vec<f64>,
    t: usize,
}

impl WindowVector {
    /// Wraps raw entries as the window ending at `t`. Requires `t >= entries.len() >= 1`.
    pub fn from_entries(entries: Vec<f64>, t: usize) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Range("window length must be positive".into()));
        }
        if t < entries.len() {
            return Err(Error::Range(format!(
                "window anchor t = {t} must be >= L = {}",
                entries.len()
            )));
        }
        Ok(Self { entries, t })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Anchor index `t` (1-based).
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn lag(&self) -> usize {
        self.entries.len()
    }

    /// Most recent sample `x_t`.
    pub fn latest(&self) -> f64 {
        *self.entries.last().expect("windows are nonempty")
    }

    /// Drops the oldest sample and appends `next`, advancing the anchor by one.
    pub fn push(&mut self, next: f64) {
        self.entries.remove(0);
        self.entries.push(next);
        self.t += 1;
    }
}

/// `x_L(t) = (x_{t-L+1}, ..., x_t)`.
pub fn window(series: &TimeSeries, lag: usize, t: usize) -> Result<WindowVector> {
    if lag == 0 {
        return Err(Error::Range("lag L must be >= 1".into()));
    }
    if lag > series.len() {
        return Err(Error::Range(format!(
            "lag L = {lag} exceeds series length N = {}",
            series.len()
        )));
    }
    if t < lag {
        return Err(Error::Range(format!("anchor t = {t} is below L = {lag}")));
    }
    if t > series.len() {
        return Err(Error::Range(format!(
            "anchor t = {t} exceeds series length N = {}",
            series.len()
        )));
    }
    Ok(WindowVector {
        entries: series.values[t - lag..t].to_vec(),
        t,
    })
}

/// Hankel trajectory matrix `H_L(Σ_N)`: row `i` holds `x_i, ..., x_{N-L+i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryMatrix {
    data: DMatrix<f64>,
    lag: usize,
    samples: usize,
}

impl TrajectoryMatrix {
    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<f64> {
        self.data
    }

    /// Window length `L` (row count).
    pub fn lag(&self) -> usize {
        self.lag
    }

    /// Sample length `N` the matrix was built from.
    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Number of windows, `N - L + 1`.
    pub fn columns(&self) -> usize {
        self.data.ncols()
    }
}

pub fn hankel(series: &TimeSeries, lag: usize) -> Result<TrajectoryMatrix> {
    hankel_from_slice(series.values(), lag)
}

pub(crate) fn hankel_from_slice(values: &[f64], lag: usize) -> Result<TrajectoryMatrix> {
    let n = values.len();
    if lag == 0 || lag > n {
        return Err(Error::Range(format!(
            "trajectory matrix needs 1 <= L <= N, got L = {lag}, N = {n}"
        )));
    }
    let cols = n - lag + 1;
    let data = DMatrix::from_fn(lag, cols, |i, j| values[i + j]);
    Ok(TrajectoryMatrix {
        data,
        lag,
        samples: n,
    })
}

/// Sample autocorrelation `ρ(0..=max_lag)` of the mean-centred series with
/// the biased `1/N` normalisation.
pub fn autocorrelation(series: &TimeSeries, max_lag: usize) -> Result<Vec<f64>> {
    acf(series.values(), max_lag)
}

fn acf(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if max_lag >= n {
        return Err(Error::Range(format!(
            "max_lag = {max_lag} must be below the series length {n}"
        )));
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let c0 = centred.iter().map(|v| v * v).sum::<f64>();
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    if c0 <= (1e-12 * scale).powi(2) * n as f64 {
        return Err(Error::Degenerate("zero variance series".into()));
    }
    Ok((0..=max_lag)
        .map(|k| {
            if k == 0 {
                return 1.0;
            }
            centred[..n - k]
                .iter()
                .zip(&centred[k..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / c0
        })
        .collect())
}

/// Significance floor a lag must clear to count as an ACF peak.
pub fn peak_threshold(n: usize) -> f64 {
    0.2_f64.max(2.0 / (n as f64).sqrt())
}

/// Local maxima `ℓ >= 2` of the ACF that clear [`peak_threshold`], in lag order.
fn acf_peaks(rho: &[f64], n: usize) -> Vec<usize> {
    let floor = peak_threshold(n);
    (2..rho.len().saturating_sub(1))
        .filter(|&l| rho[l] > rho[l - 1] && rho[l] >= rho[l + 1] && rho[l] >= floor)
        .collect()
}

/// Why [`estimate_lag`] fell back to `floor(N/4)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LagFallback {
    /// No ACF lag cleared the peak rule.
    NoPeak,
    /// The series is constant, so the ACF is undefined.
    ZeroVariance,
}

/// Result of lag estimation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LagEstimate {
    pub lag: usize,
    pub fallback: Option<LagFallback>,
}

/// First dominant positive ACF peak, falling back to `floor(N/4)`.
pub fn estimate_lag(series: &TimeSeries) -> Result<LagEstimate> {
    let n = series.len();
    if n < 8 {
        return Err(Error::Range(format!(
            "lag estimation needs at least 8 samples, got {n}"
        )));
    }
    let fallback = |why| LagEstimate {
        lag: (n / 4).max(1),
        fallback: Some(why),
    };
    let rho = match acf(series.values(), n / 2) {
        Ok(rho) => rho,
        Err(Error::Degenerate(_)) => return Ok(fallback(LagFallback::ZeroVariance)),
        Err(e) => return Err(e),
    };
    Ok(match acf_peaks(&rho, n).first() {
        Some(&lag) => LagEstimate {
            lag,
            fallback: None,
        },
        None => fallback(LagFallback::NoPeak),
    })
}

/// Approximate-period profile of a sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AepProfile {
    pub epsilon: f64,
    /// Approximate period `T`.
    pub period: usize,
    /// Start `S` of the approximately periodic tail; `N + 1` when none was found.
    pub tail_start: usize,
    pub satisfied: bool,
}

/// Smallest `S` such that `|x_{t+kT} - x_t| <= epsilon` for every `t >= S`
/// and every `k >= 1` with `t + kT <= N`.
pub fn tail_start(series: &TimeSeries, period: usize, epsilon: f64) -> usize {
    let x = series.values();
    let n = x.len();
    if period == 0 {
        return n + 1;
    }
    // Scan from the end: the last offending t fixes S.
    for i in (0..n).rev() {
        let bad = (i + period..n)
            .step_by(period)
            .any(|j| (x[j] - x[i]).abs() > epsilon);
        if bad {
            return i + 2;
        }
    }
    1
}

/// Checks the approximate-periodicity inequality on the tail starting at `s`.
pub fn is_aep(series: &TimeSeries, period: usize, s: usize, epsilon: f64) -> bool {
    period > 0 && s >= 1 && tail_start(series, period, epsilon) <= s
}

/// Estimates `(T, S)` for an approximately eventually periodic sample.
///
/// Candidate periods are the ACF peaks in lag order; the first one whose
/// tail passes the AEP inequality while still spanning at least two periods
/// wins. If none does, every `T <= N/2` is tried in increasing order.
pub fn estimate_period(series: &TimeSeries, epsilon: f64) -> AepProfile {
    let n = series.len();
    let peaks = if n >= 4 {
        acf(series.values(), n / 2)
            .map(|rho| acf_peaks(&rho, n))
            .unwrap_or_default()
    } else {
        Vec::new()
    };

    let try_period = |period: usize| -> Option<AepProfile> {
        if 2 * period > n {
            return None;
        }
        let s = tail_start(series, period, epsilon);
        (s + 2 * period <= n + 1).then_some(AepProfile {
            epsilon,
            period,
            tail_start: s,
            satisfied: true,
        })
    };

    peaks
        .iter()
        .copied()
        .chain(1..=n / 2)
        .find_map(try_period)
        .unwrap_or(AepProfile {
            epsilon,
            period: peaks.first().copied().unwrap_or(1),
            tail_start: n + 1,
            satisfied: false,
        })
}
