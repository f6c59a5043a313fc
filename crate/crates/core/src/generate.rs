//! Synthetic fixtures. Every generator is deterministic given its seed.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixtureKind {
    /// `A·sin(2πt/P)`.
    Sine,
    /// `1, −1, 1, ...`.
    Alternating,
    /// Random head of `head` samples, then a `P`-periodic tail with noise in `±ε/4`.
    Aep,
    /// Two harmonics of period `P` plus Gaussian noise of standard deviation `noise`.
    NoisyPeriodic,
    /// Exact linear recurrence, by default `x_{t+1} = 2cos(2π/P)x_t − x_{t−1}`.
    Recurrence,
}

impl FixtureKind {
    pub const ALL: [FixtureKind; 5] = [
        FixtureKind::Sine,
        FixtureKind::Alternating,
        FixtureKind::Aep,
        FixtureKind::NoisyPeriodic,
        FixtureKind::Recurrence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FixtureKind::Sine => "sine",
            FixtureKind::Alternating => "alternating",
            FixtureKind::Aep => "aep",
            FixtureKind::NoisyPeriodic => "noisy-periodic",
            FixtureKind::Recurrence => "recurrence",
        }
    }
}

impl fmt::Display for FixtureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FixtureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FixtureKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown fixture kind `{s}` (expected one of: {})",
                    FixtureKind::ALL.map(|k| k.name()).join(", ")
                ))
            })
    }
}

/// Generator parameters; fields a kind does not use are ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct FixtureParams {
    pub n: usize,
    pub period: usize,
    pub amplitude: f64,
    /// Length of the aperiodic head (`aep`).
    pub head: usize,
    /// Tail tolerance (`aep`).
    pub epsilon: f64,
    /// Noise standard deviation (`noisy-periodic`).
    pub noise: f64,
    /// Most-recent-first recurrence coefficients (`recurrence`).
    pub coefficients: Option<Vec<f64>>,
    pub seed: u64,
}

impl Default for FixtureParams {
    fn default() -> Self {
        Self {
            n: 400,
            period: 20,
            amplitude: 1.0,
            head: 30,
            epsilon: 0.01,
            noise: 0.1,
            coefficients: None,
            seed: 42,
        }
    }
}

pub fn generate(kind: FixtureKind, p: &FixtureParams) -> Result<Vec<f64>> {
    if p.n == 0 {
        return Err(Error::Config("n must be >= 1".into()));
    }
    if p.period == 0 {
        return Err(Error::Config("period must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let w = 2.0 * PI / p.period as f64;
    let out = match kind {
        FixtureKind::Sine => (1..=p.n).map(|t| p.amplitude * (w * t as f64).sin()).collect(),
        FixtureKind::Alternating => (0..p.n)
            .map(|i| if i % 2 == 0 { p.amplitude } else { -p.amplitude })
            .collect(),
        FixtureKind::Aep => {
            if !(p.epsilon >= 0.0) {
                return Err(Error::Config("epsilon must be >= 0".into()));
            }
            let pattern: Vec<f64> = (0..p.period)
                .map(|_| p.amplitude * rng.random_range(-1.0..=1.0))
                .collect();
            let mut v = Vec::with_capacity(p.n);
            for i in 0..p.n {
                if i < p.head {
                    v.push(3.0 * p.amplitude * rng.random_range(-1.0..=1.0));
                } else {
                    let e = if p.epsilon > 0.0 {
                        rng.random_range(-p.epsilon / 4.0..=p.epsilon / 4.0)
                    } else {
                        0.0
                    };
                    v.push(pattern[(i - p.head) % p.period] + e);
                }
            }
            v
        }
        FixtureKind::NoisyPeriodic => {
            if !(p.noise >= 0.0) {
                return Err(Error::Config("noise must be >= 0".into()));
            }
            (1..=p.n)
                .map(|t| {
                    let t = t as f64;
                    let clean = p.amplitude * ((w * t).sin() + 0.5 * (2.0 * w * t + 0.3).sin());
                    let e: f64 = if p.noise > 0.0 {
                        p.noise * rng.sample::<f64, _>(StandardNormal)
                    } else {
                        0.0
                    };
                    clean + e
                })
                .collect()
        }
        FixtureKind::Recurrence => {
            let c = p
                .coefficients
                .clone()
                .unwrap_or_else(|| vec![2.0 * w.cos(), -1.0]);
            if c.is_empty() || c.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config("recurrence needs finite coefficients".into()));
            }
            let l = c.len();
            let mut v: Vec<f64> = (1..=l.min(p.n))
                .map(|t| p.amplitude * (w * t as f64).sin())
                .collect();
            while v.len() < p.n {
                let k = v.len();
                let next = c.iter().enumerate().map(|(j, cj)| cj * v[k - 1 - j]).sum();
                v.push(next);
            }
            v
        }
    };
    Ok(out)
}
