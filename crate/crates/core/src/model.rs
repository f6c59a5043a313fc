//! The full semilinear model: a sparse AR block and GRU blocks, fitted
//! independently, combined by a sparse-fitted mixing layer.
//!
//! Fitting runs five stages in order:
//!
//! 0. lag estimation from the ACF (unless overridden),
//! 1. sparse AR fit on the fitting split `Σ_I`,
//! 2. GRU block training on `Σ_I`,
//! 3. sparsification of the input weights of the leading blocks,
//! 4. mixing weights by sparse least squares on the mixing split `Σ_M`.
//!
//! The AR block works on raw samples. GRU blocks see samples normalised to
//! `[−1, 1]` over `Σ_I` and their outputs are mapped back before mixing, so
//! every mixing weight acts on raw-scale predictions.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gru::{
    forward_raw, normalized_trajectory, sparsify_input_weights, train_normalized, GruParams,
    GruState, Normalization, TrainConfig,
};
use crate::linear::{fit_ar, predict_slice, ArCoefficients};
use crate::signal::{estimate_lag, LagFallback, TimeSeries, WindowVector};
use crate::sparse::{sparse_lsq, thresholded_rank};
use crate::spectra::{ap_diagnose, ApDiagnosis};

/// Stage names in execution order.
pub const STAGES: [&str; 5] = ["lag", "linear", "gru", "sparsify", "mixing"];

/// Settings for [`fit_spars`].
#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    /// Fixed lag; estimated from the ACF when `None`.
    pub lag: Option<usize>,
    pub delta: f64,
    /// Fraction of the sample used to fit the blocks (`Σ_I`).
    pub fit_fraction: f64,
    /// Fraction used to fit the mixing weights (`Σ_M`); the rest is held out.
    pub mix_fraction: f64,
    /// Number of GRU blocks.
    pub blocks: usize,
    /// How many leading blocks get sparsified input weights.
    pub sparse_blocks: usize,
    /// Include the linear block. Disabled blocks contribute a zero column.
    pub linear_block: bool,
    pub train: TrainConfig,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            lag: None,
            delta: 1e-8,
            fit_fraction: 0.5,
            mix_fraction: 0.25,
            blocks: 2,
            sparse_blocks: 1,
            linear_block: true,
            train: TrainConfig::default(),
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) {
            return Err(Error::Config(format!("delta must be positive, got {}", self.delta)));
        }
        let (f, m) = (self.fit_fraction, self.mix_fraction);
        if !(f > 0.0 && m > 0.0 && f + m <= 1.0) {
            return Err(Error::Config(format!(
                "split fractions must be positive and sum to at most 1, got {f} + {m}"
            )));
        }
        if self.lag == Some(0) {
            return Err(Error::Config("lag must be >= 1".into()));
        }
        if self.blocks > 0 && self.train.hidden == 0 {
            return Err(Error::Config("hidden size must be >= 1".into()));
        }
        Ok(())
    }

    /// Sizes `(|Σ_I|, |Σ_M|, held out)` for a sample of length `n`.
    pub fn split(&self, n: usize) -> (usize, usize, usize) {
        let fit = ((n as f64) * self.fit_fraction).floor() as usize;
        let mix = ((n as f64) * self.mix_fraction).floor() as usize;
        let mix = mix.min(n - fit.min(n));
        (fit, mix, n - fit - mix)
    }
}

/// Per-stage diagnostics recorded while fitting.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Stage names in the order they ran.
    pub stages: Vec<String>,
    pub lag: usize,
    /// `"no-peak"` or `"zero-variance"` when lag estimation fell back to `N/4`.
    pub lag_fallback: Option<String>,
    pub lag_overridden: bool,
    pub split: [usize; 3],
    pub delta: f64,
    pub ar_nnz: usize,
    /// `rk_δ` of the AR design matrix, the cap on `ar_nnz`.
    pub ar_rank: usize,
    pub ar_residual: f64,
    /// Final training MSE of each block, normalised scale.
    pub block_mse: Vec<f64>,
    /// `(W_ir, W_iz, W_in)` nonzeros per block after stage 3; `None` if not sparsified.
    pub block_input_nnz: Vec<Option<[usize; 3]>>,
    pub mix_nnz: usize,
    pub mix_residual: f64,
    /// One-step RMSE on the held-out tail, when it is nonempty.
    pub held_out_rmse: Option<f64>,
}

/// A fitted semilinear model.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsModel {
    pub ar: ArCoefficients,
    pub gru_blocks: Vec<GruParams>,
    /// `(w_1, ..., w_{N+1})`; `w_1` weighs the linear block.
    pub mix: Vec<f64>,
    pub normalization: Normalization,
    pub fit_report: FitReport,
}

impl SparsModel {
    /// Assembles a model from parts, checking that all blocks share the lag.
    pub fn new(
        ar: ArCoefficients,
        gru_blocks: Vec<GruParams>,
        mix: Vec<f64>,
        normalization: Normalization,
    ) -> Result<Self> {
        let lag = ar.lag();
        if mix.len() != gru_blocks.len() + 1 {
            return Err(Error::Shape(format!(
                "{} mixing weights for {} blocks",
                mix.len(),
                gru_blocks.len() + 1
            )));
        }
        for b in &gru_blocks {
            b.validate()?;
            if b.lag() != lag {
                return Err(Error::Shape(format!(
                    "GRU block with L = {} in a model with L = {lag}",
                    b.lag()
                )));
            }
        }
        if !(normalization.scale.is_finite() && normalization.scale != 0.0)
            || !normalization.offset.is_finite()
        {
            return Err(Error::Degenerate("invalid normalisation".into()));
        }
        if mix.iter().any(|w| !w.is_finite()) {
            return Err(Error::Degenerate("non-finite mixing weight".into()));
        }
        Ok(Self {
            ar,
            gru_blocks,
            mix,
            normalization,
            fit_report: FitReport::default(),
        })
    }

    /// A model consisting of the linear block only, with weight 1.
    pub fn linear_only(ar: ArCoefficients) -> Self {
        Self::new(ar, Vec::new(), vec![1.0], Normalization::IDENTITY)
            .expect("a lone AR block is always consistent")
    }

    pub fn lag(&self) -> usize {
        self.ar.lag()
    }

    /// Hidden size of the GRU blocks (0 without blocks).
    pub fn hidden(&self) -> usize {
        self.gru_blocks.first().map_or(0, |b| b.hidden())
    }

    /// Fresh predictor with zero hidden states.
    pub fn forecaster(&self) -> Forecaster<'_> {
        Forecaster {
            model: self,
            states: self
                .gru_blocks
                .iter()
                .map(|b| GruState::zeros(b.hidden()))
                .collect(),
        }
    }

    /// One-step predictions of every block (rows: targets `x_{L+1}..x_N`,
    /// columns: linear block then GRU blocks), hidden states threaded from zero.
    pub fn block_predictions(&self, values: &[f64]) -> Result<DMatrix<f64>> {
        let lag = self.lag();
        if values.len() <= lag {
            return Err(Error::Range(format!(
                "need more than L = {lag} samples, got {}",
                values.len()
            )));
        }
        let rows = values.len() - lag;
        let mut out = DMatrix::zeros(rows, self.mix.len());
        for i in 0..rows {
            out[(i, 0)] = predict_slice(&self.ar, &values[i..i + lag])?;
        }
        let z: Vec<f64> = values.iter().map(|v| self.normalization.apply(*v)).collect();
        let inputs: Vec<&[f64]> = (0..rows).map(|i| &z[i..i + lag]).collect();
        for (k, block) in self.gru_blocks.iter().enumerate() {
            let (pred, _) = forward_raw(block, &inputs, &GruState::zeros(block.hidden()))?;
            for (i, p) in pred.into_iter().enumerate() {
                out[(i, k + 1)] = self.normalization.invert(p);
            }
        }
        Ok(out)
    }

    /// Mixed one-step predictions for targets `x_{L+1}..x_N`.
    pub fn predict_sequence(&self, series: &TimeSeries) -> Result<Vec<f64>> {
        let b = self.block_predictions(series.values())?;
        Ok(b.row_iter()
            .map(|r| r.iter().zip(&self.mix).map(|(y, w)| y * w).sum())
            .collect())
    }

    /// One-step RMSE over targets with 1-based indices `from..=N`.
    pub fn one_step_rmse(&self, series: &TimeSeries, from: usize) -> Result<f64> {
        let lag = self.lag();
        let n = series.len();
        if from <= lag || from > n {
            return Err(Error::Range(format!(
                "evaluation start {from} must lie in {}..={n}",
                lag + 1
            )));
        }
        let pred = self.predict_sequence(series)?;
        let x = series.values();
        let errs: Vec<f64> = (from - 1..n).map(|i| x[i] - pred[i - lag]).collect();
        Ok(rms(&errs))
    }

    /// Approximate-periodicity diagnosis of the linear block.
    pub fn diagnose(&self, series: &TimeSeries, epsilon: f64) -> Result<ApDiagnosis> {
        ap_diagnose(&self.ar, series, epsilon)
    }
}

fn rms(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    (v.iter().map(|e| e * e).sum::<f64>() / v.len() as f64).sqrt()
}

/// Stateful one-step predictor over a model; carries each GRU block's hidden state.
#[derive(Clone, Debug)]
pub struct Forecaster<'a> {
    model: &'a SparsModel,
    states: Vec<GruState>,
}

impl Forecaster<'_> {
    /// Mixed prediction of the next sample from an oldest-first window,
    /// advancing every block's hidden state.
    pub fn step(&mut self, window: &[f64]) -> Result<f64> {
        let m = self.model;
        let mut y = m.mix[0] * predict_slice(&m.ar, window)?;
        if m.gru_blocks.is_empty() {
            return Ok(y);
        }
        let z: Vec<f64> = window.iter().map(|v| m.normalization.apply(*v)).collect();
        for ((block, state), w) in m.gru_blocks.iter().zip(&mut self.states).zip(&m.mix[1..]) {
            let (pred, next) = forward_raw(block, &[&z], state)?;
            *state = next;
            y += w * m.normalization.invert(pred[0]);
        }
        Ok(y)
    }

    /// Feeds every full window of `context` through the blocks, discarding predictions.
    pub fn warm_up(&mut self, context: &[f64]) -> Result<()> {
        let lag = self.model.lag();
        for end in lag..context.len() {
            self.step(&context[end - lag..end])?;
        }
        Ok(())
    }
}

/// `Σ w_j y_j` on one window, with every GRU block starting from a zero state.
pub fn predict_one(model: &SparsModel, w: &WindowVector) -> Result<f64> {
    if w.lag() != model.lag() {
        return Err(Error::Shape(format!(
            "window of length {} for a model with L = {}",
            w.lag(),
            model.lag()
        )));
    }
    model.forecaster().step(w.entries())
}

/// Closed-loop forecast output.
#[derive(Clone, Debug, PartialEq)]
pub struct ForecastResult {
    pub predictions: Vec<f64>,
    /// `|truth − prediction|` per step, when truth was supplied.
    pub per_step_abs_error: Option<Vec<f64>>,
    pub rmse: Option<f64>,
}

impl ForecastResult {
    /// First 1-based step whose magnitude exceeds `limit`.
    pub fn first_exceeding(&self, limit: f64) -> Option<usize> {
        self.predictions.iter().position(|p| p.abs() > limit).map(|i| i + 1)
    }
}

/// Generates `horizon` samples, feeding each prediction back into the window.
/// Hidden states start at zero on the seed window.
pub fn rolling_forecast(
    model: &SparsModel,
    seed_window: &WindowVector,
    horizon: usize,
    truth: Option<&TimeSeries>,
) -> Result<ForecastResult> {
    if seed_window.lag() != model.lag() {
        return Err(Error::Shape(format!(
            "seed window of length {} for a model with L = {}",
            seed_window.lag(),
            model.lag()
        )));
    }
    run_forecast(model.forecaster(), seed_window.entries().to_vec(), horizon, truth)
}

/// Like [`rolling_forecast`] but warms the hidden states on `context` and
/// seeds with its last `L` samples.
pub fn rolling_forecast_from(
    model: &SparsModel,
    context: &[f64],
    horizon: usize,
    truth: Option<&TimeSeries>,
) -> Result<ForecastResult> {
    let lag = model.lag();
    if context.len() < lag {
        return Err(Error::Range(format!(
            "context of {} samples is shorter than L = {lag}",
            context.len()
        )));
    }
    let mut f = model.forecaster();
    f.warm_up(context)?;
    run_forecast(f, context[context.len() - lag..].to_vec(), horizon, truth)
}

fn run_forecast(
    mut f: Forecaster<'_>,
    mut window: Vec<f64>,
    horizon: usize,
    truth: Option<&TimeSeries>,
) -> Result<ForecastResult> {
    if horizon == 0 {
        return Err(Error::Range("horizon must be >= 1".into()));
    }
    if let Some(t) = truth {
        if t.len() < horizon {
            return Err(Error::Range(format!(
                "truth has {} samples, horizon is {horizon}",
                t.len()
            )));
        }
    }
    let mut predictions = Vec::with_capacity(horizon);
    for step in 1..=horizon {
        let y = f.step(&window)?;
        if !y.is_finite() {
            return Err(Error::Divergence { step });
        }
        predictions.push(y);
        window.remove(0);
        window.push(y);
    }
    let per_step_abs_error = truth.map(|t| {
        predictions
            .iter()
            .zip(t.values())
            .map(|(p, x)| (x - p).abs())
            .collect::<Vec<_>>()
    });
    let rmse = per_step_abs_error.as_deref().map(rms);
    Ok(ForecastResult {
        predictions,
        per_step_abs_error,
        rmse,
    })
}

/// Mixing weights by sparse least squares of `targets` on the block-prediction
/// columns. Returns the weights with the solve's nnz and residual.
pub fn fit_mixing_weights(
    block_predictions: &DMatrix<f64>,
    targets: &[f64],
    delta: f64,
) -> Result<(Vec<f64>, usize, f64)> {
    if block_predictions.nrows() != targets.len() {
        return Err(Error::Shape(format!(
            "{} prediction rows vs {} targets",
            block_predictions.nrows(),
            targets.len()
        )));
    }
    let y = DMatrix::from_column_slice(targets.len(), 1, targets);
    let rep = sparse_lsq(block_predictions, &y, delta, None)?;
    Ok((
        rep.solution.column(0).iter().copied().collect(),
        rep.nnz,
        rep.residual_frobenius,
    ))
}

/// Fits the full model on `series` following the five stages above.
pub fn fit_spars(series: &TimeSeries, config: &FitConfig) -> Result<SparsModel> {
    config.validate()?;
    let n = series.len();
    let (n_fit, n_mix, n_eval) = config.split(n);
    let x = series.values();
    let mut report = FitReport {
        split: [n_fit, n_mix, n_eval],
        delta: config.delta,
        ..FitReport::default()
    };

    // 0: lag
    let lag = match config.lag {
        Some(l) => {
            report.lag_overridden = true;
            l
        }
        None => {
            let est = estimate_lag(&series.head(n_fit + n_mix).map_err(|e| e.in_stage("lag"))?)
                .map_err(|e| e.in_stage("lag"))?;
            report.lag_fallback = est.fallback.map(|f| {
                match f {
                    LagFallback::NoPeak => "no-peak",
                    LagFallback::ZeroVariance => "zero-variance",
                }
                .to_string()
            });
            est.lag
        }
    };
    report.lag = lag;
    report.stages.push(STAGES[0].into());
    if n < 4 * lag {
        return Err(Error::Range(format!(
            "sample of {n} points is shorter than 4·L = {}",
            4 * lag
        ))
        .in_stage("lag"));
    }
    if n_fit < lag + 2 || n_mix == 0 {
        return Err(Error::Range(format!(
            "split {n_fit}/{n_mix}/{n_eval} too small for L = {lag}"
        ))
        .in_stage("lag"));
    }

    // 1: linear block on Σ_I
    let fit_part = series.head(n_fit)?;
    let ar = if config.linear_block {
        fit_ar(&fit_part, lag, config.delta).map_err(|e| e.in_stage("linear"))?
    } else {
        ArCoefficients::new(vec![0.0; lag])?
    };
    let design_rank = {
        let h = crate::signal::hankel_from_slice(&x[..n_fit - 1], lag)?;
        thresholded_rank(h.data(), config.delta)
            .map_err(|e| e.in_stage("linear"))?
            .rank
    };
    report.ar_nnz = ar.nnz();
    report.ar_rank = design_rank;
    report.ar_residual = ar.fit_residual();
    report.stages.push(STAGES[1].into());

    // 2: GRU blocks on Σ_I (normalised)
    let normalization = Normalization::fit(fit_part.values());
    let z: Vec<f64> = fit_part.values().iter().map(|v| normalization.apply(*v)).collect();
    let mut blocks = Vec::with_capacity(config.blocks);
    for k in 0..config.blocks {
        let hyper = TrainConfig {
            seed: config.train.seed.wrapping_add(k as u64),
            ..config.train.clone()
        };
        let (params, _, mse) = train_normalized(&z, lag, &hyper).map_err(|e| e.in_stage("gru"))?;
        report.block_mse.push(mse);
        blocks.push(params);
    }
    report.stages.push(STAGES[2].into());

    // 3: sparse input weights for the leading blocks
    let traj = normalized_trajectory(&z, lag)?;
    for (k, block) in blocks.iter_mut().enumerate() {
        if k < config.sparse_blocks {
            match sparsify_input_weights(block, &traj, config.delta) {
                Ok(s) => {
                    *block = s.params;
                    report.block_input_nnz.push(Some(block.input_nnz()));
                }
                // A constant fitting split normalises to zeros: nothing to sparsify against.
                Err(Error::RankDeficient { .. }) => report.block_input_nnz.push(None),
                Err(e) => return Err(e.in_stage("sparsify")),
            }
        } else {
            report.block_input_nnz.push(None);
        }
    }
    report.stages.push(STAGES[3].into());

    // 4: mixing weights on Σ_M
    let mut model = SparsModel::new(ar, blocks, vec![0.0; config.blocks + 1], normalization)?;
    let preds = model
        .block_predictions(&x[..n_fit + n_mix])
        .map_err(|e| e.in_stage("mixing"))?;
    // Row i predicts sample index i + L (0-based); Σ_M covers n_fit..n_fit + n_mix.
    let first = n_fit - lag;
    let design = preds.rows(first, n_mix).into_owned();
    let targets = &x[n_fit..n_fit + n_mix];
    let (mix, mix_nnz, mix_residual) =
        fit_mixing_weights(&design, targets, config.delta).map_err(|e| e.in_stage("mixing"))?;
    model.mix = mix;
    report.mix_nnz = mix_nnz;
    report.mix_residual = mix_residual;
    report.stages.push(STAGES[4].into());

    if n_eval > 0 {
        report.held_out_rmse = Some(model.one_step_rmse(series, n_fit + n_mix + 1)?);
    }
    model.fit_report = report;
    Ok(model)
}
