//! Command pipeline behind the `spars` binary: configuration, fit, compare,
//! spectra and fixture generation. Every command is a plain function so the
//! same runs can be driven from tests and examples.
//!
//! Reports are `key=value` text, one entry per line, with no timestamps:
//! identical inputs produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::generate::{generate, FixtureKind, FixtureParams};
use crate::gru::TrainConfig;
use crate::io::{format_float, read_series, write_series, ValueColumn};
use crate::linear::{companion, fit_dense_ar, ArCoefficients};
use crate::model::{fit_spars, rolling_forecast_from, FitConfig, SparsModel};
use crate::persist::{load_model, save_model};
use crate::signal::TimeSeries;
use crate::spectra::{ap_diagnose, ApDiagnosis};

pub const SEED_ENV: &str = "SPARS_SEED";
pub const MODEL_FILE: &str = "model.json";
pub const FIT_REPORT_FILE: &str = "fit_report.txt";
pub const COMPARE_REPORT_FILE: &str = "compare_report.txt";
pub const SECTION_EIGEN_FILE: &str = "section_eigenvalues.csv";
pub const POWER_EIGEN_FILE: &str = "power_eigenvalues.csv";
pub const SPECTRA_META_FILE: &str = "spectra_meta.csv";

/// Process exit codes by error class.
pub mod exit {
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    pub const PARSE: i32 = 4;
    pub const NUMERICAL: i32 = 5;
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::Config(_) => exit::USAGE,
        Error::Io { .. } => exit::IO,
        Error::Parse { .. } | Error::Malformed(_) | Error::Version { .. } => exit::PARSE,
        _ => exit::NUMERICAL,
    }
}

/// Settings shared by `fit` and `compare`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub input: Option<PathBuf>,
    pub column: ValueColumn,
    pub lag: Option<usize>,
    pub delta: f64,
    /// `(Σ_I, Σ_M)` fractions.
    pub split: (f64, f64),
    pub hidden: usize,
    pub blocks: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub horizon: usize,
    pub out: PathBuf,
    /// Tail tolerance for the period estimate.
    pub epsilon: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        let f = FitConfig::default();
        Self {
            input: None,
            column: ValueColumn::Auto,
            lag: None,
            delta: f.delta,
            split: (f.fit_fraction, f.mix_fraction),
            hidden: t.hidden,
            blocks: f.blocks,
            epochs: t.epochs,
            learning_rate: t.learning_rate,
            seed: t.seed,
            horizon: 40,
            out: PathBuf::from("."),
            epsilon: 1e-6,
        }
    }
}

/// Optional values from one configuration source; `None` leaves a field alone.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigOverrides {
    pub input: Option<PathBuf>,
    pub column: Option<String>,
    pub lag: Option<usize>,
    pub delta: Option<f64>,
    pub split: Option<(f64, f64)>,
    pub hidden: Option<usize>,
    pub blocks: Option<usize>,
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub seed: Option<u64>,
    pub horizon: Option<usize>,
    pub out: Option<PathBuf>,
    pub epsilon: Option<f64>,
}

/// Parses `"0.5,0.25"` or `"0.5"` (mixing fraction then defaults to half the rest).
pub fn parse_split(s: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| {
        p.parse::<f64>()
            .map_err(|_| Error::Config(format!("split fraction `{p}` is not a number")))
    };
    match parts.as_slice() {
        [a] => {
            let a = num(a)?;
            Ok((a, (1.0 - a) / 2.0))
        }
        [a, b] => Ok((num(a)?, num(b)?)),
        _ => Err(Error::Config(format!("split `{s}` must be `fit` or `fit,mix`"))),
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str, line: usize) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("line {line}: bad value `{v}` for `{key}`")))
}

impl ConfigOverrides {
    /// Reads a flat `key = value` file. `#` starts a comment.
    pub fn from_kv_text(text: &str) -> Result<Self> {
        let mut o = ConfigOverrides::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {line}: expected `key = value`")))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "input" => o.input = Some(PathBuf::from(v)),
                "column" => o.column = Some(v.to_string()),
                "lag" => o.lag = Some(parse_value(k, v, line)?),
                "delta" => o.delta = Some(parse_value(k, v, line)?),
                "split" => o.split = Some(parse_split(v)?),
                "hidden" => o.hidden = Some(parse_value(k, v, line)?),
                "blocks" => o.blocks = Some(parse_value(k, v, line)?),
                "epochs" => o.epochs = Some(parse_value(k, v, line)?),
                "lr" | "learning_rate" => o.learning_rate = Some(parse_value(k, v, line)?),
                "seed" => o.seed = Some(parse_value(k, v, line)?),
                "horizon" => o.horizon = Some(parse_value(k, v, line)?),
                "out" => o.out = Some(PathBuf::from(v)),
                "epsilon" => o.epsilon = Some(parse_value(k, v, line)?),
                other => return Err(Error::Config(format!("line {line}: unknown key `{other}`"))),
            }
        }
        Ok(o)
    }

    pub fn from_kv_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_kv_text(&text)
    }

    fn apply(&self, c: &mut ExperimentConfig) {
        if let Some(v) = &self.input {
            c.input = Some(v.clone());
        }
        if let Some(v) = &self.column {
            c.column = ValueColumn::parse(v);
        }
        if let Some(v) = self.lag {
            c.lag = Some(v);
        }
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f.clone() { c.$f = v; } )* };
        }
        set!(delta, split, hidden, blocks, epochs, learning_rate, seed, horizon, out, epsilon);
    }
}

impl ExperimentConfig {
    /// Defaults, then `SPARS_SEED`, then the config file, then CLI flags.
    pub fn resolve(
        file: Option<&ConfigOverrides>,
        cli: &ConfigOverrides,
        env_seed: Option<&str>,
    ) -> Result<Self> {
        let mut c = ExperimentConfig::default();
        if let Some(s) = env_seed {
            c.seed = s
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{SEED_ENV}=`{s}` is not an unsigned integer")))?;
        }
        if let Some(f) = file {
            f.apply(&mut c);
        }
        cli.apply(&mut c);
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.fit_config().validate()?;
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be >= 1".into()));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::Config("epsilon must be >= 0".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        Ok(())
    }

    pub fn fit_config(&self) -> FitConfig {
        FitConfig {
            lag: self.lag,
            delta: self.delta,
            fit_fraction: self.split.0,
            mix_fraction: self.split.1,
            blocks: self.blocks,
            sparse_blocks: FitConfig::default().sparse_blocks.min(self.blocks),
            linear_block: true,
            train: TrainConfig {
                hidden: self.hidden,
                epochs: self.epochs,
                learning_rate: self.learning_rate,
                clip_norm: TrainConfig::default().clip_norm,
                seed: self.seed,
            },
        }
    }

    fn read_input(&self) -> Result<TimeSeries> {
        let path = self
            .input
            .as_ref()
            .ok_or_else(|| Error::Config("no input file given (--input)".into()))?;
        if path.as_os_str().is_empty() {
            return Err(Error::Config("empty input path".into()));
        }
        read_series(path, &self.column)
    }
}

/// Ordered `key=value` report.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub entries: Vec<(String, String)>,
}

impl Report {
    fn put(&mut self, k: &str, v: impl ToString) {
        self.entries.push((k.to_string(), v.to_string()));
    }

    fn put_f(&mut self, k: &str, v: f64) {
        self.put(k, format_float(v));
    }

    pub fn get(&self, k: &str) -> Option<&str> {
        self.entries.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format_float(*x)).collect::<Vec<_>>().join(",")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), format_float)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Output of [`run_fit`].
#[derive(Clone, Debug)]
pub struct FitOutcome {
    pub model: SparsModel,
    pub series: TimeSeries,
    pub report: Report,
    pub model_path: PathBuf,
    pub report_path: PathBuf,
}

fn forecast_rmse(model: &SparsModel, series: &TimeSeries, start: usize, horizon: usize) -> Result<Option<f64>> {
    let h = horizon.min(series.len() - start);
    if h == 0 {
        return Ok(None);
    }
    let truth = series.sample(start + 1, start + h)?;
    let f = rolling_forecast_from(model, &series.values()[..start], h, Some(&truth))?;
    Ok(f.rmse)
}

fn fit_report(cfg: &ExperimentConfig, series: &TimeSeries, model: &SparsModel) -> Result<Report> {
    let r = &model.fit_report;
    let mut rep = Report::default();
    rep.put("format", "spars-fit-report");
    rep.put("input", cfg.input.as_deref().map_or_else(String::new, |p| p.display().to_string()));
    rep.put("samples", series.len());
    rep.put("lag", r.lag);
    let source = match (&r.lag_fallback, r.lag_overridden) {
        (_, true) => "override".to_string(),
        (Some(f), _) => format!("fallback-{f}"),
        (None, false) => "acf".to_string(),
    };
    rep.put("lag_source", source);
    rep.put("split_fit", r.split[0]);
    rep.put("split_mix", r.split[1]);
    rep.put("split_eval", r.split[2]);
    rep.put_f("delta", r.delta);
    rep.put("stages", r.stages.join(","));
    rep.put("ar_nnz", r.ar_nnz);
    rep.put("ar_rank", r.ar_rank);
    rep.put_f("ar_residual", r.ar_residual);
    rep.put("ar_coefficients", join(model.ar.coefficients()));
    rep.put("blocks", model.gru_blocks.len());
    rep.put("hidden", model.hidden());
    for (k, mse) in r.block_mse.iter().enumerate() {
        rep.put_f(&format!("block{}_train_mse", k + 1), *mse);
        let nnz = match r.block_input_nnz.get(k).copied().flatten() {
            Some([a, b, c]) => format!("{a},{b},{c}"),
            None => "dense".to_string(),
        };
        rep.put(&format!("block{}_input_nnz", k + 1), nnz);
    }
    rep.put("mix_weights", join(&model.mix));
    rep.put("mix_nnz", r.mix_nnz);
    rep.put_f("mix_residual", r.mix_residual);
    rep.put("held_out_rmse", opt(r.held_out_rmse));
    let start = r.split[0] + r.split[1];
    rep.put("forecast_horizon", cfg.horizon.min(series.len() - start));
    rep.put("forecast_rmse", opt(forecast_rmse(model, series, start, cfg.horizon)?));
    Ok(rep)
}

/// Fits a model on the input and writes `model.json` and `fit_report.txt`.
/// The input is read before anything is written.
pub fn run_fit(cfg: &ExperimentConfig) -> Result<FitOutcome> {
    cfg.validate()?;
    let series = cfg.read_input()?;
    let model = fit_spars(&series, &cfg.fit_config())?;
    let report = fit_report(cfg, &series, &model)?;
    create_dir(&cfg.out)?;
    let model_path = cfg.out.join(MODEL_FILE);
    let report_path = cfg.out.join(FIT_REPORT_FILE);
    save_model(&model, &model_path)?;
    write_file(&report_path, &report.to_text())?;
    Ok(FitOutcome {
        model,
        series,
        report,
        model_path,
        report_path,
    })
}

/// Output of [`run_compare`].
#[derive(Clone, Debug)]
pub struct CompareOutcome {
    pub model: SparsModel,
    pub dense: ArCoefficients,
    pub report: Report,
    pub report_path: PathBuf,
}

fn mimicry(coeffs: &ArCoefficients, series: &TimeSeries, eps: f64) -> Option<f64> {
    ap_diagnose(coeffs, series, eps).ok().map(|d| d.spectrum.mimicry_norm)
}

/// Fits the full model and a dense AR baseline of the same lag on `Σ_I`;
/// reports held-out one-step RMSE and nonzero counts side by side.
pub fn run_compare(cfg: &ExperimentConfig) -> Result<CompareOutcome> {
    cfg.validate()?;
    let series = cfg.read_input()?;
    let model = fit_spars(&series, &cfg.fit_config())?;
    let r = &model.fit_report;
    let lag = model.lag();
    let dense = fit_dense_ar(&series.head(r.split[0])?, lag).map_err(|e| e.in_stage("dense"))?;
    let dense_model = SparsModel::linear_only(dense.clone());
    let sparse_ar_model = SparsModel::linear_only(model.ar.clone());

    let eval_from = r.split[0] + r.split[1] + 1;
    let rmse = |m: &SparsModel| -> Result<Option<f64>> {
        if eval_from > series.len() {
            Ok(None)
        } else {
            m.one_step_rmse(&series, eval_from).map(Some)
        }
    };
    let spars_rmse = rmse(&model)?;
    let sparse_rmse = rmse(&sparse_ar_model)?;
    let dense_rmse = rmse(&dense_model)?;

    let mut rep = Report::default();
    rep.put("format", "spars-compare-report");
    rep.put("input", cfg.input.as_deref().map_or_else(String::new, |p| p.display().to_string()));
    rep.put("samples", series.len());
    rep.put("lag", lag);
    rep.put_f("delta", cfg.delta);
    rep.put("eval_samples", r.split[2]);
    rep.put("sparse_ar_nnz", model.ar.nnz());
    rep.put("dense_ar_nnz", dense.nnz());
    rep.put("spars_rmse", opt(spars_rmse));
    rep.put("sparse_ar_rmse", opt(sparse_rmse));
    rep.put("dense_ar_rmse", opt(dense_rmse));
    let ratio = match (spars_rmse, dense_rmse) {
        (Some(a), Some(b)) if b > 0.0 => Some(a / b),
        _ => None,
    };
    rep.put("rmse_ratio", opt(ratio));
    rep.put("sparse_mimicry_norm", opt(mimicry(&model.ar, &series, cfg.epsilon)));
    rep.put("dense_mimicry_norm", opt(mimicry(&dense, &series, cfg.epsilon)));

    create_dir(&cfg.out)?;
    let report_path = cfg.out.join(COMPARE_REPORT_FILE);
    write_file(&report_path, &rep.to_text())?;
    Ok(CompareOutcome {
        model,
        dense,
        report: rep,
        report_path,
    })
}

/// Inputs of [`run_spectra`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpectraConfig {
    pub model: PathBuf,
    pub data: PathBuf,
    pub column: ValueColumn,
    pub out: PathBuf,
    pub epsilon: f64,
}

/// Writes the section eigenvalues, those of its `T`-th power, and a metadata
/// row, all as CSV with a header.
pub fn run_spectra(cfg: &SpectraConfig) -> Result<ApDiagnosis> {
    if cfg.model.as_os_str().is_empty() {
        return Err(Error::Config("empty model path".into()));
    }
    if cfg.data.as_os_str().is_empty() {
        return Err(Error::Config("empty data path".into()));
    }
    if !(cfg.epsilon >= 0.0) {
        return Err(Error::Config("epsilon must be >= 0".into()));
    }
    let model = load_model(&cfg.model)?;
    let series = read_series(&cfg.data, &cfg.column)?;
    let d = model.diagnose(&series, cfg.epsilon).map_err(|e| e.in_stage("spectra"))?;

    let points = |z: &[nalgebra::Complex<f64>]| {
        let mut s = String::from("re,im\n");
        for v in z {
            let _ = writeln!(s, "{},{}", format_float(v.re), format_float(v.im));
        }
        s
    };
    let sp = &d.spectrum;
    let meta = format!(
        "period,tail_start,tail_detected,anchor,anchor_fallback,k,mimicry_norm,\
         max_unit_root_defect,spectral_radius,inside_unit_disk\n\
         {},{},{},{},{},{},{},{},{},{}\n",
        sp.period,
        d.profile.tail_start,
        d.tail_detected,
        d.anchor,
        d.anchor_fallback,
        d.section.dim(),
        format_float(sp.mimicry_norm),
        format_float(sp.max_unit_root_defect),
        format_float(sp.spectral_radius),
        sp.inside_unit_disk
    );
    create_dir(&cfg.out)?;
    write_file(&cfg.out.join(SECTION_EIGEN_FILE), &points(&sp.eigenvalues))?;
    write_file(&cfg.out.join(POWER_EIGEN_FILE), &points(&sp.power_eigenvalues))?;
    write_file(&cfg.out.join(SPECTRA_META_FILE), &meta)?;
    Ok(d)
}

/// Writes a fixture CSV and returns its samples.
pub fn run_generate(kind: FixtureKind, params: &FixtureParams, out: &Path) -> Result<Vec<f64>> {
    let v = generate(kind, params)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_series(out, &v)?;
    Ok(v)
}

/// Companion-matrix spectral radius of an AR model; used in summaries.
pub fn ar_spectral_radius(coeffs: &ArCoefficients) -> Result<f64> {
    let z = crate::spectra::eigenvalues(companion(coeffs).data())?;
    Ok(z.iter().map(|v| v.norm()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_parsing() {
        let o = ConfigOverrides::from_kv_text(
            "# comment\ninput = data.csv\nlag=12\nsplit = 0.6, 0.2\nlr = 0.1 # trailing\n",
        )
        .unwrap();
        assert_eq!(o.input, Some(PathBuf::from("data.csv")));
        assert_eq!(o.lag, Some(12));
        assert_eq!(o.split, Some((0.6, 0.2)));
        assert_eq!(o.learning_rate, Some(0.1));
    }

    #[test]
    fn kv_errors() {
        assert!(matches!(ConfigOverrides::from_kv_text("bogus = 1"), Err(Error::Config(_))));
        assert!(matches!(ConfigOverrides::from_kv_text("lag = x"), Err(Error::Config(_))));
        assert!(matches!(ConfigOverrides::from_kv_text("lag"), Err(Error::Config(_))));
    }

    #[test]
    fn precedence() {
        let file = ConfigOverrides {
            seed: Some(5),
            delta: Some(1e-3),
            ..Default::default()
        };
        let cli = ConfigOverrides {
            delta: Some(1e-4),
            ..Default::default()
        };
        let c = ExperimentConfig::resolve(Some(&file), &cli, Some("9")).unwrap();
        assert_eq!(c.seed, 5);
        assert_eq!(c.delta, 1e-4);
        let c = ExperimentConfig::resolve(None, &cli, Some("9")).unwrap();
        assert_eq!(c.seed, 9);
        assert!(ExperimentConfig::resolve(None, &cli, Some("x")).is_err());
    }

    #[test]
    fn invalid_split() {
        let cli = ConfigOverrides {
            split: Some((0.9, 0.2)),
            ..Default::default()
        };
        assert!(matches!(
            ExperimentConfig::resolve(None, &cli, None),
            Err(Error::Config(_))
        ));
        assert_eq!(parse_split("0.5").unwrap(), (0.5, 0.25));
    }

    #[test]
    fn exit_classes() {
        assert_eq!(exit_code(&Error::Config("x".into())), exit::USAGE);
        assert_eq!(
            exit_code(&Error::io("p", std::io::Error::other("x"))),
            exit::IO
        );
        assert_eq!(exit_code(&Error::Malformed("x".into())), exit::PARSE);
        assert_eq!(exit_code(&Error::Divergence { step: 1 }.in_stage("x")), exit::NUMERICAL);
    }
}
