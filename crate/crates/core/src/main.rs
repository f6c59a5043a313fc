use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spars::experiment::{
    ar_spectral_radius, exit_code, parse_split, run_compare, run_fit, run_generate, run_spectra,
    ConfigOverrides, ExperimentConfig, SpectraConfig, SEED_ENV,
};
use spars::generate::{FixtureKind, FixtureParams};
use spars::io::ValueColumn;
use spars::Error;

#[derive(Parser)]
#[command(name = "spars", version, about = "Sparse AR + GRU semilinear models for time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model; writes model.json and fit_report.txt.
    Fit(ExperimentArgs),
    /// Fit the model and a dense AR baseline; writes compare_report.txt.
    Compare(ExperimentArgs),
    /// Section eigenvalues of a saved model's linear block.
    Spectra(SpectraArgs),
    /// Write a synthetic fixture as CSV.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// Flat key = value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input CSV, one sample per row.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Value column: header name or 0-based index.
    #[arg(long)]
    column: Option<String>,
    /// Sparsity threshold for every sparse solve [default: 1e-8].
    #[arg(long)]
    delta: Option<f64>,
    /// Window length L; estimated from the autocorrelation if omitted.
    #[arg(long)]
    lag: Option<usize>,
    /// `fit,mix` fractions, e.g. `0.5,0.25`.
    #[arg(long, value_parser = split_arg)]
    split: Option<(f64, f64)>,
    /// GRU hidden size [default: 8].
    #[arg(long)]
    hidden: Option<usize>,
    /// Number of GRU blocks [default: 2].
    #[arg(long)]
    blocks: Option<usize>,
    /// Gradient-descent epochs per block [default: 500].
    #[arg(long)]
    epochs: Option<usize>,
    /// Learning rate [default: 0.5].
    #[arg(long)]
    lr: Option<f64>,
    /// RNG seed; falls back to SPARS_SEED, then 42.
    #[arg(long)]
    seed: Option<u64>,
    /// Closed-loop forecast horizon [default: 40].
    #[arg(long)]
    horizon: Option<usize>,
    /// Output directory [default: .].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tail tolerance for the period estimate.
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args)]
struct SpectraArgs {
    /// Model file written by `fit`.
    #[arg(long)]
    model: PathBuf,
    /// Data CSV the model is diagnosed on.
    #[arg(long, alias = "input")]
    data: PathBuf,
    #[arg(long)]
    column: Option<String>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
}

#[derive(Args)]
struct GenerateArgs {
    /// sine | alternating | aep | noisy-periodic | recurrence
    kind: String,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Number of samples.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    period: Option<usize>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    head: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    noise: Option<f64>,
    /// Comma-separated recurrence coefficients, most recent first.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    coefficients: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
}

fn split_arg(s: &str) -> Result<(f64, f64), String> {
    parse_split(s).map_err(|e| e.to_string())
}

fn experiment_config(a: ExperimentArgs) -> spars::Result<ExperimentConfig> {
    let file = a.config.as_ref().map(ConfigOverrides::from_kv_file).transpose()?;
    let cli = ConfigOverrides {
        input: a.input,
        column: a.column,
        lag: a.lag,
        delta: a.delta,
        split: a.split,
        hidden: a.hidden,
        blocks: a.blocks,
        epochs: a.epochs,
        learning_rate: a.lr,
        seed: a.seed,
        horizon: a.horizon,
        out: a.out,
        epsilon: a.epsilon,
    };
    let env = std::env::var(SEED_ENV).ok();
    ExperimentConfig::resolve(file.as_ref(), &cli, env.as_deref())
}

fn run(cli: Cli) -> spars::Result<()> {
    match cli.command {
        Command::Fit(a) => {
            let cfg = experiment_config(a)?;
            let o = run_fit(&cfg)?;
            let r = &o.report;
            println!("lag            {}", r.get("lag").unwrap_or("?"));
            println!("ar nnz         {} (rank {})", o.model.ar.nnz(), r.get("ar_rank").unwrap_or("?"));
            println!("ar radius      {:.6}", ar_spectral_radius(&o.model.ar)?);
            println!("mix weights    {}", r.get("mix_weights").unwrap_or("?"));
            println!("held-out rmse  {}", r.get("held_out_rmse").unwrap_or("?"));
            println!("forecast rmse  {}", r.get("forecast_rmse").unwrap_or("?"));
            println!("wrote {} and {}", o.model_path.display(), o.report_path.display());
        }
        Command::Compare(a) => {
            let cfg = experiment_config(a)?;
            let o = run_compare(&cfg)?;
            let r = &o.report;
            let g = |k| r.get(k).unwrap_or("?");
            println!("{:<10} {:>8} {:>24}", "model", "nnz", "held-out rmse");
            println!("{:<10} {:>8} {:>24}", "spars", g("sparse_ar_nnz"), g("spars_rmse"));
            println!("{:<10} {:>8} {:>24}", "sparse-ar", g("sparse_ar_nnz"), g("sparse_ar_rmse"));
            println!("{:<10} {:>8} {:>24}", "dense-ar", g("dense_ar_nnz"), g("dense_ar_rmse"));
            println!("wrote {}", o.report_path.display());
        }
        Command::Spectra(a) => {
            let cfg = SpectraConfig {
                model: a.model,
                data: a.data,
                column: a.column.as_deref().map_or(ValueColumn::Auto, ValueColumn::parse),
                out: a.out,
                epsilon: a.epsilon,
            };
            let d = run_spectra(&cfg)?;
            let s = &d.spectrum;
            println!("period T        {}", s.period);
            println!("tail detected   {}", d.tail_detected);
            println!("section dim k   {}", d.section.dim());
            println!("mimicry norm    {:e}", s.mimicry_norm);
            println!("max |z^T - 1|   {:e}", s.max_unit_root_defect);
            println!("spectral radius {}", s.spectral_radius);
            println!("wrote spectra files to {}", cfg.out.display());
        }
        Command::Generate(a) => {
            let kind: FixtureKind = a.kind.parse()?;
            let d = FixtureParams::default();
            let seed = match a.seed {
                Some(s) => s,
                None => match std::env::var(SEED_ENV) {
                    Ok(s) => s.trim().parse().map_err(|_| {
                        Error::Config(format!("{SEED_ENV}=`{s}` is not an unsigned integer"))
                    })?,
                    Err(_) => d.seed,
                },
            };
            let p = FixtureParams {
                n: a.n.unwrap_or(d.n),
                period: a.period.unwrap_or(d.period),
                amplitude: a.amplitude.unwrap_or(d.amplitude),
                head: a.head.unwrap_or(d.head),
                epsilon: a.epsilon.unwrap_or(d.epsilon),
                noise: a.noise.unwrap_or(d.noise),
                coefficients: a.coefficients,
                seed,
            };
            let v = run_generate(kind, &p, &a.out)?;
            println!("wrote {} samples of `{kind}` to {}", v.len(), a.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
