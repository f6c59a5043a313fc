//! Full pipeline: fit, one-step evaluation, closed-loop forecast, save and reload.

use spars::generate::{generate, FixtureKind, FixtureParams};
use spars::gru::TrainConfig;
use spars::model::{fit_spars, rolling_forecast_from, FitConfig};
use spars::persist::{load_model, save_model};
use spars::signal::TimeSeries;

fn main() -> spars::Result<()> {
    let p = FixtureParams { n: 400, period: 20, noise: 0.05, ..Default::default() };
    let s = TimeSeries::new(generate(FixtureKind::NoisyPeriodic, &p)?)?;

    let cfg = FitConfig {
        train: TrainConfig { epochs: 150, ..Default::default() },
        ..Default::default()
    };
    let model = fit_spars(&s, &cfg)?;
    let r = &model.fit_report;
    println!("lag {}, AR nnz {}, mix {:?}", r.lag, r.ar_nnz, model.mix);
    println!("held-out one-step rmse {:.4}", r.held_out_rmse.unwrap_or(f64::NAN));

    let (n_fit, n_mix, _) = cfg.split(s.len());
    let context = &s.values()[..n_fit + n_mix];
    let truth = s.sample(n_fit + n_mix + 1, n_fit + n_mix + 40)?;
    let f = rolling_forecast_from(&model, context, 40, Some(&truth))?;
    println!("40-step closed-loop rmse {:.4}", f.rmse.unwrap());

    let path = std::env::temp_dir().join("spars_example_model.json");
    save_model(&model, &path)?;
    let back = load_model(&path)?;
    println!(
        "reloaded model predicts identically: {}",
        back.predict_sequence(&s)? == model.predict_sequence(&s)?
    );
    std::fs::remove_file(&path).ok();
    Ok(())
}
