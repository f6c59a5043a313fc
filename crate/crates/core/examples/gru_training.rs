//! Training a single GRU block and sparsifying its input weights.

use spars::generate::{generate, FixtureKind, FixtureParams};
use spars::gru::{gru_gates, sparsify_input_weights, train_gru, GruState, TrainConfig};
use spars::signal::{hankel, window, TimeSeries};

fn main() -> spars::Result<()> {
    let p = FixtureParams { n: 160, period: 16, ..Default::default() };
    let s = TimeSeries::new(generate(FixtureKind::Sine, &p)?)?;
    let lag = 8;

    let cfg = TrainConfig { hidden: 6, epochs: 300, ..Default::default() };
    let g = train_gru(&s, lag, &cfg)?;
    println!("mse {:.3e} -> {:.3e}", g.initial_mse, g.final_mse);

    let z: Vec<f64> = s.values().iter().map(|v| g.normalization.apply(*v)).collect();
    let zs = TimeSeries::new(z)?;
    let gates = gru_gates(&g.params, &window(&zs, lag, lag)?, &GruState::zeros(cfg.hidden))?;
    println!("first reset gate {:.3?}", gates.reset.as_slice());

    let h = hankel(&zs, lag)?;
    let sp = sparsify_input_weights(&g.params, &h, 1e-8)?;
    println!(
        "input nnz before {:?}, after {:?}",
        g.params.input_nnz(),
        sp.params.input_nnz()
    );
    Ok(())
}
