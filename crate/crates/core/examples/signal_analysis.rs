//! Windows, Hankel trajectory matrix, lag and approximate-period estimates.

use spars::generate::{generate, FixtureKind, FixtureParams};
use spars::signal::{autocorrelation, estimate_lag, estimate_period, hankel, window, TimeSeries};

fn main() -> spars::Result<()> {
    let p = FixtureParams { n: 200, period: 20, ..Default::default() };
    let s = TimeSeries::new(generate(FixtureKind::Sine, &p)?)?;

    let w = window(&s, 4, 10)?;
    println!("x_4(10) = {:?}", w.entries());

    let h = hankel(&s, 20)?;
    println!("H_20 is {} x {}", h.lag(), h.columns());

    let rho = autocorrelation(&s, 40)?;
    println!("rho(10) = {:.4}, rho(20) = {:.4}", rho[10], rho[20]);

    let lag = estimate_lag(&s)?;
    println!("estimated lag {} (fallback: {:?})", lag.lag, lag.fallback);

    let aep = FixtureParams { n: 300, period: 12, head: 40, epsilon: 1e-8, ..Default::default() };
    let tail = TimeSeries::new(generate(FixtureKind::Aep, &aep)?)?;
    let profile = estimate_period(&tail, 1e-6);
    println!(
        "aep fixture: period {}, tail starts at {}, satisfied {}",
        profile.period, profile.tail_start, profile.satisfied
    );
    Ok(())
}
