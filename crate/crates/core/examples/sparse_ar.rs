//! Sparse AR fit, companion propagation and shift consistency.

use spars::generate::{generate, FixtureKind, FixtureParams};
use spars::linear::{companion, fit_ar, fit_dense_ar, predict_linear, shift_consistency};
use spars::signal::{window, TimeSeries};

fn main() -> spars::Result<()> {
    let alt = TimeSeries::new(generate(FixtureKind::Alternating, &FixtureParams { n: 20, ..Default::default() })?)?;
    let c = fit_ar(&alt, 2, 1e-8)?;
    println!("alternating: c = {:?}, nnz {}", c.coefficients(), c.nnz());

    let s = TimeSeries::new(generate(FixtureKind::Sine, &FixtureParams { n: 200, period: 20, ..Default::default() })?)?;
    let sparse = fit_ar(&s, 20, 1e-8)?;
    let dense = fit_dense_ar(&s, 20)?;
    println!("sine: sparse nnz {}, dense nnz {}", sparse.nnz(), dense.nnz());

    let w = window(&s, 20, 100)?;
    println!("x_101 = {:.6}, predicted {:.6}", s.at(101).unwrap(), predict_linear(&sparse, &w)?);

    let cm = companion(&sparse);
    println!("companion prediction {:.6}", cm.predict(&w)?);
    for shift in [1, 5, 20] {
        let sc = shift_consistency(&sparse, &s, shift)?;
        println!("S = {shift}: relative shift residual {:.1e}", sc.relative());
    }
    Ok(())
}
