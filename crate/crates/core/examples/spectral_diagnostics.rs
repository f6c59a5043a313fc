//! Krylov section of the linear block and its spectrum.

use spars::generate::{generate, FixtureKind, FixtureParams};
use spars::linear::fit_ar;
use spars::signal::TimeSeries;
use spars::spectra::ap_diagnose;

fn main() -> spars::Result<()> {
    for period in [2, 6, 12] {
        let p = FixtureParams { n: 300, period, head: 30, epsilon: 1e-8, ..Default::default() };
        let s = TimeSeries::new(generate(FixtureKind::Aep, &p)?)?;
        let c = fit_ar(&s.sample(p.head + 1, p.n)?, period, 1e-8)?;
        let d = ap_diagnose(&c, &s, 1e-6)?;
        let sp = &d.spectrum;
        println!(
            "T = {period}: k = {}, anchor {}, max |z^T - 1| {:.1e}, mimicry {:.1e}, radius {:.6}",
            d.section.dim(),
            d.anchor,
            sp.max_unit_root_defect,
            sp.mimicry_norm,
            sp.spectral_radius
        );
        for z in &sp.eigenvalues {
            print!(" {:+.4}{:+.4}i", z.re, z.im);
        }
        println!();
    }
    Ok(())
}
