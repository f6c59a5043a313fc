//! Property tests for the invariants of each stage.

mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

use spars::gru::{gru_gates, GruParams, GruState, Normalization};
use spars::io::format_float;
use spars::linear::{fit_ar, predict_linear, ArCoefficients};
use spars::model::{fit_mixing_weights, rolling_forecast, SparsModel};
use spars::persist::{from_json, to_json};
use spars::signal::{autocorrelation, hankel, window, TimeSeries, WindowVector};
use spars::sparse::{sparse_lsq, thresholded_rank};

use common::*;

fn samples(min: usize, max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, min..max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hankel_is_constant_on_anti_diagonals(x in samples(2, 60), frac in 0.0f64..1.0) {
        let n = x.len();
        let lag = 1 + ((n - 1) as f64 * frac) as usize;
        let h = hankel(&TimeSeries::new(x.clone()).unwrap(), lag).unwrap();
        prop_assert_eq!(h.data().shape(), (lag, n - lag + 1));
        for i in 0..lag {
            for j in 0..h.columns() {
                prop_assert_eq!(h.data()[(i, j)], x[i + j]);
            }
        }
    }

    #[test]
    fn windows_are_hankel_columns(x in samples(2, 60), frac in 0.0f64..1.0) {
        let n = x.len();
        let lag = 1 + ((n - 1) as f64 * frac) as usize;
        let s = TimeSeries::new(x).unwrap();
        let h = hankel(&s, lag).unwrap();
        for t in lag..=n {
            let w = window(&s, lag, t).unwrap();
            let col: Vec<f64> = h.data().column(t - lag).iter().copied().collect();
            prop_assert_eq!(w.entries(), col.as_slice());
            prop_assert_eq!(w.latest(), s.at(t).unwrap());
        }
    }

    #[test]
    fn autocorrelation_is_normalised(x in samples(3, 80)) {
        let s = TimeSeries::new(x.clone()).unwrap();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        prop_assume!(x.iter().any(|v| (v - mean).abs() > 1e-6));
        let rho = autocorrelation(&s, x.len() - 1).unwrap();
        prop_assert!((rho[0] - 1.0).abs() < 1e-12);
        for r in &rho {
            prop_assert!(r.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn sparse_solve_respects_cap_and_certificate(
        seed in any::<u64>(),
        rows in 4usize..14,
        cols in 2usize..8,
        rank in 1usize..5,
        outputs in 1usize..4,
        delta_exp in -10i32..0,
    ) {
        let mut r = rng(seed);
        let a = low_rank(&mut r, rows, cols, rank.min(cols));
        let y = DMatrix::from_fn(rows, outputs, |_, _| r.random_range(-1.0..1.0));
        let delta = 10f64.powi(delta_exp);
        let rk = thresholded_rank(&a, delta).unwrap().rank;
        prop_assume!(rk > 0);
        let rep = sparse_lsq(&a, &y, delta, None).unwrap();
        prop_assert_eq!(rep.rank, rk);
        prop_assert!(rep.certificate_holds());
        prop_assert_eq!(rep.certificate_beta, 1.0);
        prop_assert!(rep.nnz <= outputs * rk);
        for (k, s) in rep.supports.iter().enumerate() {
            prop_assert!(s.len() <= rk);
            let nnz = rep.solution.column(k).iter().filter(|v| **v != 0.0).count();
            prop_assert!(nnz <= s.len());
        }
    }

    #[test]
    fn omp_residual_shrinks_with_a_larger_cap(
        seed in any::<u64>(),
        rows in 6usize..14,
        cols in 2usize..7,
    ) {
        let mut r = rng(seed);
        let a = DMatrix::from_fn(rows, cols, |_, _| r.random_range(-1.0..1.0));
        let y = DMatrix::from_fn(rows, 1, |_, _| r.random_range(-1.0..1.0));
        let mut last = f64::INFINITY;
        for cap in 1..=cols {
            let rep = sparse_lsq(&a, &y, 1e-10, Some(cap)).unwrap();
            prop_assert!(rep.residual_frobenius <= last * (1.0 + 1e-9) + 1e-12);
            last = rep.residual_frobenius;
        }
    }

    #[test]
    fn omp_matches_exhaustive_search_on_planted_supports(
        seed in any::<u64>(),
        rows in 8usize..16,
        cols in 3usize..7,
        k in 1usize..3,
    ) {
        let mut r = rng(seed);
        let a = DMatrix::from_fn(rows, cols, |_, _| r.random_range(-1.0..1.0));
        let mut x = vec![0.0; cols];
        for j in 0..k.min(cols) {
            x[(j * 2) % cols] = r.random_range(0.5..2.0);
        }
        let y = &a * DMatrix::from_column_slice(cols, 1, &x);
        let yv: Vec<f64> = y.iter().copied().collect();
        let delta = 1e-9;
        let best = min_support_size(&a, &yv, delta);
        let rep = sparse_lsq(&a, &y, delta, None).unwrap();
        prop_assert!(rep.supports[0].len() >= best);
        prop_assert!(rep.residual_frobenius <= delta * y.norm() * (1.0 + 1e-9) + 1e-12);
        prop_assert!(
            (support_residual(&a, &yv, &rep.supports[0]) - rep.residual_frobenius).abs()
                <= 1e-9 * y.norm().max(1.0)
        );
    }

    #[test]
    fn ar_nnz_bounded_by_thresholded_rank(x in samples(12, 80), lag in 1usize..6) {
        let s = TimeSeries::new(x.clone()).unwrap();
        prop_assume!(x.len() > 2 * lag);
        let h = hankel(&TimeSeries::new(x[..x.len() - 1].to_vec()).unwrap(), lag).unwrap();
        let rk = thresholded_rank(h.data(), 1e-8).unwrap().rank;
        prop_assume!(rk > 0);
        let c = fit_ar(&s, lag, 1e-8).unwrap();
        prop_assert!(c.nnz() <= rk);
        prop_assert!(c.nnz() <= lag);
    }

    #[test]
    fn linear_prediction_is_the_weighted_window(
        c in prop::collection::vec(-2.0f64..2.0, 1..6),
        seed in any::<u64>(),
    ) {
        let mut r = rng(seed);
        let lag = c.len();
        let e: Vec<f64> = (0..lag).map(|_| r.random_range(-1.0..1.0)).collect();
        let w = WindowVector::from_entries(e.clone(), lag).unwrap();
        let coeffs = ArCoefficients::new(c.clone()).unwrap();
        let expected: f64 = c.iter().zip(e.iter().rev()).map(|(a, b)| a * b).sum();
        prop_assert!((predict_linear(&coeffs, &w).unwrap() - expected).abs() <= 1e-12);
    }

    #[test]
    fn gate_values_stay_in_range(
        seed in any::<u64>(),
        hidden in 1usize..6,
        lag in 1usize..6,
        scale in 0.1f64..20.0,
    ) {
        let mut r = rng(seed);
        let mut p = GruParams::random(hidden, lag, &mut r);
        for v in p.values_mut() {
            *v *= scale;
        }
        let x: Vec<f64> = (0..lag).map(|_| r.random_range(-3.0..3.0)).collect();
        let h0 = GruState { h: nalgebra::DVector::from_fn(hidden, |_, _| r.random_range(-1.0..1.0)) };
        let g = gru_gates(&p, &WindowVector::from_entries(x.clone(), lag).unwrap(), &h0).unwrap();
        for j in 0..hidden {
            prop_assert!((0.0..=1.0).contains(&g.reset[j]));
            prop_assert!((0.0..=1.0).contains(&g.update[j]));
            prop_assert!((-1.0..=1.0).contains(&g.candidate[j]));
            let (lo, hi) = if g.candidate[j] < h0.h[j] {
                (g.candidate[j], h0.h[j])
            } else {
                (h0.h[j], g.candidate[j])
            };
            prop_assert!(g.state.h[j] >= lo - 1e-15 && g.state.h[j] <= hi + 1e-15);
        }
        let oracle = gru_step_oracle(&p, &x, h0.h.as_slice());
        for (o, h) in oracle.iter().zip(g.state.h.iter()) {
            prop_assert!((o - h).abs() <= 1e-13);
        }
    }

    #[test]
    fn mixing_is_linear_in_block_outputs(
        seed in any::<u64>(),
        w in prop::collection::vec(-2.0f64..2.0, 3),
    ) {
        let mut r = rng(seed);
        let lag = 4;
        let x: Vec<f64> = (0..40).map(|t| (t as f64 * 0.4).sin() + r.random_range(-0.1..0.1)).collect();
        let ar = ArCoefficients::new((0..lag).map(|_| r.random_range(-0.5..0.5)).collect()).unwrap();
        let blocks = vec![GruParams::random(3, lag, &mut r), GruParams::random(3, lag, &mut r)];
        let norm = Normalization::fit(&x);
        let model = SparsModel::new(ar, blocks, w.clone(), norm).unwrap();
        let s = TimeSeries::new(x.clone()).unwrap();
        let b = model.block_predictions(&x).unwrap();
        let mixed = model.predict_sequence(&s).unwrap();
        for (i, m) in mixed.iter().enumerate() {
            let manual: f64 = (0..3).map(|k| w[k] * b[(i, k)]).sum();
            prop_assert!((m - manual).abs() <= 1e-12 * (1.0 + manual.abs()));
        }
    }

    #[test]
    fn mixing_fit_recovers_planted_weights(
        seed in any::<u64>(),
        w in prop::collection::vec(0.2f64..2.0, 3),
    ) {
        let mut r = rng(seed);
        let design = DMatrix::from_fn(50, 3, |_, _| r.random_range(-1.0..1.0));
        let targets: Vec<f64> = (&design * DMatrix::from_column_slice(3, 1, &w)).iter().copied().collect();
        let (fit, nnz, residual) = fit_mixing_weights(&design, &targets, 1e-10).unwrap();
        prop_assert_eq!(nnz, 3);
        prop_assert!(residual <= 1e-9);
        for (a, b) in fit.iter().zip(&w) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn forecast_rmse_is_root_mean_square_of_step_errors(
        c in prop::collection::vec(-0.6f64..0.6, 1..4),
        seed in any::<u64>(),
        horizon in 1usize..20,
    ) {
        let mut r = rng(seed);
        let lag = c.len();
        let model = SparsModel::linear_only(ArCoefficients::new(c).unwrap());
        let w = WindowVector::from_entries((0..lag).map(|_| r.random_range(-1.0..1.0)).collect(), lag).unwrap();
        let truth = TimeSeries::new((0..horizon).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap();
        let f = rolling_forecast(&model, &w, horizon, Some(&truth)).unwrap();
        let errs = f.per_step_abs_error.as_ref().unwrap();
        prop_assert_eq!(errs.len(), horizon);
        let ms = errs.iter().map(|e| e * e).sum::<f64>() / horizon as f64;
        prop_assert!((f.rmse.unwrap() - ms.sqrt()).abs() <= 1e-14);
    }

    #[test]
    fn normalisation_maps_range_onto_unit_interval(x in samples(2, 50)) {
        let n = Normalization::fit(&x);
        for v in &x {
            let z = n.apply(*v);
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&z));
            prop_assert!((n.invert(z) - v).abs() <= 1e-9 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn model_json_round_trip_is_exact(seed in any::<u64>(), blocks in 0usize..3, hidden in 1usize..4) {
        let mut r = rng(seed);
        let lag = 3;
        let ar = ArCoefficients::new((0..lag).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap();
        let gru: Vec<GruParams> = (0..blocks).map(|_| GruParams::random(hidden, lag, &mut r)).collect();
        let mix = (0..=blocks).map(|_| r.random_range(-1.0..1.0)).collect();
        let norm = Normalization { scale: r.random_range(0.1..3.0), offset: r.random_range(-1.0..1.0) };
        let model = SparsModel::new(ar, gru, mix, norm).unwrap();
        let text = to_json(&model);
        let back = from_json(&text).unwrap();
        prop_assert_eq!(&back.ar, &model.ar);
        prop_assert_eq!(&back.gru_blocks, &model.gru_blocks);
        prop_assert_eq!(&back.mix, &model.mix);
        prop_assert_eq!(back.normalization, model.normalization);
        prop_assert_eq!(to_json(&back), text);
    }

    #[test]
    fn float_text_round_trips(x in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
    }
}
