use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use nsdecay::decay_analysis::{
    fit, log_grid, sweep, theoretical_rate, DecaySeries, FitModel, NormKind, NormSpec,
    SweepSettings, Witness,
};
use nsdecay::eigensystem::{eigenvalues, propagator, Wavenumber};
use nsdecay::littlewood_paley::{
    block_norm, build_partition, Band, BesovSpec, Component, PNative, PartitionProfile,
};
use nsdecay::oscillatory_quadrature::QuadOptions;
use nsdecay::propagator::{evolve, pointwise_energy, ModeData};
use nsdecay::spectral::{Angular, Field, SpectralState, Term};
use nsdecay::witness_data::gaussian_v0;

fn w(r: f64) -> Wavenumber {
    Wavenumber::new(r).unwrap()
}

fn gaussian_bump(lambda: f64) -> SpectralState {
    let term = Term::new(
        Angular::Isotropic,
        Arc::new(move |r: f64| Complex64::new((-(lambda * r).powi(2)).exp(), 0.0)),
        (0.0, 10.0 / lambda),
    );
    SpectralState::new(Field::single(term), Field::zero())
}

proptest! {
    #[test]
    fn trace_and_determinant(rho in 1e-3f64..50.0) {
        let e = eigenvalues(w(rho));
        let r2 = rho * rho;
        prop_assert!((e.lambda_plus + e.lambda_minus + r2).norm() <= 1e-12 * r2.max(1.0));
        prop_assert!((e.lambda_plus * e.lambda_minus - r2).norm() <= 1e-12 * r2);
    }

    #[test]
    fn semigroup(rho in 0.01f64..10.0, s in 0.0f64..10.0, t in 0.0f64..10.0) {
        let a = propagator(w(rho), s).unwrap();
        let b = propagator(w(rho), t).unwrap();
        let ab = propagator(w(rho), s + t).unwrap();
        let d = a.compose(&b).relative_distance(&ab);
        prop_assert!(d <= 1e-10, "rho {} s {} t {}: {:e}", rho, s, t, d);
    }

    #[test]
    fn energy_is_nonincreasing(
        rho in 0.01f64..8.0,
        a0 in -1.0f64..1.0,
        v0 in -1.0f64..1.0,
        t in 0.0f64..20.0,
        dt in 0.0f64..5.0,
    ) {
        let mode = ModeData::new(a0, v0);
        let e0 = pointwise_energy(mode, w(rho), t).unwrap();
        let e1 = pointwise_energy(mode, w(rho), t + dt).unwrap();
        prop_assert!(e1 <= e0 * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn partition_of_unity(width in 0.05f64..0.45, log_r in -12.0f64..12.0) {
        let p = build_partition(width).unwrap();
        let r = 2f64.powf(log_r);
        prop_assert!((p.partial_sum(r, -16, 16) - 1.0).abs() <= 1e-12);
        let active = p.active_indices(r);
        for j in -16..=16 {
            if !active.contains(&j) {
                prop_assert_eq!(p.phi(j, r), 0.0);
            }
        }
    }

    #[test]
    fn power_law_fits_are_window_stable(
        sigma in -3.0f64..-0.25,
        amp in 0.1f64..10.0,
        wobble in 0.0f64..0.005,
    ) {
        let times = log_grid(1e2, 1e4, 12);
        let values: Vec<f64> = times
            .iter()
            .map(|t| amp * t.powf(sigma) * (1.0 + wobble * t.ln().sin()))
            .collect();
        let s = DecaySeries::from_values("synthetic", "v", times, values).unwrap();
        let whole = fit(&s, FitModel::PowerLaw, None).unwrap();
        for window in [(1e2, 1e3), (1e3, 1e4), (3.16e2, 1e4), (1e2, 3.17e3)] {
            let sub = fit(&s, FitModel::PowerLaw, Some(window)).unwrap();
            prop_assert!((sub.exponent - whole.exponent).abs() <= 0.02);
        }
        prop_assert!((whole.exponent - sigma).abs() <= 0.02);
    }

    #[test]
    fn theoretical_rate_is_monotone(p in 2.0f64..64.0, q in 2.0f64..64.0) {
        let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
        prop_assert!(theoretical_rate(hi).unwrap() <= theoretical_rate(lo).unwrap());
        prop_assert!(theoretical_rate(f64::INFINITY).unwrap() <= theoretical_rate(hi).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn evolved_gaussian_stays_hermitian(
        t in 0.05f64..30.0,
        xs in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0), 8),
    ) {
        let s = evolve(&gaussian_v0(), t).unwrap().state();
        let samples: Vec<[f64; 3]> = xs.into_iter().map(|(a, b, c)| [a, b, c]).collect();
        prop_assert!(s.a_hat.is_hermitian_on(&samples, 1e-12));
        prop_assert!(s.v_hat.is_hermitian_on(&samples, 1e-12));
    }

    #[test]
    fn block_scaling_law(k in -2i32..=2, j in -3i32..=3) {
        let p = PartitionProfile::default();
        let opts = QuadOptions::default();
        let lambda = 2f64.powi(k);
        let lhs = block_norm(&gaussian_bump(lambda), Component::A, &p, j, PNative::Two, 1.0, &opts).unwrap().value;
        let rhs = 2f64.powf(-1.5 * k as f64)
            * block_norm(&gaussian_bump(1.0), Component::A, &p, j + k, PNative::Two, 1.0, &opts).unwrap().value;
        prop_assert!((lhs - rhs).abs() <= 1e-8 * rhs, "{} vs {}", lhs, rhs);
    }
}

#[test]
fn interpolated_exponents_are_monotone_in_p() {
    let times = log_grid(10.0, 1000.0, 6);
    let mut exponents = Vec::new();
    for p in [2.0, 4.0, 8.0, f64::INFINITY] {
        let spec = BesovSpec::new(0.0, p, 2.0, Band::Full).unwrap();
        let norm = NormSpec::new(NormKind::Besov(spec), Component::A);
        let s = sweep(&Witness::Heat, &norm, &times, &SweepSettings::default()).unwrap();
        assert!(s.acceptance_grade());
        exponents.push(fit(&s, FitModel::PowerLaw, None).unwrap().exponent);
    }
    assert!(
        exponents.windows(2).all(|e| e[1] <= e[0] + 1e-9),
        "{exponents:?}"
    );
    assert!((exponents[0] + 0.75).abs() < 0.01, "{exponents:?}");
}
