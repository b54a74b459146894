//! End-to-end checks through the public API against sums written out by hand.

use std::f64::consts::PI;

use nhtrace_core::dixmier::singular_values;
use nhtrace_core::fourier::{inverse_l_fourier, l_fourier, GridFunction};
use nhtrace_core::quantization::{make_multiplier, quantize};
use nhtrace_core::spectral::{build_system, minimum_grid};
use nhtrace_core::trace::{heat_trace_curve, log_spaced, DiagonalWeights};
use nhtrace_core::{Complex64, ModelId, SpectralSystem};

fn system(model: ModelId, h: Option<f64>, modes: usize) -> SpectralSystem {
    build_system(model, h, modes, minimum_grid(model, modes)).unwrap()
}

#[test]
fn circle_heat_trace_matches_the_direct_sum() {
    let modes = 400;
    let s = system(ModelId::PeriodicCircle, None, modes);
    let (m, q) = (0.5, 1.0);
    let t = log_spaced(0.05, 5.0, 10).unwrap();
    let curve = heat_trace_curve(&DiagonalWeights::bracket_power(s.spectrum(), m), q, &t).unwrap();
    for (&t, v) in t.iter().zip(&curve.values) {
        let mut direct = (-t).exp();
        for k in 1..=modes {
            let b = (1.0 + (k * k) as f64).sqrt();
            direct += 2.0 * b.powf(m) * (-t * b.powf(q)).exp();
        }
        assert!((v.re - direct).abs() <= 1e-12 * direct, "t = {t}: {} vs {direct}", v.re);
        assert!(v.im.abs() <= 1e-12 * direct);
    }
}

#[test]
fn dirichlet_heat_trace_matches_the_direct_sum() {
    let modes = 200;
    let s = system(ModelId::DirichletInterval, None, modes);
    let t = [0.01, 0.1, 1.0];
    let curve = heat_trace_curve(&DiagonalWeights::bracket_power(s.spectrum(), 0.0), 2.0, &t).unwrap();
    for (&t, v) in t.iter().zip(&curve.values) {
        // ⟨k⟩² = (1 + (kπ)⁴)^{1/2} for the second-order operator
        let direct: f64 = (1..=modes).map(|k| (-t * (1.0 + (k as f64 * PI).powi(4)).sqrt()).exp()).sum();
        assert!((v.re - direct).abs() <= 1e-12 * direct, "t = {t}: {} vs {direct}", v.re);
    }
}

#[test]
fn twisted_transform_isolates_two_closed_form_modes() {
    let h = 2.0_f64;
    let s = system(ModelId::TwistedH, Some(h), 16);
    let u = |j: i64, x: f64| Complex64::from_polar(h.powf(x), 2.0 * PI * j as f64 * x);
    let f = GridFunction::from_fn(&s, |x| u(1, x) * 3.0 - u(-2, x) * Complex64::new(0.0, 2.0));

    let c = l_fourier(&s, &f).unwrap();
    let scale = c.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
    for (&label, z) in s.labels().iter().zip(c.values()) {
        if label != 1 && label != -2 {
            assert!(z.norm() <= 1e-10 * scale, "label {label}: {z}");
        }
    }
    let back = inverse_l_fourier(&s, &c).unwrap();
    assert!(back.max_distance(&f) <= 1e-10 * 3.0 * h);
}

#[test]
fn quantized_circle_multiplier_has_bracket_singular_values() {
    let modes = 24;
    let s = system(ModelId::PeriodicCircle, None, modes);
    let symbol = make_multiplier(&s, |_, b| Complex64::new(1.0 / b, 0.0), -1.0, 1.0).unwrap();
    let op = quantize(&s, &symbol).unwrap();
    let svals = singular_values(&op).unwrap();

    let mut direct: Vec<f64> = (-(modes as i64)..=modes as i64).map(|k| 1.0 / (1.0 + (k * k) as f64).sqrt()).collect();
    direct.sort_by(|a, b| b.total_cmp(a));
    assert_eq!(svals.len(), direct.len());
    for (a, b) in svals.iter().zip(&direct) {
        assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
    }
}
