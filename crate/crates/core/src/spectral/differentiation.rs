//! Spectrally accurate x-derivatives on the model grids.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;
#[allow(unused_imports)] // shadowed by the inherent f64 methods whenever std is linked
use num_traits::Float;

use super::{ModelId, SpectralSystem};
use crate::quadrature::composite_panels;
use crate::{Error, Result};

/// Fourier differentiation of samples of a `period`-periodic function on a
/// uniform grid (direct DFT, `O(n²)`).
fn periodic_derivative(values: &[Complex64], period: f64) -> Vec<Complex64> {
    let n = values.len();
    let twiddle: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
        .collect();
    let mut spectrum = vec![Complex64::zero(); n];
    for (k, s) in spectrum.iter_mut().enumerate() {
        let mut acc = Complex64::zero();
        for (j, &f) in values.iter().enumerate() {
            acc += f * twiddle[(j * k) % n];
        }
        *s = acc;
    }
    let scale = 2.0 * PI / period;
    for (k, s) in spectrum.iter_mut().enumerate() {
        let freq = if 2 * k < n {
            k as f64
        } else if 2 * k == n {
            0.0
        } else {
            k as f64 - n as f64
        };
        *s *= Complex64::new(0.0, scale * freq) / n as f64;
    }
    (0..n)
        .map(|j| {
            spectrum
                .iter()
                .enumerate()
                .map(|(k, &s)| s * twiddle[(j * k) % n].conj())
                .sum()
        })
        .collect()
}

/// Panel-wise polynomial differentiation on a composite Gauss–Legendre grid.
fn panel_derivative(nodes: &[f64], values: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::zero(); values.len()];
    for (start, len) in composite_panels(nodes.len()) {
        let x = &nodes[start..start + len];
        let f = &values[start..start + len];
        let bary: Vec<f64> = (0..len)
            .map(|j| {
                1.0 / (0..len)
                    .filter(|&k| k != j)
                    .map(|k| x[j] - x[k])
                    .product::<f64>()
            })
            .collect();
        for i in 0..len {
            let mut acc = Complex64::zero();
            let mut diag = 0.0;
            for j in 0..len {
                if i == j {
                    continue;
                }
                let d = (bary[j] / bary[i]) / (x[i] - x[j]);
                acc += f[j] * d;
                diag -= d;
            }
            out[start + i] = acc + f[i] * diag;
        }
    }
    out
}

/// `d/dx` of grid samples.
///
/// Periodic grids (circle and twisted model) use Fourier differentiation, so the
/// input is treated as periodic on the domain; the Dirichlet grid uses
/// polynomial differentiation within each Gauss–Legendre panel.
pub fn x_derivative(system: &SpectralSystem, values: &[Complex64]) -> Result<Vec<Complex64>> {
    if values.len() != system.grid_len() {
        return Err(Error::LengthMismatch {
            expected: system.grid_len(),
            found: values.len(),
        });
    }
    Ok(match system.model() {
        ModelId::DirichletInterval => panel_derivative(system.grid(), values),
        _ => periodic_derivative(values, system.domain().1),
    })
}

/// Applies the model's differential operator to `f`, which must lie in its
/// domain (vanish at the ends for Dirichlet, satisfy `f(1) = h·f(0)` for the
/// twisted model).
pub fn apply_model_operator(system: &SpectralSystem, f: &[Complex64]) -> Result<Vec<Complex64>> {
    let minus_i = Complex64::new(0.0, -1.0);
    match system.model() {
        ModelId::DirichletInterval => {
            let d2 = x_derivative(system, &x_derivative(system, f)?)?;
            Ok(d2.into_iter().map(|z| -z).collect())
        }
        ModelId::PeriodicCircle => Ok(x_derivative(system, f)?
            .into_iter()
            .map(|z| z * minus_i)
            .collect()),
        ModelId::TwistedH => {
            // f = h^x p with p periodic: f' = h^x (ln h · p + p')
            let h = system.h().expect("twisted system carries h");
            let ln_h = h.ln();
            let gauge: Vec<f64> = system.grid().iter().map(|&x| h.powf(x)).collect();
            let p: Vec<Complex64> = f.iter().zip(&gauge).map(|(z, g)| z / g).collect();
            let dp = x_derivative(system, &p)?;
            Ok(p
                .iter()
                .zip(&dp)
                .zip(&gauge)
                .map(|((p, dp), g)| (p * ln_h + dp) * g * minus_i)
                .collect())
        }
    }
}
