//! Ordinary least squares used by the Weyl, power-law, logarithmic and
//! expansion fits.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::linalg::CMatrix;

use crate::{Error, Result};
#[allow(unused_imports)] // shadowed by the inherent f64 methods whenever std is linked
use num_traits::Float;

/// Straight-line fit `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFewPoints {
            what: "linear fit",
            found: x.len(),
            required: 2,
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    if sxx == 0.0 {
        return Err(Error::InvalidParameter {
            name: "x",
            reason: "abscissae are all equal".into(),
        });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = r_squared(y, x.iter().map(|&xi| slope * xi + intercept));
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Coefficient of determination of `predicted` against `observed`.
pub fn r_squared(observed: &[f64], predicted: impl Iterator<Item = f64>) -> f64 {
    let n = observed.len() as f64;
    let mean = observed.iter().sum::<f64>() / n;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (&o, p) in observed.iter().zip(predicted) {
        ss_res += (o - p) * (o - p);
        ss_tot += (o - mean) * (o - mean);
    }
    if ss_tot == 0.0 {
        return if ss_res == 0.0 { 1.0 } else { 0.0 };
    }
    (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
}

/// Least-squares solution of `Σ_j coeffs[j]·basis[j] ≈ y` by Householder QR.
///
/// Returns the coefficients together with the 2-norm condition number of the
/// column-scaled design matrix.
pub fn least_squares(basis: &[Vec<f64>], y: &[f64]) -> Result<(Vec<f64>, f64)> {
    let k = basis.len();
    let m = y.len();
    if k == 0 || basis.iter().any(|b| b.len() != m) {
        return Err(Error::LengthMismatch {
            expected: m,
            found: basis.first().map_or(0, Vec::len),
        });
    }
    if m < k {
        return Err(Error::TooFewPoints {
            what: "least squares",
            found: m,
            required: k,
        });
    }
    // column-major working copy, columns scaled to unit norm
    let scales: Vec<f64> = basis
        .iter()
        .map(|b| {
            let s = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    let mut a: Vec<Vec<f64>> = basis
        .iter()
        .zip(&scales)
        .map(|(b, s)| b.iter().map(|v| v / s).collect())
        .collect();
    let mut rhs = y.to_vec();
    for j in 0..k {
        let norm = a[j][j..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::IllConditioned(f64::INFINITY));
        }
        let alpha = if a[j][j] > 0.0 { -norm } else { norm };
        let mut v = vec![0.0; m];
        v[j..].copy_from_slice(&a[j][j..]);
        v[j] -= alpha;
        let vnorm2: f64 = v[j..].iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for col in a.iter_mut().skip(j) {
                let d: f64 = v[j..].iter().zip(&col[j..]).map(|(p, q)| p * q).sum();
                let f = 2.0 * d / vnorm2;
                for (c, vi) in col[j..].iter_mut().zip(&v[j..]) {
                    *c -= f * vi;
                }
            }
            let d: f64 = v[j..].iter().zip(&rhs[j..]).map(|(p, q)| p * q).sum();
            let f = 2.0 * d / vnorm2;
            for (r, vi) in rhs[j..].iter_mut().zip(&v[j..]) {
                *r -= f * vi;
            }
        }
    }
    let condition = scaled_condition(basis, &scales);
    let mut coeffs = vec![0.0; k];
    for j in (0..k).rev() {
        let mut s = rhs[j];
        for (i, c) in coeffs.iter().enumerate().skip(j + 1) {
            s -= a[i][j] * c;
        }
        coeffs[j] = s / a[j][j];
    }
    for (c, s) in coeffs.iter_mut().zip(&scales) {
        *c /= s;
    }
    Ok((coeffs, condition))
}

fn scaled_condition(basis: &[Vec<f64>], scales: &[f64]) -> f64 {
    let (m, k) = (basis[0].len(), basis.len());
    let mut data = Vec::with_capacity(m * k);
    for i in 0..m {
        data.extend(basis.iter().zip(scales).map(|(b, s)| Complex64::new(b[i] / s, 0.0)));
    }
    let sv = CMatrix::from_row_major(m, k, data)
        .expect("shape checked")
        .singular_values();
    let min = sv[sv.len() - 1];
    if min > 0.0 {
        sv[0] / min
    } else {
        f64::INFINITY
    }
}
