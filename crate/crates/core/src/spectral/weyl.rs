use alloc::vec::Vec;


use super::Spectrum;
use crate::regression::linear_fit;
use crate::{Error, Result};
#[allow(unused_imports)] // shadowed by the inherent f64 methods whenever std is linked
use num_traits::Float;

/// Minimum number of counting samples a Weyl fit accepts.
const MIN_SAMPLES: usize = 8;

/// `N(λ) = #{ξ : ⟨ξ⟩ ≤ λ}` over the truncation.
///
/// Counts above `0.9·max⟨ξ⟩` are biased by the truncation; they are returned but
/// logged as a warning.
pub fn weyl_counting(spectrum: &Spectrum, lam: f64) -> usize {
    if lam > 0.9 * spectrum.max_bracket() {
        log::warn!(
            "weyl_counting at lambda = {lam} exceeds 0.9 x max bracket {}; truncation bias",
            spectrum.max_bracket()
        );
    }
    spectrum.brackets().partition_point(|&b| b <= lam)
}

/// Log-log least-squares fit of the counting function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylFit {
    /// Fitted exponent `Q`.
    pub exponent: f64,
    /// Fitted constant `c` in `N(λ) ≈ c·λ^Q`.
    pub constant: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Distinct brackets inside `window`, each paired with the midpoint of the
/// jump of `N` there.
fn counting_samples(spectrum: &Spectrum, window: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = window;
    if !(lo > 0.0) || !(hi > lo) {
        return Err(Error::InvalidWindow {
            lo,
            hi,
            reason: "need 0 < lo < hi",
        });
    }
    if spectrum.brackets().partition_point(|&b| b <= lo) == 0 {
        return Err(Error::EmptyCount(lo));
    }
    // N jumps exactly at the brackets; the midpoint of each jump keeps the
    // staircase centred on the smooth counting law.
    let brackets = spectrum.brackets();
    let mut samples = Vec::new();
    let mut i = 0;
    while i < brackets.len() {
        let b = brackets[i];
        let mut j = i;
        while j < brackets.len() && brackets[j] == b {
            j += 1;
        }
        if b >= lo && b <= hi {
            samples.push((b, 0.5 * (i + j) as f64));
        }
        i = j;
    }
    if samples.len() < MIN_SAMPLES {
        return Err(Error::TooFewPoints {
            what: "Weyl fit",
            found: samples.len(),
            required: MIN_SAMPLES,
        });
    }
    Ok(samples)
}

/// Least-squares slope and intercept of `log N(λ)` against `log λ` over `window`.
pub fn fit_weyl_law(spectrum: &Spectrum, window: (f64, f64)) -> Result<WeylFit> {
    let samples = counting_samples(spectrum, window)?;
    if window.1 > 0.9 * spectrum.max_bracket() {
        log::warn!("Weyl window reaches into the last 10% of the truncation");
    }
    let x: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let fit = linear_fit(&x, &y)?;
    Ok(WeylFit {
        exponent: fit.slope,
        constant: fit.intercept.exp(),
        r_squared: fit.r_squared,
        samples: samples.len(),
    })
}

pub fn fit_weyl_exponent(spectrum: &Spectrum, window: (f64, f64)) -> Result<f64> {
    fit_weyl_law(spectrum, window).map(|f| f.exponent)
}

/// Constant `c` of `N(λ) ≈ c·λ^q` with the exponent held at `q`: the geometric
/// mean of `N(λ)/λ^q` over the samples in `window`.
pub fn fit_weyl_constant(spectrum: &Spectrum, q: f64, window: (f64, f64)) -> Result<f64> {
    let samples = counting_samples(spectrum, window)?;
    let mean = samples
        .iter()
        .map(|&(lam, n)| n.ln() - q * lam.ln())
        .sum::<f64>()
        / samples.len() as f64;
    Ok(mean.exp())
}
