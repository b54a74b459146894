//! Regularized traces and fits of their small-`t` behaviour.
//!
//! Every trace here is a sum over the retained modes of a per-mode weight
//! (the diagonal `M[ξ][ξ]` of an operator matrix, or the values of a
//! multiplier) times a regularizing factor: `e^{−t⟨ξ⟩^q}`, `e^{−tσ(ξ)}` or
//! `ψ(t·E(ξ))`. Sums run in ascending bracket order with compensation.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Zero;
#[allow(unused_imports)] // shadowed by the inherent f64 methods whenever std is linked
use num_traits::Float;

use crate::quadrature::composite_gauss_legendre;
use crate::quantization::{QuantizedOperator, Symbol};
use crate::regression::{least_squares, linear_fit, r_squared};
use crate::{Error, ModelId, Result, Spectrum};

/// Tail contributions above this fraction of the total mark truncation bias.
pub const TAIL_TOLERANCE: f64 = 1e-6;

/// Points per decade of [`log_spaced`] grids used by the experiments.
pub const POINTS_PER_DECADE: usize = 40;

/// Log-spaced points from `lo` to `hi` inclusive, `per_decade` per factor 10.
pub fn log_spaced(lo: f64, hi: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidWindow {
            lo,
            hi,
            reason: "need 0 < lo < hi",
        });
    }
    if per_decade == 0 {
        return Err(Error::ZeroCount { name: "per_decade" });
    }
    let decades = (hi / lo).log10();
    let n = ((decades * per_decade as f64).round() as usize).max(1);
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..=n)
        .map(|i| (a + (b - a) * i as f64 / n as f64).exp())
        .collect())
}

/// Which regularization produced a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularizer {
    /// `Tr(A e^{−t M_q})` with `M_q = ⟨ξ⟩^q`.
    HeatMq,
    /// `Tr(e^{−tA})` for a positive multiplier `A`.
    SemigroupA,
    /// `Tr(A ψ(tE))`.
    CutoffPsi,
}

impl Regularizer {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::HeatMq => "heat_Mq",
            Self::SemigroupA => "semigroup_A",
            Self::CutoffPsi => "cutoff_psi",
        }
    }
}

/// Built-in cutoff functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cutoff {
    /// `exp(1 − 1/(1 − ((s−c)/r)²))` on `(c−r, c+r)`, zero outside.
    Bump { center: f64, radius: f64 },
    /// `e^{−s}`.
    Exponential,
    /// `ψ ≡ 0`.
    Zero,
}

impl Default for Cutoff {
    fn default() -> Self {
        Self::Bump {
            center: 1.5,
            radius: 0.5,
        }
    }
}

impl Cutoff {
    pub fn bump(center: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && center - radius >= 0.0 && center.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "psi",
                reason: alloc::format!("bump on ({}, {}) must lie in [0, inf)", center - radius, center + radius),
            });
        }
        Ok(Self::Bump { center, radius })
    }

    pub fn name(&self) -> String {
        match self {
            Self::Bump { center, radius } => alloc::format!("bump(c={center},r={radius})"),
            Self::Exponential => "exp".into(),
            Self::Zero => "zero".into(),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            Self::Bump { center, radius } => {
                let z = (s - center) / radius;
                if z.abs() >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - z * z)).exp()
                }
            }
            Self::Exponential => (-s).exp(),
            Self::Zero => 0.0,
        }
    }

    /// True when `ψ` vanishes on a neighbourhood of 0.
    pub fn vanishes_near_zero(&self) -> bool {
        match *self {
            Self::Bump { center, radius } => center - radius > 0.0,
            Self::Exponential => false,
            Self::Zero => true,
        }
    }

    /// `∫_0^∞ ψ(s) ds/s`, or `None` when it diverges.
    pub fn log_integral(&self) -> Option<f64> {
        match *self {
            Self::Bump { center, radius } if center - radius > 0.0 => {
                let rule = composite_gauss_legendre(center - radius, center + radius, 64 * 32);
                Some(rule.integrate(|s| self.eval(s) / s))
            }
            Self::Bump { .. } | Self::Exponential => None,
            Self::Zero => Some(0.0),
        }
    }
}

/// Per-mode trace weights over a spectrum.
#[derive(Debug, Clone)]
pub struct DiagonalWeights<'a> {
    spectrum: &'a Spectrum,
    weights: Vec<Complex64>,
    order: f64,
    name: String,
}

impl<'a> DiagonalWeights<'a> {
    /// Diagonal `M[ξ][ξ] = Σ_i w_i σ(x_i, ξ) u_ξ(x_i) conj(v_ξ(x_i))` of an operator.
    pub fn from_operator(op: &QuantizedOperator<'a>) -> Self {
        Self {
            spectrum: op.system().spectrum(),
            weights: op.matrix().diagonal(),
            order: op.class().order,
            name: op.name().into(),
        }
    }

    /// The multiplier `g(ξ)` of declared order `order`.
    pub fn multiplier(spectrum: &'a Spectrum, g: Vec<Complex64>, order: f64, name: &str) -> Result<Self> {
        if g.len() != spectrum.len() {
            return Err(Error::LengthMismatch {
                expected: spectrum.len(),
                found: g.len(),
            });
        }
        Ok(Self {
            spectrum,
            weights: g,
            order,
            name: name.into(),
        })
    }

    /// `g(ξ) = ⟨ξ⟩^m`.
    pub fn bracket_power(spectrum: &'a Spectrum, m: f64) -> Self {
        Self {
            spectrum,
            weights: spectrum
                .bracket_powers(m)
                .into_iter()
                .map(|v| Complex64::new(v, 0.0))
                .collect(),
            order: m,
            name: alloc::format!("bracket^{m}"),
        }
    }

    /// Precomputed diagonal weights, e.g. from [`crate::quantization::quantized_diagonal`].
    pub fn from_diagonal(
        spectrum: &'a Spectrum,
        diagonal: Vec<Complex64>,
        order: f64,
        name: &str,
    ) -> Result<Self> {
        Self::multiplier(spectrum, diagonal, order, name)
    }

    pub fn spectrum(&self) -> &'a Spectrum {
        self.spectrum
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

/// Values of an x-independent symbol.
pub fn multiplier_values(symbol: &Symbol) -> Result<Vec<Complex64>> {
    if !symbol.is_x_independent() {
        return Err(Error::InvalidParameter {
            name: "symbol",
            reason: alloc::format!("{} depends on x", symbol.name()),
        });
    }
    Ok((0..symbol.len()).map(|k| symbol.row(k)[0]).collect())
}

/// A trace sampled on a `t` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceCurve {
    pub t: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Share of the total absolute sum carried by the largest retained mode.
    pub tail_fraction: Vec<f64>,
    pub regularizer: Regularizer,
    pub model: ModelId,
    pub params: BTreeMap<String, String>,
    /// Smallest `t` at which the tail share drops below [`TAIL_TOLERANCE`].
    pub safe_t_floor: Option<f64>,
}

impl TraceCurve {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Points with `lo <= t <= hi`.
    pub fn window(&self, lo: f64, hi: f64) -> (Vec<f64>, Vec<Complex64>) {
        self.t
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t >= lo * (1.0 - 1e-12) && **t <= hi * (1.0 + 1e-12))
            .map(|(&t, &v)| (t, v))
            .unzip()
    }
}

fn check_t_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::ZeroCount { name: "t_grid" });
    }
    for w in t_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidParameter {
                name: "t_grid",
                reason: "must be strictly increasing".into(),
            });
        }
    }
    if !(t_grid[0] > 0.0) || !t_grid[t_grid.len() - 1].is_finite() {
        return Err(Error::NonPositive {
            what: "t",
            value: t_grid[0],
        });
    }
    Ok(())
}

/// `(Σ_ξ w(ξ)·f(ξ), share of the last mode in Σ|w f|)`, compensated.
fn weighted_sum(weights: &[Complex64], factor: impl Fn(usize) -> f64) -> (Complex64, f64) {
    let mut sum = Complex64::zero();
    let mut comp = Complex64::zero();
    let mut abs_total = 0.0;
    let mut last = 0.0;
    for (k, w) in weights.iter().enumerate() {
        let f = factor(k);
        if f == 0.0 {
            continue;
        }
        let term = w * f;
        let y = term - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
        abs_total += term.norm();
        if k + 1 == weights.len() {
            last = term.norm();
        }
    }
    let share = if abs_total > 0.0 { last / abs_total } else { 0.0 };
    (sum, share)
}

/// Smallest `t` (to relative 1e−6) with tail share below [`TAIL_TOLERANCE`],
/// assuming the share decreases in `t`.
fn safe_floor(share: impl Fn(f64) -> f64, t_max: f64) -> Option<f64> {
    if share(t_max) >= TAIL_TOLERANCE {
        return None;
    }
    let (mut lo, mut hi) = (t_max * 1e-12, t_max);
    if share(lo) < TAIL_TOLERANCE {
        return Some(lo);
    }
    while hi / lo > 1.0 + 1e-6 {
        let mid = (lo * hi).sqrt();
        if share(mid) < TAIL_TOLERANCE {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

fn build_curve(
    weights: &DiagonalWeights<'_>,
    t_grid: &[f64],
    regularizer: Regularizer,
    mut params: BTreeMap<String, String>,
    factor: impl Fn(f64, usize) -> f64,
) -> Result<TraceCurve> {
    check_t_grid(t_grid)?;
    let mut values = Vec::with_capacity(t_grid.len());
    let mut tails = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let (v, share) = weighted_sum(weights.weights(), |k| factor(t, k));
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "trace",
                reason: alloc::format!("non-finite value at t = {t}"),
            });
        }
        values.push(v);
        tails.push(share);
    }
    if tails[0] > TAIL_TOLERANCE {
        log::warn!(
            "{}: largest mode carries {:.2e} of the trace at t = {:e}; truncation bias likely",
            regularizer.as_str(),
            tails[0],
            t_grid[0]
        );
    }
    let t_max = t_grid[t_grid.len() - 1];
    let safe_t_floor = safe_floor(|t| weighted_sum(weights.weights(), |k| factor(t, k)).1, t_max);
    params.insert("symbol".into(), weights.name().into());
    params.insert("m".into(), weights.order().to_string());
    params.insert("modes".into(), weights.spectrum().modes().to_string());
    params.insert("model".into(), weights.spectrum().model().as_str().into());
    Ok(TraceCurve {
        t: t_grid.to_vec(),
        values,
        tail_fraction: tails,
        regularizer,
        model: weights.spectrum().model(),
        params,
        safe_t_floor,
    })
}

/// `Σ_ξ e^{−t⟨ξ⟩^q} w(ξ)` for each `t`.
pub fn heat_trace_curve(weights: &DiagonalWeights<'_>, q: f64, t_grid: &[f64]) -> Result<TraceCurve> {
    if !(q > 0.0) {
        return Err(Error::NonPositive { what: "q", value: q });
    }
    let energy = weights.spectrum().bracket_powers(q);
    let mut params = BTreeMap::new();
    params.insert("q".into(), q.to_string());
    build_curve(weights, t_grid, Regularizer::HeatMq, params, |t, k| {
        (-t * energy[k]).exp()
    })
}

/// `Tr(e^{−tA}) = Σ_ξ e^{−tσ(ξ)}` for a positive multiplier of order `order > 0`.
pub fn semigroup_trace_curve(
    spectrum: &Spectrum,
    sigma: &[f64],
    order: f64,
    t_grid: &[f64],
) -> Result<TraceCurve> {
    if sigma.len() != spectrum.len() {
        return Err(Error::LengthMismatch {
            expected: spectrum.len(),
            found: sigma.len(),
        });
    }
    if !(order > 0.0) {
        return Err(Error::NonPositive {
            what: "order",
            value: order,
        });
    }
    if let Some(&bad) = sigma.iter().find(|s| !(**s > 0.0)) {
        return Err(Error::NonPositive {
            what: "sigma",
            value: bad,
        });
    }
    let ones = alloc::vec![Complex64::new(1.0, 0.0); spectrum.len()];
    let weights = DiagonalWeights::multiplier(spectrum, ones, 0.0, "identity")?;
    let mut params = BTreeMap::new();
    params.insert("order".into(), order.to_string());
    let mut curve = build_curve(&weights, t_grid, Regularizer::SemigroupA, params, |t, k| {
        (-t * sigma[k]).exp()
    })?;
    curve.params.insert("symbol".into(), "sigma".into());
    Ok(curve)
}

/// Whether [`cutoff_trace_curve`] should insist on `ψ ∈ L¹(ds/s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogCheck {
    /// Reject cutoffs that do not vanish near 0 (the `m = −Q` case).
    Required,
    Skip,
}

/// `Σ_ξ ψ(t·E(ξ)) w(ξ)` for a positive energy `E` of order `energy_order`.
pub fn cutoff_trace_curve(
    weights: &DiagonalWeights<'_>,
    energy: &[f64],
    energy_order: f64,
    psi: Cutoff,
    t_grid: &[f64],
    check: LogCheck,
) -> Result<TraceCurve> {
    if energy.len() != weights.spectrum().len() {
        return Err(Error::LengthMismatch {
            expected: weights.spectrum().len(),
            found: energy.len(),
        });
    }
    if !(energy_order > 0.0) {
        return Err(Error::NonPositive {
            what: "energy order",
            value: energy_order,
        });
    }
    if let Some(&bad) = energy.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::NonPositive {
            what: "energy",
            value: bad,
        });
    }
    if check == LogCheck::Required && !psi.vanishes_near_zero() {
        return Err(Error::InvalidParameter {
            name: "psi",
            reason: alloc::format!("{} is not integrable against ds/s", psi.name()),
        });
    }
    let mut params = BTreeMap::new();
    params.insert("q".into(), energy_order.to_string());
    params.insert("psi".into(), psi.name());
    build_curve(weights, t_grid, Regularizer::CutoffPsi, params, |t, k| {
        psi.eval(t * energy[k])
    })
}

/// Kind of an [`AsymptoticFit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitKind {
    PowerLaw,
    LogSingularity,
    Expansion,
}

impl FitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::PowerLaw => "power_law",
            Self::LogSingularity => "log_singularity",
            Self::Expansion => "expansion",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticFit {
    pub kind: FitKind,
    /// Exponent (power law), `β` (log singularity) or `a_0` (expansion).
    pub value: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub coeffs: Option<Vec<f64>>,
    /// Condition estimate of the expansion basis.
    pub condition: Option<f64>,
}

/// Minimum number of curve points inside a fitting window.
pub const MIN_FIT_POINTS: usize = 10;

fn fit_window(curve: &TraceCurve, window: (f64, f64), need_positive: bool) -> Result<(Vec<f64>, Vec<f64>)> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidWindow {
            lo,
            hi,
            reason: "need 0 < lo < hi",
        });
    }
    if hi / lo < 10.0 * (1.0 - 1e-9) {
        return Err(Error::InvalidWindow {
            lo,
            hi,
            reason: "window must span at least one decade",
        });
    }
    let (t, v) = curve.window(lo, hi);
    if t.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints {
            what: "trace fit window",
            found: t.len(),
            required: MIN_FIT_POINTS,
        });
    }
    let y: Vec<f64> = v.iter().map(|z| z.re).collect();
    if need_positive {
        if let Some(&bad) = y.iter().find(|y| !(**y > 0.0)) {
            return Err(Error::NonPositive {
                what: "trace value",
                value: bad,
            });
        }
    }
    Ok((t, y))
}

/// Slope of `ln trace` against `ln t`; the intercept is `ln` of the prefactor.
pub fn fit_power_law(curve: &TraceCurve, window: (f64, f64)) -> Result<AsymptoticFit> {
    let (t, y) = fit_window(curve, window, true)?;
    let lx: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let fit = linear_fit(&lx, &ly)?;
    Ok(AsymptoticFit {
        kind: FitKind::PowerLaw,
        value: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        window,
        coeffs: None,
        condition: None,
    })
}

/// `trace ≈ −β ln t + γ`; returns `β` as the value and `γ` as the intercept.
pub fn fit_log_singularity(curve: &TraceCurve, window: (f64, f64)) -> Result<AsymptoticFit> {
    let (t, y) = fit_window(curve, window, true)?;
    let lx: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let fit = linear_fit(&lx, &y)?;
    Ok(AsymptoticFit {
        kind: FitKind::LogSingularity,
        value: -fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        window,
        coeffs: None,
        condition: None,
    })
}

/// Largest acceptable condition estimate of the expansion basis.
pub const MAX_EXPANSION_CONDITION: f64 = 1e6;

/// Fits `t^{(Q+m)/q}·trace ≈ Σ_{k≤K} a_k t^{k/q}` on `window`.
pub fn expansion_coefficients(
    curve: &TraceCurve,
    q: f64,
    m: f64,
    big_q: f64,
    terms: usize,
    window: (f64, f64),
) -> Result<AsymptoticFit> {
    if !curve.model.is_self_adjoint() {
        return Err(Error::UnsupportedModel {
            op: "expansion_coefficients",
            model: curve.model,
        });
    }
    if !(m > -big_q) {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: alloc::format!("expansion needs m > -Q, got m = {m}, Q = {big_q}"),
        });
    }
    if !(q > 0.0) {
        return Err(Error::NonPositive { what: "q", value: q });
    }
    let (t, y) = fit_window(curve, window, false)?;
    let scale = (big_q + m) / q;
    let target: Vec<f64> = t.iter().zip(&y).map(|(t, y)| t.powf(scale) * y).collect();
    let basis: Vec<Vec<f64>> = (0..=terms)
        .map(|k| t.iter().map(|t| t.powf(k as f64 / q)).collect())
        .collect();
    let (coeffs, condition) = least_squares(&basis, &target)?;
    if !(condition <= MAX_EXPANSION_CONDITION) {
        return Err(Error::IllConditioned(condition));
    }
    let r2 = r_squared(
        &target,
        (0..t.len()).map(|i| basis.iter().zip(&coeffs).map(|(b, c)| b[i] * c).sum()),
    );
    Ok(AsymptoticFit {
        kind: FitKind::Expansion,
        value: coeffs[0],
        intercept: coeffs[0],
        r_squared: r2,
        window,
        coeffs: Some(coeffs),
        condition: Some(condition),
    })
}

/// Weyl-law prediction of the leading heat coefficient:
/// `Σ_ξ ⟨ξ⟩^m e^{−t⟨ξ⟩^q} ≈ c·Q·Γ((Q+m)/q)/q · t^{−(Q+m)/q}` when `N(λ) ≈ c λ^Q`.
pub fn leading_heat_coefficient(weyl_constant: f64, big_q: f64, m: f64, q: f64) -> f64 {
    weyl_constant * big_q * libm::tgamma((big_q + m) / q) / q
}

/// Power-law and logarithmic fits on the same window, for model selection.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularityComparison {
    pub power: AsymptoticFit,
    pub log: AsymptoticFit,
}

impl SingularityComparison {
    /// True when the logarithmic model fits better by at least `margin` in r².
    pub fn prefers_log(&self, margin: f64) -> bool {
        self.log.r_squared - self.power.r_squared >= margin
    }

    /// True when the power law fits better by at least `margin` in r².
    pub fn prefers_power(&self, margin: f64) -> bool {
        self.power.r_squared - self.log.r_squared >= margin
    }
}

pub fn compare_singularity_models(curve: &TraceCurve, window: (f64, f64)) -> Result<SingularityComparison> {
    Ok(SingularityComparison {
        power: fit_power_law(curve, window)?,
        log: fit_log_singularity(curve, window)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantization::{make_multiplier, quantize};
    use crate::spectral::{build_dirichlet_interval, build_periodic_circle, build_twisted_model};
    use approx::assert_abs_diff_eq;
    use core::f64::consts::PI;

    fn re(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn synthetic(f: impl Fn(f64) -> f64) -> TraceCurve {
        let t = log_spaced(1e-3, 1e-1, POINTS_PER_DECADE).unwrap();
        TraceCurve {
            values: t.iter().map(|&t| re(f(t))).collect(),
            tail_fraction: alloc::vec![0.0; t.len()],
            t,
            regularizer: Regularizer::HeatMq,
            model: ModelId::DirichletInterval,
            params: BTreeMap::new(),
            safe_t_floor: None,
        }
    }

    /// Range `[a/Λ^q, b/Λ^q]` relative to the largest bracket.
    fn relative_window(s: &Spectrum, q: f64, a: f64, b: f64) -> (f64, f64) {
        let top = s.max_bracket().powf(q);
        (a / top, b / top)
    }

    #[test]
    fn log_spaced_grid() {
        let g = log_spaced(1e-3, 1e-1, 40).unwrap();
        assert_eq!(g.len(), 81);
        assert_abs_diff_eq!(g[0], 1e-3, epsilon = 1e-18);
        assert_abs_diff_eq!(g[80], 1e-1, epsilon = 1e-15);
        assert_abs_diff_eq!(g[40], 1e-2, epsilon = 1e-15);
        assert!(log_spaced(1.0, 0.5, 10).is_err());
    }

    #[test]
    fn heat_trace_examples() {
        let s = Spectrum::dirichlet_interval(512).unwrap();
        let id = DiagonalWeights::bracket_power(&s, 0.0);
        let c = heat_trace_curve(&id, 1.0, &[1.0]).unwrap();
        let direct: f64 = (1..=512)
            .map(|k| (-(1.0 + (k as f64 * PI).powi(4)).powf(0.25)).exp())
            .sum();
        assert_abs_diff_eq!(c.values[0].re, direct, epsilon = 1e-14);

        let zero = DiagonalWeights::multiplier(&s, alloc::vec![Complex64::zero(); 512], 0.0, "0").unwrap();
        assert!(heat_trace_curve(&zero, 1.0, &[0.1, 1.0]).unwrap().values.iter().all(|v| v.is_zero()));

        let inv = DiagonalWeights::bracket_power(&s, -1.0);
        for t in [0.02, 0.05, 0.1] {
            let v = heat_trace_curve(&inv, 1.0, &[t]).unwrap().values[0].re;
            let closed = -(1.0 - (-t * PI).exp()).ln() / PI;
            // brackets exceed kπ slightly, mostly at k = 1
            assert!((v - closed).abs() <= 2e-3 * closed, "t={t}: {v} vs {closed}");
        }
        assert!(heat_trace_curve(&inv, 0.0, &[1.0]).is_err());
        assert!(heat_trace_curve(&inv, 1.0, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn operator_and_multiplier_paths_agree() {
        let s = build_periodic_circle(24, 196).unwrap();
        let sym = make_multiplier(&s, |_, b| re(b.powf(-0.5)), -0.5, 1.0).unwrap();
        let op = quantize(&s, &sym).unwrap();
        let t = log_spaced(0.01, 1.0, 10).unwrap();
        let a = heat_trace_curve(&DiagonalWeights::from_operator(&op), 2.0, &t).unwrap();
        let b = heat_trace_curve(&DiagonalWeights::bracket_power(&s, -0.5), 2.0, &t).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).norm() <= 1e-10);
            assert!(x.im.abs() <= 1e-8);
        }
        let direct: Vec<f64> = t
            .iter()
            .map(|t| s.brackets().iter().map(|b| b.powf(-0.5) * (-t * b * b).exp()).sum())
            .collect();
        for (x, y) in b.values.iter().zip(&direct) {
            assert_abs_diff_eq!(x.re, *y, epsilon = 1e-10);
        }
    }

    #[test]
    fn positive_traces_decrease() {
        let s = Spectrum::periodic_circle(256).unwrap();
        let t = log_spaced(1e-3, 10.0, 20).unwrap();
        for m in [-1.0, 0.0, 1.0] {
            let c = heat_trace_curve(&DiagonalWeights::bracket_power(&s, m), 1.0, &t).unwrap();
            assert!(c.values.windows(2).all(|w| w[1].re < w[0].re));
        }
    }

    #[test]
    fn tail_fraction_and_safe_floor() {
        let s = Spectrum::dirichlet_interval(64).unwrap();
        let id = DiagonalWeights::bracket_power(&s, 0.0);
        let t = log_spaced(1e-5, 1.0, 10).unwrap();
        let c = heat_trace_curve(&id, 1.0, &t).unwrap();
        assert!(c.tail_fraction[0] > TAIL_TOLERANCE);
        let floor = c.safe_t_floor.unwrap();
        let at = heat_trace_curve(&id, 1.0, &[floor * 1.001]).unwrap();
        assert!(at.tail_fraction[0] < TAIL_TOLERANCE);
        let below = heat_trace_curve(&id, 1.0, &[floor * 0.99]).unwrap();
        assert!(below.tail_fraction[0] >= TAIL_TOLERANCE);
        assert_eq!(c.params["model"], "dirichlet_interval");
    }

    #[test]
    fn heat_exponents_at_moderate_truncation() {
        for s in [
            Spectrum::dirichlet_interval(1024).unwrap(),
            Spectrum::periodic_circle(1024).unwrap(),
            Spectrum::twisted(2.0, 1024).unwrap(),
        ] {
            for (m, q) in [(0.0, 1.0), (1.0, 1.0), (0.0, 2.0), (1.0, 2.0)] {
                let w = relative_window(&s, q, 30.0, 300.0);
                let t = log_spaced(w.0, w.1, POINTS_PER_DECADE).unwrap();
                let c = heat_trace_curve(&DiagonalWeights::bracket_power(&s, m), q, &t).unwrap();
                let fit = fit_power_law(&c, w).unwrap();
                assert!((fit.value + (1.0 + m) / q).abs() <= 0.07, "{} m={m} q={q}: {}", s.model(), fit.value);
                assert!(fit.r_squared >= 0.999);
            }
        }
    }

    #[test]
    fn twisted_traces_obey_an_upper_envelope() {
        let s = Spectrum::twisted(3.0, 512).unwrap();
        let w = relative_window(&s, 1.0, 30.0, 3000.0);
        let t = log_spaced(w.0, w.1, 20).unwrap();
        let c = heat_trace_curve(&DiagonalWeights::bracket_power(&s, 0.0), 1.0, &t).unwrap();
        let scaled: Vec<f64> = c.t.iter().zip(&c.values).map(|(t, v)| v.norm() * t).collect();
        let max = scaled.iter().cloned().fold(0.0, f64::max);
        assert!(max < 1.0, "{max}");
    }

    #[test]
    fn semigroup_examples() {
        let s = Spectrum::dirichlet_interval(2048).unwrap();
        let w = relative_window(&s, 1.0, 30.0, 300.0);
        let t = log_spaced(w.0, w.1, POINTS_PER_DECADE).unwrap();
        let c = semigroup_trace_curve(&s, s.brackets(), 1.0, &t).unwrap();
        assert!((fit_power_law(&c, w).unwrap().value + 1.0).abs() <= 0.05);

        let s = Spectrum::periodic_circle(2048).unwrap();
        let sq = s.bracket_powers(2.0);
        let w = relative_window(&s, 2.0, 30.0, 300.0);
        let t = log_spaced(w.0, w.1, POINTS_PER_DECADE).unwrap();
        let c = semigroup_trace_curve(&s, &sq, 2.0, &t).unwrap();
        assert!((fit_power_law(&c, w).unwrap().value + 0.5).abs() <= 0.05);

        let late = semigroup_trace_curve(&s, &sq, 2.0, &[1.0, 10.0, 100.0]).unwrap();
        assert!(late.values.windows(2).all(|w| w[1].re < w[0].re));
        assert!(late.values[2].re < 1e-40);

        let mut bad = sq.clone();
        bad[3] = 0.0;
        assert!(matches!(
            semigroup_trace_curve(&s, &bad, 2.0, &[1.0]),
            Err(Error::NonPositive { .. })
        ));
    }

    #[test]
    fn bump_log_integral_matches_independent_quadrature() {
        let psi = Cutoff::default();
        // midpoint rule on a fine grid as an independent route
        let n = 200_000;
        let h = 1.0 / n as f64;
        let mid: f64 = (0..n).map(|i| {
            let s = 1.0 + (i as f64 + 0.5) * h;
            psi.eval(s) / s
        }).sum::<f64>() * h;
        assert_abs_diff_eq!(psi.log_integral().unwrap(), mid, epsilon = 1e-10);
        assert_eq!(Cutoff::Exponential.log_integral(), None);
        assert!(Cutoff::bump(0.5, 1.0).is_err());
        assert_eq!(psi.eval(1.5), 1.0);
        assert_eq!(psi.eval(2.0), 0.0);
    }

    #[test]
    fn cutoff_examples() {
        let s = Spectrum::dirichlet_interval(4096).unwrap();
        let energy = s.bracket_powers(1.0);
        let psi = Cutoff::default();
        let inv = DiagonalWeights::bracket_power(&s, -1.0);
        let w = relative_window(&s, 1.0, 30.0, 300.0);
        let t = log_spaced(w.0, w.1, POINTS_PER_DECADE).unwrap();
        let c = cutoff_trace_curve(&inv, &energy, 1.0, psi, &t, LogCheck::Required).unwrap();
        let plateau = s.weyl_density() * psi.log_integral().unwrap();
        for v in &c.values {
            assert!((v.re - plateau).abs() <= 0.05 * plateau, "{} vs {plateau}", v.re);
        }
        let zero = cutoff_trace_curve(&inv, &energy, 1.0, Cutoff::Zero, &t, LogCheck::Required).unwrap();
        assert!(zero.values.iter().all(|v| v.is_zero()));
        assert!(cutoff_trace_curve(&inv, &energy, 1.0, Cutoff::Exponential, &t, LogCheck::Required).is_err());
        assert!(cutoff_trace_curve(&inv, &energy, 1.0, Cutoff::Exponential, &t, LogCheck::Skip).is_ok());

        let id = DiagonalWeights::bracket_power(&s, 0.0);
        let c = cutoff_trace_curve(&id, &energy, 1.0, psi, &t, LogCheck::Skip).unwrap();
        assert!((fit_power_law(&c, w).unwrap().value + 1.0).abs() <= 0.07);
    }

    #[test]
    fn synthetic_fits() {
        let p = fit_power_law(&synthetic(|t| 5.0 * t.powf(-2.0)), (1e-3, 1e-1)).unwrap();
        assert_abs_diff_eq!(p.value, -2.0, epsilon = 1e-6);
        assert!(p.r_squared > 0.999999);
        let l = fit_log_singularity(&synthetic(|t| -3.0 * t.ln() + 1.0), (1e-3, 1e-1)).unwrap();
        assert_abs_diff_eq!(l.value, 3.0, epsilon = 1e-6);
        assert_abs_diff_eq!(l.intercept, 1.0, epsilon = 1e-6);
        let e = expansion_coefficients(&synthetic(|t| (2.0 + 3.0 * t) / t), 1.0, 0.0, 1.0, 1, (1e-3, 1e-1)).unwrap();
        let c = e.coeffs.unwrap();
        assert_abs_diff_eq!(c[0], 2.0, epsilon = 1e-4);
        assert_abs_diff_eq!(c[1], 3.0, epsilon = 1e-4);
    }

    #[test]
    fn fit_preconditions() {
        let c = synthetic(|t| 1.0 / t);
        assert!(matches!(fit_power_law(&c, (1e-3, 5e-3)), Err(Error::InvalidWindow { .. })));
        let neg = synthetic(|t| t.ln());
        assert!(matches!(fit_power_law(&neg, (1e-3, 1e-1)), Err(Error::NonPositive { .. })));
        let sparse = TraceCurve {
            t: alloc::vec![1e-3, 1e-2, 1e-1],
            values: alloc::vec![re(1.0); 3],
            ..c.clone()
        };
        assert!(matches!(fit_power_law(&sparse, (1e-3, 1e-1)), Err(Error::TooFewPoints { .. })));
        let r = expansion_coefficients(&c, 1.0, 0.0, 1.0, 12, (1e-3, 1e-1));
        assert!(matches!(r, Err(Error::IllConditioned(_))), "{r:?}");
        assert!(expansion_coefficients(&c, 1.0, -1.0, 1.0, 1, (1e-3, 1e-1)).is_err());
        let tw = TraceCurve {
            model: ModelId::TwistedH,
            ..c
        };
        assert!(matches!(
            expansion_coefficients(&tw, 1.0, 0.0, 1.0, 1, (1e-3, 1e-1)),
            Err(Error::UnsupportedModel { .. })
        ));
    }

    #[test]
    fn dirichlet_expansion_matches_laurent_series() {
        let s = Spectrum::dirichlet_interval(4096).unwrap();
        let w = relative_window(&s, 1.0, 30.0, 300.0);
        let t = log_spaced(w.0, w.1, POINTS_PER_DECADE).unwrap();
        let c = heat_trace_curve(&DiagonalWeights::bracket_power(&s, 0.0), 1.0, &t).unwrap();
        let fit = expansion_coefficients(&c, 1.0, 0.0, 1.0, 1, w).unwrap();
        let coeffs = fit.coeffs.unwrap();
        let a0 = leading_heat_coefficient(s.weyl_density(), 1.0, 0.0, 1.0);
        assert_abs_diff_eq!(a0, 1.0 / PI, epsilon = 1e-15);
        assert!((coeffs[0] - a0).abs() <= 0.05 * a0);
        assert!((coeffs[1] + 0.5).abs() <= 0.05);
    }

    #[test]
    fn leading_coefficient_predicts_sums() {
        let s = Spectrum::periodic_circle(4096).unwrap();
        for (m, q) in [(0.0, 1.0), (1.0, 2.0), (0.5, 1.0)] {
            let t = 100.0 / s.max_bracket().powf(q);
            let v = heat_trace_curve(&DiagonalWeights::bracket_power(&s, m), q, &[t]).unwrap().values[0].re;
            let predicted = leading_heat_coefficient(2.0, 1.0, m, q) * t.powf(-(1.0 + m) / q);
            assert!((v / predicted - 1.0).abs() <= 0.02, "m={m} q={q}");
        }
    }

    #[test]
    fn singularity_dichotomy() {
        for s in [
            Spectrum::dirichlet_interval(16384).unwrap(),
            Spectrum::periodic_circle(16384).unwrap(),
        ] {
            let w = relative_window(&s, 1.0, 30.0, 3000.0);
            let t = log_spaced(w.0, w.1, POINTS_PER_DECADE).unwrap();
            let at = heat_trace_curve(&DiagonalWeights::bracket_power(&s, -1.0), 1.0, &t).unwrap();
            let cmp = compare_singularity_models(&at, w).unwrap();
            assert!(cmp.prefers_log(0.01) && cmp.log.r_squared >= 0.99, "{cmp:?}");
            let above = heat_trace_curve(&DiagonalWeights::bracket_power(&s, -0.5), 1.0, &t).unwrap();
            let cmp = compare_singularity_models(&above, w).unwrap();
            assert!(cmp.prefers_power(0.01) && cmp.power.r_squared >= 0.99, "{cmp:?}");

            let beta_window = relative_window(&s, 1.0, 30.0, 300.0);
            let beta = fit_log_singularity(&at, beta_window).unwrap().value;
            let expected = s.weyl_density();
            assert!((beta - expected).abs() <= 0.05 * expected, "{beta}");
        }
    }

    #[test]
    fn quantized_operator_on_twisted_model() {
        let s = build_twisted_model(2.0, 12, 100).unwrap();
        let sym = make_multiplier(&s, |_, _| re(1.0), 0.0, 1.0).unwrap();
        let op = quantize(&s, &sym).unwrap();
        let c = heat_trace_curve(&DiagonalWeights::from_operator(&op), 1.0, &[0.5]).unwrap();
        let direct: f64 = s.brackets().iter().map(|b| (-0.5 * b).exp()).sum();
        assert_abs_diff_eq!(c.values[0].re, direct, epsilon = 1e-10);
        let d = build_dirichlet_interval(4, 32).unwrap();
        assert!(multiplier_values(&make_multiplier(&d, |_, b| re(b), 1.0, 1.0).unwrap()).is_ok());
    }
}
