//! Dixmier trace estimates for operators of order near `−Q`.
//!
//! Two estimators are provided: the logarithmic mean of singular-value partial
//! sums `(1/ln N) Σ_{n≤N} s_n`, and the Hardy–Littlewood limit
//! `(p−1)·Tr(A^p)` as `p → 1⁺`, where the truncated power sums are completed by
//! a Weyl-law tail. Both are extrapolated linearly (in `1/ln N` and in `p − 1`)
//! over their last three grid points.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::linalg::CMatrix;
use crate::quantization::{QuantizedOperator, Symbol};
use crate::regression::linear_fit;
use crate::spectral::fit_weyl_constant;
use crate::{Error, Result, SpectralSystem, Spectrum};
#[allow(unused_imports)] // shadowed by the inherent f64 methods whenever std is linked
use num_traits::Float;

/// Largest usable `N` as a fraction of the number of singular values.
pub const EDGE_FRACTION: f64 = 0.8;

/// Tail shares above this are flagged as dominating the power sum.
pub const TAIL_DOMINANCE: f64 = 0.1;

/// Default `p` grid for the Tauberian limit.
pub const DEFAULT_P_GRID: [f64; 6] = [1.5, 1.25, 1.1, 1.05, 1.02, 1.01];

/// Singular values of an operator on `L²`, nonincreasing.
///
/// Non-self-adjoint systems are first conjugated by the Cholesky factor of the
/// eigenfunction Gram matrix, as in [`crate::quantization::l2_operator_norm`].
pub fn singular_values(op: &QuantizedOperator<'_>) -> Result<Vec<f64>> {
    let system = op.system();
    if system.model().is_self_adjoint() {
        return Ok(op.matrix().singular_values());
    }
    let l = system.gram().cholesky()?;
    let l_inv = l.solve_lower(&CMatrix::identity(system.len()));
    Ok(l.adjoint()
        .matmul(op.matrix())
        .matmul(&l_inv.adjoint())
        .singular_values())
}

/// Singular values of the multiplier `g`: the moduli `|g(ξ)|`, nonincreasing.
pub fn multiplier_singular_values(g: &[Complex64]) -> Vec<f64> {
    let mut s: Vec<f64> = g.iter().map(|z| z.norm()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Log-spaced integers from 2 to `0.8·len`, 20 per decade, deduplicated.
pub fn default_n_grid(len: usize) -> Vec<usize> {
    let top = (EDGE_FRACTION * len as f64).floor() as usize;
    if top < 2 {
        return Vec::new();
    }
    let (a, b) = (2f64.ln(), (top as f64).ln());
    let steps = (((b - a) / core::f64::consts::LN_10) * 20.0).ceil().max(1.0) as usize;
    let mut grid: Vec<usize> = (0..=steps)
        .map(|i| (a + (b - a) * i as f64 / steps as f64).exp().round() as usize)
        .collect();
    grid.dedup();
    grid
}

/// Linear extrapolation to `x = 0` through the last three points.
fn extrapolate_last_three(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() < 3 {
        return Err(Error::TooFewPoints {
            what: "extrapolation",
            found: x.len(),
            required: 3,
        });
    }
    let k = x.len() - 3;
    Ok(linear_fit(&x[k..], &y[k..])?.intercept)
}

/// `(1/ln N) Σ_{n≤N} s_n` over a grid of `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSums {
    pub n: Vec<usize>,
    pub values: Vec<f64>,
    /// Extrapolation to `N → ∞`, linear in `1/ln N`.
    pub limit: f64,
}

impl PartialSums {
    /// Log-log slope of the sequence over the last decade of `N`.
    pub fn growth_exponent(&self) -> Result<f64> {
        let last = *self.n.last().expect("nonempty") as f64;
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .n
            .iter()
            .zip(&self.values)
            .filter(|(n, v)| **n as f64 >= last / 10.0 && **v > 0.0)
            .map(|(&n, &v)| ((n as f64).ln(), v.ln()))
            .unzip();
        Ok(linear_fit(&x, &y)?.slope)
    }

    /// Relative spread `(max − min)/max` over `N ≥ last/10^{decades}`.
    pub fn relative_variation(&self, decades: f64) -> f64 {
        let last = *self.n.last().expect("nonempty") as f64;
        let from = last / 10f64.powf(decades);
        let tail: Vec<f64> = self
            .n
            .iter()
            .zip(&self.values)
            .filter(|(n, _)| **n as f64 >= from)
            .map(|(_, &v)| v)
            .collect();
        let max = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = tail.iter().cloned().fold(f64::INFINITY, f64::min);
        if max > 0.0 {
            (max - min) / max
        } else {
            0.0
        }
    }

    /// True when the sequence strictly decreases over the last decade of `N`.
    pub fn decreasing_over_last_decade(&self) -> bool {
        let last = *self.n.last().expect("nonempty") as f64;
        let tail: Vec<f64> = self
            .n
            .iter()
            .zip(&self.values)
            .filter(|(n, _)| **n as f64 >= last / 10.0)
            .map(|(_, &v)| v)
            .collect();
        tail.windows(2).all(|w| w[1] < w[0])
    }
}

/// Log-averaged partial sums of `svals` (sorted internally) at each `N`.
pub fn partial_sum_functional(svals: &[f64], n_grid: &[usize]) -> Result<PartialSums> {
    if let Some(&bad) = svals.iter().find(|s| !(**s >= 0.0)) {
        return Err(Error::InvalidParameter {
            name: "svals",
            reason: alloc::format!("singular value {bad} is negative or NaN"),
        });
    }
    let top = (EDGE_FRACTION * svals.len() as f64).floor() as usize;
    for w in n_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidParameter {
                name: "n_grid",
                reason: "must be strictly increasing".into(),
            });
        }
    }
    if let Some(&bad) = n_grid.iter().find(|n| **n < 2 || **n > top) {
        return Err(Error::InvalidWindow {
            lo: 2.0,
            hi: top as f64,
            reason: if bad < 2 {
                "N must be at least 2"
            } else {
                "N exceeds 0.8 times the number of singular values"
            },
        });
    }
    let mut sorted = svals.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut prefix = Vec::with_capacity(sorted.len() + 1);
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    prefix.push(0.0);
    for s in &sorted {
        let y = s - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        prefix.push(sum);
    }
    let values: Vec<f64> = n_grid
        .iter()
        .map(|&n| prefix[n] / (n as f64).ln())
        .collect();
    let x: Vec<f64> = n_grid.iter().map(|&n| 1.0 / (n as f64).ln()).collect();
    let limit = extrapolate_last_three(&x, &values)?;
    Ok(PartialSums {
        n: n_grid.to_vec(),
        values,
        limit,
    })
}

/// `(p−1)·(Σ_ξ w_p(ξ) + tail_p)` over a grid of `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct TauberianSequence {
    pub p: Vec<f64>,
    pub values: Vec<f64>,
    /// Share of the tail estimate in the completed power sum.
    pub tail_fraction: Vec<f64>,
    /// Points whose tail share exceeds [`TAIL_DOMINANCE`].
    pub tail_dominated: Vec<bool>,
    /// Extrapolation to `p → 1⁺`, linear in `p − 1`.
    pub limit: f64,
}

/// Weyl constant `c` in `N(λ) ≈ c λ^Q`, fitted on `[0.1, 0.9]·max⟨ξ⟩`.
pub fn fitted_weyl_constant(spectrum: &Spectrum) -> Result<f64> {
    let max = spectrum.max_bracket();
    fit_weyl_constant(spectrum, spectrum.weyl_q(), (0.1 * max, 0.9 * max))
}

/// Tauberian estimate from per-`p` diagonal weights `w_p(ξ) > 0` of an operator
/// of order `m`.
///
/// The missing modes `⟨ξ⟩ > Λ` are replaced by
/// `κ_p · c·Q·Λ^{Q+mp} / (−(Q+mp))`, where `κ_p = w_p(ξ_last)/⟨ξ_last⟩^{mp}`
/// carries the amplitude of the weights at the truncation edge.
pub fn tauberian_from_weights(
    spectrum: &Spectrum,
    order: f64,
    p_grid: &[f64],
    weyl_constant: f64,
    weights_for: impl Fn(f64) -> Result<Vec<f64>>,
) -> Result<TauberianSequence> {
    if !(weyl_constant > 0.0) {
        return Err(Error::NonPositive {
            what: "weyl constant",
            value: weyl_constant,
        });
    }
    for w in p_grid.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::InvalidParameter {
                name: "p_grid",
                reason: "must be strictly decreasing".into(),
            });
        }
    }
    if let Some(&bad) = p_grid.iter().find(|p| !(**p > 1.0 && **p <= 2.0)) {
        return Err(Error::InvalidParameter {
            name: "p_grid",
            reason: alloc::format!("p = {bad} is outside (1, 2]"),
        });
    }
    let big_q = spectrum.weyl_q();
    let edge = spectrum.max_bracket();
    let last = spectrum.len() - 1;
    let mut seq = TauberianSequence {
        p: p_grid.to_vec(),
        values: Vec::new(),
        tail_fraction: Vec::new(),
        tail_dominated: Vec::new(),
        limit: f64::NAN,
    };
    for &p in p_grid {
        let exponent = big_q + order * p;
        if exponent >= 0.0 {
            return Err(Error::InvalidParameter {
                name: "p_grid",
                reason: alloc::format!(
                    "power sum diverges at p = {p} for order {order} (Q + m p = {exponent})"
                ),
            });
        }
        let w = weights_for(p)?;
        if w.len() != spectrum.len() {
            return Err(Error::LengthMismatch {
                expected: spectrum.len(),
                found: w.len(),
            });
        }
        if let Some(&bad) = w.iter().find(|v| !(**v > 0.0)) {
            return Err(Error::NonPositive {
                what: "power-sum weight",
                value: bad,
            });
        }
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for v in &w {
            let y = v - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        let kappa = w[last] / spectrum.brackets()[last].powf(order * p);
        let tail = kappa * weyl_constant * big_q * edge.powf(exponent) / (-exponent);
        let share = tail / (sum + tail);
        if share > TAIL_DOMINANCE {
            log::debug!("tail carries {share:.3} of the power sum at p = {p}");
        }
        seq.values.push((p - 1.0) * (sum + tail));
        seq.tail_fraction.push(share);
        seq.tail_dominated.push(share > TAIL_DOMINANCE);
    }
    let x: Vec<f64> = p_grid.iter().map(|p| p - 1.0).collect();
    seq.limit = extrapolate_last_three(&x, &seq.values)?;
    Ok(seq)
}

/// Tauberian estimate for a positive multiplier `g` of order `m`.
pub fn tauberian_estimate(
    spectrum: &Spectrum,
    g: &[f64],
    order: f64,
    p_grid: &[f64],
    weyl_constant: f64,
) -> Result<TauberianSequence> {
    if g.len() != spectrum.len() {
        return Err(Error::LengthMismatch {
            expected: spectrum.len(),
            found: g.len(),
        });
    }
    tauberian_from_weights(spectrum, order, p_grid, weyl_constant, |p| {
        Ok(g.iter().map(|v| v.powf(p)).collect())
    })
}

/// Diagonal-kernel sums `Σ_i w_i σ(x_i, ξ)^p u_ξ(x_i) conj(v_ξ(x_i))` of a
/// nonnegative symbol given as a function, without tabulating it.
pub fn symbol_power_weights(
    system: &SpectralSystem,
    sigma: &impl Fn(f64, i64, f64) -> f64,
    p: f64,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(system.len());
    for idx in 0..system.len() {
        let (label, b) = (system.labels()[idx], system.brackets()[idx]);
        let mut acc = Complex64::new(0.0, 0.0);
        for (((&x, w), u), v) in system
            .grid()
            .iter()
            .zip(system.weights())
            .zip(system.u_row(idx))
            .zip(system.v_row(idx))
        {
            let s = sigma(x, label, b);
            if !(s >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: "sigma",
                    reason: alloc::format!("symbol takes the value {s} at x = {x}, label {label}"),
                });
            }
            acc += u * v.conj() * (w * s.powf(p));
        }
        out.push(acc.re);
    }
    Ok(out)
}

/// Tauberian estimate for an x-dependent symbol `σ(x, ξ) ≥ 0` of order `m`,
/// through the diagonal-kernel sums of `σ^p`.
pub fn tauberian_symbol(
    system: &SpectralSystem,
    sigma: impl Fn(f64, i64, f64) -> f64,
    order: f64,
    p_grid: &[f64],
    weyl_constant: f64,
) -> Result<TauberianSequence> {
    tauberian_from_weights(system.spectrum(), order, p_grid, weyl_constant, |p| {
        symbol_power_weights(system, &sigma, p)
    })
}

/// Membership of an operator in the Dixmier ideal and the value of its trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    FinitePositive,
    Zero,
    NotInIdeal,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::FinitePositive => "finite_positive",
            Self::Zero => "zero",
            Self::NotInIdeal => "not_in_ideal",
        }
    }

    /// What the calculus predicts for order `m` on a model with Weyl exponent `Q`.
    pub fn expected_for_order(m: f64, big_q: f64) -> Self {
        if (m + big_q).abs() <= 1e-9 {
            Self::FinitePositive
        } else if m < -big_q {
            Self::Zero
        } else {
            Self::NotInIdeal
        }
    }
}

/// Growth exponents above this mean the log average diverges.
pub const GROWTH_THRESHOLD: f64 = 0.2;
/// Growth exponents below this mean the log average decays.
pub const DECAY_THRESHOLD: f64 = -0.05;

/// Reads the classification off the partial-sum behaviour: growth, plateau
/// or decay of the log averages over the last decade of `N`.
pub fn classify_partial_sums(sums: &PartialSums) -> Result<Classification> {
    if sums.values.iter().all(|v| *v == 0.0) {
        return Ok(Classification::Zero);
    }
    let growth = sums.growth_exponent()?;
    let last = *sums.values.last().expect("nonempty");
    if growth > GROWTH_THRESHOLD {
        return Ok(Classification::NotInIdeal);
    }
    if growth < DECAY_THRESHOLD && (sums.limit <= 1e-2 || sums.limit <= 0.25 * last) {
        return Ok(Classification::Zero);
    }
    Ok(Classification::FinitePositive)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DixmierEstimate {
    pub partial: PartialSums,
    pub tauberian: Option<TauberianSequence>,
    pub classification: Classification,
}

impl DixmierEstimate {
    pub fn limit_partial(&self) -> f64 {
        self.partial.limit
    }

    pub fn limit_tauberian(&self) -> Option<f64> {
        self.tauberian.as_ref().map(|t| t.limit)
    }

    /// `|limit_partial − limit_tauberian| / max(limits)`.
    pub fn agreement(&self) -> Option<f64> {
        let t = self.limit_tauberian()?;
        let p = self.limit_partial();
        let scale = p.abs().max(t.abs());
        if scale == 0.0 || !scale.is_finite() {
            return None;
        }
        Some((p - t).abs() / scale)
    }
}

fn cross_check(measured: Classification, declared_order: f64, big_q: f64) -> Result<()> {
    let expected = Classification::expected_for_order(declared_order, big_q);
    if measured != expected {
        return Err(Error::OrderMismatch {
            measured: measured.as_str(),
            expected: expected.as_str(),
            declared_order,
        });
    }
    Ok(())
}

/// Both estimators for a positive multiplier `g` of declared order `m`,
/// classified from the partial sums and cross-checked against `m`.
///
/// The Tauberian estimate is only formed when the power sums converge for every
/// `p` of the default grid (`m·p < −Q`).
pub fn classify_multiplier(spectrum: &Spectrum, g: &[f64], declared_order: f64) -> Result<DixmierEstimate> {
    let svals: Vec<f64> = multiplier_singular_values(
        &g.iter().map(|&v| Complex64::new(v, 0.0)).collect::<Vec<_>>(),
    );
    let partial = partial_sum_functional(&svals, &default_n_grid(svals.len()))?;
    let classification = classify_partial_sums(&partial)?;
    cross_check(classification, declared_order, spectrum.weyl_q())?;
    let tauberian = if declared_order <= -spectrum.weyl_q() {
        let c = fitted_weyl_constant(spectrum)?;
        Some(tauberian_estimate(spectrum, g, declared_order, &DEFAULT_P_GRID, c)?)
    } else {
        None
    };
    Ok(DixmierEstimate {
        partial,
        tauberian,
        classification,
    })
}

/// Classifies a tabulated symbol through the singular values of its
/// quantization, cross-checked against its declared order.
pub fn dixmier_classify(system: &SpectralSystem, symbol: &Symbol) -> Result<DixmierEstimate> {
    let op = crate::quantization::quantize(system, symbol)?;
    let svals = singular_values(&op)?;
    let partial = partial_sum_functional(&svals, &default_n_grid(svals.len()))?;
    let classification = classify_partial_sums(&partial)?;
    cross_check(classification, symbol.class().order, system.weyl_q())?;
    Ok(DixmierEstimate {
        partial,
        tauberian: None,
        classification,
    })
}
