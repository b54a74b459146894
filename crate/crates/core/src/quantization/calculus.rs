//! Difference operators, seminorms, ellipticity and the composition and
//! parametrix checks of the symbolic calculus.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Zero;
#[allow(unused_imports)] // shadowed by the inherent f64 methods whenever std is linked
use num_traits::Float;

use super::{extract_symbol, quantize, QuantizedOperator, Symbol};
use crate::linalg::CMatrix;
use crate::spectral::x_derivative;
use crate::{Error, ModelId, Result, SpectralSystem};

/// α-th forward difference in the mode label, `(Δσ)(x, k) = σ(x, k+1) − σ(x, k)`.
///
/// Modes whose successor is missing (the truncation edge) leave the support.
/// Only the circle and the twisted model have label differences; the
/// Dirichlet sine basis does not.
pub fn difference(symbol: &Symbol, alpha: usize) -> Result<Symbol> {
    if symbol.model() == ModelId::DirichletInterval {
        return Err(Error::UnsupportedModel {
            op: "difference",
            model: symbol.model(),
        });
    }
    let index: BTreeMap<i64, usize> = symbol
        .labels()
        .iter()
        .enumerate()
        .map(|(i, &l)| (l, i))
        .collect();
    let g = symbol.grid_len();
    let mut current = symbol.clone();
    for _ in 0..alpha {
        let mut values = vec![Complex64::zero(); current.values().len()];
        let mut support = vec![false; current.len()];
        for (k, &label) in current.labels().iter().enumerate() {
            let Some(&next) = index.get(&(label + 1)) else {
                continue;
            };
            if !(current.support()[k] && current.support()[next]) {
                continue;
            }
            support[k] = true;
            for ((o, a), b) in values[k * g..(k + 1) * g]
                .iter_mut()
                .zip(current.row(next))
                .zip(current.row(k))
            {
                *o = a - b;
            }
        }
        let mut next = current.clone();
        next.values = values;
        current = next.with_support(support);
    }
    if alpha > 0 {
        current.name = alloc::format!("diff^{alpha}({})", symbol.name());
    }
    Ok(current)
}

/// `sup_{x, ξ} |Δ^α ∂_x^β σ(x, ξ)| / ⟨ξ⟩^{l − ρα + δβ}` over the support.
pub fn seminorm(
    system: &SpectralSystem,
    symbol: &Symbol,
    alpha: usize,
    beta: usize,
    l: f64,
) -> Result<f64> {
    symbol.check_system(system)?;
    let diffed = if alpha > 0 {
        difference(symbol, alpha)?
    } else {
        symbol.clone()
    };
    let class = symbol.class();
    let exponent = l - class.rho * alpha as f64 + class.delta * beta as f64;
    let mut sup = 0.0f64;
    for k in 0..diffed.len() {
        if !diffed.support()[k] {
            continue;
        }
        let mut row = diffed.row(k).to_vec();
        for _ in 0..beta {
            row = x_derivative(system, &row)?;
        }
        let weight = diffed.brackets()[k].powf(exponent);
        for z in &row {
            sup = sup.max(z.norm() / weight);
        }
    }
    Ok(sup)
}

/// Result of [`ellipticity_margin`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ellipticity {
    /// `sup |⟨ξ⟩^m / σ(x, ξ)|`.
    Finite(f64),
    /// The symbol vanishes somewhere.
    Vanishing,
}

impl Ellipticity {
    pub fn value(self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(v),
            Self::Vanishing => None,
        }
    }
}

/// `sup_{x, ξ} |⟨ξ⟩^m σ(x, ξ)^{-1}|` over the support.
pub fn ellipticity_margin(symbol: &Symbol) -> Ellipticity {
    let m = symbol.class().order;
    let mut sup = 0.0f64;
    for k in 0..symbol.len() {
        if !symbol.support()[k] {
            continue;
        }
        let scale = symbol.brackets()[k].powf(m);
        for z in symbol.row(k) {
            let modulus = z.norm();
            if modulus == 0.0 {
                return Ellipticity::Vanishing;
            }
            let r = scale / modulus;
            if !r.is_finite() {
                return Ellipticity::Vanishing;
            }
            sup = sup.max(r);
        }
    }
    Ellipticity::Finite(sup)
}

fn band_indices(system: &SpectralSystem, band: Option<(f64, f64)>) -> Result<Vec<usize>> {
    match band {
        None => Ok(system.interior_indices()),
        Some((lo, hi)) => {
            if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi {
                return Err(Error::InvalidWindow {
                    lo,
                    hi,
                    reason: "band fractions must satisfy 0 <= lo < hi <= 1",
                });
            }
            let max = system.max_bracket();
            Ok((0..system.len())
                .filter(|&i| {
                    let b = system.brackets()[i];
                    b >= lo * max && b <= hi * max
                })
                .collect())
        }
    }
}

/// Largest column norm of `Op(σ)·Op(σ^{-1}) − I` over the modes of `band`.
///
/// `band` gives the modes as fractions `(lo, hi)` of the largest bracket;
/// `None` uses the interior (all but the outermost 10%).
pub fn parametrix_residual(
    system: &SpectralSystem,
    symbol: &Symbol,
    band: Option<(f64, f64)>,
) -> Result<f64> {
    let inverse = symbol.reciprocal()?;
    let a = quantize(system, symbol)?;
    let b = quantize(system, &inverse)?;
    let residual = a.compose(&b)?.matrix().sub(&CMatrix::identity(system.len()));
    let norms = residual.column_norms();
    Ok(band_indices(system, band)?
        .into_iter()
        .map(|i| norms[i])
        .fold(0.0, f64::max))
}

/// A real quantity per retained mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeProfile {
    pub labels: Vec<i64>,
    pub brackets: Vec<f64>,
    pub values: Vec<f64>,
}

impl ModeProfile {
    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Entries whose bracket lies in `[lo, hi]`.
    pub fn window(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        self.brackets
            .iter()
            .zip(&self.values)
            .filter(|(b, _)| **b >= lo && **b <= hi)
            .map(|(&b, &v)| (b, v))
            .collect()
    }
}

/// `sup_x |σ_{AB}(x, ξ) − a(x, ξ) b(x, ξ)|` on the interior modes, where
/// `σ_{AB}` is extracted from `Op(a)·Op(b)`.
pub fn composition_defect(system: &SpectralSystem, a: &Symbol, b: &Symbol) -> Result<ModeProfile> {
    let product = a.product(b)?;
    let composed = quantize(system, a)?.compose(&quantize(system, b)?)?;
    let extracted = extract_symbol(&composed)?;
    let mut profile = ModeProfile {
        labels: Vec::new(),
        brackets: Vec::new(),
        values: Vec::new(),
    };
    for idx in system.interior_indices() {
        let defect = extracted
            .row(idx)
            .iter()
            .zip(product.row(idx))
            .map(|(p, q)| (p - q).norm())
            .fold(0.0, f64::max);
        profile.labels.push(system.labels()[idx]);
        profile.brackets.push(system.brackets()[idx]);
        profile.values.push(defect);
    }
    Ok(profile)
}

/// Operator norm on `L²` of the domain.
///
/// For self-adjoint models the L-Fourier coordinates are isometric and this is
/// the spectral norm of the matrix. Otherwise `‖f‖² = c^H G c` with the Gram
/// matrix `G = L L^H` of the eigenfunctions, and the norm is that of
/// `L^H M L^{-H}`.
pub fn l2_operator_norm(op: &QuantizedOperator<'_>) -> Result<f64> {
    let system = op.system();
    if system.model().is_self_adjoint() {
        return Ok(op.matrix().spectral_norm());
    }
    let l = system.gram().cholesky()?;
    let l_inv = l.solve_lower(&CMatrix::identity(system.len()));
    let conjugated = l.adjoint().matmul(op.matrix()).matmul(&l_inv.adjoint());
    Ok(conjugated.spectral_norm())
}
