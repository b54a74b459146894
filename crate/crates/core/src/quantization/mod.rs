//! Global symbols on a spectral system and their quantization.
//!
//! A symbol is tabulated as `σ(x_i, ξ)` on the grid nodes and the retained modes.
//! Its quantization acts on L-Fourier coefficients through the matrix
//! `M[η][ξ] = Σ_i w_i σ(x_i, ξ) u_ξ(x_i) conj(v_η(x_i))`, so that
//! `Af = Σ_ξ u_ξ σ(·, ξ) f̂(ξ)` for band-limited `f`.

mod calculus;

pub use calculus::{
    composition_defect, difference, ellipticity_margin, l2_operator_norm, parametrix_residual,
    seminorm, Ellipticity, ModeProfile,
};

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Zero;

use crate::fourier::{inverse_l_fourier, l_fourier, CoeffSequence, Flavor, GridFunction};
use crate::linalg::CMatrix;
use crate::{Error, ModelId, Result, SpectralSystem, WZ_FLOOR};

/// Order and type `(ρ, δ)` of a symbol class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolClass {
    pub order: f64,
    pub rho: f64,
    pub delta: f64,
}

impl SymbolClass {
    pub fn new(order: f64, rho: f64, delta: f64) -> Result<Self> {
        for (name, v) in [("rho", rho), ("delta", delta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: alloc::format!("{v} is outside [0, 1]"),
                });
            }
        }
        if !order.is_finite() {
            return Err(Error::InvalidParameter {
                name: "order",
                reason: "must be finite".into(),
            });
        }
        Ok(Self { order, rho, delta })
    }

    /// Class `(m, 1, 0)`.
    pub fn classical(order: f64) -> Self {
        Self {
            order,
            rho: 1.0,
            delta: 0.0,
        }
    }
}

/// A symbol tabulated over the grid and the modes of one spectral system.
#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    name: String,
    class: SymbolClass,
    model: ModelId,
    grid_len: usize,
    labels: Vec<i64>,
    brackets: Vec<f64>,
    /// Row-major `[mode][node]`.
    values: Vec<Complex64>,
    /// Modes on which the values are meaningful; differences drop the edge.
    support: Vec<bool>,
}

impl Symbol {
    /// Tabulates `f(x, label, bracket)`.
    pub fn from_fn(
        system: &SpectralSystem,
        name: &str,
        class: SymbolClass,
        f: impl Fn(f64, i64, f64) -> Complex64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(system.len() * system.grid_len());
        for (&label, &b) in system.labels().iter().zip(system.brackets()) {
            values.extend(system.grid().iter().map(|&x| f(x, label, b)));
        }
        Self::from_values(system, name, class, values)
    }

    /// Wraps a row-major `[mode][node]` table.
    pub fn from_values(
        system: &SpectralSystem,
        name: &str,
        class: SymbolClass,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        let expected = system.len() * system.grid_len();
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: values.len(),
            });
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "symbol",
                reason: "table has non-finite entries".into(),
            });
        }
        Ok(Self {
            name: name.into(),
            class,
            model: system.model(),
            grid_len: system.grid_len(),
            labels: system.labels().to_vec(),
            brackets: system.brackets().to_vec(),
            values,
            support: vec![true; system.len()],
        })
    }

    /// The x-independent symbol `σ(x, ξ) = g(ξ)`, of class `(m, ρ, 0)`.
    pub fn multiplier(
        system: &SpectralSystem,
        name: &str,
        g: &[Complex64],
        order: f64,
        rho: f64,
    ) -> Result<Self> {
        if g.len() != system.len() {
            return Err(Error::LengthMismatch {
                expected: system.len(),
                found: g.len(),
            });
        }
        let class = SymbolClass::new(order, rho, 0.0)?;
        let grid_len = system.grid_len();
        let mut values = Vec::with_capacity(g.len() * grid_len);
        for &gv in g {
            values.extend(core::iter::repeat_n(gv, grid_len));
        }
        Self::from_values(system, name, class, values)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn class(&self) -> SymbolClass {
        self.class
    }

    pub fn model(&self) -> ModelId {
        self.model
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn brackets(&self) -> &[f64] {
        &self.brackets
    }

    pub fn grid_len(&self) -> usize {
        self.grid_len
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `σ(x_i, ξ)` for all nodes of the mode at index `idx`.
    pub fn row(&self, idx: usize) -> &[Complex64] {
        &self.values[idx * self.grid_len..(idx + 1) * self.grid_len]
    }

    pub fn value(&self, node: usize, idx: usize) -> Complex64 {
        self.values[idx * self.grid_len + node]
    }

    pub fn support(&self) -> &[bool] {
        &self.support
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.into();
        self
    }

    /// `c·σ`, same class.
    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|z| *z *= c);
        out
    }

    /// Pointwise `1/σ` of class `-m`; fails where `σ` vanishes.
    pub fn reciprocal(&self) -> Result<Self> {
        let mut out = self.clone();
        for (k, z) in out.values.iter_mut().enumerate() {
            if z.norm() == 0.0 {
                return Err(Error::VanishingSymbol {
                    label: self.labels[k / self.grid_len],
                    node: k % self.grid_len,
                });
            }
            *z = z.inv();
        }
        out.class.order = -self.class.order;
        out.name = alloc::format!("1/({})", self.name);
        Ok(out)
    }

    /// Pointwise product, order `m₁ + m₂`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a *= b;
        }
        for (s, o) in out.support.iter_mut().zip(&other.support) {
            *s &= *o;
        }
        out.class = SymbolClass {
            order: self.class.order + other.class.order,
            rho: self.class.rho.min(other.class.rho),
            delta: self.class.delta.max(other.class.delta),
        };
        out.name = alloc::format!("({})*({})", self.name, other.name);
        Ok(out)
    }

    /// True when no row depends on `x`.
    pub fn is_x_independent(&self) -> bool {
        (0..self.len()).all(|k| {
            let r = self.row(k);
            r.iter().all(|z| *z == r[0])
        })
    }

    /// Largest pointwise modulus of `self - other` over the common support.
    pub fn max_distance(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        let mut worst = 0.0f64;
        for k in 0..self.len() {
            if !(self.support[k] && other.support[k]) {
                continue;
            }
            for (a, b) in self.row(k).iter().zip(other.row(k)) {
                worst = worst.max((a - b).norm());
            }
        }
        Ok(worst)
    }

    pub(crate) fn with_support(mut self, support: Vec<bool>) -> Self {
        self.support = support;
        self
    }

    pub(crate) fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.model != other.model || self.grid_len != other.grid_len || self.labels != other.labels {
            return Err(Error::SystemMismatch);
        }
        Ok(())
    }

    pub(crate) fn check_system(&self, system: &SpectralSystem) -> Result<()> {
        if self.model != system.model()
            || self.grid_len != system.grid_len()
            || self.labels != system.labels()
        {
            return Err(Error::SystemMismatch);
        }
        Ok(())
    }
}

/// `g(ξ) = ⟨ξ⟩^m` for every retained mode.
pub fn bracket_multiplier(system: &SpectralSystem, m: f64) -> Vec<Complex64> {
    system
        .bracket_powers(m)
        .into_iter()
        .map(|v| Complex64::new(v, 0.0))
        .collect()
}

/// Builds the multiplier symbol `σ(x, ξ) = g(ξ)`.
pub fn make_multiplier(
    system: &SpectralSystem,
    g: impl Fn(i64, f64) -> Complex64,
    order: f64,
    rho: f64,
) -> Result<Symbol> {
    let values: Vec<Complex64> = system
        .labels()
        .iter()
        .zip(system.brackets())
        .map(|(&l, &b)| g(l, b))
        .collect();
    Symbol::multiplier(system, "multiplier", &values, order, rho)
}

/// Matrix of an operator in L-Fourier coordinates, tied to its system.
#[derive(Debug, Clone)]
pub struct QuantizedOperator<'a> {
    system: &'a SpectralSystem,
    matrix: CMatrix,
    class: SymbolClass,
    name: String,
}

impl<'a> QuantizedOperator<'a> {
    pub fn from_matrix(
        system: &'a SpectralSystem,
        matrix: CMatrix,
        class: SymbolClass,
        name: &str,
    ) -> Result<Self> {
        if matrix.rows() != system.len() || !matrix.is_square() {
            return Err(Error::LengthMismatch {
                expected: system.len(),
                found: matrix.rows(),
            });
        }
        Ok(Self {
            system,
            matrix,
            class,
            name: name.into(),
        })
    }

    pub fn identity(system: &'a SpectralSystem) -> Self {
        Self {
            system,
            matrix: CMatrix::identity(system.len()),
            class: SymbolClass::classical(0.0),
            name: "identity".into(),
        }
    }

    pub fn system(&self) -> &'a SpectralSystem {
        self.system
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn class(&self) -> SymbolClass {
        self.class
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `A·B`, acting as `B` first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if !core::ptr::eq(self.system, other.system) {
            return Err(Error::SystemMismatch);
        }
        Ok(Self {
            system: self.system,
            matrix: self.matrix.matmul(&other.matrix),
            class: SymbolClass {
                order: self.class.order + other.class.order,
                rho: self.class.rho.min(other.class.rho),
                delta: self.class.delta.max(other.class.delta),
            },
            name: alloc::format!("({})({})", self.name, other.name),
        })
    }
}

/// `M[η][ξ] = Σ_i w_i σ(x_i, ξ) u_ξ(x_i) conj(v_η(x_i))`.
pub fn quantize<'a>(system: &'a SpectralSystem, symbol: &Symbol) -> Result<QuantizedOperator<'a>> {
    symbol.check_system(system)?;
    let n = system.len();
    let mut matrix = CMatrix::zeros(n, n);
    let mut column = vec![Complex64::zero(); system.grid_len()];
    for xi in 0..n {
        for (((c, s), u), w) in column
            .iter_mut()
            .zip(symbol.row(xi))
            .zip(system.u_row(xi))
            .zip(system.weights())
        {
            *c = s * u * *w;
        }
        for eta in 0..n {
            matrix[(eta, xi)] = column
                .iter()
                .zip(system.v_row(eta))
                .map(|(c, v)| c * v.conj())
                .sum();
        }
    }
    Ok(QuantizedOperator {
        system,
        matrix,
        class: symbol.class(),
        name: symbol.name().into(),
    })
}

/// Only the diagonal `M[ξ][ξ]` of the quantization, in `O(modes · grid)`.
pub fn quantized_diagonal(system: &SpectralSystem, symbol: &Symbol) -> Result<Vec<Complex64>> {
    symbol.check_system(system)?;
    Ok((0..system.len())
        .map(|xi| {
            symbol
                .row(xi)
                .iter()
                .zip(system.u_row(xi))
                .zip(system.v_row(xi))
                .zip(system.weights())
                .map(|(((s, u), v), w)| s * u * v.conj() * *w)
                .sum()
        })
        .collect())
}

/// `Af = inverse_l_fourier(M · f̂)`.
pub fn apply(op: &QuantizedOperator<'_>, f: &GridFunction) -> Result<GridFunction> {
    let system = op.system();
    let fh = l_fourier(system, f)?;
    let image = op.matrix().matvec(fh.values());
    inverse_l_fourier(system, &CoeffSequence::new(image, Flavor::L))
}

/// Recovers `σ_A(x_i, ξ) = (A u_ξ)(x_i) / u_ξ(x_i)`.
///
/// On the Dirichlet model the eigenfunctions have interior zeros, so the
/// quotient is regularized as `conj(u)·Au / (|u|² + floor²)` with
/// `floor = WZ_FLOOR`; elsewhere a sample below the floor is an error.
pub fn extract_symbol(op: &QuantizedOperator<'_>) -> Result<Symbol> {
    let system = op.system();
    let n = system.len();
    let g = system.grid_len();
    let regularize = system.model() == ModelId::DirichletInterval;
    let mut values = vec![Complex64::zero(); n * g];
    let mut image = vec![Complex64::zero(); g];
    for xi in 0..n {
        image.iter_mut().for_each(|z| *z = Complex64::zero());
        for eta in 0..n {
            let c = op.matrix()[(eta, xi)];
            if c.is_zero() {
                continue;
            }
            for (o, u) in image.iter_mut().zip(system.u_row(eta)) {
                *o += c * u;
            }
        }
        let row = &mut values[xi * g..(xi + 1) * g];
        for (node, ((out, a), u)) in row.iter_mut().zip(&image).zip(system.u_row(xi)).enumerate() {
            let modulus = u.norm();
            *out = if regularize {
                u.conj() * a / (modulus * modulus + WZ_FLOOR * WZ_FLOOR)
            } else if modulus < WZ_FLOOR {
                return Err(Error::NearZeroEigenfunction {
                    label: system.labels()[xi],
                    node,
                    modulus,
                });
            } else {
                a / u
            };
        }
    }
    Symbol::from_values(system, op.name(), op.class(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_dirichlet_interval, build_periodic_circle, build_twisted_model};
    use approx::assert_abs_diff_eq;
    use core::f64::consts::PI;
    use rand::{Rng, SeedableRng};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn multiplier_examples() {
        let s = build_dirichlet_interval(4, 32).unwrap();
        let one = make_multiplier(&s, |_, _| c(1.0), 0.0, 1.0).unwrap();
        assert!(one.values().iter().all(|z| *z == c(1.0)));
        assert!(one.is_x_independent());
        let inv = make_multiplier(&s, |_, b| c(1.0 / b), -1.0, 1.0).unwrap();
        assert_abs_diff_eq!(inv.value(3, 0).re, 0.3175, epsilon = 1e-4);
        assert_abs_diff_eq!(inv.value(3, 0).re, (1.0 + PI.powi(4)).powf(-0.25), epsilon = 1e-15);
        assert!(SymbolClass::new(0.0, 1.5, 0.0).is_err());
    }

    #[test]
    fn identity_and_multipliers_quantize_to_diagonals() {
        for s in [
            build_dirichlet_interval(8, 64).unwrap(),
            build_periodic_circle(6, 52).unwrap(),
            build_twisted_model(2.0, 6, 52).unwrap(),
        ] {
            let one = make_multiplier(&s, |_, _| c(1.0), 0.0, 1.0).unwrap();
            let a = quantize(&s, &one).unwrap();
            assert!(a.matrix().sub(&CMatrix::identity(s.len())).frobenius_norm() <= crate::QUAD_TOL);
            let g = bracket_multiplier(&s, -1.0);
            let m = quantize(&s, &Symbol::multiplier(&s, "g", &g, -1.0, 1.0).unwrap()).unwrap();
            assert!(m.matrix().max_off_diagonal() <= crate::QUAD_TOL);
            for (d, e) in m.matrix().diagonal().iter().zip(&g) {
                assert!((d - e).norm() <= crate::QUAD_TOL);
            }
            let diag = quantized_diagonal(&s, &Symbol::multiplier(&s, "g", &g, -1.0, 1.0).unwrap())
                .unwrap();
            for (d, e) in diag.iter().zip(m.matrix().diagonal()) {
                assert!((d - e).norm() <= 1e-14);
            }
        }
    }

    #[test]
    fn x_dependent_columns_match_fourier_coefficients() {
        let s = build_dirichlet_interval(8, 64).unwrap();
        let sym = Symbol::from_fn(&s, "sin", SymbolClass::classical(-1.0), |x, _, b| {
            c((PI * x).sin() / b)
        })
        .unwrap();
        let a = quantize(&s, &sym).unwrap();
        for xi in 0..s.len() {
            let f = GridFunction::new(
                s.u_row(xi)
                    .iter()
                    .zip(s.grid())
                    .map(|(u, &x)| u * (PI * x).sin())
                    .collect(),
            );
            let coeffs = l_fourier(&s, &f).unwrap();
            let scale = 1.0 / s.brackets()[xi];
            for eta in 0..s.len() {
                assert!((a.matrix()[(eta, xi)] - coeffs.values()[eta] * scale).norm() <= 1e-14);
            }
        }
    }

    fn random_coeffs(s: &SpectralSystem, rng: &mut impl Rng) -> Vec<Complex64> {
        (0..s.len())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    /// Band-limited in x: trigonometric polynomial of degree 2 in the model's
    /// fundamental frequency with mode-dependent, order-0 coefficients.
    pub(crate) fn random_order_zero_symbol(s: &SpectralSystem, seed: u64) -> Symbol {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let omega = 2.0 * PI / s.domain().1;
        let coeffs: Vec<[Complex64; 5]> = (0..5)
            .map(|_| {
                core::array::from_fn(|_| {
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                })
            })
            .collect();
        Symbol::from_fn(s, "random", SymbolClass::classical(0.0), |x, label, b| {
            let k = label as f64;
            (-2i32..=2)
                .zip(&coeffs)
                .map(|(j, cj)| {
                    let mode = cj[0] + cj[1] * (k / b) + cj[2] / b;
                    mode * Complex64::from_polar(1.0, omega * j as f64 * x)
                })
                .sum()
        })
        .unwrap()
    }

    #[test]
    fn apply_matches_direct_summation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for s in [
            build_periodic_circle(8, 68).unwrap(),
            build_twisted_model(0.5, 8, 68).unwrap(),
            build_dirichlet_interval(12, 64).unwrap(),
        ] {
            let sym = random_order_zero_symbol(&s, 9);
            let a = quantize(&s, &sym).unwrap();
            let f = inverse_l_fourier(&s, &CoeffSequence::new(random_coeffs(&s, &mut rng), Flavor::L))
                .unwrap();
            let fh = l_fourier(&s, &f).unwrap();
            // direct Σ_ξ u_ξ(x) σ(x, ξ) f̂(ξ), projected back onto the retained modes
            let mut direct = vec![Complex64::zero(); s.grid_len()];
            for xi in 0..s.len() {
                for (node, d) in direct.iter_mut().enumerate() {
                    *d += s.u_row(xi)[node] * sym.value(node, xi) * fh.values()[xi];
                }
            }
            let projected = inverse_l_fourier(&s, &l_fourier(&s, &GridFunction::new(direct)).unwrap())
                .unwrap();
            let via_matrix = apply(&a, &f).unwrap();
            assert!(via_matrix.max_distance(&projected) <= 1e-8, "{}", s.model());

            let id = QuantizedOperator::identity(&s);
            assert!(apply(&id, &f).unwrap().max_distance(&f) <= 1e-8);
        }
    }

    #[test]
    fn multiplier_acts_diagonally_on_eigenfunctions() {
        let s = build_periodic_circle(6, 52).unwrap();
        let sym = Symbol::multiplier(&s, "b", &bracket_multiplier(&s, 0.5), 0.5, 1.0).unwrap();
        let a = quantize(&s, &sym).unwrap();
        let k = s.position(3).unwrap();
        let out = apply(&a, &GridFunction::eigenfunction(&s, k)).unwrap();
        let expected = GridFunction::eigenfunction(&s, k).scale(c(s.brackets()[k].sqrt()));
        assert!(out.max_distance(&expected) <= 1e-12);
    }

    #[test]
    fn extraction_roundtrip_on_wz_models() {
        for s in [
            build_periodic_circle(16, 132).unwrap(),
            build_twisted_model(2.0, 16, 132).unwrap(),
            build_twisted_model(0.3, 16, 132).unwrap(),
        ] {
            let sym = random_order_zero_symbol(&s, 21);
            let back = extract_symbol(&quantize(&s, &sym).unwrap()).unwrap();
            for idx in s.interior_indices() {
                for (a, b) in back.row(idx).iter().zip(sym.row(idx)) {
                    assert!((a - b).norm() <= 1e-7, "{}", s.model());
                }
            }
            let id = extract_symbol(&QuantizedOperator::identity(&s)).unwrap();
            assert!(id.values().iter().all(|z| (z - c(1.0)).norm() <= 1e-12));
            let g = bracket_multiplier(&s, -1.0);
            let m = QuantizedOperator::from_matrix(
                &s,
                CMatrix::from_diagonal(&g),
                SymbolClass::classical(-1.0),
                "g",
            )
            .unwrap();
            let e = extract_symbol(&m).unwrap();
            let expected = Symbol::multiplier(&s, "g", &g, -1.0, 1.0).unwrap();
            assert!(e.max_distance(&expected).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn dirichlet_extraction_is_regularized() {
        let s = build_dirichlet_interval(6, 32).unwrap();
        let e = extract_symbol(&QuantizedOperator::identity(&s)).unwrap();
        assert!(e.values().iter().all(|z| (z - c(1.0)).norm() <= 1e-6));
    }

    #[test]
    fn mismatched_systems_are_rejected() {
        let a = build_periodic_circle(4, 40).unwrap();
        let b = build_periodic_circle(5, 44).unwrap();
        let sym = make_multiplier(&a, |_, _| c(1.0), 0.0, 1.0).unwrap();
        assert_eq!(quantize(&b, &sym).unwrap_err(), Error::SystemMismatch);
        let qa = quantize(&a, &sym).unwrap();
        assert!(apply(&qa, &GridFunction::zeros(44)).is_err());
    }
}
