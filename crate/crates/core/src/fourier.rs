//! L- and L*-Fourier analysis over a [`SpectralSystem`].
//!
//! The forward transforms are quadratures against the conjugated dual system,
//! `f̂(ξ) = Σ_i w_i f(x_i) conj(v_ξ(x_i))` and `f̂_*(ξ) = Σ_i w_i f(x_i) conj(u_ξ(x_i))`;
//! the inverse sums the coefficients against `u_ξ`. Inputs are assumed to be
//! band-limited to the truncation; aliasing is not detected, but
//! [`high_mode_energy_fraction`] reports how much of a function sits near the
//! truncation edge.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Zero;
#[allow(unused_imports)] // shadowed by the inherent f64 methods whenever std is linked
use num_traits::Float;

use crate::{Error, Result, SpectralSystem};

/// Samples of a function on the grid of a spectral system.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn zeros(len: usize) -> Self {
        Self::new(vec![Complex64::zero(); len])
    }

    /// Samples `f` at the grid nodes of `system`.
    pub fn from_fn(system: &SpectralSystem, f: impl Fn(f64) -> Complex64) -> Self {
        Self::new(system.grid().iter().map(|&x| f(x)).collect())
    }

    /// `u_ξ` of the mode at index `idx`.
    pub fn eigenfunction(system: &SpectralSystem, idx: usize) -> Self {
        Self::new(system.u_row(idx).to_vec())
    }

    /// `v_ξ` of the mode at index `idx`.
    pub fn dual_eigenfunction(system: &SpectralSystem, idx: usize) -> Self {
        Self::new(system.v_row(idx).to_vec())
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.values.iter().map(|z| z * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Largest pointwise modulus of `self - other`.
    pub fn max_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn check(&self, system: &SpectralSystem) -> Result<()> {
        if self.values.len() != system.grid_len() {
            return Err(Error::LengthMismatch {
                expected: system.grid_len(),
                found: self.values.len(),
            });
        }
        if self.values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "f",
                reason: "grid function has non-finite samples".into(),
            });
        }
        Ok(())
    }
}

/// Which transform produced a coefficient sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    L,
    LStar,
}

/// Coefficients indexed like the modes of the system that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffSequence {
    values: Vec<Complex64>,
    flavor: Flavor,
}

impl CoeffSequence {
    pub fn new(values: Vec<Complex64>, flavor: Flavor) -> Self {
        Self { values, flavor }
    }

    /// Indicator of the mode at index `idx`.
    pub fn indicator(len: usize, idx: usize, flavor: Flavor) -> Self {
        let mut values = vec![Complex64::zero(); len];
        values[idx] = Complex64::new(1.0, 0.0);
        Self::new(values, flavor)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `‖c‖_{ℓ²}` of the plain coefficient vector.
    pub fn l2_norm(&self) -> f64 {
        crate::linalg::norm(&self.values)
    }

    fn check(&self, system: &SpectralSystem) -> Result<()> {
        if self.values.len() != system.len() {
            return Err(Error::LengthMismatch {
                expected: system.len(),
                found: self.values.len(),
            });
        }
        Ok(())
    }
}

fn transform(
    system: &SpectralSystem,
    f: &GridFunction,
    flavor: Flavor,
) -> Result<CoeffSequence> {
    f.check(system)?;
    let values = (0..system.len())
        .map(|idx| {
            let dual = match flavor {
                Flavor::L => system.v_row(idx),
                Flavor::LStar => system.u_row(idx),
            };
            system.inner(f.values(), dual)
        })
        .collect();
    Ok(CoeffSequence::new(values, flavor))
}

/// `f̂(ξ) = Σ_i w_i f(x_i) conj(v_ξ(x_i))`.
pub fn l_fourier(system: &SpectralSystem, f: &GridFunction) -> Result<CoeffSequence> {
    transform(system, f, Flavor::L)
}

/// `f̂_*(ξ) = Σ_i w_i f(x_i) conj(u_ξ(x_i))`.
pub fn l_star_fourier(system: &SpectralSystem, f: &GridFunction) -> Result<CoeffSequence> {
    transform(system, f, Flavor::LStar)
}

/// `f(x_i) = Σ_ξ c(ξ) u_ξ(x_i)`; the L*-inverse sums against `v_ξ` instead.
pub fn inverse_l_fourier(system: &SpectralSystem, c: &CoeffSequence) -> Result<GridFunction> {
    c.check(system)?;
    let g = system.grid_len();
    let mut out = vec![Complex64::zero(); g];
    for (idx, &coeff) in c.values().iter().enumerate() {
        if coeff.is_zero() {
            continue;
        }
        let basis = match c.flavor() {
            Flavor::L => system.u_row(idx),
            Flavor::LStar => system.v_row(idx),
        };
        for (o, b) in out.iter_mut().zip(basis) {
            *o += coeff * b;
        }
    }
    Ok(GridFunction::new(out))
}

/// `Σ_ξ f̂(ξ) conj(ĝ_*(ξ))`, which equals the quadrature inner product `(f, g)`
/// for band-limited inputs.
pub fn parseval_pairing(
    system: &SpectralSystem,
    f: &GridFunction,
    g: &GridFunction,
) -> Result<Complex64> {
    if f.len() != g.len() {
        return Err(Error::SystemMismatch);
    }
    let fh = l_fourier(system, f)?;
    let gh = l_star_fourier(system, g)?;
    Ok(fh
        .values()
        .iter()
        .zip(gh.values())
        .map(|(a, b)| a * b.conj())
        .sum())
}

/// Quadrature norm `(Σ_i w_i |f(x_i)|²)^{1/2}`.
pub fn l2_norm(system: &SpectralSystem, f: &GridFunction) -> f64 {
    system.inner(f.values(), f.values()).re.max(0.0).sqrt()
}

/// `f ⋆_L g = Σ_ξ f̂(ξ) ĝ(ξ) u_ξ`.
pub fn l_convolution(
    system: &SpectralSystem,
    f: &GridFunction,
    g: &GridFunction,
) -> Result<GridFunction> {
    if f.len() != g.len() {
        return Err(Error::SystemMismatch);
    }
    let fh = l_fourier(system, f)?;
    let gh = l_fourier(system, g)?;
    let product = fh
        .values()
        .iter()
        .zip(gh.values())
        .map(|(a, b)| a * b)
        .collect();
    inverse_l_fourier(system, &CoeffSequence::new(product, Flavor::L))
}

/// Real parts of `Σ ⟨ξ⟩^{2s} f̂(ξ) conj(f̂_*(ξ))` below this are quadrature breakdown.
const SOBOLEV_BREAKDOWN: f64 = -1e-8;

/// `‖f‖_{H^s_L} = (Re Σ_ξ ⟨ξ⟩^{2s} f̂(ξ) conj(f̂_*(ξ)))^{1/2}`.
pub fn sobolev_norm(system: &SpectralSystem, f: &GridFunction, s: f64) -> Result<f64> {
    let fh = l_fourier(system, f)?;
    let fs = l_star_fourier(system, f)?;
    let sum: f64 = system
        .brackets()
        .iter()
        .zip(fh.values().iter().zip(fs.values()))
        .map(|(b, (a, c))| b.powf(2.0 * s) * (a * c.conj()).re)
        .sum();
    if sum < SOBOLEV_BREAKDOWN {
        return Err(Error::SobolevBreakdown(sum));
    }
    Ok(sum.max(0.0).sqrt())
}

/// Fraction of `Σ|f̂(ξ)|²` carried by modes with `⟨ξ⟩ > 0.8·max⟨ξ⟩`.
pub fn high_mode_energy_fraction(system: &SpectralSystem, f: &GridFunction) -> Result<f64> {
    let fh = l_fourier(system, f)?;
    let edge = 0.8 * system.max_bracket();
    let mut total = 0.0;
    let mut high = 0.0;
    for (b, c) in system.brackets().iter().zip(fh.values()) {
        let e = c.norm_sqr();
        total += e;
        if *b > edge {
            high += e;
        }
    }
    Ok(if total > 0.0 { high / total } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_dirichlet_interval, build_periodic_circle, build_twisted_model};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    fn assert_indicator(c: &CoeffSequence, idx: usize, tol: f64) {
        for (i, z) in c.values().iter().enumerate() {
            let expected = if i == idx { one() } else { Complex64::zero() };
            assert!((z - expected).norm() <= tol, "mode {i}: {z}");
        }
    }

    #[test]
    fn transforms_of_eigenfunctions_are_indicators() {
        let circle = build_periodic_circle(4, 40).unwrap();
        let i1 = circle.position(1).unwrap();
        let c = l_fourier(&circle, &GridFunction::eigenfunction(&circle, i1)).unwrap();
        assert_indicator(&c, i1, 1e-13);
        let c = l_star_fourier(&circle, &GridFunction::dual_eigenfunction(&circle, i1)).unwrap();
        assert_indicator(&c, i1, 1e-13);

        let tw = build_twisted_model(2.0, 5, 64).unwrap();
        let i3 = tw.position(3).unwrap();
        let c = l_fourier(&tw, &GridFunction::eigenfunction(&tw, i3)).unwrap();
        assert_abs_diff_eq!(c.values()[i3].re, 1.0, epsilon = 1e-8);
        let i2 = tw.position(2).unwrap();
        let c = l_star_fourier(&tw, &GridFunction::dual_eigenfunction(&tw, i2)).unwrap();
        assert_abs_diff_eq!(c.values()[i2].re, 1.0, epsilon = 1e-8);

        let zero = l_star_fourier(&tw, &GridFunction::zeros(tw.grid_len())).unwrap();
        assert!(zero.values().iter().all(|z| z.is_zero()));
    }

    #[test]
    fn dirichlet_linear_combination() {
        let s = build_dirichlet_interval(6, 64).unwrap();
        let f = GridFunction::eigenfunction(&s, 0)
            .add(&GridFunction::eigenfunction(&s, 1).scale(Complex64::new(2.0, 0.0)));
        let c = l_fourier(&s, &f).unwrap();
        for (i, z) in c.values().iter().enumerate() {
            let expected = match i {
                0 => 1.0,
                1 => 2.0,
                _ => 0.0,
            };
            assert!((z - expected).norm() <= 1e-8);
        }
    }

    #[test]
    fn inverse_examples() {
        let s = build_twisted_model(2.0, 4, 40).unwrap();
        let f = inverse_l_fourier(&s, &CoeffSequence::indicator(s.len(), 3, Flavor::L)).unwrap();
        assert_eq!(f.values(), s.u_row(3));
        let z = inverse_l_fourier(&s, &CoeffSequence::new(vec![Complex64::zero(); s.len()], Flavor::L))
            .unwrap();
        assert!(z.values().iter().all(|v| v.is_zero()));
        let bad = CoeffSequence::new(vec![Complex64::zero(); 2], Flavor::L);
        assert!(inverse_l_fourier(&s, &bad).is_err());
        assert!(l_fourier(&s, &GridFunction::zeros(3)).is_err());
    }

    #[test]
    fn parseval_examples() {
        let c = build_periodic_circle(3, 28).unwrap();
        let f = GridFunction::eigenfunction(&c, c.position(1).unwrap())
            .add(&GridFunction::eigenfunction(&c, c.position(2).unwrap()));
        assert_abs_diff_eq!(parseval_pairing(&c, &f, &f).unwrap().re, 2.0, epsilon = 1e-12);
        let g = GridFunction::eigenfunction(&c, c.position(-3).unwrap());
        assert!(parseval_pairing(&c, &f, &g).unwrap().norm() <= 1e-10);

        let tw = build_twisted_model(2.0, 3, 28).unwrap();
        let u1 = GridFunction::eigenfunction(&tw, tw.position(1).unwrap());
        let p = parseval_pairing(&tw, &u1, &u1).unwrap();
        assert_abs_diff_eq!(p.re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.im, 0.0, epsilon = 1e-12);
        assert_eq!(
            parseval_pairing(&tw, &u1, &GridFunction::zeros(3)),
            Err(Error::SystemMismatch)
        );
    }

    #[test]
    fn convolution_examples() {
        let s = build_twisted_model(0.5, 4, 40).unwrap();
        let u1 = GridFunction::eigenfunction(&s, 1);
        let conv = l_convolution(&s, &u1, &u1).unwrap();
        assert!(conv.max_distance(&u1) <= 1e-12);
    }

    /// Kernel form `∫∫ F(x,y,z) f(y) g(z)` with `F = Σ u_ξ(x) conj(v_ξ(y)) conj(v_ξ(z))`.
    fn kernel_convolution(s: &SpectralSystem, f: &GridFunction, g: &GridFunction) -> GridFunction {
        let n = s.grid_len();
        let w = s.weights();
        let mut out = vec![Complex64::zero(); n];
        for xi in 0..s.len() {
            let (u, v) = (s.u_row(xi), s.v_row(xi));
            for (xo, o) in out.iter_mut().enumerate() {
                let mut acc = Complex64::zero();
                for y in 0..n {
                    for z in 0..n {
                        acc += u[xo] * v[y].conj() * v[z].conj() * f.values()[y] * g.values()[z] * w[y] * w[z];
                    }
                }
                *o += acc;
            }
        }
        GridFunction::new(out)
    }

    #[test]
    fn convolution_matches_kernel_form() {
        for s in [
            build_twisted_model(2.0, 2, 20).unwrap(),
            build_dirichlet_interval(3, 16).unwrap(),
        ] {
            let f = random_band_limited(&s, 11);
            let g = random_band_limited(&s, 12);
            let a = l_convolution(&s, &f, &g).unwrap();
            let b = kernel_convolution(&s, &f, &g);
            assert!(a.max_distance(&b) <= 1e-10);
        }
    }

    #[test]
    fn sobolev_examples() {
        let c = build_periodic_circle(4, 40).unwrap();
        let u1 = GridFunction::eigenfunction(&c, c.position(1).unwrap());
        assert_abs_diff_eq!(sobolev_norm(&c, &u1, 1.0).unwrap(), 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(sobolev_norm(&c, &u1, 0.0).unwrap(), 1.0, epsilon = 1e-12);
        let f = random_band_limited(&c, 5);
        let two = f.scale(Complex64::new(2.0, 0.0));
        assert_abs_diff_eq!(
            sobolev_norm(&c, &two, 0.7).unwrap(),
            2.0 * sobolev_norm(&c, &f, 0.7).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn energy_fraction_flags_edge_modes() {
        let c = build_periodic_circle(10, 84).unwrap();
        let low = GridFunction::eigenfunction(&c, 1);
        assert!(high_mode_energy_fraction(&c, &low).unwrap() <= 1e-20);
        let top = GridFunction::eigenfunction(&c, c.len() - 1);
        assert_abs_diff_eq!(high_mode_energy_fraction(&c, &top).unwrap(), 1.0, epsilon = 1e-12);
    }

    fn random_band_limited(s: &SpectralSystem, seed: u64) -> GridFunction {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let c = (0..s.len())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        inverse_l_fourier(s, &CoeffSequence::new(c, Flavor::L)).unwrap()
    }

    fn arb_coeffs(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
            .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn plancherel_and_roundtrip_on_every_model(
            model in 0usize..3,
            coeffs in arb_coeffs(13),
            s in -1.0f64..1.0,
        ) {
            let system = match model {
                0 => build_dirichlet_interval(13, 64).unwrap(),
                1 => build_periodic_circle(6, 64).unwrap(),
                _ => build_twisted_model(2.0, 6, 64).unwrap(),
            };
            let c = CoeffSequence::new(coeffs, Flavor::L);
            let f = inverse_l_fourier(&system, &c).unwrap();
            let norm = l2_norm(&system, &f);
            let pairing = parseval_pairing(&system, &f, &f).unwrap();
            prop_assert!((norm * norm - pairing.re).abs() <= 1e-7 * norm * norm);
            prop_assert!(pairing.im.abs() <= 1e-10 * norm * norm);
            // forward then inverse is the identity on the span
            let back = inverse_l_fourier(&system, &l_fourier(&system, &f).unwrap()).unwrap();
            prop_assert!(back.max_distance(&f) <= 1e-8);
            prop_assert!((sobolev_norm(&system, &f, 0.0).unwrap() - norm).abs() <= 1e-8);
            // convolution theorem and commutativity
            let g = inverse_l_fourier(&system, &CoeffSequence::new(
                c.values().iter().rev().cloned().collect(), Flavor::L)).unwrap();
            let fg = l_convolution(&system, &f, &g).unwrap();
            let gf = l_convolution(&system, &g, &f).unwrap();
            prop_assert!(fg.max_distance(&gf) <= 1e-10);
            let hat = l_fourier(&system, &fg).unwrap();
            let fh = l_fourier(&system, &f).unwrap();
            let gh = l_fourier(&system, &g).unwrap();
            for i in 0..system.len() {
                prop_assert!((hat.values()[i] - fh.values()[i] * gh.values()[i]).norm() <= 1e-8);
            }
            prop_assert!(sobolev_norm(&system, &f, s).unwrap() >= 0.0);
        }
    }
}
