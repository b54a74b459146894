//! Truncated spectral systems of the model operators.
//!
//! A [`Spectrum`] holds the eigen-data (labels, eigenvalues, brackets) and is
//! all that multiplier-only computations need; it can be built at truncations of
//! many thousands of modes. A [`SpectralSystem`] adds a quadrature grid and the
//! sampled biorthogonal eigenfunctions `u_ξ`, `v_ξ`.

mod differentiation;
mod weyl;

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::ops::Deref;

use num_complex::Complex64;

use crate::quadrature::{self, Rule};
use crate::{Error, Result, INTERIOR_FRACTION};
#[allow(unused_imports)] // shadowed by the inherent f64 methods whenever std is linked
use num_traits::Float;

pub use differentiation::{apply_model_operator, x_derivative};
pub use weyl::{fit_weyl_constant, fit_weyl_exponent, fit_weyl_law, weyl_counting, WeylFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelId {
    /// `-d²/dx²` on `[0, 1]` with Dirichlet conditions.
    DirichletInterval,
    /// `-i d/dx` on `[0, 2π)`, periodic.
    PeriodicCircle,
    /// `-i d/dx` on `[0, 1]` with `u(1) = h·u(0)`.
    TwistedH,
}

impl ModelId {
    pub const ALL: [ModelId; 3] = [
        ModelId::DirichletInterval,
        ModelId::PeriodicCircle,
        ModelId::TwistedH,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelId::DirichletInterval => "dirichlet_interval",
            ModelId::PeriodicCircle => "periodic_circle",
            ModelId::TwistedH => "twisted_h",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }

    /// Whether the eigenfunctions are nowhere zero on the domain.
    pub fn satisfies_wz(self) -> bool {
        !matches!(self, ModelId::DirichletInterval)
    }

    pub fn is_self_adjoint(self) -> bool {
        !matches!(self, ModelId::TwistedH)
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Eigen-data of a truncated model operator, ordered by `|λ_ξ|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    model: ModelId,
    h: Option<f64>,
    labels: Vec<i64>,
    eigenvalues: Vec<Complex64>,
    brackets: Vec<f64>,
}

/// `(1 + |λ|²)^{1/(2ν)}`.
pub fn bracket(eigenvalue: Complex64, nu: f64) -> f64 {
    (1.0 + eigenvalue.norm_sqr()).powf(1.0 / (2.0 * nu))
}

/// Labels `0, 1, -1, 2, -2, …, modes, -modes`.
fn symmetric_labels(modes: usize) -> Vec<i64> {
    let mut labels = Vec::with_capacity(2 * modes + 1);
    labels.push(0);
    for k in 1..=modes as i64 {
        labels.push(k);
        labels.push(-k);
    }
    labels
}

fn check_twist(h: f64) -> Result<()> {
    if !(h > 0.0) || h == 1.0 || !h.is_finite() {
        return Err(Error::InvalidTwist(h));
    }
    Ok(())
}

impl Spectrum {
    pub fn dirichlet_interval(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::ZeroCount { name: "modes" });
        }
        let labels: Vec<i64> = (1..=modes as i64).collect();
        let eigenvalues = labels
            .iter()
            .map(|&k| Complex64::new((k as f64 * PI).powi(2), 0.0))
            .collect();
        Ok(Self::assemble(ModelId::DirichletInterval, None, labels, eigenvalues))
    }

    pub fn periodic_circle(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::ZeroCount { name: "modes" });
        }
        let labels = symmetric_labels(modes);
        let eigenvalues = labels
            .iter()
            .map(|&k| Complex64::new(k as f64, 0.0))
            .collect();
        Ok(Self::assemble(ModelId::PeriodicCircle, None, labels, eigenvalues))
    }

    pub fn twisted(h: f64, modes: usize) -> Result<Self> {
        check_twist(h)?;
        if modes == 0 {
            return Err(Error::ZeroCount { name: "modes" });
        }
        let labels = symmetric_labels(modes);
        let ln_h = h.ln();
        let eigenvalues = labels
            .iter()
            .map(|&j| Complex64::new(2.0 * PI * j as f64, -ln_h))
            .collect();
        Ok(Self::assemble(ModelId::TwistedH, Some(h), labels, eigenvalues))
    }

    /// Builds the spectrum of `model`; `h` is only read for the twisted model.
    pub fn build(model: ModelId, h: Option<f64>, modes: usize) -> Result<Self> {
        match model {
            ModelId::DirichletInterval => Self::dirichlet_interval(modes),
            ModelId::PeriodicCircle => Self::periodic_circle(modes),
            ModelId::TwistedH => Self::twisted(
                h.ok_or(Error::InvalidParameter {
                    name: "h",
                    reason: "twisted model needs h".into(),
                })?,
                modes,
            ),
        }
    }

    fn assemble(
        model: ModelId,
        h: Option<f64>,
        labels: Vec<i64>,
        eigenvalues: Vec<Complex64>,
    ) -> Self {
        let nu = nu_of(model);
        let brackets = eigenvalues.iter().map(|&l| bracket(l, nu)).collect();
        Self {
            model,
            h,
            labels,
            eigenvalues,
            brackets,
        }
    }

    /// Reassembles a spectrum from stored arrays, checking every invariant.
    pub fn from_parts(
        model: ModelId,
        h: Option<f64>,
        labels: Vec<i64>,
        eigenvalues: Vec<Complex64>,
        brackets: Vec<f64>,
    ) -> Result<Self> {
        if model == ModelId::TwistedH {
            check_twist(h.unwrap_or(f64::NAN))?;
        }
        if labels.is_empty() {
            return Err(Error::ZeroCount { name: "modes" });
        }
        for len in [eigenvalues.len(), brackets.len()] {
            if len != labels.len() {
                return Err(Error::LengthMismatch {
                    expected: labels.len(),
                    found: len,
                });
            }
        }
        let nu = nu_of(model);
        for (i, (&l, &b)) in eigenvalues.iter().zip(&brackets).enumerate() {
            let expected = bracket(l, nu);
            if (expected - b).abs() > 1e-12 * expected || !b.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "brackets",
                    reason: alloc::format!("bracket {i} is {b}, expected {expected}"),
                });
            }
        }
        if eigenvalues.windows(2).any(|w| w[0].norm() > w[1].norm()) {
            return Err(Error::InvalidParameter {
                name: "labels",
                reason: "modes are not ordered by |lambda|".into(),
            });
        }
        Ok(Self {
            model,
            h: if model == ModelId::TwistedH { h } else { None },
            labels,
            eigenvalues,
            brackets,
        })
    }

    pub fn model(&self) -> ModelId {
        self.model
    }

    /// Twist parameter, present only for [`ModelId::TwistedH`].
    pub fn h(&self) -> Option<f64> {
        self.h
    }

    /// Order ν of the operator.
    pub fn nu(&self) -> f64 {
        nu_of(self.model)
    }

    /// Analytic Weyl exponent `Q`.
    pub fn weyl_q(&self) -> f64 {
        1.0
    }

    /// Analytic density `c` in `N(λ) ~ c·λ^Q`.
    pub fn weyl_density(&self) -> f64 {
        match self.model {
            ModelId::DirichletInterval | ModelId::TwistedH => 1.0 / PI,
            ModelId::PeriodicCircle => 2.0,
        }
    }

    /// `(start, length)` of the domain.
    pub fn domain(&self) -> (f64, f64) {
        match self.model {
            ModelId::PeriodicCircle => (0.0, 2.0 * PI),
            _ => (0.0, 1.0),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn brackets(&self) -> &[f64] {
        &self.brackets
    }

    pub fn max_bracket(&self) -> f64 {
        *self.brackets.last().expect("spectrum is never empty")
    }

    /// Largest `|label|` retained.
    pub fn modes(&self) -> usize {
        self.labels.iter().map(|l| l.unsigned_abs()).max().unwrap_or(0) as usize
    }

    /// Index of `label` in the truncation.
    pub fn position(&self, label: i64) -> Option<usize> {
        let modes = self.modes() as i64;
        let idx = match self.model {
            ModelId::DirichletInterval => {
                if (1..=modes).contains(&label) {
                    label - 1
                } else {
                    return None;
                }
            }
            _ => {
                if label.abs() > modes {
                    return None;
                } else if label > 0 {
                    2 * label - 1
                } else {
                    -2 * label
                }
            }
        };
        Some(idx as usize)
    }

    /// Whether mode `idx` lies in the interior of the truncation,
    /// `⟨ξ⟩ ≤ 0.9·max⟨ξ⟩`.
    pub fn is_interior(&self, idx: usize) -> bool {
        self.brackets[idx] <= INTERIOR_FRACTION * self.max_bracket()
    }

    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_interior(i)).collect()
    }

    /// `⟨ξ⟩^m` for every mode.
    pub fn bracket_powers(&self, m: f64) -> Vec<f64> {
        self.brackets.iter().map(|b| b.powf(m)).collect()
    }
}

fn nu_of(model: ModelId) -> f64 {
    match model {
        ModelId::DirichletInterval => 2.0,
        _ => 1.0,
    }
}

/// A spectrum together with a quadrature grid and sampled eigenfunctions.
///
/// `u` and `v` are stored row-major, indexed `[mode][grid point]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSystem {
    spectrum: Spectrum,
    grid: Vec<f64>,
    weights: Vec<f64>,
    u: Vec<Complex64>,
    v: Vec<Complex64>,
}

impl Deref for SpectralSystem {
    type Target = Spectrum;

    fn deref(&self) -> &Spectrum {
        &self.spectrum
    }
}

/// Dirichlet Laplacian on `[0, 1]` sampled on a composite Gauss–Legendre grid.
pub fn build_dirichlet_interval(modes: usize, grid_size: usize) -> Result<SpectralSystem> {
    let spectrum = Spectrum::dirichlet_interval(modes)?;
    check_grid(grid_size, 4 * modes)?;
    let rule = quadrature::composite_gauss_legendre(0.0, 1.0, grid_size);
    let u: Vec<Complex64> = spectrum
        .labels
        .iter()
        .flat_map(|&k| {
            rule.nodes
                .iter()
                .map(move |&x| Complex64::new(2f64.sqrt() * (k as f64 * PI * x).sin(), 0.0))
        })
        .collect();
    Ok(SpectralSystem::assemble(spectrum, rule, u.clone(), u))
}

/// Periodic momentum operator on `[0, 2π)` sampled on a uniform grid.
pub fn build_periodic_circle(modes: usize, grid_size: usize) -> Result<SpectralSystem> {
    let spectrum = Spectrum::periodic_circle(modes)?;
    check_grid(grid_size, 4 * (2 * modes + 1))?;
    let rule = quadrature::periodic_trapezoid(0.0, 2.0 * PI, grid_size);
    let norm = 1.0 / (2.0 * PI).sqrt();
    let u: Vec<Complex64> = spectrum
        .labels
        .iter()
        .flat_map(|&k| {
            rule.nodes
                .iter()
                .map(move |&x| Complex64::from_polar(norm, k as f64 * x))
        })
        .collect();
    Ok(SpectralSystem::assemble(spectrum, rule, u.clone(), u))
}

/// Twisted momentum operator with `u(1) = h·u(0)` on a uniform grid of `[0, 1)`.
///
/// Eigenfunctions are normalized so that the discrete pairing `(u_j, v_j)` is
/// one and the discrete norm of `u_j` is one; `v_j` then has norm at least one.
pub fn build_twisted_model(h: f64, modes: usize, grid_size: usize) -> Result<SpectralSystem> {
    let spectrum = Spectrum::twisted(h, modes)?;
    check_grid(grid_size, 4 * (2 * modes + 1))?;
    let rule = quadrature::periodic_trapezoid(0.0, 1.0, grid_size);
    let mass: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| w * h.powf(2.0 * x))
        .sum();
    let c_u = 1.0 / mass.sqrt();
    let c_v = 1.0 / c_u;
    let mut u = Vec::with_capacity(spectrum.len() * rule.len());
    let mut v = Vec::with_capacity(spectrum.len() * rule.len());
    for &j in &spectrum.labels {
        for &x in &rule.nodes {
            let phase = 2.0 * PI * j as f64 * x;
            u.push(Complex64::from_polar(c_u * h.powf(x), phase));
            v.push(Complex64::from_polar(c_v * h.powf(-x), phase));
        }
    }
    Ok(SpectralSystem::assemble(spectrum, rule, u, v))
}

/// Dispatches to the builder of `model`.
pub fn build_system(
    model: ModelId,
    h: Option<f64>,
    modes: usize,
    grid_size: usize,
) -> Result<SpectralSystem> {
    match model {
        ModelId::DirichletInterval => build_dirichlet_interval(modes, grid_size),
        ModelId::PeriodicCircle => build_periodic_circle(modes, grid_size),
        ModelId::TwistedH => build_twisted_model(
            h.ok_or(Error::InvalidParameter {
                name: "h",
                reason: "twisted model needs h".into(),
            })?,
            modes,
            grid_size,
        ),
    }
}

/// Smallest grid the builder of `model` accepts at `modes`.
pub fn minimum_grid(model: ModelId, modes: usize) -> usize {
    match model {
        ModelId::DirichletInterval => 4 * modes,
        _ => 4 * (2 * modes + 1),
    }
}

fn check_grid(grid_size: usize, required: usize) -> Result<()> {
    if grid_size == 0 {
        return Err(Error::ZeroCount { name: "grid_size" });
    }
    if grid_size < required {
        return Err(Error::GridTooSmall {
            grid: grid_size,
            required,
        });
    }
    Ok(())
}

impl SpectralSystem {
    fn assemble(spectrum: Spectrum, rule: Rule, u: Vec<Complex64>, v: Vec<Complex64>) -> Self {
        Self {
            spectrum,
            grid: rule.nodes,
            weights: rule.weights,
            u,
            v,
        }
    }

    /// Reassembles a system from stored arrays, checking shapes and the grid.
    pub fn from_parts(
        spectrum: Spectrum,
        grid: Vec<f64>,
        weights: Vec<f64>,
        u: Vec<Complex64>,
        v: Vec<Complex64>,
    ) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::ZeroCount { name: "grid_size" });
        }
        if weights.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                found: weights.len(),
            });
        }
        let samples = spectrum.len() * grid.len();
        for len in [u.len(), v.len()] {
            if len != samples {
                return Err(Error::LengthMismatch {
                    expected: samples,
                    found: len,
                });
            }
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) || weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: "nodes must increase strictly and weights be positive".into(),
            });
        }
        Ok(Self {
            spectrum,
            grid,
            weights,
            u,
            v,
        })
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn grid_len(&self) -> usize {
        self.grid.len()
    }

    /// Samples of `u_ξ` for the mode at index `idx`.
    pub fn u_row(&self, idx: usize) -> &[Complex64] {
        let g = self.grid.len();
        &self.u[idx * g..(idx + 1) * g]
    }

    /// Samples of `v_ξ` for the mode at index `idx`.
    pub fn v_row(&self, idx: usize) -> &[Complex64] {
        let g = self.grid.len();
        &self.v[idx * g..(idx + 1) * g]
    }

    pub fn u_samples(&self) -> &[Complex64] {
        &self.u
    }

    pub fn v_samples(&self) -> &[Complex64] {
        &self.v
    }

    /// Discrete pairing `Σ_i w_i f(x_i) conj(g(x_i))`.
    pub fn inner(&self, f: &[Complex64], g: &[Complex64]) -> Complex64 {
        self.weights
            .iter()
            .zip(f.iter().zip(g))
            .map(|(&w, (a, b))| a * b.conj() * w)
            .sum()
    }

    /// `max_{ξ,η} |(u_ξ, v_η) - δ_{ξη}|` under the discrete quadrature.
    pub fn biorthogonality_deviation(&self) -> f64 {
        let n = self.len();
        let mut worst = 0.0f64;
        for a in 0..n {
            let ua = self.u_row(a);
            for b in 0..n {
                let mut p = self.inner(ua, self.v_row(b));
                if a == b {
                    p -= 1.0;
                }
                worst = worst.max(p.norm());
            }
        }
        worst
    }

    /// Gram matrix `G[ξ][η] = (u_η, u_ξ)` of the retained eigenfunctions.
    pub fn gram(&self) -> crate::linalg::CMatrix {
        let n = self.len();
        let mut g = crate::linalg::CMatrix::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let p = self.inner(self.u_row(b), self.u_row(a));
                g[(a, b)] = p;
                g[(b, a)] = p.conj();
            }
        }
        g
    }

    /// Smallest `|u_ξ(x_i)|` and `|v_ξ(x_i)|` over the whole table.
    pub fn min_sample_moduli(&self) -> (f64, f64) {
        let min = |s: &[Complex64]| s.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        (min(&self.u), min(&self.v))
    }
}

/// Free-function form of [`SpectralSystem::biorthogonality_deviation`].
pub fn biorthogonality_check(system: &SpectralSystem) -> f64 {
    system.biorthogonality_deviation()
}
