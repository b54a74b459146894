use std::f64::consts::PI;

use nhtrace_core::quantization::{
    composition_defect, extract_symbol, l2_operator_norm, make_multiplier, parametrix_residual, quantize,
    Symbol, SymbolClass,
};
use nhtrace_core::regression::linear_fit;
use nhtrace_core::{Complex64, ModelId, SpectralSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::Context;
use crate::config::{CalculusCheck, ModelSpec};
use crate::error::Result;
use crate::report::Criterion;

const ROUNDTRIP_TOL: f64 = 1e-7;
const NORM_BOUND: f64 = 3.0;

/// `Σ_{|j|<=2} (α_j + β_j k/⟨ξ⟩ + γ_j/⟨ξ⟩) e^{ijθ}` with uniform complex
/// coefficients, `θ` the phase of `x` over the domain. Order 0, and every
/// `x`-harmonic only shifts modes by at most 2.
pub fn random_order_zero_symbol(system: &SpectralSystem, rng: &mut impl Rng) -> Result<Symbol> {
    let (a, b) = system.domain();
    let omega = 2.0 * PI / (b - a);
    let coeffs: Vec<[Complex64; 3]> = (0..5)
        .map(|_| std::array::from_fn(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
        .collect();
    Ok(Symbol::from_fn(system, "random_order_zero", SymbolClass::classical(0.0), |x, label, br| {
        let k = label as f64;
        (-2i32..=2)
            .zip(&coeffs)
            .map(|(j, c)| (c[0] + c[1] * (k / br) + c[2] / br) * Complex64::from_polar(1.0, omega * j as f64 * (x - a)))
            .sum()
    })?)
}

/// Largest `|σ_extracted − σ|` over the interior modes, relative to `max |σ|`.
fn roundtrip_error(system: &SpectralSystem, symbol: &Symbol) -> Result<f64> {
    let back = extract_symbol(&quantize(system, symbol)?)?;
    let scale = symbol.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut worst = 0.0f64;
    for idx in system.interior_indices() {
        for (p, q) in back.row(idx).iter().zip(symbol.row(idx)) {
            worst = worst.max((p - q).norm());
        }
    }
    Ok(worst / scale)
}

fn circle(ctx: &Context<'_>, modes: usize) -> Result<SpectralSystem> {
    ctx.system(&ModelSpec::new(ModelId::PeriodicCircle, None, modes))
}

fn roundtrip(ctx: &mut Context<'_>) -> Result<()> {
    let c = &ctx.config.calculus;
    let modes = c.roundtrip_modes.unwrap_or(16);
    let count = c.roundtrip_symbols.unwrap_or(20);
    let h = c.twist.unwrap_or(2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.config.seed);
    let mut rows = Vec::new();
    for (model, twist) in [(ModelId::PeriodicCircle, None), (ModelId::TwistedH, Some(h))] {
        let system = ctx.system(&ModelSpec::new(model, twist, modes))?;
        let symbols: Vec<Symbol> = (0..count)
            .map(|_| random_order_zero_symbol(&system, &mut rng))
            .collect::<Result<_>>()?;
        let errors: Vec<f64> = symbols
            .par_iter()
            .map(|s| roundtrip_error(&system, s))
            .collect::<Result<_>>()?;
        if let Some(first) = symbols.first() {
            ctx.out.symbol(&format!("roundtrip_symbol_{}.csv", model.as_str()), first)?;
        }
        let worst = errors.iter().copied().fold(0.0, f64::max);
        rows.extend(errors.into_iter().enumerate().map(|(i, e)| (model.as_str(), i, e)));
        ctx.report.check(
            Criterion::at_most(&format!("symbol roundtrip error, {}", model.as_str()), worst, ROUNDTRIP_TOL)
                .derived("extraction inverts quantization on interior modes of trigonometric symbols"),
        );
    }
    ctx.out.table("roundtrip.csv", &["model", "symbol", "max_rel_error"], rows)
}

fn log_slope(points: &[(f64, f64)]) -> Result<f64> {
    let x: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    Ok(linear_fit(&x, &y)?.slope)
}

fn composition(ctx: &mut Context<'_>) -> Result<()> {
    let c = &ctx.config.calculus;
    let modes = c.composition_modes.unwrap_or(64);
    let [lo, hi] = c.composition_window.unwrap_or([4.0, 32.0]);
    let s = circle(ctx, modes)?;
    let a = make_multiplier(&s, |_, b| Complex64::new(1.0 / b, 0.0), -1.0, 1.0)?;
    let wave = Symbol::from_fn(&s, "wave", SymbolClass::classical(0.0), |x, _, _| Complex64::from_polar(1.0, x))?;
    let defect = composition_defect(&s, &a, &wave)?;
    // |a b| = ⟨ξ⟩^{-1}
    let window = defect.window(lo, hi);
    let product: Vec<(f64, f64)> = window.iter().map(|&(b, _)| (b, 1.0 / b)).collect();
    let gap = log_slope(&product)? - log_slope(&window)?;
    ctx.out.table(
        "composition.csv",
        &["mode_label", "bracket", "defect", "product"],
        defect
            .labels
            .iter()
            .zip(&defect.brackets)
            .zip(&defect.values)
            .map(|((l, b), d)| (l, b, d, 1.0 / b)),
    )?;
    ctx.report.measure("composition_defect_max", defect.max());
    ctx.report.check(
        Criterion::absolute("composition defect order below the product", gap, 1.0, 0.2)
            .derived("leading-term composition: σ_AB − ab is of order m1 + m2 − 1, here |Δ⟨k⟩^{-1}| ~ ⟨k⟩^{-2}"),
    );
    Ok(())
}

fn parametrix(ctx: &mut Context<'_>) -> Result<()> {
    let c = &ctx.config.calculus;
    let sizes = c.parametrix_modes.clone().unwrap_or_else(|| vec![16, 32, 64]);
    let [lo, hi] = c.parametrix_band.unwrap_or([0.4, 0.8]);
    let mut residuals = Vec::new();
    for &modes in &sizes {
        let s = circle(ctx, modes)?;
        let elliptic = Symbol::from_fn(&s, "(2 + cos x)<k>", SymbolClass::classical(1.0), |x, _, b| {
            Complex64::new((2.0 + x.cos()) * b, 0.0)
        })?;
        residuals.push(parametrix_residual(&s, &elliptic, Some((lo, hi)))?);
    }
    ctx.out.table("parametrix.csv", &["modes", "residual"], sizes.iter().zip(&residuals))?;
    for (w, n) in residuals.windows(2).zip(sizes.windows(2)) {
        ctx.report.check(
            Criterion::absolute(&format!("parametrix residual ratio {} -> {} modes", n[0], n[1]), w[1] / w[0], 0.5, 0.1)
                .derived("Op(σ)Op(1/σ) − I has order −1, so on a fixed relative band it scales like 1/modes"),
        );
    }
    Ok(())
}

fn norm_symbol(s: &SpectralSystem) -> Result<Symbol> {
    Ok(Symbol::from_fn(s, "bounded order zero", SymbolClass::classical(0.0), |x, k, b| {
        (Complex64::from_polar(k as f64 / b, x) + Complex64::from_polar(1.0 / b, -2.0 * x) + 1.0) / 3.0
    })?)
}

fn norms(ctx: &mut Context<'_>) -> Result<()> {
    let sizes = ctx.config.calculus.norm_modes.clone().unwrap_or_else(|| vec![64, 128, 256, 512]);
    let systems: Vec<SpectralSystem> = sizes.iter().map(|&m| circle(ctx, m)).collect::<Result<_>>()?;
    let results: Vec<(f64, f64)> = systems
        .par_iter()
        .map(|s| -> Result<(f64, f64)> {
            let sym = norm_symbol(s)?;
            let sup = sym.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
            Ok((l2_operator_norm(&quantize(s, &sym)?)?, sup))
        })
        .collect::<Result<_>>()?;
    ctx.out.table(
        "norms.csv",
        &["modes", "l2_norm", "symbol_sup"],
        sizes.iter().zip(&results).map(|(m, (n, s))| (m, n, s)),
    )?;
    let worst = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let sup = results.iter().map(|r| r.1).fold(0.0, f64::max);
    ctx.report.measure("symbol_sup", sup);
    ctx.report.check(
        Criterion::at_most("largest order-0 L2 norm across truncations", worst, NORM_BOUND * sup)
            .derived("uniform L2 bound for order-0 symbols, here 3·sup|σ|"),
    );
    Ok(())
}

pub(super) fn calculus_checks(ctx: &mut Context<'_>) -> Result<()> {
    let checks = ctx.config.calculus.checks.clone().unwrap_or_else(|| CalculusCheck::ALL.to_vec());
    for check in checks {
        match check {
            CalculusCheck::Roundtrip => roundtrip(ctx)?,
            CalculusCheck::Composition => composition(ctx)?,
            CalculusCheck::Parametrix => parametrix(ctx)?,
            CalculusCheck::Norms => norms(ctx)?,
        }
    }
    Ok(())
}
