use nhtrace_core::fourier::{
    inverse_l_fourier, l2_norm, l_fourier, parseval_pairing, CoeffSequence, Flavor,
};
use nhtrace_core::spectral::{fit_weyl_law, weyl_counting};
use nhtrace_core::{Complex64, INTERIOR_FRACTION};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use super::Context;
use crate::error::Result;
use crate::report::Criterion;

pub(super) fn weyl_fit(ctx: &mut Context<'_>) -> Result<()> {
    let s = ctx.config.model()?.spectrum()?;
    let [lo, hi] = ctx.config.fit.lambda_window.unwrap_or([10.0, 100.0]);
    let fit = fit_weyl_law(&s, (lo, hi))?;

    // the counting law is only meaningful away from the truncation edge
    let mut steps: Vec<(f64, usize)> = Vec::new();
    for &b in s.brackets().iter().filter(|&&b| b <= INTERIOR_FRACTION * s.max_bracket()) {
        if steps.last().is_none_or(|&(prev, _)| prev != b) {
            steps.push((b, weyl_counting(&s, b)));
        }
    }
    ctx.out.table("weyl_counting.csv", &["lambda", "count"], steps)?;
    ctx.out.json(
        "fit.json",
        &json!({
            "exponent": fit.exponent,
            "constant": fit.constant,
            "r_squared": fit.r_squared,
            "samples": fit.samples,
            "window": [lo, hi],
        }),
    )?;

    let r = &mut ctx.report;
    r.measure("weyl_constant", fit.constant);
    r.measure("r_squared", fit.r_squared);
    r.check(
        Criterion::absolute("Weyl exponent", fit.exponent, s.weyl_q(), 0.05)
            .derived("closed-form eigenvalues grow linearly in the mode index, so N(λ) ~ c λ^Q with Q = 1"),
    );
    Ok(())
}

struct PlancherelRow {
    norm_sq: f64,
    pairing: Complex64,
    coeff_error: f64,
}

pub(super) fn plancherel_suite(ctx: &mut Context<'_>) -> Result<()> {
    let system = ctx.system(ctx.config.model()?)?;
    let functions = ctx.config.plancherel.functions.unwrap_or(100);
    let band = ctx.config.plancherel.band_fraction.unwrap_or(0.5) * system.max_bracket();

    let mut rng = ChaCha8Rng::seed_from_u64(ctx.config.seed);
    let draws: Vec<Vec<Complex64>> = (0..functions)
        .map(|_| {
            system
                .brackets()
                .iter()
                .map(|&b| {
                    if b <= band {
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect()
        })
        .collect();

    let rows: Vec<PlancherelRow> = draws
        .par_iter()
        .map(|c| -> Result<PlancherelRow> {
            let f = inverse_l_fourier(&system, &CoeffSequence::new(c.clone(), Flavor::L))?;
            let back = l_fourier(&system, &f)?;
            let scale = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let coeff_error = back
                .values()
                .iter()
                .zip(c)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
                / scale;
            Ok(PlancherelRow {
                norm_sq: l2_norm(&system, &f).powi(2),
                pairing: parseval_pairing(&system, &f, &f)?,
                coeff_error,
            })
        })
        .collect::<Result<_>>()?;

    let deviation = |r: &PlancherelRow| (r.norm_sq - r.pairing).norm() / r.norm_sq;
    ctx.out.table(
        "plancherel.csv",
        &["function", "norm_sq", "pairing_re", "pairing_im", "rel_deviation", "coeff_error"],
        rows.iter()
            .enumerate()
            .map(|(i, r)| (i, r.norm_sq, r.pairing.re, r.pairing.im, deviation(r), r.coeff_error)),
    )?;
    if let Some(first) = draws.first() {
        let f = inverse_l_fourier(&system, &CoeffSequence::new(first.clone(), Flavor::L))?;
        let fh = l_fourier(&system, &f)?;
        ctx.out.coefficients("coefficients.csv", system.labels(), fh.values())?;
    }

    let worst = rows.iter().map(deviation).fold(0.0, f64::max);
    let worst_coeff = rows.iter().map(|r| r.coeff_error).fold(0.0, f64::max);
    let r = &mut ctx.report;
    r.measure("functions", functions as f64);
    r.check(
        Criterion::at_most("max relative Plancherel deviation", worst, 1e-7)
            .derived("biorthogonal expansion: ‖f‖² = Σ f̂ conj(f̂_*) exactly for band-limited f"),
    );
    r.check(
        Criterion::at_most("max relative coefficient error after inversion", worst_coeff, 1e-7)
            .derived("the L-Fourier transform inverts the eigenfunction sum on band-limited f"),
    );
    Ok(())
}
