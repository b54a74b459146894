use std::f64::consts::PI;

use nhtrace_core::dixmier::{
    classify_partial_sums, default_n_grid, fitted_weyl_constant, multiplier_singular_values,
    partial_sum_functional, tauberian_estimate, tauberian_symbol, Classification, DixmierEstimate,
    DEFAULT_P_GRID,
};
use nhtrace_core::quadrature::composite_gauss_legendre;
use nhtrace_core::Complex64;
use serde_json::json;

use super::Context;
use crate::error::{Error, Result};
use crate::report::Criterion;

fn p_grid(ctx: &Context<'_>) -> Vec<f64> {
    ctx.config.dixmier.p_grid.clone().unwrap_or_else(|| DEFAULT_P_GRID.to_vec())
}

pub(super) fn dixmier_multiplier(ctx: &mut Context<'_>) -> Result<()> {
    let s = ctx.config.model()?.spectrum()?;
    let big_q = s.weyl_q();
    let m = ctx.config.order(-big_q);
    let g = s.bracket_powers(m);
    let svals = multiplier_singular_values(&g.iter().map(|&v| Complex64::new(v, 0.0)).collect::<Vec<_>>());
    let partial = partial_sum_functional(&svals, &default_n_grid(svals.len()))?;
    let classification = classify_partial_sums(&partial)?;
    let tauberian = if m <= -big_q {
        let c = fitted_weyl_constant(&s)?;
        ctx.report.measure("fitted_weyl_constant", c);
        Some(tauberian_estimate(&s, &g, m, &p_grid(ctx), c)?)
    } else {
        None
    };
    let estimate = DixmierEstimate {
        partial,
        tauberian,
        classification,
    };
    ctx.out.partial_sums("dixmier_partial.csv", &estimate.partial)?;
    if let Some(t) = &estimate.tauberian {
        ctx.out.tauberian("dixmier_tauberian.csv", t)?;
    }
    ctx.out.verdict("verdict.json", &estimate)?;

    let expected = Classification::expected_for_order(m, big_q);
    let density = s.weyl_density();
    let r = &mut ctx.report;
    r.measure("limit_partial", estimate.limit_partial());
    r.measure("growth_exponent", estimate.partial.growth_exponent()?);
    r.measure("relative_variation_half_decade", estimate.partial.relative_variation(0.5));
    if let Some(t) = estimate.limit_tauberian() {
        r.measure("limit_tauberian", t);
    }
    r.check(
        Criterion::label("classification", classification.as_str(), expected.as_str())
            .derived("order m against -Q: equal gives a finite positive trace, below gives zero, above leaves the ideal"),
    );
    if (m + big_q).abs() <= 1e-9 {
        let basis = "Σ_{n<=N} ⟨ξ_n⟩^{-Q} ~ c ln N with the analytic Weyl density c";
        r.check(Criterion::relative("partial-sum limit", estimate.limit_partial(), density, 0.10).derived(basis));
        let t = estimate.limit_tauberian().unwrap_or(f64::NAN);
        r.check(Criterion::relative("Tauberian limit", t, density, 0.10).derived(basis));
        r.check(
            Criterion::at_most("estimator disagreement", estimate.agreement().unwrap_or(f64::NAN), 0.10)
                .derived("both estimators converge to the same Dixmier trace"),
        );
    } else if m < -big_q {
        r.check(
            Criterion::holds("partial sums decrease over the last decade", estimate.partial.decreasing_over_last_decade())
                .derived("summable singular values: the log average decays like 1/ln N"),
        );
        r.check(
            Criterion::at_most("extrapolated partial-sum limit", estimate.limit_partial(), 0.1 * density)
                .derived("vanishing Dixmier trace, bounded by 10% of the m = -Q value c"),
        );
    }
    Ok(())
}

pub(super) fn dixmier_xdependent(ctx: &mut Context<'_>) -> Result<()> {
    let system = ctx.system(ctx.config.model()?)?;
    let amplitude = ctx
        .config
        .symbol
        .amplitude
        .ok_or_else(|| Error::config("symbol.amplitude", "required by dixmier_xdependent"))?;
    let big_q = system.weyl_q();
    let m = ctx.config.order(-big_q);
    let (a, b) = system.domain();
    let phase = move |x: f64| 2.0 * PI * (x - a) / (b - a);
    let grid = p_grid(ctx);
    let c = fitted_weyl_constant(system.spectrum())?;
    let x_dep = tauberian_symbol(&system, |x, _, br| amplitude.eval(phase(x)) * br.powf(m), m, &grid, c)?;
    let base = tauberian_estimate(system.spectrum(), &system.bracket_powers(m), m, &grid, c)?;
    let ratio = x_dep.limit / base.limit;
    let mean = composite_gauss_legendre(a, b, 2048).integrate(|x| amplitude.eval(phase(x))) / (b - a);

    ctx.out.tauberian("dixmier_tauberian.csv", &x_dep)?;
    ctx.out.tauberian("dixmier_tauberian_multiplier.csv", &base)?;
    ctx.out.json(
        "verdict.json",
        &json!({
            "amplitude": amplitude.as_str(),
            "limit_tauberian": x_dep.limit,
            "limit_multiplier": base.limit,
            "ratio": ratio,
            "amplitude_mean": mean,
        }),
    )?;
    let r = &mut ctx.report;
    r.measure("limit_tauberian", x_dep.limit);
    r.measure("limit_multiplier", base.limit);
    r.measure("fitted_weyl_constant", c);
    r.check(
        Criterion::relative("trace ratio to the ⟨ξ⟩^m multiplier", ratio, mean, 0.10)
            .derived("Dixmier trace of a(x)⟨ξ⟩^{-Q} is linear in ∫a dx; mean of a by Gauss-Legendre"),
    );
    Ok(())
}
