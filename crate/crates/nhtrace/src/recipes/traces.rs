use nhtrace_core::trace::{
    compare_singularity_models, cutoff_trace_curve, expansion_coefficients, fit_log_singularity,
    fit_power_law, heat_trace_curve, leading_heat_coefficient, Cutoff, DiagonalWeights, LogCheck,
    TAIL_TOLERANCE,
};
use nhtrace_core::{ModelId, Spectrum};
use serde_json::json;

use super::{relative_window, t_grid, Context};
use crate::config::PsiName;
use crate::error::{Error, Result};
use crate::report::Criterion;

const FIT_WINDOW: [f64; 2] = [30.0, 300.0];
const DICHOTOMY_WINDOW: [f64; 2] = [30.0, 3000.0];
const DICHOTOMY_MODES: usize = 16384;
/// Required lead in r² of the preferred singularity model.
const DICHOTOMY_MARGIN: f64 = 0.01;

fn is_critical(m: f64, big_q: f64) -> bool {
    (m + big_q).abs() <= 1e-9
}

pub(super) fn heat_exponent(ctx: &mut Context<'_>) -> Result<()> {
    let s = ctx.config.model()?.spectrum()?;
    let (m, q) = (ctx.config.order(0.0), ctx.config.regularizer.q());
    let big_q = s.weyl_q();
    let window = relative_window(&s, q, ctx.config.fit.window.unwrap_or(FIT_WINDOW));
    let grid = t_grid(window, ctx.points_per_decade())?;
    let curve = heat_trace_curve(&DiagonalWeights::bracket_power(&s, m), q, &grid)?;
    let fit = fit_power_law(&curve, window)?;
    ctx.out.trace("heat_trace.csv", &curve)?;
    ctx.out.fit("fit.json", &fit)?;

    let tail = curve
        .t
        .iter()
        .zip(&curve.tail_fraction)
        .filter(|(t, _)| **t >= window.0 * (1.0 - 1e-12))
        .map(|(_, f)| *f)
        .fold(0.0, f64::max);
    let r = &mut ctx.report;
    r.measure("intercept", fit.intercept);
    if let Some(floor) = curve.safe_t_floor {
        r.measure("safe_t_floor", floor);
    }
    r.check(
        Criterion::absolute("heat-trace exponent", fit.value, -(big_q + m) / q, 0.07)
            .derived("Weyl law: Σ ⟨ξ⟩^m e^{-t⟨ξ⟩^q} ~ c Q Γ((Q+m)/q)/q · t^{-(Q+m)/q}"),
    );
    r.check(Criterion::at_least("power-law r²", fit.r_squared, 0.999).derived("pure power law at leading order"));
    r.check(
        Criterion::at_most("truncation tail share in the window", tail, TAIL_TOLERANCE)
            .derived("e^{-t Λ^q} at t >= 30 Λ^{-q}"),
    );
    Ok(())
}

pub(super) fn log_singularity(ctx: &mut Context<'_>) -> Result<()> {
    let spec = ctx.config.model()?;
    let s = spec.spectrum()?;
    let big_q = s.weyl_q();
    let (m, q) = (ctx.config.order(-big_q), ctx.config.regularizer.q());
    if !is_critical(m, big_q) {
        return Err(Error::config("symbol.m", format!("the log singularity sits at m = -Q = {}", -big_q)));
    }
    let ppd = ctx.points_per_decade();
    let window = relative_window(&s, q, ctx.config.fit.window.unwrap_or(FIT_WINDOW));
    let curve = heat_trace_curve(&DiagonalWeights::bracket_power(&s, m), q, &t_grid(window, ppd)?)?;
    let fit = fit_log_singularity(&curve, window)?;
    ctx.out.trace("heat_trace.csv", &curve)?;
    ctx.out.fit("fit.json", &fit)?;

    let modes = ctx.config.fit.dichotomy_modes.unwrap_or(DICHOTOMY_MODES);
    let wide = Spectrum::build(spec.model_id()?, spec.twist()?, modes)?;
    let dwindow = relative_window(&wide, q, ctx.config.fit.dichotomy_window.unwrap_or(DICHOTOMY_WINDOW));
    let dgrid = t_grid(dwindow, ppd)?;
    let at = heat_trace_curve(&DiagonalWeights::bracket_power(&wide, m), q, &dgrid)?;
    let above = heat_trace_curve(&DiagonalWeights::bracket_power(&wide, m + 0.5), q, &dgrid)?;
    let cmp_at = compare_singularity_models(&at, dwindow)?;
    let cmp_above = compare_singularity_models(&above, dwindow)?;
    ctx.out.trace("dichotomy_at.csv", &at)?;
    ctx.out.trace("dichotomy_above.csv", &above)?;
    ctx.out.json(
        "dichotomy.json",
        &json!({
            "modes": modes,
            "window": [dwindow.0, dwindow.1],
            "at_minus_q": {"m": m, "power_r_squared": cmp_at.power.r_squared, "log_r_squared": cmp_at.log.r_squared},
            "above": {"m": m + 0.5, "power_r_squared": cmp_above.power.r_squared, "log_r_squared": cmp_above.log.r_squared},
        }),
    )?;

    let r = &mut ctx.report;
    r.measure("intercept", fit.intercept);
    r.measure("log_fit_r_squared", fit.r_squared);
    r.check(
        Criterion::relative("log coefficient beta", fit.value, s.weyl_density() * big_q / q, 0.05).derived(
            "Weyl law: Σ ⟨ξ⟩^{-Q} e^{-t⟨ξ⟩^q} ~ -(c Q/q) ln t with the analytic Weyl density c",
        ),
    );
    r.check(
        Criterion::at_least("log-model r² at m = -Q", cmp_at.log.r_squared, 0.99)
            .derived("log singularity at m = -Q"),
    );
    r.check(
        Criterion::at_least("log minus power r² at m = -Q", cmp_at.log.r_squared - cmp_at.power.r_squared, DICHOTOMY_MARGIN)
            .derived("log singularity at m = -Q"),
    );
    r.check(
        Criterion::at_least("power-model r² at m = -Q + 1/2", cmp_above.power.r_squared, 0.99)
            .derived("power singularity t^{-1/(2q)} above -Q"),
    );
    r.check(
        Criterion::at_least(
            "power minus log r² at m = -Q + 1/2",
            cmp_above.power.r_squared - cmp_above.log.r_squared,
            DICHOTOMY_MARGIN,
        )
        .derived("power singularity t^{-1/(2q)} above -Q"),
    );
    Ok(())
}

fn cutoff_from(ctx: &Context<'_>) -> Result<Cutoff> {
    let reg = &ctx.config.regularizer;
    Ok(match reg.psi.unwrap_or(PsiName::Bump) {
        PsiName::Bump => Cutoff::bump(reg.c.unwrap_or(1.5), reg.r.unwrap_or(0.5))
            .map_err(|e| Error::config("regularizer.c", e.to_string()))?,
        PsiName::Exp => Cutoff::Exponential,
    })
}

pub(super) fn cutoff_trace(ctx: &mut Context<'_>) -> Result<()> {
    let s = ctx.config.model()?.spectrum()?;
    let big_q = s.weyl_q();
    let (m, q) = (ctx.config.order(-big_q), ctx.config.regularizer.q());
    let psi = cutoff_from(ctx)?;
    let window = relative_window(&s, q, ctx.config.fit.window.unwrap_or(FIT_WINDOW));
    let grid = t_grid(window, ctx.points_per_decade())?;
    let weights = DiagonalWeights::bracket_power(&s, m);
    let energy = s.bracket_powers(q);
    let critical = is_critical(m, big_q);
    let check = if critical { LogCheck::Required } else { LogCheck::Skip };
    let curve = cutoff_trace_curve(&weights, &energy, q, psi, &grid, check)?;
    ctx.out.trace("cutoff_trace.csv", &curve)?;

    if critical {
        let integral = psi.log_integral().expect("bump vanishes near 0");
        let plateau = s.weyl_density() * big_q / q * integral;
        let worst = curve
            .values
            .iter()
            .map(|v| v.re)
            .max_by(|a, b| (a - plateau).abs().total_cmp(&(b - plateau).abs()))
            .expect("nonempty grid");
        ctx.out.json(
            "plateau.json",
            &json!({"psi": psi.name(), "log_integral": integral, "plateau": plateau, "worst_value": worst}),
        )?;
        let r = &mut ctx.report;
        r.measure("log_integral", integral);
        r.check(
            Criterion::relative("cutoff trace, worst point of the window", worst, plateau, 0.05).derived(
                "Weyl law: Σ ⟨ξ⟩^{-Q} ψ(t⟨ξ⟩^q) -> (c Q/q) ∫ψ(s) ds/s, integral by Gauss-Legendre",
            ),
        );
    } else {
        let fit = fit_power_law(&curve, window)?;
        ctx.out.fit("fit.json", &fit)?;
        let r = &mut ctx.report;
        r.measure("r_squared", fit.r_squared);
        r.check(
            Criterion::absolute("cutoff-trace exponent", fit.value, -(big_q + m) / q, 0.07)
                .derived("Weyl law: Σ ⟨ξ⟩^m ψ(t⟨ξ⟩^q) ~ C t^{-(Q+m)/q}"),
        );
    }
    Ok(())
}

pub(super) fn expansion_coeffs(ctx: &mut Context<'_>) -> Result<()> {
    let s = ctx.config.model()?.spectrum()?;
    let big_q = s.weyl_q();
    let (m, q) = (ctx.config.order(0.0), ctx.config.regularizer.q());
    let terms = ctx.config.fit.terms.unwrap_or(1);
    let window = relative_window(&s, q, ctx.config.fit.window.unwrap_or(FIT_WINDOW));
    let curve = heat_trace_curve(&DiagonalWeights::bracket_power(&s, m), q, &t_grid(window, ctx.points_per_decade())?)?;
    let fit = expansion_coefficients(&curve, q, m, big_q, terms, window)?;
    ctx.out.trace("heat_trace.csv", &curve)?;
    ctx.out.fit("fit.json", &fit)?;

    let coeffs = fit.coeffs.clone().unwrap_or_default();
    let r = &mut ctx.report;
    for (k, c) in coeffs.iter().enumerate() {
        r.measure(&format!("a{k}"), *c);
    }
    if let Some(cond) = fit.condition {
        r.measure("condition", cond);
    }
    r.check(
        Criterion::relative("leading coefficient a0", fit.value, leading_heat_coefficient(s.weyl_density(), big_q, m, q), 0.05)
            .derived("a0 = c Q Γ((Q+m)/q)/q from the analytic Weyl density c"),
    );
    if s.model() == ModelId::DirichletInterval && m == 0.0 && q == 1.0 && coeffs.len() > 1 {
        r.check(
            Criterion::absolute("first correction a1", coeffs[1], -0.5, 0.05)
                .derived("Σ_k e^{-tkπ} = 1/(e^{tπ} - 1) = 1/(πt) - 1/2 + O(t)"),
        );
    }
    Ok(())
}
