//! The identity suite for deformations `g + λ(αg + βω⊗ω)`.

use psclab::chart::{laplacian, Method};
use psclab::killing::{
    alpha_of_norm, closed_variation, delta_of_alpha, killing_estimate_check, random_family,
    ricci_weg_bound, ricci_weg_hypothesis, scal_variation, variation_sweep, DeformFn,
    DeformationParams, KillingError,
};
use psclab::models::InvariantModel;
use rayon::prelude::*;
use serde::Serialize;

use super::{num, stamp};
use crate::config::{ExperimentConfig, MethodChoice, RicciWegParams, VerifyConfig};
use crate::report::{CheckRow, VerificationReport};
use crate::CliError;

pub const ANCHOR_DELTA_ALPHA: &str = "Δα = 2α̇(ric(X,X) − |∇X|²) − 4α̈|∇_X X|²";
pub const ANCHOR_B_ZERO: &str = "β = 0: d/dλ scal = −α scal + (n−1)Δα";
pub const ANCHOR_A_ZERO: &str =
    "α = 0: d/dλ scal = 2(β̇t+β)ric(X,X) − (2β̇t+3β)|∇X|² − (4β̈t+10β̇)|∇_X X|²";
pub const ANCHOR_SCAL_VAR: &str =
    "d/dλ scal(g + λ(αg + βω⊗ω)) at λ = 0, closed form vs λ-differences";
pub const ANCHOR_KILLING_EST: &str = "|X|²|∇X|² ≥ 2|∇_X X|²";
pub const ANCHOR_RICCI_WEG: &str = "(n−1)α̇ + β̇t + β = 0, β̇ ≤ 0 ⇒ d/dλ scal ≤ −α scal + (n−1)α̇|∇X|²";
pub const ANCHOR_SCALDIFFEST: &str =
    "α = C + (ε/(n−1))/(t+ε), β = 1/(t+ε), scal ≥ 0 ⇒ d/dλ scal ≤ −C scal";

/// Slack for the hypothesis `(n−1)α̇ + β̇t + β = 0` of the Ricci-type bound.
const HYPOTHESIS_TOL: f64 = 1e-10;

#[derive(Serialize)]
struct Grid<'a> {
    random_pairs: usize,
    user_deformations: usize,
    points: usize,
    margin: f64,
    method: MethodChoice,
    ricci_weg: &'a [RicciWegParams],
}

pub fn run(cfg: &ExperimentConfig) -> Result<VerificationReport, CliError> {
    let v = &cfg.verify;
    v.validate()?;
    let models = v
        .models
        .iter()
        .map(|m| Ok((m.id(), m.spec.build()?)))
        .collect::<Result<Vec<_>, crate::ConfigError>>()?;
    let mut params = random_family(cfg.seed, v.random_pairs);
    params.extend(
        v.deformations
            .iter()
            .map(|d| DeformationParams::general(d.alpha.clone(), d.beta.clone())),
    );

    let rows: Vec<CheckRow> = models
        .par_iter()
        .map(|(id, m)| model_rows(v, id, m.as_ref(), &params))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let grid = Grid {
        random_pairs: v.random_pairs,
        user_deformations: v.deformations.len(),
        points: v.points,
        margin: v.margin,
        method: v.method,
        ricci_weg: &v.ricci_weg,
    };
    Ok(VerificationReport::new(
        stamp("verify", cfg.seed, &v.tolerances, grid),
        rows,
    ))
}

fn model_rows(
    v: &VerifyConfig,
    id: &str,
    m: &dyn InvariantModel,
    params: &[DeformationParams],
) -> Vec<CheckRow> {
    let tol = |k: &str| v.tolerances[k];
    let pts = m.interior_points(v.points, v.margin);
    let alphas: Vec<&DeformFn> = params.iter().map(|p| &p.alpha).collect();
    let betas: Vec<&DeformFn> = params.iter().map(|p| &p.beta).collect();
    let mut rows = Vec::new();

    let row = |name: &str, anchor: &str, key: &str, r: Result<(f64, String), KillingError>| match r
    {
        Ok((err, detail)) => {
            CheckRow::measured(format!("{name}/{id}"), anchor, err, tol(key), detail)
        }
        Err(e) => CheckRow::failed(format!("{name}/{id}"), anchor, tol(key), e),
    };
    rows.push(row(
        "delta_alpha",
        ANCHOR_DELTA_ALPHA,
        "delta_alpha",
        delta_alpha(m, &alphas, &pts),
    ));
    rows.push(row(
        "b_zero",
        ANCHOR_B_ZERO,
        "b_zero",
        b_zero(m, &alphas, &pts),
    ));
    rows.push(row(
        "a_zero",
        ANCHOR_A_ZERO,
        "a_zero",
        a_zero(m, &betas, &pts),
    ));

    let methods: &[(Method, &str, &str)] = match v.method {
        MethodChoice::Analytic => &[(Method::Analytic, "analytic", "scal_var_analytic")],
        MethodChoice::FiniteDifference => &[(Method::FiniteDifference, "fd", "scal_var_fd")],
        MethodChoice::Both => &[
            (Method::Analytic, "analytic", "scal_var_analytic"),
            (Method::FiniteDifference, "fd", "scal_var_fd"),
        ],
    };
    for &(method, label, key) in methods {
        let r = variation_sweep(m, params, &pts, method).map(|s| {
            let worst = s.worst.as_ref().map_or(String::new(), |w| {
                format!(
                    "; worst at x = {:?}: closed {:.10e}, differences {:.10e}",
                    w.x, w.dscal_closed, w.dscal_fd
                )
            });
            (
                s.max_rel_err,
                format!("{} evaluations{worst}", s.evaluations),
            )
        });
        let name = format!("scal_var/{label}");
        rows.push(row(&name, ANCHOR_SCAL_VAR, key, r));
    }

    let est = killing_estimate_check(m, &pts).map(|r| {
        (
            (-r.min_margin).max(0.0),
            format!(
                "min margin {:.3e} over {} samples; saturated: {}",
                r.min_margin, r.samples, r.saturated
            ),
        )
    });
    rows.push(row("killing_est", ANCHOR_KILLING_EST, "killing_est", est));
    rows.push(row(
        "ricci_weg",
        ANCHOR_RICCI_WEG,
        "ricci_weg",
        ricci_weg(m, &v.ricci_weg, &pts),
    ));
    rows.push(row(
        "scaldiffest",
        ANCHOR_SCALDIFFEST,
        "scaldiffest",
        scaldiffest(m, &v.ricci_weg, &pts),
    ));
    rows
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(1.0)
}

/// Closed form against the chart Laplacian of `α(|X|²)`.
fn delta_alpha(
    m: &dyn InvariantModel,
    alphas: &[&DeformFn],
    pts: &[Vec<f64>],
) -> Result<(f64, String), KillingError> {
    if alphas.is_empty() {
        return Ok((0.0, "no deformations configured".into()));
    }
    let chart = m.chart();
    let mut worst = 0.0_f64;
    for (k, x) in pts.iter().enumerate() {
        let alpha = alphas[k % alphas.len()];
        let closed = delta_of_alpha(m, alpha, x)?;
        let oracle = laplacian(&chart, &alpha_of_norm(&chart, alpha), x, Method::Analytic)?;
        worst = worst.max(rel(closed, oracle));
    }
    Ok((
        worst,
        format!("{} points against the chart Laplacian", pts.len()),
    ))
}

fn b_zero(
    m: &dyn InvariantModel,
    alphas: &[&DeformFn],
    pts: &[Vec<f64>],
) -> Result<(f64, String), KillingError> {
    if alphas.is_empty() {
        return Ok((0.0, "no deformations configured".into()));
    }
    let chart = m.chart();
    let n = m.dim();
    let mut worst = 0.0_f64;
    for (k, x) in pts.iter().enumerate() {
        let alpha = alphas[k % alphas.len()];
        let kd = m.killing_data(x)?;
        let scal = m.scal(x)?;
        let special = closed_variation(n, scal, &kd, &DeformationParams::conformal(alpha.clone()))?;
        let general = closed_variation(
            n,
            scal,
            &kd,
            &DeformationParams::general(alpha.clone(), DeformFn::zero()),
        )?;
        let lap = laplacian(&chart, &alpha_of_norm(&chart, alpha), x, Method::Analytic)?;
        let reference = -alpha.f.value(kd.norm_sq) * scal + (n - 1) as f64 * lap;
        worst = worst
            .max(rel(special, reference))
            .max(rel(special, general));
    }
    Ok((
        worst,
        format!(
            "{} points; reference side uses the chart Laplacian",
            pts.len()
        ),
    ))
}

fn a_zero(
    m: &dyn InvariantModel,
    betas: &[&DeformFn],
    pts: &[Vec<f64>],
) -> Result<(f64, String), KillingError> {
    if betas.is_empty() {
        return Ok((0.0, "no deformations configured".into()));
    }
    let n = m.dim();
    let mut worst = 0.0_f64;
    for (k, x) in pts.iter().enumerate() {
        let beta = betas[k % betas.len()];
        let pure = DeformationParams::pure_beta(beta.clone());
        let r = scal_variation(m, &pure, x, Method::Analytic)?;
        let kd = m.killing_data(x)?;
        let scal = m.scal(x)?;
        let general = closed_variation(
            n,
            scal,
            &kd,
            &DeformationParams::general(DeformFn::zero(), beta.clone()),
        )?;
        worst = worst.max(r.rel_err).max(rel(r.dscal_closed, general));
    }
    Ok((
        worst,
        format!("{} points against analytic λ-differences", pts.len()),
    ))
}

fn ricci_weg(
    m: &dyn InvariantModel,
    list: &[RicciWegParams],
    pts: &[Vec<f64>],
) -> Result<(f64, String), KillingError> {
    let n = m.dim();
    let mut excess = 0.0_f64;
    let mut hypothesis_fails = 0;
    for p in list {
        let params = DeformationParams::ricci_weg(p.c, p.eps, n)?;
        for x in pts {
            let kd = m.killing_data(x)?;
            let scal = m.scal(x)?;
            let (a, b) = (params.alpha.jet(kd.norm_sq), params.beta.jet(kd.norm_sq));
            if !ricci_weg_hypothesis(n, kd.norm_sq, a, b, HYPOTHESIS_TOL) {
                hypothesis_fails += 1;
                excess = f64::INFINITY;
                continue;
            }
            let closed = closed_variation(n, scal, &kd, &params)?;
            excess = excess.max(closed - ricci_weg_bound(n, scal, &kd, a));
        }
    }
    Ok((
        excess.max(0.0),
        format!(
            "{} (C, ε) pairs × {} points; hypothesis violated at {hypothesis_fails}",
            list.len(),
            pts.len()
        ),
    ))
}

fn scaldiffest(
    m: &dyn InvariantModel,
    list: &[RicciWegParams],
    pts: &[Vec<f64>],
) -> Result<(f64, String), KillingError> {
    let n = m.dim();
    let mut excess = 0.0_f64;
    let mut used = 0;
    for p in list {
        let params = DeformationParams::ricci_weg(p.c, p.eps, n)?;
        for x in pts {
            let scal = m.scal(x)?;
            if scal < 0.0 {
                continue;
            }
            let kd = m.killing_data(x)?;
            excess = excess.max(closed_variation(n, scal, &kd, &params)? + p.c * scal);
            used += 1;
        }
    }
    let cs: Vec<String> = list.iter().map(|p| num(p.c)).collect();
    Ok((
        excess.max(0.0),
        format!("{used} samples with scal ≥ 0; C ∈ {{{}}}", cs.join(", ")),
    ))
}
