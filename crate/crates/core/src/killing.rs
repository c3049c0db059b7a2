//! First-variation calculus for deformations along a Killing field.
//!
//! For functions `α, β` of `t = |X|²` the deformation
//! `g^λ = g + λ(α g + β ω⊗ω)`, `ω = g(X, ·)`, changes scalar curvature at
//! first order by an expression in the four [`KillingData`] quantities. The
//! closed forms here are checked against `λ`-differences of the chart
//! engine's scalar curvature of `g^λ`.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chart::{self, ChartError, ChartMetric, Method, ScalarField, ScalarFormula};
use crate::expr::Expr;
use crate::jet::{Jet1, Jet4, Real};
use crate::models::{InvariantModel, KillingData, ModelError, PHI};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KillingError {
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("g^λ is not positive definite at λ = {lambda:e}")]
    IndefinitePerturbation { lambda: f64 },
    #[error("|X|² = {t} lies outside the domain of {which}")]
    DomainError { which: &'static str, t: f64 },
    #[error("ε must be positive, got {0}")]
    NonPositiveEps(f64),
}

/// A function of `t = |X|²`. Derivatives come from jets unless explicit
/// derivative expressions are supplied, in which case the closed-form
/// formulas use those instead (the perturbed metric always uses `f`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformFn {
    pub f: Expr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d1: Option<Expr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d2: Option<Expr>,
}

impl From<Expr> for DeformFn {
    fn from(f: Expr) -> Self {
        Self {
            f,
            d1: None,
            d2: None,
        }
    }
}

impl DeformFn {
    pub fn zero() -> Self {
        Expr::constant(0.0).into()
    }

    pub fn constant(c: f64) -> Self {
        Expr::constant(c).into()
    }

    pub fn with_derivatives(f: Expr, d1: Expr, d2: Expr) -> Self {
        Self {
            f,
            d1: Some(d1),
            d2: Some(d2),
        }
    }

    /// `(value, first, second)` derivative at `t`, as used by the closed forms.
    pub fn jet(&self, t: f64) -> Jet1 {
        let j = self.f.jet(t);
        Jet1::new(
            j.v,
            self.d1.as_ref().map_or(j.d1(), |e| e.value(t)),
            self.d2.as_ref().map_or(j.d2(), |e| e.value(t)),
        )
    }

    pub fn eval<T: Real>(&self, t: T) -> T {
        self.f.eval(t)
    }

    pub fn is_zero(&self) -> bool {
        self.f.is_constant() && self.f.value(0.0) == 0.0 && self.d1.is_none() && self.d2.is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Flavor {
    General,
    /// `β = 0`.
    Conformal,
    /// `α = 0`.
    PureBeta,
    /// `α = C + (ε/(n−1))/(t+ε)`, `β = 1/(t+ε)`.
    RicciWeg {
        c: f64,
        eps: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformationParams {
    pub alpha: DeformFn,
    pub beta: DeformFn,
    pub flavor: Flavor,
}

impl DeformationParams {
    pub fn general(alpha: impl Into<DeformFn>, beta: impl Into<DeformFn>) -> Self {
        Self {
            alpha: alpha.into(),
            beta: beta.into(),
            flavor: Flavor::General,
        }
    }

    pub fn conformal(alpha: impl Into<DeformFn>) -> Self {
        Self {
            alpha: alpha.into(),
            beta: DeformFn::zero(),
            flavor: Flavor::Conformal,
        }
    }

    pub fn pure_beta(beta: impl Into<DeformFn>) -> Self {
        Self {
            alpha: DeformFn::zero(),
            beta: beta.into(),
            flavor: Flavor::PureBeta,
        }
    }

    pub fn ricci_weg(c: f64, eps: f64, n: usize) -> Result<Self, KillingError> {
        if !(eps > 0.0) {
            return Err(KillingError::NonPositiveEps(eps));
        }
        let recip = Expr::shifted_reciprocal(1.0, eps);
        let alpha = Expr::constant(c) + Expr::constant(eps / (n - 1) as f64) * recip.clone();
        Ok(Self {
            alpha: alpha.into(),
            beta: recip.into(),
            flavor: Flavor::RicciWeg { c, eps },
        })
    }

    fn jets(&self, t: f64) -> Result<(Jet1, Jet1), KillingError> {
        let a = self.alpha.jet(t);
        let b = self.beta.jet(t);
        let finite = |j: &Jet1| j.v.is_finite() && j.d1().is_finite() && j.d2().is_finite();
        if !finite(&a) {
            return Err(KillingError::DomainError { which: "alpha", t });
        }
        if !finite(&b) {
            return Err(KillingError::DomainError { which: "beta", t });
        }
        Ok((a, b))
    }
}

/// `Δα = 2α̇(ric(X,X) − |∇X|²) − 4α̈|∇_X X|²` for `α` composed with `|X|²`.
pub fn delta_alpha_formula(k: &KillingData, a: Jet1) -> f64 {
    2.0 * a.d1() * (k.ric_xx - k.grad_norm_sq) - 4.0 * a.d2() * k.acc_norm_sq
}

/// Full first variation of scalar curvature.
pub fn variation_general(n: usize, scal: f64, k: &KillingData, a: Jet1, b: Jet1) -> f64 {
    let m = (n - 1) as f64;
    let t = k.norm_sq;
    let (a0, a1, a2) = (a.v, a.d1(), a.d2());
    let (b0, b1, b2) = (b.v, b.d1(), b.d2());
    -a0 * scal + 2.0 * (m * a1 + b1 * t + b0) * k.ric_xx
        - (2.0 * m * a1 + 2.0 * b1 * t + 3.0 * b0) * k.grad_norm_sq
        - (4.0 * m * a2 + 4.0 * b2 * t + 10.0 * b1) * k.acc_norm_sq
}

/// `β = 0`: `−α scal + (n−1)Δα`.
pub fn variation_conformal(n: usize, scal: f64, k: &KillingData, a: Jet1) -> f64 {
    -a.v * scal + (n - 1) as f64 * delta_alpha_formula(k, a)
}

/// `α = 0`: `2(β̇t+β)ric − (2β̇t+3β)|∇X|² − (4β̈t+10β̇)|∇_X X|²`.
pub fn variation_pure_beta(k: &KillingData, b: Jet1) -> f64 {
    let t = k.norm_sq;
    let (b0, b1, b2) = (b.v, b.d1(), b.d2());
    2.0 * (b1 * t + b0) * k.ric_xx
        - (2.0 * b1 * t + 3.0 * b0) * k.grad_norm_sq
        - (4.0 * b2 * t + 10.0 * b1) * k.acc_norm_sq
}

/// Closed-form first variation, dispatching on the flavor.
pub fn closed_variation(
    n: usize,
    scal: f64,
    k: &KillingData,
    p: &DeformationParams,
) -> Result<f64, KillingError> {
    let (a, b) = p.jets(k.norm_sq)?;
    Ok(match p.flavor {
        Flavor::Conformal => variation_conformal(n, scal, k, a),
        Flavor::PureBeta => variation_pure_beta(k, b),
        Flavor::General | Flavor::RicciWeg { .. } => variation_general(n, scal, k, a, b),
    })
}

/// Upper bound `−α scal + (n−1)α̇|∇X|²`, valid when `(n−1)α̇ + β̇t + β = 0`
/// and `β̇ ≤ 0`.
pub fn ricci_weg_bound(n: usize, scal: f64, k: &KillingData, a: Jet1) -> f64 {
    -a.v * scal + (n - 1) as f64 * a.d1() * k.grad_norm_sq
}

/// Whether `(n−1)α̇ + β̇t + β = 0` and `β̇ ≤ 0` hold at `t`.
pub fn ricci_weg_hypothesis(n: usize, t: f64, a: Jet1, b: Jet1, tol: f64) -> bool {
    ((n - 1) as f64 * a.d1() + b.d1() * t + b.v).abs() <= tol && b.d1() <= tol
}

pub fn delta_of_alpha(
    model: &dyn InvariantModel,
    alpha: &DeformFn,
    x: &[f64],
) -> Result<f64, KillingError> {
    let k = model.killing_data(x)?;
    let a = alpha.jet(k.norm_sq);
    if !(a.v.is_finite() && a.d1().is_finite() && a.d2().is_finite()) {
        return Err(KillingError::DomainError {
            which: "alpha",
            t: k.norm_sq,
        });
    }
    Ok(delta_alpha_formula(&k, a))
}

/// The function `α(|X|²)` on the chart, with jets when the chart has them.
pub fn alpha_of_norm(chart: &ChartMetric, alpha: &DeformFn) -> ScalarField {
    let n = chart.dim();
    let values = chart.value_fn();
    let fa = alpha.f.clone();
    let vf = Arc::new(move |x: &[f64]| fa.eval(values(x)[PHI * n + PHI]));
    let jf = chart.jet_fn().map(|jets| {
        let fa = alpha.f.clone();
        Arc::new(move |x: &[Jet4]| fa.eval(jets(x)[PHI * n + PHI]))
            as Arc<dyn Fn(&[Jet4]) -> Jet4 + Send + Sync>
    });
    ScalarField::from_parts(vf, jf)
}

fn perturb<T: Real>(g: &[T], n: usize, lambda: f64, alpha: &Expr, beta: &Expr) -> Vec<T> {
    let t = g[PHI * n + PHI];
    let a = alpha.eval(t);
    let b = beta.eval(t);
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let w = g[PHI * n + i] * g[PHI * n + j];
            out.push(g[i * n + j] + (a * g[i * n + j] + b * w) * lambda);
        }
    }
    out
}

/// `g^λ = g + λ(α(|X|²) g + β(|X|²) ω⊗ω)` on the same chart.
pub fn perturbed_chart(chart: &ChartMetric, p: &DeformationParams, lambda: f64) -> ChartMetric {
    let n = chart.dim();
    let values = chart.value_fn();
    let (fa, fb) = (p.alpha.f.clone(), p.beta.f.clone());
    let vf = Arc::new(move |x: &[f64]| perturb(&values(x), n, lambda, &fa, &fb));
    let jf = chart.jet_fn().map(|jets| {
        let (fa, fb) = (p.alpha.f.clone(), p.beta.f.clone());
        Arc::new(move |x: &[Jet4]| perturb(&jets(x), n, lambda, &fa, &fb))
            as Arc<dyn Fn(&[Jet4]) -> Vec<Jet4> + Send + Sync>
    });
    ChartMetric::from_parts(chart.coords().to_vec(), vf, jf)
        .expect("same dimension as the input chart")
        .with_step(chart.step())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariationResult {
    pub x: Vec<f64>,
    pub dscal_closed: f64,
    pub dscal_fd: f64,
    /// `|closed − fd| / max(1, |closed|)`.
    pub rel_err: f64,
    pub lambda_step: f64,
    /// Spatial step of the perturbed metric in finite-difference mode.
    pub spatial_step: Option<f64>,
    pub method: Method,
}

/// Spatial step for finite-difference curvature inside the `λ` quotient.
///
/// The quotient divides round-off of the second differences by `h_λ`, so
/// the step sits near `ε_mach^{1/6}`, the optimum for 4th-order second
/// differences, instead of the default chart step.
pub const VARIATION_FD_STEP: f64 = 2e-3;

/// Base `λ` step for the Richardson difference quotient.
pub fn lambda_base_step(method: Method) -> f64 {
    match method {
        Method::Analytic => 1e-3,
        Method::FiniteDifference => 1e-2,
    }
}

/// Closed-form first variation against a Richardson-extrapolated central
/// difference in `λ` of the chart engine's scalar curvature.
///
/// The `λ` step is scaled by `1/(1 + |α| + |β|t)` so that the relative size
/// of the perturbation stays fixed across the random function family.
pub fn scal_variation(
    model: &dyn InvariantModel,
    p: &DeformationParams,
    x: &[f64],
    method: Method,
) -> Result<VariationResult, KillingError> {
    let k = model.killing_data(x)?;
    let scal = model.scal(x)?;
    let closed = closed_variation(model.dim(), scal, &k, p)?;
    let (a, b) = p.jets(k.norm_sq)?;
    let h = lambda_base_step(method) / (1.0 + a.v.abs() + b.v.abs() * k.norm_sq);
    let mut chart = model.chart();
    let spatial_step = match method {
        Method::Analytic => None,
        Method::FiniteDifference => {
            let wide = chart.step().max(VARIATION_FD_STEP);
            let fits =
                chart.coords().iter().zip(x).all(|(c, &xi)| {
                    c.periodic || (xi - 2.0 * wide >= c.lo && xi + 2.0 * wide <= c.hi)
                });
            if fits {
                chart = chart.with_step(wide);
            }
            Some(chart.step())
        }
    };
    let s = |lambda: f64| -> Result<f64, KillingError> {
        let c = perturbed_chart(&chart, p, lambda);
        match chart::scal(&c, x, method) {
            Err(ChartError::SingularMetric { .. }) => {
                Err(KillingError::IndefinitePerturbation { lambda })
            }
            r => Ok(r?),
        }
    };
    let d = |h: f64| -> Result<f64, KillingError> { Ok((s(h)? - s(-h)?) / (2.0 * h)) };
    let fd = (4.0 * d(0.5 * h)? - d(h)?) / 3.0;
    Ok(VariationResult {
        x: x.to_vec(),
        dscal_closed: closed,
        dscal_fd: fd,
        rel_err: (closed - fd).abs() / closed.abs().max(1.0),
        lambda_step: h,
        spatial_step,
        method,
    })
}

/// Killing quantities of `∂_φ` computed from the chart alone.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleKilling {
    pub data: KillingData,
    /// `⟨X, ∇_X X⟩`, zero for Killing fields.
    pub x_dot_acc: f64,
}

pub fn oracle_killing_data(
    chart: &ChartMetric,
    x: &[f64],
    method: Method,
) -> Result<OracleKilling, ChartError> {
    let rep = chart::scalar_curvature(chart, x, method)?;
    let g = chart.components(x)?;
    let ginv = crate::chart::invert_metric(&g, x)?;
    let n = chart.dim();
    let gam = &rep.christoffel;
    // (∇_i X)^k = Γ^k_{iφ}
    let mut grad_norm_sq = 0.0;
    for i in 0..n {
        for j in 0..n {
            for kk in 0..n {
                for l in 0..n {
                    grad_norm_sq +=
                        ginv[(i, j)] * g[(kk, l)] * gam.get(kk, i, PHI) * gam.get(l, j, PHI);
                }
            }
        }
    }
    let mut acc_norm_sq = 0.0;
    let mut x_dot_acc = 0.0;
    for kk in 0..n {
        x_dot_acc += g[(PHI, kk)] * gam.get(kk, PHI, PHI);
        for l in 0..n {
            acc_norm_sq += g[(kk, l)] * gam.get(kk, PHI, PHI) * gam.get(l, PHI, PHI);
        }
    }
    Ok(OracleKilling {
        data: KillingData {
            norm_sq: g[(PHI, PHI)],
            ric_xx: rep.ricci[(PHI, PHI)],
            grad_norm_sq,
            acc_norm_sq,
        },
        x_dot_acc,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KillingEstimateReport {
    pub samples: usize,
    /// `min (|X|²|∇X|² − 2|∇_X X|²)` over the samples.
    pub min_margin: f64,
    pub max_abs_margin: f64,
    /// All margins vanish to the tolerance: the estimate is an equality.
    pub saturated: bool,
    pub pass: bool,
}

pub const KILLING_ESTIMATE_TOL: f64 = 1e-10;

pub fn killing_estimate_check(
    model: &dyn InvariantModel,
    points: &[Vec<f64>],
) -> Result<KillingEstimateReport, KillingError> {
    let margins = points
        .iter()
        .map(|x| Ok(model.killing_data(x)?.estimate_margin()))
        .collect::<Result<Vec<_>, KillingError>>()?;
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let max_abs_margin = margins.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok(KillingEstimateReport {
        samples: points.len(),
        min_margin,
        max_abs_margin,
        saturated: max_abs_margin <= KILLING_ESTIMATE_TOL,
        pass: min_margin >= -KILLING_ESTIMATE_TOL,
    })
}

/// Scalar curvature of `e^{2f} g` from data of `g`:
/// `e^{−2f}(scal + 2(n−1)Δf − (n−2)(n−1)|df|²)`.
pub fn conformal_scal(
    metric: &ChartMetric,
    f: &ScalarField,
    x: &[f64],
    method: Method,
) -> Result<f64, ChartError> {
    let n = metric.dim() as f64;
    let s = chart::scal(metric, x, method)?;
    let d = chart::field_derivs(metric, f, x, method)?;
    Ok((-2.0 * d.value).exp()
        * (s + 2.0 * (n - 1.0) * d.laplacian - (n - 2.0) * (n - 1.0) * d.grad_norm_sq))
}

/// The metric `e^{2f} g` itself, for checking [`conformal_scal`].
pub fn conformal_chart(metric: &ChartMetric, f: &ScalarField) -> ChartMetric {
    let values = metric.value_fn();
    let fv = f.value_fn();
    let vf = Arc::new(move |x: &[f64]| {
        let w = (2.0 * fv(x)).exp();
        values(x).into_iter().map(|g| w * g).collect()
    });
    let jf = match (metric.jet_fn(), f.jet_fn()) {
        (Some(gj), Some(fj)) => Some(Arc::new(move |x: &[Jet4]| {
            let w = (fj(x) * 2.0).exp();
            gj(x).into_iter().map(|g| w * g).collect()
        })
            as Arc<dyn Fn(&[Jet4]) -> Vec<Jet4> + Send + Sync>),
        _ => None,
    };
    ChartMetric::from_parts(metric.coords().to_vec(), vf, jf)
        .expect("same dimension")
        .with_step(metric.step())
}

/// `f = ln 2 − ln(1 + x² + y²)`: `e^{2f}(dx² + dy²)` is the unit sphere in
/// stereographic coordinates.
pub fn stereographic_factor() -> ScalarField {
    struct Stereo;
    impl ScalarFormula for Stereo {
        fn eval<T: Real>(&self, x: &[T]) -> T {
            T::from_f64(2f64.ln()) - (x[0] * x[0] + x[1] * x[1] + 1.0).ln()
        }
    }
    ScalarField::from_formula(Stereo)
}

/// A submanifold `W` given by its squared distance function on a tubular
/// neighbourhood.
#[derive(Clone)]
pub struct Submanifold {
    pub name: String,
    pub dim: usize,
    pub dist_sq: ScalarField,
    tube: Arc<dyn Fn(&[f64]) -> bool + Send + Sync>,
}

impl std::fmt::Debug for Submanifold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Submanifold")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish()
    }
}

impl Submanifold {
    pub fn new(
        name: &str,
        dim: usize,
        dist_sq: ScalarField,
        tube: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.to_string(),
            dim,
            dist_sq,
            tube: Arc::new(tube),
        }
    }

    /// A point of flat space in Cartesian coordinates.
    pub fn flat_point(center: Vec<f64>) -> Self {
        struct DistSq(Vec<f64>);
        impl ScalarFormula for DistSq {
            fn eval<T: Real>(&self, x: &[T]) -> T {
                x.iter()
                    .zip(&self.0)
                    .fold(T::from_f64(0.0), |acc, (&xi, &ci)| {
                        let d = xi - ci;
                        acc + d * d
                    })
            }
        }
        Self::new(
            "point",
            0,
            ScalarField::from_formula(DistSq(center)),
            |_| true,
        )
    }

    /// The equator `{r = π/2}` of the unit sphere in the chart `(r, φ)`.
    pub fn sphere_equator() -> Self {
        struct DistSq;
        impl ScalarFormula for DistSq {
            fn eval<T: Real>(&self, x: &[T]) -> T {
                let d = x[0] - FRAC_PI_2;
                d * d
            }
        }
        Self::new("equator", 1, ScalarField::from_formula(DistSq), |x| {
            (x[0] - FRAC_PI_2).abs() < FRAC_PI_2
        })
    }

    pub fn in_tube(&self, x: &[f64]) -> bool {
        (self.tube)(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BumpResult {
    pub psi: f64,
    pub lap_psi: f64,
    pub scal_new: f64,
}

/// `ψ = −Λ χ δ r²_W` and the scalar curvature of `e^{2ψ} g`.
pub fn bump_field(w: &Submanifold, lambda: f64, chi: &ScalarField, delta: f64) -> ScalarField {
    let c = -lambda * delta;
    let (cv, dv) = (chi.value_fn(), w.dist_sq.value_fn());
    let vf = Arc::new(move |x: &[f64]| c * cv(x) * dv(x));
    let jf = match (chi.jet_fn(), w.dist_sq.jet_fn()) {
        (Some(cj), Some(dj)) => Some(Arc::new(move |x: &[Jet4]| cj(x) * dj(x) * c)
            as Arc<dyn Fn(&[Jet4]) -> Jet4 + Send + Sync>),
        _ => None,
    };
    ScalarField::from_parts(vf, jf)
}

pub fn conformal_bump(
    metric: &ChartMetric,
    w: &Submanifold,
    lambda: f64,
    chi: &ScalarField,
    delta: f64,
    x: &[f64],
    method: Method,
) -> Result<BumpResult, ChartError> {
    if !w.in_tube(x) {
        return Err(ChartError::DistanceFieldUnavailable { x: x.to_vec() });
    }
    let psi = bump_field(w, lambda, chi, delta);
    let d = chart::field_derivs(metric, &psi, x, method)?;
    let scal_new = conformal_scal(metric, &psi, x, method)?;
    Ok(BumpResult {
        psi: d.value,
        lap_psi: d.laplacian,
        scal_new,
    })
}

/// Deterministic family of `(α, β)` pairs: polynomials of degree at most 4
/// with coefficients in `[−1, 1]` plus `c/(t + ε)` with `ε ∈ {1/2, 1, 2}`.
pub fn random_family(seed: u64, count: usize) -> Vec<DeformationParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        let deg = rng.gen_range(0..=4usize);
        let coeffs: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let c = rng.gen_range(-1.0..=1.0);
        let eps = [0.5, 1.0, 2.0][rng.gen_range(0..3usize)];
        Expr::polynomial(&coeffs) + Expr::shifted_reciprocal(c, eps)
    };
    (0..count)
        .map(|_| {
            let a = draw(&mut rng);
            let b = draw(&mut rng);
            DeformationParams::general(a, b)
        })
        .collect()
}

/// Worst-case comparison of closed form and `λ`-differences over a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariationSweep {
    pub evaluations: usize,
    pub max_rel_err: f64,
    pub worst: Option<VariationResult>,
}

/// [`scal_variation`] over all `params × points`, in parallel with a
/// reduction in index order.
pub fn variation_sweep(
    model: &dyn InvariantModel,
    params: &[DeformationParams],
    points: &[Vec<f64>],
    method: Method,
) -> Result<VariationSweep, KillingError> {
    let jobs: Vec<(usize, usize)> = (0..params.len())
        .flat_map(|i| (0..points.len()).map(move |j| (i, j)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(i, j)| scal_variation(model, &params[i], &points[j], method))
        .collect::<Result<Vec<_>, _>>()?;
    let mut worst: Option<VariationResult> = None;
    for r in results.iter() {
        if worst.as_ref().map_or(true, |w| r.rel_err > w.rel_err) {
            worst = Some(r.clone());
        }
    }
    Ok(VariationSweep {
        evaluations: results.len(),
        max_rel_err: worst.as_ref().map_or(0.0, |w| w.rel_err),
        worst,
    })
}
