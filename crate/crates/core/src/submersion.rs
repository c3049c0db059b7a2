//! Riemannian submersions with totally geodesic fibers and their canonical
//! variation `g_τ = τ g_V + g_H`.
//!
//! General submersions are represented by their scalar invariants only. Two
//! families of explicit charts back the formulas: the Berger spheres (circle
//! fibers over `S²(1/2)`) and connection metrics on flat-base disk bundles
//! whose fiber is a rotationally symmetric disk, used for boundary mean
//! curvature with a vertical normal.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chart::{self, coordinate_mean_curvature, ChartError, ChartMetric, Coord, Method, Side};
use crate::expr::Expr;
use crate::jet::{Jet4, Real};
use crate::models::{
    CapParams, DoublyWarpedMetric, InvariantModel, ModelError, ProfileMetric, PHI,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubmersionError {
    #[error("canonical variation parameter must be positive, got {0}")]
    NonPositiveTau(f64),
    #[error("invalid submersion model: {0}")]
    Invalid(String),
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn check_tau(tau: f64) -> Result<(), SubmersionError> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(SubmersionError::NonPositiveTau(tau))
    }
}

/// Scalar invariants of a submersion with totally geodesic fibers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubmersionModel {
    pub name: String,
    pub base_scal: f64,
    pub fiber_scal: f64,
    /// `|A|²` at `τ = 1`.
    pub a_norm_sq: f64,
    pub base_dim: usize,
    pub fiber_dim: usize,
}

impl SubmersionModel {
    pub fn new(
        name: &str,
        base_scal: f64,
        fiber_scal: f64,
        a_norm_sq: f64,
        base_dim: usize,
        fiber_dim: usize,
    ) -> Result<Self, SubmersionError> {
        if !(a_norm_sq >= 0.0) {
            return Err(SubmersionError::Invalid(format!("|A|² = {a_norm_sq} < 0")));
        }
        if base_dim < 1 || fiber_dim < 1 {
            return Err(SubmersionError::Invalid(
                "base and fiber need positive dimension".into(),
            ));
        }
        Ok(Self {
            name: name.to_string(),
            base_scal,
            fiber_scal,
            a_norm_sq,
            base_dim,
            fiber_dim,
        })
    }

    /// Hopf fibration `S³ → S²(1/2)`.
    pub fn berger() -> Self {
        let b = crate::models::berger_model(1.0).expect("τ = 1");
        Self::new("berger", b.base_scal, b.fiber_scal, b.a_norm_sq_at_1, 2, 1).expect("valid")
    }

    /// Product of a base of constant scalar curvature with a cap.
    pub fn cap_product(base_scal: f64, base_dim: usize, cap: &CapParams) -> Self {
        Self::new("cap_product", base_scal, cap.scal(), 0.0, base_dim, 2).expect("valid")
    }
}

/// `scal_base + scal_fiber/τ − τ|A|²`.
pub fn oneill_scal(model: &SubmersionModel, tau: f64) -> Result<f64, SubmersionError> {
    check_tau(tau)?;
    Ok(model.base_scal + model.fiber_scal / tau - tau * model.a_norm_sq)
}

/// `|A^τ|²_{g_τ} = τ |A|²_g`.
pub fn a_norm_variation(a_norm_sq_at_1: f64, tau: f64) -> f64 {
    tau * a_norm_sq_at_1
}

/// Whether `τ ↦ scal(g_τ)` is at least `scal(g_1)` on every `τ ∈ (0, 1]`
/// of the grid.
pub fn oneill_monotone(model: &SubmersionModel, taus: &[f64]) -> Result<bool, SubmersionError> {
    let s1 = oneill_scal(model, 1.0)?;
    let mut ok = true;
    for &t in taus {
        if t <= 1.0 {
            ok &= oneill_scal(model, t)? >= s1;
        }
    }
    Ok(ok)
}

fn canonical<T: Real>(g: &[T], n: usize, v: &[f64], tau: f64) -> Vec<T> {
    // ω = g(V, ·), |V|² = g(V, V)
    let omega: Vec<T> = (0..n)
        .map(|i| (0..n).fold(T::from_f64(0.0), |acc, j| acc + g[i * n + j] * v[j]))
        .collect();
    let norm = (0..n).fold(T::from_f64(0.0), |acc, i| acc + omega[i] * v[i]);
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(g[i * n + j] + omega[i] * omega[j] / norm * (tau - 1.0));
        }
    }
    out
}

/// Canonical variation for a one-dimensional vertical distribution spanned
/// by the constant coordinate vector `vertical`:
/// `g_τ = g + (τ − 1) ω⊗ω / |V|²` with `ω = g(V, ·)`.
pub fn canonical_variation_chart(
    chart: &ChartMetric,
    vertical: &[f64],
    tau: f64,
) -> Result<ChartMetric, SubmersionError> {
    check_tau(tau)?;
    let n = chart.dim();
    if vertical.len() != n {
        return Err(SubmersionError::Invalid(
            "vertical vector has the wrong dimension".into(),
        ));
    }
    let v = vertical.to_vec();
    let values = chart.value_fn();
    let v1 = v.clone();
    let vf = Arc::new(move |x: &[f64]| canonical(&values(x), n, &v1, tau));
    let jf = chart.jet_fn().map(|jets| {
        Arc::new(move |x: &[Jet4]| canonical(&jets(x), n, &v, tau))
            as Arc<dyn Fn(&[Jet4]) -> Vec<Jet4> + Send + Sync>
    });
    Ok(ChartMetric::from_parts(chart.coords().to_vec(), vf, jf)?.with_step(chart.step()))
}

/// Disk bundle over the flat plane with connection of curvature `c`, fiber
/// a disk profile scaled by `τ`, in coordinates `(x, y, r, φ)`:
/// `dx² + dy² + τ(dr² + f(r)²(dφ + (c/2)(x dy − y dx))²)`.
///
/// The structure group rotates the fibers isometrically, so the fibers are
/// totally geodesic and `|A|² = τ c² f²/2`.
pub fn disk_bundle_chart(
    fiber: &ProfileMetric,
    c: f64,
    tau: f64,
    base_half_width: f64,
) -> Result<ChartMetric, SubmersionError> {
    check_tau(tau)?;
    struct Bundle {
        f: Expr,
        c: f64,
        tau: f64,
    }
    impl crate::chart::ComponentFormula for Bundle {
        fn components<T: Real>(&self, p: &[T]) -> Vec<T> {
            let (x, y, r) = (p[0], p[1], p[2]);
            let f = self.f.eval(r);
            let w = f * f * self.tau;
            let z = T::from_f64(0.0);
            // θ = dφ + θ_x dx + θ_y dy
            let tx = y * (-0.5 * self.c);
            let ty = x * (0.5 * self.c);
            vec![
                w * tx * tx + 1.0,
                w * tx * ty,
                z,
                w * tx,
                w * tx * ty,
                w * ty * ty + 1.0,
                z,
                w * ty,
                z,
                z,
                T::from_f64(self.tau),
                z,
                w * tx,
                w * ty,
                z,
                w,
            ]
        }
    }
    let coords = vec![
        Coord::new("x", -base_half_width, base_half_width),
        Coord::new("y", -base_half_width, base_half_width),
        Coord::new("r", 0.0, fiber.length),
        Coord::angle("phi"),
    ];
    Ok(ChartMetric::from_formula(
        coords,
        Bundle {
            f: fiber.f.clone(),
            c,
            tau,
        },
    )?)
}

/// Closed-form scalar curvature of [`disk_bundle_chart`] at fiber radius `r`.
pub fn disk_bundle_scal(
    fiber: &ProfileMetric,
    c: f64,
    tau: f64,
    r: f64,
) -> Result<f64, SubmersionError> {
    check_tau(tau)?;
    let f = fiber.f.value(r);
    Ok(fiber.scal_at(r)? / tau - tau * c * c * f * f / 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalKind {
    VerticalNormal,
    HorizontalNormal,
}

/// Boundary mean-curvature comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryCheck {
    pub model_id: String,
    pub which: NormalKind,
    /// Parameter of each evaluation (`τ` or `s`).
    pub params: Vec<f64>,
    /// Mean curvature of the total-space boundary from the chart engine.
    pub h_total: Vec<f64>,
    /// Reference value for each parameter.
    pub h_reference: Vec<f64>,
    pub max_dev: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Boundary `{r = ρ}` of a disk bundle: the normal is vertical and the
/// total-space mean curvature should equal that of the fiber's boundary
/// circle, `f'(ρ)/(f(ρ)√τ)`, at every base point.
pub fn mean_curvature_vertical_normal(
    fiber: &ProfileMetric,
    c: f64,
    taus: &[f64],
    base_points: &[[f64; 2]],
    tol: f64,
) -> Result<BoundaryCheck, SubmersionError> {
    let rho = fiber.length;
    let mut params = Vec::new();
    let mut h_total = Vec::new();
    let mut h_reference = Vec::new();
    for &tau in taus {
        let bundle = disk_bundle_chart(fiber, c, tau, 2.0)?;
        let fiber_h = fiber_boundary_h(fiber, tau)?;
        for p in base_points {
            let h = coordinate_mean_curvature(
                &bundle,
                &[p[0], p[1], rho, 0.3],
                2,
                Side::Upper,
                Method::Analytic,
            )?;
            params.push(tau);
            h_total.push(h);
            h_reference.push(fiber_h);
        }
    }
    Ok(finish_check(
        "disk_bundle".into(),
        NormalKind::VerticalNormal,
        params,
        h_total,
        h_reference,
        tol,
    ))
}

/// Mean curvature of the fiber boundary circle in the fiber scaled by `τ`,
/// from the two-dimensional chart engine.
pub fn fiber_boundary_h(fiber: &ProfileMetric, tau: f64) -> Result<f64, SubmersionError> {
    check_tau(tau)?;
    let scaled = {
        let values = fiber.chart().value_fn();
        let jets = fiber.chart().jet_fn();
        let vf = Arc::new(move |x: &[f64]| values(x).into_iter().map(|v| v * tau).collect());
        let jf = jets.map(|j| {
            Arc::new(move |x: &[Jet4]| j(x).into_iter().map(|v| v * tau).collect())
                as Arc<dyn Fn(&[Jet4]) -> Vec<Jet4> + Send + Sync>
        });
        ChartMetric::from_parts(fiber.chart().coords().to_vec(), vf, jf)?
    };
    Ok(coordinate_mean_curvature(
        &scaled,
        &[fiber.length, 0.0],
        0,
        Side::Upper,
        Method::Analytic,
    )?)
}

fn finish_check(
    model_id: String,
    which: NormalKind,
    params: Vec<f64>,
    h_total: Vec<f64>,
    h_reference: Vec<f64>,
    tol: f64,
) -> BoundaryCheck {
    let max_dev = h_total
        .iter()
        .zip(&h_reference)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    BoundaryCheck {
        model_id,
        which,
        params,
        pass: max_dev <= tol && max_dev.is_finite(),
        h_total,
        h_reference,
        max_dev,
        tol,
    }
}

/// A collar with closed circle fibers whose boundary normal is horizontal.
#[derive(Clone, Debug, PartialEq)]
pub enum CollarModel {
    Profile {
        id: String,
        model: ProfileMetric,
        boundary: f64,
        side: Side,
    },
    Warped {
        id: String,
        model: DoublyWarpedMetric,
        boundary: f64,
        side: Side,
    },
}

impl CollarModel {
    pub fn id(&self) -> &str {
        match self {
            CollarModel::Profile { id, .. } | CollarModel::Warped { id, .. } => id,
        }
    }

    fn chart_and_point(&self) -> (ChartMetric, Vec<f64>, Side) {
        match self {
            CollarModel::Profile {
                model,
                boundary,
                side,
                ..
            } => (model.chart(), vec![*boundary, 0.2], *side),
            CollarModel::Warped {
                model,
                boundary,
                side,
                ..
            } => {
                let mut x = model.interior_points(1, 0.0)[0].clone();
                x[0] = *boundary;
                (model.chart(), x, *side)
            }
        }
    }

    /// Closed-form mean curvature with respect to the exterior normal.
    pub fn expected_h(&self) -> Result<f64, SubmersionError> {
        let (h, side) = match self {
            CollarModel::Profile {
                model,
                boundary,
                side,
                ..
            } => (model.orbit_mean_curvature(*boundary), *side),
            CollarModel::Warped {
                model,
                boundary,
                side,
                ..
            } => (model.slice_mean_curvature(*boundary)?, *side),
        };
        Ok(match side {
            Side::Upper => h,
            Side::Lower => -h,
        })
    }
}

/// The canonical variation along the circle fibers does not change the
/// boundary mean curvature when the normal is horizontal.
pub fn mean_curvature_horizontal_normal(
    collar: &CollarModel,
    taus: &[f64],
    tol: f64,
) -> Result<BoundaryCheck, SubmersionError> {
    let (chart, x, side) = collar.chart_and_point();
    let mut v = vec![0.0; chart.dim()];
    v[PHI] = 1.0;
    let expected = collar.expected_h()?;
    let mut h_total = Vec::new();
    for &tau in taus {
        let c = canonical_variation_chart(&chart, &v, tau)?;
        h_total.push(coordinate_mean_curvature(
            &c,
            &x,
            0,
            side,
            Method::Analytic,
        )?);
    }
    Ok(finish_check(
        collar.id().to_string(),
        NormalKind::HorizontalNormal,
        taus.to_vec(),
        h_total,
        vec![expected; taus.len()],
        tol,
    ))
}

/// Cap fiber under the canonical variation with `τ = exp(−s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CapBundleQuantities {
    pub cap: CapParams,
    pub s: f64,
    pub tau: f64,
    /// `(2/σ²) e^s`.
    pub scal_fiber: f64,
    /// `e^{s/2} cot(ρ/σ)/σ`.
    pub h_boundary: f64,
}

pub fn cap_quantities(cap: &CapParams, s: f64) -> CapBundleQuantities {
    CapBundleQuantities {
        cap: *cap,
        s,
        tau: (-s).exp(),
        scal_fiber: cap.scal() * s.exp(),
        h_boundary: (0.5 * s).exp() * cap.boundary_mean_curvature(),
    }
}

/// Threshold beyond which the cap boundary mean curvature is at least
/// `h_target`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CapThreshold {
    pub h_target: f64,
    /// `2 ln(H σ tan(ρ/σ))`, possibly negative.
    pub raw: f64,
    /// Smallest admissible `s ≥ 0`.
    pub s0: f64,
}

pub fn cap_threshold(cap: &CapParams, h_target: f64) -> CapThreshold {
    let raw = 2.0 * (h_target * cap.sigma * (cap.rho / cap.sigma).tan()).ln();
    CapThreshold {
        h_target,
        raw,
        s0: raw.max(0.0),
    }
}

/// Berger scalar curvature from the explicit chart at a few points.
pub fn berger_oracle_scal(tau: f64, method: Method) -> Result<Vec<f64>, SubmersionError> {
    let chart = crate::models::berger_model(tau)?.chart();
    [0.3, 0.7852, 1.2]
        .iter()
        .map(|&eta| Ok(chart::scal(&chart, &[eta, 0.4, 1.9], method)?))
        .collect()
}

/// One row of a submersion report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubmersionRow {
    pub model_id: String,
    pub param: f64,
    pub scal: Option<f64>,
    #[serde(rename = "H")]
    pub h: Option<f64>,
    pub check_name: String,
    pub pass: bool,
}

pub fn write_submersion_csv<W: Write>(out: W, rows: &[SubmersionRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{
        berger_model, cap_metric, doubly_warped, flat_cylinder, flat_disk, round_sphere,
        ProfileKind,
    };
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn oneill_values() {
        let b = SubmersionModel::berger();
        assert_eq!(oneill_scal(&b, 1.0).unwrap(), 6.0);
        assert_eq!(oneill_scal(&b, 0.5).unwrap(), 7.0);
        assert_eq!(oneill_scal(&b, 2.0).unwrap(), 4.0);
        assert!(matches!(
            oneill_scal(&b, 0.0),
            Err(SubmersionError::NonPositiveTau(_))
        ));
        let cap = CapParams::new(0.5, 0.3).unwrap();
        let p = SubmersionModel::cap_product(2.0, 2, &cap);
        let s = 0.7;
        assert!(
            (oneill_scal(&p, (-s).exp()).unwrap() - (2.0 + 2.0 * s.exp() / 0.25)).abs() < 1e-12
        );
        let taus: Vec<f64> = (1..=20).map(|k| k as f64 / 20.0).collect();
        assert!(oneill_monotone(&b, &taus).unwrap() && oneill_monotone(&p, &taus).unwrap());
    }

    #[test]
    fn a_norm_scaling() {
        assert_eq!(a_norm_variation(2.0, 1.0), 2.0);
        assert_eq!(a_norm_variation(2.0, 0.25), 0.5);
        assert_eq!(a_norm_variation(0.0, 3.0), 0.0);
    }

    #[test]
    fn berger_chart_is_the_canonical_variation_of_the_round_sphere() {
        let round = berger_model(1.0).unwrap().chart();
        for tau in [0.25, 0.5, 2.0] {
            let direct = berger_model(tau).unwrap().chart();
            let via = canonical_variation_chart(&round, &[0.0, 1.0, 1.0], tau).unwrap();
            let x = [0.6, 0.1, 0.2];
            let d = (direct.components(&x).unwrap() - via.components(&x).unwrap()).amax();
            assert!(d < 1e-15);
            for s in berger_oracle_scal(tau, Method::Analytic).unwrap() {
                assert!((s - (8.0 - 2.0 * tau)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn disk_bundle_curvature_matches_oneill() {
        let cap = cap_metric(CapParams::new(1.0, 1.0).unwrap()).unwrap();
        for (c, tau) in [(0.0, 1.0), (0.8, 1.0), (0.8, 0.3), (1.5, 2.0)] {
            let chart = disk_bundle_chart(&cap, c, tau, 2.0).unwrap();
            for (x, y, r) in [(0.1, -0.3, 0.4), (0.9, 0.5, 0.8)] {
                let s = chart::scal(&chart, &[x, y, r, 0.0], Method::Analytic).unwrap();
                let want = disk_bundle_scal(&cap, c, tau, r).unwrap();
                assert!((s - want).abs() < 1e-10, "c={c} τ={tau}: {s} vs {want}");
            }
        }
    }

    #[test]
    fn vertical_normal_boundaries() {
        let cap = cap_metric(CapParams::new(1.0, FRAC_PI_4).unwrap()).unwrap();
        let pts = [[0.0, 0.0], [0.5, -0.7], [1.2, 1.1]];
        let rep = mean_curvature_vertical_normal(&cap, 0.9, &[1.0], &pts, 1e-8).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!((rep.h_reference[0] - 1.0).abs() < 1e-12);
        let disk = flat_disk(0.7).unwrap();
        let rep = mean_curvature_vertical_normal(&disk, 0.0, &[1.0], &pts, 1e-8).unwrap();
        assert!(rep.pass && (rep.h_total[0] - 1.0 / 0.7).abs() < 1e-10);
        let s: f64 = 0.8;
        let rep = mean_curvature_vertical_normal(&cap, 0.4, &[(-s).exp()], &pts, 1e-8).unwrap();
        assert!(rep.pass);
        assert!((rep.h_total[0] - (s / 2.0).exp()).abs() < 1e-10);
    }

    #[test]
    fn horizontal_normal_boundaries() {
        let taus = [1.0, 0.5, 0.25];
        let cyl = CollarModel::Profile {
            id: "cylinder".into(),
            model: flat_cylinder(1.0).unwrap(),
            boundary: 1.0,
            side: Side::Upper,
        };
        let rep = mean_curvature_horizontal_normal(&cyl, &taus, 1e-8).unwrap();
        assert!(rep.pass && rep.h_total.iter().all(|h| h.abs() < 1e-14));
        let w = doubly_warped(
            3,
            (0.0, 1.0),
            "2 + t".parse().unwrap(),
            "1".parse().unwrap(),
            0.0,
        )
        .unwrap();
        let warped = CollarModel::Warped {
            id: "warped".into(),
            model: w,
            boundary: 1.0,
            side: Side::Upper,
        };
        let rep = mean_curvature_horizontal_normal(&warped, &taus, 1e-8).unwrap();
        assert!(rep.pass && (rep.h_total[2] - 1.0 / 3.0).abs() < 1e-12);
        // the band r ∈ [π/4, π/2] of the unit sphere: exterior normal points to the pole
        let band = ProfileMetric::new(
            ProfileKind::Sphere,
            std::f64::consts::PI,
            "sin(t)".parse().unwrap(),
        )
        .unwrap();
        let collar = CollarModel::Profile {
            id: "band".into(),
            model: band,
            boundary: FRAC_PI_4,
            side: Side::Lower,
        };
        let rep = mean_curvature_horizontal_normal(&collar, &[1.0, (-1.0f64).exp()], 1e-8).unwrap();
        assert!(rep.pass && (rep.h_total[1] + 1.0).abs() < 1e-12);
        // the equator is totally geodesic
        let eq = CollarModel::Profile {
            id: "equator".into(),
            model: round_sphere(1.0).unwrap(),
            boundary: FRAC_PI_2,
            side: Side::Upper,
        };
        assert!(
            mean_curvature_horizontal_normal(&eq, &taus, 1e-12)
                .unwrap()
                .pass
        );
    }

    #[test]
    fn cap_quantities_and_threshold() {
        let cap = CapParams::new(1.0, FRAC_PI_4).unwrap();
        let q = cap_quantities(&cap, 0.0);
        assert!((q.scal_fiber - 2.0).abs() < 1e-15 && (q.h_boundary - 1.0).abs() < 1e-15);
        let t = cap_threshold(&cap, 2.0);
        assert!((t.s0 - 2.0 * 2f64.ln()).abs() < 1e-12);
        assert!((cap_quantities(&cap, t.s0).h_boundary - 2.0).abs() < 1e-12);
        let t = cap_threshold(&cap, 0.5);
        assert!(t.raw < 0.0 && t.s0 == 0.0);
        let mut prev = cap_quantities(&cap, 0.0);
        for k in 1..50 {
            let q = cap_quantities(&cap, k as f64 * 0.5);
            assert!(q.h_boundary > prev.h_boundary && q.scal_fiber > prev.scal_fiber);
            prev = q;
        }
    }
}
