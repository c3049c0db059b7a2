//! Closed-form S¹-invariant model metrics.
//!
//! Every model carries analytic curvature and Killing quantities for the
//! field `∂_φ` together with a [`ChartMetric`] view whose second coordinate is
//! the angle `φ`, so that the chart engine can be used as an oracle.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chart::{ChartError, ChartMetric, ComponentFormula, Coord};
use crate::expr::Expr;
use crate::jet::{Jet1, Real};

/// Index of the S¹ angle in every model chart.
pub const PHI: usize = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("invalid cap: sigma = {sigma}, rho = {rho} (need 0 < rho < sigma*pi/2)")]
    InvalidCap { sigma: f64, rho: f64 },
    #[error("warping function {which} vanishes or is negative at t = {t}")]
    DegenerateWarping { which: &'static str, t: f64 },
    #[error("canonical variation parameter must be positive, got {0}")]
    NonPositiveTau(f64),
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("profile is not smooth at the pole r = {r}: f = {f}, f' = {df}")]
    BadPole { r: f64, f: f64, df: f64 },
    #[error("invalid interval [{0}, {1}]")]
    InvalidInterval(f64, f64),
    #[error("point {0} lies outside the model")]
    OutOfRange(f64),
    #[error(transparent)]
    Chart(#[from] ChartError),
}

/// `(|X|², ric(X,X), |∇X|², |∇_X X|²)` for the Killing field `X = ∂_φ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KillingData {
    pub norm_sq: f64,
    pub ric_xx: f64,
    pub grad_norm_sq: f64,
    pub acc_norm_sq: f64,
}

impl KillingData {
    /// `|X|²|∇X|² − 2|∇_X X|²`, non-negative for every Killing field.
    pub fn estimate_margin(&self) -> f64 {
        self.norm_sq * self.grad_norm_sq - 2.0 * self.acc_norm_sq
    }
}

/// A model metric with closed-form Killing data for `∂_φ`.
pub trait InvariantModel: Send + Sync {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    /// Chart view with analytic derivatives; coordinate [`PHI`] is the angle.
    fn chart(&self) -> ChartMetric;
    fn scal(&self, x: &[f64]) -> Result<f64, ModelError>;
    fn killing_data(&self, x: &[f64]) -> Result<KillingData, ModelError>;
    /// `count` interior points, evenly spread along the cohomogeneity
    /// direction and kept `margin` away from its ends.
    fn interior_points(&self, count: usize, margin: f64) -> Vec<Vec<f64>>;
}

fn spread(lo: f64, hi: f64, count: usize) -> impl Iterator<Item = f64> {
    let step = if count > 1 {
        (hi - lo) / (count - 1) as f64
    } else {
        0.0
    };
    (0..count).map(move |k| {
        if count > 1 {
            lo + step * k as f64
        } else {
            0.5 * (lo + hi)
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// Both ends are fixed points of the circle action.
    Sphere,
    /// The lower end is a fixed point; the upper end is a boundary circle.
    Disk,
    /// Neither end is a fixed point.
    Annulus,
}

/// `dr² + f(r)² dφ²` on `r ∈ [0, L]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileMetric {
    pub kind: ProfileKind,
    pub length: f64,
    pub f: Expr,
    /// Slope `|f'|` at the poles; 1 for smooth poles, below 1 for cones.
    pub cone_factor: f64,
}

/// Half-width of the Taylor-fit window used for curvature at poles.
pub const POLE_FIT_STEP: f64 = 1e-3;

impl ProfileMetric {
    pub fn new(kind: ProfileKind, length: f64, f: Expr) -> Result<Self, ModelError> {
        Self::with_cone(kind, length, f, 1.0)
    }

    /// Like [`ProfileMetric::new`] but allows a cone point of the given
    /// angle factor `|f'| ∈ (0, 1]` at the poles.
    pub fn with_cone(
        kind: ProfileKind,
        length: f64,
        f: Expr,
        cone_factor: f64,
    ) -> Result<Self, ModelError> {
        if !(length > 0.0) {
            return Err(ModelError::NonPositiveRadius(length));
        }
        let m = Self {
            kind,
            length,
            f,
            cone_factor,
        };
        for r in m.poles() {
            let j = m.f.jet(r);
            if j.v.abs() > 1e-12 || (j.d1().abs() - cone_factor).abs() > 1e-9 {
                return Err(ModelError::BadPole {
                    r,
                    f: j.v,
                    df: j.d1(),
                });
            }
        }
        for r in spread(0.0, length, 203).skip(1).take(201) {
            if !(m.f.value(r) > 0.0) {
                return Err(ModelError::DegenerateWarping { which: "f", t: r });
            }
        }
        Ok(m)
    }

    pub fn poles(&self) -> Vec<f64> {
        match self.kind {
            ProfileKind::Sphere => vec![0.0, self.length],
            ProfileKind::Disk => vec![0.0],
            ProfileKind::Annulus => vec![],
        }
    }

    pub fn is_pole(&self, r: f64) -> bool {
        self.poles()
            .iter()
            .any(|&p| (r - p).abs() <= 1e-14 * self.length.max(1.0))
    }

    pub fn f_jet(&self, r: f64) -> Jet1 {
        self.f.jet(r)
    }

    fn check(&self, r: f64) -> Result<(), ModelError> {
        if (0.0..=self.length).contains(&r) {
            Ok(())
        } else {
            Err(ModelError::OutOfRange(r))
        }
    }

    /// `scal = −2f''/f`; at a pole the limit is taken from a quadratic
    /// least-squares fit through `r = h, …, 5h` on the interior side.
    pub fn scal_at(&self, r: f64) -> Result<f64, ModelError> {
        self.check(r)?;
        if self.is_pole(r) {
            let dir = if r < 0.5 * self.length { 1.0 } else { -1.0 };
            let h = POLE_FIT_STEP * self.length.min(1.0);
            let pts: Vec<(f64, f64)> = (1..=5)
                .map(|k| {
                    let d = h * k as f64;
                    let j = self.f.jet(r + dir * d);
                    (d, -2.0 * j.d2() / j.v)
                })
                .collect();
            return Ok(quadratic_fit_at_zero(&pts));
        }
        let j = self.f.jet(r);
        Ok(-2.0 * j.d2() / j.v)
    }

    /// Killing data `(f², −ff'', 2f'², f²f'²)`; `ric(X,X) = (scal/2)|X|²`
    /// is written without dividing by `f`, so poles need no special case.
    pub fn killing_at(&self, r: f64) -> Result<KillingData, ModelError> {
        self.check(r)?;
        let j = self.f.jet(r);
        let (f, df, ddf) = (j.v, j.d1(), j.d2());
        Ok(KillingData {
            norm_sq: f * f,
            ric_xx: -f * ddf,
            grad_norm_sq: 2.0 * df * df,
            acc_norm_sq: f * f * df * df,
        })
    }

    /// Length of the orbit through `r`.
    pub fn orbit_length(&self, r: f64) -> f64 {
        2.0 * PI * self.f.value(r)
    }

    /// Mean curvature `f'/f` of the orbit through `r`, as boundary of
    /// `{r' ≤ r}`.
    pub fn orbit_mean_curvature(&self, r: f64) -> f64 {
        let j = self.f.jet(r);
        j.d1() / j.v
    }
}

/// Constant term of the least-squares quadratic through `pts`.
pub fn quadratic_fit_at_zero(pts: &[(f64, f64)]) -> f64 {
    // normal equations for c0 + c1 x + c2 x²
    let mut m = nalgebra::Matrix3::<f64>::zeros();
    let mut v = nalgebra::Vector3::<f64>::zeros();
    for &(x, y) in pts {
        let row = [1.0, x, x * x];
        for i in 0..3 {
            v[i] += row[i] * y;
            for j in 0..3 {
                m[(i, j)] += row[i] * row[j];
            }
        }
    }
    m.lu().solve(&v).map(|c| c[0]).unwrap_or(f64::NAN)
}

struct ProfileFormula(Expr);

impl ComponentFormula for ProfileFormula {
    fn components<T: Real>(&self, x: &[T]) -> Vec<T> {
        let f = self.0.eval(x[0]);
        vec![T::from_f64(1.0), T::from_f64(0.0), T::from_f64(0.0), f * f]
    }
}

impl InvariantModel for ProfileMetric {
    fn name(&self) -> String {
        format!("profile[{}]", self.f)
    }

    fn dim(&self) -> usize {
        2
    }

    fn chart(&self) -> ChartMetric {
        ChartMetric::from_formula(
            vec![Coord::new("r", 0.0, self.length), Coord::angle("phi")],
            ProfileFormula(self.f.clone()),
        )
        .expect("two-dimensional chart")
    }

    fn scal(&self, x: &[f64]) -> Result<f64, ModelError> {
        self.scal_at(x[0])
    }

    fn killing_data(&self, x: &[f64]) -> Result<KillingData, ModelError> {
        self.killing_at(x[0])
    }

    fn interior_points(&self, count: usize, margin: f64) -> Vec<Vec<f64>> {
        spread(margin, self.length - margin, count)
            .enumerate()
            .map(|(k, r)| vec![r, 0.37 * k as f64 % std::f64::consts::TAU])
            .collect()
    }
}

/// Round sphere of the given radius, `f(r) = R sin(r/R)` on `[0, πR]`.
pub fn round_sphere(radius: f64) -> Result<ProfileMetric, ModelError> {
    if !(radius > 0.0) {
        return Err(ModelError::NonPositiveRadius(radius));
    }
    let f = Expr::constant(radius) * Expr::var().scaled_sin(radius);
    ProfileMetric::new(ProfileKind::Sphere, PI * radius, f)
}

/// Flat disk of radius `l`.
pub fn flat_disk(l: f64) -> Result<ProfileMetric, ModelError> {
    ProfileMetric::new(ProfileKind::Disk, l, Expr::var())
}

/// Flat cylinder `[0, l] × S¹` with unit circles.
pub fn flat_cylinder(l: f64) -> Result<ProfileMetric, ModelError> {
    ProfileMetric::new(ProfileKind::Annulus, l, Expr::constant(1.0))
}

/// Spherical cap of radius `ρ` on the sphere of radius `σ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapParams {
    pub sigma: f64,
    pub rho: f64,
}

impl CapParams {
    /// Validated cap; rejects caps that are not mean convex.
    pub fn new(sigma: f64, rho: f64) -> Result<Self, ModelError> {
        let p = Self { sigma, rho };
        if p.is_mean_convex() {
            Ok(p)
        } else {
            Err(ModelError::InvalidCap { sigma, rho })
        }
    }

    /// `0 < ρ < σπ/2`, which makes `cot(ρ/σ) > 0`.
    pub fn is_mean_convex(&self) -> bool {
        self.sigma > 0.0 && self.rho > 0.0 && self.rho / self.sigma < FRAC_PI_2
    }

    pub fn boundary_length(&self) -> f64 {
        2.0 * PI * self.sigma * (self.rho / self.sigma).sin()
    }

    /// `cot(ρ/σ)/σ`.
    pub fn boundary_mean_curvature(&self) -> f64 {
        1.0 / ((self.rho / self.sigma).tan() * self.sigma)
    }

    /// `2/σ²`.
    pub fn scal(&self) -> f64 {
        2.0 / (self.sigma * self.sigma)
    }
}

/// The cap as a disk-type profile, `f(r) = σ sin(r/σ)` on `[0, ρ]`.
pub fn cap_metric(p: CapParams) -> Result<ProfileMetric, ModelError> {
    if !p.is_mean_convex() {
        return Err(ModelError::InvalidCap {
            sigma: p.sigma,
            rho: p.rho,
        });
    }
    cap_metric_unchecked(p)
}

/// Cap without the mean-convexity requirement (`ρ < σπ` still needed).
pub fn cap_metric_unchecked(p: CapParams) -> Result<ProfileMetric, ModelError> {
    if !(p.sigma > 0.0 && p.rho > 0.0 && p.rho < PI * p.sigma) {
        return Err(ModelError::InvalidCap {
            sigma: p.sigma,
            rho: p.rho,
        });
    }
    let f = Expr::constant(p.sigma) * Expr::var().scaled_sin(p.sigma);
    ProfileMetric::new(ProfileKind::Disk, p.rho, f)
}

/// `sin(r/R)` helper.
trait ScaledSin {
    fn scaled_sin(self, radius: f64) -> Expr;
}

impl ScaledSin for Expr {
    fn scaled_sin(self, radius: f64) -> Expr {
        let arg = if radius == 1.0 {
            self
        } else {
            self / Expr::constant(radius)
        };
        Expr::func(crate::expr::Func::Sin, arg)
    }
}

/// Cap metric `dr² + σ² sin²(r/σ) dφ²` written in Cartesian coordinates
/// around its centre, `g = δ + c(x²+y²)·(x dy − y dx)²` with
/// `c(q) = (σ² sin²(√q/σ)/q − 1)/q` expanded as a power series so that the
/// chart is smooth through the origin.
pub fn cap_cartesian_chart(sigma: f64, half_width: f64) -> Result<ChartMetric, ModelError> {
    if !(sigma > 0.0 && half_width > 0.0 && half_width * std::f64::consts::SQRT_2 < PI * sigma) {
        return Err(ModelError::InvalidCap {
            sigma,
            rho: half_width,
        });
    }
    struct CapCartesian {
        sigma: f64,
        coeffs: Vec<f64>,
    }
    impl ComponentFormula for CapCartesian {
        fn components<T: Real>(&self, p: &[T]) -> Vec<T> {
            let (x, y) = (p[0], p[1]);
            let w = (x * x + y * y) / (self.sigma * self.sigma);
            let mut c = T::from_f64(0.0);
            for &a in self.coeffs.iter().rev() {
                c = c * w + a;
            }
            let c = c / (self.sigma * self.sigma);
            let one = T::from_f64(1.0);
            vec![one + c * y * y, -(c * x * y), -(c * x * y), one + c * x * x]
        }
    }
    // sin²u/u² − 1 = Σ_{k≥2} (−1)^{k+1} 2^{2k−1} u^{2k−2}/(2k)!, divided by u².
    let mut coeffs = Vec::new();
    let mut fact = 2.0; // (2k)! for k = 1
    for k in 2..40 {
        fact *= (2 * k - 1) as f64 * (2 * k) as f64;
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        let a = sign * 2f64.powi(2 * k - 1) / fact;
        if a.abs() < 1e-300 {
            break;
        }
        coeffs.push(a);
    }
    let coords = vec![
        Coord::new("x", -half_width, half_width),
        Coord::new("y", -half_width, half_width),
    ];
    Ok(ChartMetric::from_formula(
        coords,
        CapCartesian { sigma, coeffs },
    )?)
}

/// Flat metric `scale·(dx² + dy²)` on a square.
pub fn flat_cartesian_chart(scale: f64, half_width: f64) -> ChartMetric {
    struct Flat(f64);
    impl ComponentFormula for Flat {
        fn components<T: Real>(&self, _: &[T]) -> Vec<T> {
            let z = T::from_f64(0.0);
            let s = T::from_f64(self.0);
            vec![s, z, z, s]
        }
    }
    ChartMetric::from_formula(
        vec![
            Coord::new("x", -half_width, half_width),
            Coord::new("y", -half_width, half_width),
        ],
        Flat(scale),
    )
    .expect("two-dimensional chart")
}

/// `sn_K`: the warping of the constant-curvature-`K` plane in polar form.
pub fn sn_k<T: Real>(k: f64, x: T) -> T {
    if k > 0.0 {
        let s = k.sqrt();
        (x * s).sin() / s
    } else if k < 0.0 {
        let s = (-k).sqrt();
        (x * s).sinh() / s
    } else {
        x
    }
}

/// `dt² + a(t)² dφ² + b(t)² g_F` with `g_F` of constant curvature `K_F` and
/// dimension `n − 2`, for `n ∈ {3, 4}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublyWarpedMetric {
    pub n: usize,
    pub t0: f64,
    pub t1: f64,
    pub a: Expr,
    pub b: Expr,
    pub k_fiber: f64,
}

/// Fiber coordinate used for the `n = 4` chart (polar radius on the fiber).
pub const FIBER_RADIUS_COORD: f64 = 0.8;

pub fn doubly_warped(
    n: usize,
    interval: (f64, f64),
    a: Expr,
    b: Expr,
    k_fiber: f64,
) -> Result<DoublyWarpedMetric, ModelError> {
    if !(n == 3 || n == 4) {
        return Err(ModelError::UnsupportedDimension(n));
    }
    let (t0, t1) = interval;
    if !(t1 > t0) {
        return Err(ModelError::InvalidInterval(t0, t1));
    }
    // Only interior samples are checked so that a warping may close up at an
    // end of the interval (a = cos t on [0, π/2]).
    for t in spread(t0, t1, 203).skip(1).take(201) {
        if !(a.value(t) > 0.0) {
            return Err(ModelError::DegenerateWarping { which: "a", t });
        }
        if !(b.value(t) > 0.0) {
            return Err(ModelError::DegenerateWarping { which: "b", t });
        }
    }
    Ok(DoublyWarpedMetric {
        n,
        t0,
        t1,
        a,
        b,
        k_fiber,
    })
}

impl DoublyWarpedMetric {
    fn k(&self) -> f64 {
        (self.n - 2) as f64
    }

    fn warps(&self, t: f64) -> Result<(Jet1, Jet1), ModelError> {
        if !(self.t0..=self.t1).contains(&t) {
            return Err(ModelError::OutOfRange(t));
        }
        Ok((self.a.jet(t), self.b.jet(t)))
    }

    /// `k(k−1)K_F/b² − 2a''/a − 2k b''/b − k(k−1)(b'/b)² − 2k a'b'/(ab)`.
    pub fn scal_at(&self, t: f64) -> Result<f64, ModelError> {
        let (a, b) = self.warps(t)?;
        let k = self.k();
        let (a0, a1, a2) = (a.v, a.d1(), a.d2());
        let (b0, b1, b2) = (b.v, b.d1(), b.d2());
        Ok(k * (k - 1.0) * self.k_fiber / (b0 * b0)
            - 2.0 * a2 / a0
            - 2.0 * k * b2 / b0
            - k * (k - 1.0) * (b1 / b0).powi(2)
            - 2.0 * k * a1 * b1 / (a0 * b0))
    }

    pub fn killing_at(&self, t: f64) -> Result<KillingData, ModelError> {
        let (a, b) = self.warps(t)?;
        let (a0, a1, a2) = (a.v, a.d1(), a.d2());
        Ok(KillingData {
            norm_sq: a0 * a0,
            ric_xx: -a0 * a2 - self.k() * a0 * a1 * b.d1() / b.v,
            grad_norm_sq: 2.0 * a1 * a1,
            acc_norm_sq: a0 * a0 * a1 * a1,
        })
    }

    /// Mean curvature of the slice `{t = t*}` as boundary of `{t ≤ t*}`:
    /// `a'/a + k b'/b`.
    pub fn slice_mean_curvature(&self, t: f64) -> Result<f64, ModelError> {
        let (a, b) = self.warps(t)?;
        Ok(a.d1() / a.v + self.k() * b.d1() / b.v)
    }
}

struct WarpedFormula {
    n: usize,
    a: Expr,
    b: Expr,
    k_fiber: f64,
}

impl ComponentFormula for WarpedFormula {
    fn components<T: Real>(&self, x: &[T]) -> Vec<T> {
        let n = self.n;
        let a = self.a.eval(x[0]);
        let b = self.b.eval(x[0]);
        let mut g = vec![T::from_f64(0.0); n * n];
        g[0] = T::from_f64(1.0);
        g[n + 1] = a * a;
        g[2 * n + 2] = b * b;
        if n == 4 {
            let s = sn_k(self.k_fiber, x[2]);
            g[3 * n + 3] = b * b * s * s;
        }
        g
    }
}

impl InvariantModel for DoublyWarpedMetric {
    fn name(&self) -> String {
        format!(
            "warped{}[a={}, b={}, K={}]",
            self.n, self.a, self.b, self.k_fiber
        )
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn chart(&self) -> ChartMetric {
        let mut coords = vec![Coord::new("t", self.t0, self.t1), Coord::angle("phi")];
        if self.n == 3 {
            coords.push(Coord::angle("theta"));
        } else {
            let hi = if self.k_fiber > 0.0 {
                PI / self.k_fiber.sqrt()
            } else {
                2.0 * FIBER_RADIUS_COORD
            };
            coords.push(Coord::new("u", 0.0, hi));
            coords.push(Coord::angle("theta"));
        }
        let formula = WarpedFormula {
            n: self.n,
            a: self.a.clone(),
            b: self.b.clone(),
            k_fiber: self.k_fiber,
        };
        ChartMetric::from_formula(coords, formula).expect("chart of dimension 3 or 4")
    }

    fn scal(&self, x: &[f64]) -> Result<f64, ModelError> {
        self.scal_at(x[0])
    }

    fn killing_data(&self, x: &[f64]) -> Result<KillingData, ModelError> {
        self.killing_at(x[0])
    }

    fn interior_points(&self, count: usize, margin: f64) -> Vec<Vec<f64>> {
        spread(self.t0 + margin, self.t1 - margin, count)
            .enumerate()
            .map(|(k, t)| {
                let phi = 0.37 * k as f64 % std::f64::consts::TAU;
                if self.n == 3 {
                    vec![t, phi, 1.1]
                } else {
                    let hi = if self.k_fiber > 0.0 {
                        PI / self.k_fiber.sqrt()
                    } else {
                        2.0 * FIBER_RADIUS_COORD
                    };
                    vec![t, phi, 0.5 * hi, 1.1]
                }
            })
            .collect()
    }
}

/// Circle fibration of the unit three-sphere over `S²(1/2)` with the fibers
/// scaled by `τ` (the Berger spheres).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BergerModel {
    pub tau: f64,
    pub base_scal: f64,
    pub fiber_scal: f64,
    pub a_norm_sq_at_1: f64,
}

/// `|A|²` of the Hopf fibration, frozen from [`BergerModel::calibrate`].
pub const BERGER_A_NORM_SQ: f64 = 2.0;

pub fn berger_model(tau: f64) -> Result<BergerModel, ModelError> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(ModelError::NonPositiveTau(tau));
    }
    Ok(BergerModel {
        tau,
        base_scal: 8.0,
        fiber_scal: 0.0,
        a_norm_sq_at_1: BERGER_A_NORM_SQ,
    })
}

impl BergerModel {
    /// Hopf coordinates `(η, ξ₁, ξ₂)`:
    /// `g_τ = dη² + cos²η dξ₁² + sin²η dξ₂² + (τ−1) w⊗w`, `w = cos²η dξ₁ + sin²η dξ₂`,
    /// where `w` is dual to the unit Hopf field `∂_ξ₁ + ∂_ξ₂`.
    pub fn chart(&self) -> ChartMetric {
        struct Berger(f64);
        impl ComponentFormula for Berger {
            fn components<T: Real>(&self, x: &[T]) -> Vec<T> {
                let c = x[0].cos();
                let s = x[0].sin();
                let (c2, s2) = (c * c, s * s);
                let d = self.0 - 1.0;
                let z = T::from_f64(0.0);
                let m12 = c2 * s2 * d;
                vec![
                    T::from_f64(1.0),
                    z,
                    z,
                    z,
                    c2 + c2 * c2 * d,
                    m12,
                    z,
                    m12,
                    s2 + s2 * s2 * d,
                ]
            }
        }
        ChartMetric::from_formula(
            vec![
                Coord::new("eta", 0.0, FRAC_PI_2),
                Coord::angle("xi1"),
                Coord::angle("xi2"),
            ],
            Berger(self.tau),
        )
        .expect("three-dimensional chart")
    }

    /// `|A|² = scal_base + scal_fiber − scal_total` at `τ = 1`, with the total
    /// scalar curvature taken from the chart engine.
    pub fn calibrate() -> Result<f64, ModelError> {
        let round = berger_model(1.0)?;
        let s = crate::chart::scal(
            &round.chart(),
            &[0.6, 0.0, 0.0],
            crate::chart::Method::Analytic,
        )?;
        Ok(round.base_scal + round.fiber_scal - s)
    }

    pub fn scal(&self) -> f64 {
        self.base_scal + self.fiber_scal / self.tau - self.tau * self.a_norm_sq_at_1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{scal, Method};
    use std::f64::consts::FRAC_PI_4;

    fn e(s: &str) -> Expr {
        s.parse().unwrap()
    }

    #[test]
    fn round_sphere_curvature() {
        let s = round_sphere(1.0).unwrap();
        for r in [0.0, 0.3, 1.0, 2.0, PI] {
            assert!((s.scal_at(r).unwrap() - 2.0).abs() < 1e-9, "r={r}");
        }
        let oracle = scal(&s.chart(), &[1.0, 0.0], Method::FiniteDifference).unwrap();
        assert!((oracle - 2.0).abs() < 1e-8);
        let s2 = round_sphere(2.0).unwrap();
        assert!((s2.scal_at(1.3).unwrap() - 0.5).abs() < 1e-12);
        assert!((s2.scal_at(0.0).unwrap() - 0.5).abs() < 1e-9);
        assert!(matches!(
            round_sphere(0.0),
            Err(ModelError::NonPositiveRadius(_))
        ));
    }

    #[test]
    fn pole_fit_handles_nonconstant_curvature() {
        // f = sin r − r³/20 ⇒ −2f''/f → 2 + 6/20·2 = 2.6 as r → 0
        let m = ProfileMetric::new(ProfileKind::Disk, 1.0, e("sin(t) - t^3/20")).unwrap();
        assert!((m.scal_at(0.0).unwrap() - 2.6).abs() < 1e-6);
    }

    #[test]
    fn cap_values() {
        let p = CapParams::new(1.0, FRAC_PI_4).unwrap();
        assert!((p.boundary_length() - PI * 2f64.sqrt()).abs() < 1e-14);
        assert!((p.boundary_mean_curvature() - 1.0).abs() < 1e-14);
        let m = cap_metric(p).unwrap();
        assert!((m.orbit_length(FRAC_PI_4) - PI * 2f64.sqrt()).abs() < 1e-14);
        assert!((m.orbit_mean_curvature(FRAC_PI_4) - 1.0).abs() < 1e-14);
        assert!(matches!(
            CapParams::new(1.0, 2.0),
            Err(ModelError::InvalidCap { .. })
        ));
        let small = CapParams::new(2.0, 1e-4).unwrap();
        assert!((small.boundary_mean_curvature() * 1e-4 - 1.0).abs() < 1e-8);
        let sphere = round_sphere(1.5).unwrap();
        let cap = cap_metric(CapParams::new(1.5, 1.0).unwrap()).unwrap();
        for r in [0.1, 0.5, 1.0] {
            assert_eq!(sphere.f.value(r), cap.f.value(r));
        }
    }

    #[test]
    fn profile_killing_data() {
        let s = round_sphere(1.0).unwrap();
        let k = s.killing_at(FRAC_PI_2).unwrap();
        assert!((k.norm_sq - 1.0).abs() < 1e-15 && (k.ric_xx - 1.0).abs() < 1e-15);
        assert!(k.grad_norm_sq < 1e-30 && k.acc_norm_sq < 1e-30);
        let k = s.killing_at(FRAC_PI_4).unwrap();
        for (got, want) in [
            (k.norm_sq, 0.5),
            (k.ric_xx, 0.5),
            (k.grad_norm_sq, 1.0),
            (k.acc_norm_sq, 0.25),
        ] {
            assert!((got - want).abs() < 1e-15);
        }
        let p = s.killing_at(0.0).unwrap();
        assert_eq!((p.norm_sq, p.ric_xx, p.acc_norm_sq), (0.0, 0.0, 0.0));
        assert!((p.grad_norm_sq - 2.0).abs() < 1e-15);
        let c = flat_cylinder(1.0).unwrap().killing_at(0.4).unwrap();
        assert_eq!(
            c,
            KillingData {
                norm_sq: 1.0,
                ric_xx: 0.0,
                grad_norm_sq: 0.0,
                acc_norm_sq: 0.0
            }
        );
    }

    #[test]
    fn doubly_warped_round_three_sphere() {
        let m = doubly_warped(3, (0.0, FRAC_PI_2), e("cos(t)"), e("sin(t)"), 1.0).unwrap();
        for t in [0.2, 0.7, 1.3] {
            assert!((m.scal_at(t).unwrap() - 6.0).abs() < 1e-12);
            let o = scal(&m.chart(), &[t, 0.1, 0.2], Method::Analytic).unwrap();
            assert!((o - 6.0).abs() < 1e-10);
            let k = m.killing_at(t).unwrap();
            assert!((k.ric_xx - 2.0 * k.norm_sq).abs() < 1e-12);
        }
        let flat = doubly_warped(3, (0.0, 1.0), e("1"), e("1"), 1.0).unwrap();
        let k = flat.killing_at(0.5).unwrap();
        assert_eq!((k.grad_norm_sq, k.ric_xx), (0.0, 0.0));
        assert!(matches!(
            doubly_warped(3, (0.0, 4.0), e("cos(t)"), e("1"), 0.0),
            Err(ModelError::DegenerateWarping { which: "a", .. })
        ));
    }

    #[test]
    fn doubly_warped_dimension_four_matches_oracle() {
        for kf in [1.0, 0.0, -0.5] {
            let m =
                doubly_warped(4, (0.0, 2.0), e("1.5 + 0.3*sin(t)"), e("1 + 0.2*t^2"), kf).unwrap();
            for x in m.interior_points(5, 0.1) {
                let o = scal(&m.chart(), &x, Method::Analytic).unwrap();
                let c = m.scal_at(x[0]).unwrap();
                assert!(
                    (o - c).abs() <= 1e-10 * c.abs().max(1.0),
                    "K={kf}: {o} vs {c}"
                );
            }
        }
        // round S⁴: a = cos t, b = sin t, fiber the unit 2-sphere
        let s4 = doubly_warped(4, (0.0, FRAC_PI_2), e("cos(t)"), e("sin(t)"), 1.0).unwrap();
        assert!((s4.scal_at(0.9).unwrap() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn berger_calibration_and_values() {
        let a = BergerModel::calibrate().unwrap();
        assert!((a - BERGER_A_NORM_SQ).abs() < 1e-10);
        assert_eq!(berger_model(1.0).unwrap().scal(), 6.0);
        assert_eq!(berger_model(0.5).unwrap().scal(), 7.0);
        assert_eq!(berger_model(2.0).unwrap().scal(), 4.0);
        assert!((berger_model(1e-9).unwrap().scal() - 8.0).abs() < 1e-8);
        assert!(matches!(
            berger_model(0.0),
            Err(ModelError::NonPositiveTau(_))
        ));
    }

    #[test]
    fn cartesian_cap_is_the_cap() {
        let c = cap_cartesian_chart(1.0, 1.0).unwrap();
        let g = c.components(&[0.3, -0.4]).unwrap();
        // radial unit vector has length 1, angular vector (-y, x) has length sin r
        let r: f64 = 0.5;
        let (x, y) = (0.3, -0.4);
        let rad = (x * x * g[(0, 0)] + 2.0 * x * y * g[(0, 1)] + y * y * g[(1, 1)]) / (r * r);
        let ang = y * y * g[(0, 0)] - 2.0 * x * y * g[(0, 1)] + x * x * g[(1, 1)];
        assert!((rad - 1.0).abs() < 1e-14);
        assert!((ang - r.sin().powi(2)).abs() < 1e-14);
        let s = scal(&c, &[0.2, 0.1], Method::Analytic).unwrap();
        assert!((s - 2.0).abs() < 1e-10);
        let s0 = scal(&c, &[0.0, 0.0], Method::Analytic).unwrap();
        assert!((s0 - 2.0).abs() < 1e-12);
    }
}
