//! Tensor calculus on a single coordinate patch.
//!
//! A [`ChartMetric`] is a field of symmetric positive-definite matrices on a
//! rectangular coordinate box. Christoffel symbols, Ricci and scalar
//! curvature, Laplacians and boundary mean curvatures are computed from the
//! metric components and their first and second partials, which come either
//! from jets (analytic mode) or from fourth-order central finite differences.
//! The engine knows nothing about Killing fields or submersions; it is the
//! independent oracle the closed-form modules are checked against.
//!
//! Sign conventions: [`laplacian`] is the non-negative geometer's Laplacian
//! `Δu = -div grad u`, so `Δ(x² + y²) = -4` in the flat plane. Mean curvature
//! is taken with respect to the exterior normal, so the unit circle bounding
//! the unit disk has `H = 1`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jet::{Jet4, Real, MAX_DIM};

/// Relative pivot threshold below which a metric is reported singular.
pub const PIVOT_RATIO_MIN: f64 = 1e-10;

/// Lower bound on the finite-difference step.
pub const MIN_STEP: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChartError {
    #[error("metric is singular at {x:?} (pivot ratio {ratio:e})")]
    SingularMetric { x: Vec<f64>, ratio: f64 },
    #[error("point {x:?} lies outside the chart")]
    OutOfChart { x: Vec<f64> },
    #[error("finite-difference stencil of width {width:e} around {x:?} leaves the chart")]
    StencilUnderflow { x: Vec<f64>, width: f64 },
    #[error("charts differ: {0}")]
    ChartMismatch(String),
    #[error("metric has no analytic derivatives")]
    NoAnalyticDerivatives,
    #[error("scalar field has no analytic derivatives")]
    NoAnalyticField,
    #[error("expected a point of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported chart dimension {0} (2..={MAX_DIM})")]
    UnsupportedDimension(usize),
    #[error("no distance field available at {x:?}")]
    DistanceFieldUnavailable { x: Vec<f64> },
}

/// How derivatives of the metric are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Analytic,
    FiniteDifference,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Analytic => "analytic",
            Method::FiniteDifference => "finite-difference",
        })
    }
}

/// One coordinate of a chart with its range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coord {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    /// Periodic coordinates (angles) are never bounds-checked.
    pub periodic: bool,
}

impl Coord {
    pub fn new(name: &str, lo: f64, hi: f64) -> Self {
        Self {
            name: name.to_string(),
            lo,
            hi,
            periodic: false,
        }
    }

    pub fn angle(name: &str) -> Self {
        Self {
            name: name.to_string(),
            lo: 0.0,
            hi: std::f64::consts::TAU,
            periodic: true,
        }
    }
}

/// Metric components written once, generically, so that one formula serves
/// both value evaluation and jet evaluation.
pub trait ComponentFormula: Send + Sync + 'static {
    /// Row-major `n × n` components at `x`.
    fn components<T: Real>(&self, x: &[T]) -> Vec<T>;
}

/// Scalar function written generically over [`Real`].
pub trait ScalarFormula: Send + Sync + 'static {
    fn eval<T: Real>(&self, x: &[T]) -> T;
}

type ValueFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type JetFn = dyn Fn(&[Jet4]) -> Vec<Jet4> + Send + Sync;

#[derive(Clone)]
pub struct ChartMetric {
    coords: Vec<Coord>,
    values: Arc<ValueFn>,
    jets: Option<Arc<JetFn>>,
    step: f64,
}

impl fmt::Debug for ChartMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartMetric")
            .field("coords", &self.coords)
            .field("analytic", &self.jets.is_some())
            .field("step", &self.step)
            .finish()
    }
}

/// Default finite-difference step: `max(1e-4, cbrt(eps) * extent)`.
fn default_step(coords: &[Coord]) -> f64 {
    let scale = coords
        .iter()
        .filter(|c| !c.periodic && (c.hi - c.lo).is_finite())
        .map(|c| c.hi - c.lo)
        .fold(1.0_f64, f64::max);
    MIN_STEP.max(f64::EPSILON.cbrt() * scale)
}

/// Coordinate jets `x_i` at the point `x`.
pub fn coordinate_jets(x: &[f64]) -> Vec<Jet4> {
    x.iter()
        .enumerate()
        .map(|(i, &xi)| Jet4::variable(xi, i))
        .collect()
}

impl ChartMetric {
    /// Metric given by component values only; curvature uses finite differences.
    pub fn from_values(
        coords: Vec<Coord>,
        values: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Result<Self, ChartError> {
        check_dim(coords.len())?;
        let step = default_step(&coords);
        Ok(Self {
            coords,
            values: Arc::new(values),
            jets: None,
            step,
        })
    }

    /// Metric with analytic first and second partials via jets.
    pub fn from_formula(
        coords: Vec<Coord>,
        formula: impl ComponentFormula,
    ) -> Result<Self, ChartError> {
        check_dim(coords.len())?;
        let formula = Arc::new(formula);
        let f2 = Arc::clone(&formula);
        let step = default_step(&coords);
        Ok(Self {
            coords,
            values: Arc::new(move |x| formula.components::<f64>(x)),
            jets: Some(Arc::new(move |x| f2.components::<Jet4>(x))),
            step,
        })
    }

    /// Builds a metric from raw closures. `jets` receives coordinate jets
    /// (see [`coordinate_jets`]) and must agree with `values`.
    pub fn from_parts(
        coords: Vec<Coord>,
        values: Arc<ValueFn>,
        jets: Option<Arc<JetFn>>,
    ) -> Result<Self, ChartError> {
        check_dim(coords.len())?;
        let step = default_step(&coords);
        Ok(Self {
            coords,
            values,
            jets,
            step,
        })
    }

    pub fn with_step(mut self, h: f64) -> Self {
        self.step = h;
        self
    }

    /// Drops analytic derivatives, forcing finite differences.
    pub fn without_jets(mut self) -> Self {
        self.jets = None;
        self
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn has_jets(&self) -> bool {
        self.jets.is_some()
    }

    pub fn preferred_method(&self) -> Method {
        if self.has_jets() {
            Method::Analytic
        } else {
            Method::FiniteDifference
        }
    }

    pub fn value_fn(&self) -> Arc<ValueFn> {
        Arc::clone(&self.values)
    }

    pub fn jet_fn(&self) -> Option<Arc<JetFn>> {
        self.jets.clone()
    }

    pub fn components(&self, x: &[f64]) -> Result<DMatrix<f64>, ChartError> {
        self.check_point(x)?;
        let n = self.dim();
        Ok(DMatrix::from_row_slice(n, n, &(self.values)(x)))
    }

    pub fn component_jets(&self, x: &[f64]) -> Result<Vec<Jet4>, ChartError> {
        self.check_point(x)?;
        let jets = self
            .jets
            .as_ref()
            .ok_or(ChartError::NoAnalyticDerivatives)?;
        Ok(jets(&coordinate_jets(x)))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && self
                .coords
                .iter()
                .zip(x)
                .all(|(c, &xi)| c.periodic || (xi >= c.lo && xi <= c.hi))
    }

    fn check_point(&self, x: &[f64]) -> Result<(), ChartError> {
        if x.len() != self.dim() {
            return Err(ChartError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if !self.contains(x) {
            return Err(ChartError::OutOfChart { x: x.to_vec() });
        }
        Ok(())
    }

    fn check_stencil(&self, x: &[f64]) -> Result<(), ChartError> {
        self.check_point(x)?;
        let w = 2.0 * self.step;
        let fits = self
            .coords
            .iter()
            .zip(x)
            .all(|(c, &xi)| c.periodic || (xi - w >= c.lo && xi + w <= c.hi));
        if fits {
            Ok(())
        } else {
            Err(ChartError::StencilUnderflow {
                x: x.to_vec(),
                width: w,
            })
        }
    }

    /// Metric components with their first (and optionally second) partials.
    pub fn derivatives(
        &self,
        x: &[f64],
        method: Method,
        second: bool,
    ) -> Result<MetricDerivs, ChartError> {
        let n = self.dim();
        let (g, dg, d2g, step) = match method {
            Method::Analytic => {
                let jets = self.component_jets(x)?;
                let g = DMatrix::from_fn(n, n, |i, j| jets[i * n + j].v);
                let dg = (0..n)
                    .map(|k| DMatrix::from_fn(n, n, |i, j| jets[i * n + j].g[k]))
                    .collect();
                let d2g = second.then(|| {
                    (0..n)
                        .map(|k| {
                            (0..n)
                                .map(|l| DMatrix::from_fn(n, n, |i, j| jets[i * n + j].h[k][l]))
                                .collect()
                        })
                        .collect()
                });
                (g, dg, d2g, None)
            }
            Method::FiniteDifference => {
                self.check_stencil(x)?;
                let st = stencil(&*self.values, x, self.step, second);
                let g = DMatrix::from_row_slice(n, n, &st.value);
                let dg = st
                    .d1
                    .iter()
                    .map(|c| DMatrix::from_row_slice(n, n, c))
                    .collect();
                let d2g = st.d2.map(|d2| {
                    d2.iter()
                        .map(|row| {
                            row.iter()
                                .map(|c| DMatrix::from_row_slice(n, n, c))
                                .collect()
                        })
                        .collect()
                });
                (g, dg, d2g, Some(self.step))
            }
        };
        let ginv = invert_metric(&g, x)?;
        Ok(MetricDerivs {
            n,
            g,
            ginv,
            dg,
            d2g,
            method,
            step,
        })
    }
}

fn check_dim(n: usize) -> Result<(), ChartError> {
    if (2..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(ChartError::UnsupportedDimension(n))
    }
}

/// Cholesky-based inverse; rejects metrics whose smallest pivot is below
/// [`PIVOT_RATIO_MIN`] times the largest.
pub fn invert_metric(g: &DMatrix<f64>, x: &[f64]) -> Result<DMatrix<f64>, ChartError> {
    let chol = Cholesky::new(g.clone()).ok_or_else(|| ChartError::SingularMetric {
        x: x.to_vec(),
        ratio: 0.0,
    })?;
    let pivots = chol.l_dirty().diagonal().map(|d| d * d);
    let max = pivots.max();
    let min = pivots.min();
    let ratio = min / max;
    if !(ratio >= PIVOT_RATIO_MIN) {
        return Err(ChartError::SingularMetric {
            x: x.to_vec(),
            ratio,
        });
    }
    Ok(chol.inverse())
}

struct Stencil {
    value: Vec<f64>,
    d1: Vec<Vec<f64>>,
    d2: Option<Vec<Vec<Vec<f64>>>>,
}

const D1_OFFSETS: [(f64, f64); 4] = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];

/// Fourth-order central differences of a vector-valued function: first
/// partials, pure second partials and tensor-product mixed partials.
fn stencil(
    f: &(dyn Fn(&[f64]) -> Vec<f64> + Send + Sync),
    x: &[f64],
    h: f64,
    second: bool,
) -> Stencil {
    let n = x.len();
    let value = f(x);
    let m = value.len();
    let shifted = |offs: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(k, a) in offs {
            y[k] += a * h;
        }
        f(&y)
    };
    let mut d1 = vec![vec![0.0; m]; n];
    let mut pure = vec![vec![0.0; m]; n];
    for k in 0..n {
        let fm2 = shifted(&[(k, -2.0)]);
        let fm1 = shifted(&[(k, -1.0)]);
        let fp1 = shifted(&[(k, 1.0)]);
        let fp2 = shifted(&[(k, 2.0)]);
        for c in 0..m {
            d1[k][c] = (fm2[c] - 8.0 * fm1[c] + 8.0 * fp1[c] - fp2[c]) / (12.0 * h);
            pure[k][c] = (-fm2[c] + 16.0 * fm1[c] - 30.0 * value[c] + 16.0 * fp1[c] - fp2[c])
                / (12.0 * h * h);
        }
    }
    let d2 = second.then(|| {
        let mut d2 = vec![vec![vec![0.0; m]; n]; n];
        for k in 0..n {
            d2[k][k] = pure[k].clone();
            for l in (k + 1)..n {
                let mut acc = vec![0.0; m];
                for &(a, wa) in &D1_OFFSETS {
                    for &(b, wb) in &D1_OFFSETS {
                        let fv = shifted(&[(k, a), (l, b)]);
                        for c in 0..m {
                            acc[c] += wa * wb * fv[c];
                        }
                    }
                }
                for v in &mut acc {
                    *v /= 144.0 * h * h;
                }
                d2[l][k] = acc.clone();
                d2[k][l] = acc;
            }
        }
        d2
    });
    Stencil { value, d1, d2 }
}

/// Metric components and partial derivatives at a point.
#[derive(Clone, Debug)]
pub struct MetricDerivs {
    pub n: usize,
    pub g: DMatrix<f64>,
    pub ginv: DMatrix<f64>,
    /// `dg[k] = ∂_k g`.
    pub dg: Vec<DMatrix<f64>>,
    /// `d2g[k][l] = ∂_k ∂_l g`, when requested.
    pub d2g: Option<Vec<Vec<DMatrix<f64>>>>,
    pub method: Method,
    pub step: Option<f64>,
}

/// `Γ^k_ij`, stored densely and symmetric in `(i, j)` by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n + i) * self.n + j]
    }

    fn set_sym(&mut self, k: usize, i: usize, j: usize, v: f64) {
        let n = self.n;
        self.data[(k * n + i) * n + j] = v;
        self.data[(k * n + j) * n + i] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl MetricDerivs {
    pub fn christoffel(&self) -> Christoffel {
        let n = self.n;
        let mut gam = Christoffel {
            n,
            data: vec![0.0; n * n * n],
        };
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let mut acc = 0.0;
                    for l in 0..n {
                        acc += self.ginv[(k, l)]
                            * (self.dg[i][(j, l)] + self.dg[j][(i, l)] - self.dg[l][(i, j)]);
                    }
                    gam.set_sym(k, i, j, 0.5 * acc);
                }
            }
        }
        gam
    }

    /// `∂_m Γ^k_ij` indexed `[m][k][i][j]` (flattened).
    fn christoffel_derivs(&self) -> Vec<f64> {
        let n = self.n;
        let d2g = self.d2g.as_ref().expect("second derivatives requested");
        let idx = |m: usize, k: usize, i: usize, j: usize| ((m * n + k) * n + i) * n + j;
        let mut out = vec![0.0; n * n * n * n];
        for m in 0..n {
            // ∂_m g^{-1} = -g^{-1} (∂_m g) g^{-1}
            let dginv = -(&self.ginv * &self.dg[m] * &self.ginv);
            for k in 0..n {
                for i in 0..n {
                    for j in i..n {
                        let mut acc = 0.0;
                        for l in 0..n {
                            let t = self.dg[i][(j, l)] + self.dg[j][(i, l)] - self.dg[l][(i, j)];
                            let dt = d2g[m][i][(j, l)] + d2g[m][j][(i, l)] - d2g[m][l][(i, j)];
                            acc += dginv[(k, l)] * t + self.ginv[(k, l)] * dt;
                        }
                        out[idx(m, k, i, j)] = 0.5 * acc;
                        out[idx(m, k, j, i)] = 0.5 * acc;
                    }
                }
            }
        }
        out
    }

    /// Ricci tensor `R_bd = ∂_a Γ^a_db − ∂_d Γ^a_ab + Γ^a_ae Γ^e_db − Γ^a_de Γ^e_ab`,
    /// symmetrized.
    pub fn ricci(&self, gam: &Christoffel) -> DMatrix<f64> {
        let n = self.n;
        let dgam = self.christoffel_derivs();
        let d = |m: usize, k: usize, i: usize, j: usize| dgam[((m * n + k) * n + i) * n + j];
        let mut ric = DMatrix::zeros(n, n);
        for b in 0..n {
            for dd in b..n {
                let mut acc = 0.0;
                for a in 0..n {
                    acc += d(a, a, dd, b) - d(dd, a, a, b);
                    for e in 0..n {
                        acc += gam.get(a, a, e) * gam.get(e, dd, b)
                            - gam.get(a, dd, e) * gam.get(e, a, b);
                    }
                }
                ric[(b, dd)] = acc;
            }
        }
        for b in 0..n {
            for dd in 0..b {
                ric[(b, dd)] = ric[(dd, b)];
            }
        }
        ric
    }
}

/// Full curvature data at one point.
#[derive(Clone, Debug)]
pub struct CurvatureReport {
    pub point: Vec<f64>,
    pub christoffel: Christoffel,
    pub ricci: DMatrix<f64>,
    pub scal: f64,
    pub method: Method,
    pub stencil_h: Option<f64>,
}

pub fn christoffel(
    metric: &ChartMetric,
    x: &[f64],
    method: Method,
) -> Result<Christoffel, ChartError> {
    Ok(metric.derivatives(x, method, false)?.christoffel())
}

pub fn scalar_curvature(
    metric: &ChartMetric,
    x: &[f64],
    method: Method,
) -> Result<CurvatureReport, ChartError> {
    let d = metric.derivatives(x, method, true)?;
    let gam = d.christoffel();
    let ricci = d.ricci(&gam);
    let scal = d.ginv.component_mul(&ricci).sum();
    Ok(CurvatureReport {
        point: x.to_vec(),
        christoffel: gam,
        ricci,
        scal,
        method,
        stencil_h: d.step,
    })
}

/// Shorthand for the scalar curvature alone.
pub fn scal(metric: &ChartMetric, x: &[f64], method: Method) -> Result<f64, ChartError> {
    Ok(scalar_curvature(metric, x, method)?.scal)
}

type FieldValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type FieldJetFn = dyn Fn(&[Jet4]) -> Jet4 + Send + Sync;

/// Real function on a chart, with optional analytic derivatives.
#[derive(Clone)]
pub struct ScalarField {
    values: Arc<FieldValueFn>,
    jets: Option<Arc<FieldJetFn>>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("analytic", &self.jets.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn from_values(values: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            values: Arc::new(values),
            jets: None,
        }
    }

    pub fn from_formula(formula: impl ScalarFormula) -> Self {
        let formula = Arc::new(formula);
        let f2 = Arc::clone(&formula);
        Self {
            values: Arc::new(move |x| formula.eval::<f64>(x)),
            jets: Some(Arc::new(move |x| f2.eval::<Jet4>(x))),
        }
    }

    pub fn from_parts(values: Arc<FieldValueFn>, jets: Option<Arc<FieldJetFn>>) -> Self {
        Self { values, jets }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            values: Arc::new(move |_| c),
            jets: Some(Arc::new(move |_| Jet4::constant(c))),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.values)(x)
    }

    pub fn has_jets(&self) -> bool {
        self.jets.is_some()
    }

    pub fn value_fn(&self) -> Arc<FieldValueFn> {
        Arc::clone(&self.values)
    }

    pub fn jet_fn(&self) -> Option<Arc<FieldJetFn>> {
        self.jets.clone()
    }

    /// Value, gradient (coordinate partials) and Hessian of partials.
    fn partials(
        &self,
        metric: &ChartMetric,
        x: &[f64],
        method: Method,
    ) -> Result<(f64, Vec<f64>, Vec<Vec<f64>>), ChartError> {
        let n = x.len();
        match method {
            Method::Analytic => {
                let jets = self.jets.as_ref().ok_or(ChartError::NoAnalyticField)?;
                let j = jets(&coordinate_jets(x));
                let grad = j.g[..n].to_vec();
                let hess = (0..n).map(|k| j.h[k][..n].to_vec()).collect();
                Ok((j.v, grad, hess))
            }
            Method::FiniteDifference => {
                metric.check_stencil(x)?;
                let values = Arc::clone(&self.values);
                let f = move |y: &[f64]| vec![values(y)];
                let st = stencil(&f, x, metric.step, true);
                let grad = st.d1.iter().map(|c| c[0]).collect();
                let hess = st
                    .d2
                    .unwrap()
                    .iter()
                    .map(|row| row.iter().map(|c| c[0]).collect())
                    .collect();
                Ok((st.value[0], grad, hess))
            }
        }
    }
}

/// Non-negative Laplacian `Δu = −g^{ij}(∂_i∂_j u − Γ^k_ij ∂_k u)`.
///
/// `method` selects how both the metric and the field are differentiated.
pub fn laplacian(
    metric: &ChartMetric,
    u: &ScalarField,
    x: &[f64],
    method: Method,
) -> Result<f64, ChartError> {
    let d = metric.derivatives(x, method, false)?;
    let gam = d.christoffel();
    let (_, grad, hess) = u.partials(metric, x, method)?;
    Ok(laplacian_from_parts(&d, &gam, &grad, &hess))
}

fn laplacian_from_parts(
    d: &MetricDerivs,
    gam: &Christoffel,
    grad: &[f64],
    hess: &[Vec<f64>],
) -> f64 {
    let n = d.n;
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut cov = hess[i][j];
            for k in 0..n {
                cov -= gam.get(k, i, j) * grad[k];
            }
            acc += d.ginv[(i, j)] * cov;
        }
    }
    -acc
}

/// Field value, `|du|²` and `Δu` in one pass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldDerivs {
    pub value: f64,
    pub grad_norm_sq: f64,
    pub laplacian: f64,
}

pub fn field_derivs(
    metric: &ChartMetric,
    u: &ScalarField,
    x: &[f64],
    method: Method,
) -> Result<FieldDerivs, ChartError> {
    let d = metric.derivatives(x, method, false)?;
    let gam = d.christoffel();
    let (value, grad, hess) = u.partials(metric, x, method)?;
    let n = d.n;
    let mut grad_norm_sq = 0.0;
    for i in 0..n {
        for j in 0..n {
            grad_norm_sq += d.ginv[(i, j)] * grad[i] * grad[j];
        }
    }
    Ok(FieldDerivs {
        value,
        grad_norm_sq,
        laplacian: laplacian_from_parts(&d, &gam, &grad, &hess),
    })
}

/// Which end of a coordinate range bounds the region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// The region lies at smaller coordinate values; the exterior normal
    /// points towards increasing values.
    Upper,
    Lower,
}

/// Mean curvature of the coordinate hypersurface `{x_axis = const}` through
/// `x`, with respect to the exterior normal of the region selected by `side`.
///
/// With `N̂ = grad x_k / |grad x_k|`, `H = −(ν/√g^{kk}) (g^{ij} − N̂^i N̂^j) Γ^k_ij`
/// where `ν = ±1` orients the normal outwards.
pub fn coordinate_mean_curvature(
    metric: &ChartMetric,
    x: &[f64],
    axis: usize,
    side: Side,
    method: Method,
) -> Result<f64, ChartError> {
    let d = metric.derivatives(x, method, false)?;
    let gam = d.christoffel();
    let n = d.n;
    let gkk = d.ginv[(axis, axis)];
    let norm = gkk.sqrt();
    let nu = match side {
        Side::Upper => 1.0,
        Side::Lower => -1.0,
    };
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let proj = d.ginv[(i, j)] - d.ginv[(i, axis)] * d.ginv[(j, axis)] / gkk;
            acc += proj * gam.get(axis, i, j);
        }
    }
    Ok(-nu * acc / norm)
}

/// Result of comparing the 1-jets of two metrics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Jet1Report {
    pub points: usize,
    pub max_value_dev: f64,
    pub max_first_dev: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Maximal componentwise deviation of `g` and `∂g` between two metrics on a
/// common chart. Each metric is differentiated with its preferred method.
pub fn jet1_compare(
    a: &ChartMetric,
    b: &ChartMetric,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<Jet1Report, ChartError> {
    if a.dim() != b.dim() {
        return Err(ChartError::ChartMismatch(format!(
            "dimension {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    for (ca, cb) in a.coords.iter().zip(&b.coords) {
        if ca.lo != cb.lo || ca.hi != cb.hi || ca.periodic != cb.periodic {
            return Err(ChartError::ChartMismatch(format!(
                "coordinate {} has different bounds",
                ca.name
            )));
        }
    }
    let mut max_value_dev: f64 = 0.0;
    let mut max_first_dev: f64 = 0.0;
    for x in points {
        let da = a.derivatives(x, a.preferred_method(), false)?;
        let db = b.derivatives(x, b.preferred_method(), false)?;
        max_value_dev = max_value_dev.max((&da.g - &db.g).amax());
        for (pa, pb) in da.dg.iter().zip(&db.dg) {
            max_first_dev = max_first_dev.max((pa - pb).amax());
        }
    }
    Ok(Jet1Report {
        points: points.len(),
        max_value_dev,
        max_first_dev,
        tol,
        pass: max_value_dev <= tol && max_first_dev <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    struct Polar;
    impl ComponentFormula for Polar {
        fn components<T: Real>(&self, p: &[T]) -> Vec<T> {
            let r = p[0];
            vec![T::from_f64(1.0), T::from_f64(0.0), T::from_f64(0.0), r * r]
        }
    }

    struct Sphere;
    impl ComponentFormula for Sphere {
        fn components<T: Real>(&self, p: &[T]) -> Vec<T> {
            let s = p[0].sin();
            vec![T::from_f64(1.0), T::from_f64(0.0), T::from_f64(0.0), s * s]
        }
    }

    fn polar() -> ChartMetric {
        ChartMetric::from_formula(vec![Coord::new("r", 0.0, 10.0), Coord::angle("phi")], Polar)
            .unwrap()
    }

    fn sphere() -> ChartMetric {
        ChartMetric::from_formula(vec![Coord::new("r", 0.0, PI), Coord::angle("phi")], Sphere)
            .unwrap()
    }

    fn euclid(n: usize) -> ChartMetric {
        let coords = (0..n)
            .map(|i| Coord::new(&format!("x{i}"), -5.0, 5.0))
            .collect();
        ChartMetric::from_values(coords, move |_| {
            let mut m = vec![0.0; n * n];
            for i in 0..n {
                m[i * n + i] = 1.0;
            }
            m
        })
        .unwrap()
    }

    #[test]
    fn euclidean_christoffels_vanish() {
        for n in 2..=4 {
            let g = christoffel(&euclid(n), &vec![0.3; n], Method::FiniteDifference).unwrap();
            assert_eq!(g.max_abs(), 0.0);
        }
    }

    #[test]
    fn polar_christoffels() {
        for method in [Method::Analytic, Method::FiniteDifference] {
            let g = christoffel(&polar(), &[2.0, 0.4], method).unwrap();
            assert!((g.get(0, 1, 1) + 2.0).abs() < 1e-9, "{method}");
            assert!((g.get(1, 0, 1) - 0.5).abs() < 1e-9);
            assert_eq!(g.get(1, 0, 1), g.get(1, 1, 0));
            for (k, i, j) in [(0, 0, 0), (0, 0, 1), (1, 0, 0), (1, 1, 1)] {
                assert!(g.get(k, i, j).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sphere_christoffels_at_quarter_pi() {
        let g = christoffel(&sphere(), &[FRAC_PI_4, 1.0], Method::Analytic).unwrap();
        assert!((g.get(0, 1, 1) + 0.5).abs() < 1e-14);
        assert!((g.get(1, 0, 1) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn scalar_curvature_of_flat_and_round_models() {
        for method in [Method::Analytic, Method::FiniteDifference] {
            let flat = scalar_curvature(&polar(), &[1.3, 0.0], method).unwrap();
            assert!(flat.scal.abs() < 1e-8, "{method}: {}", flat.scal);
            for &r in &[0.2, 1.0, 2.5] {
                let rep = scalar_curvature(&sphere(), &[r, 0.0], method).unwrap();
                assert!(
                    (rep.scal - 2.0).abs() < 1e-7,
                    "{method} r={r}: {}",
                    rep.scal
                );
                assert_eq!(rep.ricci[(0, 1)], rep.ricci[(1, 0)]);
                let trace = rep.ricci[(0, 0)] + rep.ricci[(1, 1)] / (r.sin() * r.sin());
                assert!((trace - rep.scal).abs() <= 1e-12 * rep.scal.abs().max(1.0));
            }
        }
    }

    #[test]
    fn cap_scalar_curvature_is_two_over_sigma_squared() {
        struct Cap(f64);
        impl ComponentFormula for Cap {
            fn components<T: Real>(&self, p: &[T]) -> Vec<T> {
                let f = (p[0] / self.0).sin() * self.0;
                vec![T::from_f64(1.0), T::from_f64(0.0), T::from_f64(0.0), f * f]
            }
        }
        for sigma in [0.5, 2.0] {
            let m = ChartMetric::from_formula(
                vec![Coord::new("r", 0.0, PI * sigma), Coord::angle("phi")],
                Cap(sigma),
            )
            .unwrap();
            let s = scal(&m, &[0.7 * sigma, 0.0], Method::Analytic).unwrap();
            assert!((s - 2.0 / (sigma * sigma)).abs() < 1e-12);
        }
    }

    #[test]
    fn laplacian_examples() {
        let c = ScalarField::constant(3.5);
        assert_eq!(
            laplacian(&sphere(), &c, &[1.0, 0.0], Method::Analytic).unwrap(),
            0.0
        );

        struct SinSq;
        impl ScalarFormula for SinSq {
            fn eval<T: Real>(&self, x: &[T]) -> T {
                let s = x[0].sin();
                s * s
            }
        }
        let u = ScalarField::from_formula(SinSq);
        for &r in &[0.3, FRAC_PI_4, 1.9] {
            let expect = 2.0 - 6.0 * r.cos().powi(2);
            let a = laplacian(&sphere(), &u, &[r, 0.0], Method::Analytic).unwrap();
            let f = laplacian(&sphere(), &u, &[r, 0.0], Method::FiniteDifference).unwrap();
            assert!((a - expect).abs() < 1e-12);
            assert!((f - expect).abs() < 1e-7);
        }

        struct RadiusSq;
        impl ScalarFormula for RadiusSq {
            fn eval<T: Real>(&self, x: &[T]) -> T {
                x[0] * x[0] + x[1] * x[1]
            }
        }
        let e2 = euclid(2);
        let v = laplacian(
            &e2,
            &ScalarField::from_formula(RadiusSq),
            &[0.0, 0.0],
            Method::FiniteDifference,
        )
        .unwrap();
        assert!((v + 4.0).abs() < 1e-6);
    }

    #[test]
    fn singular_and_out_of_chart_errors() {
        let bad = ChartMetric::from_values(
            vec![Coord::new("x", -1.0, 1.0), Coord::new("y", -1.0, 1.0)],
            |_| vec![1.0, 1.0, 1.0, 1.0],
        )
        .unwrap();
        assert!(matches!(
            christoffel(&bad, &[0.0, 0.0], Method::FiniteDifference),
            Err(ChartError::SingularMetric { .. })
        ));
        let nearly = ChartMetric::from_values(
            vec![Coord::new("x", -1.0, 1.0), Coord::new("y", -1.0, 1.0)],
            |_| vec![1.0, 0.0, 0.0, 1e-12],
        )
        .unwrap();
        assert!(matches!(
            christoffel(&nearly, &[0.0, 0.0], Method::FiniteDifference),
            Err(ChartError::SingularMetric { .. })
        ));
        let s = sphere();
        assert!(matches!(
            scalar_curvature(&s, &[4.0, 0.0], Method::Analytic),
            Err(ChartError::OutOfChart { .. })
        ));
        assert!(matches!(
            scalar_curvature(&s, &[1e-5, 0.0], Method::FiniteDifference),
            Err(ChartError::StencilUnderflow { .. })
        ));
        assert!(matches!(
            scalar_curvature(&euclid(2), &[0.0, 0.0], Method::Analytic),
            Err(ChartError::NoAnalyticDerivatives)
        ));
        assert!(matches!(
            ChartMetric::from_values(vec![Coord::new("x", 0.0, 1.0)], |_| vec![1.0]),
            Err(ChartError::UnsupportedDimension(1))
        ));
    }

    #[test]
    fn mean_curvature_of_circles() {
        let h = coordinate_mean_curvature(&polar(), &[2.0, 0.0], 0, Side::Upper, Method::Analytic)
            .unwrap();
        assert!((h - 0.5).abs() < 1e-14);
        let h = coordinate_mean_curvature(
            &sphere(),
            &[FRAC_PI_4, 0.0],
            0,
            Side::Upper,
            Method::Analytic,
        )
        .unwrap();
        assert!((h - 1.0).abs() < 1e-14);
        let h = coordinate_mean_curvature(
            &sphere(),
            &[FRAC_PI_4, 0.0],
            0,
            Side::Lower,
            Method::FiniteDifference,
        )
        .unwrap();
        assert!((h + 1.0).abs() < 1e-8);
    }

    #[test]
    fn jet1_compare_identity_and_mismatch() {
        let pts = vec![vec![0.5, 0.0], vec![1.5, 2.0]];
        let rep = jet1_compare(&sphere(), &sphere(), &pts, 1e-12).unwrap();
        assert!(rep.pass && rep.max_value_dev == 0.0 && rep.max_first_dev == 0.0);
        assert!(matches!(
            jet1_compare(&sphere(), &polar(), &pts, 1e-9),
            Err(ChartError::ChartMismatch(_))
        ));
        assert!(matches!(
            jet1_compare(&sphere(), &euclid(3), &pts, 1e-9),
            Err(ChartError::ChartMismatch(_))
        ));
    }
}
