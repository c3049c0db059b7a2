//! Scalar-curvature-monotone deformation path of a rotationally symmetric
//! metric.
//!
//! With `κ = |X|_g` at a point and `u = κ²`, the path
//! `P_ε(s) = b(s)·g_H + a(s)·g_V` is determined pointwise by
//!
//! ```text
//! a' = −(ε/(n−1))·a/(u a + ε) − u a²/(u a + ε)
//! b' = −(ε/(n−1))·b/(u a + ε)
//! ```
//!
//! with `a(0) = b(0) = 1`. At fixed points (`u = 0`) the system collapses to
//! the conformal law `a = b = exp(−s/(n−1))`; for `ε = 0` it integrates to
//! `a = exp(−s)`, `b = 1`.
//!
//! For a profile `dr² + f(r)²dφ²` the metric `b dr² + a f² dφ²` needs the
//! first two `r`-derivatives of `a` and `b`. They are exact here: the state is
//! augmented by `∂_u` and `∂²_u` of `a` and `b`, propagated by evaluating the
//! right-hand side on jets, and combined with `u(r) = f(r)²` by the chain rule.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::Plateau;
use crate::jet::{Jet1, Real};
use crate::models::{quadratic_fit_at_zero, ModelError, ProfileMetric, POLE_FIT_STEP};
use crate::ode::{dopri5, dopri5_at, OdeError, OdeOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("the flow needs ε > 0 at fixed points of the action (r = {r})")]
    ZeroKappaZeroEps { r: f64 },
    #[error("initial scalar curvature is not positive at r = {r} (scal = {scal})")]
    NotPositiveInitial { r: f64, scal: f64 },
    #[error("no ε in the schedule keeps scal > 0 (smallest tried {smallest:e})")]
    NoFeasibleEps { smallest: f64 },
    #[error("cutoff must vanish at fixed points (χ({r}) = {value})")]
    BadCutoff { r: f64, value: f64 },
    #[error("invalid flow input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// State of the pointwise system at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointwiseState {
    pub kappa: f64,
    pub n: usize,
    pub eps: f64,
    pub a: f64,
    pub b: f64,
    pub s: f64,
}

impl PointwiseState {
    pub fn initial(kappa: f64, n: usize, eps: f64) -> Result<Self, FlowError> {
        let st = Self {
            kappa,
            n,
            eps,
            a: 1.0,
            b: 1.0,
            s: 0.0,
        };
        st.validate()?;
        Ok(st)
    }

    fn validate(&self) -> Result<(), FlowError> {
        if self.n < 2 {
            return Err(FlowError::Invalid(format!("dimension {} < 2", self.n)));
        }
        if !(self.eps >= 0.0) || !(self.kappa >= 0.0) {
            return Err(FlowError::Invalid("κ and ε must be non-negative".into()));
        }
        if self.kappa == 0.0 && self.eps == 0.0 {
            return Err(FlowError::ZeroKappaZeroEps { r: f64::NAN });
        }
        Ok(())
    }
}

fn rhs<T: Real>(u: T, a: T, b: T, eps: f64, m: f64) -> (T, T) {
    if eps == 0.0 {
        // u a² / (u a) cancelled by hand: the quotient's u-derivatives lose
        // all precision as u → 0
        return (-a, b * 0.0);
    }
    let den = u * a + eps;
    let da = -(a * (eps / m)) / den - u * a * a / den;
    let db = -(b * (eps / m)) / den;
    (da, db)
}

/// `(da/ds, db/ds)` at the given state.
pub fn pointwise_rhs(st: &PointwiseState) -> Result<(f64, f64), FlowError> {
    st.validate()?;
    let m = (st.n - 1) as f64;
    if st.kappa == 0.0 {
        // fixed point: conformal scaling of the whole metric
        return Ok((-st.a / m, -st.b / m));
    }
    Ok(rhs(st.kappa * st.kappa, st.a, st.b, st.eps, m))
}

/// Advances a pointwise state to `s_target`.
pub fn advance(st: &PointwiseState, s_target: f64, tol: f64) -> Result<PointwiseState, FlowError> {
    st.validate()?;
    let m = (st.n - 1) as f64;
    let u = st.kappa * st.kappa;
    let eps = st.eps;
    let (y, _) = dopri5(
        |_, y: &[f64; 2]| {
            if u == 0.0 {
                [-y[0] / m, -y[1] / m]
            } else {
                let (da, db) = rhs(u, y[0], y[1], eps, m);
                [da, db]
            }
        },
        st.s,
        [st.a, st.b],
        s_target,
        &OdeOptions::with_tol(tol),
    )?;
    Ok(PointwiseState {
        a: y[0],
        b: y[1],
        s: s_target,
        ..*st
    })
}

/// `[a, ∂_u a, ∂²_u a, b, ∂_u b, ∂²_u b]`.
pub type NodeState = [f64; 6];

const NODE_INITIAL: NodeState = [1.0, 0.0, 0.0, 1.0, 0.0, 0.0];

fn node_rhs(u: f64, eps: f64, m: f64) -> impl Fn(f64, &NodeState) -> NodeState {
    move |_, y| {
        let uj = Jet1::var(u);
        let a = Jet1::new(y[0], y[1], y[2]);
        let b = Jet1::new(y[3], y[4], y[5]);
        let (da, db) = rhs(uj, a, b, eps, m);
        [da.v, da.d1(), da.d2(), db.v, db.d1(), db.d2()]
    }
}

const PROFILE_DIM: usize = 2;

/// Everything that determines the flow of a profile metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub model: ProfileMetric,
    pub eps: f64,
    pub tol: f64,
}

/// Reconstructed metric `E dr² + F² dφ²` at one point of the flow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowSample {
    pub s: f64,
    pub r: f64,
    pub a: f64,
    pub b: f64,
    /// `F = √a · f`.
    pub f_reconstructed: f64,
    /// `dF/dρ` with respect to arclength `dρ = √b dr`.
    pub f_rho: f64,
    /// `E = b`.
    pub e: f64,
    /// `dF/dr`.
    pub f_r: f64,
    pub scal: f64,
}

impl FlowSpec {
    pub fn new(model: ProfileMetric, eps: f64, tol: f64) -> Result<Self, FlowError> {
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(FlowError::Invalid(format!("ε = {eps}")));
        }
        if !(tol > 0.0) {
            return Err(FlowError::Invalid(format!("tolerance {tol}")));
        }
        Ok(Self { model, eps, tol })
    }

    fn u(&self, r: f64) -> f64 {
        let f = self.model.f.value(r);
        f * f
    }

    /// `n − 1` for the surface.
    fn m(&self) -> f64 {
        (PROFILE_DIM - 1) as f64
    }

    fn check_node(&self, r: f64) -> Result<(), FlowError> {
        if !(0.0..=self.model.length).contains(&r) {
            return Err(FlowError::Invalid(format!(
                "r = {r} outside [0, {}]",
                self.model.length
            )));
        }
        if self.eps == 0.0 && (self.u(r) == 0.0 || self.model.is_pole(r)) {
            return Err(FlowError::ZeroKappaZeroEps { r });
        }
        Ok(())
    }

    /// Node state at each of the non-decreasing times.
    pub fn trajectory(&self, r: f64, times: &[f64]) -> Result<Vec<NodeState>, FlowError> {
        self.check_node(r)?;
        if times.iter().any(|&t| t < 0.0) {
            return Err(FlowError::Invalid("negative flow time".into()));
        }
        Ok(dopri5_at(
            node_rhs(self.u(r), self.eps, self.m()),
            0.0,
            NODE_INITIAL,
            times,
            &OdeOptions::with_tol(self.tol),
        )?)
    }

    pub fn node_at(&self, r: f64, s: f64) -> Result<NodeState, FlowError> {
        Ok(self.trajectory(r, &[s])?[0])
    }

    /// Advances a node from `s0` to `s1`.
    pub fn advance_node(
        &self,
        r: f64,
        y: NodeState,
        s0: f64,
        s1: f64,
    ) -> Result<NodeState, FlowError> {
        self.check_node(r)?;
        Ok(dopri5(
            node_rhs(self.u(r), self.eps, self.m()),
            s0,
            y,
            s1,
            &OdeOptions::with_tol(self.tol),
        )?
        .0)
    }

    /// `(a, b)` as jets in `r`.
    fn warps_in_r(&self, r: f64, y: &NodeState) -> (Jet1, Jet1, Jet1) {
        let f = self.model.f.jet(r);
        let (f0, f1, f2) = (f.v, f.d1(), f.d2());
        let u_r = 2.0 * f0 * f1;
        let u_rr = 2.0 * f1 * f1 + 2.0 * f0 * f2;
        let a = Jet1::new(y[0], y[1] * u_r, y[2] * u_r * u_r + y[1] * u_rr);
        let b = Jet1::new(y[3], y[4] * u_r, y[5] * u_r * u_r + y[4] * u_rr);
        (a, b, f)
    }

    /// Reconstruction at a node whose state is known; `scal` is NaN at poles
    /// (see [`FlowSpec::sample`]).
    pub fn reconstruct(&self, r: f64, s: f64, y: &NodeState) -> FlowSample {
        let (a, b, f) = self.warps_in_r(r, y);
        sample_from_warps(r, s, a, b, f)
    }

    /// Reconstructed sample at `(r, s)`; at poles the curvature is the limit
    /// of a quadratic fit through nearby interior points.
    pub fn sample(&self, r: f64, s: f64) -> Result<FlowSample, FlowError> {
        let y = self.node_at(r, s)?;
        let mut out = self.reconstruct(r, s, &y);
        if self.model.is_pole(r) {
            out.scal = self.pole_scal(r, &[s])?[0];
        }
        Ok(out)
    }

    fn fit_offsets(&self, r: f64) -> Vec<(f64, f64)> {
        let dir = if r < 0.5 * self.model.length {
            1.0
        } else {
            -1.0
        };
        let h = POLE_FIT_STEP * self.model.length.min(1.0);
        (1..=5)
            .map(|k| (h * k as f64, r + dir * h * k as f64))
            .collect()
    }

    fn pole_scal(&self, r: f64, times: &[f64]) -> Result<Vec<f64>, FlowError> {
        let offs = self.fit_offsets(r);
        let trajs = offs
            .iter()
            .map(|&(_, rr)| self.trajectory(rr, times))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((0..times.len())
            .map(|j| {
                let pts: Vec<(f64, f64)> = offs
                    .iter()
                    .zip(&trajs)
                    .map(|(&(d, rr), tr)| (d, self.reconstruct(rr, times[j], &tr[j]).scal))
                    .collect();
                quadratic_fit_at_zero(&pts)
            })
            .collect())
    }

    /// Samples at every `(s, r)` pair, rows ordered by `s` then `r`.
    pub fn sample_grid(
        &self,
        grid: &[f64],
        times: &[f64],
    ) -> Result<Vec<Vec<FlowSample>>, FlowError> {
        let cols = grid
            .par_iter()
            .map(|&r| {
                let tr = self.trajectory(r, times)?;
                let mut col: Vec<FlowSample> = tr
                    .iter()
                    .zip(times)
                    .map(|(y, &s)| self.reconstruct(r, s, y))
                    .collect();
                if self.model.is_pole(r) {
                    for (c, v) in col.iter_mut().zip(self.pole_scal(r, times)?) {
                        c.scal = v;
                    }
                }
                Ok(col)
            })
            .collect::<Result<Vec<_>, FlowError>>()?;
        Ok((0..times.len())
            .map(|j| cols.iter().map(|c| c[j]).collect())
            .collect())
    }

    /// `|dF/dρ|` at a pole, extrapolated from `δ` and `2δ` as
    /// `(4F_ρ(δ) − F_ρ(2δ))/3`; equals the cone angle factor.
    pub fn cone_factor(&self, pole: f64, s: f64) -> Result<f64, FlowError> {
        let dir = if pole < 0.5 * self.model.length {
            1.0
        } else {
            -1.0
        };
        let d = 1e-3 * self.model.length.min(1.0);
        let f1 = self.sample(pole + dir * d, s)?.f_rho.abs();
        let f2 = self.sample(pole + 2.0 * dir * d, s)?.f_rho.abs();
        Ok((4.0 * f1 - f2) / 3.0)
    }
}

fn sample_from_warps(r: f64, s: f64, a: Jet1, b: Jet1, f: Jet1) -> FlowSample {
    let big_f = a.sqrt() * f;
    let e = b;
    let (fv, fr, frr) = (big_f.v, big_f.d1(), big_f.d2());
    let scal = -2.0 / (e.v * fv) * (frr - fr * e.d1() / (2.0 * e.v));
    FlowSample {
        s,
        r,
        a: a.v,
        b: b.v,
        f_reconstructed: fv,
        f_rho: fr / e.v.sqrt(),
        e: e.v,
        f_r: fr,
        scal: if fv == 0.0 { f64::NAN } else { scal },
    }
}

/// Node states of a flow over a fixed grid at a common time.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowField {
    pub spec: FlowSpec,
    pub grid: Vec<f64>,
    pub s: f64,
    pub nodes: Vec<NodeState>,
}

impl FlowField {
    pub fn new(spec: FlowSpec, grid: Vec<f64>) -> Result<Self, FlowError> {
        for &r in &grid {
            spec.check_node(r)?;
        }
        let nodes = vec![NODE_INITIAL; grid.len()];
        Ok(Self {
            spec,
            grid,
            s: 0.0,
            nodes,
        })
    }

    /// Advances every node to `s_target` (in parallel; results are
    /// independent of scheduling).
    pub fn integrate_path(&self, s_target: f64) -> Result<FlowField, FlowError> {
        if s_target < self.s {
            return Err(FlowError::Invalid(format!(
                "cannot integrate backwards from {} to {s_target}",
                self.s
            )));
        }
        let nodes = self
            .grid
            .par_iter()
            .zip(self.nodes.par_iter())
            .map(|(&r, y)| self.spec.advance_node(r, *y, self.s, s_target))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FlowField {
            spec: self.spec.clone(),
            grid: self.grid.clone(),
            s: s_target,
            nodes,
        })
    }

    pub fn samples(&self) -> Result<Vec<FlowSample>, FlowError> {
        self.grid
            .iter()
            .zip(&self.nodes)
            .map(|(&r, y)| {
                let mut smp = self.spec.reconstruct(r, self.s, y);
                if self.spec.model.is_pole(r) {
                    smp.scal = self.spec.pole_scal(r, &[self.s])?[0];
                }
                Ok(smp)
            })
            .collect()
    }
}

/// `count` equally spaced nodes on `[0, L]`, or `count` cell midpoints when
/// the endpoints must be avoided.
pub fn uniform_grid(model: &ProfileMetric, count: usize, include_ends: bool) -> Vec<f64> {
    let l = model.length;
    if include_ends {
        if count < 2 {
            return vec![0.0, l];
        }
        (0..count)
            .map(|k| l * k as f64 / (count - 1) as f64)
            .collect()
    } else {
        (0..count)
            .map(|k| l * (k as f64 + 0.5) / count as f64)
            .collect()
    }
}

/// Cell boundaries on `[0, L]`: `cells` uniform cells, with the cells
/// touching a pole split `refine` times.
pub fn refined_cells(model: &ProfileMetric, cells: usize, refine: usize) -> Vec<f64> {
    let l = model.length;
    let h = l / cells as f64;
    let poles = model.poles();
    let mut out = vec![0.0];
    for k in 0..cells {
        let (lo, hi) = (k as f64 * h, (k + 1) as f64 * h);
        let near_pole = poles
            .iter()
            .any(|&p| (p - lo).abs() < 1e-12 * l.max(1.0) || (p - hi).abs() < 1e-12 * l.max(1.0));
        let sub = if near_pole { refine.max(1) } else { 1 };
        for j in 1..=sub {
            out.push(lo + (hi - lo) * j as f64 / sub as f64);
        }
    }
    *out.last_mut().unwrap() = l;
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowScalReport {
    pub eps: f64,
    pub times: Vec<f64>,
    pub grid: Vec<f64>,
    /// `scal[j][k]` at time `times[j]` and node `grid[k]`.
    pub scal: Vec<Vec<f64>>,
    pub min_scal: f64,
    /// Smallest discrete `d/ds scal` over nodes and consecutive times.
    pub min_slope: f64,
    /// Largest increase of `a` or `b` between consecutive times.
    pub max_warp_increase: f64,
    pub slope_tol: f64,
    pub pass: bool,
}

/// Scalar curvature along the flow with a monotonicity check.
pub fn scal_along_flow(
    spec: &FlowSpec,
    grid: &[f64],
    times: &[f64],
    slope_tol: f64,
) -> Result<FlowScalReport, FlowError> {
    if times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FlowError::Invalid(
            "flow times must be non-empty and increasing".into(),
        ));
    }
    for &r in grid {
        let s0 = spec.model.scal_at(r)?;
        if !(s0 > 0.0) {
            return Err(FlowError::NotPositiveInitial { r, scal: s0 });
        }
    }
    let rows = spec.sample_grid(grid, times)?;
    Ok(summarize(spec.eps, times, grid, &rows, slope_tol))
}

fn summarize(
    eps: f64,
    times: &[f64],
    grid: &[f64],
    rows: &[Vec<FlowSample>],
    slope_tol: f64,
) -> FlowScalReport {
    let scal: Vec<Vec<f64>> = rows
        .iter()
        .map(|row| row.iter().map(|x| x.scal).collect())
        .collect();
    let min_scal = scal.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let mut min_slope = f64::INFINITY;
    let mut max_warp_increase = f64::NEG_INFINITY;
    for j in 1..rows.len() {
        let ds = times[j] - times[j - 1];
        for k in 0..grid.len() {
            min_slope = min_slope.min((scal[j][k] - scal[j - 1][k]) / ds);
            let inc = (rows[j][k].a - rows[j - 1][k].a).max(rows[j][k].b - rows[j - 1][k].b);
            max_warp_increase = max_warp_increase.max(inc);
        }
    }
    let nan_free = scal.iter().flatten().all(|v| v.is_finite());
    FlowScalReport {
        eps,
        times: times.to_vec(),
        grid: grid.to_vec(),
        min_scal,
        min_slope,
        max_warp_increase,
        slope_tol,
        pass: nan_free && min_scal > 0.0 && min_slope >= -slope_tol,
        scal,
    }
}

/// Cutoff function of `r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Cutoff {
    Zero,
    One,
    Plateau { plateau: Plateau },
}

impl Cutoff {
    pub fn eval<T: Real>(&self, r: T) -> T {
        match self {
            Cutoff::Zero => T::from_f64(0.0),
            Cutoff::One => T::from_f64(1.0),
            Cutoff::Plateau { plateau } => plateau.eval(r),
        }
    }
}

/// `(1 − χ)·P_ε(s) + χ·P_0(s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlendSpec {
    pub chi: Cutoff,
    pub eps: f64,
    pub s_max: f64,
}

/// Sample of the blended path; on `{χ = 1}` this is exactly
/// `b = 1, a = exp(−s)`.
pub fn blended_sample(spec: &FlowSpec, chi: &Cutoff, r: f64, s: f64, y: &NodeState) -> FlowSample {
    let (a, b, f) = spec.warps_in_r(r, y);
    let c = chi.eval(Jet1::var(r));
    let one = Jet1::constant(1.0);
    let a = (one - c) * a + c * (-s).exp();
    let b = (one - c) * b + c;
    sample_from_warps(r, s, a, b, f)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlendReport {
    pub eps: f64,
    pub times: Vec<f64>,
    pub grid: Vec<f64>,
    pub samples: Vec<Vec<FlowSample>>,
    pub min_scal: f64,
    pub positive: bool,
}

/// Blended path on the grid at the given times.
pub fn blended_flow(
    model: &ProfileMetric,
    blend: &BlendSpec,
    grid: &[f64],
    times: &[f64],
    tol: f64,
) -> Result<BlendReport, FlowError> {
    for p in model.poles() {
        let v = blend.chi.eval(p);
        if v != 0.0 {
            return Err(FlowError::BadCutoff { r: p, value: v });
        }
    }
    if times.iter().any(|&t| t > blend.s_max) {
        return Err(FlowError::Invalid("sample time beyond s_max".into()));
    }
    let spec = FlowSpec::new(model.clone(), blend.eps, tol)?;
    let cols = grid
        .par_iter()
        .map(|&r| {
            let tr = spec.trajectory(r, times)?;
            let mut col: Vec<FlowSample> = tr
                .iter()
                .zip(times)
                .map(|(y, &s)| blended_sample(&spec, &blend.chi, r, s, y))
                .collect();
            if model.is_pole(r) {
                // χ vanishes near the pole, so the blended curvature there is the ε-flow's
                for (c, v) in col.iter_mut().zip(spec.pole_scal(r, times)?) {
                    c.scal = v;
                }
            }
            Ok(col)
        })
        .collect::<Result<Vec<_>, FlowError>>()?;
    let samples: Vec<Vec<FlowSample>> = (0..times.len())
        .map(|j| cols.iter().map(|c| c[j]).collect())
        .collect();
    let min_scal = samples
        .iter()
        .flatten()
        .map(|x| x.scal)
        .fold(f64::INFINITY, f64::min);
    Ok(BlendReport {
        eps: blend.eps,
        times: times.to_vec(),
        grid: grid.to_vec(),
        positive: min_scal > 0.0 && min_scal.is_finite(),
        min_scal,
        samples,
    })
}

/// Geometric schedule `1, 1/2, 1/4, …` of the given depth.
pub fn eps_schedule(depth: usize) -> Vec<f64> {
    (0..depth).map(|k| 0.5f64.powi(k as i32)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsSearch {
    pub eps: f64,
    /// `(ε, min scal)` for every ε tried, in schedule order.
    pub tried: Vec<(f64, f64)>,
    pub report: BlendReport,
}

/// First ε of the schedule for which the blended path keeps `scal > 0` on
/// the grid up to `s_max`.
pub fn search_eps(
    model: &ProfileMetric,
    chi: Cutoff,
    s_max: f64,
    grid: &[f64],
    times: &[f64],
    tol: f64,
    depth: usize,
) -> Result<EpsSearch, FlowError> {
    let mut tried = Vec::new();
    let schedule = eps_schedule(depth);
    for &eps in &schedule {
        let rep = blended_flow(model, &BlendSpec { chi, eps, s_max }, grid, times, tol)?;
        tried.push((eps, rep.min_scal));
        if rep.positive {
            return Ok(EpsSearch {
                eps,
                tried,
                report: rep,
            });
        }
    }
    Err(FlowError::NoFeasibleEps {
        smallest: schedule.last().copied().unwrap_or(f64::NAN),
    })
}

#[derive(Serialize)]
struct FlowRow {
    s: f64,
    r: f64,
    a: f64,
    b: f64,
    f_reconstructed: f64,
    scal: f64,
}

/// Writes samples as CSV with columns `s,r,a,b,f_reconstructed,scal`.
pub fn write_flow_csv<W: Write>(out: W, rows: &[Vec<FlowSample>]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for x in rows.iter().flatten() {
        w.serialize(FlowRow {
            s: x.s,
            r: x.r,
            a: x.a,
            b: x.b,
            f_reconstructed: x.f_reconstructed,
            scal: x.scal,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_flow_csv_file(path: &Path, rows: &[Vec<FlowSample>]) -> Result<(), csv::Error> {
    write_flow_csv(std::fs::File::create(path)?, rows)
}
