//! Experiment configuration: one JSON document, every field defaulted.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use psclab::killing::DeformFn;
use psclab::models::{self, CapParams, InvariantModel, ProfileKind, ProfileMetric};
use psclab::{doubly_warped, Expr, ModelError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("model {id}: {source}")]
    Model { id: String, source: ModelError },
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

pub const DEFAULT_SEED: u64 = 20_241_016;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub verify: VerifyConfig,
    pub flow: FlowConfig,
    pub figure: FigureConfig,
    pub submersion: SubmersionConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            output_dir: PathBuf::from("psclab-out"),
            verify: VerifyConfig::default(),
            flow: FlowConfig::default(),
            figure: FigureConfig::default(),
            submersion: SubmersionConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Applies `--tol`: every threshold in the table takes the given value.
pub fn override_all(table: &mut BTreeMap<String, f64>, tol: Option<f64>) {
    if let Some(t) = tol {
        table.values_mut().for_each(|v| *v = t);
    }
}

pub fn check_tolerances(table: &BTreeMap<String, f64>) -> Result<(), ConfigError> {
    for (k, v) in table {
        if !(*v > 0.0 && v.is_finite()) {
            return Err(invalid(format!("tolerance {k} = {v} must be positive")));
        }
    }
    Ok(())
}

fn one() -> f64 {
    1.0
}

/// A model as written in the config, tagged by `kind`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    RoundSphere {
        #[serde(default = "one")]
        radius: f64,
    },
    FlatCylinder {
        #[serde(default = "one")]
        length: f64,
    },
    FlatDisk {
        #[serde(default = "one")]
        length: f64,
    },
    Cap {
        sigma: f64,
        rho: f64,
    },
    /// `dr² + f(r)² dφ²`; `f` is an expression in `r`.
    Profile {
        profile: ProfileKind,
        length: f64,
        f: Expr,
        #[serde(default = "one")]
        cone_factor: f64,
    },
    /// `dt² + a(t)² dφ² + b(t)² g_fiber` in dimension `n`.
    DoublyWarped {
        n: usize,
        interval: [f64; 2],
        a: Expr,
        b: Expr,
        #[serde(default)]
        k_fiber: f64,
    },
}

impl ModelSpec {
    pub fn label(&self) -> String {
        match self {
            ModelSpec::RoundSphere { radius } => format!("round_sphere(radius={radius})"),
            ModelSpec::FlatCylinder { length } => format!("flat_cylinder(length={length})"),
            ModelSpec::FlatDisk { length } => format!("flat_disk(length={length})"),
            ModelSpec::Cap { sigma, rho } => format!("cap(sigma={sigma},rho={rho})"),
            ModelSpec::Profile {
                profile, length, f, ..
            } => format!("profile({profile:?},length={length},f={f})").to_lowercase(),
            ModelSpec::DoublyWarped {
                n, a, b, k_fiber, ..
            } => format!("doubly_warped(n={n},a={a},b={b},k={k_fiber})"),
        }
    }

    /// Two-dimensional models, the ones the flow and figure accept.
    pub fn profile(&self) -> Result<ProfileMetric, ConfigError> {
        let wrap = |source| ConfigError::Model {
            id: self.label(),
            source,
        };
        match self {
            ModelSpec::RoundSphere { radius } => models::round_sphere(*radius).map_err(wrap),
            ModelSpec::FlatCylinder { length } => models::flat_cylinder(*length).map_err(wrap),
            ModelSpec::FlatDisk { length } => models::flat_disk(*length).map_err(wrap),
            ModelSpec::Cap { sigma, rho } => CapParams::new(*sigma, *rho)
                .and_then(models::cap_metric)
                .map_err(wrap),
            ModelSpec::Profile {
                profile,
                length,
                f,
                cone_factor,
            } => ProfileMetric::with_cone(*profile, *length, f.clone(), *cone_factor).map_err(wrap),
            ModelSpec::DoublyWarped { .. } => Err(invalid(format!(
                "{} is not a surface of revolution",
                self.label()
            ))),
        }
    }

    pub fn build(&self) -> Result<Box<dyn InvariantModel>, ConfigError> {
        match self {
            ModelSpec::DoublyWarped {
                n,
                interval,
                a,
                b,
                k_fiber,
            } => doubly_warped(
                *n,
                (interval[0], interval[1]),
                a.clone(),
                b.clone(),
                *k_fiber,
            )
            .map(|m| Box::new(m) as Box<dyn InvariantModel>)
            .map_err(|source| ConfigError::Model {
                id: self.label(),
                source,
            }),
            _ => Ok(Box::new(self.profile()?)),
        }
    }
}

// no deny_unknown_fields here: serde does not combine it with flatten;
// the tagged enum rejects unknown keys instead
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    /// Row label; defaults to a description of the model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(flatten)]
    pub spec: ModelSpec,
}

impl ModelEntry {
    pub fn id(&self) -> String {
        self.id.clone().unwrap_or_else(|| self.spec.label())
    }
}

impl From<ModelSpec> for ModelEntry {
    fn from(spec: ModelSpec) -> Self {
        Self { id: None, spec }
    }
}

fn expr(s: &str) -> Expr {
    s.parse().expect("built-in expression")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    Analytic,
    FiniteDifference,
    Both,
}

/// A user-supplied `(α, β)` pair; explicit derivatives override the jets
/// in the closed-form side of the comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserDeformation {
    pub alpha: DeformFn,
    pub beta: DeformFn,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RicciWegParams {
    pub c: f64,
    pub eps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub models: Vec<ModelEntry>,
    /// Size of the seeded random `(α, β)` family.
    pub random_pairs: usize,
    pub points: usize,
    /// Distance kept from the ends of the radial interval, in `r` units.
    pub margin: f64,
    pub method: MethodChoice,
    pub deformations: Vec<UserDeformation>,
    pub ricci_weg: Vec<RicciWegParams>,
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            models: vec![
                ModelEntry {
                    id: Some("sphere".into()),
                    spec: ModelSpec::RoundSphere { radius: 1.0 },
                },
                ModelEntry {
                    id: Some("warped_sincos".into()),
                    spec: ModelSpec::DoublyWarped {
                        n: 3,
                        interval: [0.0, 3.0],
                        a: expr("1.5 + 0.5*sin(t)"),
                        b: expr("1.5 + 0.5*cos(t)"),
                        k_fiber: 0.0,
                    },
                },
                ModelEntry {
                    id: Some("warped_linear".into()),
                    spec: ModelSpec::DoublyWarped {
                        n: 3,
                        interval: [0.0, 3.0],
                        a: expr("2 + sin(t)"),
                        b: expr("1 + 0.1*t"),
                        k_fiber: 0.0,
                    },
                },
            ],
            random_pairs: 50,
            points: 100,
            margin: 0.05,
            method: MethodChoice::Both,
            deformations: Vec::new(),
            ricci_weg: vec![
                RicciWegParams { c: 0.0, eps: 1.0 },
                RicciWegParams { c: 0.5, eps: 0.5 },
                RicciWegParams { c: 1.0, eps: 2.0 },
            ],
            tolerances: [
                ("delta_alpha", 1e-8),
                ("b_zero", 1e-8),
                ("a_zero", 1e-7),
                ("scal_var_analytic", 1e-7),
                ("scal_var_fd", 1e-4),
                ("killing_est", 1e-10),
                ("ricci_weg", 1e-10),
                ("scaldiffest", 1e-10),
            ]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.models.is_empty() {
            return Err(invalid("verify.models is empty"));
        }
        unique_ids(&self.models)?;
        if self.points == 0 {
            return Err(invalid("verify.points must be positive"));
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return Err(invalid(format!(
                "verify.margin = {} must be non-negative",
                self.margin
            )));
        }
        for p in &self.ricci_weg {
            if !(p.eps > 0.0) {
                return Err(invalid(format!(
                    "verify.ricci_weg eps = {} must be positive",
                    p.eps
                )));
            }
        }
        require_keys(
            &self.tolerances,
            &[
                "delta_alpha",
                "b_zero",
                "a_zero",
                "scal_var_analytic",
                "scal_var_fd",
                "killing_est",
                "ricci_weg",
                "scaldiffest",
            ],
            "verify",
        )?;
        check_tolerances(&self.tolerances)
    }
}

fn unique_ids(models: &[ModelEntry]) -> Result<(), ConfigError> {
    let mut seen = std::collections::BTreeSet::new();
    for m in models {
        if !seen.insert(m.id()) {
            return Err(invalid(format!("duplicate model id {}", m.id())));
        }
    }
    Ok(())
}

fn require_keys(
    table: &BTreeMap<String, f64>,
    keys: &[&str],
    section: &str,
) -> Result<(), ConfigError> {
    for k in keys {
        if !table.contains_key(*k) {
            return Err(invalid(format!("{section}.tolerances lacks {k}")));
        }
    }
    for k in table.keys() {
        if !keys.contains(&k.as_str()) {
            return Err(invalid(format!("{section}.tolerances has unknown key {k}")));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub model: ModelEntry,
    pub eps: Vec<f64>,
    /// Flow times; strictly increasing, starting anywhere `≥ 0`.
    pub s: Vec<f64>,
    pub grid_points: usize,
    /// Whether the radial grid contains the fixed points of the action.
    /// Unset means: only for `ε > 0`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub include_fixed_points: Option<bool>,
    pub ode_tol: f64,
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            model: ModelEntry {
                id: Some("sphere".into()),
                spec: ModelSpec::RoundSphere { radius: 1.0 },
            },
            eps: vec![0.0, 1.0],
            s: (0..=30).map(|k| k as f64 / 20.0).collect(),
            grid_points: 400,
            include_fixed_points: None,
            ode_tol: 1e-10,
            tolerances: [
                ("monotone", 1e-6),
                ("closed_form", 1e-8),
                ("fixed_point", 1e-8),
            ]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.s.is_empty() {
            return Err(invalid("flow.s schedule is empty"));
        }
        if self.s.iter().any(|s| !(*s >= 0.0 && s.is_finite()))
            || self.s.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(invalid(
                "flow.s must be non-negative and strictly increasing",
            ));
        }
        if self.eps.is_empty() {
            return Err(invalid("flow.eps is empty"));
        }
        check_eps(&self.eps, "flow")?;
        if self.grid_points < 2 {
            return Err(invalid("flow.grid_points must be at least 2"));
        }
        if !(self.ode_tol > 0.0) {
            return Err(invalid("flow.ode_tol must be positive"));
        }
        require_keys(
            &self.tolerances,
            &["monotone", "closed_form", "fixed_point"],
            "flow",
        )?;
        check_tolerances(&self.tolerances)
    }
}

fn check_eps(eps: &[f64], section: &str) -> Result<(), ConfigError> {
    if eps.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
        return Err(invalid(format!(
            "{section}.eps entries must be finite and non-negative"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FigureConfig {
    pub model: ModelEntry,
    pub eps: Vec<f64>,
    pub s: Vec<f64>,
    pub n_phi: usize,
    pub cells: usize,
    pub refine: usize,
    pub ode_tol: f64,
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for FigureConfig {
    fn default() -> Self {
        Self {
            model: ModelEntry {
                id: Some("sphere".into()),
                spec: ModelSpec::RoundSphere { radius: 1.0 },
            },
            eps: vec![0.0, 1.0],
            s: vec![0.0, 0.5, 1.0, 1.5],
            n_phi: 64,
            cells: 2048,
            refine: 4,
            ode_tol: 1e-10,
            tolerances: [
                ("cone_factor", 1e-6),
                ("pole_smoothness", 1e-3),
                ("circumference", 1e-3),
                ("isometry", 1e-6),
            ]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        }
    }
}

impl FigureConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.s.is_empty() || self.eps.is_empty() {
            return Err(invalid("figure.s and figure.eps must be non-empty"));
        }
        if self.s.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(invalid("figure.s entries must be finite and non-negative"));
        }
        check_eps(&self.eps, "figure")?;
        if self.n_phi < 3 || self.cells == 0 || self.refine == 0 {
            return Err(invalid("figure needs n_phi >= 3 and positive cells/refine"));
        }
        if !(self.ode_tol > 0.0) {
            return Err(invalid("figure.ode_tol must be positive"));
        }
        require_keys(
            &self.tolerances,
            &[
                "cone_factor",
                "pole_smoothness",
                "circumference",
                "isometry",
            ],
            "figure",
        )?;
        check_tolerances(&self.tolerances)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapSpec {
    pub sigma: f64,
    pub rho: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubmersionConfig {
    /// `τ` values for the Berger calibration.
    pub berger_taus: Vec<f64>,
    /// `τ` grid for monotonicity and boundary mean curvature.
    pub tau_grid: Vec<f64>,
    pub caps: Vec<CapSpec>,
    /// Flow times `s` for the cap boundary mean curvature.
    pub cap_s: Vec<f64>,
    pub h_targets: Vec<f64>,
    /// Connection strength of the disk bundle in the vertical-normal check.
    pub bundle_connection: f64,
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for SubmersionConfig {
    fn default() -> Self {
        Self {
            berger_taus: vec![0.25, 0.5, 1.0, 2.0],
            tau_grid: (1..=20).map(|k| k as f64 / 20.0).collect(),
            caps: vec![
                CapSpec {
                    sigma: 1.0,
                    rho: std::f64::consts::FRAC_PI_4,
                },
                CapSpec {
                    sigma: 0.5,
                    rho: 0.6,
                },
                CapSpec {
                    sigma: 2.0,
                    rho: 1.0,
                },
            ],
            cap_s: vec![0.0, 0.5, 1.0, 2.0],
            h_targets: vec![1.5, 2.0, 3.0, 5.0, 10.0],
            bundle_connection: 1.0,
            tolerances: [
                ("berger", 1e-6),
                ("a_norm", 1e-6),
                ("mean_curvature", 1e-8),
                ("cap", 1e-9),
            ]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        }
    }
}

impl SubmersionConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.berger_taus.is_empty() || self.tau_grid.is_empty() {
            return Err(invalid("submersion τ lists must be non-empty"));
        }
        // non-positive τ is reported per row, not rejected here
        if self.h_targets.iter().any(|h| !(*h > 0.0)) {
            return Err(invalid("submersion.h_targets must be positive"));
        }
        require_keys(
            &self.tolerances,
            &["berger", "a_norm", "mean_curvature", "cap"],
            "submersion",
        )?;
        check_tolerances(&self.tolerances)
    }
}
