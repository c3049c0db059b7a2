//! Surfaces of revolution along the deformation path, one panel per
//! `(ε, s)`.

use std::path::Path;

use psclab::embed::{figure_panels, panel_path, EmbedError, EmbedOptions, Panel};
use psclab::flow::FlowSpec;
use serde::Serialize;

use super::{num, stamp};
use crate::config::ExperimentConfig;
use crate::report::{CheckRow, VerificationReport};
use crate::CliError;

pub const ANCHOR_EMBED: &str = "z(ρ) = ∫ √(1 − (dF/dρ)²) dρ requires |dF/dρ| ≤ 1";
pub const ANCHOR_CONE: &str = "ε = 0: cone factor at fixed points = e^{−s/2}·|f'(0)|";
pub const ANCHOR_SMOOTH: &str = "ε > 0: dF/dρ at fixed points stays |f'(0)|";
pub const ANCHOR_CIRCUMFERENCE: &str = "mesh ring length = 2πF (isometric embedding)";
pub const ANCHOR_ISOMETRY: &str = "(ΔF² + Δz²)/Δρ² = 1 along the profile";

#[derive(Serialize)]
struct Grid {
    model: String,
    eps: Vec<f64>,
    s: Vec<f64>,
    n_phi: usize,
    cells: usize,
    refine: usize,
    ode_tol: f64,
}

pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<VerificationReport, CliError> {
    let fc = &cfg.figure;
    fc.validate()?;
    let model = fc.model.spec.profile()?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let opts = EmbedOptions {
        cells: fc.cells,
        refine: fc.refine,
    };
    let tol = |k: &str| fc.tolerances[k];
    let mut rows = Vec::new();
    for &eps in &fc.eps {
        for &s in &fc.s {
            let prefix = format!("figure/eps={}/s={}", num(eps), num(s));
            let panel = FlowSpec::new(model.clone(), eps, fc.ode_tol)
                .map_err(EmbedError::from)
                .and_then(|spec| figure_panels(&spec, &[eps], &[s], fc.n_phi, opts, out));
            let panel: Panel = match panel {
                Ok(mut p) => p.remove(0),
                Err(EmbedError::Io { path, source }) => return Err(CliError::Io { path, source }),
                Err(e) => {
                    rows.push(CheckRow::failed(
                        format!("{prefix}/embed"),
                        ANCHOR_EMBED,
                        0.0,
                        e,
                    ));
                    continue;
                }
            };
            let where_ = panel_path(eps, s).display().to_string();
            if !panel.cone_factors.is_empty() {
                let (anchor, want, key) = if eps == 0.0 {
                    (
                        ANCHOR_CONE,
                        model.cone_factor * (-s / 2.0).exp(),
                        "cone_factor",
                    )
                } else {
                    (ANCHOR_SMOOTH, model.cone_factor, "pole_smoothness")
                };
                let dev = panel
                    .cone_factors
                    .iter()
                    .fold(0.0_f64, |m, c| m.max((c - want).abs()));
                let factors: Vec<String> = panel
                    .cone_factors
                    .iter()
                    .map(|c| format!("{c:.9}"))
                    .collect();
                rows.push(CheckRow::measured(
                    format!("{prefix}/{key}"),
                    anchor,
                    dev,
                    tol(key),
                    format!(
                        "{where_}: measured [{}], expected {want:.9}",
                        factors.join(", ")
                    ),
                ));
            }
            rows.push(CheckRow::measured(
                format!("{prefix}/circumference"),
                ANCHOR_CIRCUMFERENCE,
                panel.circumference_deviation,
                tol("circumference"),
                format!("{where_}: n_phi {}", fc.n_phi),
            ));
            rows.push(CheckRow::measured(
                format!("{prefix}/isometry"),
                ANCHOR_ISOMETRY,
                panel.isometry_residual,
                tol("isometry"),
                where_,
            ));
        }
    }
    let grid = Grid {
        model: fc.model.id(),
        eps: fc.eps.clone(),
        s: fc.s.clone(),
        n_phi: fc.n_phi,
        cells: fc.cells,
        refine: fc.refine,
        ode_tol: fc.ode_tol,
    };
    Ok(VerificationReport::new(
        stamp("figure", cfg.seed, &fc.tolerances, grid),
        rows,
    ))
}
