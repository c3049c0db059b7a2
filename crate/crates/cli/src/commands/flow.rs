//! Deformation path of a surface of revolution with scalar-curvature
//! monitoring.

use std::path::{Path, PathBuf};

use psclab::flow::{scal_along_flow, uniform_grid, write_flow_csv, FlowSample, FlowSpec};
use serde::Serialize;

use super::{num, stamp};
use crate::config::ExperimentConfig;
use crate::report::{CheckRow, VerificationReport};
use crate::CliError;

pub const ANCHOR_INTEGRATE: &str =
    "a' = −(ε/(n−1))a/(ua+ε) − ua²/(ua+ε), b' = −(ε/(n−1))b/(ua+ε), a(0) = b(0) = 1";
pub const ANCHOR_MONOTONE: &str = "d/ds scal(P_ε(s)) ≥ 0 and scal > 0 along the path";
pub const ANCHOR_CLOSED_FORM: &str = "ε = 0: a(s) = e^{−s}, b(s) = 1";
pub const ANCHOR_FIXED_POINT: &str = "at fixed points: a(s) = b(s) = exp(−s/(n−1))";

/// Flow CSV location relative to the output directory.
pub fn flow_csv_path(eps: f64) -> PathBuf {
    PathBuf::from("flow").join(format!("eps{}.csv", num(eps)))
}

#[derive(Serialize)]
struct Grid {
    model: String,
    eps: Vec<f64>,
    s: Vec<f64>,
    grid_points: usize,
    include_fixed_points: Option<bool>,
    ode_tol: f64,
}

pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<VerificationReport, CliError> {
    let fc = &cfg.flow;
    fc.validate()?;
    let model = fc.model.spec.profile()?;
    let id = fc.model.id();
    let tol = |k: &str| fc.tolerances[k];
    let mut rows = Vec::new();
    for &eps in &fc.eps {
        let prefix = format!("flow/eps={}", num(eps));
        let spec = match FlowSpec::new(model.clone(), eps, fc.ode_tol) {
            Ok(s) => s,
            Err(e) => {
                rows.push(CheckRow::failed(
                    format!("{prefix}/integrate"),
                    ANCHOR_INTEGRATE,
                    fc.ode_tol,
                    e,
                ));
                continue;
            }
        };
        let with_poles = fc.include_fixed_points.unwrap_or(eps > 0.0);
        let grid = uniform_grid(&model, fc.grid_points, with_poles);
        let samples = match spec.sample_grid(&grid, &fc.s) {
            Ok(s) => s,
            Err(e) => {
                rows.push(CheckRow::failed(
                    format!("{prefix}/integrate"),
                    ANCHOR_INTEGRATE,
                    fc.ode_tol,
                    e,
                ));
                continue;
            }
        };
        let path = out.join(flow_csv_path(eps));
        let mut bytes = Vec::new();
        write_flow_csv(&mut bytes, &samples).expect("in-memory CSV");
        crate::write_file(&path, &bytes)?;

        rows.push(match scal_along_flow(&spec, &grid, &fc.s, tol("monotone")) {
            Ok(r) => {
                let mut row = CheckRow::measured(
                    format!("{prefix}/monotone"),
                    ANCHOR_MONOTONE,
                    (-r.min_slope).max(0.0),
                    tol("monotone"),
                    format!(
                        "{id}: {} nodes × {} times; min scal {:.6}, min d/ds scal {:.3e}, max increase of a or b {:.3e}",
                        grid.len(),
                        fc.s.len(),
                        r.min_scal,
                        r.min_slope,
                        r.max_warp_increase
                    ),
                );
                row.pass &= r.pass;
                row
            }
            Err(e) => CheckRow::failed(format!("{prefix}/monotone"), ANCHOR_MONOTONE, tol("monotone"), e),
        });

        if eps == 0.0 {
            let dev = samples.iter().flatten().fold(0.0_f64, |m, x| {
                m.max((x.a - (-x.s).exp()).abs()).max((x.b - 1.0).abs())
            });
            rows.push(CheckRow::measured(
                format!("{prefix}/closed_form"),
                ANCHOR_CLOSED_FORM,
                dev,
                tol("closed_form"),
                format!("{} samples", grid.len() * fc.s.len()),
            ));
        }
        let poles: Vec<usize> = (0..grid.len())
            .filter(|&k| model.is_pole(grid[k]))
            .collect();
        if !poles.is_empty() {
            rows.push(fixed_point_row(
                &prefix,
                &samples,
                &poles,
                tol("fixed_point"),
            ));
        }
    }
    let grid = Grid {
        model: id,
        eps: fc.eps.clone(),
        s: fc.s.clone(),
        grid_points: fc.grid_points,
        include_fixed_points: fc.include_fixed_points,
        ode_tol: fc.ode_tol,
    };
    Ok(VerificationReport::new(
        stamp("flow", cfg.seed, &fc.tolerances, grid),
        rows,
    ))
}

fn fixed_point_row(
    prefix: &str,
    samples: &[Vec<FlowSample>],
    poles: &[usize],
    tol: f64,
) -> CheckRow {
    // surfaces: n − 1 = 1
    let mut dev = 0.0_f64;
    for row in samples {
        for &k in poles {
            let x = &row[k];
            let want = (-x.s).exp();
            dev = dev.max((x.a - want).abs()).max((x.b - want).abs());
        }
    }
    CheckRow::measured(
        format!("{prefix}/fixed_point"),
        ANCHOR_FIXED_POINT,
        dev,
        tol,
        format!("{} fixed-point nodes", poles.len()),
    )
}
