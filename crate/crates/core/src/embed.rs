//! Surfaces of revolution in ℝ³ isometric to flowed profile metrics.
//!
//! A profile `E dr² + F² dφ²` with arclength `dρ = √E dr` embeds as
//! `(F cos φ, F sin φ, z)` with `z' = √(1 − F_ρ²)`, which needs `|F_ρ| ≤ 1`.
//! Arclength and height are integrated per cell with 4-point Gauss, whose
//! nodes never touch a pole, so the `ε = 0` flow can be embedded even though
//! its nodes at fixed points are undefined.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::flow::{refined_cells, FlowError, FlowSpec};

/// Slack on `|F_ρ| ≤ 1` before a profile is declared non-embeddable.
pub const EMBED_SLACK: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("profile is not embeddable on r ∈ [{lo}, {hi}]: |dF/dρ| = {f_rho}")]
    NotEmbeddable { lo: f64, hi: f64, f_rho: f64 },
    #[error("invalid embedding input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EmbedSample {
    pub r: f64,
    pub rho: f64,
    pub f: f64,
    pub z: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConeReport {
    pub pole: f64,
    /// Signed limit of `dF/dρ` approaching the pole from inside.
    pub f_rho_limit: f64,
    /// `|F_ρ|` at the pole; 1 for a smooth point, less for a cone.
    pub cone_factor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddingProfile {
    pub s: f64,
    pub eps: f64,
    pub samples: Vec<EmbedSample>,
    pub cone_report: Vec<ConeReport>,
    pub embeddable: bool,
    /// `max |(ΔF² + Δz²)/Δρ² − 1|` over consecutive samples.
    pub isometry_residual: f64,
}

/// Resolution of the embedding quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EmbedOptions {
    pub cells: usize,
    /// Subdivision of cells touching a pole.
    pub refine: usize,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        Self {
            cells: 2048,
            refine: 4,
        }
    }
}

const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_86),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_86),
];

struct Cell {
    d_rho: f64,
    d_z: f64,
    max_f_rho: f64,
}

fn integrate_cell(spec: &FlowSpec, s: f64, lo: f64, hi: f64) -> Result<Cell, FlowError> {
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let mut cell = Cell {
        d_rho: 0.0,
        d_z: 0.0,
        max_f_rho: 0.0,
    };
    for (x, w) in GAUSS4 {
        let r = mid + half * x;
        let smp = spec.reconstruct(r, s, &spec.node_at(r, s)?);
        cell.d_rho += w * half * smp.e.sqrt();
        cell.d_z += w * half * (smp.e - smp.f_r * smp.f_r).max(0.0).sqrt();
        cell.max_f_rho = cell.max_f_rho.max(smp.f_rho.abs());
    }
    Ok(cell)
}

/// Embeds the flow of `spec` at time `s`.
pub fn embed_profile(
    spec: &FlowSpec,
    s: f64,
    opts: EmbedOptions,
) -> Result<EmbeddingProfile, EmbedError> {
    if opts.cells == 0 || !(s >= 0.0) {
        return Err(EmbedError::Invalid(format!(
            "cells = {}, s = {s}",
            opts.cells
        )));
    }
    let model = &spec.model;
    let edges = refined_cells(model, opts.cells, opts.refine);

    let boundary: Vec<(f64, f64)> = edges
        .par_iter()
        .map(|&r| {
            if model.is_pole(r) {
                return Ok((0.0, f64::NAN));
            }
            let smp = spec.reconstruct(r, s, &spec.node_at(r, s)?);
            Ok((smp.f_reconstructed, smp.f_rho))
        })
        .collect::<Result<_, FlowError>>()?;
    let cells: Vec<Cell> = edges
        .par_windows(2)
        .map(|w| integrate_cell(spec, s, w[0], w[1]))
        .collect::<Result<_, FlowError>>()?;

    for (k, c) in cells.iter().enumerate() {
        let at_edges = boundary[k].1.abs().max(boundary[k + 1].1.abs());
        let worst = if at_edges.is_nan() {
            c.max_f_rho
        } else {
            c.max_f_rho.max(at_edges)
        };
        if worst > 1.0 + EMBED_SLACK {
            return Err(EmbedError::NotEmbeddable {
                lo: edges[k],
                hi: edges[k + 1],
                f_rho: worst,
            });
        }
    }

    let mut samples = Vec::with_capacity(edges.len());
    let (mut rho, mut z) = (0.0, 0.0);
    samples.push(EmbedSample {
        r: edges[0],
        rho,
        f: boundary[0].0,
        z,
    });
    for (k, c) in cells.iter().enumerate() {
        rho += c.d_rho;
        z += c.d_z;
        samples.push(EmbedSample {
            r: edges[k + 1],
            rho,
            f: boundary[k + 1].0,
            z,
        });
    }
    let isometry_residual = samples.windows(2).fold(0.0_f64, |m, w| {
        let (df, dz, dr) = (w[1].f - w[0].f, w[1].z - w[0].z, w[1].rho - w[0].rho);
        m.max(((df * df + dz * dz) / (dr * dr) - 1.0).abs())
    });

    let cone_report = model
        .poles()
        .into_iter()
        .map(|p| {
            let c = spec.cone_factor(p, s)?;
            let sign = if p < 0.5 * model.length { 1.0 } else { -1.0 };
            Ok(ConeReport {
                pole: p,
                f_rho_limit: sign * c,
                cone_factor: c,
            })
        })
        .collect::<Result<_, FlowError>>()?;

    Ok(EmbeddingProfile {
        s,
        eps: spec.eps,
        samples,
        cone_report,
        embeddable: true,
        isometry_residual,
    })
}

/// Vertices and faces of the surface of revolution. Rings with `f = 0`
/// collapse to a single apex joined to the next ring by a triangle fan.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    /// One-based vertex indices, as in OBJ.
    pub faces: Vec<Vec<usize>>,
    /// First vertex of each sample's ring and whether it is an apex.
    pub rings: Vec<(usize, bool)>,
}

pub fn build_mesh(profile: &EmbeddingProfile, n_phi: usize) -> Result<Mesh, EmbedError> {
    if n_phi < 3 {
        return Err(EmbedError::Invalid(format!("n_phi = {n_phi}")));
    }
    if !profile.embeddable {
        return Err(EmbedError::Invalid("profile is not embeddable".into()));
    }
    let mut vertices = Vec::new();
    let mut rings = Vec::new();
    for smp in &profile.samples {
        let apex = smp.f == 0.0;
        rings.push((vertices.len() + 1, apex));
        if apex {
            vertices.push([0.0, 0.0, smp.z]);
        } else {
            for j in 0..n_phi {
                let phi = std::f64::consts::TAU * j as f64 / n_phi as f64;
                vertices.push([smp.f * phi.cos(), smp.f * phi.sin(), smp.z]);
            }
        }
    }
    let mut faces = Vec::new();
    for w in rings.windows(2) {
        let ((a, a_apex), (b, b_apex)) = (w[0], w[1]);
        for j in 0..n_phi {
            let k = (j + 1) % n_phi;
            match (a_apex, b_apex) {
                (false, false) => faces.push(vec![a + j, a + k, b + k, b + j]),
                (true, false) => faces.push(vec![a, b + k, b + j]),
                (false, true) => faces.push(vec![a + j, a + k, b]),
                (true, true) => {
                    return Err(EmbedError::Invalid("two consecutive apex samples".into()))
                }
            }
        }
    }
    Ok(Mesh {
        vertices,
        faces,
        rings,
    })
}

impl Mesh {
    /// Polygonal circumference of the ring of sample `k`.
    pub fn ring_circumference(&self, k: usize, n_phi: usize) -> f64 {
        let (start, apex) = self.rings[k];
        if apex {
            return 0.0;
        }
        (0..n_phi)
            .map(|j| {
                let p = self.vertices[start - 1 + j];
                let q = self.vertices[start - 1 + (j + 1) % n_phi];
                ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
            })
            .sum()
    }

    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            writeln!(out, "v {:.9} {:.9} {:.9}", v[0], v[1], v[2]).unwrap();
        }
        for f in &self.faces {
            out.push('f');
            for i in f {
                write!(out, " {i}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Worst relative deviation between mesh ring circumferences and `2πF`.
pub fn circumference_deviation(profile: &EmbeddingProfile, mesh: &Mesh, n_phi: usize) -> f64 {
    profile
        .samples
        .iter()
        .enumerate()
        .filter(|(_, smp)| smp.f > 0.0)
        .map(|(k, smp)| {
            (mesh.ring_circumference(k, n_phi) / (std::f64::consts::TAU * smp.f) - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

pub fn profile_csv(profile: &EmbeddingProfile) -> String {
    let mut out = String::from("s,rho,f,z\n");
    for smp in &profile.samples {
        writeln!(
            out,
            "{},{:.12},{:.12},{:.12}",
            profile.s, smp.rho, smp.f, smp.z
        )
        .unwrap();
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<(), EmbedError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| EmbedError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| EmbedError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `path` (OBJ) and the profile CSV next to it; returns the CSV path.
pub fn export_mesh(
    profile: &EmbeddingProfile,
    n_phi: usize,
    path: &Path,
) -> Result<PathBuf, EmbedError> {
    let mesh = build_mesh(profile, n_phi)?;
    let csv_path = path.with_extension("csv");
    write_file(path, &mesh.to_obj())?;
    write_file(&csv_path, &profile_csv(profile))?;
    Ok(csv_path)
}

/// One panel of the deformation figure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Panel {
    pub eps: f64,
    pub s: f64,
    pub obj: PathBuf,
    pub csv: PathBuf,
    pub cone_factors: Vec<f64>,
    pub isometry_residual: f64,
    pub circumference_deviation: f64,
}

/// Relative location of a panel: `fig_deform/eps{ε}/s{s}.obj`.
pub fn panel_path(eps: f64, s: f64) -> PathBuf {
    PathBuf::from("fig_deform")
        .join(format!("eps{eps}"))
        .join(format!("s{s}.obj"))
}

/// Embeds and exports the flow of `spec.model` for every `(ε, s)` pair.
pub fn figure_panels(
    base: &FlowSpec,
    eps_list: &[f64],
    s_list: &[f64],
    n_phi: usize,
    opts: EmbedOptions,
    out_dir: &Path,
) -> Result<Vec<Panel>, EmbedError> {
    let mut panels = Vec::new();
    for &eps in eps_list {
        let spec = FlowSpec::new(base.model.clone(), eps, base.tol)?;
        for &s in s_list {
            let profile = embed_profile(&spec, s, opts)?;
            let mesh = build_mesh(&profile, n_phi)?;
            let obj = out_dir.join(panel_path(eps, s));
            let csv = export_mesh(&profile, n_phi, &obj)?;
            panels.push(Panel {
                eps,
                s,
                obj,
                csv,
                cone_factors: profile.cone_report.iter().map(|c| c.cone_factor).collect(),
                isometry_residual: profile.isometry_residual,
                circumference_deviation: circumference_deviation(&profile, &mesh, n_phi),
            });
        }
    }
    Ok(panels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{round_sphere, ProfileKind, ProfileMetric};

    fn sphere_spec(eps: f64) -> FlowSpec {
        FlowSpec::new(round_sphere(1.0).unwrap(), eps, 1e-10).unwrap()
    }

    #[test]
    fn identity_flow_gives_the_unit_sphere() {
        let p = embed_profile(
            &sphere_spec(0.0),
            0.0,
            EmbedOptions {
                cells: 256,
                refine: 2,
            },
        )
        .unwrap();
        let last = p.samples.last().unwrap();
        assert!((last.rho - std::f64::consts::PI).abs() < 1e-12);
        assert!((last.z - 2.0).abs() < 1e-12);
        for c in &p.cone_report {
            assert!((c.cone_factor - 1.0).abs() < 1e-9);
        }
        let mesh = build_mesh(&p, 64).unwrap();
        assert_eq!(mesh.faces.len(), 64 * (p.samples.len() - 1));
        let dev = mesh
            .vertices
            .iter()
            .map(|v| ((v[0] * v[0] + v[1] * v[1] + (v[2] - 1.0).powi(2)).sqrt() - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(dev < 1e-6, "{dev}");
        assert!(circumference_deviation(&p, &mesh, 64) < 1e-3);
    }

    #[test]
    fn zero_eps_develops_cones() {
        let spec = sphere_spec(0.0);
        for s in [0.25, 0.5, 1.0, 1.5] {
            let p = embed_profile(
                &spec,
                s,
                EmbedOptions {
                    cells: 128,
                    refine: 2,
                },
            )
            .unwrap();
            for c in &p.cone_report {
                assert!(
                    (c.cone_factor - (-s / 2.0).exp()).abs() < 1e-6,
                    "s={s}: {c:?}"
                );
            }
            assert!(p.cone_report[1].f_rho_limit < 0.0);
        }
    }

    #[test]
    fn positive_eps_keeps_poles_smooth() {
        let p = embed_profile(&sphere_spec(1.0), 1.0, EmbedOptions::default()).unwrap();
        for c in &p.cone_report {
            assert!((c.cone_factor - 1.0).abs() < 1e-3, "{c:?}");
        }
        assert!(p.isometry_residual < 1e-6, "{}", p.isometry_residual);
    }

    #[test]
    fn steep_profiles_are_rejected() {
        // F' = 2 at the tip: a disk with cone angle 4π
        let m =
            ProfileMetric::with_cone(ProfileKind::Disk, 1.0, "2*t".parse().unwrap(), 2.0).unwrap();
        let spec = FlowSpec::new(m, 1.0, 1e-9).unwrap();
        let err = embed_profile(
            &spec,
            0.0,
            EmbedOptions {
                cells: 32,
                refine: 1,
            },
        )
        .unwrap_err();
        assert!(matches!(err, EmbedError::NotEmbeddable { lo, .. } if lo == 0.0));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.obj");
        assert!(embed_profile(
            &spec,
            0.0,
            EmbedOptions {
                cells: 32,
                refine: 1
            }
        )
        .and_then(|p| export_mesh(&p, 16, &path))
        .is_err());
        assert!(!path.exists());
    }

    #[test]
    fn export_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let opts = EmbedOptions {
            cells: 64,
            refine: 2,
        };
        let a = figure_panels(
            &sphere_spec(1.0),
            &[0.0, 1.0],
            &[0.0, 0.5],
            32,
            opts,
            dir.path(),
        )
        .unwrap();
        assert_eq!(a.len(), 4);
        let first = fs::read(&a[3].obj).unwrap();
        figure_panels(
            &sphere_spec(1.0),
            &[0.0, 1.0],
            &[0.0, 0.5],
            32,
            opts,
            dir.path(),
        )
        .unwrap();
        assert_eq!(first, fs::read(&a[3].obj).unwrap());
        assert!(a[3].obj.ends_with("fig_deform/eps1/s0.5.obj"));
        let csv = fs::read_to_string(&a[0].csv).unwrap();
        assert!(csv.starts_with("s,rho,f,z\n0,0.000000000000,0.000000000000,"));
    }
}
