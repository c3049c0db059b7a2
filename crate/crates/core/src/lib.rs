//! Numerical laboratory for Killing-field deformations of circle-invariant
//! metrics.
//!
//! * [`chart`]: metrics in coordinates and their curvature (Christoffel
//!   symbols, Ricci, scalar curvature, Laplacians, boundary mean curvature).
//! * [`models`]: profile, cap, doubly-warped and Berger metrics with closed
//!   forms for their curvature and Killing data.
//! * [`killing`]: first variation of scalar curvature along `(α, β)`
//!   deformations, the Killing estimate and conformal bumps.
//! * [`flow`]: the deformation path `P_ε` of profile metrics.
//! * [`submersion`]: canonical variations and mean curvature of boundaries.
//! * [`embed`]: surfaces of revolution and mesh export.

pub mod chart;
pub mod embed;
pub mod expr;
pub mod flow;
pub mod jet;
pub mod killing;
pub mod models;
pub mod ode;
pub mod submersion;

pub use chart::{
    coordinate_mean_curvature, jet1_compare, laplacian, scal, scalar_curvature, ChartError,
    ChartMetric, Coord, CurvatureReport, Jet1Report, Method, ScalarField, Side,
};
pub use embed::{
    embed_profile, export_mesh, figure_panels, EmbedError, EmbedOptions, EmbeddingProfile,
};
pub use expr::{Expr, Plateau, SmoothStep};
pub use flow::{FlowError, FlowField, FlowSample, FlowSpec};
pub use jet::{Jet1, Jet4, Real};
pub use killing::{DeformFn, DeformationParams, KillingError};
pub use models::{
    berger_model, cap_metric, doubly_warped, flat_cylinder, flat_disk, round_sphere, CapParams,
    DoublyWarpedMetric, InvariantModel, KillingData, ModelError, ProfileKind, ProfileMetric,
};
pub use submersion::{SubmersionError, SubmersionModel};
