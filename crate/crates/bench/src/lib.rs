//! Shared fixtures for the criterion benches.

use psclab::flow::uniform_grid;
use psclab::killing::{random_family, DeformationParams};
use psclab::models::{doubly_warped, round_sphere, DoublyWarpedMetric, ProfileMetric};

pub const SEED: u64 = 20_241_016;

pub fn sphere() -> ProfileMetric {
    round_sphere(1.0).expect("unit sphere")
}

pub fn warped() -> DoublyWarpedMetric {
    let e = |s: &str| s.parse().expect("fixture expression");
    doubly_warped(3, (0.0, 3.0), e("2 + sin(t)"), e("1 + 0.1*t"), 0.0).expect("fixture model")
}

pub fn deformations(count: usize) -> Vec<DeformationParams> {
    random_family(SEED, count)
}

pub fn sphere_grid(count: usize) -> Vec<f64> {
    uniform_grid(&sphere(), count, true)
}
