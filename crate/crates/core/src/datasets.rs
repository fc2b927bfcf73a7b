//! Bundled spectral data.
//!
//! Three two-dimensional instances on a pair of spheres glued at two points,
//! plus a one-dimensional instance on a single sphere.

use crate::curve::{parse_spectral_data, SpectralData};

/// Two spheres glued at `±i`; both essential points on the first, both
/// `Q` points on the second. `λ = μ = 1`, `s = 4`.
pub const EXAMPLE1: &str = include_str!("../data/example1.bacurve");
/// As [`EXAMPLE1`] with two normalization points `±i/2` and a ψ pole on each
/// sphere. `λ = μ = 1`, `s = 9/16`.
pub const EXAMPLE2: &str = include_str!("../data/example2.bacurve");
/// Two spheres glued at `±1` with `P_j = ∞`, `Q_j = 0` on sphere `j`.
/// `λ = 1`, `μ = 5/3`, `r = 2`, `γ = 2/3`, `s = 1/9`.
pub const EXAMPLE3: &str = include_str!("../data/example3.bacurve");
/// One sphere, no nodes, `ψ = e^{u(z - 1)}`.
pub const MINIMAL: &str = include_str!("../data/minimal.bacurve");

pub const ALL: [(&str, &str); 4] = [
    ("example1", EXAMPLE1),
    ("example2", EXAMPLE2),
    ("example3", EXAMPLE3),
    ("minimal", MINIMAL),
];

/// Parses a bundled dataset by name.
pub fn load(name: &str) -> Option<SpectralData> {
    ALL.iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| parse_spectral_data(text).expect("bundled data parses"))
}
