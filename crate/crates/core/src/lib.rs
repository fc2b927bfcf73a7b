//! Baker–Akhiezer sections over nodal spectral curves with rational
//! components, and the orthogonal curvilinear coordinates they define.
//!
//! The crate is layered bottom-up:
//!
//! * [`ratfun`]: exact complex rational functions and 1-forms on the sphere,
//!   residues, Laurent data and Möbius maps;
//! * [`curve`]: the declarative spectral-data model, its JSON file format
//!   and all structural checks that need no solve;
//! * [`basolver`]: the linear system fixing the section at a flow point,
//!   its analytic derivatives, and the residue forms `ω_ij`;
//! * [`verify`]: coordinates, metric data and numerical verdicts collected
//!   over grids of flow points.

pub mod basolver;
pub mod curve;
pub mod datasets;
pub mod ratfun;
pub mod verify;

pub use num_complex::Complex64;

/// Global numeric thresholds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Two points closer than this coincide.
    pub point: f64,
    /// Residual threshold for exact identities checked on spectral data.
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            point: ratfun::POINT_TOL,
            residual: ratfun::RESIDUAL_TOL,
        }
    }
}
