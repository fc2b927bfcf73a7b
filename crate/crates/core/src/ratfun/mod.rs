//! Exact complex rational calculus on the Riemann sphere.
//!
//! Rational functions keep their denominators factored as
//! `(root, multiplicity)` pairs. Laurent coefficients and residues are
//! therefore obtained by polynomial algebra only: Taylor shifts of the
//! numerator and truncated power series of the remaining factors. No
//! root-finding happens anywhere in this module.

mod form;
mod mobius;
mod poly;
mod rational;

pub use form::{LocalParameter, RationalOneForm};
pub use mobius::MobiusMap;
pub use poly::Polynomial;
pub use rational::{Pole, RationalFunction};

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default point-coincidence tolerance.
pub const POINT_TOL: f64 = 1e-9;

/// Default tolerance for residual checks.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RatfunError {
    #[error("evaluation at pole {0}")]
    PoleEvaluation(SpherePoint),
    #[error("value at infinity is infinite (numerator degree exceeds denominator degree)")]
    InfiniteValue,
    #[error("{0} is not a pole of the form")]
    NotAPole(SpherePoint),
    #[error("wrong vanishing order at {point}: expected {expected}, found {found}")]
    WrongVanishingOrder {
        point: SpherePoint,
        expected: i64,
        found: String,
    },
    #[error("pole locations {0} and {1} coincide")]
    DuplicatePole(Complex64, Complex64),
    #[error("pole order must be positive")]
    ZeroOrderPole,
    #[error("non-finite coefficient")]
    NonFinite,
}

/// A point of `C ∪ {∞}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub fn finite(re: f64, im: f64) -> Self {
        SpherePoint::Finite(Complex64::new(re, im))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    pub fn as_finite(&self) -> Option<Complex64> {
        match self {
            SpherePoint::Finite(z) => Some(*z),
            SpherePoint::Infinity => None,
        }
    }

    pub fn conj(&self) -> Self {
        match self {
            SpherePoint::Finite(z) => SpherePoint::Finite(z.conj()),
            SpherePoint::Infinity => SpherePoint::Infinity,
        }
    }

    /// Euclidean distance between finite points, `0` between two
    /// infinities, `+inf` otherwise.
    pub fn distance(&self, other: &SpherePoint) -> f64 {
        match (self, other) {
            (SpherePoint::Finite(a), SpherePoint::Finite(b)) => (a - b).norm(),
            (SpherePoint::Infinity, SpherePoint::Infinity) => 0.0,
            _ => f64::INFINITY,
        }
    }

    pub fn coincides(&self, other: &SpherePoint, tol: f64) -> bool {
        self.distance(other) <= tol
    }

    pub fn is_finite_value(&self) -> bool {
        match self {
            SpherePoint::Finite(z) => z.re.is_finite() && z.im.is_finite(),
            SpherePoint::Infinity => true,
        }
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpherePoint::Finite(z) => write!(f, "{z}"),
            SpherePoint::Infinity => write!(f, "inf"),
        }
    }
}

impl From<Complex64> for SpherePoint {
    fn from(z: Complex64) -> Self {
        SpherePoint::Finite(z)
    }
}

/// Truncated power-series helpers in a local variable `t`.
pub(crate) mod series {
    use num_complex::Complex64;
    use num_traits::Zero;

    pub fn mul(a: &[Complex64], b: &[Complex64], len: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::zero(); len];
        for (i, &x) in a.iter().enumerate().take(len) {
            if x.is_zero() {
                continue;
            }
            for (j, &y) in b.iter().enumerate().take(len - i) {
                out[i + j] += x * y;
            }
        }
        out
    }

    /// Series of `(c + t)^(-m)`.
    pub fn inverse_linear_power(c: Complex64, m: u32, len: usize) -> Vec<Complex64> {
        let inv = 1.0 / c;
        let mut base = Vec::with_capacity(len);
        let mut term = inv;
        for _ in 0..len {
            base.push(term);
            term *= -inv;
        }
        let mut out = vec![Complex64::zero(); len];
        if len > 0 {
            out[0] = Complex64::new(1.0, 0.0);
        }
        for _ in 0..m {
            out = mul(&out, &base, len);
        }
        out
    }

    /// Series of `a(t) / b(t)` with `b(0) != 0`.
    pub fn div(a: &[Complex64], b: &[Complex64], len: usize) -> Vec<Complex64> {
        let b0 = b[0];
        let mut out = vec![Complex64::zero(); len];
        for k in 0..len {
            let mut acc = a.get(k).copied().unwrap_or_default();
            for j in 1..=k {
                if let Some(&bj) = b.get(j) {
                    acc -= bj * out[k - j];
                }
            }
            out[k] = acc / b0;
        }
        out
    }
}
