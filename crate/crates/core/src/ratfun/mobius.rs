use num_complex::Complex64;
use num_traits::{One, Zero};

use super::{SpherePoint, POINT_TOL};

/// `z -> (a z + b) / (c z + d)`, optionally precomposed with complex
/// conjugation (`z -> (a conj(z) + b) / (c conj(z) + d)`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobiusMap {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
    pub conjugating: bool,
}

impl MobiusMap {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64, conjugating: bool) -> Self {
        Self {
            a,
            b,
            c,
            d,
            conjugating,
        }
    }

    pub fn identity() -> Self {
        Self::new(
            Complex64::one(),
            Complex64::zero(),
            Complex64::zero(),
            Complex64::one(),
            false,
        )
    }

    /// `z -> -z`.
    pub fn negation() -> Self {
        Self::new(
            -Complex64::one(),
            Complex64::zero(),
            Complex64::zero(),
            Complex64::one(),
            false,
        )
    }

    /// `z -> conj(z)`.
    pub fn conjugation() -> Self {
        Self {
            conjugating: true,
            ..Self::identity()
        }
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn is_degenerate(&self) -> bool {
        let scale = self.a.norm() * self.d.norm() + self.b.norm() * self.c.norm();
        self.det().norm() <= POINT_TOL * scale.max(f64::MIN_POSITIVE)
    }

    /// The holomorphic map with the same matrix.
    pub fn holomorphic_part(&self) -> Self {
        Self {
            conjugating: false,
            ..*self
        }
    }

    /// Matrix with conjugated entries, same conjugation flag.
    pub fn conj_coefficients(&self) -> Self {
        Self {
            a: self.a.conj(),
            b: self.b.conj(),
            c: self.c.conj(),
            d: self.d.conj(),
            conjugating: self.conjugating,
        }
    }

    pub fn apply(&self, z: SpherePoint) -> SpherePoint {
        let z = if self.conjugating { z.conj() } else { z };
        self.apply_holomorphic(z)
    }

    fn apply_holomorphic(&self, z: SpherePoint) -> SpherePoint {
        match z {
            SpherePoint::Infinity => {
                if self.c.is_zero() {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite(self.a / self.c)
                }
            }
            SpherePoint::Finite(z) => {
                let den = self.c * z + self.d;
                if den.is_zero() {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MobiusMap) -> MobiusMap {
        // if self conjugates, it sees the conjugated matrix of `other`
        let o = if self.conjugating {
            other.conj_coefficients()
        } else {
            *other
        };
        MobiusMap {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
            conjugating: self.conjugating != other.conjugating,
        }
    }

    /// Whether the matrix is a nonzero multiple of the identity and the
    /// map is holomorphic, i.e. the map is the identity of the sphere.
    pub fn is_identity(&self, tol: f64) -> bool {
        if self.conjugating {
            return false;
        }
        let scale = self.a.norm().max(self.d.norm()).max(f64::MIN_POSITIVE);
        self.b.norm() <= tol * scale
            && self.c.norm() <= tol * scale
            && (self.a - self.d).norm() <= tol * scale
    }

    /// Whether `m ∘ m = id`.
    pub fn is_involution(&self, tol: f64) -> bool {
        self.compose(self).is_identity(tol)
    }

    /// Whether two maps define the same transformation (matrices
    /// proportional, same conjugation flag).
    pub fn same_map(&self, other: &MobiusMap, tol: f64) -> bool {
        if self.conjugating != other.conjugating {
            return false;
        }
        let x = [self.a, self.b, self.c, self.d];
        let y = [other.a, other.b, other.c, other.d];
        // pick the largest entry of self to fix the ratio
        let (k, _) = x
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("four entries");
        if y[k].is_zero() {
            return false;
        }
        let ratio = x[k] / y[k];
        let scale = x[k].norm();
        x.iter()
            .zip(y.iter())
            .all(|(xi, yi)| (xi - ratio * yi).norm() <= tol * scale)
    }

    /// Derivative of the holomorphic part, `det / (c z + d)^2`.
    pub fn derivative_at(&self, z: Complex64) -> Complex64 {
        let den = self.c * z + self.d;
        self.det() / (den * den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fin(re: f64, im: f64) -> SpherePoint {
        SpherePoint::Finite(Complex64::new(re, im))
    }

    #[test]
    fn negation_maps_i_to_minus_i() {
        assert_eq!(MobiusMap::negation().apply(fin(0.0, 1.0)), fin(0.0, -1.0));
    }

    #[test]
    fn negation_fixes_infinity() {
        assert_eq!(
            MobiusMap::negation().apply(SpherePoint::Infinity),
            SpherePoint::Infinity
        );
    }

    #[test]
    fn conjugation_reflects() {
        assert_eq!(
            MobiusMap::conjugation().apply(fin(1.0, 2.0)),
            fin(1.0, -2.0)
        );
    }

    #[test]
    fn projective_infinity_handling() {
        // z -> 1/z swaps 0 and infinity
        let inv = MobiusMap::new(
            Complex64::zero(),
            Complex64::one(),
            Complex64::one(),
            Complex64::zero(),
            false,
        );
        assert_eq!(inv.apply(SpherePoint::Infinity), fin(0.0, 0.0));
        assert_eq!(inv.apply(fin(0.0, 0.0)), SpherePoint::Infinity);
        assert!(inv.is_involution(1e-12));
    }

    #[test]
    fn composition_matches_pointwise() {
        let m = MobiusMap::new(
            Complex64::new(1.0, 1.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, 0.3),
            Complex64::new(2.0, 0.0),
            true,
        );
        let n = MobiusMap::new(
            Complex64::new(0.2, 0.0),
            Complex64::new(1.0, -1.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            false,
        );
        let z = fin(0.7, -0.4);
        let lhs = m.compose(&n).apply(z);
        let rhs = m.apply(n.apply(z));
        assert!(lhs.distance(&rhs) < 1e-12);
    }

    #[test]
    fn conjugation_is_involution_but_not_identity() {
        let t = MobiusMap::conjugation();
        assert!(!t.is_identity(1e-12));
        assert!(t.is_involution(1e-12));
    }
}
