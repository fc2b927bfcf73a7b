use num_complex::Complex64;
use num_traits::Zero;

use super::mobius::MobiusMap;
use super::rational::RationalFunction;
use super::{RatfunError, SpherePoint, POINT_TOL};

/// Local parameter `k` near an essential point: `k = z` at infinity,
/// `k = 1/(z - p)` at a finite point `p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LocalParameter {
    AtInfinity,
    At(Complex64),
}

impl LocalParameter {
    pub fn for_point(p: SpherePoint) -> Self {
        match p {
            SpherePoint::Infinity => LocalParameter::AtInfinity,
            SpherePoint::Finite(z) => LocalParameter::At(z),
        }
    }

    pub fn center(&self) -> SpherePoint {
        match self {
            LocalParameter::AtInfinity => SpherePoint::Infinity,
            LocalParameter::At(p) => SpherePoint::Finite(*p),
        }
    }

    /// `k(z)`; `None` at the center, where `k` is infinite.
    pub fn value(&self, z: SpherePoint) -> Option<Complex64> {
        match (self, z) {
            (LocalParameter::AtInfinity, SpherePoint::Finite(z)) => Some(z),
            (LocalParameter::AtInfinity, SpherePoint::Infinity) => None,
            (LocalParameter::At(_), SpherePoint::Infinity) => Some(Complex64::zero()),
            (LocalParameter::At(p), SpherePoint::Finite(z)) => {
                if (z - p).norm() <= POINT_TOL {
                    None
                } else {
                    Some(1.0 / (z - p))
                }
            }
        }
    }

    /// `k` as a rational function of `z`.
    pub fn as_function(&self) -> RationalFunction {
        match self {
            LocalParameter::AtInfinity => {
                RationalFunction::from_polynomial(super::Polynomial::identity())
            }
            LocalParameter::At(p) => RationalFunction::simple_pole(*p),
        }
    }

    /// Whether `k(m(z)) = -k(z)` identically.
    pub fn is_negated_by(&self, m: &MobiusMap, tol: f64) -> bool {
        if m.conjugating {
            return false;
        }
        let target = match self {
            // z -> -z
            LocalParameter::AtInfinity => MobiusMap::negation(),
            // z -> 2p - z
            LocalParameter::At(p) => MobiusMap::new(
                Complex64::new(-1.0, 0.0),
                2.0 * p,
                Complex64::zero(),
                Complex64::new(1.0, 0.0),
                false,
            ),
        };
        m.same_map(&target, tol)
    }

    /// Whether `k(τ(z)) = conj(k(z))` for the antiholomorphic `τ`.
    pub fn is_conjugated_by(&self, m: &MobiusMap, tol: f64) -> bool {
        if !m.conjugating {
            return false;
        }
        let target = match self {
            LocalParameter::AtInfinity => MobiusMap::conjugation(),
            // 1/(τz - p) = conj(1/(z - p))  <=>  τz = conj(z) - conj(p) + p
            LocalParameter::At(p) => MobiusMap::new(
                Complex64::new(1.0, 0.0),
                p - p.conj(),
                Complex64::zero(),
                Complex64::new(1.0, 0.0),
                true,
            ),
        };
        m.same_map(&target, tol)
    }
}

/// A meromorphic 1-form `R(z) dz` on a rational component, written in the
/// affine chart. Behavior at infinity follows from degree bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalOneForm {
    coefficient: RationalFunction,
}

impl RationalOneForm {
    pub fn new(coefficient: RationalFunction) -> Self {
        Self { coefficient }
    }

    pub fn coefficient(&self) -> &RationalFunction {
        &self.coefficient
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self::new(self.coefficient.scaled(s))
    }

    pub fn add(&self, other: &RationalOneForm) -> Self {
        Self::new(self.coefficient.add(&other.coefficient))
    }

    /// Multiplies the form by a rational function.
    pub fn times(&self, f: &RationalFunction) -> Self {
        Self::new(self.coefficient.mul(f))
    }

    /// Residue at a recorded pole or at infinity.
    pub fn residue(&self, p: SpherePoint) -> Result<Complex64, RatfunError> {
        match p {
            SpherePoint::Infinity => Ok(self.residue_at_infinity()),
            SpherePoint::Finite(z) => {
                let (m, coeffs) = self
                    .coefficient
                    .laurent_at(z, self.coefficient.pole_order(z, POINT_TOL) as usize);
                if m == 0 {
                    return Err(RatfunError::NotAPole(p));
                }
                Ok(coeffs[m as usize - 1])
            }
        }
    }

    /// Residue, or zero at points where the form has no recorded pole.
    pub fn residue_or_zero(&self, p: SpherePoint) -> Complex64 {
        self.residue(p).unwrap_or_default()
    }

    /// `-(coefficient of z^-1)` at infinity, read off the remainder of
    /// `N / D` (monic `D`).
    fn residue_at_infinity(&self) -> Complex64 {
        let f = &self.coefficient;
        if f.is_zero() || f.poles().is_empty() {
            return Complex64::zero();
        }
        let den = f.denominator();
        let dd = den.degree().unwrap_or(0);
        let (_, rem) = f.numerator().div_rem(&den);
        -f.scale() * rem.coeff(dd - 1)
    }

    pub fn finite_residues(&self) -> Vec<(Complex64, Complex64)> {
        self.coefficient
            .poles()
            .iter()
            .map(|p| {
                let res = self
                    .residue(SpherePoint::Finite(p.location))
                    .expect("recorded pole");
                (p.location, res)
            })
            .collect()
    }

    /// Sum of all residues on the sphere, infinity included.
    pub fn residue_sum(&self) -> Complex64 {
        self.finite_residues()
            .iter()
            .map(|(_, r)| r)
            .sum::<Complex64>()
            + self.residue_at_infinity()
    }

    /// Largest residue magnitude over all poles, infinity included.
    pub fn max_residue(&self) -> f64 {
        self.finite_residues()
            .iter()
            .map(|(_, r)| r.norm())
            .fold(self.residue_at_infinity().norm(), f64::max)
    }

    /// Order of the form at a point: at infinity this is the order of the
    /// coefficient minus two (`dz = -dw / w^2`).
    pub fn order_at(&self, p: SpherePoint, tol: f64) -> Option<i64> {
        let ord = self.coefficient.order_at(p, tol)?;
        Some(match p {
            SpherePoint::Infinity => ord - 2,
            SpherePoint::Finite(_) => ord,
        })
    }

    /// Coefficient-wise conjugate form.
    pub fn conj(&self) -> Self {
        Self::new(self.coefficient.conj())
    }

    /// Pullback along a Möbius map.
    ///
    /// Holomorphic `m`: the usual `R(m(w)) m'(w) dw`. Antiholomorphic
    /// `τ(w) = m(conj w)`: returns the holomorphic form `conj(τ^* ω)`, which is
    /// the pullback of the coefficient-conjugated form along the map with
    /// conjugated matrix. With this convention `τ^*Ω = conj(Ω)` reads
    /// `pullback(τ, Ω) = Ω`, and pulling back twice along an involution is
    /// the identity in both cases.
    pub fn pullback(&self, m: &MobiusMap) -> Self {
        if m.conjugating {
            let hol = m.conj_coefficients().holomorphic_part();
            return self.conj().pullback(&hol);
        }
        let composed = self.coefficient.compose_with_shift(m, 2);
        Self::new(composed.scaled(m.det()))
    }

    /// The constant `ε²` in `Ω = (ε²/k + O(1/k²)) d(1/k)` near the center of
    /// the local parameter.
    ///
    /// At infinity with `k = z`, `d(1/k) = -dz/z²` so `R(z) = -ε² z^-3 + ...`
    /// and `ε² = -lim z³ R(z)`. At a finite `p` with `k = 1/(z - p)`,
    /// `d(1/k) = dz` so `R(z) = ε² (z - p) + ...` and `ε² = R'(p)`; this finite
    /// case is fixed by the same substitution rule and has no worked example.
    pub fn leading_coefficient_eps2(
        &self,
        k: LocalParameter,
        tol: f64,
    ) -> Result<Complex64, RatfunError> {
        let center = k.center();
        let found = self.order_at(center, tol);
        if found != Some(1) {
            return Err(RatfunError::WrongVanishingOrder {
                point: center,
                expected: 1,
                found: found.map_or_else(|| "identically zero".to_string(), |o| o.to_string()),
            });
        }
        match k {
            LocalParameter::AtInfinity => {
                let (top, coeffs) = self.coefficient.laurent_at_infinity(4);
                // coefficient of z^-3 sits at index top + 3
                let idx = (top + 3) as usize;
                Ok(-coeffs[idx])
            }
            LocalParameter::At(p) => {
                let (m, coeffs) = self.coefficient.laurent_at(p, 2);
                debug_assert_eq!(m, 0);
                Ok(coeffs[1])
            }
        }
    }
}
