use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Zero};

use super::mobius::MobiusMap;
use super::poly::Polynomial;
use super::{series, RatfunError, SpherePoint, POINT_TOL};

/// A finite pole with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pole {
    pub location: Complex64,
    pub order: u32,
}

impl Pole {
    pub fn new(location: Complex64, order: u32) -> Self {
        Self { location, order }
    }
}

/// `scale * numerator(z) / prod_k (z - p_k)^(m_k)`.
///
/// Pole locations are pairwise distinct. Whether the numerator vanishes at
/// a pole is not enforced here (products of forms routinely cancel poles);
/// see [`RationalFunction::is_reduced`].
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunction {
    numerator: Polynomial,
    poles: Vec<Pole>,
    scale: Complex64,
}

impl RationalFunction {
    pub fn new(
        numerator: Polynomial,
        poles: Vec<Pole>,
        scale: Complex64,
    ) -> Result<Self, RatfunError> {
        if !scale.re.is_finite() || !scale.im.is_finite() {
            return Err(RatfunError::NonFinite);
        }
        if numerator
            .coeffs()
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(RatfunError::NonFinite);
        }
        for (i, p) in poles.iter().enumerate() {
            if p.order == 0 {
                return Err(RatfunError::ZeroOrderPole);
            }
            if !p.location.re.is_finite() || !p.location.im.is_finite() {
                return Err(RatfunError::NonFinite);
            }
            for q in &poles[..i] {
                if (p.location - q.location).norm() <= POINT_TOL {
                    return Err(RatfunError::DuplicatePole(q.location, p.location));
                }
            }
        }
        Ok(Self {
            numerator,
            poles,
            scale,
        })
    }

    /// Builds from parts, merging coincident pole locations by adding
    /// their orders.
    pub(crate) fn from_parts_merged(
        numerator: Polynomial,
        raw: Vec<Pole>,
        scale: Complex64,
    ) -> Self {
        let mut poles: Vec<Pole> = Vec::with_capacity(raw.len());
        for p in raw {
            match poles
                .iter_mut()
                .find(|q| (q.location - p.location).norm() <= POINT_TOL)
            {
                Some(q) => q.order += p.order,
                None => poles.push(p),
            }
        }
        Self {
            numerator,
            poles,
            scale,
        }
    }

    pub fn constant(c: Complex64) -> Self {
        Self {
            numerator: Polynomial::constant(c),
            poles: Vec::new(),
            scale: Complex64::one(),
        }
    }

    pub fn zero() -> Self {
        Self::constant(Complex64::zero())
    }

    pub fn from_polynomial(p: Polynomial) -> Self {
        Self {
            numerator: p,
            poles: Vec::new(),
            scale: Complex64::one(),
        }
    }

    /// `1 / (z - p)`.
    pub fn simple_pole(p: Complex64) -> Self {
        Self {
            numerator: Polynomial::one(),
            poles: vec![Pole::new(p, 1)],
            scale: Complex64::one(),
        }
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.numerator
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    pub fn scale(&self) -> Complex64 {
        self.scale
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero() || self.scale.is_zero()
    }

    pub fn pole_order(&self, p: Complex64, tol: f64) -> u32 {
        self.poles
            .iter()
            .find(|q| (q.location - p).norm() <= tol)
            .map_or(0, |q| q.order)
    }

    /// Expanded monic denominator.
    pub fn denominator(&self) -> Polynomial {
        Polynomial::from_roots(self.poles.iter().map(|p| (&p.location, p.order)))
    }

    pub fn denominator_degree(&self) -> usize {
        self.poles.iter().map(|p| p.order as usize).sum()
    }

    pub fn eval(&self, z: SpherePoint) -> Result<Complex64, RatfunError> {
        match z {
            SpherePoint::Finite(z0) => {
                if self
                    .poles
                    .iter()
                    .any(|p| (p.location - z0).norm() <= POINT_TOL)
                {
                    return Err(RatfunError::PoleEvaluation(z));
                }
                Ok(self.eval_unchecked(z0))
            }
            SpherePoint::Infinity => {
                if self.is_zero() {
                    return Ok(Complex64::zero());
                }
                let dn = self.numerator.degree().unwrap_or(0);
                let dd = self.denominator_degree();
                match dn.cmp(&dd) {
                    std::cmp::Ordering::Less => Ok(Complex64::zero()),
                    std::cmp::Ordering::Equal => Ok(self.scale * self.numerator.leading()),
                    std::cmp::Ordering::Greater => Err(RatfunError::InfiniteValue),
                }
            }
        }
    }

    /// Evaluates at a finite point without checking for poles.
    pub fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        let mut den = Complex64::one();
        for p in &self.poles {
            den *= (z - p.location).powu(p.order);
        }
        self.scale * self.numerator.eval(z) / den
    }

    /// Laurent coefficients at a finite point `p`.
    ///
    /// Returns `(m, c)` where `m` is the recorded pole order at `p` (zero if
    /// `p` is not a pole) and `c[i]` is the coefficient of `(z - p)^(i - m)`,
    /// for `i < len`.
    pub fn laurent_at(&self, p: Complex64, len: usize) -> (u32, Vec<Complex64>) {
        let m = self.pole_order(p, POINT_TOL);
        let shifted = self.numerator.taylor_shift(p);
        let mut acc: Vec<Complex64> = (0..len).map(|k| shifted.coeff(k) * self.scale).collect();
        for q in &self.poles {
            if (q.location - p).norm() <= POINT_TOL {
                continue;
            }
            let inv = series::inverse_linear_power(p - q.location, q.order, len);
            acc = series::mul(&acc, &inv, len);
        }
        (m, acc)
    }

    /// Laurent coefficients at infinity: `c[i]` multiplies `z^(top - i)`
    /// where `top = deg N - deg D`. Returns `(top, c)`.
    pub fn laurent_at_infinity(&self, len: usize) -> (i64, Vec<Complex64>) {
        let den = self.denominator();
        let dn = self.numerator.degree().unwrap_or(0);
        let dd = den.degree().unwrap_or(0);
        // in w = 1/z: N(z) = z^dn Nrev(w), D(z) = z^dd Drev(w), Drev(0) = 1
        let nrev: Vec<Complex64> = (0..=dn)
            .map(|i| self.numerator.coeff(dn - i) * self.scale)
            .collect();
        let drev: Vec<Complex64> = (0..=dd).map(|i| den.coeff(dd - i)).collect();
        (dn as i64 - dd as i64, series::div(&nrev, &drev, len))
    }

    /// Valuation at a point: positive for zeros, negative for poles, `None`
    /// for the zero function. Vanishing of numerator Taylor coefficients is
    /// decided relative to their magnitude scale with tolerance `tol`.
    pub fn order_at(&self, z: SpherePoint, tol: f64) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        match z {
            SpherePoint::Finite(p) => {
                let m = self.pole_order(p, tol) as i64;
                let shifted = self.numerator.taylor_shift(p);
                let abs = Polynomial::new(
                    self.numerator
                        .coeffs()
                        .iter()
                        .map(|c| Complex64::new(c.norm(), 0.0))
                        .collect(),
                )
                .taylor_shift(Complex64::new(p.norm(), 0.0));
                let v = (0..shifted.coeffs().len())
                    .find(|&k| shifted.coeff(k).norm() > tol * abs.coeff(k).re)
                    .unwrap_or(shifted.coeffs().len()) as i64;
                Some(v - m)
            }
            SpherePoint::Infinity => {
                let dn = self.effective_degree(tol)? as i64;
                Some(self.denominator_degree() as i64 - dn)
            }
        }
    }

    /// Degree ignoring top coefficients negligible relative to the largest.
    pub(crate) fn effective_degree(&self, tol: f64) -> Option<usize> {
        let max = self.numerator.max_abs();
        self.numerator
            .coeffs()
            .iter()
            .rposition(|c| c.norm() > tol * max)
    }

    /// Whether the numerator is nonvanishing at every pole.
    pub fn is_reduced(&self, tol: f64) -> bool {
        self.poles.iter().all(|p| {
            let v = self.numerator.eval(p.location).norm();
            v > tol * self.numerator.eval_scale(p.location).max(f64::MIN_POSITIVE)
        })
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            scale: self.scale * s,
            ..self.clone()
        }
    }

    /// Coefficient-wise complex conjugate, `conj(f(conj z))`.
    pub fn conj(&self) -> Self {
        Self {
            numerator: self.numerator.conj(),
            poles: self
                .poles
                .iter()
                .map(|p| Pole::new(p.location.conj(), p.order))
                .collect(),
            scale: self.scale.conj(),
        }
    }

    pub fn mul(&self, other: &RationalFunction) -> RationalFunction {
        let mut poles = self.poles.clone();
        poles.extend_from_slice(&other.poles);
        Self::from_parts_merged(
            &self.numerator * &other.numerator,
            poles,
            self.scale * other.scale,
        )
    }

    pub fn add(&self, other: &RationalFunction) -> RationalFunction {
        // common denominator with orders max(m1, m2)
        let mut union: Vec<Pole> = self.poles.clone();
        for q in &other.poles {
            match union
                .iter_mut()
                .find(|p| (p.location - q.location).norm() <= POINT_TOL)
            {
                Some(p) => p.order = p.order.max(q.order),
                None => union.push(*q),
            }
        }
        let lift = |f: &RationalFunction| -> Polynomial {
            let missing = union.iter().map(|u| {
                let have = f.pole_order(u.location, POINT_TOL);
                (&u.location, u.order - have)
            });
            let extra = Polynomial::from_roots(missing);
            (&f.numerator * &extra).scale(f.scale)
        };
        let numerator = &lift(self) + &lift(other);
        Self {
            numerator,
            poles: union,
            scale: Complex64::one(),
        }
    }

    /// Composition `f(m(w))` with a holomorphic Möbius map. The conjugation
    /// flag of `m` is ignored; callers handle it.
    pub fn compose(&self, m: &MobiusMap) -> RationalFunction {
        self.compose_with_shift(m, 0)
    }

    /// `f(m(w)) * (c w + d)^(-extra)`, used for pullbacks of forms.
    pub(crate) fn compose_with_shift(&self, m: &MobiusMap, extra: i64) -> RationalFunction {
        if self.is_zero() {
            return Self::zero();
        }
        let dn = self.numerator.degree().unwrap_or(0);
        let num_lin = Polynomial::new(vec![m.b, m.a]);
        let den_lin = Polynomial::new(vec![m.d, m.c]);
        // homogenized numerator: sum n_i (a w + b)^i (c w + d)^(dn - i)
        let mut numerator = Polynomial::zero();
        for (i, &coef) in self.numerator.coeffs().iter().enumerate() {
            if coef.is_zero() {
                continue;
            }
            let term = (&num_lin.pow(i as u32) * &den_lin.pow((dn - i) as u32)).scale(coef);
            numerator = &numerator + &term;
        }
        let mut scale = self.scale;
        let mut poles = Vec::new();
        for p in &self.poles {
            let lead = m.a - p.location * m.c;
            let constant = m.b - p.location * m.d;
            let size = m.a.norm() + p.location.norm() * m.c.norm();
            if lead.norm() <= POINT_TOL * size {
                // pole sent to infinity
                scale /= constant.powu(p.order);
            } else {
                scale /= lead.powu(p.order);
                poles.push(Pole::new(-constant / lead, p.order));
            }
        }
        let e = self.denominator_degree() as i64 - dn as i64 - extra;
        if m.c.norm() <= POINT_TOL * m.d.norm() {
            scale *= m.d.powi(e as i32);
        } else if e > 0 {
            numerator = &numerator * &den_lin.pow(e as u32);
        } else if e < 0 {
            scale *= m.c.powi(e as i32);
            poles.push(Pole::new(-m.d / m.c, (-e) as u32));
        }
        Self::from_parts_merged(numerator, poles, scale)
    }

    /// Maximum relative coefficient-wise difference after normalizing both
    /// sides to a common denominator.
    pub fn distance(&self, other: &RationalFunction) -> f64 {
        let diff = self.add(&other.scaled(Complex64::new(-1.0, 0.0)));
        let a = self.add(&RationalFunction::zero());
        let b = other.add(&RationalFunction::zero());
        let scale = (a.numerator.max_abs() * a.scale.norm())
            .max(b.numerator.max_abs() * b.scale.norm())
            .max(f64::MIN_POSITIVE);
        diff.numerator.max_abs() * diff.scale.norm() / scale
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) * [{}]", self.scale, self.numerator)?;
        for p in &self.poles {
            write!(f, " / (z - {})^{}", p.location, p.order)?;
        }
        Ok(())
    }
}
