use num_complex::Complex64;
use num_traits::Zero;

use super::{
    point_data, rational_basis, solve_coefficients, AtEssential, BAError, BASolution, FlowPoint,
};
use crate::curve::{CurvePoint, SpectralData};

/// How `u`-derivatives of ψ are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Derivative {
    /// Differentiate the linear system.
    #[default]
    Analytic,
    /// Central differences with step `1e-5 max(1, |u|)`.
    FiniteDifference,
}

/// `r_c(z)` for the given coefficient vector; at infinity the constant term.
pub fn rational_factor(
    data: &SpectralData,
    coeffs: &[Complex64],
    pt: CurvePoint,
    tol: f64,
) -> Result<Complex64, BAError> {
    let basis = rational_basis(data, pt, tol)?;
    Ok(basis.iter().zip(coeffs).map(|(b, c)| b * c).sum())
}

/// `ψ(u, pt)`.
pub fn eval_psi(
    data: &SpectralData,
    sol: &BASolution,
    pt: CurvePoint,
    tol: f64,
) -> Result<Complex64, BAError> {
    psi_partial_at(data, sol, pt, &[], tol)
}

/// `∂^α ψ(u, pt)` from an existing solution, `α` a list of at most two flow
/// indices.
pub fn psi_partial_at(
    data: &SpectralData,
    sol: &BASolution,
    pt: CurvePoint,
    alpha: &[usize],
    tol: f64,
) -> Result<Complex64, BAError> {
    let pd = point_data(data, &sol.u, pt, tol, AtEssential::Evaluation)?;
    let r = |a: &[usize]| pd.dot(sol.coefficients(a));
    let v = match alpha {
        [] => r(&[]),
        [i] => pd.k[*i] * r(&[]) + r(&[*i]),
        [i, j] => {
            let (ki, kj) = (pd.k[*i], pd.k[*j]);
            ki * kj * r(&[]) + ki * r(&[*j]) + kj * r(&[*i]) + r(&[*i, *j])
        }
        _ => panic!("derivatives of order > 2 are not supported"),
    };
    Ok(pd.e * v)
}

/// `∂^α ψ(u, pt)`, solving at `u` (and nearby points in finite-difference
/// mode).
pub fn psi_partial(
    data: &SpectralData,
    u: &FlowPoint,
    pt: CurvePoint,
    alpha: &[usize],
    mode: Derivative,
    tol: f64,
) -> Result<Complex64, BAError> {
    match mode {
        Derivative::Analytic => {
            psi_partial_at(data, &solve_coefficients(data, u, tol)?, pt, alpha, tol)
        }
        Derivative::FiniteDifference => psi_partial_fd(data, u, pt, alpha, tol),
    }
}

/// Finite-difference step at `u`.
pub fn fd_step(u: &FlowPoint) -> f64 {
    1e-5 * u.norm().max(1.0)
}

/// Central-difference `∂^α ψ`: 2-point first derivatives, 3-point pure and
/// 4-point mixed second derivatives.
pub fn psi_partial_fd(
    data: &SpectralData,
    u: &FlowPoint,
    pt: CurvePoint,
    alpha: &[usize],
    tol: f64,
) -> Result<Complex64, BAError> {
    let psi = |v: &FlowPoint| eval_psi(data, &solve_coefficients(data, v, tol)?, pt, tol);
    let h = fd_step(u);
    match alpha {
        [] => psi(u),
        [i] => Ok((psi(&u.shifted(*i, h))? - psi(&u.shifted(*i, -h))?) / (2.0 * h)),
        [i, j] if i == j => {
            Ok((psi(&u.shifted(*i, h))? - 2.0 * psi(u)? + psi(&u.shifted(*i, -h))?) / (h * h))
        }
        [i, j] => {
            let s = |a: f64, b: f64| psi(&u.shifted(*i, a).shifted(*j, b));
            Ok((s(h, h)? - s(h, -h)? - s(-h, h)? + s(-h, -h)?) / (4.0 * h * h))
        }
        _ => panic!("derivatives of order > 2 are not supported"),
    }
}

/// The exponential of the other essential points on the component of
/// `P_j`, evaluated at `P_j`, and their `K_l(P_j)`.
fn h_parts(
    data: &SpectralData,
    sol: &BASolution,
    j: usize,
) -> Result<(Complex64, Vec<Complex64>), BAError> {
    let p = data.essential(j);
    let mut k = vec![Complex64::zero(); data.dimension];
    let mut exponent = Complex64::zero();
    for e in data.essential_on(p.point.component).filter(|e| e.flow != j) {
        let kv = e
            .local_parameter()
            .value(p.point.location)
            .ok_or_else(|| BAError::EssentialPoint(format!("P_{} = P_{}", e.flow + 1, j + 1)))?;
        k[e.flow] = kv;
        exponent += sol.u.u[e.flow] * kv;
    }
    Ok((exponent.exp(), k))
}

/// `h_j(u) = lim_{z → P_j} ψ(u, z) e^{-u^j k_j(z)}`.
pub fn eval_h(
    data: &SpectralData,
    sol: &BASolution,
    j: usize,
    tol: f64,
) -> Result<Complex64, BAError> {
    let (e, _) = h_parts(data, sol, j)?;
    let p = data.essential(j).point;
    Ok(e * rational_factor(data, &sol.coeffs, p, tol)?)
}

/// `∂_l h_j(u)`.
pub fn h_partial(
    data: &SpectralData,
    sol: &BASolution,
    l: usize,
    j: usize,
    tol: f64,
) -> Result<Complex64, BAError> {
    let (e, k) = h_parts(data, sol, j)?;
    let p = data.essential(j).point;
    let r0 = rational_factor(data, &sol.coeffs, p, tol)?;
    let rl = rational_factor(data, &sol.d1[l], p, tol)?;
    Ok(e * (k[l] * r0 + rl))
}
