//! The Baker–Akhiezer section at a fixed flow point.
//!
//! On component `c` the section is `E_c(u, z) r_c(z)` with
//! `E_c = exp(Σ u^j k_j(z))` over the essential points on `c` and
//! `r_c(z) = c_0 + Σ c_γ / (z - γ)` over the ψ poles on `c`. The unknown
//! coefficients solve a square linear system: one row per node and one per
//! normalization point. Derivatives in `u` come from differentiating that
//! system, never the solution formulas.

mod eval;
mod omega;

pub use eval::{
    eval_h, eval_psi, h_partial, psi_partial, psi_partial_at, psi_partial_fd, rational_factor,
    Derivative,
};
pub use omega::{omega_ij_form, OmegaIJ};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::curve::{CurveError, CurvePoint, SpectralData};
use crate::ratfun::{RatfunError, SpherePoint};

/// Reciprocal-condition threshold below which a solve is declared singular.
pub const RCOND_MIN: f64 = 1e-10;
/// Relative back-substitution residual a solve must meet.
pub const SOLVE_RESIDUAL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BAError {
    #[error("{0} coincides with an essential point")]
    EssentialAtConstraint(String),
    #[error("singular system at u = {u:?} (reciprocal condition {rcond:.3e})")]
    SingularSystem { u: Vec<Complex64>, rcond: f64 },
    #[error("inaccurate solve at u = {u:?} (relative residual {residual:.3e})")]
    InaccurateSolve { u: Vec<Complex64>, residual: f64 },
    #[error("{0} is a pole of the section")]
    PoleEvaluation(String),
    #[error("{0} is an essential point; use the leading coefficient h_j instead")]
    EssentialPoint(String),
    #[error("σ does not cancel the exponential factors: {0}")]
    InvolutionMismatch(String),
    #[error("flow point has {found} entries, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite value at u = {0:?}")]
    NonFinite(Vec<Complex64>),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Ratfun(#[from] RatfunError),
}

/// `u = (u^1, …, u^n)`, real or complex.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowPoint {
    pub u: Vec<Complex64>,
}

impl FlowPoint {
    pub fn new(u: Vec<Complex64>) -> Self {
        Self { u }
    }

    pub fn real(u: &[f64]) -> Self {
        Self {
            u: u.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            u: vec![Complex64::zero(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn is_real(&self) -> bool {
        self.u.iter().all(|x| x.im == 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.u.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Real parts, for display and CSV output.
    pub fn re(&self) -> Vec<f64> {
        self.u.iter().map(|x| x.re).collect()
    }

    /// `u + h e_i`.
    pub fn shifted(&self, i: usize, h: f64) -> Self {
        let mut u = self.u.clone();
        u[i] += h;
        Self { u }
    }
}

/// Index of the constant term of component `c` among the unknowns.
pub fn constant_index(c: usize) -> usize {
    c
}

/// Index of the coefficient of ψ pole `k` among the unknowns.
pub fn pole_index(data: &SpectralData, k: usize) -> usize {
    data.components.len() + k
}

/// Names of the unknowns in solve order.
pub fn unknown_labels(data: &SpectralData) -> Vec<String> {
    let mut labels: Vec<String> = data
        .components
        .iter()
        .map(|c| format!("const[{c}]"))
        .collect();
    labels.extend(
        data.psi_poles
            .iter()
            .enumerate()
            .map(|(k, g)| format!("gamma_{}[{}]", k + 1, data.components[g.component])),
    );
    labels
}

/// Local data of the ansatz at one point of a component: the exponential
/// factor, the partial exponents `K_i` (`k_i(z)` if `P_i` lies on the
/// component, else 0), and the rational basis `1, 1/(z - γ)`.
#[derive(Clone, Debug)]
pub(crate) struct PointData {
    pub e: Complex64,
    pub k: Vec<Complex64>,
    pub basis: Vec<Complex64>,
}

impl PointData {
    pub fn dot(&self, coeffs: &[Complex64]) -> Complex64 {
        self.basis.iter().zip(coeffs).map(|(b, c)| b * c).sum()
    }
}

pub(crate) enum AtEssential {
    Constraint,
    Evaluation,
}

pub(crate) fn point_data(
    data: &SpectralData,
    u: &FlowPoint,
    pt: CurvePoint,
    tol: f64,
    mode: AtEssential,
) -> Result<PointData, BAError> {
    let n = data.dimension;
    let mut k = vec![Complex64::zero(); n];
    let mut exponent = Complex64::zero();
    for e in data.essential_on(pt.component) {
        let Some(kv) = e
            .local_parameter()
            .value(pt.location)
            .filter(|_| !e.point.coincides(&pt, tol))
        else {
            let what = format!("{}@{}", data.components[pt.component], pt.location);
            return Err(match mode {
                AtEssential::Constraint => BAError::EssentialAtConstraint(what),
                AtEssential::Evaluation => BAError::EssentialPoint(what),
            });
        };
        k[e.flow] = kv;
        exponent += u.u[e.flow] * kv;
    }
    let basis = rational_basis(data, pt, tol)?;
    Ok(PointData {
        e: exponent.exp(),
        k,
        basis,
    })
}

pub(crate) fn rational_basis(
    data: &SpectralData,
    pt: CurvePoint,
    tol: f64,
) -> Result<Vec<Complex64>, BAError> {
    let mut basis = vec![Complex64::zero(); data.unknown_count()];
    basis[constant_index(pt.component)] = Complex64::one();
    for (k, g) in data.psi_poles_on(pt.component) {
        if let SpherePoint::Finite(z) = pt.location {
            let g = g.location.as_finite().expect("ψ poles are finite");
            if (z - g).norm() <= tol {
                return Err(BAError::PoleEvaluation(format!(
                    "{}@{}",
                    data.components[pt.component], pt.location
                )));
            }
            basis[pole_index(data, k)] = 1.0 / (z - g);
        }
    }
    Ok(basis)
}

/// The square system `A c = b` at `u`, with its first and second `u`
/// derivatives. Rows are equilibrated to unit max-norm.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub matrix: DMatrix<Complex64>,
    pub rhs: DVector<Complex64>,
    pub labels: Vec<String>,
    /// `∂_i A`.
    pub d1: Vec<DMatrix<Complex64>>,
    /// `∂_i ∂_j A`, symmetric in `(i, j)`.
    pub d2: Vec<Vec<DMatrix<Complex64>>>,
}

/// Builds the gluing and normalization rows at `u`.
pub fn assemble_system(
    data: &SpectralData,
    u: &FlowPoint,
    tol: f64,
) -> Result<LinearSystem, BAError> {
    let n = data.dimension;
    if u.dim() != n {
        return Err(BAError::DimensionMismatch {
            expected: n,
            found: u.dim(),
        });
    }
    let size = data.unknown_count();
    let rows = data.condition_count();
    // each row is a signed sum of point terms
    let mut terms: Vec<(Vec<(Complex64, PointData)>, Complex64)> = Vec::with_capacity(rows);
    for node in &data.nodes {
        let p = point_data(data, u, node.p, tol, AtEssential::Constraint)?;
        let q = point_data(data, u, node.q, tol, AtEssential::Constraint)?;
        terms.push((
            vec![(Complex64::one(), p), (-node.lambda, q)],
            Complex64::zero(),
        ));
    }
    for r in &data.normalization {
        let p = point_data(data, u, r.point, tol, AtEssential::Constraint)?;
        terms.push((vec![(Complex64::one(), p)], r.value));
    }

    let mut matrix: DMatrix<Complex64> = DMatrix::zeros(rows, size);
    let mut rhs: DVector<Complex64> = DVector::zeros(rows);
    let mut d1 = vec![DMatrix::zeros(rows, size); n];
    let mut d2 = vec![vec![DMatrix::zeros(rows, size); n]; n];
    for (r, (sides, b)) in terms.iter().enumerate() {
        for (sign, pd) in sides {
            let w = sign * pd.e;
            for col in 0..size {
                let v = w * pd.basis[col];
                if v.is_zero() {
                    continue;
                }
                matrix[(r, col)] += v;
                for i in 0..n {
                    d1[i][(r, col)] += pd.k[i] * v;
                    for j in 0..n {
                        d2[i][j][(r, col)] += pd.k[i] * pd.k[j] * v;
                    }
                }
            }
        }
        rhs[r] = *b;
        let scale = matrix.row(r).iter().map(|x| x.norm()).fold(0.0, f64::max);
        if !scale.is_finite() {
            return Err(BAError::NonFinite(u.u.clone()));
        }
        if scale > 0.0 {
            let s = Complex64::new(1.0 / scale, 0.0);
            matrix.row_mut(r).scale_mut(1.0 / scale);
            rhs[r] *= s;
            for i in 0..n {
                d1[i].row_mut(r).scale_mut(1.0 / scale);
                for j in 0..n {
                    d2[i][j].row_mut(r).scale_mut(1.0 / scale);
                }
            }
        }
    }
    Ok(LinearSystem {
        matrix,
        rhs,
        labels: unknown_labels(data),
        d1,
        d2,
    })
}

fn norm1(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solved coefficients at `u` with their first and second `u` derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct BASolution {
    pub u: FlowPoint,
    pub coeffs: Vec<Complex64>,
    /// `∂_i c`.
    pub d1: Vec<Vec<Complex64>>,
    /// `∂_i ∂_j c`.
    pub d2: Vec<Vec<Vec<Complex64>>>,
    /// `1 / (‖A‖₁ ‖A⁻¹‖₁)` of the equilibrated system.
    pub rcond: f64,
}

impl BASolution {
    /// Coefficients for the multi-index given as a list of flow indices
    /// (`[]`, `[i]` or `[i, j]`).
    pub fn coefficients(&self, alpha: &[usize]) -> &[Complex64] {
        match alpha {
            [] => &self.coeffs,
            [i] => &self.d1[*i],
            [i, j] => &self.d2[*i][*j],
            _ => panic!("derivatives of order > 2 are not supported"),
        }
    }
}

/// Solves the system at `u`, including derivative coefficients.
pub fn solve_coefficients(
    data: &SpectralData,
    u: &FlowPoint,
    tol: f64,
) -> Result<BASolution, BAError> {
    let sys = assemble_system(data, u, tol)?;
    let n = data.dimension;
    let a = &sys.matrix;
    let singular = |rcond| BAError::SingularSystem {
        u: u.u.clone(),
        rcond,
    };
    let inv = a.clone().lu().try_inverse().ok_or_else(|| singular(0.0))?;
    let rcond = 1.0 / (norm1(a) * norm1(&inv));
    if rcond.is_nan() || rcond < RCOND_MIN {
        return Err(singular(if rcond.is_finite() { rcond } else { 0.0 }));
    }
    let c = &inv * &sys.rhs;
    let cmax = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let residual = (a * &c - &sys.rhs)
        .iter()
        .map(|x| x.norm())
        .fold(0.0, f64::max)
        / (1.0 + cmax);
    if !residual.is_finite() || !cmax.is_finite() {
        return Err(BAError::NonFinite(u.u.clone()));
    }
    if residual > SOLVE_RESIDUAL {
        return Err(BAError::InaccurateSolve {
            u: u.u.clone(),
            residual,
        });
    }
    let d1: Vec<DVector<Complex64>> = (0..n).map(|i| -(&inv * (&sys.d1[i] * &c))).collect();
    let mut d2 = vec![vec![Vec::new(); n]; n];
    for i in 0..n {
        for j in i..n {
            let v = -(&inv * (&sys.d1[i] * &d1[j] + &sys.d1[j] * &d1[i] + &sys.d2[i][j] * &c));
            let v: Vec<Complex64> = v.iter().copied().collect();
            d2[j][i] = v.clone();
            d2[i][j] = v;
        }
    }
    Ok(BASolution {
        u: u.clone(),
        coeffs: c.iter().copied().collect(),
        d1: d1
            .into_iter()
            .map(|v| v.iter().copied().collect())
            .collect(),
        d2,
        rcond,
    })
}
