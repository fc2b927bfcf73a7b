//! Coordinates, metric data and residuals at single flow points, and
//! their aggregation over grids.
//!
//! Every residual is normalized by the magnitude of the terms it compares,
//! so verdicts do not move when all `d_j` are rescaled.

mod grid;

pub use grid::{
    run_report, sample_coordinates, CheckSummary, Execution, GridSpec, ReportOptions, Thresholds,
    VerificationReport,
};

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::basolver::{
    eval_h, eval_psi, h_partial, omega_ij_form, psi_partial_at, solve_coefficients, BAError,
    BASolution, FlowPoint,
};
use crate::curve::{common_q_residue, CurveError, CurvePoint, SpectralData};
use crate::ratfun::{LocalParameter, RatfunError, SpherePoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("no antiholomorphic involution τ in the data")]
    NoTau,
    #[error("flow point is not real")]
    ComplexFlow,
    #[error("data is not Egorov-shaped: {0}")]
    NotEgorovShape(String),
    #[error("h_{0} vanishes")]
    ZeroLame(usize),
    #[error(transparent)]
    Solve(#[from] BAError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Ratfun(#[from] RatfunError),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SampleStatus {
    Solved,
    Gap(String),
}

/// `x(u)`, the Jacobian `jacobian[i][k] = ∂_i x^k` and `H_i² = Σ_k (∂_i x^k)²`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateSample {
    pub u: FlowPoint,
    pub x: Vec<Complex64>,
    pub jacobian: Vec<Vec<Complex64>>,
    pub h2: Vec<Complex64>,
    pub status: SampleStatus,
}

impl CoordinateSample {
    pub fn is_solved(&self) -> bool {
        self.status == SampleStatus::Solved
    }
}

fn max_norm<'a>(v: impl IntoIterator<Item = &'a Complex64>) -> f64 {
    v.into_iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn relative(value: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        value / scale
    } else {
        value
    }
}

/// Coordinates from an existing solution.
pub fn coordinates_from(
    data: &SpectralData,
    sol: &BASolution,
    tol: f64,
) -> Result<CoordinateSample, BAError> {
    let n = data.dimension;
    let qs: Vec<CurvePoint> = (0..n).map(|k| data.q_point(k).point).collect();
    let x = qs
        .iter()
        .map(|q| eval_psi(data, sol, *q, tol))
        .collect::<Result<Vec<_>, _>>()?;
    let jacobian = (0..n)
        .map(|i| {
            qs.iter()
                .map(|q| psi_partial_at(data, sol, *q, &[i], tol))
                .collect()
        })
        .collect::<Result<Vec<Vec<_>>, _>>()?;
    let h2 = jacobian
        .iter()
        .map(|row: &Vec<Complex64>| row.iter().map(|d| d * d).sum())
        .collect();
    Ok(CoordinateSample {
        u: sol.u.clone(),
        x,
        jacobian,
        h2,
        status: SampleStatus::Solved,
    })
}

/// `x^j(u) = ψ(u, Q_j)` with derivatives; solve failures become a gap.
pub fn coordinates(data: &SpectralData, u: &FlowPoint, tol: f64) -> CoordinateSample {
    match solve_coefficients(data, u, tol).and_then(|sol| coordinates_from(data, &sol, tol)) {
        Ok(s) => s,
        Err(e) => CoordinateSample {
            u: u.clone(),
            x: vec![],
            jacobian: vec![],
            h2: vec![],
            status: SampleStatus::Gap(e.to_string()),
        },
    }
}

/// `max_{i≠j} |Σ_k ∂_i x^k ∂_j x^k| / max_i |H_i²|`.
pub fn orthogonality_from(sample: &CoordinateSample) -> f64 {
    let n = sample.jacobian.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..i {
            let g: Complex64 = sample.jacobian[i]
                .iter()
                .zip(&sample.jacobian[j])
                .map(|(a, b)| a * b)
                .sum();
            worst = worst.max(g.norm());
        }
    }
    relative(worst, max_norm(&sample.h2))
}

pub fn orthogonality_residual(
    data: &SpectralData,
    u: &FlowPoint,
    tol: f64,
) -> Result<f64, VerifyError> {
    let sol = solve_coefficients(data, u, tol)?;
    Ok(orthogonality_from(&coordinates_from(data, &sol, tol)?))
}

/// Reality residuals: coordinates `max|Im x| / max|x|`, and probes
/// `max |ψ(P) - conj ψ(τP)| / max(|ψ(P)|, |ψ(τP)|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealityResidual {
    pub coordinates: f64,
    pub probes: f64,
}

pub fn reality_from(
    data: &SpectralData,
    sol: &BASolution,
    sample: &CoordinateSample,
    probes: &[CurvePoint],
    tol: f64,
) -> Result<RealityResidual, VerifyError> {
    let tau = data.tau.as_ref().ok_or(VerifyError::NoTau)?;
    if !sol.u.is_real() {
        return Err(VerifyError::ComplexFlow);
    }
    let im = sample.x.iter().map(|x| x.im.abs()).fold(0.0, f64::max);
    let coordinates = relative(im, max_norm(&sample.x));
    let mut worst: f64 = 0.0;
    for p in probes {
        let a = eval_psi(data, sol, *p, tol)?;
        let b = eval_psi(data, sol, tau.apply(*p), tol)?;
        worst = worst.max(relative((a - b.conj()).norm(), a.norm().max(b.norm())));
    }
    Ok(RealityResidual {
        coordinates,
        probes: worst,
    })
}

pub fn reality_residual(
    data: &SpectralData,
    u: &FlowPoint,
    probes: &[CurvePoint],
    tol: f64,
) -> Result<RealityResidual, VerifyError> {
    if data.tau.is_none() {
        return Err(VerifyError::NoTau);
    }
    if !u.is_real() {
        return Err(VerifyError::ComplexFlow);
    }
    let sol = solve_coefficients(data, u, tol)?;
    let sample = coordinates_from(data, &sol, tol)?;
    reality_from(data, &sol, &sample, probes, tol)
}

/// A random point of the curve away from essential points and ψ poles.
pub fn random_probe<R: Rng + ?Sized>(data: &SpectralData, rng: &mut R, tol: f64) -> CurvePoint {
    loop {
        let c = rng.gen_range(0..data.components.len());
        let z = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let pt = CurvePoint::new(c, SpherePoint::Finite(z));
        let near = |p: &CurvePoint, r: f64| {
            p.component == c && p.location.as_finite().is_some_and(|w| (w - z).norm() < r)
        };
        let bad = data.essential_points.iter().any(|e| near(&e.point, 0.25))
            || data.psi_poles.iter().any(|g| near(g, 0.1))
            || data.tau.as_ref().is_some_and(|t| {
                let img = t.apply(pt);
                data.psi_poles.iter().any(|g| g.coincides(&img, 0.1))
            });
        if !bad && z.norm() > tol {
            return pt;
        }
    }
}

/// Quantities entering the Darboux–Egorov checks at one flow point.
#[derive(Clone, Debug, PartialEq)]
pub struct EgorovData {
    /// `ε_j²` read off `Ω` at `P_j`.
    pub epsilon2: Vec<Complex64>,
    /// Common residue `ρ` of `Ω` at the `Q_j`.
    pub rho: Complex64,
    pub h: Vec<Complex64>,
    /// `dh[l][j] = ∂_l h_j`.
    pub dh: Vec<Vec<Complex64>>,
    /// `β_ij = ∂_i H_j / H_i` with `H_j = ε_j h_j / √ρ`; `None` on the
    /// diagonal.
    pub beta: Vec<Vec<Option<Complex64>>>,
    /// `max_j |ρ H_j² - ε_j² h_j²| / max_j |ρ H_j²|`.
    pub lame_residual: f64,
    /// `max_{i<j} |β_ij - β_ji| / max(|β_ij|, |β_ji|)`.
    pub beta_residual: f64,
}

/// Lamé identity and rotation-coefficient symmetry.
///
/// With `ρ` the common `Q`-residue of `Ω`, the metric is
/// `H_j² = ε_j² h_j² / ρ`. The symmetry `β_ij = β_ji` reads
/// `ε_j² ∂_i h_j / h_i = ε_i² ∂_j h_i / h_j` and does not depend on the
/// branch of `√(ε²/ρ)`.
pub fn egorov_from(
    data: &SpectralData,
    sol: &BASolution,
    sample: &CoordinateSample,
    tol: f64,
) -> Result<EgorovData, VerifyError> {
    data.egorov_shape(tol)
        .map_err(VerifyError::NotEgorovShape)?;
    let n = data.dimension;
    let forms = data.omega_forms()?;
    let epsilon2 = (0..n)
        .map(|j| {
            forms[data.essential(j).point.component]
                .leading_coefficient_eps2(LocalParameter::AtInfinity, tol)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let rho = common_q_residue(data)?;
    let h = (0..n)
        .map(|j| eval_h(data, sol, j, tol))
        .collect::<Result<Vec<_>, _>>()?;
    let hmax = max_norm(&h);
    if let Some(j) = h
        .iter()
        .position(|x| x.norm() <= 1e-14 * hmax || x.norm() == 0.0)
    {
        return Err(VerifyError::ZeroLame(j));
    }
    let dh = (0..n)
        .map(|l| (0..n).map(|j| h_partial(data, sol, l, j, tol)).collect())
        .collect::<Result<Vec<Vec<_>>, _>>()?;

    let lhs: Vec<Complex64> = sample.h2.iter().map(|x| rho * x).collect();
    let rhs: Vec<Complex64> = (0..n).map(|j| epsilon2[j] * h[j] * h[j]).collect();
    let diff = lhs
        .iter()
        .zip(&rhs)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let lame_residual = relative(diff, max_norm(&lhs).max(max_norm(&rhs)));

    let eps: Vec<Complex64> = epsilon2.iter().map(|e| (e / rho).sqrt()).collect();
    let mut beta = vec![vec![None; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                beta[i][j] = Some(eps[j] * dh[i][j] / (eps[i] * h[i]));
            }
        }
    }
    let mut beta_residual: f64 = 0.0;
    for i in 0..n {
        for j in 0..i {
            let (a, b) = (beta[i][j].unwrap(), beta[j][i].unwrap());
            beta_residual = beta_residual.max(relative((a - b).norm(), a.norm().max(b.norm())));
        }
    }
    Ok(EgorovData {
        epsilon2,
        rho,
        h,
        dh,
        beta,
        lame_residual,
        beta_residual,
    })
}

pub fn egorov_checks(
    data: &SpectralData,
    u: &FlowPoint,
    tol: f64,
) -> Result<EgorovData, VerifyError> {
    data.egorov_shape(tol)
        .map_err(VerifyError::NotEgorovShape)?;
    let sol = solve_coefficients(data, u, tol)?;
    let sample = coordinates_from(data, &sol, tol)?;
    egorov_from(data, &sol, &sample, tol)
}

/// Residual of `∂_ij ψ = (∂_j h_i / h_i) ∂_i ψ + (∂_i h_j / h_j) ∂_j ψ` at
/// `pt`, normalized by the largest of the three terms.
pub fn epd_from(
    data: &SpectralData,
    sol: &BASolution,
    i: usize,
    j: usize,
    pt: CurvePoint,
    tol: f64,
) -> Result<f64, VerifyError> {
    let hi = eval_h(data, sol, i, tol)?;
    let hj = eval_h(data, sol, j, tol)?;
    if hi.norm() == 0.0 {
        return Err(VerifyError::ZeroLame(i));
    }
    if hj.norm() == 0.0 {
        return Err(VerifyError::ZeroLame(j));
    }
    let t0 = psi_partial_at(data, sol, pt, &[i, j], tol)?;
    let t1 = h_partial(data, sol, j, i, tol)? / hi * psi_partial_at(data, sol, pt, &[i], tol)?;
    let t2 = h_partial(data, sol, i, j, tol)? / hj * psi_partial_at(data, sol, pt, &[j], tol)?;
    Ok(relative(
        (t0 - t1 - t2).norm(),
        t0.norm().max(t1.norm()).max(t2.norm()),
    ))
}

pub fn epd_residual(
    data: &SpectralData,
    u: &FlowPoint,
    i: usize,
    j: usize,
    pt: CurvePoint,
    tol: f64,
) -> Result<f64, VerifyError> {
    let sol = solve_coefficients(data, u, tol)?;
    epd_from(data, &sol, i, j, pt, tol)
}

/// Residue instrumentation of `ω_ij`, each normalized by the largest residue
/// magnitude of `ω_ij`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeResiduals {
    /// `max_nodes |Res_a ω^p + Res_b ω^q|`.
    pub nodes: f64,
    /// `max_components |Σ Res ω^k|`.
    pub components: f64,
    /// `|Σ_s Res_{Q_s} ω - ρ Σ_k ∂_i x^k ∂_j x^k|`.
    pub q_points: f64,
}

/// At a node the weighted condition on `Ω` together with the gluing of ψ
/// makes the plain residue sum `Res_a ω^p + Res_b ω^q` vanish.
pub fn node_cancellation_from(
    data: &SpectralData,
    sol: &BASolution,
    sample: &CoordinateSample,
    i: usize,
    j: usize,
    tol: f64,
) -> Result<NodeResiduals, VerifyError> {
    let w = omega_ij_form(data, sol, i, j, tol)?;
    let scale = w.max_residue();
    let nodes = data
        .nodes
        .iter()
        .map(|n| {
            (w.residue(n.p.component, n.p.location) + w.residue(n.q.component, n.q.location)).norm()
        })
        .fold(0.0, f64::max);
    let components = max_norm(&w.residue_sums());
    let rho = common_q_residue(data)?;
    let q_sum: Complex64 = (0..data.dimension)
        .map(|s| {
            let q = data.q_point(s).point;
            w.residue(q.component, q.location)
        })
        .sum();
    let g: Complex64 = sample.jacobian[i]
        .iter()
        .zip(&sample.jacobian[j])
        .map(|(a, b)| a * b)
        .sum();
    Ok(NodeResiduals {
        nodes: relative(nodes, scale),
        components: relative(components, scale),
        q_points: relative((q_sum - rho * g).norm(), scale),
    })
}

pub fn node_cancellation_residual(
    data: &SpectralData,
    u: &FlowPoint,
    i: usize,
    j: usize,
    tol: f64,
) -> Result<NodeResiduals, VerifyError> {
    let sol = solve_coefficients(data, u, tol)?;
    let sample = coordinates_from(data, &sol, tol)?;
    node_cancellation_from(data, &sol, &sample, i, j, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;
    use crate::ratfun::POINT_TOL;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn example1_sample_at_origin() {
        let data = datasets::load("example1").unwrap();
        let s = coordinates(&data, &FlowPoint::zero(2), POINT_TOL);
        assert!(s.is_solved());
        assert!(s.x.iter().all(|x| close(*x, c(1.0, 0.0), 1e-12)));
        assert!(s.h2.iter().all(|x| close(*x, c(4.0, 0.0), 1e-12)));
        assert!(orthogonality_from(&s) < 1e-15);
    }

    #[test]
    fn example3_sample_at_origin() {
        let data = datasets::load("example3").unwrap();
        let s = coordinates(&data, &FlowPoint::zero(2), POINT_TOL);
        assert!(close(s.x[0], c(4.0 / 3.0, 0.0), 1e-12));
        assert!(close(s.x[1], c(2.0 / 3.0, 0.0), 1e-12));
        assert!(close(s.h2[0], c(16.0 / 9.0, 0.0), 1e-12));
        assert!(close(s.h2[1], c(64.0 / 9.0, 0.0), 1e-12));
    }

    #[test]
    fn example3_egorov_at_origin() {
        let data = datasets::load("example3").unwrap();
        let e = egorov_checks(&data, &FlowPoint::zero(2), POINT_TOL).unwrap();
        assert!(close(e.epsilon2[0], c(-1.0 / 9.0, 0.0), 1e-12));
        assert!(close(e.epsilon2[1], c(-1.0, 0.0), 1e-12));
        assert!(close(e.rho, c(-1.0 / 9.0, 0.0), 1e-12));
        assert!(e.lame_residual < 1e-12);
        assert!(e.beta_residual < 1e-10);
    }

    #[test]
    fn example1_is_not_egorov_shaped() {
        let data = datasets::load("example1").unwrap();
        assert!(matches!(
            egorov_checks(&data, &FlowPoint::zero(2), POINT_TOL),
            Err(VerifyError::NotEgorovShape(_))
        ));
    }

    #[test]
    fn reality_and_probes() {
        let mut data = datasets::load("example1").unwrap();
        data.nodes[0].lambda = c(1.0, 2.0);
        data.nodes[1].lambda = c(1.0, -2.0);
        data.bind_parameter("s", c(0.8, 0.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let probes: Vec<_> = (0..10)
            .map(|_| random_probe(&data, &mut rng, POINT_TOL))
            .collect();
        let r =
            reality_residual(&data, &FlowPoint::real(&[0.4, -0.7]), &probes, POINT_TOL).unwrap();
        assert!(r.coordinates < 1e-12 && r.probes < 1e-10, "{r:?}");
        assert_eq!(
            reality_residual(
                &data,
                &FlowPoint::new(vec![c(0.0, 1.0), c(0.0, 0.0)]),
                &probes,
                POINT_TOL
            ),
            Err(VerifyError::ComplexFlow)
        );
    }

    #[test]
    fn second_order_equation() {
        for name in ["example1", "example2", "example3"] {
            let data = datasets::load(name).unwrap();
            let u = FlowPoint::real(&[0.3, -0.5]);
            let pt = CurvePoint::new(1, SpherePoint::finite(0.4, 0.9));
            let r = epd_residual(&data, &u, 0, 1, pt, POINT_TOL).unwrap();
            assert!(r < 1e-10, "{name}: {r}");
        }
    }

    #[test]
    fn node_cancellation() {
        for name in ["example1", "example2", "example3"] {
            let data = datasets::load(name).unwrap();
            for (i, j) in [(0, 0), (0, 1), (1, 1)] {
                let r = node_cancellation_residual(
                    &data,
                    &FlowPoint::real(&[0.2, 0.6]),
                    i,
                    j,
                    POINT_TOL,
                )
                .unwrap();
                assert!(
                    r.nodes < 1e-10 && r.components < 1e-10 && r.q_points < 1e-10,
                    "{name} {i}{j}: {r:?}"
                );
            }
        }
    }
}
