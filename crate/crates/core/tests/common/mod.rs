#![allow(dead_code)]

pub mod expr;

use bacurve::basolver::FlowPoint;
use bacurve::curve::{solve_scale_parameter, ParameterBinding, SpectralData};
use bacurve::datasets;
use bacurve::ratfun::{Pole, Polynomial, RationalFunction, RationalOneForm};
use bacurve::{Complex64, Tolerances};
use rand::Rng;

pub const ORACLE1: &str = include_str!("../../data/example1.oracle");
pub const ORACLE2: &str = include_str!("../../data/example2.oracle");
pub const ORACLE3: &str = include_str!("../../data/example3.oracle");

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// A bundled example with new gluing constants and `s` re-solved.
pub fn with_lambda(name: &str, lambda: Complex64, mu: Complex64) -> (SpectralData, Complex64) {
    let mut data = datasets::load(name).unwrap();
    data.nodes[0].lambda = lambda;
    data.nodes[1].lambda = mu;
    data.omega
        .parameters
        .insert("s".into(), ParameterBinding::Solve);
    let s = solve_scale_parameter(&mut data, "s", &Tolerances::default()).unwrap();
    (data, s)
}

pub fn random_u<R: Rng>(rng: &mut R, n: usize) -> FlowPoint {
    FlowPoint::real(&(0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>())
}

/// Evaluates an oracle at `u` with gluing constant inputs.
pub fn oracle(text: &str, u: &FlowPoint, extra: &[(&str, Complex64)]) -> expr::Env {
    let mut inputs = vec![("u1", u.u[0]), ("u2", u.u[1])];
    inputs.extend_from_slice(extra);
    expr::eval_oracle(text, &inputs).unwrap()
}

/// A random rational form with at most `max_poles` well-separated poles of
/// order at most 3 in the disk of radius 3.
pub fn random_form<R: Rng>(rng: &mut R, max_poles: usize) -> RationalOneForm {
    let count = rng.gen_range(1..=max_poles);
    let mut poles: Vec<Pole> = Vec::new();
    while poles.len() < count {
        let z = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        if poles.iter().all(|p| (p.location - z).norm() > 0.3) {
            poles.push(Pole::new(z, rng.gen_range(1..=3)));
        }
    }
    let deg = rng.gen_range(0..=6);
    let num: Vec<Complex64> = (0..=deg)
        .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    RationalOneForm::new(RationalFunction::new(Polynomial::new(num), poles, c(1.0, 0.0)).unwrap())
}

/// `(1/2πi) ∮ R(z) dz` over the circle `|z - center| = radius`, trapezoid
/// rule with `n` nodes.
pub fn contour_integral(
    f: &RationalFunction,
    center: Complex64,
    radius: f64,
    n: usize,
) -> Complex64 {
    let mut sum = c(0.0, 0.0);
    for k in 0..n {
        let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64);
        sum += f.eval_unchecked(center + radius * w) * w;
    }
    sum * radius / n as f64
}

/// Residue of a form at each finite pole and at infinity by contour
/// integration only.
pub fn contour_residues(form: &RationalOneForm) -> (Vec<Complex64>, Complex64) {
    let f = form.coefficient();
    let poles: Vec<Complex64> = f.poles().iter().map(|p| p.location).collect();
    let finite = poles
        .iter()
        .map(|&p| {
            let sep = poles
                .iter()
                .filter(|&&q| q != p)
                .map(|q| (q - p).norm())
                .fold(f64::INFINITY, f64::min);
            let radius = if sep.is_finite() { 0.4 * sep } else { 0.5 };
            contour_integral(f, p, radius, 512)
        })
        .collect();
    let big = poles.iter().map(|p| p.norm()).fold(0.0, f64::max) + 2.0;
    let at_infinity = -contour_integral(f, c(0.0, 0.0), big, 4096);
    (finite, at_infinity)
}
