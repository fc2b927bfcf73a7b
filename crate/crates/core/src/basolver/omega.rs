use num_complex::Complex64;
use num_traits::Zero;

use super::{constant_index, pole_index, BAError, BASolution};
use crate::curve::SpectralData;
use crate::ratfun::{RationalFunction, RationalOneForm, SpherePoint};

/// `ω_ij = ∂_iψ(u, z) ∂_jψ(u, σz) Ω` restricted to each component, as exact
/// rational forms.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaIJ {
    pub i: usize,
    pub j: usize,
    pub forms: Vec<RationalOneForm>,
}

impl OmegaIJ {
    /// Sum over components of all residues (finite and at infinity).
    pub fn residue_sums(&self) -> Vec<Complex64> {
        self.forms.iter().map(|f| f.residue_sum()).collect()
    }

    /// Largest residue magnitude over all components.
    pub fn max_residue(&self) -> f64 {
        self.forms
            .iter()
            .map(|f| f.max_residue())
            .fold(0.0, f64::max)
    }

    pub fn residue(&self, component: usize, at: SpherePoint) -> Complex64 {
        self.forms[component].residue_or_zero(at)
    }
}

/// `r_c(z)` with the given coefficients, as a rational function.
fn rational_part(data: &SpectralData, c: usize, coeffs: &[Complex64]) -> RationalFunction {
    let mut f = RationalFunction::constant(coeffs[constant_index(c)]);
    for (k, g) in data.psi_poles_on(c) {
        let w = coeffs[pole_index(data, k)];
        if w.is_zero() {
            continue;
        }
        let g = g.location.as_finite().expect("ψ poles are finite");
        f = f.add(&RationalFunction::simple_pole(g).scaled(w));
    }
    f
}

/// `e^{-E_c} ∂_i ψ_c = K_i r_c(c) + r_c(∂_i c)` as a rational function.
fn reduced_partial(data: &SpectralData, sol: &BASolution, c: usize, i: usize) -> RationalFunction {
    let base = rational_part(data, c, &sol.d1[i]);
    match data.essential_on(c).find(|e| e.flow == i) {
        Some(e) => e
            .local_parameter()
            .as_function()
            .mul(&rational_part(data, c, &sol.coeffs))
            .add(&base),
        None => base,
    }
}

/// Checks that `E_c(z) E_{σc}(σz) = 1` holds identically: σ is holomorphic,
/// fixes every component carrying essential points, and negates their local
/// parameters.
fn check_cancellation(data: &SpectralData, tol: f64) -> Result<(), BAError> {
    let sigma = &data.sigma;
    if sigma.conjugating {
        return Err(BAError::InvolutionMismatch("σ is antiholomorphic".into()));
    }
    for e in &data.essential_points {
        let c = e.point.component;
        if sigma.component_map[c] != c {
            return Err(BAError::InvolutionMismatch(format!(
                "σ moves component `{}` carrying P_{}",
                data.components[c],
                e.flow + 1
            )));
        }
        if !e.local_parameter().is_negated_by(&sigma.maps[c], tol) {
            return Err(BAError::InvolutionMismatch(format!(
                "σ(k_{0}) ≠ -k_{0}",
                e.flow + 1
            )));
        }
    }
    Ok(())
}

/// Builds `ω_ij` from a solution at `u`. No exponential is evaluated: the
/// factors on `z` and `σz` cancel.
pub fn omega_ij_form(
    data: &SpectralData,
    sol: &BASolution,
    i: usize,
    j: usize,
    tol: f64,
) -> Result<OmegaIJ, BAError> {
    check_cancellation(data, tol)?;
    let omega = data.omega_forms()?;
    let mut forms = Vec::with_capacity(data.components.len());
    for (k, om) in omega.iter().enumerate() {
        let sk = data.sigma.component_map[k];
        let a = reduced_partial(data, sol, k, i);
        let b = reduced_partial(data, sol, sk, j).compose(&data.sigma.maps[k]);
        forms.push(om.times(&a.mul(&b)));
    }
    Ok(OmegaIJ { i, j, forms })
}
