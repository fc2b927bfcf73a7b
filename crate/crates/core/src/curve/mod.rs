//! Spectral data on a nodal curve with rational components.
//!
//! A [`SpectralData`] instance is immutable once parsed; the only mutation
//! offered is binding a free scale parameter of the form `Ω`
//! ([`SpectralData::bind_parameter`], [`solve_scale_parameter`]).

mod format;
mod report;
mod residues;
mod validate;

pub use format::{parse_spectral_data, serialize_spectral_data};
pub use report::{ReportEntry, Status, ValidationReport};
pub use residues::{residue_table, NodeRow, ResidueRow, ResidueTable};
pub use validate::{
    check_form_divisor, check_involutions, check_residue_conditions, common_q_residue, rule,
    solve_scale_parameter, validate_all, validate_structure,
};

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::ratfun::{LocalParameter, MobiusMap, RationalOneForm, SpherePoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invariant violated ({rule}): {detail}")]
    Invariant { rule: String, detail: String },
}

impl ParseError {
    pub(crate) fn invariant(rule: &str, detail: impl Into<String>) -> Self {
        ParseError::Invariant {
            rule: rule.to_string(),
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("parameter `{0}` is unbound")]
    UnboundParameter(String),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("no node condition constrains parameter `{0}`")]
    NoConstraint(String),
    #[error("parameter `{name}` = {value} leaves `{rule}` violated (residual {residual:.3e})")]
    Inconsistent {
        name: String,
        value: Complex64,
        rule: String,
        residual: f64,
    },
}

/// A point on a given component, in that component's affine chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub component: usize,
    pub location: SpherePoint,
}

impl CurvePoint {
    pub fn new(component: usize, location: SpherePoint) -> Self {
        Self {
            component,
            location,
        }
    }

    pub fn coincides(&self, other: &CurvePoint, tol: f64) -> bool {
        self.component == other.component && self.location.coincides(&other.location, tol)
    }
}

/// `P_j`: carries the essential singularity `exp(u^j k_j)`. `flow` is
/// zero-based.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EssentialPoint {
    pub point: CurvePoint,
    pub flow: usize,
}

impl EssentialPoint {
    pub fn local_parameter(&self) -> LocalParameter {
        LocalParameter::for_point(self.point.location)
    }
}

/// `Q_j`: `x^j(u) = ψ(u, Q_j)`. `coordinate` is zero-based.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QPoint {
    pub point: CurvePoint,
    pub coordinate: usize,
}

/// `R_j` with the prescribed value `ψ(R_j) = d_j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizationPoint {
    pub point: CurvePoint,
    pub value: Complex64,
}

/// A double point gluing `p` and `q` with `ψ(p) = λ ψ(q)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node {
    pub p: CurvePoint,
    pub q: CurvePoint,
    pub lambda: Complex64,
}

/// An involution of the curve: a permutation of components together with
/// the Möbius map carrying component `c` onto `component_map[c]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Involution {
    pub component_map: Vec<usize>,
    pub maps: Vec<MobiusMap>,
    pub conjugating: bool,
}

impl Involution {
    pub fn apply(&self, pt: CurvePoint) -> CurvePoint {
        CurvePoint {
            component: self.component_map[pt.component],
            location: self.maps[pt.component].apply(pt.location),
        }
    }

    /// Whether applying twice is the identity on components and points.
    pub fn is_involutive(&self, tol: f64) -> bool {
        self.component_map.iter().enumerate().all(|(c, &img)| {
            self.component_map[img] == c && self.maps[img].compose(&self.maps[c]).is_identity(tol)
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ParameterBinding {
    Value(Complex64),
    Solve,
}

/// The restriction of `Ω` to one component. When `parameter` is set, the
/// effective form is `form` multiplied by that parameter's value.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaComponent {
    pub form: RationalOneForm,
    pub parameter: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OmegaSpec {
    pub components: Vec<OmegaComponent>,
    pub parameters: BTreeMap<String, ParameterBinding>,
}

/// The full declarative instance.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralData {
    pub dimension: usize,
    pub components: Vec<String>,
    pub essential_points: Vec<EssentialPoint>,
    pub q_points: Vec<QPoint>,
    pub normalization: Vec<NormalizationPoint>,
    pub psi_poles: Vec<CurvePoint>,
    pub nodes: Vec<Node>,
    pub sigma: Involution,
    pub tau: Option<Involution>,
    pub omega: OmegaSpec,
}

/// Role of a marked point, used in diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarkedRole {
    Essential(usize),
    Q(usize),
    Normalization(usize),
    PsiPole(usize),
    NodeP(usize),
    NodeQ(usize),
}

impl MarkedRole {
    pub fn is_node(&self) -> bool {
        matches!(self, MarkedRole::NodeP(_) | MarkedRole::NodeQ(_))
    }
}

impl fmt::Display for MarkedRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarkedRole::Essential(j) => write!(f, "P_{}", j + 1),
            MarkedRole::Q(j) => write!(f, "Q_{}", j + 1),
            MarkedRole::Normalization(j) => write!(f, "R_{}", j + 1),
            MarkedRole::PsiPole(j) => write!(f, "γ_{}", j + 1),
            MarkedRole::NodeP(j) => write!(f, "node {} (p side)", j + 1),
            MarkedRole::NodeQ(j) => write!(f, "node {} (q side)", j + 1),
        }
    }
}

impl SpectralData {
    pub fn component_index(&self, id: &str) -> Option<usize> {
        self.components.iter().position(|c| c == id)
    }

    /// `g_a = #nodes - #components + 1` (connected nodal curve of rational
    /// components).
    pub fn arithmetic_genus(&self) -> i64 {
        self.nodes.len() as i64 - self.components.len() as i64 + 1
    }

    pub fn unknown_count(&self) -> usize {
        self.components.len() + self.psi_poles.len()
    }

    pub fn condition_count(&self) -> usize {
        self.nodes.len() + self.normalization.len()
    }

    /// Essential point with the given zero-based flow index.
    pub fn essential(&self, flow: usize) -> &EssentialPoint {
        self.essential_points
            .iter()
            .find(|e| e.flow == flow)
            .expect("flow indices validated at parse time")
    }

    /// Q point with the given zero-based coordinate index.
    pub fn q_point(&self, coordinate: usize) -> &QPoint {
        self.q_points
            .iter()
            .find(|q| q.coordinate == coordinate)
            .expect("coordinate indices validated at parse time")
    }

    pub fn essential_on(&self, component: usize) -> impl Iterator<Item = &EssentialPoint> {
        self.essential_points
            .iter()
            .filter(move |e| e.point.component == component)
    }

    pub fn psi_poles_on(&self, component: usize) -> impl Iterator<Item = (usize, &CurvePoint)> {
        self.psi_poles
            .iter()
            .enumerate()
            .filter(move |(_, p)| p.component == component)
    }

    /// Every marked point with its role.
    pub fn marked_points(&self) -> Vec<(MarkedRole, CurvePoint)> {
        let mut out = Vec::new();
        out.extend(
            self.essential_points
                .iter()
                .map(|e| (MarkedRole::Essential(e.flow), e.point)),
        );
        out.extend(
            self.q_points
                .iter()
                .map(|q| (MarkedRole::Q(q.coordinate), q.point)),
        );
        out.extend(
            self.normalization
                .iter()
                .enumerate()
                .map(|(i, r)| (MarkedRole::Normalization(i), r.point)),
        );
        out.extend(
            self.psi_poles
                .iter()
                .enumerate()
                .map(|(i, g)| (MarkedRole::PsiPole(i), *g)),
        );
        for (i, n) in self.nodes.iter().enumerate() {
            out.push((MarkedRole::NodeP(i), n.p));
            out.push((MarkedRole::NodeQ(i), n.q));
        }
        out
    }

    pub fn unbound_parameters(&self) -> Vec<String> {
        self.omega
            .parameters
            .iter()
            .filter(|(_, b)| matches!(b, ParameterBinding::Solve))
            .map(|(n, _)| n.clone())
            .collect()
    }

    pub fn bind_parameter(&mut self, name: &str, value: Complex64) -> Result<(), CurveError> {
        match self.omega.parameters.get_mut(name) {
            Some(b) => {
                *b = ParameterBinding::Value(value);
                Ok(())
            }
            None => Err(CurveError::UnknownParameter(name.to_string())),
        }
    }

    pub fn parameter_value(&self, name: &str) -> Result<Complex64, CurveError> {
        match self.omega.parameters.get(name) {
            Some(ParameterBinding::Value(v)) => Ok(*v),
            Some(ParameterBinding::Solve) => Err(CurveError::UnboundParameter(name.to_string())),
            None => Err(CurveError::UnknownParameter(name.to_string())),
        }
    }

    /// The effective form `Ω` on a component.
    pub fn omega_form(&self, component: usize) -> Result<RationalOneForm, CurveError> {
        let oc = &self.omega.components[component];
        match &oc.parameter {
            None => Ok(oc.form.clone()),
            Some(name) => Ok(oc.form.scaled(self.parameter_value(name)?)),
        }
    }

    pub fn omega_forms(&self) -> Result<Vec<RationalOneForm>, CurveError> {
        (0..self.components.len())
            .map(|c| self.omega_form(c))
            .collect()
    }

    /// The node whose point pair is the image of node `i` under `inv`,
    /// and the gluing constant it induces in the orientation of the image
    /// pair: `ψ(inv p) = λ' ψ(inv q)`.
    pub fn image_node(&self, inv: &Involution, i: usize, tol: f64) -> Option<(usize, Complex64)> {
        let n = &self.nodes[i];
        let (ip, iq) = (inv.apply(n.p), inv.apply(n.q));
        self.nodes.iter().enumerate().find_map(|(k, m)| {
            if m.p.coincides(&ip, tol) && m.q.coincides(&iq, tol) {
                Some((k, m.lambda))
            } else if m.p.coincides(&iq, tol) && m.q.coincides(&ip, tol) {
                Some((k, 1.0 / m.lambda))
            } else {
                None
            }
        })
    }

    /// `λ_σ` for node `i`: the gluing constant of its σ-image node.
    pub fn lambda_sigma(&self, i: usize, tol: f64) -> Option<Complex64> {
        self.image_node(&self.sigma, i, tol).map(|(_, l)| l)
    }

    /// Whether the data has the placement required for Darboux–Egorov
    /// metrics: `n` components, the component carrying `P_j` also carries
    /// `Q_j`, with `P_j = ∞`, `Q_j = 0`, and both node sides have the same
    /// affine coordinate.
    pub fn egorov_shape(&self, tol: f64) -> Result<(), String> {
        if self.components.len() != self.dimension {
            return Err(format!(
                "{} components for dimension {}",
                self.components.len(),
                self.dimension
            ));
        }
        for j in 0..self.dimension {
            let p = self.essential(j);
            let q = self.q_point(j);
            if !p.point.location.is_infinite() {
                return Err(format!("P_{} is not at infinity", j + 1));
            }
            if p.point.component != q.point.component {
                return Err(format!(
                    "P_{0} and Q_{0} lie on different components",
                    j + 1
                ));
            }
            if !q
                .point
                .location
                .coincides(&SpherePoint::finite(0.0, 0.0), tol)
            {
                return Err(format!("Q_{} is not at 0", j + 1));
            }
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if !n.p.location.coincides(&n.q.location, tol) {
                return Err(format!(
                    "node {} has different coordinates on its two sides",
                    i + 1
                ));
            }
        }
        Ok(())
    }
}
