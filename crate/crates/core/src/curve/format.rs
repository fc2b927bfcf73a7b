//! The `.bacurve` JSON format.
//!
//! ```json
//! {
//!   "dimension": 2,
//!   "components": ["G1", "G2"],
//!   "essential_points": [{"component": "G1", "location": "inf", "flow_index": 1}],
//!   "q_points": [{"component": "G2", "location": [0, 0], "coordinate_index": 2}],
//!   "normalization": [{"component": "G1", "location": [1, 0], "value": [1, 0]}],
//!   "psi_poles": [{"component": "G2", "location": [1, 0]}],
//!   "nodes": [{"p": {"component": "G1", "location": [0, 1]},
//!              "q": {"component": "G2", "location": [0, 1]}, "lambda": [1, 0]}],
//!   "sigma": {"component_map": {"G1": "G1"}, "mobius": {"G1": [[[-1,0],[0,0]],[[0,0],[1,0]]]},
//!             "conjugating": false},
//!   "omega": {"G1": {"numerator": [[0,0],[1,0]], "poles": [{"location": [1,0], "order": 1}],
//!                    "scale": {"param": "s"}}},
//!   "parameters": {"s": "solve"}
//! }
//! ```
//!
//! Complex numbers are `[re, im]` pairs (a bare real number is also
//! accepted); infinity is the string `"inf"`.

use std::collections::{BTreeMap, HashSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    CurvePoint, EssentialPoint, Involution, Node, NormalizationPoint, OmegaComponent, OmegaSpec,
    ParameterBinding, ParseError, QPoint, SpectralData,
};
use crate::ratfun::{
    MobiusMap, Pole, Polynomial, RationalFunction, RationalOneForm, SpherePoint, POINT_TOL,
};

#[derive(Serialize, Deserialize, Clone, Copy, Debug)]
#[serde(untagged)]
enum RawComplex {
    Pair([f64; 2]),
    Real(f64),
}

impl RawComplex {
    fn value(self) -> Complex64 {
        match self {
            RawComplex::Pair([re, im]) => Complex64::new(re, im),
            RawComplex::Real(re) => Complex64::new(re, 0.0),
        }
    }

    fn from_value(z: Complex64) -> Self {
        RawComplex::Pair([z.re, z.im])
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(untagged)]
enum RawLocation {
    Complex(RawComplex),
    Keyword(String),
}

impl RawLocation {
    fn value(&self) -> Result<SpherePoint, ParseError> {
        match self {
            RawLocation::Complex(c) => Ok(SpherePoint::Finite(c.value())),
            RawLocation::Keyword(k) if k == "inf" => Ok(SpherePoint::Infinity),
            RawLocation::Keyword(k) => Err(ParseError::Schema(format!(
                "location must be [re, im] or \"inf\", found \"{k}\""
            ))),
        }
    }

    fn from_value(p: SpherePoint) -> Self {
        match p {
            SpherePoint::Finite(z) => RawLocation::Complex(RawComplex::from_value(z)),
            SpherePoint::Infinity => RawLocation::Keyword("inf".to_string()),
        }
    }
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RawPoint {
    component: String,
    location: RawLocation,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RawEssential {
    component: String,
    location: RawLocation,
    flow_index: usize,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RawQ {
    component: String,
    location: RawLocation,
    coordinate_index: usize,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RawNormalization {
    component: String,
    location: RawLocation,
    value: RawComplex,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RawNode {
    p: RawPoint,
    q: RawPoint,
    lambda: RawComplex,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RawInvolution {
    component_map: BTreeMap<String, String>,
    mobius: BTreeMap<String, [[RawComplex; 2]; 2]>,
    #[serde(default)]
    conjugating: bool,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RawPole {
    location: RawComplex,
    order: u32,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(untagged)]
enum RawScale {
    Param { param: String },
    Value(RawComplex),
}

fn unit_scale() -> RawScale {
    RawScale::Value(RawComplex::Real(1.0))
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RawForm {
    numerator: Vec<RawComplex>,
    #[serde(default)]
    poles: Vec<RawPole>,
    #[serde(default = "unit_scale")]
    scale: RawScale,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(untagged)]
enum RawBinding {
    Value(RawComplex),
    Keyword(String),
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RawData {
    dimension: usize,
    components: Vec<String>,
    essential_points: Vec<RawEssential>,
    q_points: Vec<RawQ>,
    normalization: Vec<RawNormalization>,
    #[serde(default)]
    psi_poles: Vec<RawPoint>,
    #[serde(default)]
    nodes: Vec<RawNode>,
    sigma: RawInvolution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau: Option<RawInvolution>,
    omega: BTreeMap<String, RawForm>,
    #[serde(default)]
    parameters: BTreeMap<String, RawBinding>,
}

/// Parses and checks a `.bacurve` document.
pub fn parse_spectral_data(text: &str) -> Result<SpectralData, ParseError> {
    let raw: RawData = serde_json::from_str(text).map_err(|e| {
        use serde_json::error::Category;
        match e.classify() {
            Category::Data => ParseError::Schema(e.to_string()),
            _ => ParseError::Syntax {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            },
        }
    })?;
    Builder::new(&raw)?.build(&raw)
}

struct Builder {
    index: BTreeMap<String, usize>,
}

fn check_finite(z: Complex64, what: &str) -> Result<Complex64, ParseError> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(ParseError::invariant(
            "finite numbers",
            format!("{what} is not finite"),
        ))
    }
}

impl Builder {
    fn new(raw: &RawData) -> Result<Self, ParseError> {
        if raw.dimension == 0 {
            return Err(ParseError::invariant("dimension ≥ 1", "dimension is 0"));
        }
        let mut index = BTreeMap::new();
        for (i, id) in raw.components.iter().enumerate() {
            if id.is_empty() {
                return Err(ParseError::invariant(
                    "component ids unique",
                    "empty component id",
                ));
            }
            if index.insert(id.clone(), i).is_some() {
                return Err(ParseError::invariant(
                    "component ids unique",
                    format!("duplicate id `{id}`"),
                ));
            }
        }
        Ok(Self { index })
    }

    fn component(&self, id: &str) -> Result<usize, ParseError> {
        self.index.get(id).copied().ok_or_else(|| {
            ParseError::invariant("known component", format!("unknown component `{id}`"))
        })
    }

    fn point(&self, component: &str, location: &RawLocation) -> Result<CurvePoint, ParseError> {
        let loc = location.value()?;
        if let SpherePoint::Finite(z) = loc {
            check_finite(z, "location")?;
        }
        Ok(CurvePoint::new(self.component(component)?, loc))
    }

    fn involution(&self, raw: &RawInvolution, name: &str) -> Result<Involution, ParseError> {
        let n = self.index.len();
        let mut component_map = vec![usize::MAX; n];
        for (from, to) in &raw.component_map {
            component_map[self.component(from)?] = self.component(to)?;
        }
        let mut seen = vec![false; n];
        for (c, &img) in component_map.iter().enumerate() {
            if img == usize::MAX || std::mem::replace(&mut seen[img], true) {
                return Err(ParseError::invariant(
                    "involution component map is a permutation",
                    format!("{name}: component {c} unmapped or image repeated"),
                ));
            }
        }
        let mut maps = vec![None; n];
        for (id, m) in &raw.mobius {
            let c = self.component(id)?;
            let entry = |k: RawComplex| check_finite(k.value(), "Möbius entry");
            let map = MobiusMap::new(
                entry(m[0][0])?,
                entry(m[0][1])?,
                entry(m[1][0])?,
                entry(m[1][1])?,
                raw.conjugating,
            );
            if map.is_degenerate() {
                return Err(ParseError::invariant(
                    "Möbius map nondegenerate",
                    format!("{name} on `{id}` has zero determinant"),
                ));
            }
            maps[c] = Some(map);
        }
        let maps = maps
            .into_iter()
            .enumerate()
            .map(|(c, m)| {
                m.ok_or_else(|| {
                    ParseError::Schema(format!("{name}: no Möbius map for component {c}"))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Involution {
            component_map,
            maps,
            conjugating: raw.conjugating,
        })
    }

    fn form(&self, id: &str, raw: &RawForm) -> Result<OmegaComponent, ParseError> {
        let numerator = Polynomial::new(
            raw.numerator
                .iter()
                .map(|c| check_finite(c.value(), "Ω numerator coefficient"))
                .collect::<Result<_, _>>()?,
        );
        if numerator.is_zero() {
            return Err(ParseError::invariant(
                "Ω nonzero",
                format!("Ω on `{id}` is identically zero"),
            ));
        }
        let mut poles = Vec::with_capacity(raw.poles.len());
        for p in &raw.poles {
            if p.order == 0 {
                return Err(ParseError::invariant(
                    "Ω pole orders positive",
                    format!("zero-order pole on `{id}`"),
                ));
            }
            poles.push(Pole::new(
                check_finite(p.location.value(), "Ω pole")?,
                p.order,
            ));
        }
        let (scale, parameter) = match &raw.scale {
            RawScale::Value(v) => (check_finite(v.value(), "Ω scale")?, None),
            RawScale::Param { param } => (Complex64::new(1.0, 0.0), Some(param.clone())),
        };
        let f = RationalFunction::new(numerator, poles, scale).map_err(|e| {
            ParseError::invariant("Ω pole locations distinct", format!("Ω on `{id}`: {e}"))
        })?;
        if !f.is_reduced(POINT_TOL) {
            return Err(ParseError::invariant(
                "Ω numerator coprime to its poles",
                format!("Ω numerator on `{id}` vanishes at a declared pole"),
            ));
        }
        Ok(OmegaComponent {
            form: RationalOneForm::new(f),
            parameter,
        })
    }

    fn build(&self, raw: &RawData) -> Result<SpectralData, ParseError> {
        let n = raw.dimension;
        let essential_points = raw
            .essential_points
            .iter()
            .map(|e| {
                Ok(EssentialPoint {
                    point: self.point(&e.component, &e.location)?,
                    flow: e.flow_index.wrapping_sub(1),
                })
            })
            .collect::<Result<Vec<_>, ParseError>>()?;
        check_index_set(
            essential_points.iter().map(|e| e.flow),
            n,
            "flow indices are exactly 1..n",
        )?;

        let q_points = raw
            .q_points
            .iter()
            .map(|q| {
                Ok(QPoint {
                    point: self.point(&q.component, &q.location)?,
                    coordinate: q.coordinate_index.wrapping_sub(1),
                })
            })
            .collect::<Result<Vec<_>, ParseError>>()?;
        check_index_set(
            q_points.iter().map(|q| q.coordinate),
            n,
            "coordinate indices are exactly 1..n",
        )?;

        let normalization = raw
            .normalization
            .iter()
            .map(|r| {
                Ok(NormalizationPoint {
                    point: self.point(&r.component, &r.location)?,
                    value: check_finite(r.value.value(), "normalization value")?,
                })
            })
            .collect::<Result<Vec<_>, ParseError>>()?;
        if normalization.iter().all(|r| r.value.norm() == 0.0) {
            return Err(ParseError::invariant(
                "normalization values not all zero",
                "every d_j is zero (or no normalization point given)",
            ));
        }

        let psi_poles = raw
            .psi_poles
            .iter()
            .map(|g| self.point(&g.component, &g.location))
            .collect::<Result<Vec<_>, ParseError>>()?;
        if psi_poles.iter().any(|g| g.location.is_infinite()) {
            return Err(ParseError::invariant(
                "ψ poles finite",
                "a ψ pole is at infinity",
            ));
        }

        let nodes = raw
            .nodes
            .iter()
            .enumerate()
            .map(|(i, node)| {
                let p = self.point(&node.p.component, &node.p.location)?;
                let q = self.point(&node.q.component, &node.q.location)?;
                let lambda = check_finite(node.lambda.value(), "lambda")?;
                if lambda.norm() == 0.0 {
                    return Err(ParseError::invariant(
                        "lambda ≠ 0",
                        format!("node {} has λ = 0", i + 1),
                    ));
                }
                if p.coincides(&q, POINT_TOL) {
                    return Err(ParseError::invariant(
                        "node sides distinct",
                        format!("node {} glues a point to itself", i + 1),
                    ));
                }
                Ok(Node { p, q, lambda })
            })
            .collect::<Result<Vec<_>, ParseError>>()?;

        let sigma = self.involution(&raw.sigma, "σ")?;
        if sigma.conjugating {
            return Err(ParseError::invariant(
                "σ holomorphic",
                "σ is marked conjugating",
            ));
        }
        let tau = raw
            .tau
            .as_ref()
            .map(|t| self.involution(t, "τ"))
            .transpose()?;
        if tau.as_ref().is_some_and(|t| !t.conjugating) {
            return Err(ParseError::invariant(
                "τ antiholomorphic",
                "τ must be conjugating",
            ));
        }

        let mut components = vec![None; raw.components.len()];
        for (id, f) in &raw.omega {
            components[self.component(id)?] = Some(self.form(id, f)?);
        }
        let components = components
            .into_iter()
            .enumerate()
            .map(|(c, f)| {
                f.ok_or_else(|| {
                    ParseError::Schema(format!(
                        "omega missing for component `{}`",
                        raw.components[c]
                    ))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;

        let mut parameters = BTreeMap::new();
        for (name, b) in &raw.parameters {
            let binding = match b {
                RawBinding::Value(v) => {
                    ParameterBinding::Value(check_finite(v.value(), "parameter")?)
                }
                RawBinding::Keyword(k) if k == "solve" => ParameterBinding::Solve,
                RawBinding::Keyword(k) => {
                    return Err(ParseError::Schema(format!(
                        "parameter `{name}` must be a number or \"solve\", found \"{k}\""
                    )))
                }
            };
            parameters.insert(name.clone(), binding);
        }
        let used: HashSet<&str> = components
            .iter()
            .filter_map(|c| c.parameter.as_deref())
            .collect();
        for name in &used {
            if !parameters.contains_key(*name) {
                return Err(ParseError::invariant(
                    "Ω parameters declared",
                    format!("parameter `{name}` is not listed in `parameters`"),
                ));
            }
        }
        for name in parameters.keys() {
            if !used.contains(name.as_str()) {
                return Err(ParseError::invariant(
                    "parameters referenced",
                    format!("parameter `{name}` appears in no component form"),
                ));
            }
        }

        Ok(SpectralData {
            dimension: n,
            components: raw.components.clone(),
            essential_points,
            q_points,
            normalization,
            psi_poles,
            nodes,
            sigma,
            tau,
            omega: OmegaSpec {
                components,
                parameters,
            },
        })
    }
}

fn check_index_set(
    indices: impl Iterator<Item = usize>,
    n: usize,
    rule: &str,
) -> Result<(), ParseError> {
    let mut seen = vec![false; n];
    let mut count = 0;
    for i in indices {
        count += 1;
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(ParseError::invariant(
                rule,
                format!("index {} out of range or repeated", i.wrapping_add(1)),
            ));
        }
    }
    if count != n {
        return Err(ParseError::invariant(
            rule,
            format!("{count} entries for dimension {n}"),
        ));
    }
    Ok(())
}

fn raw_point(data: &SpectralData, p: &CurvePoint) -> RawPoint {
    RawPoint {
        component: data.components[p.component].clone(),
        location: RawLocation::from_value(p.location),
    }
}

fn raw_involution(data: &SpectralData, inv: &Involution) -> RawInvolution {
    let c = RawComplex::from_value;
    RawInvolution {
        component_map: inv
            .component_map
            .iter()
            .enumerate()
            .map(|(from, &to)| (data.components[from].clone(), data.components[to].clone()))
            .collect(),
        mobius: inv
            .maps
            .iter()
            .enumerate()
            .map(|(k, m)| {
                (
                    data.components[k].clone(),
                    [[c(m.a), c(m.b)], [c(m.c), c(m.d)]],
                )
            })
            .collect(),
        conjugating: inv.conjugating,
    }
}

/// Writes spectral data back to the `.bacurve` format.
pub fn serialize_spectral_data(data: &SpectralData) -> String {
    let c = RawComplex::from_value;
    let raw = RawData {
        dimension: data.dimension,
        components: data.components.clone(),
        essential_points: data
            .essential_points
            .iter()
            .map(|e| {
                let p = raw_point(data, &e.point);
                RawEssential {
                    component: p.component,
                    location: p.location,
                    flow_index: e.flow + 1,
                }
            })
            .collect(),
        q_points: data
            .q_points
            .iter()
            .map(|q| {
                let p = raw_point(data, &q.point);
                RawQ {
                    component: p.component,
                    location: p.location,
                    coordinate_index: q.coordinate + 1,
                }
            })
            .collect(),
        normalization: data
            .normalization
            .iter()
            .map(|r| {
                let p = raw_point(data, &r.point);
                RawNormalization {
                    component: p.component,
                    location: p.location,
                    value: c(r.value),
                }
            })
            .collect(),
        psi_poles: data.psi_poles.iter().map(|g| raw_point(data, g)).collect(),
        nodes: data
            .nodes
            .iter()
            .map(|n| RawNode {
                p: raw_point(data, &n.p),
                q: raw_point(data, &n.q),
                lambda: c(n.lambda),
            })
            .collect(),
        sigma: raw_involution(data, &data.sigma),
        tau: data.tau.as_ref().map(|t| raw_involution(data, t)),
        omega: data
            .omega
            .components
            .iter()
            .enumerate()
            .map(|(k, oc)| {
                let f = oc.form.coefficient();
                let scale = match &oc.parameter {
                    Some(name) => RawScale::Param {
                        param: name.clone(),
                    },
                    None => RawScale::Value(c(f.scale())),
                };
                let form = RawForm {
                    numerator: f.numerator().coeffs().iter().map(|&z| c(z)).collect(),
                    poles: f
                        .poles()
                        .iter()
                        .map(|p| RawPole {
                            location: c(p.location),
                            order: p.order,
                        })
                        .collect(),
                    scale,
                };
                (data.components[k].clone(), form)
            })
            .collect(),
        parameters: data
            .omega
            .parameters
            .iter()
            .map(|(k, b)| {
                let v = match b {
                    ParameterBinding::Value(v) => RawBinding::Value(c(*v)),
                    ParameterBinding::Solve => RawBinding::Keyword("solve".to_string()),
                };
                (k.clone(), v)
            })
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("spectral data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;

    #[test]
    fn zero_lambda_is_an_invariant_error() {
        let text = datasets::EXAMPLE1.replacen(r#""lambda": [1, 0]"#, r#""lambda": [0, 0]"#, 1);
        match parse_spectral_data(&text) {
            Err(ParseError::Invariant { rule, .. }) => assert_eq!(rule, "lambda ≠ 0"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_text_reports_position() {
        match parse_spectral_data("{\n  \"dimension\": 2,\n  oops") {
            Err(ParseError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_field_is_schema_error() {
        let text = datasets::MINIMAL.replace(r#""dimension": 1,"#, "");
        assert!(matches!(
            parse_spectral_data(&text),
            Err(ParseError::Schema(_))
        ));
    }

    #[test]
    fn unknown_component_rejected() {
        let text = datasets::MINIMAL.replace(
            r#"{"component": "G", "location": [0, 0]"#,
            r#"{"component": "H", "location": [0, 0]"#,
        );
        assert!(matches!(
            parse_spectral_data(&text),
            Err(ParseError::Invariant { .. })
        ));
    }

    #[test]
    fn round_trip() {
        for (name, text) in datasets::ALL {
            let data = parse_spectral_data(text).unwrap();
            let again = parse_spectral_data(&serialize_spectral_data(&data)).unwrap();
            assert_eq!(data, again, "{name}");
        }
    }
}
