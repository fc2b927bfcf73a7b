//! Residue tables of `Ω` for display.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use super::validate::{node_condition, q_residues};
use super::{CurveError, SpectralData};
use crate::ratfun::SpherePoint;
use crate::Tolerances;

/// One point of one component: every marked point and every pole of `Ω`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidueRow {
    pub component: String,
    pub point: String,
    pub roles: Vec<String>,
    /// Order of `Ω` at the point (negative for poles).
    pub order: Option<i64>,
    pub residue: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeRow {
    pub node: usize,
    /// `λ λ_σ Res_a Ω + Res_b Ω`, absent when the σ-image is not a node.
    pub weighted_sum: Option<Complex64>,
    pub normalized: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidueTable {
    pub parameters: Vec<(String, Complex64)>,
    pub rows: Vec<ResidueRow>,
    pub q_residues: Vec<Complex64>,
    pub q_spread: f64,
    pub q_equal: bool,
    pub nodes: Vec<NodeRow>,
    pub tolerance: f64,
}

impl ResidueTable {
    pub fn passed(&self) -> bool {
        self.q_equal
            && self
                .nodes
                .iter()
                .all(|n| n.normalized.is_none_or(|r| r <= self.tolerance))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }
}

/// Residues of a fully bound `Ω` at all marked points and poles.
pub fn residue_table(data: &SpectralData, tol: &Tolerances) -> Result<ResidueTable, CurveError> {
    let forms = data.omega_forms()?;
    let marked = data.marked_points();
    let mut rows = Vec::new();
    for (c, form) in forms.iter().enumerate() {
        let mut points: Vec<(SpherePoint, Vec<String>)> = Vec::new();
        let mut add = |loc: SpherePoint, role: Option<String>| match points
            .iter_mut()
            .find(|(p, _)| p.coincides(&loc, tol.point))
        {
            Some((_, roles)) => roles.extend(role),
            None => points.push((loc, role.into_iter().collect())),
        };
        for (role, p) in marked.iter().filter(|(_, p)| p.component == c) {
            add(p.location, Some(role.to_string()));
        }
        for p in form.coefficient().poles() {
            add(SpherePoint::Finite(p.location), None);
        }
        if form
            .order_at(SpherePoint::Infinity, tol.point)
            .is_some_and(|o| o < 0)
        {
            add(SpherePoint::Infinity, None);
        }
        for (loc, roles) in points {
            rows.push(ResidueRow {
                component: data.components[c].clone(),
                point: loc.to_string(),
                roles,
                order: form.order_at(loc, tol.point),
                residue: form.residue_or_zero(loc),
            });
        }
    }

    let q = q_residues(data, &forms);
    let q_spread = q.iter().map(|r| (r - q[0]).norm()).fold(0.0, f64::max) / q[0].norm().max(1.0);
    let nodes = (0..data.nodes.len())
        .map(|i| {
            let cond = node_condition(data, &forms, i, tol.point);
            NodeRow {
                node: i + 1,
                weighted_sum: cond.map(|(v, _)| v),
                normalized: cond.map(|(v, scale)| {
                    if scale > 0.0 {
                        v.norm() / scale
                    } else {
                        v.norm()
                    }
                }),
            }
        })
        .collect();
    let parameters = data
        .omega
        .parameters
        .keys()
        .map(|name| data.parameter_value(name).map(|v| (name.clone(), v)))
        .collect::<Result<_, _>>()?;
    Ok(ResidueTable {
        parameters,
        rows,
        q_residues: q,
        q_spread,
        q_equal: q_spread <= tol.residual,
        nodes,
        tolerance: tol.residual,
    })
}

fn complex(z: Complex64) -> String {
    format!("{:+.12e} {:+.12e}i", z.re, z.im)
}

impl fmt::Display for ResidueTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, v) in &self.parameters {
            writeln!(f, "parameter {name} = {}", complex(*v))?;
        }
        writeln!(
            f,
            "{:<10} {:<24} {:>6}  {:<42} roles",
            "component", "point", "order", "residue"
        )?;
        for r in &self.rows {
            let order = r.order.map_or("-".to_string(), |o| o.to_string());
            writeln!(
                f,
                "{:<10} {:<24} {:>6}  {:<42} {}",
                r.component,
                r.point,
                order,
                complex(r.residue),
                r.roles.join(", ")
            )?;
        }
        for (j, r) in self.q_residues.iter().enumerate() {
            writeln!(f, "Res_Q{} = {}", j + 1, complex(*r))?;
        }
        writeln!(
            f,
            "Q residues equal: {} (spread {:.3e})",
            if self.q_equal { "yes" } else { "NO" },
            self.q_spread
        )?;
        for n in &self.nodes {
            match (n.weighted_sum, n.normalized) {
                (Some(v), Some(r)) => writeln!(
                    f,
                    "node {}: λλ_σ Res_a + Res_b = {} (normalized {r:.3e})",
                    n.node,
                    complex(v)
                )?,
                _ => writeln!(f, "node {}: σ-image is not a node", n.node)?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;

    #[test]
    fn example1_table() {
        let data = datasets::load("example1").unwrap();
        let t = residue_table(&data, &Tolerances::default()).unwrap();
        assert!(t.passed());
        for r in &t.q_residues {
            assert!((r - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        }
        assert!(t.nodes.iter().all(|n| n.normalized.unwrap() < 1e-12));
    }

    #[test]
    fn example2_lists_double_pole() {
        let data = datasets::load("example2").unwrap();
        let t = residue_table(&data, &Tolerances::default()).unwrap();
        let row = t
            .rows
            .iter()
            .find(|r| r.roles.iter().any(|x| x == "R_1"))
            .unwrap();
        assert_eq!(row.order, Some(-2));
    }

    #[test]
    fn unbound_parameter_is_an_error() {
        let mut data = datasets::load("example3").unwrap();
        data.omega
            .parameters
            .insert("s".into(), super::super::ParameterBinding::Solve);
        assert!(residue_table(&data, &Tolerances::default()).is_err());
    }
}
