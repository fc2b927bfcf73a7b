//! Structural checks on spectral data that need no solve.

use num_complex::Complex64;

use super::{
    CurveError, CurvePoint, Involution, MarkedRole, ParameterBinding, SpectralData, Status,
    ValidationReport,
};
use crate::ratfun::{RationalOneForm, SpherePoint};
use crate::Tolerances;

/// Rule names used in reports.
pub mod rule {
    pub const SQUARE_SYSTEM: &str = "square-system count";
    pub const DIVISOR_COUNT: &str = "arithmetic-genus divisor count";
    pub const CONNECTED: &str = "curve connected";
    pub const MARKED_DISTINCT: &str = "marked points distinct";
    pub const P_OFF_NODES: &str = "P distinct from node points";
    pub const Q_OFF_NODES: &str = "Q distinct from node points";
    pub const R_OFF_NODES: &str = "R distinct from node points";
    pub const GAMMA_OFF_NODES: &str = "γ distinct from node points";
    pub const NODES_DISTINCT: &str = "node points distinct";
    pub const COMPONENT_ANSATZ: &str = "component ansatz";

    pub const SIGMA_INVOLUTIVE: &str = "σ involutive";
    pub const SIGMA_FIXES_P: &str = "σ fixes P";
    pub const SIGMA_FIXES_Q: &str = "σ fixes Q";
    pub const SIGMA_NEGATES_K: &str = "σ negates local parameters";
    pub const SIGMA_NODES: &str = "σ preserves node set";

    pub const OMEGA_BOUND: &str = "Ω parameters bound";
    pub const OMEGA_ZERO_AT_P: &str = "Ω vanishes simply at P";
    pub const OMEGA_ZERO_AT_GAMMA: &str = "Ω vanishes at γ and σγ";
    pub const OMEGA_POLE_AT_Q: &str = "Ω has simple poles at Q";
    pub const OMEGA_POLE_AT_R: &str = "Ω has poles at R and σR";
    pub const OMEGA_NODE_POLES: &str = "Ω at most simple poles at nodes";
    pub const OMEGA_NO_OTHER_POLES: &str = "no other poles";
    pub const OMEGA_ZERO_COUNT: &str = "zero divisor exact";

    pub const Q_RESIDUES_EQUAL: &str = "Q residues equal";
    pub const Q_RESIDUE_UNIT: &str = "Q residue normalization";
    pub const NODE_RESIDUES: &str = "node residue condition";

    pub const TAU_PRESENT: &str = "τ present";
    pub const TAU_INVOLUTIVE: &str = "τ involutive";
    pub const TAU_FIXES_P: &str = "τ fixes P";
    pub const TAU_FIXES_Q: &str = "τ fixes Q";
    pub const TAU_CONJ_K: &str = "τ conjugates local parameters";
    pub const TAU_R: &str = "τ preserves R";
    pub const TAU_GAMMA: &str = "τ preserves γ";
    pub const TAU_NODES: &str = "τ preserves node set";
    pub const TAU_D: &str = "conj(d_j) = d_τ(j)";
    pub const TAU_LAMBDA: &str = "conj(λ) = λ_τ";
    pub const TAU_OMEGA: &str = "τ*Ω = conj(Ω)";
}

/// Residue of a form at a location, zero where no pole is recorded.
pub(crate) fn residue_at(form: &RationalOneForm, loc: SpherePoint) -> Complex64 {
    form.residue_or_zero(loc)
}

fn describe(data: &SpectralData, p: &CurvePoint) -> String {
    format!("{}@{}", data.components[p.component], p.location)
}

/// Counting rules, distinctness of marked points, connectivity, and the σ
/// hypotheses needed for orthogonality.
pub fn validate_structure(data: &SpectralData, tol: &Tolerances) -> ValidationReport {
    let mut report = ValidationReport::new();
    let (unknowns, conditions) = (data.unknown_count(), data.condition_count());
    report.verdict(
        rule::SQUARE_SYSTEM,
        if unknowns == conditions {
            vec![]
        } else {
            vec![format!("{unknowns} unknowns (components + ψ poles) vs {conditions} conditions (nodes + normalization points)")]
        },
        &format!("{unknowns} unknowns, {conditions} conditions"),
        None,
    );

    let ga = data.arithmetic_genus();
    let l = data.normalization.len() as i64;
    let expected = ga + l - 1;
    report.verdict(
        rule::DIVISOR_COUNT,
        if data.psi_poles.len() as i64 == expected {
            vec![]
        } else {
            vec![format!(
                "{} ψ poles, expected g_a + l - 1 = {ga} + {l} - 1 = {expected}",
                data.psi_poles.len()
            )]
        },
        &format!("g_a = {ga}, l = {l}, deg γ = {expected}"),
        None,
    );

    report.verdict(
        rule::CONNECTED,
        if is_connected(data) {
            vec![]
        } else {
            vec!["node graph is disconnected".into()]
        },
        "node graph connected",
        None,
    );

    let marked = data.marked_points();
    let mut distinct = Vec::new();
    let mut off_nodes: [(&str, Vec<String>); 4] = [
        (rule::P_OFF_NODES, vec![]),
        (rule::Q_OFF_NODES, vec![]),
        (rule::R_OFF_NODES, vec![]),
        (rule::GAMMA_OFF_NODES, vec![]),
    ];
    let mut nodes_distinct = Vec::new();
    for (i, (ra, pa)) in marked.iter().enumerate() {
        for (rb, pb) in &marked[..i] {
            if !pa.coincides(pb, tol.point) {
                continue;
            }
            let msg = format!("{rb} and {ra} coincide at {}", describe(data, pa));
            match (rb.is_node(), ra.is_node()) {
                (false, false) => distinct.push(msg),
                (true, true) => nodes_distinct.push(msg),
                (true, false) | (false, true) => {
                    let other = if rb.is_node() { ra } else { rb };
                    let slot = match other {
                        MarkedRole::Essential(_) => 0,
                        MarkedRole::Q(_) => 1,
                        MarkedRole::Normalization(_) => 2,
                        _ => 3,
                    };
                    off_nodes[slot].1.push(msg);
                }
            }
        }
    }
    report.verdict(
        rule::MARKED_DISTINCT,
        distinct,
        "P, Q, R, γ pairwise distinct",
        None,
    );
    for (name, fails) in off_nodes {
        report.verdict(name, fails, "ok", None);
    }
    report.verdict(rule::NODES_DISTINCT, nodes_distinct, "ok", None);

    sigma_rules(data, tol, &mut report);

    for c in 0..data.components.len() {
        if data.essential_on(c).next().is_none() && data.psi_poles_on(c).next().is_none() {
            report.push(
                rule::COMPONENT_ANSATZ,
                Status::Warn,
                format!(
                    "component `{}` carries no essential point and no ψ pole: ψ is constant there",
                    data.components[c]
                ),
                None,
            );
        }
    }
    report
}

fn is_connected(data: &SpectralData) -> bool {
    let m = data.components.len();
    let mut seen = vec![false; m];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(c) = stack.pop() {
        for n in &data.nodes {
            for (a, b) in [
                (n.p.component, n.q.component),
                (n.q.component, n.p.component),
            ] {
                if a == c && !seen[b] {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn sigma_rules(data: &SpectralData, tol: &Tolerances, report: &mut ValidationReport) {
    let sigma = &data.sigma;
    report.verdict(
        rule::SIGMA_INVOLUTIVE,
        if sigma.is_involutive(tol.point) {
            vec![]
        } else {
            vec!["σ∘σ ≠ id".into()]
        },
        "σ∘σ = id",
        None,
    );
    fixed_points(
        data,
        sigma,
        tol,
        rule::SIGMA_FIXES_P,
        rule::SIGMA_FIXES_Q,
        report,
    );

    let mut negation = Vec::new();
    for e in &data.essential_points {
        let c = e.point.component;
        if sigma.component_map[c] != c
            || !e.local_parameter().is_negated_by(&sigma.maps[c], tol.point)
        {
            negation.push(format!("σ(k_{0}) ≠ -k_{0}", e.flow + 1));
        }
    }
    report.verdict(rule::SIGMA_NEGATES_K, negation, "σ(k_j) = -k_j", None);

    let missing: Vec<String> = (0..data.nodes.len())
        .filter(|&i| data.image_node(sigma, i, tol.point).is_none())
        .map(|i| format!("σ-image of node {} is not a node", i + 1))
        .collect();
    report.verdict(rule::SIGMA_NODES, missing, "node set σ-invariant", None);
}

fn fixed_points(
    data: &SpectralData,
    inv: &Involution,
    tol: &Tolerances,
    p_rule: &str,
    q_rule: &str,
    report: &mut ValidationReport,
) {
    let p_fail: Vec<String> = data
        .essential_points
        .iter()
        .filter(|e| !inv.apply(e.point).coincides(&e.point, tol.point))
        .map(|e| format!("P_{} moved", e.flow + 1))
        .collect();
    report.verdict(p_rule, p_fail, "all P_j fixed", None);
    let q_fail: Vec<String> = data
        .q_points
        .iter()
        .filter(|q| !inv.apply(q.point).coincides(&q.point, tol.point))
        .map(|q| format!("Q_{} moved", q.coordinate + 1))
        .collect();
    report.verdict(q_rule, q_fail, "all Q_j fixed", None);
}

/// Expected multiplicities at points of one component.
fn tally(points: impl IntoIterator<Item = SpherePoint>, tol: f64) -> Vec<(SpherePoint, i64)> {
    let mut out: Vec<(SpherePoint, i64)> = Vec::new();
    for p in points {
        match out.iter_mut().find(|(q, _)| q.coincides(&p, tol)) {
            Some((_, m)) => *m += 1,
            None => out.push((p, 1)),
        }
    }
    out
}

/// Zero and pole structure of `Ω` on each component.
pub fn check_form_divisor(
    data: &SpectralData,
    tol: &Tolerances,
) -> Result<ValidationReport, CurveError> {
    let forms = data.omega_forms()?;
    let sigma = &data.sigma;
    let mut fails: [Vec<String>; 7] = Default::default();
    for (c, form) in forms.iter().enumerate() {
        let name = &data.components[c];
        let order = |p: SpherePoint| form.order_at(p, tol.point).unwrap_or(i64::MAX);

        for e in data.essential_on(c) {
            let o = order(e.point.location);
            if o != 1 {
                fails[0].push(format!("order {o} at P_{} on `{name}`", e.flow + 1));
            }
        }

        let gammas = data
            .psi_poles
            .iter()
            .flat_map(|g| [*g, sigma.apply(*g)])
            .filter(|g| g.component == c)
            .map(|g| g.location);
        let zero_gamma = tally(gammas, tol.point);
        for (p, mult) in &zero_gamma {
            let o = order(*p);
            if o < *mult {
                fails[1].push(format!("order {o} < {mult} at {p} on `{name}`"));
            }
        }

        let qs: Vec<_> = data
            .q_points
            .iter()
            .filter(|q| q.point.component == c)
            .collect();
        for q in &qs {
            let o = order(q.point.location);
            if o != -1 {
                fails[2].push(format!("order {o} at Q_{} on `{name}`", q.coordinate + 1));
            }
        }

        let rs = data
            .normalization
            .iter()
            .flat_map(|r| [r.point, sigma.apply(r.point)])
            .filter(|r| r.component == c)
            .map(|r| r.location);
        let pole_r = tally(rs, tol.point);
        for (p, mult) in &pole_r {
            let o = order(*p);
            if o > -*mult {
                fails[3].push(format!("order {o} > -{mult} at {p} on `{name}`"));
            }
        }

        let node_points: Vec<SpherePoint> = data
            .nodes
            .iter()
            .flat_map(|n| [n.p, n.q])
            .filter(|p| p.component == c)
            .map(|p| p.location)
            .collect();
        for p in &node_points {
            let o = order(*p);
            if o < -1 {
                fails[4].push(format!("order {o} at node point {p} on `{name}`"));
            }
        }

        // every actual pole must be a Q, R, σR or node point
        let allowed = |p: &SpherePoint| {
            qs.iter().any(|q| q.point.location.coincides(p, tol.point))
                || pole_r.iter().any(|(r, _)| r.coincides(p, tol.point))
                || node_points.iter().any(|n| n.coincides(p, tol.point))
        };
        let mut pole_total = 0;
        let candidates = form
            .coefficient()
            .poles()
            .iter()
            .map(|p| SpherePoint::Finite(p.location))
            .chain(std::iter::once(SpherePoint::Infinity));
        for p in candidates {
            let o = order(p);
            if o < 0 {
                pole_total += -o;
                if !allowed(&p) {
                    fails[5].push(format!(
                        "unexpected pole of order {} at {p} on `{name}`",
                        -o
                    ));
                }
            }
        }

        let expected_zeros =
            data.essential_on(c).count() as i64 + zero_gamma.iter().map(|(_, m)| m).sum::<i64>();
        if pole_total - 2 != expected_zeros {
            fails[6].push(format!(
                "`{name}`: {} zeros in total but P + γ + σγ has degree {expected_zeros}",
                pole_total - 2
            ));
        }
    }
    let [f0, f1, f2, f3, f4, f5, f6] = fails;
    let mut report = ValidationReport::new();
    report.verdict(rule::OMEGA_ZERO_AT_P, f0, "simple zeros at every P_j", None);
    report.verdict(rule::OMEGA_ZERO_AT_GAMMA, f1, "zeros at γ + σγ", None);
    report.verdict(rule::OMEGA_POLE_AT_Q, f2, "simple poles at every Q_j", None);
    report.verdict(rule::OMEGA_POLE_AT_R, f3, "poles contain R + σR", None);
    report.verdict(
        rule::OMEGA_NODE_POLES,
        f4,
        "node points at most simple poles",
        None,
    );
    report.verdict(
        rule::OMEGA_NO_OTHER_POLES,
        f5,
        "poles only at Q, R, σR and nodes",
        None,
    );
    report.verdict(
        rule::OMEGA_ZERO_COUNT,
        f6,
        "zero divisor is exactly P + γ + σγ",
        None,
    );
    Ok(report)
}

/// Residues of `Ω` at the `Q_j`.
pub(crate) fn q_residues(data: &SpectralData, forms: &[RationalOneForm]) -> Vec<Complex64> {
    (0..data.dimension)
        .map(|j| {
            let q = data.q_point(j);
            residue_at(&forms[q.point.component], q.point.location)
        })
        .collect()
}

/// The common `Q`-residue (mean of the `Res_{Q_j} Ω`).
pub fn common_q_residue(data: &SpectralData) -> Result<Complex64, CurveError> {
    let forms = data.omega_forms()?;
    let res = q_residues(data, &forms);
    Ok(res.iter().sum::<Complex64>() / res.len() as f64)
}

/// `λ λ_σ Res_a Ω_p + Res_b Ω_q` for node `i`, with the normalizing scale
/// `|λ λ_σ Res_a Ω_p| + |Res_b Ω_q|`. `None` if the σ-image node is missing.
pub(crate) fn node_condition(
    data: &SpectralData,
    forms: &[RationalOneForm],
    i: usize,
    tol: f64,
) -> Option<(Complex64, f64)> {
    let n = &data.nodes[i];
    let lambda_sigma = data.lambda_sigma(i, tol)?;
    let a = n.lambda * lambda_sigma * residue_at(&forms[n.p.component], n.p.location);
    let b = residue_at(&forms[n.q.component], n.q.location);
    Some((a + b, a.norm() + b.norm()))
}

fn normalized(value: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        value / scale
    } else {
        value
    }
}

/// Equality of the `Q`-residues and the weighted node cancellation
/// `λ λ_σ Res_a Ω_p + Res_b Ω_q = 0`.
///
/// The second node condition of the pair is the same rule applied to the
/// σ-image node, so iterating over all nodes covers both.
pub fn check_residue_conditions(
    data: &SpectralData,
    tol: &Tolerances,
) -> Result<ValidationReport, CurveError> {
    let forms = data.omega_forms()?;
    Ok(residue_conditions_with(
        data,
        &forms,
        tol.point,
        tol.residual,
    ))
}

fn residue_conditions_with(
    data: &SpectralData,
    forms: &[RationalOneForm],
    tol_pt: f64,
    tol_res: f64,
) -> ValidationReport {
    let mut report = ValidationReport::new();
    let res = q_residues(data, forms);
    let scale = res.iter().map(|r| r.norm()).fold(0.0, f64::max);
    let spread = res.iter().map(|r| (r - res[0]).norm()).fold(0.0, f64::max);
    let spread = normalized(spread, scale);
    let listing = res
        .iter()
        .enumerate()
        .map(|(j, r)| format!("Res_Q{} = {r:.6}", j + 1))
        .collect::<Vec<_>>()
        .join(", ");
    report.push(
        rule::Q_RESIDUES_EQUAL,
        if spread <= tol_res && scale > 0.0 {
            Status::Pass
        } else {
            Status::Fail
        },
        listing,
        Some(spread),
    );
    let common = res.iter().sum::<Complex64>() / res.len() as f64;
    if (common - 1.0).norm() <= tol_res {
        report.push(
            rule::Q_RESIDUE_UNIT,
            Status::Pass,
            "common residue is 1",
            None,
        );
    } else {
        report.push(
            rule::Q_RESIDUE_UNIT,
            Status::Warn,
            format!("common residue {common:.6} ≠ 1: equivalent to rescaling Ω by 1/({common:.6})"),
            Some((common - 1.0).norm()),
        );
    }

    let mut fails = Vec::new();
    let mut worst: f64 = 0.0;
    for i in 0..data.nodes.len() {
        match node_condition(data, forms, i, tol_pt) {
            None => fails.push(format!("node {}: σ-image is not a node", i + 1)),
            Some((v, s)) => {
                let r = normalized(v.norm(), s);
                worst = worst.max(r);
                if r > tol_res {
                    fails.push(format!("node {}: λλ_σ Res_a + Res_b = {v:.3e}", i + 1));
                }
            }
        }
    }
    report.verdict(
        rule::NODE_RESIDUES,
        fails,
        "λλ_σ Res_a Ω_p + Res_b Ω_q = 0 at every node",
        Some(worst),
    );
    report
}

/// Solves for a free multiplicative parameter of `Ω` from the first node
/// condition it enters, then checks all residue conditions with it and
/// binds it.
pub fn solve_scale_parameter(
    data: &mut SpectralData,
    name: &str,
    tol: &Tolerances,
) -> Result<Complex64, CurveError> {
    match data.omega.parameters.get(name) {
        None => return Err(CurveError::UnknownParameter(name.to_string())),
        Some(ParameterBinding::Value(_)) | Some(ParameterBinding::Solve) => {}
    }
    if let Some(other) = data.unbound_parameters().into_iter().find(|p| p != name) {
        return Err(CurveError::UnboundParameter(other));
    }
    let with_value = |v: f64| -> Result<Vec<RationalOneForm>, CurveError> {
        let mut d = data.clone();
        d.bind_parameter(name, Complex64::new(v, 0.0))?;
        d.omega_forms()
    };
    let (f0, f1) = (with_value(0.0)?, with_value(1.0)?);
    let mut value = None;
    for i in 0..data.nodes.len() {
        let (Some((c0, s0)), Some((c1, s1))) = (
            node_condition(data, &f0, i, tol.point),
            node_condition(data, &f1, i, tol.point),
        ) else {
            continue;
        };
        let slope = c1 - c0;
        if slope.norm() > tol.point * (s0 + s1) {
            value = Some(-c0 / slope);
            break;
        }
    }
    let value = value.ok_or_else(|| CurveError::NoConstraint(name.to_string()))?;
    let previous = data.omega.parameters[name];
    data.bind_parameter(name, value)?;
    let forms = data.omega_forms()?;
    let report = residue_conditions_with(data, &forms, tol.point, tol.point);
    if let Some(bad) = report.failures().next() {
        let err = CurveError::Inconsistent {
            name: name.to_string(),
            value,
            rule: bad.rule.clone(),
            residual: bad.residual.unwrap_or(f64::NAN),
        };
        data.omega.parameters.insert(name.to_string(), previous);
        return Err(err);
    }
    Ok(value)
}

/// σ and τ compatibility with the data.
pub fn check_involutions(data: &SpectralData, tol: &Tolerances) -> ValidationReport {
    let mut report = ValidationReport::new();
    sigma_rules(data, tol, &mut report);
    let Some(tau) = &data.tau else {
        report.push(
            rule::TAU_PRESENT,
            Status::NotApplicable,
            "no τ given: reality not asserted",
            None,
        );
        return report;
    };
    report.push(rule::TAU_PRESENT, Status::Pass, "τ given", None);
    report.verdict(
        rule::TAU_INVOLUTIVE,
        if tau.is_involutive(tol.point) {
            vec![]
        } else {
            vec!["τ∘τ ≠ id".into()]
        },
        "τ∘τ = id",
        None,
    );
    fixed_points(
        data,
        tau,
        tol,
        rule::TAU_FIXES_P,
        rule::TAU_FIXES_Q,
        &mut report,
    );

    let k_fail: Vec<String> = data
        .essential_points
        .iter()
        .filter(|e| {
            let c = e.point.component;
            tau.component_map[c] != c
                || !e
                    .local_parameter()
                    .is_conjugated_by(&tau.maps[c], tol.point)
        })
        .map(|e| format!("τ(1/k_{0}) ≠ conj(1/k_{0})", e.flow + 1))
        .collect();
    report.verdict(rule::TAU_CONJ_K, k_fail, "τ(k_j^-1) = conj(k_j^-1)", None);

    let mut r_fail = Vec::new();
    let mut d_fail = Vec::new();
    for (j, r) in data.normalization.iter().enumerate() {
        let img = tau.apply(r.point);
        match data
            .normalization
            .iter()
            .position(|s| s.point.coincides(&img, tol.point))
        {
            None => r_fail.push(format!("τ(R_{}) is not a normalization point", j + 1)),
            Some(k) => {
                let d = data.normalization[k].value;
                if (r.value.conj() - d).norm() > tol.residual * (1.0 + d.norm()) {
                    d_fail.push(format!(
                        "conj(d_{}) = {} but d_{} = {}",
                        j + 1,
                        r.value.conj(),
                        k + 1,
                        d
                    ));
                }
            }
        }
    }
    report.verdict(rule::TAU_R, r_fail, "R τ-invariant", None);
    report.verdict(
        rule::TAU_D,
        d_fail,
        "normalization values conjugate-paired",
        None,
    );

    let g_fail: Vec<String> = data
        .psi_poles
        .iter()
        .enumerate()
        .filter(|(_, g)| {
            let img = tau.apply(**g);
            !data.psi_poles.iter().any(|h| h.coincides(&img, tol.point))
        })
        .map(|(j, _)| format!("τ(γ_{}) is not a ψ pole", j + 1))
        .collect();
    report.verdict(rule::TAU_GAMMA, g_fail, "γ τ-invariant", None);

    let mut n_fail = Vec::new();
    let mut l_fail = Vec::new();
    for (i, n) in data.nodes.iter().enumerate() {
        match data.image_node(tau, i, tol.point) {
            None => n_fail.push(format!("τ-image of node {} is not a node", i + 1)),
            Some((_, lt)) => {
                if (n.lambda.conj() - lt).norm() > tol.residual * (1.0 + lt.norm()) {
                    l_fail.push(format!(
                        "node {}: conj(λ) = {} but λ_τ = {lt}",
                        i + 1,
                        n.lambda.conj()
                    ));
                }
            }
        }
    }
    report.verdict(rule::TAU_NODES, n_fail, "node set τ-invariant", None);
    report.verdict(
        rule::TAU_LAMBDA,
        l_fail,
        "gluing constants conjugate-paired",
        None,
    );

    match data.omega_forms() {
        Err(e) => report.push(rule::TAU_OMEGA, Status::NotApplicable, e.to_string(), None),
        Ok(forms) => {
            let mut worst: f64 = 0.0;
            for c in 0..forms.len() {
                // τ maps component c onto τ(c); pulling Ω_{τ(c)} back lands on c
                let pulled = forms[tau.component_map[c]].pullback(&tau.maps[c]);
                worst = worst.max(pulled.coefficient().distance(forms[c].coefficient()));
            }
            report.verdict(
                rule::TAU_OMEGA,
                if worst <= tol.point {
                    vec![]
                } else {
                    vec![format!("max coefficient mismatch {worst:.3e}")]
                },
                "τ-pullback of Ω is conj(Ω)",
                Some(worst),
            );
        }
    }
    report
}

/// Every structural, divisor, residue and involution check, merged. Unbound
/// parameters are reported as a failing rule.
pub fn validate_all(data: &SpectralData, tol: &Tolerances) -> ValidationReport {
    let mut report = validate_structure(data, tol);
    match check_form_divisor(data, tol) {
        Ok(r) => report.merge(r),
        Err(e) => report.push(rule::OMEGA_BOUND, Status::Fail, e.to_string(), None),
    }
    if let Ok(r) = check_residue_conditions(data, tol) {
        report.merge(r);
    }
    report.merge(check_involutions(data, tol));
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::parse_spectral_data;
    use crate::datasets;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bundled_data_validates() {
        for (name, _) in datasets::ALL {
            let data = datasets::load(name).unwrap();
            let report = validate_all(&data, &tol());
            assert!(report.passed(), "{name}:\n{report}");
        }
    }

    #[test]
    fn example1_genus_and_counts() {
        let data = datasets::load("example1").unwrap();
        assert_eq!(data.arithmetic_genus(), 1);
        assert_eq!(data.unknown_count(), 3);
        assert_eq!(data.condition_count(), 3);
    }

    #[test]
    fn minimal_has_no_nodes() {
        let data = datasets::load("minimal").unwrap();
        assert_eq!(data.arithmetic_genus(), 0);
        let report = validate_structure(&data, &tol());
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn gamma_on_node_point_fails() {
        let text = datasets::EXAMPLE1.replace(
            r#""psi_poles": [
    {"component": "G2", "location": [1, 0]}"#,
            r#""psi_poles": [
    {"component": "G2", "location": [0, 1]}"#,
        );
        let data = parse_spectral_data(&text).unwrap();
        let report = validate_structure(&data, &tol());
        assert_eq!(report.status(rule::GAMMA_OFF_NODES), Some(Status::Fail));
    }

    #[test]
    fn square_count_mismatch() {
        let mut data = datasets::load("example1").unwrap();
        data.normalization.push(data.normalization[0]);
        data.normalization[1].point.location = SpherePoint::finite(3.0, 0.0);
        let report = validate_structure(&data, &tol());
        assert_eq!(report.status(rule::SQUARE_SYSTEM), Some(Status::Fail));
    }

    #[test]
    fn example1_residues() {
        let data = datasets::load("example1").unwrap();
        let forms = data.omega_forms().unwrap();
        let q = q_residues(&data, &forms);
        assert!((q[0] - c(-1.0, 0.0)).norm() < 1e-12);
        assert!((q[1] - c(-1.0, 0.0)).norm() < 1e-12);
        let report = check_residue_conditions(&data, &tol()).unwrap();
        assert_eq!(report.status(rule::Q_RESIDUE_UNIT), Some(Status::Warn));
        assert_eq!(report.status(rule::NODE_RESIDUES), Some(Status::Pass));
    }

    #[test]
    fn example1_node_condition_with_product_five() {
        let mut data = datasets::load("example1").unwrap();
        data.nodes[0].lambda = c(1.0, 2.0);
        data.nodes[1].lambda = c(1.0, -2.0);
        data.bind_parameter("s", c(0.8, 0.0)).unwrap();
        let forms = data.omega_forms().unwrap();
        let n = &data.nodes[0];
        let res_a = residue_at(&forms[0], n.p.location);
        assert!((res_a - c(-0.2, 0.0)).norm() < 1e-12);
        let report = check_residue_conditions(&data, &tol()).unwrap();
        assert_eq!(report.status(rule::NODE_RESIDUES), Some(Status::Pass));
        assert!(check_involutions(&data, &tol()).passed());
    }

    #[test]
    fn solve_scale_examples() {
        let cases = [
            ("example1", (c(1.0, 2.0), c(1.0, -2.0)), c(0.8, 0.0)),
            ("example2", (c(1.0, 2.0), c(1.0, -2.0)), c(9.0 / 80.0, 0.0)),
            (
                "example3",
                (c(1.0, 0.0), c(5.0 / 3.0, 0.0)),
                c(1.0 / 9.0, 0.0),
            ),
        ];
        for (name, (l, m), expected) in cases {
            let mut data = datasets::load(name).unwrap();
            data.nodes[0].lambda = l;
            data.nodes[1].lambda = m;
            data.omega
                .parameters
                .insert("s".into(), ParameterBinding::Solve);
            let s = solve_scale_parameter(&mut data, "s", &tol()).unwrap();
            assert!((s - expected).norm() < 1e-12, "{name}: {s}");
            assert_eq!(data.parameter_value("s").unwrap(), s);
            assert!(check_residue_conditions(&data, &tol()).unwrap().passed());
        }
    }

    #[test]
    fn inconsistent_scale_is_reported_and_unbound() {
        let text = datasets::EXAMPLE1.replace(
            r#""numerator": [[-1, 0], [0, 0], [1, 0]]"#,
            r#""numerator": [[-1, 0], [0.1, 0], [1, 0]]"#,
        );
        let mut data = parse_spectral_data(&text).unwrap();
        data.omega
            .parameters
            .insert("s".into(), ParameterBinding::Solve);
        let err = solve_scale_parameter(&mut data, "s", &tol()).unwrap_err();
        assert!(
            matches!(err, CurveError::Inconsistent { ref rule, .. } if rule == rule::NODE_RESIDUES)
        );
        assert_eq!(data.unbound_parameters(), vec!["s".to_string()]);
    }

    #[test]
    fn unknown_parameter() {
        let mut data = datasets::load("example1").unwrap();
        assert!(matches!(
            solve_scale_parameter(&mut data, "t", &tol()),
            Err(CurveError::UnknownParameter(_))
        ));
    }

    #[test]
    fn unbound_parameter_blocks_divisor_check() {
        let mut data = datasets::load("example3").unwrap();
        data.omega
            .parameters
            .insert("s".into(), ParameterBinding::Solve);
        assert!(matches!(
            check_form_divisor(&data, &tol()),
            Err(CurveError::UnboundParameter(_))
        ));
        let report = validate_all(&data, &tol());
        assert_eq!(report.status(rule::OMEGA_BOUND), Some(Status::Fail));
    }

    #[test]
    fn spurious_pole_fails() {
        let text = datasets::EXAMPLE3.replace(
            r#"{"location": [-2, 0], "order": 1}"#,
            r#"{"location": [-2, 0], "order": 1}, {"location": [5, 0], "order": 1}"#,
        );
        let data = parse_spectral_data(&text).unwrap();
        let report = check_form_divisor(&data, &tol()).unwrap();
        assert_eq!(
            report.status(rule::OMEGA_NO_OTHER_POLES),
            Some(Status::Fail)
        );
    }

    #[test]
    fn b_off_i_gamma_passes_divisor_but_not_residues() {
        let mut data = datasets::load("example1").unwrap();
        let b = c(0.0, 2.0);
        let num = crate::ratfun::Polynomial::new(vec![c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let rf = crate::ratfun::RationalFunction::new(
            num,
            vec![
                crate::ratfun::Pole {
                    location: c(0.0, 0.0),
                    order: 1,
                },
                crate::ratfun::Pole {
                    location: b,
                    order: 1,
                },
                crate::ratfun::Pole {
                    location: -b,
                    order: 1,
                },
            ],
            c(1.0, 0.0),
        )
        .unwrap();
        data.omega.components[1].form = RationalOneForm::new(rf);
        data.nodes[0].q.location = SpherePoint::Finite(b);
        data.nodes[1].q.location = SpherePoint::Finite(-b);
        assert!(check_form_divisor(&data, &tol()).unwrap().passed());
        let report = check_residue_conditions(&data, &tol()).unwrap();
        assert_eq!(report.status(rule::Q_RESIDUES_EQUAL), Some(Status::Fail));
    }

    #[test]
    fn mu_not_conjugate_fails_tau() {
        let mut data = datasets::load("example1").unwrap();
        data.nodes[0].lambda = c(1.0, 2.0);
        data.nodes[1].lambda = c(1.0, 1.0);
        let report = check_involutions(&data, &tol());
        assert_eq!(report.status(rule::TAU_LAMBDA), Some(Status::Fail));
        assert_eq!(report.status(rule::SIGMA_NODES), Some(Status::Pass));
    }

    #[test]
    fn no_tau_is_not_applicable() {
        let mut data = datasets::load("example3").unwrap();
        data.tau = None;
        let report = check_involutions(&data, &tol());
        assert_eq!(
            report.status(rule::TAU_PRESENT),
            Some(Status::NotApplicable)
        );
        assert!(report.passed());
    }
}
