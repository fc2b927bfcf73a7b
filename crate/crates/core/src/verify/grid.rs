use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    coordinates, coordinates_from, egorov_from, epd_from, node_cancellation_from,
    orthogonality_from, random_probe, reality_from, CoordinateSample, VerifyError,
};
use crate::basolver::{solve_coefficients, FlowPoint};
use crate::curve::SpectralData;
use crate::Tolerances;

/// One axis of a grid: `count` equispaced values in `[min, max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn value(&self, k: usize) -> f64 {
        self.min + (self.max - self.min) * k as f64 / (self.count - 1) as f64
    }
}

/// A rectangular grid of real flow points. Parsed from comma-separated
/// `min:max:count` entries, one per flow variable.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self, String> {
        if axes.is_empty() {
            return Err("grid has no axes".into());
        }
        for (i, a) in axes.iter().enumerate() {
            if !(a.min.is_finite() && a.max.is_finite() && a.min < a.max) {
                return Err(format!("axis {}: need finite min < max", i + 1));
            }
            if a.count < 2 {
                return Err(format!("axis {}: count must be at least 2", i + 1));
            }
        }
        Ok(Self { axes })
    }

    /// `[-1, 1]` with `count` points along each of `n` axes.
    pub fn square(n: usize, count: usize) -> Self {
        Self::new(vec![
            Axis {
                min: -1.0,
                max: 1.0,
                count
            };
            n
        ])
        .expect("valid square grid")
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid points with the first axis varying slowest.
    pub fn points(&self) -> Vec<FlowPoint> {
        (0..self.len()).map(|idx| self.point(idx)).collect()
    }

    pub fn point(&self, mut idx: usize) -> FlowPoint {
        let mut u = vec![0.0; self.dim()];
        for (d, a) in self.axes.iter().enumerate().rev() {
            u[d] = a.value(idx % a.count);
            idx /= a.count;
        }
        FlowPoint::real(&u)
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let axes = s
            .split(',')
            .map(|part| {
                let f: Vec<&str> = part.trim().split(':').collect();
                let [min, max, count] = f[..] else {
                    return Err(format!("`{part}`: expected min:max:count"));
                };
                let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
                Ok(Axis {
                    min: num(min)?,
                    max: num(max)?,
                    count: count
                        .trim()
                        .parse()
                        .map_err(|e| format!("`{count}`: {e}"))?,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(axes)
    }
}

/// Evaluation strategy over grid samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Data-parallel over samples; identical to sequential without the
    /// `parallel` feature.
    #[default]
    Parallel,
}

/// Pass thresholds per check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    pub orthogonality: f64,
    pub reality: f64,
    pub probes: f64,
    pub lame: f64,
    pub beta: f64,
    pub second_order: f64,
    pub residues: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            orthogonality: 1e-8,
            reality: 1e-8,
            probes: 1e-9,
            lame: 1e-8,
            beta: 1e-8,
            second_order: 1e-6,
            residues: 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReportOptions {
    pub seed: u64,
    /// Random curve points per sample for probe checks.
    pub probes: usize,
    pub tol: Tolerances,
    pub thresholds: Thresholds,
    pub execution: Execution,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            probes: 10,
            tol: Tolerances::default(),
            thresholds: Thresholds::default(),
            execution: Execution::default(),
        }
    }
}

const CHECKS: [&str; 9] = [
    "orthogonality",
    "reality_coordinates",
    "reality_probes",
    "lame_identity",
    "beta_symmetry",
    "second_order_equation",
    "node_cancellation",
    "component_residue_sums",
    "q_residue_sum",
];

/// Aggregate of one check over the grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub max_residual: f64,
    pub worst_u: Option<Vec<f64>>,
    pub n_samples: usize,
    pub n_gaps: usize,
    pub applicable: bool,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub grid: GridSpec,
    pub n_samples: usize,
    pub n_gaps: usize,
    pub checks: Vec<CheckSummary>,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} samples, {} gaps, seed {}",
            self.n_samples, self.n_gaps, self.seed
        )?;
        for c in &self.checks {
            let verdict = match (c.applicable, c.passed) {
                (false, _) => "n/a ",
                (true, true) => "pass",
                (true, false) => "FAIL",
            };
            write!(f, "[{verdict}] {:<24}", c.name)?;
            if c.applicable {
                write!(f, " max {:.3e} (tol {:.0e})", c.max_residual, c.tolerance)?;
                if let Some(u) = &c.worst_u {
                    write!(f, " at u = {u:?}")?;
                }
                write!(f, ", {} samples, {} gaps", c.n_samples, c.n_gaps)?;
            }
            if let Some(note) = &c.note {
                write!(f, "  {note}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Outcome of one check at one sample.
#[derive(Clone, Debug)]
enum Outcome {
    Value(f64),
    Gap,
    NotApplicable(String),
}

fn outcome(r: Result<f64, VerifyError>) -> Outcome {
    match r {
        Ok(v) => Outcome::Value(v),
        Err(VerifyError::NoTau) => Outcome::NotApplicable("no τ in the data".into()),
        Err(VerifyError::NotEgorovShape(why)) => {
            Outcome::NotApplicable(format!("not Egorov-shaped: {why}"))
        }
        Err(_) => Outcome::Gap,
    }
}

fn max_of(values: impl IntoIterator<Item = Result<f64, VerifyError>>) -> Result<f64, VerifyError> {
    let mut worst: f64 = 0.0;
    for v in values {
        worst = worst.max(v?);
    }
    Ok(worst)
}

fn evaluate_sample(
    data: &SpectralData,
    u: &FlowPoint,
    idx: usize,
    opts: &ReportOptions,
) -> Vec<Outcome> {
    let tol = opts.tol.point;
    let sol = match solve_coefficients(data, u, tol) {
        Ok(s) => s,
        Err(_) => return vec![Outcome::Gap; CHECKS.len()],
    };
    let sample = match coordinates_from(data, &sol, tol) {
        Ok(s) => s,
        Err(_) => return vec![Outcome::Gap; CHECKS.len()],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(idx as u64);
    let probes: Vec<_> = (0..opts.probes)
        .map(|_| random_probe(data, &mut rng, tol))
        .collect();
    let n = data.dimension;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let off: Vec<(usize, usize)> = pairs.iter().copied().filter(|(i, j)| i < j).collect();

    let reality = reality_from(data, &sol, &sample, &probes, tol);
    let egorov = egorov_from(data, &sol, &sample, tol);
    let nodes: Vec<_> = pairs
        .iter()
        .map(|&(i, j)| node_cancellation_from(data, &sol, &sample, i, j, tol))
        .collect();
    let node_part = |f: fn(&super::NodeResiduals) -> f64| {
        outcome(max_of(
            nodes
                .iter()
                .map(|r| r.as_ref().map(f).map_err(Clone::clone)),
        ))
    };
    let second_order = if off.is_empty() {
        Outcome::NotApplicable("dimension 1: no pairs i ≠ j".into())
    } else {
        let qs = (0..n).map(|k| data.q_point(k).point);
        let points: Vec<_> = probes.iter().copied().chain(qs).collect();
        outcome(max_of(
            off.iter()
                .flat_map(|&(i, j)| points.iter().map(move |p| (i, j, *p)))
                .map(|(i, j, p)| epd_from(data, &sol, i, j, p, tol)),
        ))
    };
    let orthogonality = if off.is_empty() {
        Outcome::NotApplicable("dimension 1: no pairs i ≠ j".into())
    } else {
        Outcome::Value(orthogonality_from(&sample))
    };
    vec![
        orthogonality,
        outcome(reality.clone().map(|r| r.coordinates)),
        outcome(reality.map(|r| r.probes)),
        outcome(egorov.clone().map(|e| e.lame_residual)),
        if n < 2 {
            Outcome::NotApplicable("dimension 1: no pairs i ≠ j".into())
        } else {
            outcome(egorov.map(|e| e.beta_residual))
        },
        second_order,
        node_part(|r| r.nodes),
        node_part(|r| r.components),
        node_part(|r| r.q_points),
    ]
}

fn threshold(t: &Thresholds, name: &str) -> f64 {
    match name {
        "orthogonality" => t.orthogonality,
        "reality_coordinates" => t.reality,
        "reality_probes" => t.probes,
        "lame_identity" => t.lame,
        "beta_symmetry" => t.beta,
        "second_order_equation" => t.second_order,
        _ => t.residues,
    }
}

fn map_points<T, F>(points: &[FlowPoint], execution: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &FlowPoint) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if execution == Execution::Parallel {
        use rayon::prelude::*;
        return points
            .par_iter()
            .enumerate()
            .map(|(idx, u)| f(idx, u))
            .collect();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = execution;
    points
        .iter()
        .enumerate()
        .map(|(idx, u)| f(idx, u))
        .collect()
}

fn evaluate_all(
    data: &SpectralData,
    points: &[FlowPoint],
    opts: &ReportOptions,
) -> Vec<Vec<Outcome>> {
    map_points(points, opts.execution, |idx, u| {
        evaluate_sample(data, u, idx, opts)
    })
}

/// `x(u)` at each point, in input order. Failed solves are gaps.
pub fn sample_coordinates(
    data: &SpectralData,
    points: &[FlowPoint],
    tol: f64,
    execution: Execution,
) -> Vec<CoordinateSample> {
    map_points(points, execution, |_, u| coordinates(data, u, tol))
}

/// Evaluates every check over the grid and aggregates maxima in sample
/// order, so the result does not depend on the execution strategy.
pub fn run_report(
    data: &SpectralData,
    grid: &GridSpec,
    opts: &ReportOptions,
) -> Result<VerificationReport, String> {
    if grid.dim() != data.dimension {
        return Err(format!(
            "grid has {} axes but the data has dimension {}",
            grid.dim(),
            data.dimension
        ));
    }
    let points = grid.points();
    let results = evaluate_all(data, &points, opts);
    let n_gaps = results
        .iter()
        .filter(|r| r.iter().all(|o| matches!(o, Outcome::Gap)))
        .count();
    let checks = CHECKS
        .iter()
        .enumerate()
        .map(|(c, name)| {
            let mut summary = CheckSummary {
                name: name.to_string(),
                max_residual: 0.0,
                worst_u: None,
                n_samples: 0,
                n_gaps: 0,
                applicable: false,
                tolerance: threshold(&opts.thresholds, name),
                passed: true,
                note: None,
            };
            for (u, r) in points.iter().zip(&results) {
                match &r[c] {
                    Outcome::Value(v) => {
                        summary.applicable = true;
                        summary.n_samples += 1;
                        if summary.worst_u.is_none() || *v > summary.max_residual || v.is_nan() {
                            summary.max_residual = *v;
                            summary.worst_u = Some(u.re());
                        }
                    }
                    Outcome::Gap => summary.n_gaps += 1,
                    Outcome::NotApplicable(why) => {
                        if summary.note.is_none() {
                            summary.note = Some(why.clone());
                        }
                    }
                }
            }
            if summary.applicable {
                summary.note = None;
                summary.passed = summary.max_residual <= summary.tolerance;
            }
            summary
        })
        .collect();
    Ok(VerificationReport {
        seed: opts.seed,
        grid: grid.clone(),
        n_samples: points.len(),
        n_gaps,
        checks,
    })
}
