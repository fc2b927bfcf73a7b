use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use bacurve::basolver::FlowPoint;
use bacurve::curve::{
    parse_spectral_data, residue_table, solve_scale_parameter, validate_all, ParseError,
    SpectralData, Status, ValidationReport,
};
use bacurve::verify::{
    orthogonality_from, run_report, sample_coordinates, CoordinateSample, Execution, GridSpec,
    ReportOptions, SampleStatus,
};
use bacurve::{datasets, Complex64, Tolerances};
use clap::{Parser, Subcommand};

/// Baker–Akhiezer coordinate systems from nodal spectral curves.
#[derive(Parser, Debug)]
#[command(name = "bacurve", version)]
struct Cli {
    /// Machine-readable JSON on standard output.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for random probe points.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Distance below which two points coincide.
    #[arg(long, global = true)]
    tol_pt: Option<f64>,
    /// Residual threshold for identities on the spectral data.
    #[arg(long, global = true)]
    tol_res: Option<f64>,
    /// Solve parameters marked "solve" from the residue conditions.
    #[arg(long, global = true)]
    solve_params: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check every structural hypothesis on a spectral data file.
    Validate { file: String },
    /// Export x(u) as CSV.
    Solve {
        file: String,
        /// Flow point `u1,u2,...`; repeatable.
        #[arg(long = "u", allow_hyphen_values = true, conflicts_with = "grid")]
        u: Vec<String>,
        /// Grid `min:max:count,...`, one axis per flow variable.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<GridSpec>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every numerical check over a grid.
    Verify {
        file: String,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<GridSpec>,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print the residues of Ω and the residue conditions.
    Residues { file: String },
    /// Draw the coordinate net of a two-dimensional system as SVG.
    Grid {
        file: String,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<GridSpec>,
        #[arg(long)]
        svg: PathBuf,
    },
}

/// Reported failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure {
            code: 2,
            message: format!("{e:#}"),
        }
    }
}

type Outcome = std::result::Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn tolerances(cli: &Cli) -> Tolerances {
    let mut tol = Tolerances::default();
    if let Some(t) = cli.tol_pt {
        tol.point = t;
    }
    if let Some(t) = cli.tol_res {
        tol.residual = t;
    }
    tol
}

enum LoadError {
    Invariant { rule: String, detail: String },
    Other(anyhow::Error),
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Invariant { rule, detail } => {
                Failure::validation(format!("{rule}: {detail}"))
            }
            LoadError::Other(e) => e.into(),
        }
    }
}

/// Reads a `.bacurve` file, or a bundled dataset given as `@name`.
fn load(file: &str) -> std::result::Result<SpectralData, LoadError> {
    if let Some(name) = file.strip_prefix('@') {
        return datasets::load(name)
            .ok_or_else(|| LoadError::Other(anyhow!("no bundled dataset `{name}`")));
    }
    let text = std::fs::read_to_string(file)
        .with_context(|| format!("cannot read `{file}`"))
        .map_err(LoadError::Other)?;
    parse_spectral_data(&text).map_err(|e| match e {
        ParseError::Invariant { rule, detail } => LoadError::Invariant { rule, detail },
        e => LoadError::Other(anyhow::Error::new(e).context(format!("cannot parse `{file}`"))),
    })
}

fn bind_parameters(
    cli: &Cli,
    data: &mut SpectralData,
    tol: &Tolerances,
) -> std::result::Result<(), Failure> {
    let unbound = data.unbound_parameters();
    if unbound.is_empty() {
        return Ok(());
    }
    if !cli.solve_params {
        return Err(Failure::validation(format!(
            "unbound parameters {} (pass --solve-params)",
            unbound.join(", ")
        )));
    }
    for name in unbound {
        solve_scale_parameter(data, &name, tol)
            .map_err(|e| Failure::validation(format!("cannot solve parameter `{name}`: {e}")))?;
    }
    Ok(())
}

/// Loads, binds and validates; validation failures are listed on stderr.
fn prepare(cli: &Cli, file: &str, tol: &Tolerances) -> std::result::Result<SpectralData, Failure> {
    let mut data = load(file)?;
    bind_parameters(cli, &mut data, tol)?;
    let report = validate_all(&data, tol);
    if !report.passed() {
        let rules: Vec<String> = report
            .failures()
            .map(|e| format!("{}: {}", e.rule, e.detail))
            .collect();
        return Err(Failure::validation(format!(
            "validation failed\n  {}",
            rules.join("\n  ")
        )));
    }
    Ok(data)
}

fn grid_for(
    data: &SpectralData,
    grid: &Option<GridSpec>,
) -> std::result::Result<GridSpec, Failure> {
    let grid = grid
        .clone()
        .unwrap_or_else(|| GridSpec::square(data.dimension, 21));
    if grid.dim() != data.dimension {
        return Err(anyhow!(
            "grid has {} axes, data has {} flow variables",
            grid.dim(),
            data.dimension
        )
        .into());
    }
    Ok(grid)
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot write in `{}`", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path)
        .map_err(|e| anyhow!(e.error))
        .with_context(|| format!("cannot write `{}`", path.display()))?;
    Ok(())
}

fn emit(path: &Option<PathBuf>, contents: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    let tol = tolerances(cli);
    match &cli.command {
        Command::Validate { file } => cmd_validate(cli, file, &tol),
        Command::Solve { file, u, grid, out } => cmd_solve(cli, file, u, grid, out, &tol),
        Command::Verify { file, grid, report } => cmd_verify(cli, file, grid, report, &tol),
        Command::Residues { file } => cmd_residues(cli, file, &tol),
        Command::Grid { file, grid, svg } => cmd_grid(cli, file, grid, svg, &tol),
    }
}

fn cmd_validate(cli: &Cli, file: &str, tol: &Tolerances) -> Outcome {
    let report = match load(file) {
        Ok(mut data) => {
            if cli.solve_params {
                bind_parameters(cli, &mut data, tol)?;
            }
            validate_all(&data, tol)
        }
        Err(LoadError::Invariant { rule, detail }) => {
            let mut report = ValidationReport::new();
            report.push(&rule, Status::Fail, detail, None);
            report
        }
        Err(e) => return Err(e.into()),
    };
    if cli.json {
        println!("{}", report.to_json());
    } else {
        print!("{report}");
    }
    Ok(report.passed())
}

fn parse_point(text: &str, dim: usize) -> Result<FlowPoint> {
    let values = text
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .with_context(|| format!("bad coordinate `{v}` in `{text}`"))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() != dim {
        bail!(
            "`{text}` has {} coordinates, data has {dim} flow variables",
            values.len()
        );
    }
    Ok(FlowPoint::real(&values))
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv(samples: &[CoordinateSample], dim: usize) -> String {
    let mut out = String::new();
    let mut header: Vec<String> = (1..=dim).map(|k| format!("u{k}")).collect();
    for k in 1..=dim {
        header.push(format!("re_x{k}"));
        header.push(format!("im_x{k}"));
    }
    header.push("orthogonality_residual".into());
    header.push("status".into());
    writeln!(out, "{}", header.join(",")).unwrap();
    for s in samples {
        let mut row: Vec<String> = s.u.u.iter().map(|u| num(u.re)).collect();
        match s.status {
            SampleStatus::Solved => {
                for x in &s.x {
                    row.push(num(x.re));
                    row.push(num(x.im));
                }
                row.push(num(orthogonality_from(s)));
                row.push("ok".into());
            }
            SampleStatus::Gap(_) => {
                row.extend(std::iter::repeat_n(String::new(), 2 * dim + 1));
                row.push("gap".into());
            }
        }
        writeln!(out, "{}", row.join(",")).unwrap();
    }
    out
}

fn solve_json(samples: &[CoordinateSample]) -> String {
    let rows: Vec<serde_json::Value> = samples
        .iter()
        .map(|s| {
            let u: Vec<f64> = s.u.u.iter().map(|u| u.re).collect();
            match &s.status {
                SampleStatus::Solved => serde_json::json!({
                    "u": u,
                    "x": s.x.iter().map(|x| [x.re, x.im]).collect::<Vec<_>>(),
                    "orthogonality_residual": orthogonality_from(s),
                    "status": "ok",
                }),
                SampleStatus::Gap(reason) => {
                    serde_json::json!({ "u": u, "status": "gap", "reason": reason })
                }
            }
        })
        .collect();
    serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n"
}

fn cmd_solve(
    cli: &Cli,
    file: &str,
    u: &[String],
    grid: &Option<GridSpec>,
    out: &Option<PathBuf>,
    tol: &Tolerances,
) -> Outcome {
    let data = prepare(cli, file, tol)?;
    let points = if u.is_empty() {
        grid_for(&data, grid)?.points()
    } else {
        u.iter()
            .map(|p| parse_point(p, data.dimension))
            .collect::<Result<Vec<_>>>()?
    };
    let samples = sample_coordinates(&data, &points, tol.point, Execution::Parallel);
    let text = if cli.json {
        solve_json(&samples)
    } else {
        csv(&samples, data.dimension)
    };
    emit(out, &text)?;
    if samples.iter().all(|s| !s.is_solved()) {
        return Err(anyhow!("every sample is a gap").into());
    }
    Ok(true)
}

fn cmd_verify(
    cli: &Cli,
    file: &str,
    grid: &Option<GridSpec>,
    path: &Option<PathBuf>,
    tol: &Tolerances,
) -> Outcome {
    let data = prepare(cli, file, tol)?;
    let grid = grid_for(&data, grid)?;
    let opts = ReportOptions {
        seed: cli.seed,
        tol: *tol,
        ..ReportOptions::default()
    };
    let report = run_report(&data, &grid, &opts).map_err(|e| anyhow!(e))?;
    let json = report.to_json() + "\n";
    if let Some(p) = path {
        write_atomic(p, &json)?;
    }
    if cli.json {
        print!("{json}");
    } else {
        print!("{report}");
    }
    if report.n_gaps == report.n_samples {
        return Err(anyhow!("every sample is a gap").into());
    }
    Ok(report.passed())
}

fn cmd_residues(cli: &Cli, file: &str, tol: &Tolerances) -> Outcome {
    let mut data = load(file)?;
    bind_parameters(cli, &mut data, tol)?;
    let table = residue_table(&data, tol).map_err(|e| Failure::validation(e.to_string()))?;
    if cli.json {
        println!("{}", table.to_json());
    } else {
        print!("{table}");
    }
    Ok(table.passed())
}

/// Polylines along each axis; a gap ends the current polyline.
fn polylines(samples: &[CoordinateSample], grid: &GridSpec) -> Vec<Vec<(f64, f64)>> {
    let (n1, n2) = (grid.axes[0].count, grid.axes[1].count);
    let at = |i: usize, j: usize| &samples[i * n2 + j];
    let mut lines = Vec::new();
    let mut trace = |pts: &mut dyn Iterator<Item = &CoordinateSample>| {
        let mut current = Vec::new();
        for s in pts {
            if s.is_solved() {
                current.push((s.x[0].re, s.x[1].re));
            } else if !current.is_empty() {
                lines.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            lines.push(current);
        }
    };
    for j in 0..n2 {
        trace(&mut (0..n1).map(|i| at(i, j)));
    }
    for i in 0..n1 {
        trace(&mut (0..n2).map(|j| at(i, j)));
    }
    lines
}

fn svg(lines: &[Vec<(f64, f64)>]) -> String {
    let pts = lines.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1e-12);
    let (w, h) = (x1 - x0 + 2.0 * pad, y1 - y0 + 2.0 * pad);
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.9} {:.9} {:.9} {:.9}" width="800" height="{:.0}">"#,
        x0 - pad,
        -(y1 + pad),
        w,
        h,
        800.0 * h / w
    )
    .unwrap();
    writeln!(
        out,
        r#"<g fill="none" stroke="black" stroke-width="1" vector-effect="non-scaling-stroke">"#
    )
    .unwrap();
    for line in lines {
        let coords: Vec<String> = line
            .iter()
            .map(|(x, y)| format!("{x:.9},{:.9}", -y))
            .collect();
        writeln!(
            out,
            r#"<polyline vector-effect="non-scaling-stroke" points="{}"/>"#,
            coords.join(" ")
        )
        .unwrap();
    }
    out.push_str("</g>\n</svg>\n");
    out
}

fn cmd_grid(
    cli: &Cli,
    file: &str,
    grid: &Option<GridSpec>,
    path: &Path,
    tol: &Tolerances,
) -> Outcome {
    let data = prepare(cli, file, tol)?;
    if data.dimension != 2 {
        return Err(Failure::validation(format!(
            "grid drawing needs two flow variables, data has {}",
            data.dimension
        )));
    }
    if data.tau.is_none() {
        return Err(Failure::validation(
            "no τ: coordinates are not known to be real",
        ));
    }
    let grid = grid_for(&data, grid)?;
    let samples = sample_coordinates(&data, &grid.points(), tol.point, Execution::Parallel);
    let solved: Vec<&CoordinateSample> = samples.iter().filter(|s| s.is_solved()).collect();
    if solved.is_empty() {
        return Err(anyhow!("every sample is a gap").into());
    }
    let norm = |f: fn(&Complex64) -> f64| {
        solved
            .iter()
            .flat_map(|s| s.x.iter().map(f))
            .fold(0.0, f64::max)
    };
    let reality = norm(|x| x.im.abs()) / norm(|x| x.norm()).max(f64::MIN_POSITIVE);
    let threshold = ReportOptions::default().thresholds.reality;
    if reality.is_nan() || reality > threshold {
        return Err(Failure::validation(format!(
            "coordinates are not real: max |Im x| / max |x| = {reality:.3e} > {threshold:.0e}"
        )));
    }
    let lines = polylines(&samples, &grid);
    write_atomic(path, &svg(&lines))?;
    if cli.json {
        println!(
            "{}",
            serde_json::json!({ "svg": path, "polylines": lines.len(), "reality_residual": reality })
        );
    } else {
        println!(
            "{} polylines written to {} (reality residual {reality:.3e})",
            lines.len(),
            path.display()
        );
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_rows_keep_u() {
        let sample = CoordinateSample {
            u: FlowPoint::real(&[0.5, -0.25]),
            x: vec![],
            jacobian: vec![],
            h2: vec![],
            status: SampleStatus::Gap("singular".into()),
        };
        let text = csv(&[sample], 2);
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "5.0000000000000000e-1,-2.5000000000000000e-1,,,,,,gap"
        );
    }

    #[test]
    fn polylines_break_at_gaps() {
        let grid: GridSpec = "0:1:3,0:1:2".parse().unwrap();
        let mut samples = sample_coordinates(
            &datasets::load("example1").unwrap(),
            &grid.points(),
            1e-12,
            Execution::Sequential,
        );
        samples[2].status = SampleStatus::Gap("test".into());
        // index 2 is (i=1, j=0): splits the j=0 u¹-line and shortens the i=1 u²-line
        let lines = polylines(&samples, &grid);
        let lens: Vec<usize> = lines.iter().map(Vec::len).collect();
        assert_eq!(lens, [1, 1, 3, 2, 1, 2]);
    }
}
