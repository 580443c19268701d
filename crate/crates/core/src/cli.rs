//! Command-line front end. `run` returns the process exit code:
//! 0 ok / separated / certified, 1 condition fails, 2 input error, 3 numeric failure, 4 undecided.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::DwError;
use crate::geometry::convex_hull_2d;
use crate::graphs::theta_srg_phases;
use crate::io::*;
use crate::linalg::{c64, ComplexMatrix, C64};
use crate::separation::{audit_table, check_condition, construct_singularizing_unitary, unitary_orbit_falsifier, ConditionId, SeparationVerdict, Status};
use crate::shell::{dw_boundary, inverse_dw_boundary, DEFAULT_NU_CAP};
use crate::stability::*;
use crate::tomography::{plot_ssg, plot_theta_srg};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_UNDECIDED: i32 = 4;

const CSV_HELP: &str = "CSV columns: shell -> z_re,z_im,nu; srg -> re,im (closed polygon, one vertex per row); \
stability --method nyquist -> omega,re,im (one row per eigenvalue of G(iw)H(iw)).\n\
Exit codes: 0 ok/separated/certified, 1 condition fails, 2 input error, 3 numeric failure, 4 undecided.";

#[derive(Parser, Debug)]
#[command(name = "dwshell", version, about = "Davis-Wielandt shells, scaled relative graphs and feedback separation tests", after_help = CSV_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Result JSON path; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Boundary point cloud of the DW shell (or inverse shell) of a matrix.
    Shell {
        input: PathBuf,
        #[arg(long, default_value_t = 400)]
        points: usize,
        #[arg(long)]
        inverse: bool,
        #[arg(long, default_value_t = DEFAULT_NU_CAP)]
        nu_cap: f64,
        /// SVG projection: top (z plane) or side (Re z, nu).
        #[arg(long, value_enum, default_value_t = Projection::Top)]
        projection: Projection,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// θ-SRG polygon (both halves) and phase interval, or the SSG with --ssg.
    Srg {
        input: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long, default_value_t = 100)]
        resolution: usize,
        #[arg(long)]
        ssg: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Nonsingularity conditions for I + A·U*·B·U over all unitaries U.
    Separate {
        a: PathBuf,
        b: PathBuf,
        /// Condition id, or `all` for the full audit table.
        #[arg(long, default_value = "dw_separation")]
        condition: String,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
        /// Haar trials of the unitary-orbit falsifier; 0 disables it.
        #[arg(long, default_value_t = 0)]
        falsify: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Frequencywise closed-loop stability of the negative feedback of G and H.
    Stability {
        g: PathBuf,
        h: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Dw)]
        method: Method,
        /// Number of log-spaced finite frequencies.
        #[arg(long, default_value_t = 40)]
        grid_points: usize,
        #[arg(long, default_value_t = 1e-3)]
        omega_min: f64,
        #[arg(long, default_value_t = 1e4)]
        omega_max: f64,
        #[arg(long)]
        no_zero: bool,
        #[arg(long)]
        no_infinity: bool,
        /// Number of uniform μ samples in [0, 1].
        #[arg(long, default_value_t = 21)]
        mu: usize,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Projection {
    Top,
    Side,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
#[value(rename_all = "snake_case")]
pub enum Method {
    Dw,
    ThetaSrg,
    GainPhase,
    Nyquist,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Dw => "dw",
            Method::ThetaSrg => "theta_srg",
            Method::GainPhase => "gain_phase",
            Method::Nyquist => "nyquist",
        }
    }
}

/// Failure carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<DwError> for CliError {
    fn from(e: DwError) -> Self {
        let code = match e {
            DwError::NotSquare { .. } | DwError::NonFinite | DwError::NotHermitian(_) | DwError::DimMismatch(..) | DwError::InvalidArgument(_) | DwError::Unstable(_) => EXIT_INPUT,
            _ => EXIT_NUMERIC,
        };
        Self { code, message: e.to_string() }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError { code: EXIT_INPUT, message: format!("cannot write {}: {e}", path.display()) }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

fn emit(doc: &ResultDocument, output: &Option<PathBuf>) -> Result<(), CliError> {
    let text = doc.to_json();
    match output {
        Some(p) => write_file(p, &(text + "\n")),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn load_matrix(path: &Path) -> Result<(MatrixDocument, ComplexMatrix), CliError> {
    let d = MatrixDocument::load(path)?;
    let m = d.to_matrix()?;
    Ok((d, m))
}

fn load_system(path: &Path) -> Result<(SystemDocument, StateSpaceSystem), CliError> {
    let d = SystemDocument::load(path)?;
    let s = d.to_system()?;
    Ok((d, s))
}

/// Parses the arguments (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("dwshell: {}", e.message);
            e.code
        }
    }
}

pub fn dispatch(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Shell { input, points, inverse, nu_cap, projection, out } => cmd_shell(&input, points, inverse, nu_cap, projection, &out),
        Command::Srg { input, theta, resolution, ssg, out } => cmd_srg(&input, theta, resolution, ssg, &out),
        Command::Separate { a, b, condition, resolution, falsify, seed, output } => cmd_separate(&a, &b, &condition, resolution, falsify, seed, &output),
        Command::Stability { g, h, method, grid_points, omega_min, omega_max, no_zero, no_infinity, mu, resolution, out } => {
            let grid = FrequencyGrid::log_spaced(omega_min, omega_max, grid_points, !no_zero, !no_infinity)?;
            cmd_stability(&g, &h, method, &grid, mu, resolution, &out)
        }
    }
}

pub fn cmd_shell(input: &Path, points: usize, inverse: bool, nu_cap: f64, projection: Projection, out: &OutputArgs) -> Result<i32, CliError> {
    let (doc, a) = load_matrix(input)?;
    let (pts, mut result) = if inverse {
        let b = inverse_dw_boundary(&a, points, nu_cap)?;
        let r = json!({"kind": "inverse_dw_shell", "nu_cap": nu_cap, "truncated": b.truncated, "count": b.points.len()});
        (b.points, r)
    } else {
        let b = dw_boundary(&a, points)?;
        let r = json!({"kind": "dw_shell", "count": b.points.len()});
        (b.points, r)
    };
    result["points"] = pts.iter().map(|p| json!([p.z.re, p.z.im, p.nu])).collect();
    let params = json!({"points": points, "inverse": inverse, "nu_cap": nu_cap, "projection": format!("{projection:?}").to_lowercase()});
    let res = ResultDocument::new("shell", params, json!({"matrix": to_value(&doc)}), result);
    if let Some(p) = &out.csv {
        write_file(p, &shell_csv(&pts))?;
    }
    if let Some(p) = &out.svg {
        let proj: Vec<C64> = pts.iter().map(|q| if projection == Projection::Top { q.z } else { c64(q.z.re, q.nu) }).collect();
        let hull = convex_hull_2d(&proj);
        write_file(p, &svg_polylines(&[SvgCurve { vertices: &hull, closed: true, color: "black" }], 400.0))?;
    }
    emit(&res, &out.output)?;
    Ok(EXIT_OK)
}

pub fn cmd_srg(input: &Path, theta: f64, resolution: usize, ssg: bool, out: &OutputArgs) -> Result<i32, CliError> {
    let (doc, a) = load_matrix(input)?;
    let params = json!({"theta": theta, "resolution": resolution, "ssg": ssg});
    let mut diagnostics = Vec::new();
    let (curves, result): (Vec<Vec<C64>>, Value) = if ssg {
        let s = plot_ssg(&a, resolution)?;
        if s.flagged_slices > 0 {
            diagnostics.push(format!("{} slices without a recovered witness", s.flagged_slices));
        }
        let r = json!({
            "kind": "ssg",
            "upper": vertices_json(&s.upper.vertices),
            "lower": vertices_json(&s.lower.vertices),
            "max_gap": s.max_gap,
            "flagged_slices": s.flagged_slices,
        });
        (vec![s.upper.vertices, s.lower.vertices], r)
    } else {
        let half = plot_theta_srg(&a, theta, resolution)?;
        if half.degraded {
            diagnostics.push("some slices failed and were skipped".into());
        }
        let full = half.mirrored();
        let phases = match theta_srg_phases(&a, theta) {
            Ok(p) => json!([p.lo, p.hi]),
            Err(e) => {
                diagnostics.push(e.to_string());
                Value::Null
            }
        };
        let r = json!({
            "kind": "theta_srg",
            "theta": theta,
            "upper_half": vertices_json(&half.vertices),
            "polygon": vertices_json(&full),
            "phases": phases,
        });
        (vec![full], r)
    };
    let mut res = ResultDocument::new("srg", params, json!({"matrix": to_value(&doc)}), result);
    res.diagnostics = diagnostics;
    if let Some(p) = &out.csv {
        write_file(p, &curve_csv(&curves.concat()))?;
    }
    if let Some(p) = &out.svg {
        let colors = ["black", "gray"];
        let svg: Vec<SvgCurve> = curves.iter().zip(colors).map(|(c, color)| SvgCurve { vertices: c, closed: !ssg, color }).collect();
        write_file(p, &svg_polylines(&svg, 400.0))?;
    }
    emit(&res, &out.output)?;
    Ok(EXIT_OK)
}

fn verdict_code(v: &SeparationVerdict) -> i32 {
    if v.is_separated() {
        EXIT_OK
    } else if v.violated {
        EXIT_FAILS
    } else {
        EXIT_UNDECIDED
    }
}

/// Singularizing unitary for an intersecting verdict: exact from certificate vectors, else the
/// best falsifier sample.
fn singular_unitary(a: &ComplexMatrix, b: &ComplexMatrix, v: &SeparationVerdict, seed: u64) -> Result<Value, CliError> {
    if let (Some(c), Some(w)) = (&v.certificate, &v.witness_point) {
        let x = nalgebra::DVector::from_vec(c.x.clone());
        let y = nalgebra::DVector::from_vec(c.y.clone());
        if let Ok(u) = construct_singularizing_unitary(a, b, w, &x, &y) {
            let s = sigma_min_loop(a, b, &u);
            return Ok(json!({"source": "certificate", "sigma_min": s, "entries": vertices_json(&u.row_major())}));
        }
    }
    let (s, u) = unitary_orbit_falsifier(a, b, 2000, seed)?;
    Ok(json!({"source": "falsifier", "sigma_min": s, "entries": vertices_json(&u.row_major())}))
}

fn sigma_min_loop(a: &ComplexMatrix, b: &ComplexMatrix, u: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let m = ComplexMatrix::identity(n).add(&a.mul(&b.unitary_similarity(u)));
    crate::linalg::sigma_min(m.mat())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_separate(a_path: &Path, b_path: &Path, condition: &str, resolution: usize, falsify: usize, seed: u64, output: &Option<PathBuf>) -> Result<i32, CliError> {
    let (da, a) = load_matrix(a_path)?;
    let (db, b) = load_matrix(b_path)?;
    if a.dim() != b.dim() {
        return Err(DwError::DimMismatch(a.dim(), b.dim()).into());
    }
    let params = json!({"condition": condition, "resolution": resolution, "falsify": falsify, "seed": seed});
    let inputs = json!({"a": to_value(&da), "b": to_value(&db)});
    let (mut result, code, mut diagnostics) = if condition == "all" {
        let report = audit_table(&a, &b, resolution)?;
        let dw = report.get(ConditionId::DwSeparation);
        let code = if report.violations.is_empty() { verdict_code(dw) } else { EXIT_NUMERIC };
        let mut r = json!({"verdicts": to_value(&report.verdicts), "implication_violations": report.violations});
        if dw.status == Status::Intersecting {
            r["singularizing_unitary"] = singular_unitary(&a, &b, dw, seed)?;
        }
        (r, code, report.violations.clone())
    } else {
        let id = ConditionId::parse(condition).ok_or_else(|| CliError { code: EXIT_INPUT, message: format!("unknown condition {condition:?}") })?;
        let v = check_condition(&a, &b, id, resolution)?;
        let mut r = json!({"verdict": to_value(&v)});
        if id == ConditionId::DwSeparation && v.status == Status::Intersecting {
            r["singularizing_unitary"] = singular_unitary(&a, &b, &v, seed)?;
        }
        (r, verdict_code(&v), Vec::new())
    };
    if falsify > 0 {
        let (s, _) = unitary_orbit_falsifier(&a, &b, falsify, seed)?;
        result["falsifier_min_sigma"] = json!(s);
        if s < 1e-8 {
            diagnostics.push(format!("falsifier found a nearly singular loop: sigma_min = {s:e}"));
        }
    }
    let mut res = ResultDocument::new("separate", params, inputs, result);
    res.diagnostics = diagnostics;
    emit(&res, output)?;
    Ok(code)
}

pub fn stability_code(r: &StabilityReport) -> i32 {
    match r.overall {
        Overall::Certified => EXIT_OK,
        Overall::Counterexample => EXIT_FAILS,
        Overall::NotCertified if r.undecided() => EXIT_UNDECIDED,
        Overall::NotCertified => EXIT_FAILS,
    }
}

pub fn cmd_stability(g_path: &Path, h_path: &Path, method: Method, grid: &FrequencyGrid, mu: usize, resolution: usize, out: &OutputArgs) -> Result<i32, CliError> {
    let (dg, g) = load_system(g_path)?;
    let (dh, h) = load_system(h_path)?;
    let params = json!({
        "method": method.name(),
        "omegas": grid.omegas,
        "include_infinity": grid.include_infinity,
        "mu": mu,
        "resolution": resolution,
    });
    let inputs = json!({"g": to_value(&dg), "h": to_value(&dh)});
    let (result, code, diagnostics) = if method == Method::Nyquist {
        let r = nyquist_eigenloci(&g, &h, grid)?;
        if let Some(p) = &out.csv {
            write_file(p, &loci_csv(&r.omegas, &r.loci))?;
        }
        if let Some(p) = &out.svg {
            let n = r.loci.first().map_or(0, Vec::len);
            let branches: Vec<Vec<C64>> = (0..n).map(|k| r.loci.iter().filter_map(|l| l.get(k).copied()).collect()).collect();
            let svg: Vec<SvgCurve> = branches.iter().map(|b| SvgCurve { vertices: b, closed: false, color: "black" }).collect();
            write_file(p, &svg_polylines(&svg, 400.0))?;
        }
        let code = if r.consistent_with_stability() { EXIT_OK } else { EXIT_FAILS };
        (to_value(&r), code, Vec::new())
    } else {
        let r = match method {
            Method::Dw => stability_dw(&g, &h, grid, mu)?,
            Method::ThetaSrg => stability_theta_srg(&g, &h, grid, resolution, mu)?,
            _ => stability_gain_phase(&g, &h, grid)?,
        };
        let mut diagnostics = r.notes.clone();
        match closed_loop_abscissa(&g, &h) {
            Ok(s) => diagnostics.push(format!("closed-loop spectral abscissa {s}")),
            Err(e) => diagnostics.push(format!("closed-loop state matrix unavailable: {e}")),
        }
        (to_value(&r), stability_code(&r), diagnostics)
    };
    let mut res = ResultDocument::new("stability", params, inputs, result);
    res.diagnostics = diagnostics;
    emit(&res, &out.output)?;
    Ok(code)
}
