//! Command-line surface: input parsing, one subcommand per module, JSON/CSV
//! emission.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 numerical failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::curvature_measure::{
    convergence_of_measures, polygonal_jump_measure, smooth_density, tangential_component_check,
};
use crate::discrete_frame::{check_inequalities, counterexample_emon, discrete_normal, EmonParams, NormalOptions};
use crate::error::Error;
use crate::linalg_geo::{vector, Vector};
use crate::polyline::Polygonal;
use crate::relaxation::{default_schedule, estimate_fj, estimate_fj_polygonal};
use crate::smooth_curve::quadrature::QuadSpec;
use crate::smooth_curve::{smooth_nj_length, CurveOracle, CurveSpec};
use crate::taylor_verify::{default_steps, verify_pgm3, verify_pgm4, verify_pgmn};
use crate::intgeo::{verify_igc_curve, verify_igp, verify_igtc, DEFAULT_SAMPLES};

#[derive(Debug, Parser)]
#[command(name = "polynormals", version, about = "Discrete higher-order normals of polygonal and smooth curves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Discrete normals, their stats and the inequality checks of a polyline.
    Normals(CommonArgs),
    /// Relaxed normal length by inscribed refinement.
    Converge(CommonArgs),
    /// Monte-Carlo projection averages against direct values.
    Intgeo(CommonArgs),
    /// Fitted orders of the stencil-frame expansions at one parameter.
    Taylor(CommonArgs),
    /// Curvature measure of the normal curve.
    Measure(CommonArgs),
    /// Two polygonals whose total absolute torsion increases under insertion.
    Counterexample(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Polyline file (CSV with a `# dim=<d> closed=<0|1>` header, or JSON).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Curve spec: a JSON file path or an inline JSON object.
    #[arg(long)]
    pub curve_json: Option<String>,
    /// Normal order; all applicable orders when omitted.
    #[arg(long)]
    pub j: Option<usize>,
    /// Refinement levels (vertex counts or subdivision factors), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<usize>>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Curve parameter for `taylor`.
    #[arg(long)]
    pub at: Option<f64>,
    /// Output path prefix; JSON goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

/// Everything needed to reproduce a run; embedded in every output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub version: String,
    pub input: Option<String>,
    pub curve: Option<CurveSpec>,
    pub j: Option<usize>,
    pub levels: Option<Vec<usize>>,
    pub samples: Option<usize>,
    pub seed: u64,
    pub tol: Option<f64>,
    pub at: Option<f64>,
    pub out: Option<String>,
    pub format: Format,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidPolygonal(_)
            | Error::DegenerateSegment(_)
            | Error::InvalidOrder { .. }
            | Error::DimensionMismatch { .. }
            | Error::UnknownCurve(_)
            | Error::BadParams(_)
            | Error::OutOfDomain(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Numeric table written as CSV; the JSON report carries the same values.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Result of one command: the JSON payload, CSV tables, extra polyline files
/// and an optional numerical failure that sets the exit code after writing.
#[derive(Debug, Default)]
pub struct Output {
    pub result: Value,
    pub tables: Vec<Table>,
    pub polylines: Vec<(String, Polygonal)>,
    pub failure: Option<String>,
}

// ---------- polyline files ----------

#[derive(Debug, Serialize, Deserialize)]
struct PolylineJson {
    #[serde(default)]
    dim: Option<usize>,
    closed: bool,
    vertices: Vec<Vec<f64>>,
}

fn parse_header(line: &str) -> Option<(usize, bool)> {
    let mut dim = None;
    let mut closed = None;
    for tok in line.trim_start_matches('#').split_whitespace() {
        match tok.split_once('=') {
            Some(("dim", v)) => dim = v.parse().ok(),
            Some(("closed", "0")) => closed = Some(false),
            Some(("closed", "1")) => closed = Some(true),
            _ => {}
        }
    }
    Some((dim?, closed?))
}

/// Parses a polyline from CSV (`# dim=<d> closed=<0|1>` then one vertex per
/// row) or from JSON `{"dim": d, "closed": bool, "vertices": [[..], ..]}`.
pub fn parse_polyline(text: &str) -> CliResult<Polygonal> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let pj: PolylineJson = serde_json::from_str(trimmed).map_err(|e| CliError::Usage(format!("polyline JSON: {e}")))?;
        if let Some(d) = pj.dim {
            if let Some(bad) = pj.vertices.iter().find(|v| v.len() != d) {
                return Err(Error::DimensionMismatch { expected: d, found: bad.len() }.into());
            }
        }
        return Ok(Polygonal::new(pj.vertices.iter().map(|v| vector(v)).collect(), pj.closed)?);
    }
    let header = trimmed.lines().next().unwrap_or("");
    let (dim, closed) =
        parse_header(header).ok_or_else(|| CliError::Usage("missing `# dim=<d> closed=<0|1>` header".into()))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(trimmed.as_bytes());
    let mut vertices = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Usage(format!("CSV: {e}")))?;
        let coords = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| CliError::Usage(format!("CSV row {}: {e}", row + 1)))?;
        if coords.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: coords.len() }.into());
        }
        vertices.push(vector(&coords));
    }
    Ok(Polygonal::new(vertices, closed)?)
}

/// CSV serialization of a polyline with 17 significant digits.
pub fn polyline_csv(p: &Polygonal) -> String {
    let mut s = format!("# dim={} closed={}\n", p.dim(), u8::from(p.is_closed()));
    for v in p.vertices() {
        let row: Vec<String> = v.iter().map(|x| fmt_f64(*x)).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn parse_curve_spec(arg: &str) -> CliResult<CurveSpec> {
    let text = if arg.trim_start().starts_with('{') { arg.to_string() } else { read_text(Path::new(arg))? };
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("curve spec JSON: {e}")))
}

// ---------- inputs ----------

enum Input {
    Polyline(Polygonal),
    Curve(Box<dyn CurveOracle>),
}

fn load_input(args: &CommonArgs, spec: &Option<CurveSpec>) -> CliResult<Input> {
    match (&args.input, spec) {
        (Some(path), None) => Ok(Input::Polyline(parse_polyline(&read_text(path)?)?)),
        (None, Some(spec)) => Ok(Input::Curve(spec.build()?)),
        (Some(_), Some(_)) => Err(CliError::Usage("give either --input or --curve-json, not both".into())),
        (None, None) => Err(CliError::Usage("one of --input or --curve-json is required".into())),
    }
}

fn orders(dim: usize, j: Option<usize>) -> CliResult<Vec<usize>> {
    let n = dim - 1;
    match j {
        Some(j) if j == 0 || j > n => Err(Error::InvalidOrder { j, max: n }.into()),
        Some(j) => Ok(vec![j]),
        None => Ok((1..=n).collect()),
    }
}

fn to_json<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn coords(v: &Vector) -> Vec<f64> {
    v.iter().copied().collect()
}

// ---------- commands ----------

fn cmd_normals(args: &CommonArgs, input: Input) -> CliResult<Output> {
    let Input::Polyline(p) = input else {
        return Err(CliError::Usage("normals needs a polyline --input".into()));
    };
    let mut out = Output::default();
    let mut normals = Vec::new();
    let mut points = Table {
        name: "normals".into(),
        columns: ["j", "segment"].iter().map(|s| s.to_string()).chain((0..p.dim()).map(|k| format!("x{k}"))).collect(),
        rows: Vec::new(),
    };
    let mut stats = Table {
        name: "stats".into(),
        columns: ["j", "length", "geodesic_rotation", "ambient_tc"].map(String::from).to_vec(),
        rows: Vec::new(),
    };
    for j in orders(p.dim(), args.j)? {
        let dn = match discrete_normal(&p, j, NormalOptions::default()) {
            Ok(dn) => dn,
            // Orders above the polyline's own dimension carry no normal.
            Err(Error::FlatPolygonal) if args.j.is_none() && j > 1 => {
                normals.push(json!({ "j": j, "flat": true }));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        for (i, q) in dn.points.iter().enumerate() {
            let mut row = vec![j as f64, i as f64];
            row.extend(coords(q.rep()));
            points.rows.push(row);
        }
        stats.rows.push(vec![j as f64, dn.stats.length, dn.stats.geodesic_rotation, dn.stats.ambient_tc]);
        normals.push(to_json(&dn));
    }
    let ineq = check_inequalities(&p, NormalOptions::default())?;
    out.tables = vec![points, stats];
    out.result = json!({ "normals": normals, "inequalities": ineq });
    Ok(out)
}

fn cmd_converge(args: &CommonArgs, input: Input) -> CliResult<Output> {
    let mut out = Output::default();
    let (run, reference) = match &input {
        Input::Curve(c) => {
            let j = args.j.unwrap_or(1);
            let schedule = args.levels.clone().unwrap_or_else(default_schedule);
            let run = estimate_fj(c.as_ref(), j, &schedule)?;
            let reference = smooth_nj_length(c.as_ref(), j, QuadSpec::default()).ok();
            (run, reference)
        }
        Input::Polyline(p) => {
            let j = args.j.unwrap_or(1);
            let factors = args.levels.clone().unwrap_or_else(|| vec![1, 2, 4, 8]);
            (estimate_fj_polygonal(p, j, &factors)?, None)
        }
    };
    let tol = args.tol.unwrap_or(5e-3);
    let last = run.last_value();
    let relative_error = match (last, reference) {
        (Some(v), Some(r)) if r > 0.0 => Some((v - r).abs() / r),
        (Some(v), Some(_)) => Some(v.abs()),
        _ => None,
    };
    if run.extrapolated.is_none() {
        out.failure = Some("refinement levels are not Cauchy".into());
    } else if relative_error.is_some_and(|e| e > tol) {
        out.failure = Some(format!("relative error {:e} above tolerance {tol:e}", relative_error.unwrap()));
    }
    out.tables.push(Table {
        name: "levels".into(),
        columns: ["n", "modulus", "mesh", "length_j", "tc_ambient_j"].map(String::from).to_vec(),
        rows: run
            .levels
            .iter()
            .map(|l| {
                vec![l.n as f64, l.modulus, l.mesh, l.length_j.unwrap_or(f64::NAN), l.tc_ambient_j.unwrap_or(f64::NAN)]
            })
            .collect(),
    });
    out.result = json!({ "run": run, "smooth_reference": reference, "relative_error": relative_error, "tol": tol });
    Ok(out)
}

fn intgeo_row(r: &crate::intgeo::IntGeoReport, j: usize) -> Vec<f64> {
    vec![j as f64, r.direct, r.mc_mean, r.mc_stderr, r.n_samples as f64, r.rejected as f64, r.z_score]
}

fn cmd_intgeo(args: &CommonArgs, input: Input) -> CliResult<Output> {
    let samples = args.samples.unwrap_or(DEFAULT_SAMPLES);
    let mut out = Output::default();
    let mut table = Table {
        name: "intgeo".into(),
        columns: ["j", "direct", "mc_mean", "mc_stderr", "n_samples", "rejected", "z_score"].map(String::from).to_vec(),
        rows: Vec::new(),
    };
    let mut reports = Vec::new();
    let mut failed = Vec::new();
    match &input {
        Input::Polyline(p) => {
            let n = p.dim() - 1;
            let js: Vec<usize> = match args.j {
                Some(j) if j >= n => return Err(Error::InvalidOrder { j, max: n - 1 }.into()),
                Some(j) => vec![j],
                None => (0..n).collect(),
            };
            for j in js {
                if j >= 1 {
                    let r = verify_igp(p, j, samples, args.seed)?;
                    table.rows.push(intgeo_row(&r.report, j));
                    if !r.report.passed {
                        failed.push(format!("{} j={j}", r.report.quantity));
                    }
                    reports.push(json!({ "j": j, "report": r }));
                }
                let r = verify_igtc(p, j, samples, args.seed)?;
                table.rows.push(intgeo_row(&r, j));
                if !r.passed {
                    failed.push(format!("{} j={j}", r.quantity));
                }
                reports.push(json!({ "j": j, "report": r }));
            }
        }
        Input::Curve(c) => {
            let j = args.j.unwrap_or(1);
            let schedule = args.levels.clone().unwrap_or_else(|| vec![256, 512, 1024]);
            let r = verify_igc_curve(c.as_ref(), j, &schedule, samples, args.seed)?;
            table.rows.push(intgeo_row(&r, j));
            if !r.passed {
                failed.push(format!("{} j={j}", r.quantity));
            }
            reports.push(json!({ "j": j, "report": r }));
        }
    }
    if !failed.is_empty() {
        out.failure = Some(format!("|z| above limit for {}", failed.join(", ")));
    }
    out.tables.push(table);
    out.result = json!({ "reports": reports });
    Ok(out)
}

fn cmd_taylor(args: &CommonArgs, input: Input) -> CliResult<Output> {
    let Input::Curve(c) = input else {
        return Err(CliError::Usage("taylor needs --curve-json".into()));
    };
    let (a, b) = c.domain();
    let s = args.at.unwrap_or(0.5 * (a + b));
    let steps = default_steps(c.as_ref());
    let mut reports = match c.dim() {
        3 => verify_pgm3(c.as_ref(), s, &steps)?,
        4 => verify_pgm4(c.as_ref(), s, &steps)?,
        _ => Vec::new(),
    };
    let j_max = args.j.unwrap_or(c.dim() - 1);
    reports.extend(
        verify_pgmn(c.as_ref(), s, j_max, &steps)?
            .into_iter()
            .map(|mut r| {
                r.quantity = format!("frame_{}", r.quantity);
                r
            }),
    );
    let mut out = Output::default();
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.quantity.as_str()).collect();
    if !failed.is_empty() {
        out.failure = Some(format!("slope below threshold for {}", failed.join(", ")));
    }
    out.tables.push(Table {
        name: "taylor".into(),
        columns: ["quantity_index", "step", "residual"].map(String::from).to_vec(),
        rows: reports
            .iter()
            .enumerate()
            .flat_map(|(q, r)| r.steps.iter().zip(&r.residuals).map(move |(h, e)| vec![q as f64, *h, *e]))
            .collect(),
    });
    out.result = json!({ "s": s, "reports": reports });
    Ok(out)
}

fn cmd_measure(args: &CommonArgs, input: Input) -> CliResult<Output> {
    let mut out = Output::default();
    match &input {
        Input::Polyline(p) => {
            let mut reports = Vec::new();
            let mut table = Table {
                name: "atoms".into(),
                columns: ["j", "t", "mass"].iter().map(|s| s.to_string()).chain((0..p.dim()).map(|k| format!("jump{k}"))).collect(),
                rows: Vec::new(),
            };
            for j in orders(p.dim(), args.j)? {
                let dn = match discrete_normal(p, j, NormalOptions::default()) {
                    Ok(dn) => dn,
                    Err(Error::FlatPolygonal) if args.j.is_none() && j > 1 => continue,
                    Err(e) => return Err(e.into()),
                };
                let m = polygonal_jump_measure(&dn);
                for at in &m.atoms {
                    let mut row = vec![j as f64, at.t, at.mass];
                    row.extend(coords(&at.jump));
                    table.rows.push(row);
                }
                reports.push(m);
            }
            out.tables.push(table);
            out.result = json!({ "measures": reports });
        }
        Input::Curve(c) => {
            let j = args.j.unwrap_or(c.dim() - 1);
            let grid = args.samples.unwrap_or(101);
            let schedule = args.levels.clone().unwrap_or_else(|| vec![256, 2048]);
            let tol = args.tol.unwrap_or(0.05);
            let density = smooth_density(c.as_ref(), j, grid)?;
            let tangential = if j == c.dim() - 1 && j >= 2 { tangential_component_check(c.as_ref(), grid).ok() } else { None };
            let conv = convergence_of_measures(c.as_ref(), j, &schedule, 64)?;
            let last = conv.levels.last().map(|l| l.max_bin_discrepancy).unwrap_or(0.0);
            if last > tol {
                out.failure = Some(format!("bin discrepancy {last:e} above {tol:e}"));
            } else if tangential.as_ref().is_some_and(|t| !t.passed) {
                out.failure = Some("tangential component differs from the closed form".into());
            }
            let samples = density.ac_density_samples.as_deref().unwrap_or(&[]);
            out.tables.push(Table {
                name: "density".into(),
                columns: ["s", "t"].iter().map(|s| s.to_string()).chain((0..c.dim()).map(|k| format!("d{k}"))).collect(),
                rows: samples
                    .iter()
                    .map(|d| {
                        let mut row = vec![d.s, d.t];
                        row.extend(coords(&d.density));
                        row
                    })
                    .collect(),
            });
            out.tables.push(Table {
                name: "bins".into(),
                columns: ["n", "polygon_mass", "smooth_mass", "max_bin_discrepancy"].map(String::from).to_vec(),
                rows: conv
                    .levels
                    .iter()
                    .map(|l| vec![l.n as f64, l.polygon_mass, l.smooth_mass, l.max_bin_discrepancy])
                    .collect(),
            });
            out.result = json!({ "density": density, "tangential": tangential, "convergence": conv, "tol": tol });
        }
    }
    Ok(out)
}

fn cmd_counterexample(_args: &CommonArgs) -> CliResult<Output> {
    let r = counterexample_emon(EmonParams::default())?;
    let mut out = Output::default();
    if !(r.tat_p_prime > r.tat_p) {
        out.failure = Some("insertion did not increase the total absolute torsion".into());
    }
    out.tables.push(Table {
        name: "tat".into(),
        columns: ["tat_p", "tat_p_prime", "alpha", "beta", "epsilon"].map(String::from).to_vec(),
        rows: vec![vec![r.tat_p, r.tat_p_prime, r.alpha, r.beta, r.epsilon]],
    });
    out.polylines = vec![("p".into(), r.p.clone()), ("p_prime".into(), r.p_prime.clone())];
    out.result = to_json(&r);
    Ok(out)
}

// ---------- emission ----------

fn table_csv(config_json: &str, t: &Table) -> String {
    let mut s = format!("# config={config_json}\n{}\n", t.columns.join(","));
    for row in &t.rows {
        let cells: Vec<String> = row.iter().map(|x| fmt_f64(*x)).collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn emit(config: &RunConfig, out: &Output) -> CliResult<()> {
    let doc = json!({ "config": config, "result": out.result, "failure": out.failure });
    let pretty = serde_json::to_string_pretty(&doc).expect("reports serialize");
    let Some(prefix) = &config.out else {
        let mut stdout = std::io::stdout().lock();
        return match writeln!(stdout, "{pretty}") {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io(e.to_string())),
            _ => Ok(()),
        };
    };
    let prefix = PathBuf::from(prefix);
    if matches!(config.format, Format::Json | Format::Both) {
        write_file(&with_suffix(&prefix, ".json"), &(pretty + "\n"))?;
    }
    if matches!(config.format, Format::Csv | Format::Both) {
        let cfg = serde_json::to_string(config).expect("config serializes");
        for t in &out.tables {
            write_file(&with_suffix(&prefix, &format!("_{}.csv", t.name)), &table_csv(&cfg, t))?;
        }
    }
    for (name, p) in &out.polylines {
        write_file(&with_suffix(&prefix, &format!("_{name}.csv")), &polyline_csv(p))?;
    }
    Ok(())
}

/// Runs one parsed command and writes its outputs.
pub fn run(cli: Cli) -> CliResult<()> {
    let (name, args) = match &cli.command {
        Command::Normals(a) => ("normals", a),
        Command::Converge(a) => ("converge", a),
        Command::Intgeo(a) => ("intgeo", a),
        Command::Taylor(a) => ("taylor", a),
        Command::Measure(a) => ("measure", a),
        Command::Counterexample(a) => ("counterexample", a),
    };
    let spec = args.curve_json.as_deref().map(parse_curve_spec).transpose()?;
    let config = RunConfig {
        command: name.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        input: args.input.as_ref().map(|p| p.display().to_string()),
        curve: spec.clone(),
        j: args.j,
        levels: args.levels.clone(),
        samples: args.samples,
        seed: args.seed,
        tol: args.tol,
        at: args.at,
        out: args.out.as_ref().map(|p| p.display().to_string()),
        format: args.format,
    };
    let out = match &cli.command {
        Command::Counterexample(a) => cmd_counterexample(a)?,
        Command::Normals(a) => cmd_normals(a, load_input(a, &spec)?)?,
        Command::Converge(a) => cmd_converge(a, load_input(a, &spec)?)?,
        Command::Intgeo(a) => cmd_intgeo(a, load_input(a, &spec)?)?,
        Command::Taylor(a) => cmd_taylor(a, load_input(a, &spec)?)?,
        Command::Measure(a) => cmd_measure(a, load_input(a, &spec)?)?,
    };
    emit(&config, &out)?;
    match out.failure {
        Some(msg) => Err(CliError::Numerical(msg)),
        None => Ok(()),
    }
}

/// Parses `args` and runs; usage errors from argument parsing exit with 1.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("polynormals: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polyline_round_trip() {
        let p = Polygonal::new(vec![vector(&[0.0, 0.1, 1.0 / 3.0]), vector(&[1.0, 2.0, 3.0])], false).unwrap();
        let q = parse_polyline(&polyline_csv(&p)).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn malformed_csv_is_usage_error() {
        let e = parse_polyline("# dim=2 closed=0\n0,0\n1,x\n").unwrap_err();
        assert_eq!(e.exit_code(), 1);
        assert_eq!(parse_polyline("0,0\n1,1\n").unwrap_err().exit_code(), 1);
        assert_eq!(parse_polyline("# dim=3 closed=0\n0,0\n1,1\n").unwrap_err().exit_code(), 1);
    }

    #[test]
    fn json_polyline() {
        let p = parse_polyline(r#"{"dim": 2, "closed": true, "vertices": [[0,0],[1,0],[1,1]]}"#).unwrap();
        assert!(p.is_closed() && p.dim() == 2);
    }
}
