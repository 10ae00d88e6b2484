//! Command-line front end.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{self, CatalogEntry};
use crate::connection::{self, ConnectionError, FlatnessReport, GridSample};
use crate::cubic::{tschirnhausen_reduce, ReduceOptions, SampledWeb};
use crate::expr::Expr;
use crate::hexagon::{self, DefectTable, HexagonOptions};
use crate::render::{self, Marker, StyleSpec};
use crate::singular::{self, ClassifyOptions, SingularReport};
use crate::trace::{self, SeedSpec};
use crate::web::{
    Depressed, DomainBox, GeneralCubic, GridSpec, QuadraticPlusVertical, WebSource, WebSpec,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    AllExcluded(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::AllExcluded(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }
}

fn config(msg: impl ToString) -> CliError {
    CliError::Config(msg.to_string())
}

fn runtime(msg: impl ToString) -> CliError {
    CliError::Runtime(msg.to_string())
}

#[derive(Parser, Debug)]
#[command(
    name = "flatweb",
    version,
    about = "Planar 3-webs defined by cubic implicit ODEs"
)]
pub struct Cli {
    /// Worker threads for grid sweeps (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Flatness audit plus singular point classification, as JSON.
    Analyze(AnalyzeArgs),
    /// Curvature density on a grid, as CSV.
    Curvature(CurvatureArgs),
    /// Leaves, discriminant and singular points, as SVG.
    Plot(PlotArgs),
    /// Hexagon closure defects and their power-law fit.
    Hexagon(HexagonArgs),
    /// Reduce a general cubic to depressed form on a grid, as CSV.
    Reduce(ReduceArgs),
    /// List the built-in webs, or print one entry as JSON.
    Catalog(CatalogArgs),
}

/// Exactly one web source must be given.
#[derive(Args, Debug, Clone, Default)]
pub struct WebArgs {
    /// Coefficient A of p^3 + A p + B.
    #[arg(long = "A", allow_hyphen_values = true)]
    pub a: Option<String>,
    /// Coefficient B of p^3 + A p + B.
    #[arg(long = "B", allow_hyphen_values = true)]
    pub b: Option<String>,
    /// Coefficient K3 of K3 p^3 + K2 p^2 + K1 p + K0.
    #[arg(long = "K3", allow_hyphen_values = true)]
    pub k3: Option<String>,
    #[arg(long = "K2", allow_hyphen_values = true)]
    pub k2: Option<String>,
    #[arg(long = "K1", allow_hyphen_values = true)]
    pub k1: Option<String>,
    #[arg(long = "K0", allow_hyphen_values = true)]
    pub k0: Option<String>,
    /// Coefficient a of p^2 + a p + b (plus vertical lines).
    #[arg(long = "quad-a", allow_hyphen_values = true)]
    pub quad_a: Option<String>,
    /// Coefficient b of p^2 + a p + b (plus vertical lines).
    #[arg(long = "quad-b", allow_hyphen_values = true)]
    pub quad_b: Option<String>,
    /// Built-in web id (see the catalog subcommand).
    #[arg(long)]
    pub catalog: Option<String>,
    /// Parameter for the catalog entries that take one.
    #[arg(long, allow_hyphen_values = true)]
    pub param: Option<f64>,
    /// JSON file holding a web spec or an exported catalog entry.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Domain box xmin:xmax:ymin:ymax.
    #[arg(long = "box", allow_hyphen_values = true)]
    pub domain: Option<String>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub web: WebArgs,
    /// Nodes per axis.
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    /// Flatness tolerance on max |K|.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Classify only these points, given as x,y (repeatable).
    #[arg(long, allow_hyphen_values = true)]
    pub point: Vec<String>,
    #[command(flatten)]
    pub reduction: ReductionArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ReductionArgs {
    /// Base abscissa of the reduction for general cubics.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    /// Reduced-chart box xmin:xmax:ymin:ymax for general cubics.
    #[arg(long = "reduced-box", allow_hyphen_values = true)]
    pub reduced_box: Option<String>,
}

#[derive(Args, Debug)]
pub struct CurvatureArgs {
    #[command(flatten)]
    pub web: WebArgs,
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    #[command(flatten)]
    pub reduction: ReductionArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    #[command(flatten)]
    pub web: WebArgs,
    /// Seeds per side of the box.
    #[arg(long, default_value_t = 6)]
    pub seeds: usize,
    /// Seeds along the discriminant.
    #[arg(long, default_value_t = 8)]
    pub discriminant_seeds: usize,
    /// Extra seed points x,y (repeatable).
    #[arg(long, allow_hyphen_values = true)]
    pub point: Vec<String>,
    /// Arclength budget per direction.
    #[arg(long)]
    pub arclength: Option<f64>,
    /// Grid for the discriminant overlay and singular point search.
    #[arg(long, default_value_t = 96)]
    pub grid: usize,
    /// Pixel width.
    #[arg(long, default_value_t = 600.0)]
    pub width: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct HexagonArgs {
    #[command(flatten)]
    pub web: WebArgs,
    /// Regular point x,y.
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<String>,
    #[arg(long, default_value_t = 1e-3)]
    pub tmin: f64,
    #[arg(long, default_value_t = 1e-1)]
    pub tmax: f64,
    /// Number of logarithmically spaced offsets.
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    /// Runge-Kutta steps per hexagon side.
    #[arg(long, default_value_t = 1)]
    pub rk_steps: usize,
    /// CSV output (t, defect, signed).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON output with the fit; printed to stdout when absent.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub web: WebArgs,
    #[arg(long, default_value_t = 32)]
    pub grid: usize,
    #[command(flatten)]
    pub reduction: ReductionArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CatalogArgs {
    /// Print this entry as JSON instead of the listing.
    #[arg(long)]
    pub show: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub param: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_box(s: &str) -> Result<DomainBox, CliError> {
    let v: Vec<f64> = s
        .split(':')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| config(format!("bad box {s:?}: expected xmin:xmax:ymin:ymax")))?;
    let [xmin, xmax, ymin, ymax] = v[..] else {
        return Err(config(format!("bad box {s:?}: expected four numbers")));
    };
    DomainBox::new(xmin, xmax, ymin, ymax).map_err(config)
}

fn parse_point(s: &str) -> Result<[f64; 2], CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| config(format!("bad point {s:?}: expected x,y")))?;
    match v[..] {
        [x, y] if x.is_finite() && y.is_finite() => Ok([x, y]),
        _ => Err(config(format!(
            "bad point {s:?}: expected two finite numbers"
        ))),
    }
}

fn parse_expr(name: &str, s: &str) -> Result<Expr, CliError> {
    Expr::parse(s).map_err(|e| config(format!("--{name}: {e}")))
}

/// Web spec and, for catalog sources, the entry it came from.
pub struct Resolved {
    pub spec: WebSpec,
    pub entry: Option<CatalogEntry>,
}

impl WebArgs {
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let depressed = self.a.is_some() || self.b.is_some();
        let general = [&self.k3, &self.k2, &self.k1, &self.k0]
            .iter()
            .any(|k| k.is_some());
        let quad = self.quad_a.is_some() || self.quad_b.is_some();
        let n = [
            depressed,
            general,
            quad,
            self.catalog.is_some(),
            self.config.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count();
        if n != 1 {
            return Err(config(format!(
                "exactly one web source is required (--A/--B, --K3..--K0, --quad-a/--quad-b, --catalog or --config), got {n}"
            )));
        }
        if self.param.is_some() && self.catalog.is_none() {
            return Err(config("--param only applies to --catalog entries"));
        }
        let domain = self.domain.as_deref().map(parse_box).transpose()?;
        let need = |name: &str, v: &Option<String>| -> Result<Expr, CliError> {
            let s = v
                .as_deref()
                .ok_or_else(|| config(format!("--{name} is required with this web source")))?;
            parse_expr(name, s)
        };
        let explicit = |source: WebSource| Resolved {
            spec: WebSpec {
                source,
                domain: domain.unwrap_or(DomainBox::symmetric(1.0)),
            },
            entry: None,
        };
        let mut resolved = if depressed {
            explicit(WebSource::Depressed(Depressed::new(
                need("A", &self.a)?,
                need("B", &self.b)?,
            )))
        } else if general {
            explicit(WebSource::GeneralCubic(GeneralCubic {
                k3: need("K3", &self.k3)?,
                k2: need("K2", &self.k2)?,
                k1: need("K1", &self.k1)?,
                k0: need("K0", &self.k0)?,
            }))
        } else if quad {
            explicit(WebSource::QuadraticPlusVertical(QuadraticPlusVertical {
                a: need("quad-a", &self.quad_a)?,
                b: need("quad-b", &self.quad_b)?,
            }))
        } else if let Some(id) = &self.catalog {
            let entry = match self.param {
                Some(a) => catalog::get_with_parameter(id, a),
                None => catalog::get(id),
            }
            .map_err(config)?;
            Resolved {
                spec: entry.spec.clone(),
                entry: Some(entry),
            }
        } else {
            let path = self.config.as_ref().expect("counted above");
            let text =
                fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
            match serde_json::from_str::<CatalogEntry>(&text) {
                Ok(entry) => Resolved {
                    spec: entry.spec.clone(),
                    entry: Some(entry),
                },
                Err(_) => {
                    let spec: WebSpec = serde_json::from_str(&text)
                        .map_err(|e| config(format!("{}: not a web spec: {e}", path.display())))?;
                    Resolved { spec, entry: None }
                }
            }
        };
        if let Some(d) = domain {
            resolved.spec.domain = d;
        }
        resolved.spec.validate().map_err(config)?;
        Ok(resolved)
    }
}

fn grid_for(n: usize, domain: DomainBox) -> Result<GridSpec, CliError> {
    if n < 2 {
        return Err(config(format!("--grid must be at least 2, got {n}")));
    }
    GridSpec::square(n, domain).map_err(config)
}

/// Writes through a temporary file in the target directory, then renames it into place.
/// Without a path the content goes to stdout.
pub fn write_output(
    path: Option<&Path>,
    f: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<(), CliError> {
    match path {
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            match f(&mut lock).and_then(|_| lock.flush()) {
                Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(runtime(e)),
                _ => Ok(()),
            }
        }
        Some(p) => {
            let dir = p
                .parent()
                .filter(|d| !d.as_os_str().is_empty())
                .unwrap_or(Path::new("."));
            let mut tmp = tempfile::NamedTempFile::new_in(dir)
                .map_err(|e| runtime(format!("{}: {e}", dir.display())))?;
            f(tmp.as_file_mut()).map_err(runtime)?;
            tmp.as_file_mut().flush().map_err(runtime)?;
            tmp.persist(p)
                .map_err(|e| runtime(format!("{}: {e}", p.display())))?;
            Ok(())
        }
    }
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(runtime)?;
    write_output(path, |w| writeln!(w, "{text}"))
}

fn csv_io(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

/// Reduced depressed web for a general cubic source.
fn reduce_general(
    g: &GeneralCubic,
    res: &Resolved,
    red: &ReductionArgs,
    n: usize,
) -> Result<SampledWeb, CliError> {
    let plan = res.entry.as_ref().and_then(|e| e.reduction);
    let domain = res.spec.domain;
    let reduced = match &red.reduced_box {
        Some(s) => parse_box(s)?,
        None => plan.map(|p| p.reduced).unwrap_or(domain),
    };
    let x0 = red
        .x0
        .or(plan.map(|p| p.x0))
        .unwrap_or(0.5 * (reduced.xmin + reduced.xmax));
    let grid = grid_for(n, reduced)?;
    tschirnhausen_reduce(g, &domain, x0, &grid, &ReduceOptions::default()).map_err(runtime)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub source: String,
    pub domain: DomainBox,
    pub flat_verdict: Option<bool>,
    #[serde(rename = "max_K")]
    pub max_k: Option<f64>,
    pub audit: Option<FlatnessReport>,
    pub audit_error: Option<String>,
    pub points: Vec<SingularReport>,
    pub failures: Vec<String>,
}

fn audit_result(
    r: Result<FlatnessReport, ConnectionError>,
) -> Result<(Option<FlatnessReport>, Option<String>), CliError> {
    match r {
        Ok(rep) => Ok((Some(rep), None)),
        Err(ConnectionError::AllExcluded) => Err(CliError::AllExcluded(
            "every grid node lies in the discriminant band or outside the domain of the coefficients".into(),
        )),
        Err(e) => Ok((None, Some(e.to_string()))),
    }
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<AnalyzeReport, CliError> {
    let res = args.web.resolve()?;
    if !(args.tol > 0.0) {
        return Err(config("--tol must be positive"));
    }
    let points: Vec<[f64; 2]> = args
        .point
        .iter()
        .map(|s| parse_point(s))
        .collect::<Result<_, _>>()?;
    let grid = grid_for(args.grid, res.spec.domain)?;
    let opts = ClassifyOptions::default();
    let mut failures = Vec::new();
    let mut reports = Vec::new();
    let (audit, audit_error) = match &res.spec.source {
        WebSource::Depressed(w) => {
            let audit = audit_result(connection::flatness_audit(w, &grid, args.tol))?;
            let targets = if points.is_empty() {
                match singular::find_singular_points(w, &grid) {
                    Ok(c) => {
                        failures.extend(c.failures.iter().map(|f| format!("seed ({}, {}): {}", f.x, f.y, f.reason)));
                        c.triple.iter().map(|t| [t.x, t.y]).chain(c.double.iter().copied()).collect()
                    }
                    Err(e) => {
                        failures.push(e.to_string());
                        Vec::new()
                    }
                }
            } else {
                points.clone()
            };
            for [x, y] in targets {
                match singular::classify(w, x, y, &opts) {
                    Ok(r) => reports.push(r),
                    Err(e) => failures.push(format!("({x}, {y}): {e}")),
                }
            }
            audit
        }
        WebSource::GeneralCubic(g) => {
            let audit = match reduce_general(g, &res, &args.reduction, args.grid) {
                Ok(s) => audit_result(connection::flatness_audit_sampled(&s, args.tol))?,
                Err(CliError::Runtime(e)) => (None, Some(format!("reduction failed: {e}"))),
                Err(e) => return Err(e),
            };
            if points.is_empty() {
                failures.push("singular point search needs a depressed web; pass --point to classify".into());
            }
            for &[x, y] in &points {
                match singular::classify_general(g, &res.spec.domain, x, y, &opts) {
                    Ok(r) => reports.push(r),
                    Err(e) => failures.push(format!("({x}, {y}): {e}")),
                }
            }
            audit
        }
        WebSource::QuadraticPlusVertical(_) => {
            (None, Some("curvature is defined for cubic webs only; probe quadratic webs with the hexagon subcommand".into()))
        }
    };
    let report = AnalyzeReport {
        source: res.spec.source.variant_name().into(),
        domain: res.spec.domain,
        flat_verdict: audit.as_ref().map(|a| a.flat),
        max_k: audit.as_ref().map(|a| a.max_abs_k),
        audit,
        audit_error,
        points: reports,
        failures,
    };
    write_json(args.out.as_deref(), &report)?;
    Ok(report)
}

pub fn cmd_curvature(args: &CurvatureArgs) -> Result<(), CliError> {
    let res = args.web.resolve()?;
    let samples: Vec<GridSample> = match &res.spec.source {
        WebSource::Depressed(w) => {
            connection::curvature_grid(w, &grid_for(args.grid, res.spec.domain)?)
        }
        WebSource::GeneralCubic(g) => {
            let s = reduce_general(g, &res, &args.reduction, args.grid)?;
            s.nodes
                .iter()
                .map(|n| {
                    let c = connection::curvature_from_jets(&n.a, &n.b, connection::EXCLUSION).ok();
                    GridSample {
                        x: n.x,
                        y: n.y,
                        k: c.map(|c| c.k),
                        delta: c.map(|c| c.delta),
                    }
                })
                .collect()
        }
        WebSource::QuadraticPlusVertical(_) => {
            return Err(config(
                "curvature is defined for cubic webs only; use the hexagon subcommand",
            ))
        }
    };
    write_output(args.out.as_deref(), |w| {
        connection::write_curvature_csv(&samples, w).map_err(csv_io)
    })
}

pub fn cmd_plot(args: &PlotArgs) -> Result<String, CliError> {
    let res = args.web.resolve()?;
    if matches!(res.spec.source, WebSource::GeneralCubic(_)) {
        return Err(config(
            "plot needs a depressed or quadratic web; reduce general cubics first",
        ));
    }
    if !(args.width > 0.0) {
        return Err(config("--width must be positive"));
    }
    let seeds = SeedSpec {
        boundary: args.seeds,
        discriminant: args.discriminant_seeds,
        points: args
            .point
            .iter()
            .map(|s| parse_point(s))
            .collect::<Result<_, _>>()?,
        arclength: args.arclength,
        grid: grid_for(args.grid, res.spec.domain)?.nx,
        ..SeedSpec::default()
    };
    let traced = trace::trace_web(&res.spec, &seeds).map_err(runtime)?;
    let mut scene = traced.scene;
    if let WebSource::Depressed(w) = &res.spec.source {
        let grid = grid_for(args.grid.max(16), res.spec.domain)?;
        if let Ok(c) = singular::find_singular_points(w, &grid) {
            for t in &c.triple {
                let label = match singular::classify(w, t.x, t.y, &ClassifyOptions::default()) {
                    Ok(r) => r.verdict.name().to_string(),
                    Err(_) => "singular".to_string(),
                };
                scene.markers.push(Marker {
                    x: t.x,
                    y: t.y,
                    label,
                });
            }
        }
    }
    let style = StyleSpec {
        width: args.width,
        ..StyleSpec::default()
    };
    let svg = render::render_svg(&scene, &style).map_err(runtime)?;
    write_output(args.out.as_deref(), |w| w.write_all(svg.as_bytes()))?;
    Ok(svg)
}

pub fn cmd_hexagon(args: &HexagonArgs) -> Result<DefectTable, CliError> {
    let res = args.web.resolve()?;
    if matches!(res.spec.source, WebSource::GeneralCubic(_)) {
        return Err(config("hexagon needs a depressed or quadratic web"));
    }
    let center = match &args.center {
        Some(s) => parse_point(s)?,
        None => res
            .entry
            .as_ref()
            .and_then(|e| e.probe_center)
            .ok_or_else(|| config("--center is required for this web"))?,
    };
    if !(args.tmin > 0.0 && args.tmax >= args.tmin && args.tmax.is_finite()) {
        return Err(config("need 0 < tmin <= tmax"));
    }
    if args.steps == 0 || args.rk_steps == 0 {
        return Err(config("--steps and --rk-steps must be positive"));
    }
    let ts = hexagon::log_offsets(args.tmin, args.tmax, args.steps);
    let table = hexagon::defect_scan(
        &res.spec,
        center,
        &ts,
        &HexagonOptions {
            steps: args.rk_steps,
        },
    );
    if table.entries.iter().all(|e| e.defect.is_none()) {
        let why = table
            .entries
            .first()
            .and_then(|e| e.error.clone())
            .unwrap_or_default();
        return Err(runtime(format!("no defect could be computed: {why}")));
    }
    if let Some(p) = &args.out {
        write_output(Some(p), |w| table.write_csv(w).map_err(csv_io))?;
    }
    write_json(args.json.as_deref(), &table)?;
    Ok(table)
}

pub fn cmd_reduce(args: &ReduceArgs) -> Result<SampledWeb, CliError> {
    let res = args.web.resolve()?;
    let WebSource::GeneralCubic(g) = &res.spec.source else {
        return Err(config(
            "reduce needs a general cubic (--K3..--K0 or a general catalog entry)",
        ));
    };
    let s = reduce_general(g, &res, &args.reduction, args.grid)?;
    write_output(args.out.as_deref(), |w| s.write_csv(w).map_err(csv_io))?;
    Ok(s)
}

pub fn cmd_catalog(args: &CatalogArgs) -> Result<String, CliError> {
    let text = match &args.show {
        Some(id) => {
            let e = match args.param {
                Some(a) => catalog::get_with_parameter(id, a),
                None => catalog::get(id),
            }
            .map_err(config)?;
            serde_json::to_string_pretty(&e).map_err(runtime)? + "\n"
        }
        None => {
            let mut s = String::new();
            for id in catalog::list() {
                let e = catalog::get(id).map_err(runtime)?;
                let d = e.spec.domain;
                let domain = format!("[{}, {}]x[{}, {}]", d.xmin, d.xmax, d.ymin, d.ymax);
                s += &format!(
                    "{:<11} {:<24} {:<8} {:<22} {}\n",
                    e.id,
                    e.spec.source.variant_name(),
                    if e.expected.flat { "flat" } else { "not-flat" },
                    domain,
                    e.notes
                );
            }
            s
        }
    };
    write_output(args.out.as_deref(), |w| w.write_all(text.as_bytes()))?;
    Ok(text)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(config("--threads must be positive"));
        }
        // a second initialization (e.g. from tests) keeps the existing pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match &cli.command {
        Command::Analyze(a) => cmd_analyze(a).map(drop),
        Command::Curvature(a) => cmd_curvature(a),
        Command::Plot(a) => cmd_plot(a).map(drop),
        Command::Hexagon(a) => cmd_hexagon(a).map(drop),
        Command::Reduce(a) => cmd_reduce(a).map(drop),
        Command::Catalog(a) => cmd_catalog(a).map(drop),
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("flatweb: {e}");
            e.exit_code()
        }
    }
}
