//! Command line front end: JSON configuration in, CSV or JSON out.
//!
//! Exit codes: 0 success, 1 validation failure, 2 numerical failure,
//! 3 I/O or configuration error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{compare_grids, fd_solve};
use crate::problem::{validate, ProblemSpec, ScalarFn};
use crate::solver_contour::{solve_contour, ContourOptions};
use crate::solver_residue::{boundary_trace, solve_residue, Method, ResidueForm, ResidueOptions, SolutionGrid};
use crate::spectrum::locate_eigenvalues;
use crate::suite;

pub const THREADS_ENV: &str = "SHIFTHEAT_THREADS";

fn one() -> f64 {
    1.0
}
fn minus_one() -> f64 {
    -1.0
}
fn half() -> f64 {
    0.5
}
fn text_one() -> String {
    "1".into()
}
fn text_zero() -> String {
    "0".into()
}
fn default_method() -> String {
    "residue".into()
}
fn default_x_points() -> usize {
    21
}
fn default_t_values() -> Vec<f64> {
    vec![0.05, 0.15, 0.25, 0.35, 0.45]
}
fn default_eps() -> f64 {
    1e-10
}
fn default_tol() -> f64 {
    1e-6
}
fn default_n_pairs() -> usize {
    20
}
fn default_k() -> usize {
    4
}

/// Job description. Problem fields default to the reference problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "text_one")]
    pub a: String,
    #[serde(default = "text_zero")]
    pub b: String,
    #[serde(default = "text_zero")]
    pub c: String,
    pub phi: String,
    #[serde(default = "one")]
    pub delta0: f64,
    #[serde(default = "one")]
    pub delta1: f64,
    #[serde(default = "one")]
    pub alpha0: f64,
    #[serde(default = "one")]
    pub alpha1: f64,
    #[serde(default = "minus_one")]
    pub beta0: f64,
    #[serde(default = "minus_one")]
    pub beta1: f64,
    #[serde(default = "half")]
    pub omega: f64,
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default = "default_x_points")]
    pub x_points: usize,
    #[serde(default = "default_t_values")]
    pub t_values: Vec<f64>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_n_pairs")]
    pub n_pairs: usize,
    #[serde(default = "default_k")]
    pub k_segments: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn spec(&self) -> Result<ProblemSpec> {
        Ok(ProblemSpec {
            a: ScalarFn::parse(&self.a)?,
            b: ScalarFn::parse(&self.b)?,
            c: ScalarFn::parse(&self.c)?,
            phi: ScalarFn::parse(&self.phi)?,
            delta0: self.delta0,
            delta1: self.delta1,
            alpha0: self.alpha0,
            alpha1: self.alpha1,
            beta0: self.beta0,
            beta1: self.beta1,
            omega: self.omega,
        })
    }

    pub fn xs(&self) -> Vec<f64> {
        let n = self.x_points.max(2);
        (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
    }

    pub fn method(&self) -> Result<Method> {
        match self.method.as_str() {
            "residue" => Ok(Method::Residue),
            "spectral-contour" => Ok(Method::SpectralContour),
            "existence-formula" => Ok(Method::ExistenceFormula),
            m => Err(Error::Config(format!("unknown method `{m}`"))),
        }
    }

    /// Explicit config value, overridden by the environment.
    pub fn thread_count(&self) -> Option<usize> {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .or(self.threads)
            .filter(|n| *n > 0)
    }
}

#[derive(Debug, Parser)]
#[command(name = "shiftheat", version, about = "Parabolic problems with time-shift nonlocal boundary conditions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// JSON job description.
    #[arg(long)]
    config: PathBuf,
    /// Output file (stdout when absent and the config names none).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run even when validation fails.
    #[arg(long)]
    force: bool,
    /// Write a gnuplot script next to the output.
    #[arg(long)]
    emit_plots: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the problem hypotheses.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Eigenvalue table.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 6)]
        count: usize,
    },
    /// Boundary traces on (0, ω].
    Traces {
        #[command(flatten)]
        common: Common,
    },
    /// Solution grid.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Overrides the configured method.
        #[arg(long)]
        method: Option<String>,
    },
    /// Finite-difference reference solution.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 200)]
        nx: usize,
        #[arg(long, default_value_t = 1e-4)]
        dt: f64,
    },
    /// Error report between two solution CSV files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Shift ω; read from the metadata when absent.
        #[arg(long)]
        omega: Option<f64>,
        /// Excluded band around multiples of ω; defaults to an FD file's dt.
        #[arg(long)]
        band: Option<f64>,
    },
    /// Acceptance suite.
    Report {
        /// Comma-separated criterion numbers (default: all).
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
    },
}

/// Runs one command line; returns the process exit code.
pub fn run<I: IntoIterator<Item = String>>(argv: I) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn with_threads<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            Ok(pool.install(job))
        }
        None => Ok(job()),
    }
}

struct Job {
    cfg: RunConfig,
    spec: ProblemSpec,
    out: Option<PathBuf>,
    emit_plots: bool,
}

/// Loads the config and applies the validation gate.
fn prepare(common: &Common) -> Result<std::result::Result<Job, i32>> {
    let cfg = RunConfig::load(&common.config)?;
    let spec = cfg.spec()?;
    let report = validate(&spec, 101);
    if !report.pass && !common.force {
        eprintln!("{report}");
        return Ok(Err(1));
    }
    let out = common.out.clone().or_else(|| cfg.output.clone());
    Ok(Ok(Job {
        cfg,
        spec,
        out,
        emit_plots: common.emit_plots,
    }))
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Validate { common } => {
            let cfg = RunConfig::load(&common.config)?;
            let report = validate(&cfg.spec()?, 101);
            println!("{report}");
            Ok(if report.pass { 0 } else { 1 })
        }
        Command::Spectrum { common, count } => {
            let job = match prepare(&common)? {
                Ok(j) => j,
                Err(code) => return Ok(code),
            };
            let (recs, meta) = with_threads(job.cfg.thread_count(), || locate_eigenvalues(&job.spec, count))??;
            let mut extra = BTreeMap::new();
            extra.insert("h".to_string(), format!("{:?}", meta.h));
            extra.insert("incomplete".to_string(), meta.incomplete.to_string());
            let mut body = String::from("nu,re,im,chi,seed_re,seed_im,residual\n");
            for r in &recs {
                let _ = writeln!(
                    body,
                    "{},{:?},{:?},{},{:?},{:?},{:?}",
                    r.index, r.value.re, r.value.im, r.multiplicity, r.seed.re, r.seed.im, r.residual
                );
            }
            emit(&job, "spectrum", &extra, &body)?;
            Ok(0)
        }
        Command::Traces { common } => {
            let job = match prepare(&common)? {
                Ok(j) => j,
                Err(code) => return Ok(code),
            };
            let ts = job.cfg.t_values.clone();
            let traces = with_threads(job.cfg.thread_count(), || -> Result<_> {
                Ok([boundary_trace(&job.spec, 0, &ts)?, boundary_trace(&job.spec, 1, &ts)?])
            })??;
            let mut body = String::from("s,t,gamma\n");
            for tr in &traces {
                for (t, g) in tr.ts.iter().zip(&tr.values) {
                    let _ = writeln!(body, "{},{t:?},{g:?}", tr.s);
                }
            }
            emit(&job, "traces", &BTreeMap::new(), &body)?;
            Ok(0)
        }
        Command::Solve { common, method } => {
            let mut job = match prepare(&common)? {
                Ok(j) => j,
                Err(code) => return Ok(code),
            };
            if let Some(m) = method {
                job.cfg.method = m;
            }
            let grid = with_threads(job.cfg.thread_count(), || solve(&job.cfg, &job.spec, common.force))??;
            emit(&job, "solve", &grid.metadata, &grid_csv(&grid))?;
            Ok(0)
        }
        Command::Oracle { common, nx, dt } => {
            let job = match prepare(&common)? {
                Ok(j) => j,
                Err(code) => return Ok(code),
            };
            let t_end = job.cfg.t_values.iter().cloned().fold(0.0, f64::max);
            let fd = fd_solve(&job.spec, nx, dt, t_end)?;
            let grid = fd.to_solution_grid(&job.cfg.t_values);
            emit(&job, "oracle", &grid.metadata, &grid_csv(&grid))?;
            Ok(0)
        }
        Command::Compare { a, b, omega, band } => {
            let (ga, ma) = read_grid(&a)?;
            let (gb, mb) = read_grid(&b)?;
            let meta_f = |k: &str| ma.get(k).or_else(|| mb.get(k)).and_then(|v| v.parse::<f64>().ok());
            let omega = omega
                .or_else(|| meta_f("omega"))
                .ok_or_else(|| Error::Config("omega unknown; pass --omega".into()))?;
            let band = band.or_else(|| meta_f("dt")).unwrap_or(0.0);
            let report = compare_grids(&ga, &gb, omega, band)?;
            let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
            println!("{json}");
            Ok(0)
        }
        Command::Report { criteria } => {
            let ids = if criteria.is_empty() { suite::CRITERIA.to_vec() } else { criteria };
            let shared = suite::Shared::default();
            let mut all = true;
            for id in ids {
                let r = suite::run_criterion(id, &shared);
                println!("{r}");
                all &= r.passed;
            }
            println!("summary: {}", if all { "all criteria pass" } else { "some criteria fail" });
            Ok(if all { 0 } else { 2 })
        }
    }
}

fn solve(cfg: &RunConfig, spec: &ProblemSpec, force: bool) -> Result<SolutionGrid> {
    let xs = cfg.xs();
    let ts = &cfg.t_values;
    match cfg.method()? {
        Method::ExistenceFormula => {
            let opts = ContourOptions {
                eps: cfg.eps,
                k_segments: cfg.k_segments,
                c1: cfg.c1,
                hat_radius: cfg.radius,
                allow_incompatible: force,
                ..Default::default()
            };
            solve_contour(spec, &xs, ts, opts)
        }
        m => {
            let opts = ResidueOptions {
                form: if m == Method::Residue { ResidueForm::Series } else { ResidueForm::Contour },
                n_pairs: cfg.n_pairs,
                eps: cfg.eps.min(1e-10),
                allow_incompatible: force,
            };
            solve_residue(spec, &xs, ts, opts)
        }
    }
}

/// `x,t,u[,u1,u2,u3]` rows, t-major.
pub fn grid_csv(g: &SolutionGrid) -> String {
    let mut s = String::from(if g.components.is_some() { "x,t,u,u1,u2,u3\n" } else { "x,t,u\n" });
    for (j, t) in g.ts.iter().enumerate() {
        for (i, x) in g.xs.iter().enumerate() {
            let _ = write!(s, "{x:?},{t:?},{:?}", g.values[j][i]);
            if let Some(c) = &g.components {
                let _ = write!(s, ",{:?},{:?},{:?}", c.u1[j][i], c.u2[j][i], c.u3[j][i]);
            }
            s.push('\n');
        }
    }
    s
}

fn emit(job: &Job, kind: &str, extra: &BTreeMap<String, String>, body: &str) -> Result<()> {
    let cfg_json = serde_json::to_string(&RunConfig { output: None, ..job.cfg.clone() }).map_err(|e| Error::Io(e.to_string()))?;
    let mut head = format!("# command={kind}\n# config={cfg_json}\n# omega={:?}\n", job.spec.omega);
    if kind == "solve" || kind == "oracle" {
        let method = if kind == "oracle" { "finite-difference" } else { job.cfg.method.as_str() };
        let _ = writeln!(head, "# method={method}");
    }
    for (k, v) in extra {
        let _ = writeln!(head, "# {k}={v}");
    }
    let text = head + body;
    match &job.out {
        Some(path) => {
            fs::write(path, &text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            if job.emit_plots {
                let script = plot_script(kind, path);
                let gp = path.with_extension("gp");
                fs::write(&gp, script).map_err(|e| Error::Io(format!("{}: {e}", gp.display())))?;
            }
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn plot_script(kind: &str, data: &Path) -> String {
    let file = data.display();
    match kind {
        "spectrum" => format!(
            "set datafile separator ','\nset xlabel 'Re mu'\nset ylabel 'Im mu'\n\
             plot '{file}' every ::1 using 2:3 with points title 'eigenvalues', \
             '' every ::1 using 5:6 with points title 'seeds'\n"
        ),
        "traces" => format!(
            "set datafile separator ','\nset xlabel 't'\n\
             plot '{file}' every ::1 using ($1==0?$2:1/0):3 with lines title 'gamma_0', \
             '' every ::1 using ($1==1?$2:1/0):3 with lines title 'gamma_1'\n"
        ),
        _ => format!(
            "set datafile separator ','\nset xlabel 'x'\nset ylabel 't'\nset zlabel 'u'\n\
             splot '{file}' every ::1 using 1:2:3 with points title 'u'\n"
        ),
    }
}

/// Reads a solution CSV written by [`grid_csv`] with its `# key=value`
/// metadata.
pub fn read_grid(path: &Path) -> Result<(SolutionGrid, BTreeMap<String, String>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut meta = BTreeMap::new();
    for line in text.lines().filter_map(|l| l.strip_prefix("# ")) {
        if let Some((k, v)) = line.split_once('=') {
            meta.insert(k.to_string(), v.to_string());
        }
    }
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| Error::Config(format!("{}: bad field {i}", path.display())))
        };
        rows.push((num(0)?, num(1)?, num(2)?));
    }
    let mut ts: Vec<f64> = Vec::new();
    let mut xs: Vec<f64> = Vec::new();
    for &(x, t, _) in &rows {
        if ts.last() != Some(&t) {
            ts.push(t);
        }
        if ts.len() == 1 {
            xs.push(x);
        }
    }
    if xs.is_empty() || rows.len() != xs.len() * ts.len() {
        return Err(Error::Config(format!("{}: not a rectangular grid", path.display())));
    }
    let values = rows.chunks(xs.len()).map(|c| c.iter().map(|r| r.2).collect()).collect();
    let method = match meta.get("method").map(String::as_str) {
        Some("spectral-contour") => Method::SpectralContour,
        Some("existence-formula") => Method::ExistenceFormula,
        Some("finite-difference") => Method::FiniteDifference,
        _ => Method::Residue,
    };
    Ok((
        SolutionGrid {
            xs,
            ts,
            values,
            method,
            metadata: meta.clone(),
            components: None,
            tail: 0.0,
            imag_max: 0.0,
        },
        meta,
    ))
}
