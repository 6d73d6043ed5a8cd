//! Argument parsing and the subcommands.
//!
//! Exit codes: 0 success (and every checked inequality holds), 1 a checked
//! inequality fails, 2 usage or input error, 3 the input is not in the class
//! the theorem assumes. Reports go to stdout as JSON, summaries to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use meanosc_core::ainfty::HOLDS_REL_TOL;
use meanosc_core::holder::{Thm2Verifier, DEFAULT_DELTA};
use meanosc_core::{
    alpha_profile, generate, gr_epsilon, optimize_rh_exponent, rearrangement, rh_constant,
    thm1_forward_params, thm1_reverse_bound, verify_thm1_forward, verify_thm1_reverse,
    AlphaProfile, Cube, EnumerationMode, ErrorKind, GenSpec, GrResult, LevelParams, MarginReport,
    RhOptimum, StepFunction, Thm2Params, Thm2Report, WeightedGrid,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::plot;
use crate::report::Report;
use crate::wgrid::{self, FormatError};

#[derive(Debug, Parser)]
#[command(
    name = "meanosc",
    version,
    about = "Mean oscillation and A-infinity analysis of weighted grids"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Cube family: all, dyadic or sample:COUNT:SEED [default: all in 1D, dyadic otherwise]
    #[arg(long, global = true)]
    pub mode: Option<EnumerationMode>,
    /// Worker threads for independent sub-analyses [default: all cores]
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for CSV plot tables
    #[arg(long, global = true)]
    pub plot_dir: Option<PathBuf>,
    /// Relative tolerance behind every `holds` flag
    #[arg(long, global = true, default_value_t = HOLDS_REL_TOL)]
    pub tolerance: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// GR parameter, alpha profile and rearrangement of a wgrid file
    Analyze {
        input: PathBuf,
        /// Comma-separated betas, or START:STOP:COUNT
        #[arg(long, default_value = "0.05:0.95:19")]
        beta_grid: String,
    },
    /// Level-set certificate from GR(epsilon), or the converse
    Theorem1 {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Direction::Fwd)]
        direction: Direction,
        /// [default: measured on the cube family]
        #[arg(long)]
        epsilon: Option<f64>,
        /// [default: (epsilon + 2) / 2]
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
    },
    /// f**(t) <= K f*(t) with the constants of an actual covering
    Theorem2 {
        input: PathBuf,
        /// [default: measured on the cube family]
        #[arg(long)]
        epsilon: Option<f64>,
        /// [default: (epsilon + 2) / 2]
        #[arg(long)]
        lambda: Option<f64>,
        /// [default: (1 - lambda/2) / 2]
        #[arg(long)]
        rho: Option<f64>,
        /// Comma-separated t values [default: rho mu(Q0) k/10, k = 1..10]
        #[arg(long, value_delimiter = ',')]
        t: Vec<f64>,
    },
    /// Empirical reverse Hölder constant
    Rh {
        input: PathBuf,
        #[arg(long, conflicts_with = "auto", required_unless_present = "auto")]
        p: Option<f64>,
        /// Use the best exponent bound for the measured epsilon
        #[arg(long)]
        auto: bool,
        /// Take B from the overlap of a covering instead of B = 1 (with --auto)
        #[arg(long = "B-from-covering")]
        b_from_covering: bool,
    },
    /// Write a generated wgrid file and print its digest
    Generate {
        /// Generator spec: inline JSON or a path to a JSON file
        #[arg(long)]
        spec: String,
        /// Output path [default: stdout]
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Fwd,
    Rev,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Core(#[from] meanosc_core::Error),
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.kind() == ErrorKind::Precondition => 3,
            _ => 2,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// What a successful subcommand hands back to [`run`].
pub struct Outcome {
    pub stdout: String,
    pub summary: String,
    pub holds: bool,
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(o) => {
            let _ = out.write_all(o.stdout.as_bytes());
            let _ = writeln!(err, "{}", o.summary);
            if o.holds {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> CliResult<Outcome> {
    let g = &cli.global;
    if !(g.tolerance >= 0.0 && g.tolerance.is_finite()) {
        return Err(CliError::Usage(format!(
            "--tolerance must be >= 0, got {}",
            g.tolerance
        )));
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = g.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))?;
    if let Some(dir) = &g.plot_dir {
        std::fs::create_dir_all(dir).map_err(|e| output_err(dir, e))?;
    }
    pool.install(|| match &cli.command {
        Command::Analyze { input, beta_grid } => analyze(g, input, beta_grid),
        Command::Theorem1 {
            input,
            direction,
            epsilon,
            lambda,
            alpha,
            beta,
        } => theorem1(g, input, *direction, *epsilon, *lambda, *alpha, *beta),
        Command::Theorem2 {
            input,
            epsilon,
            lambda,
            rho,
            t,
        } => theorem2(g, input, *epsilon, *lambda, *rho, t),
        Command::Rh {
            input,
            p,
            auto,
            b_from_covering,
        } => rh(g, input, *p, *auto, *b_from_covering),
        Command::Generate { spec, out } => generate_cmd(spec, out.as_deref()),
    })
}

fn output_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn load(g: &Global, input: &Path) -> CliResult<(WeightedGrid, String, EnumerationMode)> {
    let (wg, digest) = wgrid::load(input)?;
    let mode = g
        .mode
        .unwrap_or_else(|| EnumerationMode::default_for(wg.grid()));
    mode.check(wg.grid())?;
    Ok((wg, digest, mode))
}

fn parse_beta_grid(s: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Usage(format!("bad --beta-grid '{s}'"));
    let betas: Vec<f64> = if let [start, stop, count] = s.split(':').collect::<Vec<_>>()[..] {
        let start: f64 = start.trim().parse().map_err(|_| bad())?;
        let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
        let count: usize = count.trim().parse().map_err(|_| bad())?;
        match count {
            0 => return Err(bad()),
            1 => vec![start],
            _ => (0..count)
                .map(|k| start + (stop - start) * k as f64 / (count - 1) as f64)
                .collect(),
        }
    } else {
        s.split(',')
            .map(|x| x.trim().parse().map_err(|_| bad()))
            .collect::<CliResult<_>>()?
    };
    if betas.iter().any(|&b| !(b > 0.0 && b < 1.0)) {
        return Err(CliError::Usage(format!(
            "--beta-grid values must lie in (0, 1): '{s}'"
        )));
    }
    Ok(betas)
}

#[derive(Serialize)]
struct AnalyzePayload<'a> {
    cells: usize,
    total_mass: f64,
    gr: GrResult,
    alpha_profile: Vec<AlphaProfile>,
    rearrangement: &'a StepFunction,
}

fn analyze(g: &Global, input: &Path, beta_grid: &str) -> CliResult<Outcome> {
    let betas = parse_beta_grid(beta_grid)?;
    let (wg, digest, mode) = load(g, input)?;
    let gr = gr_epsilon(&wg, &mode)?;
    let profile = betas
        .par_iter()
        .map(|&b| alpha_profile(&wg, b, &mode))
        .collect::<Result<Vec<_>, _>>()?;
    let f = rearrangement(&wg)?;
    if let Some(dir) = &g.plot_dir {
        plot::rearrangement(dir, &f).map_err(|e| output_err(dir, e))?;
        plot::alpha_profile(dir, &profile).map_err(|e| output_err(dir, e))?;
    }
    let summary = format!(
        "epsilon = {} on {} cubes (mode {mode}), witness {}; {} rearrangement steps",
        gr.epsilon,
        gr.cubes_scanned,
        gr.witness,
        f.levels().len()
    );
    let payload = AnalyzePayload {
        cells: wg.grid().cell_count(),
        total_mass: wg.total_mass(),
        gr,
        alpha_profile: profile,
        rearrangement: &f,
    };
    Ok(Outcome {
        stdout: Report::new("analyze", &digest, mode, payload).to_json(),
        summary,
        holds: true,
    })
}

#[derive(Serialize)]
struct Theorem1Payload {
    direction: Direction,
    epsilon: Option<f64>,
    lambda: Option<f64>,
    alpha: f64,
    beta: f64,
    /// `2(1 - alpha beta)` in the reverse direction.
    implied_epsilon: Option<f64>,
    tolerance: f64,
    margins: MarginReport,
    holds: bool,
}

fn theorem1(
    g: &Global,
    input: &Path,
    direction: Direction,
    epsilon: Option<f64>,
    lambda: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
) -> CliResult<Outcome> {
    let (wg, digest, mode) = load(g, input)?;
    let payload = match direction {
        Direction::Fwd => {
            let epsilon = match epsilon {
                Some(e) => e,
                None => gr_epsilon(&wg, &mode)?.epsilon,
            };
            let lambda = lambda.unwrap_or((epsilon + 2.0) / 2.0);
            if alpha.is_some() || beta.is_some() {
                return Err(CliError::Usage(
                    "--alpha/--beta belong to --direction rev".into(),
                ));
            }
            let params = thm1_forward_params(epsilon, lambda)?;
            let margins = verify_thm1_forward(&wg, epsilon, lambda, &mode)?;
            Theorem1Payload {
                direction,
                epsilon: Some(epsilon),
                lambda: Some(lambda),
                alpha: params.alpha(),
                beta: params.beta(),
                implied_epsilon: None,
                tolerance: g.tolerance,
                holds: margins.holds_at(g.tolerance),
                margins,
            }
        }
        Direction::Rev => {
            let (Some(alpha), Some(beta)) = (alpha, beta) else {
                return Err(CliError::Usage(
                    "--direction rev needs --alpha and --beta".into(),
                ));
            };
            if epsilon.is_some() || lambda.is_some() {
                return Err(CliError::Usage(
                    "--epsilon/--lambda belong to --direction fwd".into(),
                ));
            }
            let params = LevelParams::new(alpha, beta)?;
            let margins = verify_thm1_reverse(&wg, &params, &mode)?;
            Theorem1Payload {
                direction,
                epsilon: None,
                lambda: None,
                alpha,
                beta,
                implied_epsilon: Some(thm1_reverse_bound(&params)),
                tolerance: g.tolerance,
                holds: margins.holds_at(g.tolerance),
                margins,
            }
        }
    };
    let summary = format!(
        "theorem1 {:?}: {} (worst margin {} on {}, {} cubes)",
        direction,
        if payload.holds { "holds" } else { "FAILS" },
        payload.margins.worst_margin,
        payload.margins.witness,
        payload.margins.cubes_scanned
    );
    Ok(Outcome {
        holds: payload.holds,
        stdout: Report::new("theorem1", &digest, mode, payload).to_json(),
        summary,
    })
}

#[derive(Serialize)]
struct Theorem2Payload {
    tolerance: f64,
    #[serde(flatten)]
    report: Thm2Report,
}

fn theorem2(
    g: &Global,
    input: &Path,
    epsilon: Option<f64>,
    lambda: Option<f64>,
    rho: Option<f64>,
    t: &[f64],
) -> CliResult<Outcome> {
    let (wg, digest, mode) = load(g, input)?;
    let epsilon = match epsilon {
        Some(e) => e,
        None => gr_epsilon(&wg, &mode)?.epsilon,
    };
    let lambda = lambda.unwrap_or((epsilon + 2.0) / 2.0);
    let rho = rho.unwrap_or((1.0 - lambda / 2.0) / 2.0);
    let ts = if t.is_empty() {
        (1..=10)
            .map(|k| rho * wg.total_mass() * k as f64 / 10.0)
            .collect()
    } else {
        t.to_vec()
    };
    let params = Thm2Params::new(epsilon, lambda, rho, ts)?;
    let verifier = Thm2Verifier::new(&wg, params, &mode)?;
    let records = verifier
        .params()
        .t_values()
        .par_iter()
        .map(|&t| verifier.check_t(t))
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = verifier.report(records);
    for r in &mut report.per_t {
        r.holds = r.holds_at(g.tolerance);
    }
    report.holds = report.per_t.iter().all(|r| r.holds);
    if let Some(dir) = &g.plot_dir {
        plot::theorem2(dir, &report.per_t).map_err(|e| output_err(dir, e))?;
    }
    let failing = report.per_t.iter().filter(|r| !r.holds).count();
    let summary = format!(
        "theorem2: {} of {} t-values hold (epsilon {}, lambda {}, rho {}; overlap {}, rho_lo {:?})",
        report.per_t.len() - failing,
        report.per_t.len(),
        epsilon,
        lambda,
        rho,
        report.covering_constants.overlap,
        report.covering_constants.rho_lo
    );
    let holds = report.holds;
    Ok(Outcome {
        stdout: Report::new(
            "theorem2",
            &digest,
            mode,
            Theorem2Payload {
                tolerance: g.tolerance,
                report,
            },
        )
        .to_json(),
        summary,
        holds,
    })
}

#[derive(Serialize)]
struct ExponentBound {
    measured_epsilon: f64,
    b: f64,
    /// `unit` or `covering`.
    b_source: &'static str,
    delta: f64,
    optimum: RhOptimum,
}

#[derive(Serialize)]
struct RhPayload {
    p: f64,
    c_hat: f64,
    witness: Cube,
    cubes_scanned: usize,
    exponent_bound: Option<ExponentBound>,
}

/// Overlap of the covering used at `t = rho mu(Q0)` with
/// `lambda = (epsilon + 2)/2`, `rho = (1 - lambda/2)/2`.
fn covering_overlap(wg: &WeightedGrid, epsilon: f64, mode: &EnumerationMode) -> CliResult<f64> {
    let lambda = (epsilon + 2.0) / 2.0;
    let rho = (1.0 - lambda / 2.0) / 2.0;
    let t = rho * wg.total_mass();
    let verifier = Thm2Verifier::new(wg, Thm2Params::new(epsilon, lambda, rho, vec![t])?, mode)?;
    Ok(verifier.check_t(t)?.covering.overlap.max(1) as f64)
}

fn rh(
    g: &Global,
    input: &Path,
    p: Option<f64>,
    auto: bool,
    b_from_covering: bool,
) -> CliResult<Outcome> {
    if b_from_covering && !auto {
        return Err(CliError::Usage(
            "--B-from-covering only applies with --auto".into(),
        ));
    }
    let (wg, digest, mode) = load(g, input)?;
    let bound = if auto {
        let eps = gr_epsilon(&wg, &mode)?.epsilon;
        if !(eps > 0.0 && eps < 2.0) {
            return Err(CliError::Usage(format!(
                "--auto needs a measured epsilon in (0, 2), got {eps}"
            )));
        }
        let (b, b_source) = if b_from_covering {
            (covering_overlap(&wg, eps, &mode)?, "covering")
        } else {
            (1.0, "unit")
        };
        Some(ExponentBound {
            measured_epsilon: eps,
            b,
            b_source,
            delta: DEFAULT_DELTA,
            optimum: optimize_rh_exponent(eps, b, DEFAULT_DELTA)?,
        })
    } else {
        None
    };
    let p = match (&bound, p) {
        (Some(b), _) => b.optimum.p,
        (None, Some(p)) => p,
        (None, None) => return Err(CliError::Usage("need --p or --auto".into())),
    };
    let r = rh_constant(&wg, p, &mode)?;
    if let Some(dir) = &g.plot_dir {
        let curve = (1..=16)
            .into_par_iter()
            .map(|k| {
                let q = 1.0 + (p - 1.0) * k as f64 / 8.0;
                rh_constant(&wg, q, &mode).map(|c| (q, c.c_hat))
            })
            .collect::<Result<Vec<_>, _>>()?;
        plot::rh_curve(dir, &curve).map_err(|e| output_err(dir, e))?;
    }
    let summary = format!(
        "c_hat = {} at p = {} on {} cubes, witness {}",
        r.c_hat, p, r.cubes_scanned, r.witness
    );
    let payload = RhPayload {
        p,
        c_hat: r.c_hat,
        witness: r.witness,
        cubes_scanned: r.cubes_scanned,
        exponent_bound: bound,
    };
    Ok(Outcome {
        stdout: Report::new("rh", &digest, mode, payload).to_json(),
        summary,
        holds: true,
    })
}

fn generate_cmd(spec: &str, out: Option<&Path>) -> CliResult<Outcome> {
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        std::fs::read_to_string(spec)
            .map_err(|e| CliError::Usage(format!("cannot read spec {spec}: {e}")))?
    };
    let de = &mut serde_json::Deserializer::from_str(&text);
    let spec: GenSpec = serde_path_to_error::deserialize(de)
        .map_err(|e| CliError::Usage(format!("invalid spec at `{}`: {}", e.path(), e.inner())))?;
    let wg = generate(&spec)?;
    let json = wgrid::to_json(&wg);
    let digest = wgrid::digest(json.as_bytes());
    match out {
        Some(path) => {
            std::fs::write(path, &json).map_err(|e| output_err(path, e))?;
            Ok(Outcome {
                stdout: format!("{digest}  {}\n", path.display()),
                summary: format!(
                    "wrote {} cells to {}",
                    wg.grid().cell_count(),
                    path.display()
                ),
                holds: true,
            })
        }
        None => Ok(Outcome {
            stdout: json,
            summary: format!("sha256 {digest}"),
            holds: true,
        }),
    }
}
