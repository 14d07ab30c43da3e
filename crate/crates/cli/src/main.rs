mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use rpsmut::attractors::{
    classify_long_run, stability_diagram, AttractorKind, AttractorReport, ClassifyConfig,
    SweepConfig, DEFAULT_START,
};
use rpsmut::bifurcation::{
    eps_samples, hopf_curve, hopf_curve_numeric, hopf_mu_closed_form, hopf_mu_numeric,
    transcritical_curve, transcritical_mu_model, transcritical_mu_numeric, write_curves_csv,
    BifurcationCurve, CurveKind, Method,
};
use rpsmut::equilibria::{find_fixed_points, EquilibriumReport};
use rpsmut::{integrate, parse_pattern, svg, Params, SimplexState, Tolerances};

use config::{parse_grid, parse_point, FileConfig};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<rpsmut::Error> for CliError {
    fn from(e: rpsmut::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

/// Replicator-mutator dynamics for Rock-Paper-Scissors.
#[derive(Parser, Debug)]
#[command(name = "rpsmut", version)]
struct Cli {
    /// TOML file with default values for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one trajectory and write it as CSV.
    Simulate(SimulateArgs),
    /// Locate and classify all fixed points (JSON).
    Equilibria(ModelArgs),
    /// Hopf bifurcation point or curve.
    Hopf(CurveArgs),
    /// Transcritical bifurcation point or curve.
    Transcritical(CurveArgs),
    /// Classify the long-run attractor over an (eps, mu) grid.
    Sweep(SweepArgs),
    /// Draw several trajectories on the simplex as SVG.
    Portrait(PortraitArgs),
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Mutation pattern: a preset name or edges such as "x>y,y>x".
    #[arg(long)]
    pattern: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, allow_hyphen_values = true)]
    t_end: Option<f64>,
    /// Initial state as x,y,z.
    #[arg(long, value_parser = parse_point)]
    start: Option<[f64; 3]>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    /// Also write a phase portrait of the trajectory.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Classify the long-run attractor and write the report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    /// With --report: also classify from this many random interior starts.
    #[arg(long)]
    random_starts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct CurveArgs {
    #[arg(long)]
    pattern: Option<String>,
    /// Single epsilon; prints one value instead of a curve.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    eps_min: Option<f64>,
    #[arg(long)]
    eps_max: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Bracket width for numeric root finding.
    #[arg(long)]
    tol: Option<f64>,
    /// Use the numeric tracer even where a closed form exists.
    #[arg(long)]
    numeric: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    pattern: Option<String>,
    #[arg(long)]
    eps_min: Option<f64>,
    #[arg(long)]
    eps_max: Option<f64>,
    #[arg(long)]
    mu_min: Option<f64>,
    #[arg(long)]
    mu_max: Option<f64>,
    /// Grid size as NxM (epsilon by mu).
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    t_transient: Option<f64>,
    /// Observation window after the transient.
    #[arg(long)]
    t_window: Option<f64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Diagram CSV; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Overlay curves as CSV.
    #[arg(long)]
    curves: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PortraitArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    t_end: Option<f64>,
    /// Initial states as "x,y,z;x,y,z;...".
    #[arg(long)]
    starts: Option<String>,
}

const DEFAULT_PORTRAIT_STARTS: [[f64; 3]; 4] = [
    [0.45, 0.35, 0.20],
    [0.70, 0.15, 0.15],
    [0.10, 0.80, 0.10],
    [0.30, 0.30, 0.40],
];

fn required<T>(flag: Option<T>, file: Option<T>, name: &str) -> CliResult<T> {
    flag.or(file)
        .ok_or_else(|| CliError::Validation(format!("missing --{name}")))
}

fn state(p: [f64; 3]) -> SimplexState {
    SimplexState::new(p[0], p[1], p[2])
}

fn model(args: &ModelArgs, file: &FileConfig) -> CliResult<Params> {
    let text = args
        .pattern
        .clone()
        .or(file.pattern.clone())
        .unwrap_or_else(|| "global".into());
    let pattern = parse_pattern(&text)?;
    let eps = required(args.eps, file.eps, "eps")?;
    let mu = required(args.mu, file.mu, "mu")?;
    let params = Params::new(eps, mu, pattern);
    params.validate()?;
    Ok(params)
}

fn tolerances(rtol: Option<f64>, atol: Option<f64>, file: &FileConfig) -> Tolerances {
    let d = Tolerances::default();
    Tolerances {
        rel: rtol.or(file.rtol).unwrap_or(d.rel),
        abs: atol.or(file.atol).unwrap_or(d.abs),
    }
}

fn with_output(
    path: Option<&Path>,
    f: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> CliResult<()> {
    match path {
        Some(p) => {
            let file =
                File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Uniform point on the simplex with every coordinate at least `floor`.
fn random_interior(rng: &mut ChaCha8Rng, floor: f64) -> SimplexState {
    loop {
        let e: [f64; 3] = std::array::from_fn(|_| -(1.0 - rng.gen::<f64>()).ln());
        let s = e[0] + e[1] + e[2];
        let p = SimplexState::new(e[0] / s, e[1] / s, e[2] / s);
        if p.min_coord() >= floor {
            return p;
        }
    }
}

#[derive(Serialize)]
struct StartCheck {
    start: SimplexState,
    kind: AttractorKind,
}

#[derive(Serialize)]
struct SimulateReport {
    epsilon: f64,
    mu: f64,
    pattern: String,
    attractor: AttractorReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    random_starts: Vec<StartCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    starts_agree: Option<bool>,
}

fn cmd_simulate(args: &SimulateArgs, file: &FileConfig) -> CliResult<()> {
    let params = model(&args.model, file)?;
    let t_end = args.t_end.or(file.t_end).unwrap_or(200.0);
    let start = args
        .start
        .or(file.start)
        .map(state)
        .unwrap_or(DEFAULT_START);
    let tol = tolerances(args.rtol, args.atol, file);
    if args.random_starts.is_some() && args.report.is_none() {
        return Err(CliError::Validation(
            "--random-starts requires --report".into(),
        ));
    }

    let traj = integrate(start, &params, t_end, tol)?;
    with_output(args.model.out.as_deref(), |w| traj.write_csv(w))?;

    if let Some(path) = &args.svg {
        let fps = find_fixed_points(&params);
        let title = format!(
            "pattern {} eps={} mu={}",
            params.pattern, params.epsilon, params.mu
        );
        let doc = svg::phase_portrait(std::slice::from_ref(&traj.states), &fps, &title);
        with_output(Some(path), |w| w.write_all(doc.as_bytes()))?;
    }

    if let Some(path) = &args.report {
        let cfg = ClassifyConfig {
            rel_tol: tol.rel,
            abs_tol: tol.abs,
            ..ClassifyConfig::default()
        };
        let attractor = classify_long_run(&params, start, &cfg)?;
        let mut random_starts = Vec::new();
        let mut seed = None;
        if let Some(n) = args.random_starts {
            let s = required(args.seed, file.seed, "seed")?;
            seed = Some(s);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            for _ in 0..n {
                let p = random_interior(&mut rng, 0.02);
                let kind = classify_long_run(&params, p, &cfg)?.kind;
                random_starts.push(StartCheck { start: p, kind });
            }
        }
        let starts_agree = (!random_starts.is_empty())
            .then(|| random_starts.iter().all(|c| c.kind == attractor.kind));
        let report = SimulateReport {
            epsilon: params.epsilon,
            mu: params.mu,
            pattern: params.pattern.to_string(),
            attractor,
            seed,
            random_starts,
            starts_agree,
        };
        let json =
            serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
        with_output(Some(path), |w| writeln!(w, "{json}"))?;
    }
    Ok(())
}

fn cmd_equilibria(args: &ModelArgs, file: &FileConfig) -> CliResult<()> {
    let params = model(args, file)?;
    let report = EquilibriumReport::build(&params);
    with_output(args.out.as_deref(), |w| writeln!(w, "{}", report.to_json()))
}

struct CurveSetup {
    pattern: rpsmut::MutationPattern,
    eps: Vec<f64>,
    tol: f64,
}

fn curve_setup(args: &CurveArgs, file: &FileConfig) -> CliResult<CurveSetup> {
    let text = args
        .pattern
        .clone()
        .or(file.pattern.clone())
        .unwrap_or_else(|| "global".into());
    let pattern = parse_pattern(&text)?;
    let tol = args.tol.or(file.tol).unwrap_or(1e-10);
    if !(tol > 0.0 && tol < 1e-2) {
        return Err(CliError::Validation(format!(
            "--tol must lie in (0, 1e-2), got {tol}"
        )));
    }
    let eps = match args.eps {
        Some(e) => vec![e],
        None => {
            let lo = args.eps_min.or(file.eps_min).unwrap_or(0.0);
            let hi = args.eps_max.or(file.eps_max).unwrap_or(2.0);
            let n = args.samples.or(file.samples).unwrap_or(50);
            if !(lo >= 0.0 && hi > lo && hi <= 2.0) {
                return Err(CliError::Validation(format!(
                    "epsilon range must satisfy 0 <= min < max <= 2, got [{lo}, {hi}]"
                )));
            }
            if n == 0 {
                return Err(CliError::Validation("--samples must be positive".into()));
            }
            eps_samples(lo, hi, n)
        }
    };
    if let Some(bad) = eps
        .iter()
        .find(|e| !(e.is_finite() && **e > 0.0 && **e <= 2.0))
    {
        return Err(CliError::Validation(format!(
            "--eps must lie in (0, 2], got {bad}"
        )));
    }
    Ok(CurveSetup { pattern, eps, tol })
}

fn cmd_hopf(args: &CurveArgs, file: &FileConfig) -> CliResult<()> {
    let s = curve_setup(args, file)?;
    if args.eps.is_some() {
        let e = s.eps[0];
        let mu = match hopf_mu_closed_form(e, &s.pattern) {
            Ok(m) if !args.numeric => m,
            _ => hopf_mu_numeric(e, &s.pattern, s.tol)?,
        };
        return with_output(args.out.as_deref(), |w| writeln!(w, "{mu:.16e}"));
    }
    let curve = if args.numeric {
        hopf_curve_numeric(&s.pattern, &s.eps, s.tol)
    } else {
        hopf_curve(&s.pattern, &s.eps, s.tol)
    };
    if curve.samples.is_empty() {
        return Err(CliError::Numeric(
            "no Hopf point found on the requested range".into(),
        ));
    }
    with_output(args.out.as_deref(), |w| write_curves_csv(&[curve], w))
}

fn cmd_transcritical(args: &CurveArgs, file: &FileConfig) -> CliResult<()> {
    let s = curve_setup(args, file)?;
    if args.eps.is_some() {
        let e = s.eps[0];
        let mu = if s.pattern.is_single_yx() && !args.numeric {
            Some(transcritical_mu_model(e))
        } else {
            transcritical_mu_numeric(e, &s.pattern, s.tol)
        };
        return with_output(args.out.as_deref(), |w| match mu {
            Some(m) => writeln!(w, "{m:.16e}"),
            None => writeln!(w, "none"),
        });
    }
    let curve = if args.numeric {
        let samples = s
            .eps
            .iter()
            .filter_map(|&e| transcritical_mu_numeric(e, &s.pattern, s.tol).map(|m| (e, m)))
            .collect::<Vec<_>>();
        (!samples.is_empty()).then_some(BifurcationCurve {
            kind: CurveKind::Transcritical,
            method: Method::Numeric,
            samples,
        })
    } else {
        transcritical_curve(&s.pattern, &s.eps, s.tol)
    };
    let curves: Vec<_> = curve.into_iter().collect();
    with_output(args.out.as_deref(), |w| write_curves_csv(&curves, w))
}

fn cmd_sweep(args: &SweepArgs, file: &FileConfig) -> CliResult<()> {
    let text = args
        .pattern
        .clone()
        .or(file.pattern.clone())
        .unwrap_or_else(|| "global".into());
    let pattern = parse_pattern(&text)?;
    let grid = args
        .grid
        .clone()
        .or(file.grid.clone())
        .unwrap_or_else(|| "40x40".into());
    let (n_eps, n_mu) = parse_grid(&grid).map_err(CliError::Validation)?;
    let mut classify = ClassifyConfig::default();
    if let Some(t) = args.t_transient.or(file.t_transient) {
        classify.t_transient = t;
        classify.t_end =
            t + (ClassifyConfig::default().t_end - ClassifyConfig::default().t_transient);
    }
    if let Some(w) = args.t_window.or(file.t_window) {
        classify.t_end = classify.t_transient + w;
    }
    let cfg = SweepConfig {
        eps_range: (
            args.eps_min.or(file.eps_min).unwrap_or(0.0),
            args.eps_max.or(file.eps_max).unwrap_or(2.0),
        ),
        mu_range: (
            args.mu_min.or(file.mu_min).unwrap_or(0.0),
            args.mu_max.or(file.mu_max).unwrap_or(1.0),
        ),
        n_eps,
        n_mu,
        classify,
        ..SweepConfig::default()
    };
    cfg.validate()?;

    let workers = args.workers.or(file.workers);
    if workers == Some(0) {
        return Err(CliError::Validation("--workers must be positive".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let diagram = pool.install(|| stability_diagram(&pattern, &cfg))?;

    with_output(args.out.as_deref(), |w| diagram.write_csv(w))?;
    if let Some(path) = &args.curves {
        with_output(Some(path), |w| write_curves_csv(&diagram.overlay_curves, w))?;
    }
    if let Some(path) = &args.svg {
        let doc = svg::stability_diagram(&diagram);
        with_output(Some(path), |w| w.write_all(doc.as_bytes()))?;
    }
    let regions: Vec<_> = diagram.regions().iter().map(|k| k.as_str()).collect();
    eprintln!(
        "regions: {} ({}); undetermined cells: {}; inconsistent cells: {}",
        regions.len(),
        regions.join(", "),
        diagram.count(AttractorKind::Undetermined),
        diagram.inconsistent_cells().len()
    );
    Ok(())
}

fn cmd_portrait(args: &PortraitArgs, file: &FileConfig) -> CliResult<()> {
    let params = model(&args.model, file)?;
    let t_end = args.t_end.or(file.t_end).unwrap_or(200.0);
    let starts: Vec<[f64; 3]> = match &args.starts {
        Some(s) => s
            .split(';')
            .filter(|p| !p.trim().is_empty())
            .map(parse_point)
            .collect::<Result<_, _>>()
            .map_err(CliError::Validation)?,
        None => file
            .starts
            .clone()
            .unwrap_or_else(|| DEFAULT_PORTRAIT_STARTS.to_vec()),
    };
    if starts.is_empty() {
        return Err(CliError::Validation("--starts is empty".into()));
    }
    let tol = tolerances(None, None, file);
    let mut trajectories = Vec::with_capacity(starts.len());
    for p in starts {
        trajectories.push(integrate(state(p), &params, t_end, tol)?.states);
    }
    let fps = find_fixed_points(&params);
    let title = format!(
        "pattern {} eps={} mu={}",
        params.pattern, params.epsilon, params.mu
    );
    let doc = svg::phase_portrait(&trajectories, &fps, &title);
    with_output(args.model.out.as_deref(), |w| w.write_all(doc.as_bytes()))
}

fn run(cli: &Cli) -> CliResult<()> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a, &file),
        Command::Equilibria(a) => cmd_equilibria(a, &file),
        Command::Hopf(a) => cmd_hopf(a, &file),
        Command::Transcritical(a) => cmd_transcritical(a, &file),
        Command::Sweep(a) => cmd_sweep(a, &file),
        Command::Portrait(a) => cmd_portrait(a, &file),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = match &e {
                CliError::Validation(m) => format!("invalid input: {m}"),
                CliError::Numeric(m) => format!("numeric failure: {m}"),
                CliError::Io(m) => format!("i/o error: {m}"),
            };
            eprintln!("rpsmut: {msg}");
            ExitCode::from(e.exit_code())
        }
    }
}
