//! The `hessma` command line. Exit codes: 0 success, 1 input error,
//! 2 convergence failure, 3 quality check failed.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hessma_core::gconvex::{
    check_gconvex, mollify_global, regularize_charts, MollifierSpec, RegularizationConfig,
};
use hessma_core::ma_measure::{ma_atomic, ma_oracle_smooth, SlopeOracleConfig};
use hessma_core::solver::{quantize_measure, solve_flat, solve_twisted_from, FlatPathConfig};
use hessma_core::{GridFunction, Partition, PartitionMeasure, PeriodicFunction, SolveConfig};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::io::{self, FunctionInput};
use crate::manifest::RunManifest;
use crate::parallel::{init_threads, slopes_parallel};
use crate::svg;
use crate::verify::{self, Suite, VerifyOptions};

#[derive(Parser, Debug)]
#[command(name = "hessma", version, about = "Degenerate Monge-Ampère equations on flat tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve M[u] = e^{εu} μ for an atomic μ.
    SolveTwisted(SolveArgs),
    /// Solve M[u] = c μ through a decreasing exponent schedule.
    SolveFlat(FlatArgs),
    /// Monge-Ampère measure of a function by one of the three oracles.
    Measure(MeasureArgs),
    /// Run the verification suites.
    Verify(VerifyArgs),
    /// Regularize a g-convex function.
    Regularize(RegularizeArgs),
    /// Quantize a density or point samples to atoms on a regular grid.
    Quantize(QuantizeArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Damped,
    Newton,
}

#[derive(Args, Debug)]
struct SolverFlags {
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    truncation: Option<usize>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Resolution of samples.csv (default 512 in 1D, 64 in 2D).
    #[arg(long)]
    grid: Option<usize>,
    /// Also write an SVG rendering.
    #[arg(long)]
    svg: bool,
}

impl SolverFlags {
    fn apply(&self, cfg: SolveConfig) -> SolveConfig {
        let dto = io::ConfigDto {
            tol: self.tol,
            tau: self.tau,
            max_iter: self.max_iter,
            truncation: self.truncation,
            liftoff_step: None,
            method: self.method.map(|m| match m {
                MethodArg::Damped => io::MethodDto::Damped,
                MethodArg::Newton => io::MethodDto::Newton,
            }),
        };
        dto.apply(cfg)
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long)]
    epsilon_exp: Option<f64>,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args, Debug)]
struct FlatArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long)]
    eps_min: Option<f64>,
    #[arg(long)]
    schedule_ratio: Option<f64>,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OracleArg {
    Exact,
    Slopes,
    Smooth,
}

#[derive(Args, Debug)]
struct MeasureArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    oracle: OracleArg,
    /// Bins per axis of the output partition.
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long, default_value_t = verify::DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = verify::DEFAULT_SEED)]
    seed: u64,
    /// Search grid of the slope oracle or sampling grid of the smooth oracle.
    #[arg(long)]
    grid: Option<usize>,
    /// Mollification radius of the smooth oracle.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    svg: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DimArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    All,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: Suite,
    #[arg(long, default_value_t = verify::DEFAULT_SEED)]
    seed: u64,
    /// Slope samples per oracle run.
    #[arg(long, default_value_t = verify::DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, value_enum, default_value = "all")]
    dim: DimArg,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RegMethodArg {
    Global,
    Charts,
}

#[derive(Args, Debug)]
struct RegularizeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long)]
    eps: f64,
    #[arg(long, value_enum, default_value = "charts")]
    method: RegMethodArg,
    /// Output resolution (default 1024 in 1D, 96 in 2D).
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    svg: bool,
}

#[derive(Args, Debug)]
struct QuantizeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Number of atoms (a perfect power of the dimension).
    #[arg(long)]
    atoms: usize,
}

/// Flags as given on the command line, for the manifest.
fn overrides(args: &[String]) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let mut i = 0;
    while i < args.len() {
        if let Some(flag) = args[i].strip_prefix("--") {
            if let Some((k, v)) = flag.split_once('=') {
                out.insert(k.to_string(), v.to_string());
            } else if i + 1 < args.len() && !args[i + 1].starts_with("--") {
                out.insert(flag.to_string(), args[i + 1].clone());
                i += 1;
            } else {
                out.insert(flag.to_string(), "true".to_string());
            }
        }
        i += 1;
    }
    out.retain(|k, _| k != "input" && k != "out-dir" && k != "seed");
    out
}

/// Parse arguments, run the command and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_threads();
    let raw: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let started = Instant::now();
    let (name, input, seed, out_dir) = match &cli.command {
        Command::SolveTwisted(a) => ("solve-twisted", Some(&a.input), None, &a.out_dir),
        Command::SolveFlat(a) => ("solve-flat", Some(&a.input), None, &a.out_dir),
        Command::Measure(a) => ("measure", Some(&a.input), Some(a.seed), &a.out_dir),
        Command::Verify(a) => ("verify", None, Some(a.seed), &a.out_dir),
        Command::Regularize(a) => ("regularize", Some(&a.input), None, &a.out_dir),
        Command::Quantize(a) => ("quantize", Some(&a.input), None, &a.out_dir),
    };
    if let Err(e) = fs::create_dir_all(out_dir) {
        eprintln!("input error: cannot create {}: {e}", out_dir.display());
        return 1;
    }
    let mut manifest = RunManifest::new(name, input.map(PathBuf::as_path), overrides(&raw), seed, out_dir);
    let result = match &cli.command {
        Command::SolveTwisted(a) => solve_twisted_cmd(a),
        Command::SolveFlat(a) => solve_flat_cmd(a),
        Command::Measure(a) => measure_cmd(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Regularize(a) => regularize_cmd(a),
        Command::Quantize(a) => quantize_cmd(a),
    };
    if let Err(e) = manifest.write(out_dir, started.elapsed()) {
        eprintln!("{e}");
        return 1;
    }
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn default_grid(dim: usize) -> usize {
    if dim == 1 {
        512
    } else {
        64
    }
}

fn write_samples<F: PeriodicFunction + ?Sized>(out: &Path, u: &F, m: usize) -> CliResult<GridFunction> {
    let g = GridFunction::sample(u, m)?;
    io::write_grid_csv(&out.join("samples.csv"), &g)?;
    Ok(g)
}

fn write_svg(out: &Path, contents: String) -> CliResult<()> {
    fs::write(out.join("plot.svg"), contents)?;
    Ok(())
}

fn solve_twisted_cmd(a: &SolveArgs) -> CliResult<()> {
    let problem: io::ProblemFile = io::read_json(&a.input)?;
    let mu = problem.measure()?;
    let rho = problem.density()?;
    let eps = a.epsilon_exp.or(problem.epsilon_exp).unwrap_or(1.0);
    let cfg = a.solver.apply(problem.config.clone().unwrap_or_default().apply(SolveConfig::default()));
    let (f, report) = solve_twisted_from(&mu, &rho, eps, &cfg, None)?;
    let out = &a.out_dir;
    io::write_json(&out.join("solution.json"), &io::SolutionFile::new(&f, &report))?;
    let hull = f.hull()?;
    let samples = write_samples(out, &hull, a.solver.grid.unwrap_or(default_grid(f.dim())))?;
    if a.solver.svg {
        write_svg(out, if f.dim() == 1 { svg::graph_svg(&samples) } else { svg::cells_svg(hull.cells()) })?;
    }
    println!(
        "solve-twisted: {} atoms, {} iterations, max residual {:.3e}",
        mu.len(),
        report.iterations,
        report.max_residual()
    );
    report.check()?;
    Ok(())
}

fn solve_flat_cmd(a: &FlatArgs) -> CliResult<()> {
    let problem: io::ProblemFile = io::read_json(&a.input)?;
    let mu = problem.measure()?;
    let rho = problem.density()?;
    let mut path = match (&problem.schedule, a.eps_min, a.schedule_ratio) {
        (Some(io::ScheduleDto::Explicit { values }), None, None) => {
            let mut p = FlatPathConfig::geometric(0.5, 1e-3)?;
            p.schedule = values.clone();
            p
        }
        (s, eps_min, ratio) => {
            let (r0, e0) = match s {
                Some(io::ScheduleDto::Geometric { ratio, eps_min }) => (*ratio, *eps_min),
                _ => (0.5, 1e-3),
            };
            FlatPathConfig::geometric(ratio.unwrap_or(r0), eps_min.unwrap_or(e0))?
        }
    };
    path.step = a.solver.apply(problem.config.clone().unwrap_or_default().apply(path.step));
    if let Some(t) = problem.spread_threshold {
        path.spread_threshold = t;
    }
    let report = solve_flat(&mu, &rho, &path)?;
    let out = &a.out_dir;
    io::write_json(&out.join("flat_report.json"), &io::FlatReportFile::new(&report, path.spread_threshold, "samples.csv"))?;
    let hull = report.solution.hull()?;
    let samples = write_samples(out, &hull, a.solver.grid.unwrap_or(default_grid(mu.dim())))?;
    if a.solver.svg {
        write_svg(out, if mu.dim() == 1 { svg::graph_svg(&samples) } else { svg::cells_svg(hull.cells()) })?;
    }
    println!("solve-flat: c = {:.9}, spread {:.3e}, {} steps", report.c, report.spread, report.steps.len());
    if !report.converged {
        return Err(CliError::Convergence("a step of the exponent schedule did not converge".into()));
    }
    if !report.spread_ok {
        return Err(CliError::Quality(format!(
            "spread of the per-atom estimates {:.3e} exceeds {:.3e}",
            report.spread, path.spread_threshold
        )));
    }
    Ok(())
}

fn measure_cmd(a: &MeasureArgs) -> CliResult<()> {
    let (input, rho) = io::read_function(&a.input)?;
    let dim = input.dim();
    let out = &a.out_dir;
    let partition = |default: usize| Partition::uniform(dim, a.bins.unwrap_or(default));
    let binned = |oracle: &str, pm: &PartitionMeasure, samples, seed, delta, grid| -> CliResult<()> {
        io::write_partition_csv(&out.join("partition.csv"), &io::partition_rows(pm))?;
        io::write_json(
            &out.join("masses.json"),
            &io::BinnedMassesFile {
                oracle: oracle.into(),
                dim,
                bins: pm.partition.bins_per_axis(),
                offset: pm.partition.offset(),
                samples,
                seed,
                delta,
                grid,
                masses: pm.masses.clone(),
                stderr: pm.stderr.clone(),
                total: pm.total(),
            },
        )
    };
    match (a.oracle, &input) {
        (OracleArg::Exact, FunctionInput::Grid(_)) => {
            return Err(CliError::input("the exact oracle needs an envelope function (JSON input)"));
        }
        (OracleArg::Exact, FunctionInput::Envelope(f)) => {
            let r = ma_atomic(f, &rho)?;
            io::write_json(
                &out.join("masses.json"),
                &io::ExactMassesFile {
                    oracle: "exact".into(),
                    sites: r.sites.iter().map(|p| p.coords().to_vec()).collect(),
                    masses: r.masses.clone(),
                    volumes: r.volumes.clone(),
                    total: r.total,
                    truncation: r.truncation,
                },
            )?;
            if let Some(b) = a.bins {
                let p = Partition::uniform(dim, b)?;
                let pm = PartitionMeasure::exact(p.clone(), p.bin_atoms(&r.sites, &r.masses));
                io::write_partition_csv(&out.join("partition.csv"), &io::partition_rows(&pm))?;
            }
            println!("measure: exact masses {:?}, total {:.12}", r.masses, r.total);
        }
        (OracleArg::Slopes, _) => {
            let mut cfg = SlopeOracleConfig::new(a.samples, a.seed, dim);
            if let Some(g) = a.grid {
                cfg.grid = g;
            }
            let p = partition(4)?;
            let pm = match &input {
                FunctionInput::Envelope(f) => slopes_parallel(&f.hull()?, &p, &cfg)?,
                FunctionInput::Grid(g) => slopes_parallel(g, &p, &cfg)?,
            }
            .weighted_by(&rho);
            binned("slopes", &pm, Some(a.samples), Some(a.seed), None, cfg.grid)?;
            println!("measure: slope masses {:?}", pm.masses);
        }
        (OracleArg::Smooth, _) => {
            let grid = a.grid.unwrap_or(if dim == 1 { 1024 } else { 256 });
            let g = match &input {
                FunctionInput::Envelope(f) => GridFunction::sample(&f.hull()?, grid)?,
                FunctionInput::Grid(g) => g.clone(),
            };
            let delta = a.delta.unwrap_or(if dim == 1 { 0.02 } else { 0.05 });
            let pm = ma_oracle_smooth(&g, delta, &partition(4)?, &rho)?;
            binned("smooth", &pm, None, None, Some(delta), g.resolution())?;
            println!("measure: smooth masses {:?}", pm.masses);
        }
    }
    if a.svg {
        match &input {
            FunctionInput::Envelope(f) if dim == 2 => write_svg(out, svg::cells_svg(f.hull()?.cells()))?,
            FunctionInput::Envelope(f) => write_svg(out, svg::graph_svg(&GridFunction::sample(&f.hull()?, 512)?))?,
            FunctionInput::Grid(g) if dim == 1 => write_svg(out, svg::graph_svg(g))?,
            FunctionInput::Grid(_) => return Err(CliError::input("2D cell diagrams need an envelope function")),
        }
    }
    Ok(())
}

fn verify_cmd(a: &VerifyArgs) -> CliResult<()> {
    let dims = match a.dim {
        DimArg::One => vec![1],
        DimArg::Two => vec![2],
        DimArg::All => vec![1, 2],
    };
    if a.samples == 0 {
        return Err(CliError::input("--samples must be positive"));
    }
    let report = verify::run(a.suite, &VerifyOptions { seed: a.seed, dims, samples: a.samples });
    io::write_json(&a.out_dir.join("verify_report.json"), &report)?;
    for p in &report.properties {
        println!(
            "{} {}/{} dim {}: {}/{} cases, margin {:.3e} ({:.2} s)",
            if p.pass { "PASS" } else { "FAIL" },
            p.suite,
            p.name,
            p.dim,
            p.passed,
            p.cases,
            p.margin,
            p.seconds
        );
    }
    if report.pass {
        Ok(())
    } else {
        let failed: Vec<String> =
            report.properties.iter().filter(|p| !p.pass).map(|p| format!("{}/{} (dim {})", p.suite, p.name, p.dim)).collect();
        Err(CliError::Quality(format!("failed properties: {}", failed.join(", "))))
    }
}

#[derive(Serialize)]
struct RegularizeReportFile {
    method: String,
    eps: f64,
    resolution: usize,
    /// `max |u_ε - u|` over the output nodes.
    sup_error: f64,
    /// `sup_error / eps`.
    constant: f64,
    gconvex_worst: f64,
    gluing_eps: Option<f64>,
    discrepancy: Option<f64>,
    b: Option<f64>,
    c2: Option<f64>,
    c_cut: Option<f64>,
    lambda: Option<f64>,
}

fn regularize_cmd(a: &RegularizeArgs) -> CliResult<()> {
    let (input, _) = io::read_function(&a.input)?;
    let dim = input.dim();
    let mut cfg = RegularizationConfig::default_for(dim)?;
    if let Some(g) = a.grid {
        cfg.resolution = g;
    }
    let hull = match &input {
        FunctionInput::Envelope(f) => Some(f.hull()?),
        FunctionInput::Grid(_) => None,
    };
    let u: &dyn PeriodicFunction = match (&hull, &input) {
        (Some(h), _) => h,
        (None, FunctionInput::Grid(g)) => g,
        (None, FunctionInput::Envelope(_)) => unreachable!(),
    };
    let (out, rep) = match a.method {
        RegMethodArg::Charts => {
            let (g, r) = regularize_charts(u, a.eps, &cfg)?;
            (g, Some(r))
        }
        RegMethodArg::Global => {
            let base = match &input {
                FunctionInput::Grid(g) if a.grid.is_none() => g.clone(),
                _ => GridFunction::sample(u, cfg.resolution)?,
            };
            (mollify_global(&base, &MollifierSpec::new(a.eps)?)?, None)
        }
    };
    let sup_error = (0..out.values().len()).map(|i| (out.values()[i] - u.eval(&out.node(i))).abs()).fold(0.0, f64::max);
    let check = check_gconvex(&out, 1e-6);
    let report = RegularizeReportFile {
        method: format!("{:?}", a.method).to_lowercase(),
        eps: a.eps,
        resolution: out.resolution(),
        sup_error,
        constant: sup_error / a.eps,
        gconvex_worst: check.worst,
        gluing_eps: rep.as_ref().map(|r| r.gluing_eps),
        discrepancy: rep.as_ref().map(|r| r.discrepancy),
        b: rep.as_ref().map(|r| r.b),
        c2: rep.as_ref().map(|r| r.c2),
        c_cut: rep.as_ref().map(|r| r.c_cut),
        lambda: rep.as_ref().map(|r| r.lambda),
    };
    io::write_json(&a.out_dir.join("regularize_report.json"), &report)?;
    io::write_grid_csv(&a.out_dir.join("samples.csv"), &out)?;
    if a.svg && dim == 1 {
        write_svg(&a.out_dir, svg::graph_svg(&out))?;
    }
    println!("regularize: sup error {sup_error:.3e} = {:.3} eps", sup_error / a.eps);
    if !check.pass {
        return Err(hessma_core::Error::PostCheckFailed { worst: check.worst }.into());
    }
    Ok(())
}

fn quantize_cmd(a: &QuantizeArgs) -> CliResult<()> {
    let spec: io::DensitySpecFile = io::read_json(&a.input)?;
    let mu = quantize_measure(&spec.to_spec()?, spec.dim, a.atoms)?;
    io::write_json(&a.out_dir.join("measure.json"), &io::MeasureFile::new(&mu))?;
    println!("quantize: {} atoms", mu.len());
    Ok(())
}
