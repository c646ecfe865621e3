use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fpddp::bench::{
    performance_profile, read_records, run_single, run_sweep, write_iterate_log, write_profile,
    write_records, FileConfig, Metric, RunConfig, RunRecord, SolverKind, SweepConfig,
};
use fpddp::problems::{ProblemId, ProblemParams};
use fpddp::Error;

/// Feasible trajectory generation for the bundled benchmark problems.
#[derive(Parser)]
#[command(name = "fpddp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem instance.
    Solve(SolveArgs),
    /// Solve the cart pendulum over a range of obstacle positions.
    Sweep(SweepArgs),
    /// Turn sweep records into performance profiles.
    Profile(ProfileArgs),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Problem name: chen_allgoewer or cart_pendulum.
    #[arg(long)]
    problem: Option<String>,
    /// Penalty weight for dms.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    /// fpddp, dss, dms or dms:<sigma>.
    #[arg(long)]
    solver: Option<String>,
    /// Obstacle position for the cart pendulum.
    #[arg(long)]
    obstacle: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Solvers to run, repeatable: fpddp, dss, dms or dms:<sigma>.
    #[arg(long)]
    solver: Vec<String>,
    #[arg(long)]
    sweep_lo: Option<f64>,
    #[arg(long)]
    sweep_hi: Option<f64>,
    #[arg(long)]
    sweep_n: Option<usize>,
    /// Worker threads, defaults to the number of logical cores.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct ProfileArgs {
    /// Records file written by `sweep`.
    #[arg(long)]
    input: PathBuf,
    /// walltime or hessian_evals.
    #[arg(long, default_value = "hessian_evals")]
    metric: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

enum Failure {
    Config(Error),
    Solver,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Profile(args) => cmd_profile(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Solver) => ExitCode::from(1),
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load_config(common: &Common) -> Result<FileConfig, Error> {
    match &common.config {
        Some(path) => FileConfig::load(path),
        None => Ok(FileConfig::default()),
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Error> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn cmd_solve(args: SolveArgs) -> Result<(), Failure> {
    let mut file = load_config(&args.common)?;
    if let Some(m) = args.common.max_iter {
        file.solver.max_iter = Some(m);
    }
    let problem: ProblemId = args
        .common
        .problem
        .as_deref()
        .or(file.problem.name.as_deref())
        .unwrap_or("chen_allgoewer")
        .parse()?;
    let sigma = args.common.sigma.or(file.solver.sigma);
    let solver = SolverKind::from_arg(
        args.solver
            .as_deref()
            .or(file.solver.name.as_deref())
            .unwrap_or("fpddp"),
        sigma,
    )?;
    let config = RunConfig {
        problem,
        params: ProblemParams {
            obstacle: args.obstacle.or(file.problem.obstacle),
        },
        solver,
        settings: file.settings()?,
    };
    let (record, result) = run_single(&config)?;
    write_records(
        create(&args.common.out, "record.csv")?,
        std::slice::from_ref(&record),
    )?;
    if let Some(result) = &result {
        write_iterate_log(create(&args.common.out, "iterations.csv")?, &result.log)?;
    }
    print_record(&record);
    if record.status.solved() {
        Ok(())
    } else {
        Err(Failure::Solver)
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let mut file = load_config(&args.common)?;
    if let Some(m) = args.common.max_iter {
        file.solver.max_iter = Some(m);
    }
    let problem: ProblemId = args
        .common
        .problem
        .as_deref()
        .or(file.problem.name.as_deref())
        .unwrap_or("cart_pendulum")
        .parse()?;
    let sigma = args.common.sigma.or(file.solver.sigma);
    let names = if !args.solver.is_empty() {
        args.solver.clone()
    } else if let Some(list) = &file.sweep.solvers {
        list.clone()
    } else {
        vec!["fpddp".to_string()]
    };
    let solvers = names
        .iter()
        .map(|s| SolverKind::from_arg(s, sigma))
        .collect::<Result<Vec<_>, _>>()?;
    let config = SweepConfig {
        problem,
        solvers,
        lo: args.sweep_lo.or(file.sweep.lo).unwrap_or(0.7),
        hi: args.sweep_hi.or(file.sweep.hi).unwrap_or(4.3),
        n: args.sweep_n.or(file.sweep.n).unwrap_or(100),
        settings: file.settings()?,
        jobs: args.jobs.or(file.sweep.jobs),
    };
    let records = run_sweep(&config)?;
    write_records(create(&args.common.out, "records.csv")?, &records)?;
    let solved = records.iter().filter(|r| r.status.solved()).count();
    println!(
        "{solved}/{} runs solved (wall times are single measurements)",
        records.len()
    );
    if solved == records.len() {
        Ok(())
    } else {
        Err(Failure::Solver)
    }
}

fn cmd_profile(args: ProfileArgs) -> Result<(), Failure> {
    let metric: Metric = args.metric.parse()?;
    let file = File::open(&args.input).map_err(Error::from)?;
    let records = read_records(BufReader::new(file))?;
    let profile = performance_profile(&records, metric)?;
    write_profile(
        create(&args.out, &format!("profile_{metric}.csv"))?,
        &profile,
    )?;
    write_profile(io::stdout().lock(), &profile)?;
    for e in &profile.excluded {
        eprintln!("warning: excluded {e}, no solver solved it");
    }
    Ok(())
}

fn print_record(r: &RunRecord) {
    println!(
        "{} on {}: {} after {} iterations ({} Hessian evaluations), f = {:.3e}, kkt = {:.3e}, defect = {:.3e}, {:.3} s",
        r.solver_label(),
        r.instance_label(),
        r.status,
        r.iterations,
        r.hessian_evals,
        r.objective,
        r.kkt,
        r.defect,
        r.wall_time
    );
}
