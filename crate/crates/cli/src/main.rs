use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kcenter_lifetimes::harness::{self, Algorithm, QuerySchedule, RunConfig};
use kcenter_lifetimes::io::{matrix_sidecar, read_matrix, read_stream, write_matrix, write_stream};
use kcenter_lifetimes::oracle::DEFAULT_ENUMERATION_CAP;
use kcenter_lifetimes::streamgen::{
    adversarial_quadratic_stream, h_bounded_stream, random_lifetime_stream, sliding_window_random,
    GeneratedStream,
};
use kcenter_lifetimes::{Metric, MetricKind, Payload, Time, TimedPoint};

/// Sliding-window k-center with per-point lifetimes.
#[derive(Debug, Parser)]
#[command(name = "kcenter", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic stream as JSON lines.
    Gen {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay a stream and report every query.
    Run(RunArgs),
    /// Replay a stream, auditing every invariant against an exact oracle.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        /// Largest active set the exact oracle may enumerate.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        oracle_cap: usize,
    },
    /// Count work on streams of growing size.
    Bench {
        #[command(flatten)]
        gen: GenArgs,
        #[command(flatten)]
        algo: AlgoArgs,
        /// Stream sizes; for `adversarial` each size is the `--n` of one stream.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Sliding,
    Random,
    Hbounded,
    Adversarial,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// H-order of an `hbounded` stream.
    #[arg(long, default_value_t = 0)]
    h: usize,
    /// Lifetime of every point in a `sliding` stream.
    #[arg(long, default_value_t = 10)]
    window: Time,
    /// Scale of the `adversarial` stream.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Longest lifetime in a `random` stream.
    #[arg(long, default_value_t = 20)]
    max_life: Time,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Algo {
    Two,
    Six,
}

#[derive(Debug, Args)]
struct AlgoArgs {
    #[arg(long, value_enum)]
    algo: Algo,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long)]
    no_reclustering: bool,
    #[arg(long)]
    parallel: bool,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("bounds").required(true).args(["dmin", "prescan", "single_guess"]))]
struct RunArgs {
    #[command(flatten)]
    algo: AlgoArgs,
    #[arg(long, requires = "dmax")]
    dmin: Option<f64>,
    #[arg(long, requires = "dmin")]
    dmax: Option<f64>,
    /// Take the distance bounds from the stream itself.
    #[arg(long)]
    prescan: bool,
    /// Run one guess at this radius instead of a ladder.
    #[arg(long = "gamma", id = "single_guess", value_name = "GAMMA")]
    single_guess: Option<f64>,
    #[arg(long)]
    stream: PathBuf,
    /// `euclidean` or `matrix:PATH`; by default coordinates imply
    /// `euclidean` and otherwise `<stream>.matrix.csv` is read.
    #[arg(long)]
    metric: Option<String>,
    /// `every`, `end` or `at:t1,t2,...`.
    #[arg(long, default_value = "every", value_parser = parse_schedule)]
    queries: QuerySchedule,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn parse_schedule(s: &str) -> Result<QuerySchedule, String> {
    match s {
        "every" => Ok(QuerySchedule::EveryUpdate),
        "end" => Ok(QuerySchedule::AtEnd),
        _ => {
            let times = s
                .strip_prefix("at:")
                .ok_or_else(|| format!("expected every, end or at:t1,t2,..., got {s:?}"))?;
            times
                .split(',')
                .map(|t| t.trim().parse::<Time>().map_err(|e| format!("{t:?}: {e}")))
                .collect::<Result<Vec<_>, _>>()
                .map(QuerySchedule::AtTimes)
        }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Error(kcenter_lifetimes::Error),
    Verification,
}

impl From<kcenter_lifetimes::Error> for Failure {
    fn from(e: kcenter_lifetimes::Error) -> Self {
        Failure::Error(e)
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Gen { gen, n, out } => gen_command(&gen, n, &out),
        Command::Run(args) => run_command(&args),
        Command::Verify { run, oracle_cap } => verify_command(&run, oracle_cap),
        Command::Bench {
            gen,
            algo,
            sizes,
            report,
        } => bench_command(&gen, &algo, &sizes, report.as_deref()),
    };
    ExitCode::from(exit_code(&outcome))
}

fn exit_code(outcome: &Outcome) -> u8 {
    match outcome {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            1
        }
        Err(Failure::Verification) => 2,
    }
}

fn generate(gen: &GenArgs, n: usize) -> kcenter_lifetimes::Result<GeneratedStream> {
    match gen.kind {
        Kind::Sliding => sliding_window_random(n, gen.dim, gen.window, gen.seed),
        Kind::Random => random_lifetime_stream(n, gen.dim, gen.max_life, gen.seed),
        Kind::Hbounded => h_bounded_stream(n, gen.h, gen.dim, gen.seed),
        Kind::Adversarial => adversarial_quadratic_stream(n, gen.gamma),
    }
}

fn gen_command(gen: &GenArgs, n: usize, out: &Path) -> Outcome {
    let g = generate(gen, n)?;
    write_stream(out, &g.stream.points)?;
    if let MetricKind::Matrix(table) = g.metric.kind() {
        let sidecar = matrix_sidecar(out);
        write_matrix(&sidecar, table)?;
        println!("matrix: {}", sidecar.display());
    }
    println!(
        "wrote {} points to {} (d_min {}, d_max {})",
        g.stream.len(),
        out.display(),
        g.stream.d_min,
        g.stream.d_max
    );
    Ok(())
}

fn resolve_metric(choice: Option<&str>, stream: &Path, points: &[TimedPoint]) -> Result<Metric, Failure> {
    let euclidean = || {
        let dim = match points.first().map(|p| &p.payload) {
            Some(Payload::Coords(c)) => c.len(),
            Some(Payload::Index(_)) => {
                return Err(Failure::Usage(format!(
                    "{} has no coordinates; pass --metric matrix:PATH",
                    stream.display()
                )))
            }
            None => 1,
        };
        Ok(Metric::euclidean(dim))
    };
    match choice {
        Some("euclidean") => euclidean(),
        Some(s) => match s.strip_prefix("matrix:") {
            Some(path) => Ok(read_matrix(path)?),
            None => Err(Failure::Usage(format!(
                "--metric expects euclidean or matrix:PATH, got {s:?}"
            ))),
        },
        None => match points.first().map(|p| &p.payload) {
            Some(Payload::Index(_)) => Ok(read_matrix(matrix_sidecar(stream))?),
            _ => euclidean(),
        },
    }
}

fn algo_config(a: &AlgoArgs) -> RunConfig {
    let algorithm = match a.algo {
        Algo::Two => Algorithm::Two,
        Algo::Six => Algorithm::Six,
    };
    let mut config = RunConfig::new(algorithm, a.k, a.epsilon);
    config.reclustering = !a.no_reclustering;
    config.parallel = a.parallel;
    config
}

fn prepare(args: &RunArgs) -> Result<(RunConfig, Vec<TimedPoint>, Metric), Failure> {
    let mut config = algo_config(&args.algo);
    config.bounds = args.dmin.zip(args.dmax);
    config.single_guess = args.single_guess;
    config.schedule = args.queries.clone();
    let points = read_stream(&args.stream)?;
    let metric = resolve_metric(args.metric.as_deref(), &args.stream, &points)?;
    Ok((config, points, metric))
}

fn write_report(path: Option<&Path>, csv: &str) -> Outcome {
    match path {
        Some(p) => fs::write(p, csv).map_err(|e| {
            Failure::Error(kcenter_lifetimes::Error::Io {
                path: p.display().to_string(),
                message: e.to_string(),
            })
        }),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn run_command(args: &RunArgs) -> Outcome {
    let (config, points, metric) = prepare(args)?;
    let report = harness::run(&config, points, metric)?;
    write_report(args.report.as_deref(), &report.to_csv())?;
    eprintln!(
        "{} points, {} guesses, {} queries, {} distance evaluations",
        report.points,
        report.guesses,
        report.rows.len(),
        report.distance_evals
    );
    Ok(())
}

fn verify_command(args: &RunArgs, oracle_cap: usize) -> Outcome {
    let (mut config, points, metric) = prepare(args)?;
    config.oracle_cap = oracle_cap;
    let report = harness::verify(&config, points, metric)?;
    if let Some(path) = &args.report {
        write_report(Some(path), &report.run.to_csv())?;
    }
    print!("{}", report.summary());
    if let Some(ratio) = report.run.max_ratio() {
        println!("worst ratio {ratio:.4}");
    }
    if report.ok() {
        Ok(())
    } else {
        if let Some(dump) = &report.state_dump {
            eprintln!("{dump}");
        }
        Err(Failure::Verification)
    }
}

fn bench_command(gen: &GenArgs, algo: &AlgoArgs, sizes: &[usize], report: Option<&Path>) -> Outcome {
    if sizes.is_empty() {
        return Err(Failure::Usage("--sizes needs at least one size".into()));
    }
    let mut config = algo_config(algo);
    let result = match gen.kind {
        Kind::Adversarial => {
            config.single_guess = Some(gen.gamma);
            let streams = sizes
                .iter()
                .map(|&n| generate(gen, n).map(|g| (g.stream.points, g.metric)))
                .collect::<kcenter_lifetimes::Result<Vec<_>>>()?;
            harness::bench(&config, streams)?
        }
        _ => {
            let largest = *sizes.iter().max().expect("non-empty");
            let g = generate(gen, largest)?;
            harness::bench_prefixes(&config, &g, sizes)?
        }
    };
    write_report(report, &result.to_csv())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules() {
        assert_eq!(parse_schedule("every").unwrap(), QuerySchedule::EveryUpdate);
        assert_eq!(parse_schedule("end").unwrap(), QuerySchedule::AtEnd);
        assert_eq!(parse_schedule("at:3, 9").unwrap(), QuerySchedule::AtTimes(vec![3, 9]));
        assert!(parse_schedule("at:x").is_err());
        assert!(parse_schedule("sometimes").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Ok(())), 0);
        assert_eq!(exit_code(&Err(Failure::Usage("bad".into()))), 1);
        assert_eq!(exit_code(&Err(kcenter_lifetimes::Error::InvalidK.into())), 1);
        assert_eq!(exit_code(&Err(Failure::Verification)), 2);
    }

    #[test]
    fn command_line_shape() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
