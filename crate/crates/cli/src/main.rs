//! Command-line front end: run algorithms on instance files, generate
//! instances, and compute reference values.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use submatch::baselines::{exact_opt, offline_greedy};
use submatch::harness::{
    generate, parse_instance, run_experiment, write_instance, write_report, Algo, CheckLevel, FamilyKind, Fault,
    FileSource, GenKind, GenSpec, RunConfig, RunReport,
};
use submatch::oracle::total_curvature;
use submatch::{Error, StreamSource, ValueOracle};

const EXIT_RUN_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "submatch", version, about = "Streaming submodular matching and its generalizations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm and emit a report.
    Run(RunArgs),
    /// Exhaustive optimum of a small instance.
    Exact {
        #[arg(long)]
        input: PathBuf,
        /// Refuse instances with more elements than this.
        #[arg(long, default_value_t = submatch::baselines::DEFAULT_EXACT_CAP)]
        cap: usize,
    },
    /// Offline greedy solution.
    Greedy {
        #[arg(long)]
        input: PathBuf,
    },
    /// Write a seeded random instance.
    Gen {
        #[command(flatten)]
        spec: GenArgs,
        /// Output file; stdout when absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Total curvature of an instance's oracle.
    Curvature {
        #[arg(long)]
        input: PathBuf,
    },
    /// Run several algorithms on several instances concurrently.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct Tuning {
    /// Multi-pass mode, e.g. graph_msm or hypergraph_mwm.
    #[arg(long)]
    mode: Option<String>,
    /// Override the default γ.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long)]
    pass_cap: Option<usize>,
    #[arg(long, value_enum, default_value_t = Level::Fast)]
    check_level: Level,
    /// Compute the exact optimum for instances up to this many elements.
    #[arg(long, default_value_t = 20)]
    exact_cap: usize,
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<FaultArg>,
}

impl Tuning {
    fn config(&self, algo: Algo) -> RunConfig {
        RunConfig {
            mode: self.mode.clone(),
            gamma: self.gamma,
            eps: self.eps,
            pass_cap: self.pass_cap,
            check_level: match self.check_level {
                Level::Fast => CheckLevel::Fast,
                Level::Full => CheckLevel::Full,
            },
            exact_cap: self.exact_cap,
            fault: self.inject_fault.map(|f| match f {
                FaultArg::BadAugment => Fault::BadAugment,
                FaultArg::Guard => Fault::Guard,
            }),
            ..RunConfig::new(algo)
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    algo: Algo,
    /// Instance file; without it an instance is generated from the
    /// generator flags.
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    gen: OptGenArgs,
    #[command(flatten)]
    tuning: Tuning,
    /// Report file. Defaults to a file in SUBMATCH_REPORT_DIR when that is
    /// set, otherwise the report goes to stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, env = "SUBMATCH_REPORT_DIR")]
    report_dir: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Instance files.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Algorithms to run on every instance that supports them.
    #[arg(long, value_delimiter = ',', default_value = "multipass")]
    algo: Vec<Algo>,
    #[command(flatten)]
    tuning: Tuning,
    #[arg(long, env = "SUBMATCH_REPORT_DIR")]
    report_dir: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Rank for hypergraph and matroid kinds.
    #[arg(long, default_value_t = 2)]
    p: usize,
    /// Vertices, or parts per matroid.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, value_enum, default_value_t = FamilyArg::Modular)]
    family: FamilyArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl GenArgs {
    fn spec(&self) -> GenSpec {
        GenSpec {
            kind: match self.kind {
                KindArg::Graph => GenKind::Graph,
                KindArg::Hypergraph => GenKind::Hypergraph { p: self.p },
                KindArg::Matroid => GenKind::Matroid { p: self.p },
                KindArg::Bipartite => GenKind::Bipartite,
            },
            n: self.n,
            m: self.m,
            family: match self.family {
                FamilyArg::Modular => FamilyKind::Modular,
                FamilyArg::Coverage => FamilyKind::Coverage,
                FamilyArg::SaturatedAdditive => FamilyKind::SaturatedAdditive,
            },
            seed: self.seed,
        }
    }
}

/// Generator flags for `run`, all optional so `--input` can replace them.
#[derive(Args)]
struct OptGenArgs {
    #[arg(long, value_enum, conflicts_with = "input", requires_all = ["n", "m"])]
    kind: Option<KindArg>,
    #[arg(long, default_value_t = 2)]
    p: usize,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_enum, default_value_t = FamilyArg::Modular)]
    family: FamilyArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl OptGenArgs {
    fn resolve(&self) -> Option<GenArgs> {
        Some(GenArgs {
            kind: self.kind?,
            p: self.p,
            n: self.n?,
            m: self.m?,
            family: self.family,
            seed: self.seed,
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Graph,
    Hypergraph,
    Matroid,
    Bipartite,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Modular,
    Coverage,
    SaturatedAdditive,
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    Fast,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    BadAugment,
    Guard,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_run_failure() { EXIT_RUN_FAILED } else { EXIT_USAGE })
        }
    }
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<(), Error> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Error::Invariant(format!("serialization failed: {e}")))?;
    println!("{s}");
    Ok(())
}

fn dispatch(cmd: Command) -> Result<u8, Error> {
    match cmd {
        Command::Run(args) => run(args),
        Command::Exact { input, cap } => {
            let (inst, oracle) = parse_instance(&input)?;
            print_json(&exact_opt(&inst, &oracle, cap)?)?;
            Ok(0)
        }
        Command::Greedy { input } => {
            let (inst, oracle) = parse_instance(&input)?;
            print_json(&offline_greedy(&inst, &oracle)?)?;
            Ok(0)
        }
        Command::Gen { spec, output } => {
            let g = generate(&spec.spec())?;
            let text = write_instance(&g.instance, &g.family)?;
            match output {
                Some(path) => std::fs::write(&path, text).map_err(|source| Error::Io { path, source })?,
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::Curvature { input } => {
            let (_, oracle) = parse_instance(&input)?;
            println!("{}", total_curvature(&oracle, &oracle.ground_vec())?);
            Ok(0)
        }
        Command::Bench(args) => bench(args),
    }
}

fn report_name(input: &str, algo: Algo) -> String {
    format!("{input}.{algo}.json")
}

fn run(args: RunArgs) -> Result<u8, Error> {
    let config = args.tuning.config(args.algo);
    let (report, stem) = match (&args.input, args.gen.resolve()) {
        (Some(path), _) => {
            let (source, oracle) = FileSource::open(path)?;
            (run_experiment(&source, &oracle, &config)?, file_stem(path))
        }
        (None, Some(gen)) => {
            let g = generate(&gen.spec())?;
            let oracle = ValueOracle::new(g.family, g.instance.ids());
            let stem = format!("generated-{}", gen.seed);
            (run_experiment(&g.instance, &oracle, &config)?, stem)
        }
        (None, None) => {
            return Err(Error::InvalidInput("run needs --input or the generator flags --kind, --n and --m".into()))
        }
    };
    let target = args.report.or_else(|| args.report_dir.map(|d| d.join(report_name(&stem, args.algo))));
    match target {
        Some(path) => {
            write_report(&report, &path)?;
            eprintln!("{}", summary(&stem, &report));
        }
        None => println!("{}", report.to_json()?),
    }
    Ok(report.exit_code() as u8)
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned())
}

fn summary(name: &str, r: &RunReport) -> String {
    let ratio = r.ratio.map_or_else(|| "-".into(), |x| format!("{x:.4}"));
    let bound = r.ratio_bound.map_or_else(|| "-".into(), |x| format!("{x:.4}"));
    format!(
        "{name} {} value={} passes={} ratio={ratio} bound={bound} status={:?}",
        r.algo, r.final_value, r.pass_count, r.status
    )
}

fn bench(args: BenchArgs) -> Result<u8, Error> {
    let mut jobs = Vec::new();
    for path in &args.input {
        let (source, oracle) = FileSource::open(path)?;
        for &algo in &args.algo {
            if algo.supports(source.header().kind) {
                jobs.push((file_stem(path), algo, source.clone(), oracle.fresh()));
            }
        }
    }
    // each worker owns its source and oracle
    let results: Vec<(String, Algo, Result<RunReport, Error>)> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .into_iter()
            .map(|(name, algo, source, oracle)| {
                let config = args.tuning.config(algo);
                let handle = s.spawn(move || run_experiment(&source, &oracle, &config));
                (name, algo, handle)
            })
            .collect();
        handles
            .into_iter()
            .map(|(name, algo, h)| {
                let r = h.join().unwrap_or_else(|_| Err(Error::Invariant("bench worker panicked".into())));
                (name, algo, r)
            })
            .collect()
    });
    let mut code = 0;
    for (name, algo, result) in results {
        match result {
            Ok(report) => {
                if let Some(dir) = &args.report_dir {
                    write_report(&report, &dir.join(report_name(&name, algo)))?;
                }
                println!("{}", summary(&name, &report));
                code = code.max(report.exit_code() as u8);
            }
            Err(e) => {
                println!("{name} {algo} error: {e}");
                code = code.max(if e.is_run_failure() { EXIT_RUN_FAILED } else { EXIT_USAGE });
            }
        }
    }
    Ok(code)
}
