use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gswseg::evaluation::{lambda_sweep, prior_simulate, LambdaSweepConfig, PriorSimConfig};
use gswseg::io::ingest::{ingest_superpixels, DEFAULT_BINS};
use gswseg::io::{
    load_problem, read_labels, render_labels, synthesize, write_labels, write_trace_csv,
    ProblemFile, SyntheticSpec,
};
use gswseg::oracle::exact_posterior;
use gswseg::sampler::{
    run_chain, step, ChainConfig, ChainState, DeltaRule, Distance, Init, Kernel, ScanOrder,
};
use gswseg::{rand_index, Error, Likelihood, Model, PartitionPrior, SiteGraph};

#[derive(Parser)]
#[command(
    name = "gswseg",
    version,
    about = "Bayesian image segmentation with Potts-partition priors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run MCMC chains on a problem file.
    Segment(SegmentArgs),
    /// Simulate the number of clusters under the prior on a lattice.
    SimulatePrior(SimulateArgs),
    /// Compare long-run chain frequencies with exact enumeration (<= 12 sites).
    OracleCheck(OracleArgs),
    /// Best log posterior reached for each lambda, relative to single-site Gibbs.
    LambdaSweep(SweepArgs),
    /// Write a synthetic lattice problem with a planted segmentation.
    Synth(SynthArgs),
    /// Build a problem from an image and a super-pixel label raster.
    Ingest(IngestArgs),
    /// Rand index between two label files.
    RandIndex { a: PathBuf, b: PathBuf },
    /// Render a label file over a problem's pixel footprint.
    Render {
        problem: PathBuf,
        labels: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PriorKind {
    Dp,
    Fd,
    Maxk,
    Pd,
    Tdp,
}

#[derive(Args, Clone)]
struct PriorArgs {
    #[arg(long, value_enum, default_value = "dp")]
    prior: PriorKind,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Discount of the Poisson-Dirichlet prior.
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Minimum cluster size of the truncated prior.
    #[arg(long, default_value_t = 1)]
    tmin: usize,
    /// Maximum number of clusters (fd, maxk).
    #[arg(long = "K", default_value_t = 10)]
    k: usize,
}

impl PriorArgs {
    fn prior(&self) -> PartitionPrior {
        match self.prior {
            PriorKind::Dp => PartitionPrior::DirichletProcess { alpha: self.alpha },
            PriorKind::Fd => PartitionPrior::FiniteDirichlet {
                k: self.k,
                alpha: self.alpha,
            },
            PriorKind::Maxk => PartitionPrior::MaxK { k: self.k },
            PriorKind::Pd => PartitionPrior::PoissonDirichlet {
                alpha: self.alpha,
                theta: self.theta,
            },
            PriorKind::Tdp => PartitionPrior::TruncatedDp {
                alpha: self.alpha,
                t_min: self.tmin,
            },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleKind {
    Constant,
    Data,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistanceKind {
    Tv,
    Hellinger,
}

#[derive(Args, Clone)]
struct RuleArgs {
    #[arg(long, default_value_t = 10.0)]
    lambda: f64,
    #[arg(long, value_enum, default_value = "constant")]
    delta_rule: RuleKind,
    /// Decay of the data-dependent rule.
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, value_enum, default_value = "tv")]
    distance: DistanceKind,
}

impl RuleArgs {
    fn rule(&self) -> DeltaRule {
        match self.delta_rule {
            RuleKind::Constant => DeltaRule::Constant(self.lambda),
            RuleKind::Data => DeltaRule::DataDependent {
                lambda: self.lambda,
                tau: self.tau,
                distance: match self.distance {
                    DistanceKind::Tv => Distance::TotalVariation,
                    DistanceKind::Hellinger => Distance::Hellinger,
                },
            },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum InitKind {
    Auto,
    Singletons,
    Single,
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[command(flatten)]
    prior: PriorArgs,
    /// Replace every edge weight with this value.
    #[arg(long)]
    beta: Option<f64>,
    /// Base-measure scale: pi = phi * mean normalized histogram.
    #[arg(long, default_value_t = 50.0)]
    phi: f64,
}

impl ModelArgs {
    fn model(&self, problem: &ProblemFile) -> Result<Model, Error> {
        let graph = match self.beta {
            Some(b) => problem.graph.with_constant_beta(b)?,
            None => problem.graph.clone(),
        };
        let lik = Likelihood::from_data(problem.observations.clone(), self.phi)?;
        Model::new(graph, self.prior.prior(), lik)
    }
}

#[derive(Args)]
struct SegmentArgs {
    problem: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    rule: RuleArgs,
    /// Use single-site Gibbs instead of generalized Swendsen-Wang.
    #[arg(long)]
    gibbs: bool,
    #[arg(long, default_value_t = 1000)]
    iters: u64,
    /// Comma-separated seeds; one chain per seed.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    #[arg(long, value_enum, default_value = "auto")]
    init: InitKind,
    /// Visit spin-clusters in a fresh random order each sweep.
    #[arg(long)]
    random_scan: bool,
    #[arg(long, env = "GSWSEG_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    /// Write 0 in the seconds column so trace files are reproducible.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    prior: PriorArgs,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, default_value_t = 1099)]
    n: usize,
    /// Lattice width; defaults to the square root of n rounded up.
    #[arg(long)]
    width: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    draws: usize,
    #[arg(long, default_value_t = 200)]
    sweeps_per_draw: u64,
    #[arg(long, default_value_t = 200)]
    burn_in: u64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1)]
    chains: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "GSWSEG_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    problem: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_delimiter = ',', default_value = "0,1,5")]
    lambdas: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    sweeps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(required = true)]
    problems: Vec<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_delimiter = ',', default_value = "0,1,5,10,20")]
    lambdas: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    iters: u64,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "GSWSEG_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 20)]
    width: usize,
    #[arg(long, default_value_t = 20)]
    height: usize,
    #[arg(long, default_value_t = 4)]
    clusters: usize,
    #[arg(long, default_value_t = 0.3)]
    dirichlet: f64,
    #[arg(long, default_value_t = 60)]
    pixels_per_site: u32,
    #[arg(long, default_value_t = 0.02)]
    beta: f64,
    #[arg(long, default_value_t = 8)]
    bins: usize,
    #[arg(long, default_value_t = 4)]
    cell_pixels: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    image: PathBuf,
    /// Whitespace-separated super-pixel ids, one image row per line.
    #[arg(long)]
    spmap: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    #[arg(long, default_value_t = 0.02)]
    beta: f64,
    #[arg(short, long)]
    output: PathBuf,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } | Error::Input(_) => 3,
        Error::Io(e) if e.kind() == std::io::ErrorKind::NotFound => 3,
        Error::Config(_) => 4,
        Error::Logic(_) | Error::Io(_) => 5,
    }
}

fn prepare_dir(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn segment(args: SegmentArgs) -> Result<(), Error> {
    let problem = load_problem(&args.problem)?;
    let model = args.model.model(&problem)?;
    let kernel = if args.gibbs {
        Kernel::Gibbs
    } else {
        let rule = args.rule.rule();
        rule.validate()?;
        Kernel::Gsw(rule)
    };
    let init = match args.init {
        InitKind::Auto => Init::Auto,
        InitKind::Singletons => Init::Singletons,
        InitKind::Single => Init::SingleCluster,
    };
    let scan = if args.random_scan {
        ScanOrder::Random
    } else {
        ScanOrder::Ascending
    };
    prepare_dir(&args.out_dir)?;

    let traces = std::thread::scope(|scope| {
        let handles: Vec<_> = args
            .seeds
            .iter()
            .map(|&seed| {
                let config = ChainConfig {
                    iterations: args.iters,
                    seed,
                    init: init.clone(),
                    kernel,
                    scan,
                };
                let model = &model;
                scope.spawn(move || run_chain(model, &config))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("chain thread panicked"))
            .collect::<Vec<_>>()
    });

    for (&seed, trace) in args.seeds.iter().zip(traces) {
        let trace = trace?;
        let dir = &args.out_dir;
        write_trace_csv(
            dir.join(format!("trace_{seed}.csv")),
            &trace,
            !args.no_timing,
        )?;
        write_labels(dir.join(format!("labels_{seed}.txt")), &trace.best_labels)?;
        if problem.footprint.is_some() {
            render_labels(
                &problem,
                &trace.best_labels,
                dir.join(format!("map_{seed}.ppm")),
            )?;
        }
        let k = trace.best_labels.iter().max().map_or(0, |m| m + 1);
        let mut line = format!(
            "seed {seed}: best log posterior {:.4} at iteration {}, {k} clusters",
            trace.best_log_posterior, trace.best_iteration
        );
        if let Some(truth) = &problem.ground_truth {
            let _ = write!(
                line,
                ", Rand index {:.4}",
                rand_index(&trace.best_labels, truth)?
            );
        }
        println!("{line}");
    }
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<(), Error> {
    let width = args
        .width
        .unwrap_or_else(|| (args.n as f64).sqrt().ceil().max(1.0) as usize);
    let graph = SiteGraph::partial_lattice(args.n, width, args.beta)?;
    let config = PriorSimConfig {
        draws: args.draws,
        sweeps_per_draw: args.sweeps_per_draw,
        burn_in: args.burn_in,
        seed: args.seed,
        chains: args.chains,
        init: Init::Auto,
    };
    let stats = prior_simulate(
        &args.prior.prior(),
        &graph,
        &DeltaRule::Constant(args.lambda),
        &config,
    )?;
    let s = stats.summary();
    println!(
        "n {} beta {} draws {}: mean k {:.3} (se {:.3}), median {}, quartiles {} - {}",
        args.n,
        args.beta,
        stats.len(),
        s.mean,
        s.std_error,
        s.median,
        s.lower_quartile,
        s.upper_quartile
    );
    prepare_dir(&args.out_dir)?;
    let mut csv = String::from("draw,k\n");
    for (i, k) in stats.cluster_counts.iter().enumerate() {
        let _ = writeln!(csv, "{i},{k}");
    }
    std::fs::write(args.out_dir.join(format!("prior_k_{}.csv", args.seed)), csv)?;
    Ok(())
}

fn oracle_check(args: OracleArgs) -> Result<(), Error> {
    let problem = load_problem(&args.problem)?;
    let model = args.model.model(&problem)?;
    let exact = exact_posterior(&model)?;
    println!("{} partitions in support", exact.len());
    for &lambda in &args.lambdas {
        let kernel = Kernel::Gsw(DeltaRule::Constant(lambda));
        let mut state = ChainState::new(&model, model.default_init(), args.seed)?;
        let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
        for _ in 0..args.sweeps {
            step(&mut state, &kernel)?;
            *counts
                .entry(state.partition().canonical_labels())
                .or_insert(0) += 1;
        }
        println!(
            "lambda {lambda}: total variation {:.5}",
            exact.total_variation(&counts)
        );
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<(), Error> {
    let models = args
        .problems
        .iter()
        .map(|p| args.model.model(&load_problem(p)?))
        .collect::<Result<Vec<_>, Error>>()?;
    let config = LambdaSweepConfig {
        lambdas: args.lambdas.clone(),
        iterations: args.iters,
        repeats: args.repeats,
        seed: args.seed,
        init: Init::Auto,
    };
    let rows = lambda_sweep(&models, &config)?;
    let mut csv = String::from(
        "lambda,median_best,q1_best,q3_best,median_increase_pct,median_tail_variance\n",
    );
    for r in &rows {
        println!(
            "lambda {:>6}: median best {:.3} [{:.3}, {:.3}], increase {:+.4}%, tail variance {:.4}",
            r.lambda,
            r.best.median,
            r.best.lower_quartile,
            r.best.upper_quartile,
            r.increase_pct.median,
            r.median_tail_variance
        );
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.lambda,
            r.best.median,
            r.best.lower_quartile,
            r.best.upper_quartile,
            r.increase_pct.median,
            r.median_tail_variance
        );
    }
    prepare_dir(&args.out_dir)?;
    std::fs::write(args.out_dir.join("lambda_sweep.csv"), csv)?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Segment(args) => segment(args),
        Command::SimulatePrior(args) => simulate(args),
        Command::OracleCheck(args) => oracle_check(args),
        Command::LambdaSweep(args) => sweep(args),
        Command::Synth(a) => {
            let spec = SyntheticSpec {
                width: a.width,
                height: a.height,
                clusters: a.clusters,
                dirichlet: a.dirichlet,
                pixels_per_site: a.pixels_per_site,
                beta: a.beta,
                bins: a.bins,
                cell_pixels: a.cell_pixels,
                seed: a.seed,
            };
            synthesize(&spec)?.save(&a.output)
        }
        Command::Ingest(a) => {
            ingest_superpixels(&a.image, &a.spmap, a.bins, a.beta)?.save(&a.output)
        }
        Command::RandIndex { a, b } => {
            println!("{:.6}", rand_index(&read_labels(a)?, &read_labels(b)?)?);
            Ok(())
        }
        Command::Render {
            problem,
            labels,
            output,
        } => render_labels(&load_problem(problem)?, &read_labels(labels)?, output),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gswseg: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
