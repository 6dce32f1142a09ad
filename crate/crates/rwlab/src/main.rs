//! `rwlab` command-line interface.
//!
//! Subcommands: `generate`, `run`, `check`, `attack`, `experiment`,
//! `bench`, `bounds`. All outputs are deterministic given the flags and
//! seed; `RWLAB_THREADS` caps worker parallelism.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use rwlab::adversary::{attack, query_budget, AdversaryInstance, UniformOracle, Verdict};
use rwlab::algorithms::{run as run_algorithm, AlgorithmKind, AlgorithmResult};
use rwlab::analysis::{bound_crossing, bound_scan};
use rwlab::fairness::{
    is_envy_free, is_locally_envy_free, is_locally_proportional, is_proportional, SocialGraph,
};
use rwlab::gen;
use rwlab::io;
use rwlab::protocol::{QueriedPointSet, ValuationOracle};
use rwlab::rational::format_rational;
use rwlab::seeding::derive_seed;

#[derive(Parser)]
#[command(name = "rwlab", version, about = "Divisible fair division laboratory")]
struct Cli {
    /// RNG seed; recorded in generated files and result tables.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output file (defaults to stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Table delimiter for experiment/bench/bounds output.
    #[arg(long, global = true, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    Csv,
    Tsv,
}

impl TableFormat {
    fn delimiter(self) -> char {
        match self {
            TableFormat::Csv => ',',
            TableFormat::Tsv => '\t',
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GraphShape {
    Path,
    Complete,
    Edgeless,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an adversarial instance, a valuation profile, or a graph.
    Generate(GenerateArgs),
    /// Run a cake-cutting algorithm against an instance file.
    Run(RunArgs),
    /// Evaluate all four fairness predicates for an allocation.
    Check(CheckArgs),
    /// Attack an allocation + transcript with the two refutations.
    Attack(AttackArgs),
    /// Sweep adversarial instances and tabulate refutation rates.
    Experiment(ExperimentArgs),
    /// Tabulate query counts of the baseline algorithms.
    Bench(BenchArgs),
    /// Tabulate the union-bound components over a range of scales.
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of agents.
    #[arg(short = 'n', long = "agents")]
    n: usize,

    /// Generate an adversarial instance (requires n >= 33).
    #[arg(long, conflicts_with_all = ["random", "graph"])]
    adversary: bool,

    /// Generate a random piecewise-constant valuation profile.
    #[arg(long, conflicts_with = "graph")]
    random: bool,

    /// With --random: emit the built-in three-agent demo profile instead.
    #[arg(long, requires = "random")]
    figure2: bool,

    /// Maximum density segments per random valuation.
    #[arg(long, default_value_t = 4)]
    segments: usize,

    /// Generate a graph file of the given shape.
    #[arg(long, value_enum)]
    graph: Option<GraphShape>,
}

#[derive(Args)]
struct RunArgs {
    /// Algorithm name: cut-and-choose, even-paz, last-diminisher, contiguous.
    #[arg(long)]
    algorithm: String,

    /// Instance file: adversarial instance or valuation profile.
    #[arg(long)]
    instance: PathBuf,

    /// Query budget; omitted means unlimited.
    #[arg(long)]
    budget: Option<u64>,

    /// Where to write the transcript.
    #[arg(long)]
    transcript_out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    allocation: PathBuf,
    /// Valuation profile file.
    #[arg(long)]
    valuations: PathBuf,
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long)]
    allocation: PathBuf,
    #[arg(long)]
    transcript: PathBuf,
    /// Adversarial instance file.
    #[arg(long)]
    instance: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Comma-separated agent counts, each >= 33.
    #[arg(long, value_delimiter = ',', default_value = "33,65,97,129")]
    n_list: Vec<usize>,

    /// Trials per agent count and strategy.
    #[arg(long, default_value_t = 100)]
    trials: u64,

    /// Strategies to run within the budget.
    #[arg(long, value_delimiter = ',', default_value = "contiguous,even-paz")]
    strategies: Vec<String>,

    /// Query budget override; defaults to the construction's own budget.
    #[arg(long)]
    budget: Option<u64>,

    /// Optional SVG plot of refutation rate vs n.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Algorithms to sweep.
    #[arg(long, value_delimiter = ',', default_value = "even-paz,last-diminisher")]
    algorithms: Vec<String>,

    /// Smallest agent count.
    #[arg(long, default_value_t = 2)]
    n_start: usize,

    /// Largest agent count (sweep doubles from n_start).
    #[arg(long, default_value_t = 1024)]
    n_end: usize,
}

#[derive(Args)]
struct BoundsArgs {
    /// Largest scale to evaluate (multiples of 32 up to this).
    #[arg(long, default_value_t = 1 << 15)]
    max_m: usize,
}

/// Failure classes mapped to exit codes: construction errors exit 2,
/// malformed inputs exit 3, algorithms that cannot emit a complete
/// allocation exit 4.
enum Failure {
    Construction(String),
    Malformed(String),
    Incomplete(String),
    Io(String),
}

impl Failure {
    fn report(&self) -> (&str, i32) {
        match self {
            Failure::Construction(m) => (m, 2),
            Failure::Malformed(m) => (m, 3),
            Failure::Incomplete(m) => (m, 4),
            Failure::Io(m) => (m, 1),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let (message, code) = failure.report();
            eprintln!("rwlab: {message}");
            ExitCode::from(code as u8)
        }
    }
}

fn configure_threads() {
    if let Ok(value) = std::env::var("RWLAB_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build_global();
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Generate(args) => cmd_generate(cli, args),
        Command::Run(args) => cmd_run(cli, args),
        Command::Check(args) => cmd_check(cli, args),
        Command::Attack(args) => cmd_attack(cli, args),
        Command::Experiment(args) => cmd_experiment(cli, args),
        Command::Bench(args) => cmd_bench(cli, args),
        Command::Bounds(args) => cmd_bounds(cli, args),
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Malformed(format!("cannot read {}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn write_to(path: &Path, content: &str) -> Result<(), Failure> {
    std::fs::write(path, content)
        .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

fn cmd_generate(cli: &Cli, args: &GenerateArgs) -> Result<(), Failure> {
    if args.adversary {
        let instance = AdversaryInstance::build(args.n, cli.seed)
            .map_err(|e| Failure::Construction(e.to_string()))?;
        emit(&cli.out, &io::write_instance(&instance))?;
        eprintln!(
            "generated adversarial instance: n={} m={} r={} seed={} budget={}",
            instance.n(),
            instance.m(),
            instance.r(),
            instance.seed(),
            instance.budget()
        );
        return Ok(());
    }
    if args.random {
        let valuations = if args.figure2 {
            if args.n != 3 {
                return Err(Failure::Construction(
                    "the demo profile has exactly 3 agents; pass -n 3".into(),
                ));
            }
            gen::demo_valuations()
        } else {
            let mut rng = ChaCha12Rng::seed_from_u64(cli.seed);
            (0..args.n)
                .map(|_| gen::random_valuation(&mut rng, args.segments))
                .collect()
        };
        emit(&cli.out, &io::write_valuations(&valuations))?;
        eprintln!("generated valuation profile: n={} seed={}", args.n, cli.seed);
        return Ok(());
    }
    if let Some(shape) = args.graph {
        let graph = match shape {
            GraphShape::Path => SocialGraph::path(args.n),
            GraphShape::Complete => SocialGraph::complete(args.n),
            GraphShape::Edgeless => SocialGraph::edgeless(args.n),
        }
        .map_err(|e| Failure::Construction(e.to_string()))?;
        emit(&cli.out, &io::write_graph(&graph))?;
        return Ok(());
    }
    Err(Failure::Construction(
        "choose one of --adversary, --random, --graph".into(),
    ))
}

/// Either kind of instance file `run` accepts.
enum Instance {
    Adversary(AdversaryInstance),
    Valuations(Vec<rwlab::cake::Valuation>),
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    let text = read_file(path)?;
    let first = text.lines().next().unwrap_or("").trim().to_string();
    if first.starts_with("valuations") {
        io::parse_valuations(&text)
            .map(Instance::Valuations)
            .map_err(|e| Failure::Malformed(e.to_string()))
    } else {
        io::parse_instance(&text)
            .map(Instance::Adversary)
            .map_err(|e| Failure::Malformed(e.to_string()))
    }
}

fn cmd_run(cli: &Cli, args: &RunArgs) -> Result<(), Failure> {
    let kind: AlgorithmKind = args
        .algorithm
        .parse()
        .map_err(|e: rwlab::algorithms::AlgorithmError| Failure::Malformed(e.to_string()))?;
    let instance = load_instance(&args.instance)?;
    let result: AlgorithmResult = match &instance {
        Instance::Adversary(inst) => run_algorithm(kind, UniformOracle, inst.n(), args.budget),
        Instance::Valuations(vals) => run_algorithm(
            kind,
            ValuationOracle::new(vals.clone()),
            vals.len(),
            args.budget,
        ),
    }
    .map_err(|e| Failure::Incomplete(e.to_string()))?;
    emit(&cli.out, &io::write_allocation(&result.allocation))?;
    if let Some(path) = &args.transcript_out {
        write_to(path, &io::write_transcript(&result.transcript))?;
    }
    eprintln!(
        "algorithm={} queries={} budget_exhausted={}",
        kind.name(),
        result.query_count,
        result.budget_exhausted
    );
    Ok(())
}

fn cmd_check(cli: &Cli, args: &CheckArgs) -> Result<(), Failure> {
    let allocation = io::parse_allocation(&read_file(&args.allocation)?)
        .map_err(|e| Failure::Malformed(e.to_string()))?;
    let valuations = io::parse_valuations(&read_file(&args.valuations)?)
        .map_err(|e| Failure::Malformed(e.to_string()))?;
    let graph = io::parse_graph(&read_file(&args.graph)?)
        .map_err(|e| Failure::Malformed(e.to_string()))?;
    if allocation.n() != valuations.len() || allocation.n() != graph.n() {
        return Err(Failure::Malformed(format!(
            "size mismatch: allocation {}, valuations {}, graph {}",
            allocation.n(),
            valuations.len(),
            graph.n()
        )));
    }
    let prop = is_proportional(&allocation, &valuations);
    let local_prop = is_locally_proportional(&allocation, &valuations, &graph);
    let ef = is_envy_free(&allocation, &valuations);
    let lef = is_locally_envy_free(&allocation, &valuations, &graph);
    let margins = |m: &[rwlab::Rational]| {
        m.iter().map(format_rational).collect::<Vec<_>>().join(" ")
    };
    let mut report = String::new();
    writeln!(report, "proportional: {}", prop.satisfied).unwrap();
    writeln!(report, "proportional_margins: {}", margins(&prop.margins)).unwrap();
    writeln!(report, "locally_proportional: {}", local_prop.satisfied).unwrap();
    writeln!(
        report,
        "locally_proportional_margins: {}",
        margins(&local_prop.margins)
    )
    .unwrap();
    writeln!(report, "envy_free: {ef}").unwrap();
    writeln!(report, "locally_envy_free: {lef}").unwrap();
    emit(&cli.out, &report)
}

fn cmd_attack(cli: &Cli, args: &AttackArgs) -> Result<(), Failure> {
    let allocation = io::parse_allocation(&read_file(&args.allocation)?)
        .map_err(|e| Failure::Malformed(e.to_string()))?;
    let transcript = io::parse_transcript(&read_file(&args.transcript)?)
        .map_err(|e| Failure::Malformed(e.to_string()))?;
    let instance = io::parse_instance(&read_file(&args.instance)?)
        .map_err(|e| Failure::Malformed(e.to_string()))?;
    if allocation.n() != instance.n() {
        return Err(Failure::Malformed(format!(
            "allocation has {} agents but instance has {}",
            allocation.n(),
            instance.n()
        )));
    }
    if transcript
        .entries()
        .iter()
        .any(|e| e.query.agent >= instance.n())
    {
        return Err(Failure::Malformed(
            "transcript mentions agents outside the instance".into(),
        ));
    }
    let points = QueriedPointSet::from_transcript(&transcript, instance.n());
    let verdict = attack(&allocation, &transcript, &points, &instance);
    emit(&cli.out, &io::write_verdict(&verdict))
}

struct ExperimentCell {
    n: usize,
    strategy: AlgorithmKind,
    refuted_uniform: u64,
    refuted_perturbation: u64,
    unrefuted: u64,
}

fn cmd_experiment(cli: &Cli, args: &ExperimentArgs) -> Result<(), Failure> {
    if args.trials == 0 {
        return Err(Failure::Construction("need at least one trial".into()));
    }
    let strategies: Vec<AlgorithmKind> = args
        .strategies
        .iter()
        .map(|s| {
            s.parse()
                .map_err(|e: rwlab::algorithms::AlgorithmError| Failure::Malformed(e.to_string()))
        })
        .collect::<Result<_, _>>()?;
    for &n in &args.n_list {
        if n < 33 {
            return Err(Failure::Construction(format!(
                "experiment requires n >= 33, got {n}"
            )));
        }
    }
    let cells: Vec<(usize, AlgorithmKind)> = args
        .n_list
        .iter()
        .flat_map(|&n| strategies.iter().map(move |&s| (n, s)))
        .collect();
    let results: Vec<ExperimentCell> = cells
        .par_iter()
        .map(|&(n, strategy)| {
            let budget = args.budget.unwrap_or_else(|| query_budget(n));
            let mut cell = ExperimentCell {
                n,
                strategy,
                refuted_uniform: 0,
                refuted_perturbation: 0,
                unrefuted: 0,
            };
            for trial in 0..args.trials {
                let instance_seed = derive_seed(derive_seed(cli.seed, n as u64), trial);
                let instance =
                    AdversaryInstance::build(n, instance_seed).expect("n >= 33 checked above");
                let result = run_algorithm(strategy, UniformOracle, n, Some(budget))
                    .expect("strategies emit complete allocations");
                let verdict = attack(
                    &result.allocation,
                    &result.transcript,
                    &result.points,
                    &instance,
                );
                match verdict {
                    Verdict::RefutedUniform(_) => cell.refuted_uniform += 1,
                    Verdict::RefutedPerturbation(_) => cell.refuted_perturbation += 1,
                    Verdict::Unrefuted => cell.unrefuted += 1,
                }
            }
            cell
        })
        .collect();

    let d = cli.format.delimiter();
    let mut table = format!(
        "n{d}m{d}budget{d}strategy{d}trials{d}seed{d}refuted_uniform{d}refuted_perturbation{d}unrefuted{d}refutation_rate\n"
    );
    for cell in &results {
        let m = 32 * ((cell.n - 1) / 32);
        let budget = args.budget.unwrap_or_else(|| query_budget(cell.n));
        let refuted = cell.refuted_uniform + cell.refuted_perturbation;
        let rate = refuted as f64 / args.trials as f64;
        writeln!(
            table,
            "{}{d}{}{d}{}{d}{}{d}{}{d}{}{d}{}{d}{}{d}{}{d}{:.6}",
            cell.n,
            m,
            budget,
            cell.strategy.name(),
            args.trials,
            cli.seed,
            cell.refuted_uniform,
            cell.refuted_perturbation,
            cell.unrefuted,
            rate
        )
        .unwrap();
    }
    emit(&cli.out, &table)?;
    if let Some(plot_path) = &args.plot {
        write_to(plot_path, &render_rate_plot(&results, args.trials))?;
    }
    Ok(())
}

/// Minimal static SVG: one polyline of refutation rate vs n per strategy.
fn render_rate_plot(cells: &[ExperimentCell], trials: u64) -> String {
    let (w, h, margin) = (480.0, 320.0, 40.0);
    let ns: Vec<usize> = {
        let mut ns: Vec<usize> = cells.iter().map(|c| c.n).collect();
        ns.sort_unstable();
        ns.dedup();
        ns
    };
    let strategies: Vec<AlgorithmKind> = {
        let mut s: Vec<AlgorithmKind> = Vec::new();
        for cell in cells {
            if !s.contains(&cell.strategy) {
                s.push(cell.strategy);
            }
        }
        s
    };
    let x_of = |n: usize| {
        let idx = ns.iter().position(|&v| v == n).unwrap() as f64;
        let span = (ns.len().max(2) - 1) as f64;
        margin + idx / span * (w - 2.0 * margin)
    };
    let y_of = |rate: f64| h - margin - rate * (h - 2.0 * margin);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    );
    write!(
        svg,
        "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <line x1=\"{m}\" y1=\"{y0}\" x2=\"{xe}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{y0}\" stroke=\"black\"/>\n",
        m = margin,
        y0 = h - margin,
        xe = w - margin
    )
    .unwrap();
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    for (k, &strategy) in strategies.iter().enumerate() {
        let points: Vec<String> = ns
            .iter()
            .filter_map(|&n| {
                cells
                    .iter()
                    .find(|c| c.n == n && c.strategy == strategy)
                    .map(|c| {
                        let rate = (c.refuted_uniform + c.refuted_perturbation) as f64
                            / trials as f64;
                        format!("{:.2},{:.2}", x_of(n), y_of(rate))
                    })
            })
            .collect();
        writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>",
            colors[k % colors.len()],
            points.join(" ")
        )
        .unwrap();
        writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{}\">{}</text>",
            margin + 8.0,
            margin + 14.0 * (k as f64 + 1.0),
            colors[k % colors.len()],
            strategy.name()
        )
        .unwrap();
    }
    for &n in &ns {
        writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\">{}</text>",
            x_of(n),
            h - margin + 14.0,
            n
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

fn cmd_bench(cli: &Cli, args: &BenchArgs) -> Result<(), Failure> {
    let algorithms: Vec<AlgorithmKind> = args
        .algorithms
        .iter()
        .map(|s| {
            s.parse()
                .map_err(|e: rwlab::algorithms::AlgorithmError| Failure::Malformed(e.to_string()))
        })
        .collect::<Result<_, _>>()?;
    let mut sizes = Vec::new();
    let mut n = args.n_start.max(1);
    while n <= args.n_end {
        sizes.push(n);
        n *= 2;
    }
    let cells: Vec<(AlgorithmKind, usize)> = algorithms
        .iter()
        .flat_map(|&a| sizes.iter().map(move |&n| (a, n)))
        .filter(|&(a, n)| a != AlgorithmKind::CutAndChoose || n == 2)
        .collect();
    let counts: Vec<(AlgorithmKind, usize, u64)> = cells
        .par_iter()
        .map(|&(algorithm, n)| {
            let result = run_algorithm(algorithm, UniformOracle, n, None)
                .expect("uniform runs always complete");
            (algorithm, n, result.query_count)
        })
        .collect();
    let d = cli.format.delimiter();
    let mut table = format!("algorithm{d}n{d}queries{d}q_per_nlogn{d}q_per_n2\n");
    for (algorithm, n, queries) in counts {
        let nlogn = n as f64 * (n as f64).log2();
        let per_nlogn = if nlogn > 0.0 {
            format!("{:.6}", queries as f64 / nlogn)
        } else {
            String::new()
        };
        let per_n2 = format!("{:.6}", queries as f64 / (n as f64 * n as f64));
        writeln!(
            table,
            "{}{d}{}{d}{}{d}{}{d}{}",
            algorithm.name(),
            n,
            queries,
            per_nlogn,
            per_n2
        )
        .unwrap();
    }
    emit(&cli.out, &table)
}

fn cmd_bounds(cli: &Cli, args: &BoundsArgs) -> Result<(), Failure> {
    if args.max_m < 32 {
        return Err(Failure::Construction(
            "max-m must be at least 32".into(),
        ));
    }
    let d = cli.format.delimiter();
    let mut table = format!(
        "m{d}ln_binomial{d}ln_double_factorial{d}ln_pow2_term{d}exp_term{d}total_log\n"
    );
    for c in bound_scan(args.max_m) {
        writeln!(
            table,
            "{}{d}{:.6}{d}{:.6}{d}{:.6}{d}{:.6}{d}{:.6}",
            c.m, c.ln_binomial, c.ln_double_factorial, c.ln_pow2_term, c.exp_term, c.total
        )
        .unwrap();
    }
    emit(&cli.out, &table)?;
    match bound_crossing(args.max_m) {
        Some(m) => eprintln!("bound first turns negative at m = {m}"),
        None => eprintln!("bound stays positive up to m = {}", args.max_m),
    }
    Ok(())
}
