//! `rentsim`: generate instances, run strategies, benchmark and verify traces.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rentsim::bench::{self, ExperimentSpec, DEFAULT_BENCH_ORDER};
use rentsim::bounds::{evaluate, BoundReport};
use rentsim::generate::{gen_adversarial, gen_uniform, AdversaryParams, UniformParams};
use rentsim::io::{load_sequence, sequence_to_string};
use rentsim::oracle::brute_force_opt_in;
use rentsim::strategy::parse_rational;
use rentsim::{
    compute_stats, rational_to_f64, simulate_with, validate_trace, PlacementTrace, Rational,
    RunResult, StepOrder, StrategyConfig,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "rentsim", version, about = "Online server-renting simulator")]
struct Cli {
    /// Emit JSON instead of text tables.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a job sequence file.
    #[command(subcommand)]
    Generate(Generate),
    /// Run one strategy on a sequence file and check its bounds.
    Run(RunArgs),
    /// Run a strategy x instance grid and aggregate performance ratios.
    Bench(BenchArgs),
    /// Validate a trace file written by `run --trace-out`.
    Verify { trace: PathBuf },
}

#[derive(Subcommand)]
enum Generate {
    /// Uniform sizes, arrivals and lengths.
    Uniform {
        #[arg(long)]
        n: usize,
        #[arg(long = "e", default_value_t = 1000)]
        capacity: u64,
        #[arg(long = "t")]
        span_t: u64,
        #[arg(long)]
        mu: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        min_size: Option<u64>,
        #[arg(long)]
        max_size: Option<u64>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Phase adversary against a target strategy.
    Adversarial {
        /// Item size as a fraction of capacity, e.g. 0.5 or 1/10.
        #[arg(long)]
        eps: String,
        #[arg(long)]
        mu: u64,
        #[arg(long, default_value_t = 1)]
        delta: u64,
        #[arg(long, default_value_t = 1)]
        phases: u64,
        #[arg(long = "e", default_value_t = 1000)]
        capacity: u64,
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Metadata file; defaults to the output path with a `.json` extension.
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    strategy: String,
    sequence: PathBuf,
    /// Compare against the exhaustive optimum (tiny instances only).
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = rentsim::oracle::DEFAULT_LIMIT)]
    oracle_limit: usize,
    #[arg(long, default_value_t = StepOrder::DeparturesFirst)]
    step_order: StepOrder,
    /// Write the full placement trace as JSON.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Write the event log as `t,kind,job_id,server_id` lines.
    #[arg(long)]
    events: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',')]
    strategies: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long = "e", value_delimiter = ',')]
    capacity: Option<Vec<u64>>,
    #[arg(long = "t", value_delimiter = ',')]
    span_t: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    mu: Option<Vec<u64>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Full-size defaults: n = 100000 and 1000 trials per cell.
    #[arg(long)]
    full: bool,
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_BENCH_ORDER)]
    step_order: StepOrder,
    /// Aggregate CSV (or JSON with --json) destination.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Invariant(String),
    Usage(String),
}

impl From<rentsim::Error> for Failure {
    fn from(e: rentsim::Error) -> Self {
        match e {
            rentsim::Error::InfeasiblePlacement { .. } => Failure::Invariant(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(g) => generate(g),
        Command::Run(args) => run(args, cli.json),
        Command::Bench(args) => bench_cmd(args, cli.json),
        Command::Verify { trace } => verify(&trace, cli.json),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invariant(msg)) => {
            eprintln!("invariant violation: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn generate(g: Generate) -> Result<(), Failure> {
    match g {
        Generate::Uniform {
            n,
            capacity,
            span_t,
            mu,
            seed,
            min_size,
            max_size,
            out,
        } => {
            let params = UniformParams::new(n, capacity, span_t, mu, seed)
                .with_sizes(min_size.unwrap_or(1), max_size.unwrap_or(capacity));
            let seq = gen_uniform(&params)?;
            emit(out.as_deref(), &sequence_to_string(&seq))
        }
        Generate::Adversarial {
            eps,
            mu,
            delta,
            phases,
            capacity,
            target,
            out,
            sidecar,
        } => {
            let target = target.map(|t| t.parse::<StrategyConfig>()).transpose()?;
            let params = AdversaryParams {
                eps: parse_rational(&eps)?,
                mu,
                delta,
                phases,
                capacity,
                target,
            };
            let inst = gen_adversarial(&params)?;
            emit(out.as_deref(), &sequence_to_string(&inst.sequence))?;
            let meta = serde_json::to_string_pretty(&inst.sidecar())? + "\n";
            match sidecar.or_else(|| out.map(|o| o.with_extension("json"))) {
                Some(path) => fs::write(path, meta)?,
                None => eprint!("{meta}"),
            }
            Ok(())
        }
    }
}

fn run(args: RunArgs, json_out: bool) -> Result<(), Failure> {
    let seq = load_sequence(&args.sequence)?;
    let config: StrategyConfig = args.strategy.parse()?;
    let stats = compute_stats(&seq)?;
    let mut strategy = config.build(seq.capacity())?;
    let result = simulate_with(&mut strategy, &seq, args.step_order)?;
    let violations = validate_trace(&result.trace);

    let mut report = evaluate(&result, &stats)?;
    if args.oracle {
        let opt = brute_force_opt_in(&seq, args.oracle_limit, args.step_order)?;
        report.add_oracle(&result, opt.cost);
    }
    if let Some(path) = &args.trace_out {
        fs::write(path, serde_json::to_string(&result.trace)?)?;
    }
    if let Some(path) = &args.events {
        fs::write(path, result.trace.event_log())?;
    }

    let ratio = rational_to_f64(&(Rational::from_integer(result.total_cost as i128) / stats.util));
    if json_out {
        let doc = json!({
            "run": run_json(&result, ratio, args.step_order),
            "bounds": report,
            "violations": violations,
        });
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        print_run(&result, &report, ratio, args.step_order);
        for v in &violations {
            println!("violation: {v}");
        }
    }

    if !violations.is_empty() {
        return Err(Failure::Invariant(format!(
            "{} trace violations",
            violations.len()
        )));
    }
    let failed: Vec<_> = report.failures().map(|e| e.name.clone()).collect();
    if !failed.is_empty() {
        return Err(Failure::Invariant(format!(
            "bounds violated: {}",
            failed.join(", ")
        )));
    }
    Ok(())
}

fn run_json(result: &RunResult, ratio: f64, order: StepOrder) -> serde_json::Value {
    json!({
        "strategy": result.strategy,
        "step_order": order.to_string(),
        "total_cost": result.total_cost,
        "servers_opened": result.servers_opened,
        "critical_count": result.critical_count,
        "ratio_to_util": ratio,
        "per_server": result.per_server,
    })
}

fn print_run(result: &RunResult, report: &BoundReport, ratio: f64, order: StepOrder) {
    println!("strategy        {}", result.strategy);
    println!("step order      {order}");
    println!("cost            {}", result.total_cost);
    println!("servers         {}", result.servers_opened);
    println!("critical        {}", result.critical_count);
    println!(
        "lower bound     {:.4} (span {:.4}, util {:.4})",
        rational_to_f64(&report.lb),
        rational_to_f64(&report.lb_span),
        rational_to_f64(&report.lb_util)
    );
    println!("ratio to util   {ratio:.6}");
    if let Some(opt) = &report.opt_exact {
        println!("optimum         {}", rational_to_f64(opt));
    }
    for e in &report.entries {
        println!(
            "{:<4} {:<38} {:>14.4} vs {:>14.4}",
            if e.satisfied { "ok" } else { "FAIL" },
            e.name,
            rational_to_f64(&e.cost),
            rational_to_f64(&e.formula_value)
        );
    }
}

fn bench_cmd(args: BenchArgs, json_out: bool) -> Result<(), Failure> {
    let base = if args.full {
        ExperimentSpec::full()
    } else {
        ExperimentSpec::desk()
    };
    let spec = ExperimentSpec {
        strategies: args.strategies.unwrap_or(base.strategies),
        n: args.n.unwrap_or(base.n),
        capacity: args.capacity.unwrap_or(base.capacity),
        span_t: args.span_t.unwrap_or(base.span_t),
        mu: args.mu.unwrap_or(base.mu),
        trials: args.trials.unwrap_or(base.trials),
        seed_base: args.seed,
        oracle: args.oracle,
        threads: args.threads,
        step_order: args.step_order,
    };
    spec.validate()?;
    let rows = bench::run_bench(&spec).map_err(|e| Failure::Invariant(e.to_string()))?;
    let table = if json_out {
        serde_json::to_string_pretty(&rows)? + "\n"
    } else {
        bench::to_csv(&rows)
    };
    match &args.out {
        Some(path) => {
            fs::write(path, &table)?;
            if !json_out {
                print!("{}", bench::summary_table(&rows));
            }
        }
        None if json_out => print!("{table}"),
        None => {
            print!("{}", bench::summary_table(&rows));
        }
    }
    Ok(())
}

fn verify(path: &Path, json_out: bool) -> Result<(), Failure> {
    let text = fs::read_to_string(path)?;
    let trace: PlacementTrace = serde_json::from_str(&text)?;
    let violations = validate_trace(&trace);
    if json_out {
        println!("{}", serde_json::to_string_pretty(&violations)?);
    } else if violations.is_empty() {
        println!(
            "ok: {} jobs, {} servers, cost {}",
            trace.sequence.len(),
            trace.servers.len(),
            trace.total_cost()
        );
    } else {
        for v in &violations {
            println!("{v}");
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Invariant(format!(
            "{} trace violations",
            violations.len()
        )))
    }
}
