//! Strategy-by-instance experiment matrices over uniform random sequences.
//!
//! The performance ratio of a run is its cost over the sequence utilization.
//! Every strategy in a cell sees the same sequences: trial `i` uses seed
//! `seed_base + i`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::simulate_with;
use crate::generate::{gen_uniform, UniformParams};
use crate::oracle::{brute_force_opt_in, DEFAULT_LIMIT};
use crate::stats::compute_stats;
use crate::strategy::{StrategyConfig, StrategyKind};
use crate::trace::StepOrder;
use crate::{rational_to_f64, Error, Rational, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    /// Selection strings. Bare `mnf`, `mff` and `harmonic` take the
    /// per-cell defaults `mu + 1`, `mu + 7` and `10`.
    pub strategies: Vec<String>,
    pub n: Vec<usize>,
    pub capacity: Vec<u64>,
    pub span_t: Vec<u64>,
    pub mu: Vec<u64>,
    pub trials: usize,
    pub seed_base: u64,
    /// Also compare each run against the exhaustive optimum (tiny n only).
    pub oracle: bool,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Same-step ordering for every run; see [`DEFAULT_BENCH_ORDER`].
    #[serde(default = "default_bench_order")]
    pub step_order: StepOrder,
}

/// Benchmarks place arrivals of a step before that step's departures leave.
/// Under this model a unit-length job still shares its last step with the
/// next step's arrivals, which is what lets aligned packings (Next Fit, Move
/// To Front) pay off at small `mu`.
pub const DEFAULT_BENCH_ORDER: StepOrder = StepOrder::ArrivalsFirst;

fn default_bench_order() -> StepOrder {
    DEFAULT_BENCH_ORDER
}

pub const ALL_STRATEGIES: [&str; 7] = ["nf", "mnf", "ff", "mff", "bf", "harmonic", "mtf"];

impl ExperimentSpec {
    /// Reduced-size default grid: n = 1e4 and 30 trials per cell.
    pub fn desk() -> Self {
        ExperimentSpec {
            strategies: ALL_STRATEGIES.iter().map(|s| s.to_string()).collect(),
            n: vec![10_000],
            capacity: vec![1000],
            span_t: vec![1000, 10_000, 100_000],
            mu: vec![1, 2, 5, 10, 100],
            trials: 30,
            seed_base: 1,
            oracle: false,
            threads: None,
            step_order: DEFAULT_BENCH_ORDER,
        }
    }

    /// Full-size grid: `n = 10^5`, 1000 trials per cell.
    pub fn full() -> Self {
        ExperimentSpec {
            n: vec![100_000],
            trials: 1000,
            ..Self::desk()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.strategies.is_empty()
            || self.n.is_empty()
            || self.capacity.is_empty()
            || self.span_t.is_empty()
            || self.mu.is_empty()
        {
            return bad("experiment grid is empty");
        }
        for s in &self.strategies {
            for &mu in &self.mu {
                resolve_strategy(s, mu)?;
            }
        }
        Ok(())
    }

    fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &capacity in &self.capacity {
                for &mu in &self.mu {
                    for &span_t in &self.span_t {
                        out.push(Cell {
                            n,
                            capacity,
                            span_t,
                            mu,
                        });
                    }
                }
            }
        }
        out
    }
}

/// Resolves a bench strategy name for a cell with maximum length `mu`.
pub fn resolve_strategy(name: &str, mu: u64) -> Result<StrategyConfig> {
    let mu = mu as i128;
    let auto = |kind, k: i128| StrategyConfig::new(kind, Some(Rational::from_integer(k)));
    match name.trim() {
        "mnf" => auto(StrategyKind::ModifiedNextFit, (mu + 1).max(2)),
        "mff" => auto(StrategyKind::ModifiedFirstFit, mu + 7),
        "harmonic" => auto(StrategyKind::Harmonic, 10),
        other => other.parse(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Cell {
    pub n: usize,
    pub capacity: u64,
    pub span_t: u64,
    pub mu: u64,
}

/// Per-strategy aggregate of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub strategy: String,
    pub config: String,
    pub n: usize,
    pub capacity: u64,
    pub span_t: u64,
    pub mu: u64,
    pub trials: usize,
    pub mean_ratio: f64,
    pub std_ratio: f64,
    pub min_ratio: f64,
    pub mean_cost: f64,
    pub mean_util: f64,
    /// Lowest mean ratio in its cell.
    pub best: bool,
}

impl AggregateRow {
    pub fn cell(&self) -> Cell {
        Cell {
            n: self.n,
            capacity: self.capacity,
            span_t: self.span_t,
            mu: self.mu,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct TrialOutcome {
    cost: u64,
    util: Rational,
    ratio: f64,
}

pub fn run_bench(spec: &ExperimentSpec) -> Result<Vec<AggregateRow>> {
    spec.validate()?;
    match spec.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidParams(e.to_string()))?
            .install(|| run_cells(spec)),
        None => run_cells(spec),
    }
}

fn run_cells(spec: &ExperimentSpec) -> Result<Vec<AggregateRow>> {
    let mut rows = Vec::new();
    for cell in spec.cells() {
        let configs = spec
            .strategies
            .iter()
            .map(|s| resolve_strategy(s, cell.mu))
            .collect::<Result<Vec<_>>>()?;
        // trials[i][s]: outcome of strategy s on trial i
        let trials = (0..spec.trials)
            .into_par_iter()
            .map(|i| run_trial(spec, cell, &configs, spec.seed_base.wrapping_add(i as u64)))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| {
                Error::InvalidParams(format!(
                    "cell n={} E={} T={} mu={} failed: {e}",
                    cell.n, cell.capacity, cell.span_t, cell.mu
                ))
            })?;

        let first = rows.len();
        for (s, (name, config)) in spec.strategies.iter().zip(&configs).enumerate() {
            let outcomes: Vec<TrialOutcome> = trials.iter().map(|t| t[s]).collect();
            rows.push(aggregate(name, config, cell, &outcomes));
        }
        let best = rows[first..]
            .iter()
            .map(|r| r.mean_ratio)
            .fold(f64::INFINITY, f64::min);
        for row in &mut rows[first..] {
            row.best = row.mean_ratio == best;
        }
    }
    Ok(rows)
}

fn run_trial(
    spec: &ExperimentSpec,
    cell: Cell,
    configs: &[StrategyConfig],
    seed: u64,
) -> Result<Vec<TrialOutcome>> {
    let params = UniformParams::new(cell.n, cell.capacity, cell.span_t, cell.mu, seed);
    let seq = gen_uniform(&params)?;
    let stats = compute_stats(&seq)?;
    let opt = if spec.oracle {
        Some(brute_force_opt_in(&seq, DEFAULT_LIMIT, spec.step_order)?.cost)
    } else {
        None
    };
    configs
        .iter()
        .map(|config| {
            let mut strategy = config.build(seq.capacity())?;
            let run = simulate_with(&mut strategy, &seq, spec.step_order)?;
            let cost = Rational::from_integer(run.total_cost as i128);
            if cost < stats.util {
                return Err(Error::InvalidParams(format!(
                    "{config} cost {} below utilization on seed {seed}",
                    run.total_cost
                )));
            }
            if let Some(opt) = opt.filter(|&o| run.total_cost < o) {
                return Err(Error::InvalidParams(format!(
                    "{config} cost {} below optimum {opt} on seed {seed}",
                    run.total_cost
                )));
            }
            Ok(TrialOutcome {
                cost: run.total_cost,
                util: stats.util,
                ratio: rational_to_f64(&(cost / stats.util)),
            })
        })
        .collect()
}

fn aggregate(
    name: &str,
    config: &StrategyConfig,
    cell: Cell,
    outcomes: &[TrialOutcome],
) -> AggregateRow {
    let n = outcomes.len() as f64;
    let mean = |f: &dyn Fn(&TrialOutcome) -> f64| outcomes.iter().map(f).sum::<f64>() / n;
    let mean_ratio = mean(&|o| o.ratio);
    let std_ratio = if outcomes.len() > 1 {
        (outcomes
            .iter()
            .map(|o| (o.ratio - mean_ratio).powi(2))
            .sum::<f64>()
            / (n - 1.0))
            .sqrt()
    } else {
        0.0
    };
    AggregateRow {
        strategy: name.to_string(),
        config: config.to_string(),
        n: cell.n,
        capacity: cell.capacity,
        span_t: cell.span_t,
        mu: cell.mu,
        trials: outcomes.len(),
        mean_ratio,
        std_ratio,
        min_ratio: outcomes
            .iter()
            .map(|o| o.ratio)
            .fold(f64::INFINITY, f64::min),
        mean_cost: mean(&|o| o.cost as f64),
        mean_util: mean(&|o| rational_to_f64(&o.util)),
        best: false,
    }
}

pub const CSV_HEADER: &str =
    "strategy,config,n,capacity,T,mu,trials,mean_ratio,std_ratio,min_ratio,mean_cost,mean_util,best";

pub fn to_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.3},{:.3},{}",
            r.strategy,
            r.config,
            r.n,
            r.capacity,
            r.span_t,
            r.mu,
            r.trials,
            r.mean_ratio,
            r.std_ratio,
            r.min_ratio,
            r.mean_cost,
            r.mean_util,
            r.best
        );
    }
    out
}

/// Mean ratios pivoted by cell, with `*` marking the best strategy per row.
pub fn summary_table(rows: &[AggregateRow]) -> String {
    let mut strategies: Vec<&str> = Vec::new();
    let mut cells: Vec<Cell> = Vec::new();
    for r in rows {
        if !strategies.contains(&r.strategy.as_str()) {
            strategies.push(&r.strategy);
        }
        if !cells.contains(&r.cell()) {
            cells.push(r.cell());
        }
    }
    let width = strategies.iter().map(|s| s.len()).max().unwrap_or(0).max(9);
    let mut out = format!("{:>7} {:>7} {:>4} {:>6}", "n", "T", "mu", "E");
    for s in &strategies {
        let _ = write!(out, " {s:>width$}");
    }
    out.push('\n');
    for cell in cells {
        let _ = write!(
            out,
            "{:>7} {:>7} {:>4} {:>6}",
            cell.n, cell.span_t, cell.mu, cell.capacity
        );
        for s in &strategies {
            match rows.iter().find(|r| r.cell() == cell && r.strategy == *s) {
                Some(r) => {
                    let mark = if r.best { "*" } else { " " };
                    let _ = write!(
                        out,
                        " {:>w$}",
                        format!("{:.4}{mark}", r.mean_ratio),
                        w = width
                    );
                }
                None => {
                    let _ = write!(out, " {:>width$}", "-");
                }
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> ExperimentSpec {
        ExperimentSpec {
            strategies: vec!["nf".into(), "mtf".into(), "mnf".into()],
            n: vec![300],
            capacity: vec![100],
            span_t: vec![200],
            mu: vec![3, 10],
            trials: 4,
            seed_base: 9,
            oracle: false,
            threads: None,
            step_order: StepOrder::DeparturesFirst,
        }
    }

    #[test]
    fn resolves_cell_defaults() {
        assert_eq!(resolve_strategy("mnf", 10).unwrap().to_string(), "mnf:11");
        assert_eq!(resolve_strategy("mff", 10).unwrap().to_string(), "mff:17");
        assert_eq!(
            resolve_strategy("harmonic", 10).unwrap().to_string(),
            "harmonic:10"
        );
        assert_eq!(resolve_strategy("mnf", 1).unwrap().to_string(), "mnf:2");
        assert_eq!(resolve_strategy("mnf:4", 10).unwrap().to_string(), "mnf:4");
        assert!(resolve_strategy("zz", 10).is_err());
    }

    #[test]
    fn rows_and_best_marks() {
        let rows = run_bench(&small_spec()).unwrap();
        assert_eq!(rows.len(), 6);
        for cell in rows.chunks(3) {
            assert_eq!(cell.iter().filter(|r| r.best).count(), 1);
            assert!(cell.iter().all(|r| r.min_ratio >= 1.0 && r.trials == 4));
        }
        assert_eq!(rows[2].config, "mnf:4");
        assert_eq!(rows[5].config, "mnf:11");
        let table = summary_table(&rows);
        assert_eq!(table.lines().count(), 3);
        assert_eq!(to_csv(&rows).lines().count(), 7);
    }

    #[test]
    fn independent_of_thread_count() {
        let spec = small_spec();
        let serial = ExperimentSpec {
            threads: Some(1),
            ..spec.clone()
        };
        let wide = ExperimentSpec {
            threads: Some(4),
            ..spec
        };
        assert_eq!(
            to_csv(&run_bench(&serial).unwrap()),
            to_csv(&run_bench(&wide).unwrap())
        );
    }

    #[test]
    fn oracle_mode_on_tiny_instances() {
        let spec = ExperimentSpec {
            strategies: ALL_STRATEGIES.iter().map(|s| s.to_string()).collect(),
            n: vec![6],
            capacity: vec![10],
            span_t: vec![8],
            mu: vec![3],
            trials: 20,
            seed_base: 0,
            oracle: true,
            threads: None,
            step_order: StepOrder::DeparturesFirst,
        };
        assert_eq!(run_bench(&spec).unwrap().len(), 7);
        let spec = ExperimentSpec {
            step_order: StepOrder::ArrivalsFirst,
            ..spec
        };
        assert_eq!(run_bench(&spec).unwrap().len(), 7);
        let too_big = ExperimentSpec { n: vec![9], ..spec };
        assert!(run_bench(&too_big).is_err());
    }

    #[test]
    fn rejects_empty_grid() {
        let spec = ExperimentSpec {
            mu: vec![],
            ..small_spec()
        };
        assert!(run_bench(&spec).is_err());
        let spec = ExperimentSpec {
            trials: 0,
            ..small_spec()
        };
        assert!(run_bench(&spec).is_err());
    }
}
