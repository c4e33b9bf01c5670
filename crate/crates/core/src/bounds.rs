//! Lower bounds and exact checks of the cost guarantees.
//!
//! None of the guarantees compare against the (unknown) optimum directly.
//! Each check evaluates an inequality written purely in terms of span,
//! utilization, total size, min length and the length ratio, which in turn
//! implies the competitive ratio. All comparisons are exact.

use num_traits::{One, Zero};
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::engine::RunResult;
use crate::model::{JobSequence, Time};
use crate::stats::{compute_stats, segments, SequenceStats};
use crate::strategy::{format_rational, StrategyConfig, StrategyKind};
use crate::{rational_to_f64, Error, Rational, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LowerBound {
    #[serde(serialize_with = "ser_rational")]
    pub span: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub util: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub lb: Rational,
}

pub fn lower_bound(seq: &JobSequence) -> Result<LowerBound> {
    Ok(lower_bound_from(&compute_stats(seq)?))
}

pub fn lower_bound_from(stats: &SequenceStats) -> LowerBound {
    let span = int(stats.span);
    LowerBound {
        lb: span.max(stats.util),
        span,
        util: stats.util,
    }
}

/// One checked inequality: `measured <= formula_value` (or `>=` for lower bounds).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundEntry {
    pub name: String,
    pub formula_value: Rational,
    /// The measured quantity, usually the run's cost.
    pub cost: Rational,
    pub satisfied: bool,
}

impl BoundEntry {
    fn upper(name: &str, cost: Rational, formula_value: Rational) -> Self {
        BoundEntry {
            name: name.to_string(),
            satisfied: cost <= formula_value,
            formula_value,
            cost,
        }
    }

    fn lower(name: &str, cost: Rational, formula_value: Rational) -> Self {
        BoundEntry {
            name: name.to_string(),
            satisfied: cost >= formula_value,
            formula_value,
            cost,
        }
    }
}

impl Serialize for BoundEntry {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("BoundEntry", 5)?;
        st.serialize_field("name", &self.name)?;
        st.serialize_field("formula_value", &rational_to_f64(&self.formula_value))?;
        st.serialize_field("formula_exact", &format_rational(&self.formula_value))?;
        st.serialize_field("cost", &rational_to_f64(&self.cost))?;
        st.serialize_field("satisfied", &self.satisfied)?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    #[serde(serialize_with = "ser_rational")]
    pub lb_span: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub lb_util: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub lb: Rational,
    #[serde(serialize_with = "ser_opt_rational")]
    pub opt_exact: Option<Rational>,
    pub entries: Vec<BoundEntry>,
}

impl BoundReport {
    pub fn new(stats: &SequenceStats) -> Self {
        let lb = lower_bound_from(stats);
        BoundReport {
            lb_span: lb.span,
            lb_util: lb.util,
            lb: lb.lb,
            opt_exact: None,
            entries: Vec::new(),
        }
    }

    pub fn all_satisfied(&self) -> bool {
        self.entries.iter().all(|e| e.satisfied)
    }

    pub fn failures(&self) -> impl Iterator<Item = &BoundEntry> {
        self.entries.iter().filter(|e| !e.satisfied)
    }

    /// Records the exact optimum and checks the run does not beat it.
    pub fn add_oracle(&mut self, result: &RunResult, opt: Time) {
        let opt = int(opt);
        self.opt_exact = Some(opt);
        self.entries.push(BoundEntry::lower(
            "oracle_lower",
            int(result.total_cost),
            opt,
        ));
        self.entries
            .push(BoundEntry::lower("oracle_above_lb", opt, self.lb));
    }
}

/// Universal bounds for any strategy: `max(span, util) <= cost <= L`.
///
/// With all sizes at least `E/k`, also `cost <= k * util`. When `k` is not
/// given the largest valid value `E / min size` is used.
pub fn check_universal_bounds(
    result: &RunResult,
    stats: &SequenceStats,
    k: Option<Rational>,
) -> Vec<BoundEntry> {
    let cost = int(result.total_cost);
    let mut out = vec![
        BoundEntry::lower("span_lower", cost, int(stats.span)),
        BoundEntry::lower("util_lower", cost, stats.util),
        BoundEntry::upper("total_length_upper", cost, int(stats.total_length)),
    ];
    let seq = &result.trace.sequence;
    let e = int(seq.capacity().get());
    let min_size = seq.jobs().iter().map(|j| j.size).min().unwrap_or(1);
    let k = match k {
        Some(k) if k > Rational::zero() && int(min_size) * k >= e => Some(k),
        Some(_) => None,
        None => Some(e / int(min_size)),
    };
    if let Some(k) = k {
        out.push(BoundEntry::upper("size_floor_upper", cost, k * stats.util));
    }
    out
}

/// Next Fit: `cost = sum st1 + sum st2 <= span + p * mu * delta`, with the
/// critical count `p <= 2 * omega` in general and `p <= omega / (1 - 1/k)`
/// when every size is at most `E/k` for some `k >= 2`.
///
/// `k = None` uses the largest `k` the sizes allow, `E / max size`.
pub fn check_nf_bound(
    result: &RunResult,
    stats: &SequenceStats,
    k: Option<Rational>,
) -> Result<Vec<BoundEntry>> {
    expect_kind(result, StrategyKind::NextFit, "nf")?;
    let cost = int(result.total_cost);
    let p = int(result.critical_count as u64);
    let span = int(stats.span);
    let max_len = int(stats.max_length);
    let omega = stats.total_size;
    let two = int(2);

    let first: Time = result.per_server.iter().map(|s| s.first_period).sum();
    let longest_closed = result
        .per_server
        .iter()
        .map(|s| s.closed_period)
        .max()
        .unwrap_or(0);
    let mut out = vec![
        BoundEntry::upper("nf_first_periods_within_span", int(first), span),
        BoundEntry::upper(
            "nf_closed_period_within_max_length",
            int(longest_closed),
            max_len,
        ),
        BoundEntry::upper("nf_decomposition", cost, span + p * max_len),
        BoundEntry::upper("nf_critical_general", p, two * omega),
        BoundEntry::upper("nf_general", cost, span + two * omega * max_len),
    ];

    let seq = &result.trace.sequence;
    let e = int(seq.capacity().get());
    let max_size = int(seq.jobs().iter().map(|j| j.size).max().unwrap_or(1));
    let k = k.unwrap_or(e / max_size);
    if k >= two && max_size * k <= e {
        let fill = Rational::one() - k.recip();
        out.push(BoundEntry::upper(
            "nf_critical_small_items",
            p,
            omega / fill,
        ));
        out.push(BoundEntry::upper(
            "nf_small_items",
            cost,
            span + omega * max_len / fill,
        ));
    }
    Ok(out)
}

/// Modified Next Fit with parameter `K`:
/// `cost <= K * util * max(1, mu / (K - 1)) + span`.
pub fn check_mnf_bound(
    result: &RunResult,
    stats: &SequenceStats,
    k: Rational,
) -> Result<BoundEntry> {
    expect_kind(result, StrategyKind::ModifiedNextFit, "mnf")?;
    if k < int(2) {
        return Err(Error::InvalidParams(format!("mnf parameter {k} below 2")));
    }
    let factor = (stats.mu / (k - Rational::one())).max(Rational::one());
    Ok(BoundEntry::upper(
        "mnf",
        int(result.total_cost),
        k * stats.util * factor + int(stats.span),
    ))
}

/// Move To Front, per continuous segment of the sequence:
/// `cost <= 6(mu+1) * util + span + 3(mu+1) * delta`.
///
/// The entry carries the sum over segments; it is satisfied only if every
/// segment satisfies its own inequality.
pub fn check_mtf_bound(result: &RunResult, stats: &SequenceStats) -> Result<BoundEntry> {
    expect_kind(result, StrategyKind::MoveToFront, "mtf")?;
    let per_segment = segment_checks(result, stats);
    let satisfied = per_segment.iter().all(|(c, f)| c <= f);
    let (cost, formula) = per_segment
        .iter()
        .fold((Rational::zero(), Rational::zero()), |(c, f), (sc, sf)| {
            (c + sc, f + sf)
        });
    Ok(BoundEntry {
        name: "mtf_segments".into(),
        formula_value: formula,
        cost,
        satisfied,
    })
}

/// `(cost, formula)` per continuous segment for the Move To Front inequality.
pub fn segment_checks(result: &RunResult, stats: &SequenceStats) -> Vec<(Rational, Rational)> {
    let seq = &result.trace.sequence;
    let e = seq.capacity().get() as i128;
    let mu1 = stats.mu + Rational::one();
    let delta = int(stats.delta);
    segments(seq.jobs())
        .into_iter()
        .map(|(start, end)| {
            let inside = |t: Time| start <= t && t < end;
            let area: i128 = seq
                .jobs()
                .iter()
                .filter(|j| inside(j.arrival))
                .map(|j| j.size as i128 * j.length() as i128)
                .sum();
            let cost: Time = result
                .trace
                .servers
                .iter()
                .filter(|s| inside(s.opened_at))
                .map(|s| s.stretch())
                .sum();
            let formula =
                int(6) * mu1 * Rational::new(area, e) + int(end - start) + int(3) * mu1 * delta;
            (int(cost), formula)
        })
        .collect()
}

/// Every check that applies to the run's strategy.
pub fn evaluate(result: &RunResult, stats: &SequenceStats) -> Result<BoundReport> {
    let mut report = BoundReport::new(stats);
    report
        .entries
        .extend(check_universal_bounds(result, stats, None));
    let config: Option<StrategyConfig> = result.strategy.parse().ok();
    match config {
        Some(StrategyConfig {
            kind: StrategyKind::NextFit,
            ..
        }) => {
            report.entries.extend(check_nf_bound(result, stats, None)?);
        }
        Some(StrategyConfig {
            kind: StrategyKind::ModifiedNextFit,
            param: Some(k),
        }) => report.entries.push(check_mnf_bound(result, stats, k)?),
        Some(StrategyConfig {
            kind: StrategyKind::MoveToFront,
            ..
        }) => {
            report.entries.push(check_mtf_bound(result, stats)?);
        }
        _ => {}
    }
    Ok(report)
}

fn expect_kind(result: &RunResult, kind: StrategyKind, expected: &'static str) -> Result<()> {
    match result.strategy.parse::<StrategyConfig>() {
        Ok(c) if c.kind == kind => Ok(()),
        _ => Err(Error::WrongStrategy {
            expected,
            found: result.strategy.clone(),
        }),
    }
}

fn int(v: impl Into<i128>) -> Rational {
    Rational::from_integer(v.into())
}

pub(crate) fn ser_rational<S: Serializer>(
    r: &Rational,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(rational_to_f64(r))
}

fn ser_opt_rational<S: Serializer>(
    r: &Option<Rational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_some(&rational_to_f64(r)),
        None => s.serialize_none(),
    }
}
