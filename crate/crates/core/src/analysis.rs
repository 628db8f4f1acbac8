//! Total-cost identities, growth-bound witnesses and granularity
//! diagnostics.
//!
//! The cumulative cost of a rational purchase has a closed form: writing the
//! curve gain as a telescoped sum of marginals turns the direct sum
//! `sum c(i)` into `((p(m) - p(0))^2 + sum marginal(i)^2) / (2 k2)`, and with
//! the average marginal `A` and average squared marginal `B` into
//! `(A^2 m^2 + B m) / (2 k2)`. The constant-marginal special case collapses
//! to `(delta_p^2 / k2) * (m^2 + m) / 2`.
//!
//! Growth is quadratic in the outcome probability: there is a constant `M`
//! with `sum c(i) <= M * p(m)^2` in the stated validity range, while the
//! vote-count bound `M * m^2` can overshoot real totals by orders of
//! magnitude on early-saturating curves.

use std::io::{self, Write};

use serde_json::{json, Value};
use thiserror::Error;

use crate::curve::{CurveError, ProbabilityCurve};
use crate::pricing::{i_max_general, CostSchedule, Price, PricingError, PricingParams};
use crate::scalar::{count, describe, real, CompensatedSum, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("schedule entry {index} is unaffordable but lies within the summation range")]
    UnaffordableInRange { index: usize },
    #[error("i_max = {i_max} exceeds the {len} priced votes")]
    RangeTooLong { i_max: u64, len: usize },
    #[error("i_max must be in [1, {max}], got {i_max}")]
    IndexOutOfRange { i_max: u64, max: usize },
    #[error("{} value(s) violate the strict k2 bound: {offending:?}", offending.len())]
    BoundViolations { offending: Vec<f64> },
    #[error(transparent)]
    Pricing(#[from] PricingError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Direct compensated sum of the first `i_max` prices.
pub fn total_cost_direct<T: Real>(
    schedule: &CostSchedule<T>,
    i_max: u64,
) -> Result<T, AnalysisError> {
    if i_max > schedule.votes() as u64 {
        return Err(AnalysisError::RangeTooLong {
            i_max,
            len: schedule.votes(),
        });
    }
    let mut sum = CompensatedSum::new();
    for index in 1..=i_max as usize {
        match schedule.price(index).expect("index within schedule") {
            Price::Affordable(c) => sum.add(c),
            Price::Unaffordable => {
                return Err(AnalysisError::UnaffordableInRange { index });
            }
        }
    }
    Ok(sum.value())
}

/// Constant-marginal closed form `(delta_p^2 / k2) * (i_max^2 + i_max) / 2`.
pub fn total_cost_constant_closed<T: Real>(
    delta_p: T,
    k2: T,
    i_max: u64,
) -> Result<T, AnalysisError> {
    if !(delta_p > T::zero()) {
        return Err(PricingError::NonPositiveDeltaP {
            delta_p: describe(delta_p),
        }
        .into());
    }
    if !(k2 > T::zero()) {
        return Err(PricingError::NonPositiveK2 { k2: describe(k2) }.into());
    }
    // The triangular number is exact in integers first.
    let triangle = u128::from(i_max) * (u128::from(i_max) + 1) / 2;
    let triangle =
        T::from_u128(triangle).expect("triangular numbers convert into the scalar type");
    Ok(delta_p * delta_p / k2 * triangle)
}

/// General closed form `((p(i_max) - p(0))^2 + sum marginal(i)^2) / (2 k2)`.
pub fn total_cost_closed_form<T: Real>(
    curve: &ProbabilityCurve<T>,
    k2: T,
    i_max: u64,
) -> Result<T, AnalysisError> {
    if !(k2 > T::zero()) {
        return Err(PricingError::NonPositiveK2 { k2: describe(k2) }.into());
    }
    let max = curve.max_index();
    if i_max > max as u64 {
        return Err(AnalysisError::IndexOutOfRange { i_max, max });
    }
    let i_max = i_max as usize;
    let gain = curve.samples()[i_max] - curve.first();
    let mut squares = CompensatedSum::new();
    for index in 1..=i_max {
        let m = curve.marginal(index).expect("index validated");
        squares.add(m * m);
    }
    Ok((gain * gain + squares.value()) / (real::<T>(2.0) * k2))
}

/// Means of the marginals and squared marginals over votes `1..=i_max`.
pub fn averages<T: Real>(
    curve: &ProbabilityCurve<T>,
    i_max: u64,
) -> Result<(T, T), AnalysisError> {
    let max = curve.max_index();
    if i_max < 1 || i_max > max as u64 {
        return Err(AnalysisError::IndexOutOfRange { i_max, max });
    }
    let mut lin = CompensatedSum::new();
    let mut sq = CompensatedSum::new();
    for index in 1..=i_max as usize {
        let m = curve.marginal(index).expect("index validated");
        lin.add(m);
        sq.add(m * m);
    }
    let n = count::<T>(i_max);
    Ok((lin.value() / n, sq.value() / n))
}

/// Total cost from the averages: `(a^2 i_max^2 + b i_max) / (2 k2)`.
pub fn total_cost_from_averages<T: Real>(a_avg: T, b_avg: T, k2: T, i_max: u64) -> T {
    let m = count::<T>(i_max);
    (a_avg * a_avg * m * m + b_avg * m) / (real::<T>(2.0) * k2)
}

/// Which branch produced the growth-bound constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessRegime {
    /// `1 - 2 p(0) <= 0`: the bound holds for every index.
    Easy,
    /// `1 - 2 p(0) > 0`: the bound is guaranteed from a probability
    /// threshold upward.
    BoundedBelow,
}

impl WitnessRegime {
    pub fn name(&self) -> &'static str {
        match self {
            WitnessRegime::Easy => "easy",
            WitnessRegime::BoundedBelow => "bounded-below",
        }
    }
}

impl std::fmt::Display for WitnessRegime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Sufficient constant for `sum c(i) <= M * p(m)^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BigOWitness<T> {
    pub m: T,
    pub regime: WitnessRegime,
    /// In the bounded-below regime, the guarantee applies once
    /// `p(m) >= (1 - 2 p(0)) / (2 k2 M - 1)`; `None` means every index.
    pub valid_from_probability: Option<T>,
}

/// Sufficient growth-bound constant: `M = 1 / (2 k2)` when `1 - 2 p(0) <= 0`,
/// else `M = (1 - p(0)) / k2`.
///
/// This is the derivation's sufficient constant, not the infimum; see
/// [`tight_witness`] for the measured one.
pub fn big_o_witness<T: Real>(
    curve: &ProbabilityCurve<T>,
    k2: T,
) -> Result<BigOWitness<T>, AnalysisError> {
    if !(k2 > T::zero()) {
        return Err(PricingError::NonPositiveK2 { k2: describe(k2) }.into());
    }
    let p0 = curve.first();
    let two = real::<T>(2.0);
    let slack = T::one() - two * p0;
    if slack <= T::zero() {
        Ok(BigOWitness {
            m: (two * k2).recip(),
            regime: WitnessRegime::Easy,
            valid_from_probability: None,
        })
    } else {
        let m = (T::one() - p0) / k2;
        let threshold = slack / (two * k2 * m - T::one());
        Ok(BigOWitness {
            m,
            regime: WitnessRegime::BoundedBelow,
            valid_from_probability: Some(threshold),
        })
    }
}

/// Measured infimum constant: `max over m of sum c(i) / p(m)^2`.
pub fn tight_witness<T: Real>(
    curve: &ProbabilityCurve<T>,
    k2: T,
) -> Result<T, AnalysisError> {
    if !(k2 > T::zero()) {
        return Err(PricingError::NonPositiveK2 { k2: describe(k2) }.into());
    }
    let mut running = CompensatedSum::new();
    let mut best = T::zero();
    for index in 1..=curve.max_index() {
        let price = crate::pricing::cost_general(curve, k2, index)?;
        running.add(price);
        let p = curve.samples()[index];
        best = best.max(running.value() / (p * p));
    }
    Ok(best)
}

/// Everything [`analyze`] computes for one `(curve, k2, i_max)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostAnalysis<T> {
    pub total_direct: T,
    pub total_closed: T,
    pub a_avg: T,
    pub b_avg: T,
    pub m_witness: T,
    pub regime: WitnessRegime,
}

/// Compute totals along both routes, the averages and the growth witness.
pub fn analyze<T: Real>(
    curve: &ProbabilityCurve<T>,
    k2: T,
    i_max: u64,
) -> Result<CostAnalysis<T>, AnalysisError> {
    let max = curve.max_index();
    if i_max < 1 || i_max > max as u64 {
        return Err(AnalysisError::IndexOutOfRange { i_max, max });
    }
    let schedule = CostSchedule::qsp(curve, k2)?;
    let total_direct = total_cost_direct(&schedule, i_max)?;
    let total_closed = total_cost_closed_form(curve, k2, i_max)?;
    let (a_avg, b_avg) = averages(curve, i_max)?;
    let witness = big_o_witness(curve, k2)?;
    Ok(CostAnalysis {
        total_direct,
        total_closed,
        a_avg,
        b_avg,
        m_witness: witness.m,
        regime: witness.regime,
    })
}

/// Per-value purchase counts and how well a market constant spreads them.
#[derive(Clone, Debug, PartialEq)]
pub struct GranularityReport<T> {
    /// `(value, i_max)` in input order.
    pub entries: Vec<(T, u64)>,
    /// Minimum `|i_max difference|` over pairs of distinct values; `None`
    /// when fewer than two distinct values were given.
    pub min_pairwise_diff: Option<u64>,
    /// Number of distinct values that share their `i_max` with another
    /// distinct value.
    pub flattened: usize,
    /// True exactly when the minimum pairwise difference is 1.
    pub optimal: bool,
}

/// Compute `i_max` per value and report the spread diagnostics.
pub fn granularity<T: Real>(
    curve: &ProbabilityCurve<T>,
    k2: T,
    values: &[T],
) -> Result<GranularityReport<T>, AnalysisError> {
    let offending: Vec<f64> = values
        .iter()
        .filter(|&&v| {
            PricingParams::new(k2, v)
                .and_then(|p| p.validate_for(curve))
                .is_err()
        })
        .map(|&v| describe(v))
        .collect();
    if !offending.is_empty() {
        return Err(AnalysisError::BoundViolations { offending });
    }
    let entries: Vec<(T, u64)> = values
        .iter()
        .map(|&v| {
            let params = PricingParams::new(k2, v).expect("validated above");
            let i_max = match i_max_general(curve, &params) {
                Ok(m) => m,
                // Values incentivized past the sampled end saturate at N.
                Err(PricingError::TargetBeyondCurve { .. }) => curve.max_index() as u64,
                Err(e) => return Err(AnalysisError::from(e)),
            };
            Ok((v, i_max))
        })
        .collect::<Result<_, AnalysisError>>()?;

    let mut distinct: Vec<(T, u64)> = Vec::new();
    for &(v, m) in &entries {
        if !distinct.iter().any(|&(seen, _)| seen == v) {
            distinct.push((v, m));
        }
    }
    let mut min_pairwise_diff = None;
    for (a, &(_, ma)) in distinct.iter().enumerate() {
        for &(_, mb) in distinct.iter().skip(a + 1) {
            let diff = ma.abs_diff(mb);
            min_pairwise_diff = Some(min_pairwise_diff.map_or(diff, |d: u64| d.min(diff)));
        }
    }
    let flattened = distinct
        .iter()
        .filter(|&&(_, m)| distinct.iter().filter(|&&(_, o)| o == m).count() >= 2)
        .count();
    Ok(GranularityReport {
        entries,
        min_pairwise_diff,
        flattened,
        optimal: min_pairwise_diff == Some(1),
    })
}

/// One row of a `k2` sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepEntry<T> {
    pub k2: T,
    /// Largest value the strict bound admits at this `k2`: `(1 - p(0)) / k2`.
    pub max_value_allowed: T,
    /// `None` when some value violates the bound at this `k2`.
    pub report: Option<GranularityReport<T>>,
}

/// Evaluate [`granularity`] across a grid of market constants.
///
/// Renders the trade-off: smaller constants admit bigger values, bigger
/// constants spread purchase counts further apart.
pub fn granularity_sweep<T: Real>(
    curve: &ProbabilityCurve<T>,
    k2_grid: &[T],
    values: &[T],
) -> Vec<SweepEntry<T>> {
    k2_grid
        .iter()
        .map(|&k2| SweepEntry {
            k2,
            max_value_allowed: (T::one() - curve.first()) / k2,
            report: granularity(curve, k2, values).ok(),
        })
        .collect()
}

/// JSON report with the analysis fields and an optional granularity block.
pub fn report_json(
    analysis: &CostAnalysis<f64>,
    tight_m: f64,
    granularity: Option<&GranularityReport<f64>>,
) -> Value {
    let mut report = json!({
        "total_direct": analysis.total_direct,
        "total_closed": analysis.total_closed,
        "a_avg": analysis.a_avg,
        "b_avg": analysis.b_avg,
        "m_witness": analysis.m_witness,
        "regime": analysis.regime.name(),
        "tight_m": tight_m,
    });
    if let Some(g) = granularity {
        report["granularity"] = granularity_json(g);
    }
    report
}

/// JSON block for one granularity report.
pub fn granularity_json(report: &GranularityReport<f64>) -> Value {
    json!({
        "entries": report
            .entries
            .iter()
            .map(|&(v, m)| json!({ "v": v, "i_max": m }))
            .collect::<Vec<_>>(),
        "min_pairwise_diff": report.min_pairwise_diff,
        "flattened": report.flattened,
        "optimal": report.optimal,
    })
}

/// CSV table for a `k2` sweep; invalid rows keep the bound column and leave
/// the diagnostics empty.
pub fn write_sweep_csv<W: Write>(entries: &[SweepEntry<f64>], out: &mut W) -> io::Result<()> {
    writeln!(out, "k2,valid,max_value_allowed,min_pairwise_diff,flattened,optimal")?;
    for entry in entries {
        match &entry.report {
            Some(report) => {
                let min_diff = report
                    .min_pairwise_diff
                    .map_or(String::new(), |d| d.to_string());
                writeln!(
                    out,
                    "{},true,{},{},{},{}",
                    entry.k2, entry.max_value_allowed, min_diff, report.flattened, report.optimal
                )?;
            }
            None => writeln!(out, "{},false,{},,,", entry.k2, entry.max_value_allowed)?,
        }
    }
    Ok(())
}
