//! Vote pricing under four cost regimes.
//!
//! * `flat`: every vote costs the same, so buying is unlimited once the
//!   price clears the buyer threshold.
//! * `one-vote`: the first vote is priced, every further vote is
//!   unaffordable.
//! * `linear`: `c(i) = (delta_p / k) * i`, the constant-marginal schedule
//!   whose cumulative cost grows quadratically in the vote count.
//! * `qsp`: `c(i) = marginal(i) * (p(i) - p(0)) / k2`, the generalization
//!   that prices votes against an arbitrary strictly increasing outcome
//!   curve. Its cumulative cost grows quadratically in the outcome
//!   probability instead.
//!
//! A rational buyer keeps buying while the value of the marginal gain covers
//! the price (`marginal(i) * V >= c(i)`, ties buy). Under the `qsp` regime
//! that condition is equivalent to `p(i) <= k2 * V + p(0)`, which is monotone
//! in `i`, so the greedy stop index equals the closed-form maximum
//! [`i_max_general`].

use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use serde_json::{json, Value};
use thiserror::Error;

use crate::curve::{CurveError, ProbabilityCurve};
use crate::scalar::{count, describe, real, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PricingError {
    #[error("k2 must be positive, got {k2}")]
    NonPositiveK2 { k2: f64 },
    #[error("perceived value must be positive, got {value}")]
    NonPositiveValue { value: f64 },
    #[error("per-vote gain must be positive, got {delta_p}")]
    NonPositiveDeltaP { delta_p: f64 },
    #[error("proportionality constant must be positive, got {k}")]
    NonPositiveK { k: f64 },
    #[error("vote price must be positive, got {price}")]
    NonPositivePrice { price: f64 },
    #[error("vote index must be at least 1")]
    ZeroIndex,
    #[error("schedule needs at least one priced vote")]
    EmptySchedule,
    #[error("k2 = {k2} violates the strict bound k2 < (1 - p(0)) / V = {bound}")]
    BoundViolation { k2: f64, bound: f64 },
    #[error("target probability {target} exceeds the curve end p(N) = {p_end}")]
    TargetBeyondCurve { target: f64, p_end: f64 },
    #[error("p(0) must be below 1, got {p0}")]
    SaturatedStart { p0: f64 },
    #[error("schedule prices {schedule} votes but the curve has {curve}")]
    LengthMismatch { schedule: usize, curve: usize },
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Upper bound `(1 - p0) / v` that `k2` must stay strictly below.
pub fn k2_upper_bound<T: Real>(p0: T, value: T) -> Result<T, PricingError> {
    if !(p0 >= T::zero() && p0 < T::one()) {
        return Err(PricingError::SaturatedStart { p0: describe(p0) });
    }
    if !(value > T::zero()) {
        return Err(PricingError::NonPositiveValue {
            value: describe(value),
        });
    }
    Ok((T::one() - p0) / value)
}

/// Floor with a snap to the nearest whole number first.
///
/// Inversion results that are whole numbers analytically can land just below
/// them in floating point, which would off-by-one the floor.
fn floor_snapped<T: Real>(x: T, tolerance: T) -> u64 {
    let nearest = x.round();
    let snapped = if (x - nearest).abs() <= tolerance {
        nearest
    } else {
        x.floor()
    };
    // Purchase counts past u64 are saturated rather than rejected; they only
    // arise from astronomically mismatched constants.
    snapped.max(T::zero()).to_u64().unwrap_or(u64::MAX)
}

/// Constant-marginal maximum rational purchase: `floor(k * v)`.
pub fn i_max_constant<T: Real>(k: T, value: T) -> Result<u64, PricingError> {
    if !(k > T::zero()) {
        return Err(PricingError::NonPositiveK { k: describe(k) });
    }
    if !(value > T::zero()) {
        return Err(PricingError::NonPositiveValue {
            value: describe(value),
        });
    }
    let x = k * value;
    // No curve length to scale by here; snap relative to the product itself.
    let tolerance = real::<T>(1e-9) * x.max(T::one());
    Ok(floor_snapped(x, tolerance))
}

/// Market constant and one stakeholder's perceived value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PricingParams<T> {
    k2: T,
    value: T,
}

impl<T: Real> PricingParams<T> {
    pub fn new(k2: T, value: T) -> Result<Self, PricingError> {
        if !(k2 > T::zero()) {
            return Err(PricingError::NonPositiveK2 { k2: describe(k2) });
        }
        if !(value > T::zero()) {
            return Err(PricingError::NonPositiveValue {
                value: describe(value),
            });
        }
        Ok(Self { k2, value })
    }

    pub fn k2(&self) -> T {
        self.k2
    }

    pub fn value(&self) -> T {
        self.value
    }

    /// Legacy constant `k = k2 / delta_p` of the constant-marginal case.
    pub fn legacy_k(&self, delta_p: T) -> Result<T, PricingError> {
        if !(delta_p > T::zero()) {
            return Err(PricingError::NonPositiveDeltaP {
                delta_p: describe(delta_p),
            });
        }
        Ok(self.k2 / delta_p)
    }

    /// Enforce the strict bound `k2 < (1 - p(0)) / V` against a curve.
    ///
    /// Re-validated against every curve a parameter set is used with, since
    /// `p(0)` is curve-specific.
    pub fn validate_for(&self, curve: &ProbabilityCurve<T>) -> Result<(), PricingError> {
        let bound = k2_upper_bound(curve.first(), self.value)?;
        if !(self.k2 < bound) {
            return Err(PricingError::BoundViolation {
                k2: describe(self.k2),
                bound: describe(bound),
            });
        }
        Ok(())
    }

    /// Outcome probability the buyer is incentivized up to: `k2 * V + p(0)`.
    pub fn target_probability(&self, curve: &ProbabilityCurve<T>) -> T {
        self.k2 * self.value + curve.first()
    }
}

/// General maximum rational purchase: `floor(p^-1(k2 * V + p(0)))`.
pub fn i_max_general<T: Real>(
    curve: &ProbabilityCurve<T>,
    params: &PricingParams<T>,
) -> Result<u64, PricingError> {
    params.validate_for(curve)?;
    let target = params.target_probability(curve);
    if target > curve.last() {
        return Err(PricingError::TargetBeyondCurve {
            target: describe(target),
            p_end: describe(curve.last()),
        });
    }
    let x = curve.invert(target)?;
    let tolerance = real::<T>(1e-9) * count(curve.max_index() as u64);
    Ok(floor_snapped(x, tolerance))
}

/// Constant-marginal vote price: `c(i) = (delta_p / k) * i`.
pub fn cost_constant<T: Real>(delta_p: T, k: T, index: u64) -> Result<T, PricingError> {
    if !(delta_p > T::zero()) {
        return Err(PricingError::NonPositiveDeltaP {
            delta_p: describe(delta_p),
        });
    }
    if !(k > T::zero()) {
        return Err(PricingError::NonPositiveK { k: describe(k) });
    }
    if index < 1 {
        return Err(PricingError::ZeroIndex);
    }
    Ok(delta_p / k * count(index))
}

/// General vote price: `c(i) = marginal(i) * (p(i) - p(0)) / k2`.
///
/// Evaluated as `marginal * ((p(i) - p(0)) / k2)`, the price-per-gain factor
/// times the marginal; a buyer whose value equals that factor then ties
/// bit-exactly with the gain side of the threshold.
pub fn cost_general<T: Real>(
    curve: &ProbabilityCurve<T>,
    k2: T,
    index: usize,
) -> Result<T, PricingError> {
    if !(k2 > T::zero()) {
        return Err(PricingError::NonPositiveK2 { k2: describe(k2) });
    }
    let marginal = curve.marginal(index)?;
    Ok(marginal * ((curve.samples()[index] - curve.first()) / k2))
}

/// A vote price; unaffordable entries are an explicit marker, never a float
/// infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Price<T> {
    Affordable(T),
    Unaffordable,
}

impl<T: Copy> Price<T> {
    pub fn affordable(&self) -> Option<T> {
        match self {
            Price::Affordable(c) => Some(*c),
            Price::Unaffordable => None,
        }
    }
}

/// Which pricing regime a schedule was built under.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegimeKind {
    Flat,
    OneVote,
    Linear,
    Qsp,
    /// Loaded from a file that did not record its regime.
    External,
}

impl RegimeKind {
    pub fn name(&self) -> &'static str {
        match self {
            RegimeKind::Flat => "flat",
            RegimeKind::OneVote => "one-vote",
            RegimeKind::Linear => "linear",
            RegimeKind::Qsp => "qsp",
            RegimeKind::External => "external",
        }
    }
}

impl fmt::Display for RegimeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RegimeKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "flat" => Ok(RegimeKind::Flat),
            "one-vote" => Ok(RegimeKind::OneVote),
            "linear" => Ok(RegimeKind::Linear),
            "qsp" => Ok(RegimeKind::Qsp),
            "external" => Ok(RegimeKind::External),
            _ => Err(()),
        }
    }
}

/// Materialized per-vote prices `c(1), ..., c(N)` under one regime.
#[derive(Clone, Debug, PartialEq)]
pub struct CostSchedule<T> {
    kind: RegimeKind,
    prices: Vec<Price<T>>,
}

impl<T: Real> CostSchedule<T> {
    /// Every vote costs `price`.
    pub fn flat(price: T, votes: usize) -> Result<Self, PricingError> {
        Self::check_price(price)?;
        Self::check_len(votes)?;
        Ok(Self {
            kind: RegimeKind::Flat,
            prices: vec![Price::Affordable(price); votes],
        })
    }

    /// First vote costs `price`, every further vote is unaffordable.
    pub fn one_vote(price: T, votes: usize) -> Result<Self, PricingError> {
        Self::check_price(price)?;
        Self::check_len(votes)?;
        let mut prices = vec![Price::Unaffordable; votes];
        prices[0] = Price::Affordable(price);
        Ok(Self {
            kind: RegimeKind::OneVote,
            prices,
        })
    }

    /// `c(i) = (delta_p / k) * i`.
    pub fn linear(delta_p: T, k: T, votes: usize) -> Result<Self, PricingError> {
        Self::check_len(votes)?;
        let prices = (1..=votes as u64)
            .map(|i| cost_constant(delta_p, k, i).map(Price::Affordable))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            kind: RegimeKind::Linear,
            prices,
        })
    }

    /// `c(i) = marginal(i) * (p(i) - p(0)) / k2` over the whole curve.
    pub fn qsp(curve: &ProbabilityCurve<T>, k2: T) -> Result<Self, PricingError> {
        let prices = (1..=curve.max_index())
            .map(|i| cost_general(curve, k2, i).map(Price::Affordable))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            kind: RegimeKind::Qsp,
            prices,
        })
    }

    /// Wrap explicit prices loaded from elsewhere.
    pub fn from_prices(kind: RegimeKind, prices: Vec<Price<T>>) -> Result<Self, PricingError> {
        if prices.is_empty() {
            return Err(PricingError::EmptySchedule);
        }
        for p in &prices {
            if let Price::Affordable(c) = p {
                Self::check_price(*c)?;
            }
        }
        Ok(Self { kind, prices })
    }

    fn check_price(price: T) -> Result<(), PricingError> {
        if !(price > T::zero() && price.is_finite()) {
            return Err(PricingError::NonPositivePrice {
                price: describe(price),
            });
        }
        Ok(())
    }

    fn check_len(votes: usize) -> Result<(), PricingError> {
        if votes == 0 {
            return Err(PricingError::EmptySchedule);
        }
        Ok(())
    }

    pub fn kind(&self) -> RegimeKind {
        self.kind
    }

    /// Number of priced votes `N`.
    pub fn votes(&self) -> usize {
        self.prices.len()
    }

    /// Price of the `index`-th vote, 1-based.
    pub fn price(&self, index: usize) -> Option<Price<T>> {
        if index < 1 {
            return None;
        }
        self.prices.get(index - 1).copied()
    }

    pub fn prices(&self) -> &[Price<T>] {
        &self.prices
    }
}

/// One row of a buyer's greedy decision trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PurchaseDecision<T> {
    pub index: usize,
    /// `marginal(i) * V`.
    pub gain: T,
    pub price: Price<T>,
    pub bought: bool,
}

/// Greedy purchase outcome: decisions for votes 1, 2, ... up to and
/// including the first refusal.
#[derive(Clone, Debug, PartialEq)]
pub struct PurchaseTrace<T> {
    pub decisions: Vec<PurchaseDecision<T>>,
    /// Number of votes bought.
    pub stop_index: usize,
}

/// Simulate the rational buyer: buy votes 1, 2, ... while
/// `marginal(i) * V >= c(i)` (ties buy), stop at the first refusal.
pub fn rational_buyer<T: Real>(
    schedule: &CostSchedule<T>,
    curve: &ProbabilityCurve<T>,
    value: T,
) -> Result<PurchaseTrace<T>, PricingError> {
    if !(value > T::zero()) {
        return Err(PricingError::NonPositiveValue {
            value: describe(value),
        });
    }
    if schedule.votes() != curve.max_index() {
        return Err(PricingError::LengthMismatch {
            schedule: schedule.votes(),
            curve: curve.max_index(),
        });
    }
    let mut decisions = Vec::new();
    let mut stop_index = 0;
    for index in 1..=schedule.votes() {
        let gain = curve.marginal(index)? * value;
        let price = schedule.price(index).expect("index within schedule");
        let bought = match price {
            Price::Affordable(c) => gain >= c,
            Price::Unaffordable => false,
        };
        decisions.push(PurchaseDecision {
            index,
            gain,
            price,
            bought,
        });
        if !bought {
            break;
        }
        stop_index = index;
    }
    Ok(PurchaseTrace {
        decisions,
        stop_index,
    })
}

/// Errors from the schedule file formats.
#[derive(Debug, Error)]
pub enum ScheduleFileError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("missing header row `i,c`")]
    MissingHeader,
    #[error("line {line}: expected header `i,c`, found `{found}`")]
    BadHeader { line: usize, found: String },
    #[error("line {line}: expected 2 fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: expected vote index {expected}, found `{found}`")]
    BadIndex {
        line: usize,
        expected: usize,
        found: String,
    },
    #[error("line {line}: cannot parse price `{value}`")]
    BadValue { line: usize, value: String },
    #[error("line {line}: unknown regime `{found}`")]
    BadRegime { line: usize, found: String },
    #[error("malformed schedule JSON: {reason}")]
    Json { reason: String },
    #[error(transparent)]
    Pricing(#[from] PricingError),
}

/// Write a schedule as CSV with header `i,c`; unaffordable entries use the
/// token `inf`. The regime is recorded in a leading comment.
pub fn write_schedule_csv<W: Write>(
    schedule: &CostSchedule<f64>,
    out: &mut W,
) -> io::Result<()> {
    writeln!(out, "# regime = {}", schedule.kind())?;
    writeln!(out, "i,c")?;
    for (idx, price) in schedule.prices().iter().enumerate() {
        match price {
            Price::Affordable(c) => writeln!(out, "{},{}", idx + 1, c)?,
            Price::Unaffordable => writeln!(out, "{},inf", idx + 1)?,
        }
    }
    Ok(())
}

/// Parse the `i,c` schedule format; `inf` marks unaffordable votes and a
/// `# regime = ...` comment restores the regime tag.
pub fn read_schedule_csv<R: BufRead>(reader: R) -> Result<CostSchedule<f64>, ScheduleFileError> {
    let mut prices = Vec::new();
    let mut kind = RegimeKind::External;
    let mut saw_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(regime) = comment.strip_prefix("regime =") {
                let regime = regime.trim();
                kind = regime.parse().map_err(|()| ScheduleFileError::BadRegime {
                    line: line_no,
                    found: regime.to_string(),
                })?;
            }
            continue;
        }
        if !saw_header {
            if trimmed != "i,c" {
                return Err(ScheduleFileError::BadHeader {
                    line: line_no,
                    found: trimmed.to_string(),
                });
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 2 {
            return Err(ScheduleFileError::FieldCount {
                line: line_no,
                found: fields.len(),
            });
        }
        let expected = prices.len() + 1;
        if fields[0].trim().parse::<usize>() != Ok(expected) {
            return Err(ScheduleFileError::BadIndex {
                line: line_no,
                expected,
                found: fields[0].trim().to_string(),
            });
        }
        let raw = fields[1].trim();
        if raw == "inf" {
            prices.push(Price::Unaffordable);
        } else {
            let value: f64 = raw.parse().map_err(|_| ScheduleFileError::BadValue {
                line: line_no,
                value: raw.to_string(),
            })?;
            prices.push(Price::Affordable(value));
        }
    }
    if !saw_header {
        return Err(ScheduleFileError::MissingHeader);
    }
    Ok(CostSchedule::from_prices(kind, prices)?)
}

/// JSON mirror of the schedule CSV: `{"regime": ..., "prices": [{"i", "c"}]}`
/// with `"inf"` marking unaffordable votes.
pub fn schedule_to_json(schedule: &CostSchedule<f64>) -> Value {
    let prices: Vec<Value> = schedule
        .prices()
        .iter()
        .enumerate()
        .map(|(idx, price)| match price {
            Price::Affordable(c) => json!({ "i": idx + 1, "c": c }),
            Price::Unaffordable => json!({ "i": idx + 1, "c": "inf" }),
        })
        .collect();
    json!({ "regime": schedule.kind().name(), "prices": prices })
}

/// Parse the JSON mirror back into a schedule.
pub fn schedule_from_json(value: &Value) -> Result<CostSchedule<f64>, ScheduleFileError> {
    let bad = |reason: &str| ScheduleFileError::Json {
        reason: reason.to_string(),
    };
    let object = value.as_object().ok_or_else(|| bad("not an object"))?;
    let regime = object
        .get("regime")
        .and_then(Value::as_str)
        .ok_or_else(|| bad("missing regime"))?;
    let kind: RegimeKind = regime
        .parse()
        .map_err(|()| bad(&format!("unknown regime `{regime}`")))?;
    let rows = object
        .get("prices")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing prices array"))?;
    let mut prices = Vec::with_capacity(rows.len());
    for (idx, row) in rows.iter().enumerate() {
        let row = row.as_object().ok_or_else(|| bad("price row not an object"))?;
        let i = row
            .get("i")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("price row missing index"))?;
        if i != idx as u64 + 1 {
            return Err(bad(&format!("expected index {}, found {i}", idx + 1)));
        }
        match row.get("c") {
            Some(Value::Number(n)) => {
                let c = n.as_f64().ok_or_else(|| bad("price not representable"))?;
                prices.push(Price::Affordable(c));
            }
            Some(Value::String(s)) if s == "inf" => prices.push(Price::Unaffordable),
            _ => return Err(bad("price must be a number or \"inf\"")),
        }
    }
    Ok(CostSchedule::from_prices(kind, prices)?)
}
