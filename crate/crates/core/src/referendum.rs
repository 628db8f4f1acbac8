//! Referendum outcome model.
//!
//! An electorate of `n` voters each votes "yes" independently with the same
//! probability `y`; a strict majority wins, so on an even electorate a tie
//! counts as "yes" losing. Buying `i` votes removes `i` voters from the
//! random pool and credits "yes" with `i` certain votes; once
//! `i > floor(n/2) + 1` the outcome is certain.
//!
//! The closed form sums binomial tail terms. Terms are computed in log space
//! via the log-gamma function and accumulated with compensated summation so
//! the evaluation stays accurate up to at least `n = 1000` without
//! overflowing binomial coefficients. [`brute_force_probability`] is an
//! independent oracle that enumerates every voter assignment; the exact
//! big-rational path lives in [`crate::exact`].

use thiserror::Error;

use crate::curve::{CurveError, ProbabilityCurve};
use crate::scalar::{count, describe, CompensatedSum, Real};

/// Largest free-voter pool [`brute_force_probability`] will enumerate
/// (`2^24` assignments).
pub const MAX_ENUMERATED_VOTERS: u32 = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReferendumError {
    #[error("yes-probability {y} is outside [0, 1]")]
    ProbabilityOutOfRange { y: f64 },
    #[error("voter count must be at least 1")]
    NoVoters,
    #[error("enumerating {free} free voters exceeds the 2^{max} assignment budget")]
    EnumerationBudget { free: u32, max: u32 },
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Smallest number of "yes" votes that wins: `floor(n/2) + 1`.
#[inline]
pub fn winning_threshold(voters: u32) -> u32 {
    voters / 2 + 1
}

fn validate<T: Real>(yes_prob: T, voters: u32) -> Result<(), ReferendumError> {
    if voters < 1 {
        return Err(ReferendumError::NoVoters);
    }
    if !(yes_prob >= T::zero() && yes_prob <= T::one()) {
        return Err(ReferendumError::ProbabilityOutOfRange {
            y: describe(yes_prob),
        });
    }
    Ok(())
}

/// Probability that "yes" wins a referendum of `voters` voters.
pub fn outcome_probability<T: Real>(yes_prob: T, voters: u32) -> Result<T, ReferendumError> {
    outcome_probability_bought(yes_prob, voters, 0)
}

/// Probability that "yes" wins when `bought` votes have been bought for it.
///
/// Non-decreasing in `bought` and exactly 1 from `bought = floor(n/2) + 1`
/// on, where the summation spans the full binomial support.
pub fn outcome_probability_bought<T: Real>(
    yes_prob: T,
    voters: u32,
    bought: u32,
) -> Result<T, ReferendumError> {
    validate(yes_prob, voters)?;
    let threshold = winning_threshold(voters);
    if bought >= threshold {
        return Ok(T::one());
    }
    let free = voters - bought; // >= 1 since threshold <= voters
    let need = threshold - bought; // in 1..=free

    if yes_prob == T::zero() {
        return Ok(T::zero());
    }
    if yes_prob == T::one() {
        return Ok(T::one());
    }
    if need == free {
        // Single addend: every free voter must vote yes.
        return Ok(yes_prob.powi(free as i32));
    }

    let ln_yes = yes_prob.ln();
    let ln_no = (T::one() - yes_prob).ln();
    let ln_free_factorial = count::<T>(u64::from(free) + 1).ln_gamma();
    let term = |d: u32| -> T {
        let ln_binom = ln_free_factorial
            - count::<T>(u64::from(d) + 1).ln_gamma()
            - count::<T>(u64::from(free - d) + 1).ln_gamma();
        (ln_binom
            + count::<T>(u64::from(d)) * ln_yes
            + count::<T>(u64::from(free - d)) * ln_no)
            .exp()
    };
    // Sum whichever tail carries less mass; near-saturated values then keep
    // absolute accuracy at the epsilon level instead of accumulating error
    // across the big tail.
    let mut sum = CompensatedSum::new();
    if count::<T>(u64::from(need)) <= count::<T>(u64::from(free)) * yes_prob {
        for d in 0..need {
            sum.add(term(d));
        }
        Ok((T::one() - sum.value()).max(T::zero()).min(T::one()))
    } else {
        for d in need..=free {
            sum.add(term(d));
        }
        Ok(sum.value().max(T::zero()).min(T::one()))
    }
}

/// Independent oracle: enumerate all `2^(n-i)` assignments of the free
/// voters and add up the winning ones.
///
/// Shares no code path with the closed form above; limited to
/// `n - i <= MAX_ENUMERATED_VOTERS`.
pub fn brute_force_probability<T: Real>(
    yes_prob: T,
    voters: u32,
    bought: u32,
) -> Result<T, ReferendumError> {
    validate(yes_prob, voters)?;
    let free = voters.saturating_sub(bought);
    if free > MAX_ENUMERATED_VOTERS {
        return Err(ReferendumError::EnumerationBudget {
            free,
            max: MAX_ENUMERATED_VOTERS,
        });
    }
    let threshold = u64::from(winning_threshold(voters));
    let no_prob = T::one() - yes_prob;
    // Weight of one assignment with d yes votes among the free voters.
    let weight: Vec<T> = (0..=free)
        .map(|d| yes_prob.powi(d as i32) * no_prob.powi((free - d) as i32))
        .collect();
    let mut sum = CompensatedSum::new();
    for assignment in 0u64..(1u64 << free) {
        let yes_votes = assignment.count_ones();
        if u64::from(yes_votes) + u64::from(bought) >= threshold {
            sum.add(weight[yes_votes as usize]);
        }
    }
    Ok(sum.value())
}

/// Sample `p(i)` for `i = 0..=max_bought` into a validated curve.
///
/// Fails with a curve validation error when the sampled range runs into the
/// saturated tail (the samples stop being strictly increasing).
pub fn curve_for<T: Real>(
    yes_prob: T,
    voters: u32,
    max_bought: u32,
) -> Result<ProbabilityCurve<T>, ReferendumError> {
    validate(yes_prob, voters)?;
    let samples = (0..=max_bought)
        .map(|i| outcome_probability_bought(yes_prob, voters, i))
        .collect::<Result<Vec<T>, _>>()?;
    Ok(ProbabilityCurve::from_samples(samples)?)
}

/// A validated `(y, n)` pair; the source of `p(y, n, i)` samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferendumModel<T> {
    yes_prob: T,
    voters: u32,
}

impl<T: Real> ReferendumModel<T> {
    pub fn new(yes_prob: T, voters: u32) -> Result<Self, ReferendumError> {
        validate(yes_prob, voters)?;
        Ok(Self { yes_prob, voters })
    }

    pub fn yes_prob(&self) -> T {
        self.yes_prob
    }

    pub fn voters(&self) -> u32 {
        self.voters
    }

    /// `p(y, n)`.
    pub fn outcome_probability(&self) -> T {
        outcome_probability(self.yes_prob, self.voters).expect("model validated at construction")
    }

    /// `p(y, n, i)`.
    pub fn with_bought(&self, bought: u32) -> T {
        outcome_probability_bought(self.yes_prob, self.voters, bought)
            .expect("model validated at construction")
    }

    /// Curve of `p(i)` samples for `i = 0..=max_bought`.
    pub fn curve(&self, max_bought: u32) -> Result<ProbabilityCurve<T>, ReferendumError> {
        curve_for(self.yes_prob, self.voters, max_bought)
    }
}
