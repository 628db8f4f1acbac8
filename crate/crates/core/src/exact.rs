//! Exact rational evaluation of the referendum model.
//!
//! The per-voter yes-probability is given as a ratio `num/den`, and the
//! outcome probability is computed with big-integer binomial coefficients,
//! so the result is an exact `BigRational`. Orders of magnitude slower than
//! the floating-point kernel; intended as a cross-check oracle in tests and
//! for pinning reference values.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Exact binomial coefficient `C(n, k)`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for j in 0..k {
        // Exact at every step: acc * (n - j) is divisible by (j + 1).
        acc = acc * BigUint::from(n - j) / BigUint::from(j + 1);
    }
    acc
}

/// Exact `p(y, n)` with `y = yes_num / yes_den`.
pub fn outcome_probability(yes_num: u64, yes_den: u64, voters: u32) -> BigRational {
    outcome_probability_bought(yes_num, yes_den, voters, 0)
}

/// Exact `p(y, n, i)` with `y = yes_num / yes_den`.
///
/// Panics if `yes_den == 0`, `yes_num > yes_den` or `voters == 0`; this is
/// oracle tooling, not a validated public surface.
pub fn outcome_probability_bought(
    yes_num: u64,
    yes_den: u64,
    voters: u32,
    bought: u32,
) -> BigRational {
    assert!(yes_den > 0, "probability denominator must be positive");
    assert!(yes_num <= yes_den, "probability must not exceed 1");
    assert!(voters >= 1, "need at least one voter");

    let threshold = voters / 2 + 1;
    if bought >= threshold {
        return BigRational::one();
    }
    let free = u64::from(voters - bought);
    let need = u64::from(threshold - bought); // >= 1

    let yes = BigUint::from(yes_num);
    let no = BigUint::from(yes_den - yes_num);
    if yes.is_zero() {
        return BigRational::zero();
    }
    if no.is_zero() {
        return BigRational::one();
    }

    // Common denominator yes_den^free; the numerator stays in integers.
    let mut coeff = binomial(free, need);
    let mut yes_pow = yes.pow(need as u32);
    let mut no_pow = no.pow((free - need) as u32);
    let mut numerator = BigUint::zero();
    let mut d = need;
    loop {
        numerator += &coeff * &yes_pow * &no_pow;
        if d == free {
            break;
        }
        coeff = coeff * BigUint::from(free - d) / BigUint::from(d + 1);
        yes_pow *= &yes;
        no_pow /= &no;
        d += 1;
    }
    let denominator = BigUint::from(yes_den).pow(free as u32);
    BigRational::new(BigInt::from(numerator), BigInt::from(denominator))
}

/// Exact marginal `p(y, n, i) - p(y, n, i - 1)`.
pub fn marginal(yes_num: u64, yes_den: u64, voters: u32, bought: u32) -> BigRational {
    assert!(bought >= 1, "marginal is defined for bought >= 1");
    outcome_probability_bought(yes_num, yes_den, voters, bought)
        - outcome_probability_bought(yes_num, yes_den, voters, bought - 1)
}

/// Nearest `f64` to an exact rational.
pub fn to_f64(value: &BigRational) -> f64 {
    value.to_f64().expect("rational converts to f64")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::str::FromStr;

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(10, 5), BigUint::from(252u32));
        assert_eq!(binomial(0, 0), BigUint::one());
        assert_eq!(binomial(4, 7), BigUint::zero());
    }

    #[test]
    fn binomial_100_choose_50() {
        let expected = BigUint::from_str("100891344545564193334812497256").unwrap();
        assert_eq!(binomial(100, 50), expected);
    }

    #[test]
    fn single_voter_is_identity() {
        for (num, den) in [(0u64, 10u64), (3, 10), (5, 10), (10, 10)] {
            let p = outcome_probability(num, den, 1);
            assert_eq!(p, BigRational::new(BigInt::from(num), BigInt::from(den)));
        }
    }

    #[test]
    fn even_electorate_counts_ties_as_losses() {
        // n = 2, y = 1/2: only the yes-yes outcome wins.
        let p = outcome_probability(1, 2, 2);
        assert_eq!(p, BigRational::new(BigInt::from(1), BigInt::from(4)));
    }

    #[test]
    fn buying_past_the_threshold_saturates() {
        assert!(outcome_probability_bought(1, 10, 100, 51).is_one());
        assert!(outcome_probability_bought(1, 10, 100, 200).is_one());
    }

    #[test]
    fn fair_coin_100_voters() {
        // p(1/2, 100) = (1 - C(100,50) / 2^100) / 2, strictly below one half.
        let p = outcome_probability(1, 2, 100);
        let central = BigRational::new(
            BigInt::from(binomial(100, 50)),
            BigInt::from(2u8).pow(100),
        );
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        assert_eq!(p, (BigRational::one() - central) * half.clone());
        assert!(p < half);
    }
}
