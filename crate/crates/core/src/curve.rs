//! Strictly increasing probability curves `p(i)` over an integer vote index,
//! extended to real arguments by a polyline.
//!
//! The polyline keeps two things structural: interpolation reproduces the
//! knots exactly, and every segment inverts analytically, so inversion never
//! needs iterative root finding. Strictness is enforced at construction with
//! a configurable minimum step (default [`DEFAULT_MIN_STEP`]); saturated
//! tails must be trimmed by the caller before building a curve.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::scalar::{count, describe, real, Real};

/// Default minimum increase between adjacent samples.
pub const DEFAULT_MIN_STEP: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("a curve needs at least 2 samples, got {len}")]
    TooFewSamples { len: usize },
    #[error("sample {index} = {value} is outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("sample {index} does not exceed its predecessor by the minimum step")]
    NonMonotone { index: usize },
    #[error("argument {x} is outside the curve domain [0, {max}]")]
    OutOfDomain { x: f64, max: usize },
    #[error("target {target} is outside the curve range [{lo}, {hi}]")]
    TargetOutOfRange { target: f64, lo: f64, hi: f64 },
    #[error("vote index {index} is outside [1, {max}]")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("per-vote gain must be positive, got {delta_p}")]
    NonPositiveStep { delta_p: f64 },
    #[error("intercept must be non-negative, got {intercept}")]
    NegativeIntercept { intercept: f64 },
    #[error("linear curve tops out at {top}, above 1")]
    LinearExceedsOne { top: f64 },
}

/// Sampled curve `p(0), p(1), ..., p(N)`, strictly increasing within `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityCurve<T> {
    samples: Vec<T>,
}

impl<T: Real> ProbabilityCurve<T> {
    /// Validate and build a curve with the default minimum step.
    pub fn from_samples(samples: Vec<T>) -> Result<Self, CurveError> {
        Self::with_min_step(samples, real(DEFAULT_MIN_STEP))
    }

    /// Validate and build a curve with an explicit strictness tolerance.
    pub fn with_min_step(samples: Vec<T>, min_step: T) -> Result<Self, CurveError> {
        if samples.len() < 2 {
            return Err(CurveError::TooFewSamples { len: samples.len() });
        }
        for (index, &value) in samples.iter().enumerate() {
            if !(value >= T::zero() && value <= T::one()) {
                return Err(CurveError::OutOfRange {
                    index,
                    value: describe(value),
                });
            }
        }
        for index in 1..samples.len() {
            if samples[index] - samples[index - 1] < min_step {
                return Err(CurveError::NonMonotone { index });
            }
        }
        Ok(Self { samples })
    }

    /// Build the constant-marginal curve `p(i) = intercept + delta_p * i`.
    pub fn linear(spec: &LinearCurveSpec<T>) -> Result<Self, CurveError> {
        spec.validate()?;
        let samples = (0..spec.n_samples)
            .map(|i| spec.intercept + spec.delta_p * count(i as u64))
            .collect();
        Self::from_samples(samples)
    }

    /// Largest integer knot `N`.
    pub fn max_index(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    /// `p(0)`.
    pub fn first(&self) -> T {
        self.samples[0]
    }

    /// `p(N)`.
    pub fn last(&self) -> T {
        *self.samples.last().expect("validated: at least 2 samples")
    }

    /// Polyline evaluation at a real argument in `[0, N]`; exact at knots.
    pub fn evaluate(&self, x: T) -> Result<T, CurveError> {
        let max = self.max_index();
        if !(x >= T::zero() && x <= count(max as u64)) {
            return Err(CurveError::OutOfDomain {
                x: describe(x),
                max,
            });
        }
        let k = x.floor().to_usize().expect("floor of validated x fits usize");
        if k >= max {
            return Ok(self.samples[max]);
        }
        let frac = x - count(k as u64);
        Ok(self.samples[k] + frac * (self.samples[k + 1] - self.samples[k]))
    }

    /// Unique `x` with `evaluate(x) = target`, solved per linear segment.
    ///
    /// Valid for targets in `[p(0), p(N)]`; a target of exactly 1 is only
    /// reachable when 1 is the final knot, since interior saturation is ruled
    /// out by strictness.
    pub fn invert(&self, target: T) -> Result<T, CurveError> {
        let lo = self.first();
        let hi = self.last();
        if !(target >= lo && target <= hi) {
            return Err(CurveError::TargetOutOfRange {
                target: describe(target),
                lo: describe(lo),
                hi: describe(hi),
            });
        }
        // First knot at or above the target.
        let k = self.samples.partition_point(|&p| p < target);
        if self.samples[k] == target {
            return Ok(count(k as u64));
        }
        let seg = k - 1;
        let span = self.samples[k] - self.samples[seg];
        Ok(count::<T>(seg as u64) + (target - self.samples[seg]) / span)
    }

    /// Marginal gain `p(i) - p(i-1)` of the `i`-th vote, `1 <= i <= N`.
    pub fn marginal(&self, index: usize) -> Result<T, CurveError> {
        let max = self.max_index();
        if index < 1 || index > max {
            return Err(CurveError::IndexOutOfRange { index, max });
        }
        Ok(self.samples[index] - self.samples[index - 1])
    }

    /// All marginals `p(1)-p(0), ..., p(N)-p(N-1)` in order.
    pub fn marginals(&self) -> impl Iterator<Item = T> + '_ {
        self.samples.windows(2).map(|w| w[1] - w[0])
    }
}

/// Parameters of a constant-marginal (linear) curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearCurveSpec<T> {
    /// Per-vote probability gain, strictly positive.
    pub delta_p: T,
    /// `p(0)`.
    pub intercept: T,
    /// Number of samples, at least 2 (so `N = n_samples - 1`).
    pub n_samples: usize,
}

impl<T: Real> LinearCurveSpec<T> {
    pub fn new(delta_p: T, intercept: T, n_samples: usize) -> Self {
        Self {
            delta_p,
            intercept,
            n_samples,
        }
    }

    pub fn validate(&self) -> Result<(), CurveError> {
        if !(self.delta_p > T::zero()) {
            return Err(CurveError::NonPositiveStep {
                delta_p: describe(self.delta_p),
            });
        }
        if !(self.intercept >= T::zero()) {
            return Err(CurveError::NegativeIntercept {
                intercept: describe(self.intercept),
            });
        }
        if self.n_samples < 2 {
            return Err(CurveError::TooFewSamples {
                len: self.n_samples,
            });
        }
        let top = self.intercept + self.delta_p * count((self.n_samples - 1) as u64);
        if top > T::one() {
            return Err(CurveError::LinearExceedsOne { top: describe(top) });
        }
        Ok(())
    }

    pub fn build(&self) -> Result<ProbabilityCurve<T>, CurveError> {
        ProbabilityCurve::linear(self)
    }
}

/// Errors from the `i,p` curve file format.
#[derive(Debug, Error)]
pub enum CurveCsvError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("missing header row `i,p`")]
    MissingHeader,
    #[error("line {line}: expected header `i,p`, found `{found}`")]
    BadHeader { line: usize, found: String },
    #[error("line {line}: expected 2 fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: expected knot index {expected}, found `{found}`")]
    BadIndex {
        line: usize,
        expected: usize,
        found: String,
    },
    #[error("line {line}: cannot parse probability `{value}`")]
    BadValue { line: usize, value: String },
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Write a curve as CSV with header `i,p`, one row per integer knot.
pub fn write_curve_csv<W: Write>(curve: &ProbabilityCurve<f64>, out: &mut W) -> io::Result<()> {
    writeln!(out, "i,p")?;
    for (i, p) in curve.samples().iter().enumerate() {
        writeln!(out, "{i},{p}")?;
    }
    Ok(())
}

/// Parse the `i,p` curve format. Blank lines and `#` comments are skipped;
/// knot indices must run 0, 1, 2, ... and the `p` column must validate as a
/// curve. Errors carry 1-based line numbers.
pub fn read_curve_csv<R: BufRead>(reader: R) -> Result<ProbabilityCurve<f64>, CurveCsvError> {
    let mut samples = Vec::new();
    let mut saw_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !saw_header {
            if trimmed != "i,p" {
                return Err(CurveCsvError::BadHeader {
                    line: line_no,
                    found: trimmed.to_string(),
                });
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 2 {
            return Err(CurveCsvError::FieldCount {
                line: line_no,
                found: fields.len(),
            });
        }
        let expected = samples.len();
        if fields[0].trim().parse::<usize>() != Ok(expected) {
            return Err(CurveCsvError::BadIndex {
                line: line_no,
                expected,
                found: fields[0].trim().to_string(),
            });
        }
        let value: f64 = fields[1].trim().parse().map_err(|_| CurveCsvError::BadValue {
            line: line_no,
            value: fields[1].trim().to_string(),
        })?;
        samples.push(value);
    }
    if !saw_header {
        return Err(CurveCsvError::MissingHeader);
    }
    Ok(ProbabilityCurve::from_samples(samples)?)
}
