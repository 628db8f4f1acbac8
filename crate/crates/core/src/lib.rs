//! Generalized quadratic payments over non-linear outcome-probability
//! curves.
//!
//! A referendum of `n` voters who each vote "yes" with probability `y` gives
//! an outcome probability `p(y, n)`; buying `i` certain votes gives
//! `p(y, n, i)`. Pricing the `i`-th vote as
//! `c(i) = marginal(i) * (p(i) - p(0)) / k2` makes a rational buyer acquire
//! influence proportional to their perceived value `V`, capped at
//! `i_max = floor(p^-1(k2 V + p(0)))`; the familiar quadratic vote pricing
//! is the constant-marginal special case. Cumulative spend obeys a closed
//! form and grows quadratically in the reached probability.
//!
//! Modules:
//! * [`referendum`] — the binomial voter model with a numerically stable
//!   kernel and an exhaustive-enumeration oracle.
//! * [`curve`] — strictly increasing sampled curves with polyline
//!   evaluation and analytic inversion.
//! * [`pricing`] — the four cost regimes, purchase maxima and the rational
//!   buyer simulation.
//! * [`analysis`] — total-cost identities, growth-bound witnesses and
//!   granularity diagnostics.
//! * [`lattice`] — batch precomputation of `p(y, n, i)` with a checksummed
//!   binary format.
//! * [`exact`] — big-rational cross-check evaluation of the referendum
//!   model.
//! * [`demo`] — bundled illustrative curve families.
//!
//! Numeric code is generic over [`scalar::Real`] (`f32` or `f64`); the
//! aliases below fix the common `f64` instantiations.

// Validation uses `!(x > 0)` on purpose: the negated form fails NaN inputs,
// where `x <= 0` would let them through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod curve;
pub mod demo;
pub mod exact;
pub mod lattice;
pub mod pricing;
pub mod referendum;
pub mod scalar;

pub use analysis::{AnalysisError, BigOWitness, CostAnalysis, GranularityReport, WitnessRegime};
pub use curve::{CurveError, LinearCurveSpec, ProbabilityCurve};
pub use demo::DemoFamily;
pub use lattice::{LatticeError, LatticeSpec, LatticeTable};
pub use pricing::{CostSchedule, Price, PricingError, PricingParams, PurchaseTrace, RegimeKind};
pub use referendum::{ReferendumError, ReferendumModel};
pub use scalar::Real;

/// `f64` probability curve.
pub type Curve64 = ProbabilityCurve<f64>;
/// `f32` probability curve.
pub type Curve32 = ProbabilityCurve<f32>;
/// `f64` linear curve parameters.
pub type LinearSpec64 = LinearCurveSpec<f64>;
/// `f64` pricing parameters.
pub type Params64 = PricingParams<f64>;
/// `f64` cost schedule.
pub type Schedule64 = CostSchedule<f64>;
/// `f64` cost analysis.
pub type Analysis64 = CostAnalysis<f64>;
