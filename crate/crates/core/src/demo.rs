//! Bundled demo curve families.
//!
//! Four qualitatively different strictly increasing probability shapes used
//! by the plot-data emitters and the growth-bound checks. They illustrate
//! the range of behavior; none of them is measured data.

use crate::curve::ProbabilityCurve;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DemoFamily {
    /// Constant marginal from 0.05 to 0.95.
    Linear,
    /// Logistic s-shape rescaled into [0.02, 0.98].
    Logistic,
    /// Fast rise that flattens early: `1 - exp(-8 i / N)` rescaled.
    EarlySaturating,
    /// Cubic ramp that stays flat for a long time: `(i / N)^3` rescaled.
    SlowStart,
}

impl DemoFamily {
    pub const ALL: [DemoFamily; 4] = [
        DemoFamily::Linear,
        DemoFamily::Logistic,
        DemoFamily::EarlySaturating,
        DemoFamily::SlowStart,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DemoFamily::Linear => "linear",
            DemoFamily::Logistic => "logistic",
            DemoFamily::EarlySaturating => "early-saturating",
            DemoFamily::SlowStart => "slow-start",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|f| f.name() == name)
    }

    /// Sample the family into a curve with knots `0..=max_index`.
    pub fn curve(&self, max_index: usize) -> ProbabilityCurve<f64> {
        assert!(max_index >= 1, "a curve needs at least two knots");
        let n = max_index as f64;
        let shape: Box<dyn Fn(f64) -> f64> = match self {
            DemoFamily::Linear => Box::new(|t| 0.05 + 0.90 * t),
            DemoFamily::Logistic => {
                let sigmoid = |x: f64| 1.0 / (1.0 + (-x).exp());
                let lo = sigmoid(-6.0);
                let hi = sigmoid(6.0);
                Box::new(move |t| 0.02 + 0.96 * (sigmoid(-6.0 + 12.0 * t) - lo) / (hi - lo))
            }
            DemoFamily::EarlySaturating => {
                let scale = 1.0 - (-8.0f64).exp();
                Box::new(move |t| 0.05 + 0.93 * (1.0 - (-8.0 * t).exp()) / scale)
            }
            DemoFamily::SlowStart => Box::new(|t| 0.02 + 0.93 * t * t * t),
        };
        let samples = (0..=max_index).map(|i| shape(i as f64 / n)).collect();
        ProbabilityCurve::from_samples(samples).expect("demo families are strictly increasing")
    }
}

impl std::fmt::Display for DemoFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
