//! Acceptance suite: one test per release criterion, each printing a
//! `criterion NN PASS` line (visible with `--nocapture`).

use std::time::{Duration, Instant};

use qsp::analysis::{
    averages, big_o_witness, granularity, total_cost_closed_form, total_cost_constant_closed,
    total_cost_direct, total_cost_from_averages,
};
use qsp::curve::{LinearCurveSpec, ProbabilityCurve};
use qsp::exact;
use qsp::lattice::{build_lattice, LatticeError, LatticeSpec, LatticeTable};
use qsp::pricing::{
    cost_constant, cost_general, i_max_constant, i_max_general, rational_buyer, CostSchedule,
    PricingError, PricingParams,
};
use qsp::referendum::{brute_force_probability, outcome_probability, outcome_probability_bought};
use qsp::DemoFamily;

/// Deterministic SplitMix64; reproducible across platforms and releases.
struct Rng(u64);

impl Rng {
    fn new(seed: u64) -> Self {
        Rng(seed)
    }

    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    fn in_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    fn usize_in(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as usize
    }
}

/// Strictly increasing curve with `2..=max_knots` knots, staying below 1.
fn random_curve(rng: &mut Rng, max_knots: usize) -> ProbabilityCurve<f64> {
    let knots = rng.usize_in(2, max_knots);
    let p0 = rng.in_range(0.0, 0.5);
    let raw: Vec<f64> = (0..knots - 1).map(|_| rng.in_range(1e-6, 0.05)).collect();
    let total: f64 = raw.iter().sum();
    let scale = if p0 + total > 0.999 {
        (0.999 - p0) / total
    } else {
        1.0
    };
    let mut samples = Vec::with_capacity(knots);
    let mut acc = p0;
    samples.push(acc);
    for inc in raw {
        acc += inc * scale;
        samples.push(acc);
    }
    ProbabilityCurve::from_samples(samples).expect("constructed to validate")
}

fn assert_runtime(elapsed: Duration, limit: Duration, criterion: &str) {
    assert!(
        elapsed < limit,
        "{criterion} took {elapsed:?}, limit {limit:?}"
    );
}

#[test]
fn criterion_01_oracle_equivalence() {
    let start = Instant::now();
    let mut checked = 0u32;
    for n in 1u32..=16 {
        for tenths in 0..=10u32 {
            let y = f64::from(tenths) / 10.0;
            for i in 0..=(n / 2 + 1) {
                let closed = outcome_probability_bought(y, n, i).unwrap();
                let brute = brute_force_probability(y, n, i).unwrap();
                assert!(
                    (closed - brute).abs() <= 1e-12,
                    "y={y} n={n} i={i}: closed {closed} vs brute {brute}"
                );
                checked += 1;
            }
        }
    }
    assert_runtime(start.elapsed(), Duration::from_secs(60), "criterion 1");
    println!("criterion 01 PASS - closed form matches enumeration on {checked} cells");
}

#[test]
fn criterion_02_odd_even_law_at_half() {
    let start = Instant::now();
    for n in (1u32..=201).step_by(2) {
        let p = outcome_probability(0.5f64, n).unwrap();
        assert!((p - 0.5).abs() <= 1e-12, "odd n={n}: {p}");
    }
    for n in (2u32..=200).step_by(2) {
        let p = outcome_probability(0.5f64, n).unwrap();
        assert!(p < 0.5, "even n={n}: {p}");
    }
    assert_runtime(start.elapsed(), Duration::from_secs(5), "criterion 2");
    println!("criterion 02 PASS - odd electorates sit at one half, even ones below");
}

#[test]
fn criterion_03_crossing_indices_at_80_percent() {
    let start = Instant::now();
    // Pinned by the exact evaluator; the figure-reading windows contain them.
    const CROSSING_AT_HALF: u32 = 10;
    const CROSSING_AT_TWO_FIFTHS: u32 = 24;

    let exact_crossing = |num: u64, den: u64| -> u32 {
        (0..=51)
            .find(|&i| {
                exact::outcome_probability_bought(num, den, 100, i)
                    > num_rational::BigRational::new(4.into(), 5.into())
            })
            .expect("saturates at 1 before i = 51")
    };
    let float_crossing = |y: f64| -> u32 {
        (0..=51)
            .find(|&i| outcome_probability_bought(y, 100, i).unwrap() > 0.8)
            .expect("saturates at 1 before i = 51")
    };

    assert_eq!(exact_crossing(1, 2), CROSSING_AT_HALF);
    assert_eq!(exact_crossing(2, 5), CROSSING_AT_TWO_FIFTHS);
    assert_eq!(float_crossing(0.5), CROSSING_AT_HALF);
    assert_eq!(float_crossing(0.4), CROSSING_AT_TWO_FIFTHS);
    assert!((8..=11).contains(&CROSSING_AT_HALF));
    assert!((21..=26).contains(&CROSSING_AT_TWO_FIFTHS));
    assert_runtime(start.elapsed(), Duration::from_secs(10), "criterion 3");
    println!(
        "criterion 03 PASS - 80% crossings at i = {CROSSING_AT_HALF} (y=0.5) and \
         i = {CROSSING_AT_TWO_FIFTHS} (y=0.4)"
    );
}

#[test]
fn criterion_04_saturation_is_exact() {
    for tenths in 1..=9u32 {
        let y = f64::from(tenths) / 10.0;
        assert_eq!(outcome_probability_bought(y, 100, 51).unwrap(), 1.0, "y={y}");
    }
    println!("criterion 04 PASS - p(y, 100, 51) is exactly 1 across the y grid");
}

#[test]
fn criterion_05_reduction_to_the_constant_case() {
    let mut rng = Rng::new(0x5ec5);
    for case in 0..100 {
        let knots = rng.usize_in(6, 120);
        let max_index = (knots - 1) as f64;
        let intercept = rng.in_range(0.0, 0.4);
        let gain = rng.in_range(0.05, 0.999 - intercept - 0.01);
        let delta_p = gain / max_index;
        let spec = LinearCurveSpec::new(delta_p, intercept, knots);
        let curve = spec.build().unwrap();

        let value = rng.in_range(0.1, 10.0);
        let k2 = rng.in_range(0.05, 0.95) * gain / value;
        let k = k2 / delta_p;
        let params = PricingParams::new(k2, value).unwrap();

        let general = i_max_general(&curve, &params).unwrap();
        let constant = i_max_constant(k, value).unwrap();
        assert_eq!(general, constant, "case {case}");

        for index in 1..knots {
            let g = cost_general(&curve, k2, index).unwrap();
            let c = cost_constant(delta_p, k, index as u64).unwrap();
            assert!(
                (g - c).abs() <= 1e-12 * c.abs().max(1.0),
                "case {case}, i={index}: {g} vs {c}"
            );
        }
    }
    println!("criterion 05 PASS - general pricing reduces to the constant case on 100 specs");
}

#[test]
fn criterion_06_closed_form_identity() {
    let start = Instant::now();
    let mut rng = Rng::new(0xc105ed);
    for case in 0..1000 {
        let curve = random_curve(&mut rng, 201);
        let k2 = rng.in_range(1e-3, 1.0);
        let i_max = curve.max_index() as u64;

        let schedule = CostSchedule::qsp(&curve, k2).unwrap();
        let direct = total_cost_direct(&schedule, i_max).unwrap();
        let closed = total_cost_closed_form(&curve, k2, i_max).unwrap();

        // Raw triangular double summation, the O(N^2) expansion of the same
        // total; kept in test code as the brute-force anchor.
        let marginals: Vec<f64> = curve.marginals().collect();
        let mut double = 0.0;
        for i in 0..marginals.len() {
            for j in 0..=i {
                double += marginals[i] * marginals[j];
            }
        }
        double /= k2;

        let (a_avg, b_avg) = averages(&curve, i_max).unwrap();
        let via_averages = total_cost_from_averages(a_avg, b_avg, k2, i_max);

        let scale = direct.abs().max(1.0);
        assert!((direct - closed).abs() <= 1e-9 * scale, "case {case}");
        assert!((direct - double).abs() <= 1e-9 * scale, "case {case}");
        assert!((direct - via_averages).abs() <= 1e-9 * scale, "case {case}");
    }
    assert_runtime(start.elapsed(), Duration::from_secs(60), "criterion 6");
    println!("criterion 06 PASS - four total-cost routes agree on 1000 random curves");
}

#[test]
fn criterion_07_constant_case_quadratic_law() {
    // Dyadic inputs keep every price, partial sum and the closed form exact.
    let delta_p = 0.25f64;
    let k2 = 0.5;
    let schedule = CostSchedule::linear(delta_p, k2 / delta_p, 32).unwrap();
    for i_max in 0..=32u64 {
        let direct = total_cost_direct(&schedule, i_max).unwrap();
        let closed = total_cost_constant_closed(delta_p, k2, i_max).unwrap();
        assert_eq!(direct, closed, "i_max = {i_max}");
        assert_eq!(closed, 0.125 * (i_max * (i_max + 1) / 2) as f64);
    }
    println!("criterion 07 PASS - constant-case totals are bit-exact on dyadic inputs");
}

#[test]
fn criterion_08_growth_bound_witness() {
    let start = Instant::now();
    let k2 = 0.01;
    let mut coarse_demonstrated = false;
    for family in DemoFamily::ALL {
        let curve = family.curve(1000);
        let witness = big_o_witness(&curve, k2).unwrap();
        let mut running = 0.0;
        for m in 1..=curve.max_index() {
            running += cost_general(&curve, k2, m).unwrap();
            let p = curve.samples()[m];
            // The sufficient constant holds across the whole index range on
            // these families, not just the formally guaranteed tail.
            assert!(
                running <= witness.m * p * p,
                "{family}: bound fails at m={m} ({running} > {})",
                witness.m * p * p
            );
        }
        // The vote-count reference line at m = N.
        let final_ratio = witness.m * 1000.0 * 1000.0 / running;
        if final_ratio > 10.0 {
            coarse_demonstrated = true;
        }
    }
    assert!(
        coarse_demonstrated,
        "expected some family where M * m^2 overshoots the real total by > 10x"
    );
    assert_runtime(start.elapsed(), Duration::from_secs(10), "criterion 8");
    println!("criterion 08 PASS - probability bound holds everywhere; index bound is coarse");
}

#[test]
fn criterion_09_buyer_agrees_with_i_max() {
    let mut rng = Rng::new(0xb04e5);
    for case in 0..500 {
        let curve = random_curve(&mut rng, 61);
        let value = rng.in_range(0.2, 20.0);
        let k2 = rng.in_range(0.05, 0.95) * (1.0 - curve.first()) / value;
        let params = PricingParams::new(k2, value).unwrap();
        let schedule = CostSchedule::qsp(&curve, k2).unwrap();

        let trace = rational_buyer(&schedule, &curve, value).unwrap();
        let i_max = match i_max_general(&curve, &params) {
            Ok(m) => m,
            // The buyer clears every priced vote when the incentive target
            // lies past the sampled end.
            Err(PricingError::TargetBeyondCurve { .. }) => curve.max_index() as u64,
            Err(e) => panic!("case {case}: {e}"),
        };
        assert_eq!(trace.stop_index as u64, i_max, "case {case}");
    }

    // Boundary tie, exactly representable: marginal(2) * V = 0.25 * 1.5 and
    // c(2) are both 0.375, and the tie buys.
    let curve = ProbabilityCurve::from_samples(vec![0.0, 0.5, 0.75]).unwrap();
    let schedule = CostSchedule::qsp(&curve, 0.5).unwrap();
    let trace = rational_buyer(&schedule, &curve, 1.5).unwrap();
    assert_eq!(trace.decisions[1].gain, 0.375);
    assert_eq!(trace.decisions[1].price.affordable().unwrap(), 0.375);
    assert!(trace.decisions[1].bought);
    assert_eq!(trace.stop_index, 2);
    println!("criterion 09 PASS - greedy buyer matches i_max on 500 triples; ties buy");
}

#[test]
fn criterion_10_granularity_optimal_and_flattened() {
    // k = k2 / delta_p = 1, so i_max = floor(V) and consecutive values land
    // one vote apart.
    let curve = LinearCurveSpec::new(0.01f64, 0.2, 61).build().unwrap();
    let values = [1.5f64, 2.5, 3.5];
    let report = granularity(&curve, 0.01, &values).unwrap();
    assert_eq!(report.min_pairwise_diff, Some(1));
    assert!(report.optimal);

    let flattened = granularity(&curve, 0.0001, &values).unwrap();
    assert!(flattened.flattened >= 2, "got {}", flattened.flattened);
    assert!(!flattened.optimal);
    println!("criterion 10 PASS - optimal spread detected; tiny k2 flattens distinct values");
}

#[test]
fn criterion_11_lattice_integrity() {
    let start = Instant::now();
    let spec = LatticeSpec {
        y_start: 0.0,
        y_step: 0.1,
        y_count: 11,
        n_max: 50,
        i_cap: 26,
    };
    let table = build_lattice(&spec).unwrap();
    for iy in 0..spec.y_count {
        let y = spec.y_value(iy);
        for n in 1..=spec.n_max {
            for i in 0..=spec.i_cap {
                let stored = table.query(y, n, i).unwrap();
                let direct = outcome_probability_bought(y, n, i).unwrap();
                assert_eq!(stored, direct, "y={y} n={n} i={i}");
            }
        }
    }
    let mut bytes = Vec::new();
    table.write_to(&mut bytes).unwrap();
    let restored = LatticeTable::read_from(&mut bytes.as_slice()).unwrap();
    assert_eq!(restored, table);
    let mut again = Vec::new();
    restored.write_to(&mut again).unwrap();
    assert_eq!(bytes, again, "round trip must be byte-identical");
    assert_runtime(start.elapsed(), Duration::from_secs(30), "criterion 11");
    println!("criterion 11 PASS - reduced lattice matches pointwise; round trip byte-identical");
}

#[test]
fn criterion_12_full_scale_needs_override() {
    let spec = LatticeSpec::full_scale();
    assert!(matches!(
        build_lattice(&spec),
        Err(LatticeError::TooLarge { .. })
    ));
    println!("criterion 12 PASS - full-scale build refused without an explicit cap");
}
