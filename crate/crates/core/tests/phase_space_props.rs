mod oracle;

use std::f64::consts::PI;

use boasvr::phase_space::*;
use boasvr::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sine(n: usize, period: f64) -> Vec<f64> {
    (0..n).map(|t| (2.0 * PI * t as f64 / period).sin()).collect()
}

fn logistic(n: usize) -> Vec<f64> {
    let mut x = 0.3;
    (0..n)
        .map(|_| {
            let v = x;
            x = 4.0 * x * (1.0 - x);
            v
        })
        .collect()
}

/// Kennel false-neighbour fraction by plain nearest-neighbour scan.
fn fnn_reference(s: &[f64], m: usize, tau: usize, rtol: f64, atol: f64) -> f64 {
    let points = s.len() - m * tau;
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    let sigma = (s.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / s.len() as f64).sqrt();
    let lo = s.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut count = 0;
    for i in 0..points {
        let (mut best, mut best_d2) = (0, f64::INFINITY);
        for k in (0..points).filter(|&k| k != i) {
            let d2: f64 = (0..m).map(|j| (s[i + j * tau] - s[k + j * tau]).powi(2)).sum();
            if d2 < best_d2 {
                best = k;
                best_d2 = d2;
            }
        }
        let extra = (s[i + m * tau] - s[best + m * tau]).abs();
        let r = best_d2.sqrt().max(1e-12 * (hi - lo));
        if extra > rtol * r || (best_d2 + extra * extra).sqrt() / sigma > atol {
            count += 1;
        }
    }
    count as f64 / points as f64
}

#[test]
fn mi_of_constant_series_is_zero() {
    let flat = vec![3.0; 40];
    for tau in 0..10 {
        for bins in 2..12 {
            assert_eq!(mutual_information(&flat, tau, bins).unwrap(), 0.0);
        }
    }
}

#[test]
fn mi_of_alternating_series_is_one_bit() {
    let alt = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
    assert_eq!(mutual_information(&alt, 1, 2).unwrap(), 1.0);
}

#[test]
fn logistic_map_mi_matches_reference_and_drops_from_lag_zero() {
    let s = logistic(2000);
    let at0 = mutual_information(&s, 0, 16).unwrap();
    let at1 = mutual_information(&s, 1, 16).unwrap();
    assert!(at1 > 0.0 && at1 < at0, "MI(1) = {at1}, MI(0) = {at0}");
    for tau in 0..6 {
        let ours = mutual_information(&s, tau, 16).unwrap();
        let reference = oracle::mutual_information(&s, tau, 16);
        assert!((ours - reference).abs() < 1e-12, "tau {tau}: {ours} vs {reference}");
    }
}

#[test]
fn fnn_selects_two_dimensions_for_a_sine() {
    let s = sine(400, 40.0);
    let estimate = select_dimension(&s, 10, 8, &FnnParams::default()).unwrap();
    assert_eq!(estimate.dim, 2);
    assert!(estimate.converged);
    assert!(estimate.fractions[0] > 0.4, "m = 1 should fold the orbit");
}

#[test]
fn fnn_does_not_converge_on_uniform_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let noise: Vec<f64> = (0..500).map(|_| rng.gen()).collect();
    let estimate = select_dimension(&noise, 1, 10, &FnnParams::default()).unwrap();
    assert_eq!(estimate.dim, 10);
    assert!(!estimate.converged);
    assert_eq!(estimate.fractions.len(), 9);
}

#[test]
fn fnn_matches_reference_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noisy: Vec<f64> = sine(300, 23.0).iter().map(|v| v + rng.gen_range(-0.05..0.05)).collect();
    for (series, tau) in [(noisy, 6), (logistic(300), 1), (sine(200, 40.0), 10)] {
        for m in 1..6 {
            let ours = false_nearest_fraction(&series, m, tau, &FnnParams::default()).unwrap();
            assert_eq!(ours, fnn_reference(&series, m, tau, 15.0, 2.0), "m = {m}");
        }
    }
}

#[test]
fn delay_of_sine_is_a_minimum_before_half_period() {
    let estimate = select_delay(&sine(500, 40.0), 20, None).unwrap();
    assert!(estimate.local_minimum);
    assert!(estimate.delay < 20, "tau = {}", estimate.delay);
    let c = &estimate.curve;
    assert!(c[estimate.delay] < c[estimate.delay - 1] && c[estimate.delay] <= c[estimate.delay + 1]);
}

#[test]
fn short_inputs_are_rejected() {
    assert!(matches!(
        select_delay(&[1.0, 2.0, 3.0], 5, None),
        Err(Error::SeriesTooShort { .. })
    ));
    assert!(matches!(
        select_dimension(&sine(20, 8.0), 5, 6, &FnnParams::default()),
        Err(Error::SeriesTooShort { .. })
    ));
    assert!(matches!(mutual_information(&[1.0, 2.0], 2, 2), Err(Error::SeriesTooShort { .. })));
}

proptest! {
    #[test]
    fn embedding_follows_the_shape_law(n in 1usize..120, m in 1usize..7, tau in 1usize..12) {
        let s: Vec<f64> = (1..=n).map(|v| v as f64).collect();
        let spec = EmbeddingSpec::new(m, tau).unwrap();
        let expected = n as i64 - 1 - (m as i64 - 1) * tau as i64;
        match embed(&s, spec) {
            Ok(ds) => {
                prop_assert!(expected >= 1);
                prop_assert_eq!(ds.len() as i64, expected);
                for i in 0..ds.len() {
                    for j in 0..m {
                        prop_assert_eq!(ds.inputs[i][j], s[i + j * tau]);
                    }
                    prop_assert_eq!(ds.targets[i], s[i + (m - 1) * tau + 1]);
                    prop_assert_eq!(ds.target_index[i], i + (m - 1) * tau + 1);
                }
            }
            Err(e) => {
                prop_assert!(expected < 1);
                prop_assert!(matches!(e, Error::SeriesTooShort { .. }), "unexpected error");
            }
        }
    }

    #[test]
    fn normalization_is_monotone_and_round_trips(
        values in prop::collection::vec(-1e4f64..1e4, 2..60),
    ) {
        let series = TimeSeries::new("p", values.clone()).unwrap();
        let Ok((scaled, params)) = normalize(&series) else {
            // constant input
            prop_assert!(values.iter().all(|v| *v == values[0]));
            return Ok(());
        };
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for (a, sa) in values.iter().zip(scaled.values()) {
            if *a == lo { prop_assert_eq!(*sa, 0.0); }
            if *a == hi { prop_assert_eq!(*sa, 1.0); }
            for (b, sb) in values.iter().zip(scaled.values()) {
                if a <= b { prop_assert!(sa <= sb); }
            }
        }
        for (orig, back) in values.iter().zip(denormalize(scaled.values(), &params)) {
            prop_assert!((orig - back).abs() <= 1e-12 * orig.abs().max(hi - lo));
        }
    }

    #[test]
    fn mi_is_symmetric_and_non_negative(
        values in prop::collection::vec(-10.0f64..10.0, 12..80),
        tau in 0usize..6,
        bins in 2usize..9,
    ) {
        let forward = mutual_information(&values, tau, bins).unwrap();
        // reversing the series swaps every (x_j, x_{j+tau}) pair
        let reversed: Vec<f64> = values.iter().rev().cloned().collect();
        prop_assert_eq!(forward, mutual_information(&reversed, tau, bins).unwrap());
        prop_assert!(forward >= 0.0);
    }

    #[test]
    fn delay_is_bounded_and_deterministic(
        values in prop::collection::vec(-1.0f64..1.0, 30..90),
        max_delay in 2usize..15,
    ) {
        let a = select_delay(&values, max_delay, None).unwrap();
        prop_assert!(a.delay >= 1 && a.delay <= max_delay);
        prop_assert_eq!(a, select_delay(&values, max_delay, None).unwrap());
    }

    #[test]
    fn fnn_fraction_is_a_fraction(
        values in prop::collection::vec(-1.0f64..1.0, 40..120),
        m in 1usize..5,
        tau in 1usize..4,
    ) {
        let f = false_nearest_fraction(&values, m, tau, &FnnParams::default()).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
    }

    #[test]
    fn split_is_chronological_floor(rows in 2usize..200, frac in 0.05f64..0.95) {
        let s: Vec<f64> = (0..rows + 1).map(|v| v as f64).collect();
        let ds = embed(&s, EmbeddingSpec::new(1, 1).unwrap()).unwrap();
        let train_rows = (rows as f64 * frac).floor() as usize;
        match split(&ds, frac) {
            Ok((train, test)) => {
                prop_assert_eq!(train.len(), train_rows);
                prop_assert_eq!(test.len(), rows - train_rows);
                prop_assert!(train.target_index.last() < test.target_index.first());
            }
            Err(e) => {
                prop_assert!(train_rows == 0 || train_rows == rows);
                prop_assert!(matches!(e, Error::EmptyPartition { .. }), "unexpected error");
            }
        }
    }
}
