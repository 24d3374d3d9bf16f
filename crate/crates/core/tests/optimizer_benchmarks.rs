use std::sync::Mutex;

use boasvr::optimizers::{build, Algorithm, AlgorithmParams, Boa, BoaParams, CommonConfig};
use boasvr::optimizers::{Objective, OptimizationResult, SearchSpace};
use boasvr::Error;

fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn box3() -> SearchSpace {
    SearchSpace::cube(3, -10.0, 10.0).unwrap()
}

fn common(seed: u64) -> CommonConfig {
    CommonConfig {
        population: 20,
        max_iterations: 50,
        seed,
    }
}

fn run(algorithm: Algorithm, seed: u64, objective: &dyn Objective) -> OptimizationResult {
    build(algorithm, common(seed), &AlgorithmParams::default())
        .unwrap()
        .minimize(objective, &box3())
        .unwrap()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn assert_monotone(history: &[f64]) {
    for pair in history.windows(2) {
        assert!(pair[1] <= pair[0], "history rose from {} to {}", pair[0], pair[1]);
    }
}

#[test]
fn boa_solves_the_sphere() {
    let best: Vec<f64> = (0..20)
        .map(|seed| {
            let result = run(Algorithm::Boa, seed, &sphere);
            assert_monotone(&result.history);
            assert_eq!(result.history.len(), 51);
            result.best_fitness
        })
        .collect();
    let m = median(best);
    assert!(m <= 1e-3, "median best fitness {m}");
}

#[test]
fn baselines_make_progress_on_the_sphere() {
    for algorithm in &Algorithm::IMPLEMENTED[1..] {
        let best: Vec<f64> = (0..20)
            .map(|seed| {
                let result = run(*algorithm, seed, &sphere);
                assert_monotone(&result.history);
                result.best_fitness
            })
            .collect();
        let m = median(best);
        assert!(m <= 1e-1, "{algorithm}: median best fitness {m}");
    }
}

#[test]
fn switch_probability_extremes_pick_one_move_kind() {
    for (p, global) in [(1.0, true), (0.0, false)] {
        let params = BoaParams {
            switch_probability: p,
            ..BoaParams::default()
        };
        let (_, moves) = Boa::new(common(3), params).unwrap().run(&sphere, &box3()).unwrap();
        let total = 20 * 50;
        if global {
            assert_eq!((moves.global, moves.local), (total, 0));
        } else {
            assert_eq!((moves.global, moves.local), (0, total));
        }
    }
}

#[test]
fn every_evaluated_position_respects_the_bounds() {
    let space = SearchSpace::new(vec![-1.0, 0.0, 5.0], vec![1.0, 0.5, 9.0]).unwrap();
    // minimum far outside the box drives every algorithm onto the walls
    let pull = |x: &[f64]| (x[0] - 50.0).powi(2) + (x[1] + 50.0).powi(2) + x[2] * x[2];
    for algorithm in Algorithm::IMPLEMENTED {
        let seen = Mutex::new(Vec::new());
        let audited = |x: &[f64]| {
            seen.lock().unwrap().push(x.to_vec());
            pull(x)
        };
        build(algorithm, common(9), &AlgorithmParams::default())
            .unwrap()
            .minimize(&audited, &space)
            .unwrap();
        let seen = seen.into_inner().unwrap();
        assert!(!seen.is_empty());
        for x in &seen {
            assert!(space.contains(x), "{algorithm} evaluated {x:?}");
        }
    }
}

#[test]
fn runs_are_reproducible() {
    let rastrigin = |x: &[f64]| {
        x.iter()
            .map(|v| v * v - 10.0 * (2.0 * std::f64::consts::PI * v).cos() + 10.0)
            .sum::<f64>()
    };
    for algorithm in Algorithm::IMPLEMENTED {
        let a = run(algorithm, 42, &rastrigin);
        let b = run(algorithm, 42, &rastrigin);
        assert_eq!(a.best_position, b.best_position, "{algorithm}");
        assert_eq!(a.best_fitness.to_bits(), b.best_fitness.to_bits(), "{algorithm}");
        assert_eq!(a.history, b.history, "{algorithm}");
        assert_eq!(a.evaluations, b.evaluations, "{algorithm}");
        let c = run(algorithm, 43, &rastrigin);
        assert_ne!(a.history, c.history, "{algorithm}: seed ignored");
    }
}

#[test]
fn constant_objective_is_reported_as_is() {
    for algorithm in Algorithm::IMPLEMENTED {
        let result = run(algorithm, 1, &|_: &[f64]| 7.0);
        assert_eq!(result.best_fitness, 7.0, "{algorithm}");
        assert!(result.history.iter().all(|&h| h == 7.0), "{algorithm}");
    }
}

#[test]
fn boa_evaluates_population_times_iterations_plus_one() {
    for (population, iterations) in [(20, 50), (7, 3), (1, 1)] {
        let config = CommonConfig {
            population,
            max_iterations: iterations,
            seed: 0,
        };
        let result = Boa::new(config, BoaParams::default())
            .unwrap()
            .run(&sphere, &box3())
            .unwrap()
            .0;
        assert_eq!(result.evaluations, population * (iterations + 1));
        assert_eq!(result.history.len(), iterations + 1);
    }
}

#[test]
fn non_finite_objective_aborts() {
    for algorithm in Algorithm::IMPLEMENTED {
        let bad = |x: &[f64]| if x[0] > 5.0 { f64::NAN } else { sphere(x) };
        let err = build(algorithm, common(2), &AlgorithmParams::default())
            .unwrap()
            .minimize(&bad, &box3())
            .unwrap_err();
        assert!(matches!(err, Error::ObjectiveNonFinite { .. }), "{algorithm}: {err}");
    }
}
