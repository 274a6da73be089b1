use tsrk::experiments::{gen_uniform_system, run_comparison, ExperimentConfig};
use tsrk::matrix::{standardize, DenseMatrix};
use tsrk::solvers::{solve, Method, SolveOptions, StoppingRule};
use tsrk::Error;

#[test]
fn consistent_system_is_solved_to_high_accuracy() {
    let (sys, xt) = gen_uniform_system(50, 10, 0.0, 5).unwrap();
    let mut opts = SolveOptions::new(Method::TwoSubspace, 500, 5);
    opts.x_true = Some(xt);
    let trace = solve(&sys, &opts).unwrap();
    assert_eq!(trace.records.len(), 501);
    assert_eq!(trace.final_record().row_touches, 1000);
    assert!(trace.final_record().error.unwrap() < 1e-6);
}

#[test]
fn every_method_converges_on_an_incoherent_system() {
    let (sys, xt) = gen_uniform_system(80, 8, -1.0, 6).unwrap();
    for method in Method::ALL {
        let mut opts = SolveOptions::new(method, 2000, 6);
        opts.x_true = Some(xt.clone());
        let trace = solve(&sys, &opts).unwrap();
        assert!(trace.final_record().error.unwrap() < 1e-8, "{method}");
    }
}

#[test]
fn identity_system_is_solved() {
    let a = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
    let sys = standardize(&a, &[5.0, 7.0]).unwrap();
    let trace = solve(&sys, &SolveOptions::new(Method::Cyclic, 2, 0)).unwrap();
    assert_eq!(trace.solution, vec![5.0, 7.0]);
    let trace = solve(&sys, &SolveOptions::new(Method::TwoSubspace, 1, 0)).unwrap();
    assert!(trace
        .solution
        .iter()
        .zip([5.0, 7.0])
        .all(|(a, b)| (a - b).abs() < 1e-14));
}

#[test]
fn solve_is_deterministic_per_seed() {
    let (sys, _) = gen_uniform_system(40, 6, 0.3, 8).unwrap();
    for method in Method::ALL {
        let a = solve(&sys, &SolveOptions::new(method, 100, 42)).unwrap();
        let b = solve(&sys, &SolveOptions::new(method, 100, 42)).unwrap();
        assert_eq!(a, b);
    }
    let a = solve(&sys, &SolveOptions::new(Method::Randomized, 100, 1)).unwrap();
    let b = solve(&sys, &SolveOptions::new(Method::Randomized, 100, 2)).unwrap();
    assert_ne!(a.solution, b.solution);
}

#[test]
fn residual_threshold_stops_early() {
    let (sys, _) = gen_uniform_system(60, 5, -1.0, 9).unwrap();
    let mut opts = SolveOptions::new(Method::TwoSubspace, 10_000, 9);
    opts.stop = StoppingRule {
        max_iterations: 10_000,
        residual_threshold: Some(1e-6),
    };
    let trace = solve(&sys, &opts).unwrap();
    assert!(trace.threshold_reached);
    assert!(trace.iterations() < 10_000);
    assert!(trace.final_record().residual <= 1e-6);
    let before = &trace.records[trace.records.len() - 2];
    assert!(before.residual > 1e-6);
}

#[test]
fn all_parallel_rows_have_no_usable_pair() {
    let a = DenseMatrix::from_rows(&[[1.0, 1.0], [2.0, 2.0], [-1.0, -1.0]]).unwrap();
    let sys = standardize(&a, &[1.0, 2.0, -1.0]).unwrap();
    let err = solve(&sys, &SolveOptions::new(Method::TwoSubspace, 10, 0)).unwrap_err();
    assert_eq!(err, Error::NoUsablePair);
}

#[test]
fn comparison_is_reproducible_and_parallel_safe() {
    let cfg = ExperimentConfig {
        m: 40,
        n: 5,
        c: 0.5,
        noise_norm: 0.01,
        iterations: 50,
        trials: 8,
        seed: 3,
        methods: vec![Method::Randomized, Method::TwoSubspace],
        sign_adjust: false,
    };
    let a = run_comparison(&cfg).unwrap();
    let b = run_comparison(&cfg).unwrap();
    // Debug form, since the unmeasured difference-matrix factor is NaN.
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
    assert_eq!(a.common_final_row_touches(), 50);
    let rk = a.method(Method::Randomized).unwrap();
    assert_eq!(rk.points.len(), 51);
    let p = rk.at_row_touches(50).unwrap();
    assert!(p.min <= p.median && p.median <= p.max && p.min <= p.mean && p.mean <= p.max);
}
