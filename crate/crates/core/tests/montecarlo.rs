use besov_empirica::montecarlo::concentration::chebyshev_bound;
use besov_empirica::montecarlo::{
    run_concentration_experiment, run_moment_experiment, run_roynette_experiment, run_sandwich_experiment,
    run_sandwich_with, Executor, ExperimentConfig, ProcessKind,
};
use besov_empirica::CoefficientTriangle;

fn ex(w: usize) -> Executor {
    Executor::new(w).unwrap()
}

#[test]
fn moments_center_and_normalize() {
    let config = ExperimentConfig { replicates: 4000, j_max: 8, seed: 5, ..ExperimentConfig::default() };
    let report = run_moment_experiment(&config, &ex(4)).unwrap();
    assert!(report.coverage.pass, "{:?}", report.coverage);
    for c in report.cells.iter().filter(|c| c.j == 5) {
        assert!(c.mean_alpha.abs() <= 4.0 * c.se_alpha, "k={} {}", c.k, c.mean_alpha);
    }
    assert!(report.oracle.is_empty());
    assert!(report.pass);
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    let config = ExperimentConfig { replicates: 300, j_max: 10, ..ExperimentConfig::default() };
    let a = run_sandwich_experiment(&config, &ex(1)).unwrap();
    let b = run_sandwich_experiment(&config, &ex(7)).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let a = run_moment_experiment(&config, &ex(1)).unwrap();
    let b = run_moment_experiment(&config, &ex(3)).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn concentration_respects_bound() {
    let config = ExperimentConfig { replicates: 2000, seed: 8, ..ExperimentConfig::default() };
    let report = run_concentration_experiment(&config, &ex(4)).unwrap();
    assert_eq!(report.cells.len(), 3 * 9);
    for c in &report.cells {
        assert_eq!(c.bound, chebyshev_bound(c.n, c.j));
        assert!(c.pass, "n={} j={}: {} > {}", c.n, c.j, c.frequency, c.bound);
    }
}

#[test]
fn continuous_concentration_also_runs() {
    let config = ExperimentConfig {
        process: ProcessKind::EmpiricalContinuous,
        replicates: 200,
        n_values: vec![50],
        j_max: 8,
        ..ExperimentConfig::default()
    };
    let report = run_concentration_experiment(&config, &ex(2)).unwrap();
    assert_eq!(report.cells.len(), 5);
}

#[test]
fn sandwich_frequency_rises_with_level() {
    let config = ExperimentConfig { replicates: 2000, j_max: 14, seed: 3, ..ExperimentConfig::default() };
    let report = run_sandwich_experiment(&config, &ex(4)).unwrap();
    assert!(report.pass);
    let levels = &report.levels;
    for w in levels[6..].windows(2) {
        let slack = 3.0 * (w[0].se.powi(2) + w[1].se.powi(2)).sqrt();
        assert!(w[1].in_band_frequency >= w[0].in_band_frequency - slack, "j={}", w[1].j);
    }
    // The continuous coefficients stay within the discrepancy bound of the step ones.
    for v in report.version_comparison.as_ref().unwrap() {
        assert!(v.max_discrepancy <= v.discrepancy_bound, "j={}", v.j);
    }
    let cmp = report.version_comparison.as_ref().unwrap();
    assert!(cmp[14].mean_squared_statistic_continuous < 0.5 * cmp[14].mean_squared_statistic_step);
}

#[test]
fn injected_triangles() {
    let config = ExperimentConfig { replicates: 100, j_max: 10, ..ExperimentConfig::default() };
    let zero = run_sandwich_with(&config, &ex(2), |_| CoefficientTriangle::zeros(10)).unwrap();
    assert!(zero.levels.iter().all(|l| l.in_band_frequency == 0.0));
    let ones = run_sandwich_with(&config, &ex(2), |_| CoefficientTriangle::filled(10, 1.0)).unwrap();
    assert!(ones.levels.iter().all(|l| l.in_band_frequency == 1.0));
}

#[test]
fn roynette_quartic_target() {
    let config = ExperimentConfig {
        process: ProcessKind::Brownian,
        replicates: 500,
        j_max: 12,
        p: 4.0,
        roynette_tolerance: 0.05,
        ..ExperimentConfig::default()
    };
    let report = run_roynette_experiment(&config, &ex(4)).unwrap();
    let target = 3f64.powf(0.25);
    assert!((report.target.unwrap() - target).abs() < 1e-12);
    assert!((report.levels[12].mean_statistic - target).abs() < 0.01);
    assert!(report.pass);
}

#[test]
fn roynette_rejects_empirical_process() {
    let config = ExperimentConfig::default();
    assert!(run_roynette_experiment(&config, &ex(1)).is_err());
    let gaussian = ExperimentConfig { process: ProcessKind::Bridge, ..ExperimentConfig::default() };
    assert!(run_sandwich_experiment(&gaussian, &ex(1)).is_err());
}
