use mwvar::analytic::DistributionSpec;
use mwvar::estimators::Estimator;
use mwvar::simulation::{self, ExperimentConfig};

fn config(json: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(json).unwrap()
}

#[test]
fn unbiased_estimator_has_no_detectable_bias() {
    let cfg = config(
        r#"{"experiment": "bias", "nsim": 100000, "seed": 21, "estimators": ["N", "SHS"],
            "specs": [{"name": "normal", "params": {"theta": 0.65, "sd1": 1, "sd2": 3}},
                      {"name": "exponential", "params": {"theta": 0.9}},
                      {"name": "poisson", "params": {"lambda1": 1, "lambda2": 1}},
                      {"name": "ordinal5", "params": {"a2": 6}}]}"#,
    );
    let rows = simulation::run_bias(&cfg).unwrap();
    for row in rows.iter().filter(|r| r.estimator == Estimator::Unbiased) {
        assert!(row.bias.abs() <= 3.0 * row.se, "{row:?}");
    }
    // with heavy ties SHS is biased downwards by τ/(4(n1 − 1)(n2 − 1))
    let shs = rows.iter().find(|r| r.estimator == Estimator::Shs && r.spec.starts_with("poisson")).unwrap();
    let tau = DistributionSpec::poisson(1.0, 1.0).unwrap().ground_truth().unwrap().tau;
    let expected = -tau / (4.0 * 81.0);
    assert!((shs.bias - expected).abs() <= 3.0 * shs.se, "{shs:?} vs {expected}");
}

#[test]
fn qmse_of_unbiased_is_relative_variance() {
    let cfg = config(
        r#"{"experiment": "qmse", "nsim": 2000, "seed": 4, "estimators": ["N"],
            "specs": [{"name": "exponential", "params": {"theta": 0.8}}]}"#,
    );
    let row = &simulation::run_qmse(&cfg).unwrap()[0];
    let target = DistributionSpec::exponential_theta(0.8).unwrap().ground_truth().unwrap().sigma_n_sq(10, 10);
    let expected = (row.variance + row.bias * row.bias) / target;
    assert!((row.qmse - expected).abs() < 1e-15);
}

#[test]
fn consistency_reaches_small_error() {
    let spec = DistributionSpec::exponential_theta(0.7).unwrap();
    let out = simulation::run_consistency(&spec, &[100, 1600], 2000, 3).unwrap();
    let v = &out.verdicts[0];
    assert!(v.monotone);
    let (n, l2, _) = v.points[1];
    assert_eq!(n, 1600);
    assert!(l2 < 0.05, "L2 error {l2} at N = 1600");
    assert_eq!(out.rows.len(), 2 * Estimator::ALL.len());
}

#[test]
fn seed_changes_results() {
    let text = |seed: u64| {
        let cfg = config(&format!(
            r#"{{"experiment": "bias", "nsim": 200, "seed": {seed}, "specs": [{{"name": "dmax", "params": {{"theta": 0.4}}}}]}}"#
        ));
        let mut buf = Vec::new();
        simulation::write_csv(&simulation::run(&cfg, Some(1)).unwrap().rows, &mut buf).unwrap();
        buf
    };
    assert_eq!(text(1), text(1));
    assert_ne!(text(1), text(2));
}

#[test]
fn grid_expands_in_order() {
    let cfg = config(
        r#"{"experiment": "bias", "nsim": 10, "estimators": ["DL"],
            "specs": [{"name": "dmax"}], "grid": {"param": "theta", "values": [0.2, 0.4, 0.6]}}"#,
    );
    let rows = simulation::run_bias(&cfg).unwrap();
    let thetas: Vec<f64> = rows.iter().map(|r| r.theta).collect();
    for (got, want) in thetas.iter().zip([0.2, 0.4, 0.6]) {
        assert!((got - want).abs() < 1e-9);
    }
}
