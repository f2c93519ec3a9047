use std::f64::consts::PI;

use spectral_clt::experiments::{
    apply_override, parse_config, run_experiment, ExperimentConfig, ExperimentKind, Harness,
    ProcessConfig,
};
use spectral_clt::Error;

fn config(text: &str) -> ExperimentConfig {
    parse_config(text.as_bytes()).unwrap_or_else(|e| panic!("{e}"))
}

fn linear(coeffs: &[f64]) -> String {
    format!(
        r#"{{"kind":"fixed_freq_clt","process":{{"kind":"linear","coeffs":{coeffs:?}}},
            "n":1024,"replicates":400,"thetas":[1.0,2.0],"master_seed":5}}"#
    )
}

#[test]
fn scaling_the_process_scales_variances_exactly() {
    let alpha = 3.0;
    let base = run_experiment(&config(&linear(&[1.0, 0.5]))).unwrap();
    let scaled = run_experiment(&config(&linear(&[alpha, 0.5 * alpha]))).unwrap();
    for i in 0..2 {
        for key in ["var_re", "var_im", "cov_re_im", "target_var", "g"] {
            let k = format!("theta[{i}].{key}");
            let ratio = scaled.statistics[&k] / base.statistics[&k];
            assert!(
                (ratio / (alpha * alpha) - 1.0).abs() < 1e-10,
                "{k}: {ratio}"
            );
        }
        for key in ["ks_re", "ks_im", "corr"] {
            let k = format!("theta[{i}].{key}");
            assert!(
                (scaled.statistics[&k] - base.statistics[&k]).abs() < 1e-10,
                "{k}"
            );
        }
    }
    let verdicts = |r: &spectral_clt::experiments::Report| {
        r.verdicts
            .iter()
            .map(|(k, v)| (k.clone(), v.passed))
            .collect::<Vec<_>>()
    };
    assert_eq!(verdicts(&base), verdicts(&scaled));
}

#[test]
fn reruns_are_bit_identical_and_seeds_matter() {
    let cfg = config(&linear(&[1.0, 0.5]));
    let a = Harness::new(1).unwrap().run(&cfg).unwrap().to_json_string();
    let b = Harness::new(2).unwrap().run(&cfg).unwrap().to_json_string();
    assert_eq!(a, b);
    let mut other = cfg.clone();
    other.master_seed = 6;
    let c = run_experiment(&other).unwrap();
    let first = run_experiment(&cfg).unwrap();
    assert_ne!(
        c.statistics["theta[0].mean_re"],
        first.statistics["theta[0].mean_re"]
    );
}

#[test]
fn markov_observable_satisfies_clt() {
    let cfg = config(
        r#"{"kind":"fixed_freq_clt","n":1024,"replicates":4000,"thetas":[1.0,2.5],"master_seed":2,
            "process":{"kind":"markov","transition":[[0.5,0.25,0.25],[0.25,0.5,0.25],[0.25,0.25,0.5]],
                       "f":[1,0,-1]}}"#,
    );
    let r = run_experiment(&cfg).unwrap();
    assert!(r.all_passed(), "{:?}", r.failed());
    // g = c0 (1 + lambda)(1 - lambda) / |1 - lambda e^{i theta}|^2 with lambda = 1/4, c0 = 2/3
    let lambda: f64 = 0.25;
    let g = (2.0 / 3.0) * (1.0 - lambda * lambda)
        / (1.0 - 2.0 * lambda * 1.0f64.cos() + lambda * lambda);
    assert!((r.statistics["theta[0].g"] - g).abs() < 1e-12);
}

#[test]
fn gaussian_functional_distribution_experiments() {
    for (kind, h) in [("fixed_freq_clt", "sign"), ("periodogram_chi2", "cube")] {
        let cfg = config(&format!(
            r#"{{"kind":"{kind}","n":512,"replicates":4000,"thetas":[1.5],"master_seed":3,"pilot_factor":10,
                "process":{{"kind":"gaussian_functional","phi":0.5,"h":"{h}"}}}}"#
        ));
        let r = run_experiment(&cfg).unwrap();
        assert!(r.notes.iter().any(|n| n.contains("pilot")));
        assert!(r.all_passed(), "{kind}: {:?}", r.failed());
    }
}

#[test]
fn periodogram_rejects_spectral_zero() {
    let cfg = config(&format!(
        r#"{{"kind":"periodogram_chi2","process":{{"kind":"linear","coeffs":[1,1]}},
            "n":256,"replicates":100,"thetas":[{}]}}"#,
        PI - 1e-5
    ));
    assert!(matches!(
        run_experiment(&cfg),
        Err(Error::DegenerateFrequency { .. })
    ));
}

#[test]
fn override_is_echoed_in_report() {
    let mut v: serde_json::Value = serde_json::from_str(&linear(&[1.0])).unwrap();
    apply_override(&mut v, "n=256").unwrap();
    apply_override(&mut v, "tolerances.corr_sigmas=4").unwrap();
    let cfg = ExperimentConfig::from_json(&v).unwrap();
    let r = run_experiment(&cfg).unwrap();
    assert_eq!(r.parameters["n"], 256);
    assert_eq!(r.parameters["tolerances"]["corr_sigmas"], 4.0);
    assert_eq!(r.thresholds["corr_bound"], 4.0 / 20.0);
}

#[test]
fn long_memory_skips_limit_checks() {
    let mut cfg = ExperimentConfig::new(
        ExperimentKind::VarianceConvergence,
        ProcessConfig::NamedLinear {
            named: "slow_decay".into(),
            truncation: Some(2000),
            innovation: Default::default(),
        },
    );
    cfg.replicates = 100;
    cfg.thetas = vec![2.0];
    let r = run_experiment(&cfg).unwrap();
    assert!(r.notes.iter().any(|n| n.contains("limit checks skipped")));
    assert!(!r.verdicts.contains_key("theta[0].cesaro_limit"));
    assert!(r.verdicts.contains_key("theta[0].n4096.mc_vs_cesaro"));
    assert_eq!(r.statistics["process.truncation"], 2000.0);
}

#[test]
fn markov_uniform_bound_holds_for_random_reversible_chains() {
    // symmetric transition matrices are reversible with uniform pi
    for (a, b) in [(0.1, 0.3), (0.45, 0.05), (0.2, 0.2)] {
        let text = format!(
            r#"{{"kind":"regularity_diag","thetas":[0.7,1.9],"n_ladder":[16,1024],
                "process":{{"kind":"markov","transition":[[{},{a},{b}],[{a},{},{b}],[{b},{b},{}]],"f":[2,-1,-1]}}}}"#,
            1.0 - a - b,
            1.0 - a - b,
            1.0 - 2.0 * b
        );
        let r = run_experiment(&config(&text)).unwrap();
        for i in 0..2 {
            assert!(r.verdicts[&format!("theta[{i}].markov_bound")].passed);
            assert!(r.statistics[&format!("theta[{i}].max_bound_ratio")] <= 1.0);
        }
    }
}

#[test]
fn invariance_identity_for_markov_chain() {
    let cfg = config(
        r#"{"kind":"invariance_identity","process":"two_state(0.25)","n":1024,"replicates":300,"n_grid":64}"#,
    );
    let r = run_experiment(&cfg).unwrap();
    assert!(r.all_passed(), "ratio {}", r.statistics["ratio"]);
}
