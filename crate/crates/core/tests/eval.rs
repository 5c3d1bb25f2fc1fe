use tkt_core::eval::{generate_corpus, inject_anomaly, subset_study, AnomalySpec, KFoldOptions, WorkloadSpec};
use tkt_core::PolicyConfig;

const SERVICE: &str = include_str!("../../../data/service.toml");

#[test]
fn sensitivity_grows_with_training_fraction() {
    let spec = WorkloadSpec::from_toml(SERVICE).unwrap();
    let valid = generate_corpus(&spec, 100).unwrap();
    let invalid: Vec<_> = generate_corpus(&WorkloadSpec { seed: 99, ..spec }, 40)
        .unwrap()
        .iter()
        .map(|t| inject_anomaly(t, &AnomalySpec::SlowOp { label: "auth".into(), factor: 4.0 }).unwrap())
        .collect();
    let configs = [PolicyConfig::from_id("M1").unwrap(), PolicyConfig::from_id("G3").unwrap()];
    let opts = KFoldOptions { folds: 5, repetitions: 1, seed: 2, k: 2 };
    let r = subset_study(&valid, &invalid, &configs, &[0.2, 0.5, 1.0], 3, &opts).unwrap();
    for cfg in ["M1", "G3"] {
        let se: Vec<f64> = [0.2, 0.5, 1.0].iter().map(|&f| r.row(cfg, f).unwrap().sensitivity).collect();
        assert!(se[0] <= se[2], "{cfg}: {se:?}");
        assert!(r.row(cfg, 1.0).unwrap().specificity.unwrap() >= 0.9);
    }
}

#[test]
fn reordered_traces_are_rejected() {
    let spec = WorkloadSpec::from_toml(SERVICE).unwrap();
    let valid = generate_corpus(&spec, 50).unwrap();
    let invalid: Vec<_> = valid.iter().map(|t| inject_anomaly(t, &AnomalySpec::Reorder).unwrap()).collect();
    let r = subset_study(&valid, &invalid, &[PolicyConfig::from_id("M16").unwrap()], &[1.0], 1, &KFoldOptions::default())
        .unwrap();
    assert_eq!(r.rows[0].specificity, Some(1.0));
}
