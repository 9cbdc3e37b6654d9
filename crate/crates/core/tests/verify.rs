use t2m_core::verify::*;

fn quick() -> Vec<Suite> {
    vec![
        Suite::JacobiClosedForm,
        Suite::Drag,
        Suite::Convergence,
        Suite::Energy,
        Suite::Transport,
        Suite::Remark,
        Suite::CrossCheck,
    ]
}

#[test]
fn quick_suites_pass_and_are_deterministic() {
    let opts = VerifyOptions {
        suites: quick(),
        ..Default::default()
    };
    let a = run_verify(&opts).unwrap();
    let b = run_verify(&opts).unwrap();
    assert!(a.pass, "{:#?}", a.failures().collect::<Vec<_>>());
    assert_eq!(a, b);
    let names: Vec<_> = a.records.iter().map(|r| r.name.clone()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    assert!(names.iter().any(|n| n == "drag.jacobi_closed_form"));
    assert!(names.iter().all(|n| !n.starts_with("homogeneity")));
}

#[test]
fn shrunken_tolerances_fail_but_controls_keep_their_threshold() {
    let report = run_verify(&VerifyOptions {
        suites: vec![Suite::JacobiClosedForm, Suite::Horizontality],
        tolerance_scale: 1e-30,
        ..Default::default()
    })
    .unwrap();
    assert!(!report.pass);
    let control = report
        .records
        .iter()
        .find(|r| r.name == "horizontality.sphere_negative_control")
        .unwrap();
    assert!(control.pass && control.expect == Expect::Above && control.tolerance == 1.0);
    assert!(report.failures().all(|r| r.expect == Expect::Below));
}

#[test]
fn invalid_tolerance_scale_is_rejected() {
    for scale in [0.0, -1.0, f64::NAN] {
        assert!(run_verify(&VerifyOptions {
            suites: vec![Suite::Remark],
            tolerance_scale: scale,
            ..Default::default()
        })
        .is_err());
    }
}

#[test]
fn seed_changes_sampled_states_only() {
    let run = |seed| {
        run_verify(&VerifyOptions {
            seed,
            suites: vec![Suite::CrossCheck],
            ..Default::default()
        })
        .unwrap()
    };
    let (a, b) = (run(1), run(2));
    assert!(a.pass && b.pass);
    assert_eq!(a.records.len(), b.records.len());
    assert_ne!(a.records, b.records);
}

#[test]
fn report_round_trips_through_json() {
    let report = run_verify(&VerifyOptions {
        suites: vec![Suite::Remark, Suite::Convergence],
        ..Default::default()
    })
    .unwrap();
    let text = serde_json::to_string(&report).unwrap();
    let back: VerifyReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, report);
}
