//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use t2m_core::dynamics::{integrate_jacobi, integrate_trajectory};
use t2m_core::verify::{run_verify, sphere_convergence_errors, CheckRecord, Expect, Suite, VerifyOptions};
use t2m_core::*;

struct Verdict {
    pass: bool,
    detail: String,
}

fn sphere_sin_field() -> Result<(f64, Duration)> {
    let start = Instant::now();
    let model = build_model(&ModelSpec::Sphere { radius: 1.0 })?;
    let d = DiffStrategy::default();
    let init = FirstOrderState::new(vec![PI / 2.0, 0.0], vec![0.0, 1.0])?;
    let traj = integrate_trajectory(model.as_ref(), &NoForce, &init, &IntegratorConfig::new(1e-3, PI / 2.0), &d)?;
    let jac = integrate_jacobi(model.as_ref(), &NoForce, &traj, &[0.0, 0.0], &[1.0, 0.0], &d)?;
    let err = jac
        .t
        .iter()
        .zip(jac.w.as_ref().unwrap())
        .map(|(t, w)| (w[0] - t.sin()).abs())
        .fold(0.0, f64::max);
    Ok((err, start.elapsed()))
}

fn criterion_1() -> Verdict {
    match sphere_sin_field() {
        Ok((err, elapsed)) => Verdict {
            pass: err < 1e-6 && elapsed < Duration::from_secs(1),
            detail: format!("sup |w - sin t| = {err:.3e} (tol 1e-6), runtime {:.3} s (limit 1 s)", elapsed.as_secs_f64()),
        },
        Err(e) => Verdict {
            pass: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Folds the records selected by `keep` into one verdict.
fn from_records(records: &[CheckRecord], keep: impl Fn(&str) -> bool, expected: usize) -> Verdict {
    let chosen: Vec<&CheckRecord> = records.iter().filter(|r| keep(&r.name)).collect();
    let pass = chosen.len() == expected && chosen.iter().all(|r| r.pass);
    let mut parts: Vec<String> = chosen
        .iter()
        .map(|r| {
            let rel = if r.expect == Expect::Below { "<" } else { ">" };
            let mark = if r.pass { "" } else { " !" };
            format!("{} {:.2e} {rel} {:.0e}{mark}", r.name, r.sup_residual, r.tolerance)
        })
        .collect();
    if chosen.len() != expected {
        parts.push(format!("expected {expected} checks, found {}", chosen.len()));
    }
    Verdict {
        pass,
        detail: parts.join("; "),
    }
}

fn criterion_8() -> Verdict {
    match sphere_convergence_errors(0.05) {
        Ok((coarse, fine)) => {
            let ratio = coarse / fine;
            Verdict {
                pass: (12.0..=20.0).contains(&ratio),
                detail: format!("error ratio {ratio:.3} (errors {coarse:.3e}, {fine:.3e}), required in [12, 20]"),
            }
        }
        Err(e) => Verdict {
            pass: false,
            detail: format!("error: {e}"),
        },
    }
}

fn main() -> ExitCode {
    let c1 = criterion_1();

    let suites = vec![
        Suite::V2,
        Suite::Oracle,
        Suite::Miron,
        Suite::Drag,
        Suite::Horizontality,
        Suite::Homogeneity,
        Suite::Covariance,
    ];
    let report = match run_verify(&VerifyOptions {
        suites,
        ..Default::default()
    }) {
        Ok(r) => r,
        Err(e) => {
            println!("FAIL all criteria: verify suite errored: {e}");
            return ExitCode::FAILURE;
        }
    };
    let recs = &report.records[..];
    let oracle_models = ["sphere", "flat_polar", "hyperbolic_half_plane", "drag"];

    let verdicts = [
        ("sphere Jacobi closed form", c1),
        (
            "v2 certification and control",
            from_records(recs, |n| n == "v2.sphere_equator" || n == "v2.sphere_negative_control", 2),
        ),
        (
            "oracle equivalence",
            from_records(recs, |n| oracle_models.iter().any(|m| n == format!("oracle.{m}")), 4),
        ),
        ("Miron difference", from_records(recs, |n| n.starts_with("miron."), 9)),
        ("drag closed form and coefficients", from_records(recs, |n| n.starts_with("drag."), 3)),
        (
            "horizontality of geodesics and control",
            from_records(recs, |n| n.starts_with("horizontality."), 7),
        ),
        ("Euler and contraction identities", from_records(recs, |n| n.starts_with("homogeneity."), 18)),
        ("RK4 convergence order", criterion_8()),
        ("chart covariance", from_records(recs, |n| n.starts_with("covariance."), 3)),
    ];

    let mut all = true;
    for (i, (title, v)) in verdicts.iter().enumerate() {
        all &= v.pass;
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {}: {title}: {}", i + 1, v.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
