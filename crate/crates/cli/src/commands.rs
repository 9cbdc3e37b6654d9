//! The four subcommands. Each returns the JSON document it prints.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use t2m_core::connections::{berwald_curvatures, connection_pack, miron_dual_coefficients, our_dual_coefficients};
use t2m_core::dynamics::{
    deviation_oracle, horizontality_residual, integrate_jacobi, integrate_trajectory, interior_sup, on_extension_y2,
    v2_residual, OracleOptions,
};
use t2m_core::metric::metric_tensor;
use t2m_core::verify::{relative_sup_error, run_verify, Expect, Suite, VerifyOptions, VerifyReport};
use t2m_core::{FirstOrderState, SecondOrderState, Trajectory};

use crate::at::AtState;
use crate::config::Scenario;
use crate::error::{CliError, CliResult};
use crate::output::{write_json, write_trajectory_csv};

/// Where files go: config paths when given (relative ones under `out_dir`),
/// default names under `out_dir` otherwise.
pub struct OutputPlan {
    pub out_dir: PathBuf,
}

impl OutputPlan {
    fn resolve(&self, configured: Option<&PathBuf>, default: &str) -> PathBuf {
        match configured {
            Some(p) if p.is_absolute() => p.clone(),
            Some(p) => self.out_dir.join(p),
            None => self.out_dir.join(default),
        }
    }
}

fn runtime<T>(r: t2m_core::Result<T>) -> CliResult<T> {
    r.map_err(CliError::runtime)
}

/// The state at which `coeffs` evaluates: `--at` when given, the config's
/// initial data otherwise; a missing `y2` is put on the trajectory's extension.
pub fn coeffs_state(sc: &Scenario, at: Option<&AtState>) -> CliResult<SecondOrderState> {
    let (x, y, y2) = match at {
        Some(a) => (a.x.clone(), a.y.clone(), a.y2.clone()),
        None => {
            let init = sc.initial()?;
            (init.x.clone(), init.y.clone(), None)
        }
    };
    let n = sc.config.dim();
    if x.len() != n {
        return Err(CliError::Config(format!("state has dimension {}, model dimension is {n}", x.len())));
    }
    sc.model
        .check_domain(&x)
        .map_err(|e| CliError::Config(format!("state outside the model domain: {e}")))?;
    let first = FirstOrderState::new(x.clone(), y.clone()).map_err(CliError::config)?;
    if first.speed() <= sc.model.y_min() {
        return Err(CliError::Config(format!(
            "velocity norm {:e} is inside the singular cone (radius {:e})",
            first.speed(),
            sc.model.y_min()
        )));
    }
    let y2 = match y2 {
        Some(v) => v,
        None => runtime(on_extension_y2(sc.model.as_ref(), sc.force.as_ref(), &x, &y, &sc.config.diff))?,
    };
    SecondOrderState::new(x, y, y2).map_err(CliError::config)
}

pub fn cmd_coeffs(sc: &Scenario, at: Option<&AtState>, plan: &OutputPlan) -> CliResult<Value> {
    let s2 = coeffs_state(sc, at)?;
    let s = s2.first_order();
    let (m, f, d) = (sc.model.as_ref(), sc.force.as_ref(), &sc.config.diff);
    let g = runtime(metric_tensor(m, &s, d))?;
    let pack = runtime(connection_pack(m, &s, d))?;
    let curv = runtime(berwald_curvatures(m, &s, d))?;
    let ours = runtime(our_dual_coefficients(m, f, &s2, d))?;
    let miron = runtime(miron_dual_coefficients(m, &s2, d))?;
    let doc = json!({
        "g": g.to_rows(),
        "G": pack.spray,
        "N": pack.n.to_rows(),
        "L_berwald": pack.berwald.to_nested(),
        "R_tor": curv.r_tor.to_nested(),
        "M1_ours": ours.m1.to_rows(),
        "M2_ours": ours.m2.to_rows(),
        "M1_miron": miron.m1.to_rows(),
        "M2_miron": miron.m2.to_rows(),
    });
    if let Some(p) = &sc.config.outputs.report_json {
        write_json(&plan.resolve(Some(p), "coeffs.json"), &doc)?;
    }
    Ok(doc)
}

fn trajectory(sc: &Scenario) -> CliResult<(FirstOrderState, Trajectory)> {
    let init = sc.initial()?;
    let cfg = sc.integrator()?;
    let start = FirstOrderState::new(init.x.clone(), init.y.clone()).map_err(CliError::config)?;
    let traj = runtime(integrate_trajectory(sc.model.as_ref(), sc.force.as_ref(), &start, &cfg, &sc.config.diff))?;
    Ok((start, traj))
}

fn base_summary(command: &str, sc: &Scenario, traj: &Trajectory, csv: &Path) -> Value {
    json!({
        "command": command,
        "model": sc.config.model.kind(),
        "samples": traj.len(),
        "dt": traj.dt,
        "t_final": traj.t.last(),
        "x_final": traj.x.last(),
        "y_final": traj.y.last(),
        "trajectory_csv": csv.display().to_string(),
    })
}

pub fn cmd_geodesic(sc: &Scenario, plan: &OutputPlan) -> CliResult<Value> {
    let (_, traj) = trajectory(sc)?;
    let (m, f, d) = (sc.model.as_ref(), sc.force.as_ref(), &sc.config.diff);
    let mc = |s: &SecondOrderState| our_dual_coefficients(m, f, s, d);
    let (h1, h2) = runtime(horizontality_residual(&traj, mc))?;
    let csv = plan.resolve(sc.config.outputs.trajectory_csv.as_ref(), "geodesic.csv");
    write_trajectory_csv(&csv, &traj, &[("res_h1", &h1), ("res_h2", &h2)])?;
    let mut summary = base_summary("geodesic", sc, &traj, &csv);
    summary["sup_res_h1"] = json!(interior_sup(&h1));
    summary["sup_res_h2"] = json!(interior_sup(&h2));
    let out = plan.resolve(sc.config.outputs.report_json.as_ref(), "geodesic_summary.json");
    write_json(&out, &summary)?;
    Ok(summary)
}

/// Relative sup-error budget of the oracle comparison.
pub const ORACLE_TOLERANCE: f64 = 1e-4;

pub fn cmd_jacobi(sc: &Scenario, oracle: bool, plan: &OutputPlan) -> CliResult<Value> {
    let init = sc.initial()?;
    let (w0, w0dot) = match (&init.w, &init.w_dot) {
        (Some(w), Some(wd)) => (w.clone(), wd.clone()),
        _ => return Err(CliError::Config("jacobi needs initial.w and initial.w_dot".into())),
    };
    let (start, traj) = trajectory(sc)?;
    let (m, f, d) = (sc.model.as_ref(), sc.force.as_ref(), &sc.config.diff);
    let jac = runtime(integrate_jacobi(m, f, &traj, &w0, &w0dot, d))?;
    let mc = |s: &SecondOrderState| our_dual_coefficients(m, f, s, d);
    let (h1, h2) = runtime(horizontality_residual(&jac, mc))?;
    let v2 = runtime(v2_residual(&jac, mc))?;
    let csv = plan.resolve(sc.config.outputs.trajectory_csv.as_ref(), "jacobi.csv");
    write_trajectory_csv(&csv, &jac, &[("res_h1", &h1), ("res_h2", &h2), ("res_v2", &v2)])?;
    let mut summary = base_summary("jacobi", sc, &jac, &csv);
    summary["sup_res_h1"] = json!(interior_sup(&h1));
    summary["sup_res_h2"] = json!(interior_sup(&h2));
    summary["sup_res_v2"] = json!(interior_sup(&v2));
    summary["w_final"] = json!(jac.w.as_ref().and_then(|w| w.last()));
    if oracle {
        let opts = OracleOptions {
            richardson: true,
            ..OracleOptions::default()
        };
        let cfg = sc.integrator()?;
        let orc = runtime(deviation_oracle(m, f, &start, &w0, &w0dot, &cfg, &opts, d))?;
        let err = relative_sup_error(jac.w.as_ref().unwrap(), orc.w.as_ref().unwrap());
        summary["oracle"] = json!({
            "h": opts.h,
            "richardson": opts.richardson,
            "relative_sup_error": err,
            "tolerance": ORACLE_TOLERANCE,
            "agrees": err < ORACLE_TOLERANCE,
        });
    }
    let out = plan.resolve(sc.config.outputs.report_json.as_ref(), "jacobi_summary.json");
    write_json(&out, &summary)?;
    Ok(summary)
}

/// Runs the verification suites; a failing report is returned as `Ok` so the
/// caller can print it before exiting with the verification code.
pub fn cmd_verify(suite: &str, seed: u64, tolerance_scale: f64, out_dir: Option<&Path>) -> CliResult<VerifyReport> {
    let suites = Suite::select(suite).map_err(CliError::config)?;
    if !(tolerance_scale.is_finite() && tolerance_scale > 0.0) {
        return Err(CliError::Config(format!("--tolerance-scale must be positive, got {tolerance_scale}")));
    }
    let report = runtime(run_verify(&VerifyOptions {
        seed,
        suites,
        tolerance_scale,
    }))?;
    if let Some(dir) = out_dir {
        write_json(&dir.join("verify_report.json"), &serde_json::to_value(&report).map_err(CliError::runtime)?)?;
    }
    Ok(report)
}

/// One line per record plus a closing tally.
pub fn render_report(report: &VerifyReport) -> String {
    let mut out = String::new();
    for r in &report.records {
        let tag = if r.pass { "PASS" } else { "FAIL" };
        let rel = if r.expect == Expect::Below { "<" } else { ">" };
        out.push_str(&format!("{tag} {:<50} {:<22} {:.3e} {rel} {:.1e}", r.name, r.model, r.sup_residual, r.tolerance));
        if let Some(note) = &r.note {
            out.push_str(&format!("  ({note})"));
        }
        out.push('\n');
    }
    let failed = report.failures().count();
    out.push_str(&format!(
        "{} checks, {failed} failed, seed {}: {}\n",
        report.records.len(),
        report.seed,
        if report.pass { "PASS" } else { "FAIL" }
    ));
    out
}
