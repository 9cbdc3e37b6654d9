//! Seeded verification suite: runs every invariant of the library against
//! the shipped model zoo and reports one record per check.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::connections::{
    adapted_components, berwald_curvatures, connection_pack, curvature_r, miron_dual_coefficients,
    our_dual_coefficients,
};
use crate::diff::{vector_series_derivative, DiffStrategy, SeriesOrder};
use crate::dynamics::{
    berwald_acceleration_rates, deviation_oracle, horizontality_residual, integrate_jacobi, integrate_trajectory,
    interior_sup, parallel_transport, v2_residual, IntegratorConfig, OracleOptions, Trajectory,
};
use crate::error::{Error, Result};
use crate::metric::{force_jacobians, metric_tensor};
use crate::model::{ForceField, GeometryModel};
use crate::models::{build_force, build_model, ForceSpec, ModelSpec};
use crate::state::{FirstOrderState, SecondOrderState};
use crate::tensor::max_abs;

pub const DEFAULT_SEED: u64 = 42;

/// Residuals below this are treated as equal when comparing two charts.
pub const RESIDUAL_FLOOR: f64 = 1e-9;

/// States drawn per model for pointwise identities.
pub const POINTWISE_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    JacobiClosedForm,
    V2,
    Oracle,
    Miron,
    Drag,
    Horizontality,
    Homogeneity,
    Convergence,
    Covariance,
    Energy,
    Transport,
    Remark,
    CrossCheck,
}

impl Suite {
    pub const ALL: [Suite; 13] = [
        Suite::JacobiClosedForm,
        Suite::V2,
        Suite::Oracle,
        Suite::Miron,
        Suite::Drag,
        Suite::Horizontality,
        Suite::Homogeneity,
        Suite::Convergence,
        Suite::Covariance,
        Suite::Energy,
        Suite::Transport,
        Suite::Remark,
        Suite::CrossCheck,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::JacobiClosedForm => "jacobi_closed_form",
            Suite::V2 => "v2",
            Suite::Oracle => "oracle",
            Suite::Miron => "miron",
            Suite::Drag => "drag",
            Suite::Horizontality => "horizontality",
            Suite::Homogeneity => "homogeneity",
            Suite::Convergence => "convergence",
            Suite::Covariance => "covariance",
            Suite::Energy => "energy",
            Suite::Transport => "transport",
            Suite::Remark => "remark",
            Suite::CrossCheck => "cross_check",
        }
    }

    /// Parses a selector: a suite name or `all`.
    pub fn select(selector: &str) -> Result<Vec<Suite>> {
        if selector == "all" {
            return Ok(Suite::ALL.to_vec());
        }
        selector.parse().map(|s| vec![s])
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| {
            let names: Vec<_> = Suite::ALL.iter().map(Suite::name).collect();
            Error::InvalidSpec(format!("unknown suite '{s}'; expected all or one of {}", names.join(", ")))
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Direction of a check: residuals must stay below the tolerance, or (for
/// negative controls) exceed it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    Below,
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub model: String,
    pub sup_residual: f64,
    pub tolerance: f64,
    pub expect: Expect,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub tolerance_scale: f64,
    pub records: Vec<CheckRecord>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.pass)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub suites: Vec<Suite>,
    /// Multiplies every upper-bound tolerance; lower bounds of negative
    /// controls are left alone.
    pub tolerance_scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            suites: Suite::ALL.to_vec(),
            tolerance_scale: 1.0,
        }
    }
}

struct Recorder {
    scale: f64,
    records: Vec<CheckRecord>,
}

impl Recorder {
    fn new(scale: f64) -> Self {
        Self {
            scale,
            records: Vec::new(),
        }
    }

    fn push(&mut self, name: String, model: &str, outcome: Result<f64>, tolerance: f64, expect: Expect) {
        let (sup_residual, note) = match outcome {
            Ok(v) => (v, None),
            Err(e) => (f64::NAN, Some(e.to_string())),
        };
        let tolerance = match expect {
            Expect::Below => tolerance * self.scale,
            Expect::Above => tolerance,
        };
        let pass = match expect {
            Expect::Below => sup_residual <= tolerance,
            Expect::Above => sup_residual > tolerance,
        };
        self.records.push(CheckRecord {
            name,
            model: model.to_string(),
            sup_residual,
            tolerance,
            expect,
            pass,
            note,
        });
    }

    fn below(&mut self, name: impl Into<String>, model: &str, outcome: Result<f64>, tolerance: f64) {
        self.push(name.into(), model, outcome, tolerance, Expect::Below);
    }

    fn above(&mut self, name: impl Into<String>, model: &str, outcome: Result<f64>, threshold: f64) {
        self.push(name.into(), model, outcome, threshold, Expect::Above);
    }
}

/// One entry of the model zoo.
pub struct ZooEntry {
    pub label: &'static str,
    pub spec: ModelSpec,
    pub force_spec: ForceSpec,
    pub model: Arc<dyn GeometryModel>,
    pub force: Arc<dyn ForceField>,
}

impl ZooEntry {
    fn new(label: &'static str, spec: ModelSpec, force_spec: ForceSpec) -> Result<Self> {
        Ok(Self {
            label,
            model: build_model(&spec)?,
            force: build_force(&force_spec)?,
            spec,
            force_spec,
        })
    }

    /// Whether every derivative of the model is analytic, so that the
    /// analytic tolerances apply.
    pub fn analytic(&self) -> bool {
        !matches!(self.spec, ModelSpec::Randers { .. })
    }
}

/// The Randers preset used throughout the suite.
pub fn randers_preset() -> ModelSpec {
    ModelSpec::Randers {
        b: vec![0.3, 0.1],
        b_gradient: Some(vec![vec![0.0, 0.2], vec![-0.2, 0.0]]),
    }
}

/// The shipped zoo: every two-dimensional preset plus the drag model
/// (flat Minkowski norm with `F = -y`).
pub fn zoo() -> Result<Vec<ZooEntry>> {
    Ok(vec![
        ZooEntry::new("sphere", ModelSpec::Sphere { radius: 1.0 }, ForceSpec::Zero)?,
        ZooEntry::new("flat_polar", ModelSpec::FlatPolar, ForceSpec::Zero)?,
        ZooEntry::new("hyperbolic_half_plane", ModelSpec::HyperbolicHalfPlane, ForceSpec::Zero)?,
        ZooEntry::new("euclidean", ModelSpec::Euclidean { n: 2 }, ForceSpec::Zero)?,
        ZooEntry::new("randers", randers_preset(), ForceSpec::Zero)?,
        ZooEntry::new(
            "drag",
            ModelSpec::MinkowskiNorm { n: 2, lagrangian: None },
            ForceSpec::LinearDrag { k: 1.0 },
        )?,
    ])
}

fn entry<'a>(zoo: &'a [ZooEntry], label: &str) -> &'a ZooEntry {
    zoo.iter().find(|e| e.label == label).expect("zoo label")
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// `sup |a - b| / (1 + sup |a|)` over all samples and components.
pub fn relative_sup_error(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for (u, v) in a.iter().zip(b) {
        for (p, q) in u.iter().zip(v) {
            num = num.max((p - q).abs());
            den = den.max(p.abs());
        }
    }
    num / (1.0 + den)
}

/// Polar initial data `(x, y, w, w_dot)` mapped to Cartesian coordinates.
pub fn polar_to_cartesian(x: &[f64], y: &[f64], w: &[f64], wdot: &[f64]) -> [Vec<f64>; 4] {
    let (r, phi) = (x[0], x[1]);
    let (c, s) = (phi.cos(), phi.sin());
    let jac = |v: &[f64]| vec![c * v[0] - r * s * v[1], s * v[0] + r * c * v[1]];
    // dJ/dt = dJ/dr rdot + dJ/dphi phidot
    let jdot = |v: &[f64]| {
        let (rd, pd) = (y[0], y[1]);
        vec![
            -s * v[1] * rd + (-s * v[0] - r * c * v[1]) * pd,
            c * v[1] * rd + (c * v[0] - r * s * v[1]) * pd,
        ]
    };
    let wd: Vec<f64> = jac(wdot).iter().zip(jdot(w)).map(|(a, b)| a + b).collect();
    [vec![r * c, r * s], jac(y), jac(w), wd]
}

/// Initial data for the dynamic sweeps of one zoo entry. The Euclidean
/// entry reuses the polar draws, mapped to Cartesian coordinates, so the
/// two charts see the same physical motions.
fn initial_data(zoo: &[ZooEntry], label: &str, seed: u64, count: usize) -> Vec<[Vec<f64>; 4]> {
    let (source, stream) = if label == "euclidean" {
        ("flat_polar", 0)
    } else {
        (label, zoo.iter().position(|e| e.label == label).unwrap_or(0) as u64)
    };
    let e = entry(zoo, source);
    let bx = e.spec.trajectory_box();
    let mut rng = rng_for(seed, 100 + stream);
    (0..count)
        .map(|_| {
            let s = bx.sample(&mut rng);
            let n = s.dim();
            let w = random_vec(&mut rng, n);
            let wd = random_vec(&mut rng, n);
            if label == "euclidean" {
                polar_to_cartesian(&s.x, &s.y, &w, &wd)
            } else {
                [s.x, s.y, w, wd]
            }
        })
        .collect()
}

/// Step and sample count of the dynamic sweeps; the finite-difference-only
/// Randers model runs fewer, coarser integrations.
fn sweep_params(e: &ZooEntry) -> (IntegratorConfig, usize) {
    if e.analytic() {
        (IntegratorConfig::new(1e-3, 1.0), 10)
    } else {
        (IntegratorConfig::new(1e-2, 1.0), 3)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct SweepResult {
    oracle: f64,
    v2: f64,
    horizontal: f64,
}

fn sweep(e: &ZooEntry, data: &[[Vec<f64>; 4]], cfg: &IntegratorConfig) -> Result<SweepResult> {
    let d = DiffStrategy::default();
    let (m, f) = (e.model.as_ref(), e.force.as_ref());
    let mc = |s: &SecondOrderState| our_dual_coefficients(m, f, s, &d);
    let opts = OracleOptions {
        h: 1e-4,
        richardson: true,
    };
    let mut out = SweepResult::default();
    for [x, y, w0, w0dot] in data {
        let init = FirstOrderState::new(x.clone(), y.clone())?;
        let traj = integrate_trajectory(m, f, &init, cfg, &d)?;
        let jac = integrate_jacobi(m, f, &traj, w0, w0dot, &d)?;
        let orc = deviation_oracle(m, f, &init, w0, w0dot, cfg, &opts, &d)?;
        let (wj, wo) = (jac.w.as_ref().unwrap(), orc.w.as_ref().unwrap());
        out.oracle = out.oracle.max(relative_sup_error(wj, wo));
        out.v2 = out.v2.max(interior_sup(&v2_residual(&jac, mc)?));
        let (h1, h2) = horizontality_residual(&traj, mc)?;
        out.horizontal = out.horizontal.max(interior_sup(&h1).max(interior_sup(&h2)));
    }
    Ok(out)
}

/// Unit-speed geodesic on the unit sphere through `(pi/2, 0)` tilted against
/// the equator; returns `(init, closed form x(t))`.
pub fn tilted_great_circle() -> (FirstOrderState, impl Fn(f64) -> Vec<f64>) {
    let init = FirstOrderState {
        x: vec![PI / 2.0, 0.0],
        y: vec![-0.8, 0.6],
    };
    let curve = |t: f64| {
        let (p0, v0) = ([1.0, 0.0, 0.0], [0.0, 0.6, 0.8]);
        let q: Vec<f64> = (0..3).map(|i| t.cos() * p0[i] + t.sin() * v0[i]).collect();
        vec![q[2].acos(), q[1].atan2(q[0])]
    };
    (init, curve)
}

/// The non-geodesic control `x(t) = (pi/2, t^2)` on the sphere, `t in [0, 2]`.
pub fn sphere_parabola(dt: f64) -> Trajectory {
    let steps = (2.0 / dt).round() as usize;
    Trajectory::from_curve(dt, steps, |t| (vec![PI / 2.0, t * t], vec![0.0, 2.0 * t], vec![0.0, 2.0]))
}

fn check_jacobi_closed_form(zoo: &[ZooEntry], rec: &mut Recorder) {
    let e = entry(zoo, "sphere");
    let d = DiffStrategy::default();
    let run = |w0: [f64; 2], w0dot: [f64; 2], exact: fn(f64) -> f64| -> Result<f64> {
        let init = FirstOrderState::new(vec![PI / 2.0, 0.0], vec![0.0, 1.0])?;
        let traj = integrate_trajectory(e.model.as_ref(), &crate::NoForce, &init, &IntegratorConfig::new(1e-3, PI / 2.0), &d)?;
        let jac = integrate_jacobi(e.model.as_ref(), &crate::NoForce, &traj, &w0, &w0dot, &d)?;
        Ok(jac
            .t
            .iter()
            .zip(jac.w.as_ref().unwrap())
            .map(|(&t, w)| (w[0] - exact(t)).abs().max(w[1].abs()))
            .fold(0.0, f64::max))
    };
    rec.below("jacobi_closed_form.sin", "sphere", run([0.0, 0.0], [1.0, 0.0], f64::sin), 1e-6);
    rec.below("jacobi_closed_form.cos", "sphere", run([1.0, 0.0], [0.0, 0.0], f64::cos), 1e-6);
}

fn check_v2_sphere(zoo: &[ZooEntry], rec: &mut Recorder) {
    let e = entry(zoo, "sphere");
    let d = DiffStrategy::default();
    let m = e.model.as_ref();
    let mc = |s: &SecondOrderState| our_dual_coefficients(m, &crate::NoForce, s, &d);
    let jac = (|| -> Result<Trajectory> {
        let init = FirstOrderState::new(vec![PI / 2.0, 0.0], vec![0.0, 1.0])?;
        let traj = integrate_trajectory(m, &crate::NoForce, &init, &IntegratorConfig::new(1e-3, PI / 2.0), &d)?;
        integrate_jacobi(m, &crate::NoForce, &traj, &[0.0, 0.0], &[1.0, 0.0], &d)
    })();
    match jac {
        Ok(jac) => {
            rec.below("v2.sphere_equator", "sphere", v2_residual(&jac, mc).map(|r| interior_sup(&r)), 1e-5);
            let control = jac.with_deviation(|t| (vec![t * t, 0.0], vec![2.0 * t, 0.0]));
            rec.above(
                "v2.sphere_negative_control",
                "sphere",
                v2_residual(&control, mc).map(|r| interior_sup(&r)),
                0.1,
            );
        }
        Err(err) => {
            rec.below("v2.sphere_equator", "sphere", Err(err.clone()), 1e-5);
            rec.above("v2.sphere_negative_control", "sphere", Err(err), 0.1);
        }
    }
}

fn run_sweep(zoo: &[ZooEntry], e: &ZooEntry, seed: u64) -> Result<SweepResult> {
    let (cfg, count) = sweep_params(e);
    sweep(e, &initial_data(zoo, e.label, seed, count), &cfg)
}

fn record_sweeps(zoo: &[ZooEntry], results: Vec<Result<SweepResult>>, suites: &[Suite], rec: &mut Recorder) {
    let want = |s: Suite| suites.contains(&s);
    let results: Vec<(&str, Result<SweepResult>)> = zoo.iter().map(|e| e.label).zip(results).collect();
    for (e, (_, res)) in zoo.iter().zip(&results) {
        if want(Suite::Oracle) {
            rec.below(format!("oracle.{}", e.label), e.label, res.clone().map(|r| r.oracle), 1e-4);
        }
        if want(Suite::V2) {
            rec.below(format!("v2.{}", e.label), e.label, res.clone().map(|r| r.v2), 1e-5);
        }
        if want(Suite::Horizontality) && matches!(e.force_spec, ForceSpec::Zero) {
            rec.below(
                format!("horizontality.{}", e.label),
                e.label,
                res.clone().map(|r| r.horizontal),
                1e-5,
            );
        }
    }

    if want(Suite::Covariance) {
        let find = |label: &str| results.iter().find(|(l, _)| *l == label).map(|(_, r)| r.clone()).unwrap();
        let (flat, polar) = (find("euclidean"), find("flat_polar"));
        type Pick = fn(&SweepResult) -> f64;
        let picks: [(&str, Pick, f64); 3] = [
            ("v2", |r| r.v2, 1e-5),
            ("oracle", |r| r.oracle, 1e-4),
            ("horizontality", |r| r.horizontal, 1e-5),
        ];
        for (name, pick, tol) in picks {
            let outcome = match (&flat, &polar) {
                (Ok(a), Ok(b)) => {
                    let (a, b) = (pick(a), pick(b));
                    if a <= tol && b <= tol {
                        let (a, b) = (a.max(RESIDUAL_FLOOR), b.max(RESIDUAL_FLOOR));
                        Ok(a.max(b) / a.min(b))
                    } else {
                        Err(Error::InvalidSpec(format!("verdicts differ or fail: flat {a:e}, polar {b:e}")))
                    }
                }
                (Err(e), _) | (_, Err(e)) => Err(e.clone()),
            };
            rec.below(format!("covariance.{name}"), "euclidean/flat_polar", outcome, 10.0);
        }
    }
}

fn check_horizontality_controls(zoo: &[ZooEntry], rec: &mut Recorder) {
    let e = entry(zoo, "sphere");
    let d = DiffStrategy::default();
    let m = e.model.as_ref();
    let mc = |s: &SecondOrderState| our_dual_coefficients(m, &crate::NoForce, s, &d);
    let (init, _) = tilted_great_circle();
    let geo = integrate_trajectory(m, &crate::NoForce, &init, &IntegratorConfig::new(1e-3, 1.0), &d)
        .and_then(|t| horizontality_residual(&t, mc))
        .map(|(a, b)| interior_sup(&a).max(interior_sup(&b)));
    rec.below("horizontality.sphere_tilted_great_circle", "sphere", geo, 1e-5);
    let control = horizontality_residual(&sphere_parabola(1e-3), mc).map(|(a, _)| interior_sup(&a));
    rec.above("horizontality.sphere_negative_control", "sphere", control, 1.0);
}

fn check_pointwise(e: &ZooEntry, idx: usize, suites: &[Suite], seed: u64, rec: &mut Recorder) {
    let want = |s: Suite| suites.contains(&s);
    {
        let modes: Vec<(&str, DiffStrategy, f64, f64, f64)> = if e.analytic() {
            vec![
                ("analytic", DiffStrategy::default(), 1e-7, 1e-7, 1e-8),
                ("fd", DiffStrategy::forced_fd(), 1e-4, 1e-4, 1e-4),
            ]
        } else {
            vec![("fd", DiffStrategy::default(), 1e-4, 1e-4, 1e-4)]
        };
        for (mode, d, tol_euler, tol_contr, tol_miron) in modes {
            let mut rng = rng_for(seed, idx as u64);
            let bx = e.spec.state_box();
            let states: Vec<SecondOrderState> =
                (0..POINTWISE_SAMPLES).map(|_| bx.sample_second_order(&mut rng)).collect();
            let m = e.model.as_ref();
            if want(Suite::Homogeneity) {
                let euler = states.iter().try_fold(0.0_f64, |acc, s2| {
                    connection_pack(m, &s2.first_order(), &d).map(|p| acc.max(p.euler_residual()))
                });
                rec.below(format!("homogeneity.euler.{}.{mode}", e.label), e.label, euler, tol_euler);
                let contraction = states.iter().try_fold(0.0_f64, |acc, s2| {
                    berwald_curvatures(m, &s2.first_order(), &d).map(|c| acc.max(c.contraction_residual))
                });
                rec.below(
                    format!("homogeneity.contraction.{}.{mode}", e.label),
                    e.label,
                    contraction,
                    tol_contr,
                );
            }
            if want(Suite::Miron) {
                let diff = states.iter().try_fold(0.0_f64, |acc, s2| -> Result<f64> {
                    let ours = our_dual_coefficients(m, &crate::NoForce, s2, &d)?;
                    let miron = miron_dual_coefficients(m, s2, &d)?;
                    let half_yr = curvature_r(m, &s2.first_order(), &d)?.contract_last(&s2.y).scale(0.5);
                    Ok(acc.max((&(&ours.m2 - &miron.m2) + &half_yr).max_abs()))
                });
                rec.below(format!("miron.{}.{mode}", e.label), e.label, diff, tol_miron);
            }
        }
    }
}

fn check_drag(zoo: &[ZooEntry], seed: u64, rec: &mut Recorder) {
    let e = entry(zoo, "drag");
    let d = DiffStrategy::default();
    let (m, f) = (e.model.as_ref(), e.force.as_ref());
    let closed = (|| -> Result<f64> {
        let init = FirstOrderState::new(vec![0.0, 0.0], vec![1.0, 0.0])?;
        let traj = integrate_trajectory(m, f, &init, &IntegratorConfig::new(1e-3, 1.0), &d)?;
        let jac = integrate_jacobi(m, f, &traj, &[0.0, 0.0], &[1.0, 0.0], &d)?;
        let w = jac.w.as_ref().unwrap().last().unwrap();
        Ok((w[0] - (1.0 - (-1.0_f64).exp())).abs().max(w[1].abs()))
    })();
    rec.below("drag.jacobi_closed_form", "drag", closed, 1e-6);

    let mut rng = rng_for(seed, 200);
    let bx = e.spec.state_box();
    let coeffs = (0..POINTWISE_SAMPLES).try_fold((0.0_f64, 0.0_f64), |(a1, a2), _| -> Result<(f64, f64)> {
        let s2 = bx.sample_second_order(&mut rng);
        let mc = our_dual_coefficients(m, f, &s2, &d)?;
        let (fx, fy) = force_jacobians(f, &s2.x, &s2.y, &d)?;
        let r1 = (&mc.m1 - &fy.scale(-0.5)).max_abs();
        let r2 = (&mc.m2 - &fx.scale(-0.5)).max_abs();
        Ok((a1.max(r1), a2.max(r2)))
    });
    rec.below("drag.m1", "drag", coeffs.clone().map(|c| c.0), 1e-12);
    rec.below("drag.m2", "drag", coeffs.map(|c| c.1), 1e-12);
}

/// Endpoint errors of the tilted great circle at `dt` and `dt/2`.
pub fn sphere_convergence_errors(dt: f64) -> Result<(f64, f64)> {
    let model = build_model(&ModelSpec::Sphere { radius: 1.0 })?;
    let (init, exact) = tilted_great_circle();
    let d = DiffStrategy::default();
    let err = |dt: f64| -> Result<f64> {
        let traj = integrate_trajectory(model.as_ref(), &crate::NoForce, &init, &IntegratorConfig::new(dt, 1.0), &d)?;
        let (x, t) = (traj.x.last().unwrap(), *traj.t.last().unwrap());
        let ex = exact(t);
        Ok(((x[0] - ex[0]).powi(2) + (x[1] - ex[1]).powi(2)).sqrt())
    };
    Ok((err(dt)?, err(0.5 * dt)?))
}

fn check_convergence(rec: &mut Recorder) {
    // RK4 nominal ratio 16; the record holds |ratio - 16| against half-width 4.
    let ratio = sphere_convergence_errors(0.05).map(|(a, b)| (a / b - 16.0).abs());
    rec.below("convergence.sphere_rk4_ratio", "sphere", ratio, 4.0);
}

fn check_energy(zoo: &[ZooEntry], rec: &mut Recorder) {
    let d = DiffStrategy::default();
    let cases: [(&str, [f64; 2], [f64; 2]); 5] = [
        ("sphere", [PI / 2.0, 0.0], [-0.8, 0.6]),
        ("flat_polar", [1.0, 0.0], [0.0, 1.0]),
        ("hyperbolic_half_plane", [0.0, 1.0], [0.2, 0.0]),
        ("euclidean", [0.0, 0.0], [0.6, -0.8]),
        ("randers", [0.0, 0.0], [0.1, 0.05]),
    ];
    for (label, x, y) in cases {
        let m = entry(zoo, label).model.as_ref();
        let drift = (|| -> Result<f64> {
            let init = FirstOrderState::new(x.to_vec(), y.to_vec())?;
            let traj = integrate_trajectory(m, &crate::NoForce, &init, &IntegratorConfig::new(1e-2, 10.0), &d)?;
            let l0 = m.lagrangian(&x, &y);
            Ok(traj
                .x
                .iter()
                .zip(&traj.y)
                .map(|(x, y)| (m.lagrangian(x, y) - l0).abs())
                .fold(0.0, f64::max))
        })();
        rec.below(format!("energy.{label}"), label, drift, 1e-8);
    }
}

fn g_norm(m: &dyn GeometryModel, x: &[f64], y: &[f64], w: &[f64], d: &DiffStrategy) -> Result<f64> {
    let g = metric_tensor(m, &FirstOrderState::new(x.to_vec(), y.to_vec())?, d)?;
    let gw = g.mul_vec(w);
    Ok(w.iter().zip(gw).map(|(a, b)| a * b).sum::<f64>().sqrt())
}

fn check_transport(zoo: &[ZooEntry], rec: &mut Recorder) {
    let m = entry(zoo, "sphere").model.as_ref();
    let d = DiffStrategy::default();
    let runs: [(&str, FirstOrderState, Vec<f64>); 2] = [
        (
            "transport.sphere_equator",
            FirstOrderState {
                x: vec![PI / 2.0, 0.0],
                y: vec![0.0, 1.0],
            },
            vec![1.0, 0.0],
        ),
        ("transport.sphere_tilted", tilted_great_circle().0, vec![0.3, 0.7]),
    ];
    for (name, init, w0) in runs {
        let drift = (|| -> Result<f64> {
            let traj = integrate_trajectory(m, &crate::NoForce, &init, &IntegratorConfig::new(1e-3, PI), &d)?;
            let tr = parallel_transport(m, &traj, &w0, &d)?;
            let w = tr.w.as_ref().unwrap();
            let n0 = g_norm(m, &traj.x[0], &traj.y[0], &w[0], &d)?;
            (0..traj.len()).try_fold(0.0_f64, |acc, k| {
                g_norm(m, &traj.x[k], &traj.y[k], &w[k], &d).map(|n| acc.max((n - n0).abs()))
            })
        })();
        rec.below(name, "sphere", drift, 1e-8);
    }
}

/// Along the extension of a non-geodesic sphere curve, compares the adapted
/// `v1`, `v2` rates of the extension with the Berwald covariant rates of `y`:
/// returns `(max |v1 - Dy/dt|, max |v2 - (1/2) D^2y/dt^2|)` over interior samples.
pub fn remark_residuals(dt: f64) -> Result<(f64, f64)> {
    let model = build_model(&ModelSpec::Sphere { radius: 1.0 })?;
    let m = model.as_ref();
    let d = DiffStrategy::default();
    let steps = (1.0 / dt).round() as usize;
    let traj = Trajectory::from_curve(dt, steps, |t| {
        (
            vec![PI / 2.0 + 0.3 * t.sin(), t + 0.2 * t * t],
            vec![0.3 * t.cos(), 1.0 + 0.4 * t],
            vec![-0.3 * t.sin(), 0.4],
        )
    });
    let (first, second) = berwald_acceleration_rates(m, &traj, &d)?;
    let y2dot = vector_series_derivative(&traj.y2, dt, SeriesOrder::First)?;
    let (mut r1, mut r2) = (Vec::new(), Vec::new());
    for k in 0..traj.len() {
        let s2 = traj.state(k)?;
        let mc = our_dual_coefficients(m, &crate::NoForce, &s2, &d)?;
        let ydot: Vec<f64> = s2.y2.iter().map(|v| 2.0 * v).collect();
        let (_, v1, v2) = adapted_components(&s2.y, &ydot, &y2dot[k], &mc)?;
        let half: Vec<f64> = second[k].iter().map(|v| 0.5 * v).collect();
        r1.push(max_abs(&crate::tensor::sub(&v1, &first[k])));
        r2.push(max_abs(&crate::tensor::sub(&v2, &half)));
    }
    Ok((interior_sup(&r1), interior_sup(&r2)))
}

fn check_remark(rec: &mut Recorder) {
    let res = remark_residuals(1e-3);
    rec.below("remark.first_rate", "sphere", res.clone().map(|r| r.0), 1e-10);
    rec.below("remark.second_rate", "sphere", res.map(|r| r.1), 1e-6);
}

/// Discrepancies `(spray, N, L, R)` between analytic callbacks and forced
/// finite differences at one state, each as `max |a - f| / (1 + max |a|)`.
pub fn analytic_fd_discrepancy(model: &dyn GeometryModel, s: &FirstOrderState) -> Result<[f64; 4]> {
    let (a, f) = (DiffStrategy::default(), DiffStrategy::forced_fd());
    let pa = connection_pack(model, s, &a)?;
    let pf = connection_pack(model, s, &f)?;
    let (ra, rf) = (curvature_r(model, s, &a)?, curvature_r(model, s, &f)?);
    let rel = |a: &[f64], f: &[f64]| max_abs(&crate::tensor::sub(a, f)) / (1.0 + max_abs(a));
    Ok([
        rel(&pa.spray, &pf.spray),
        rel(pa.n.as_slice(), pf.n.as_slice()),
        rel(pa.berwald.as_slice(), pf.berwald.as_slice()),
        rel(ra.as_slice(), rf.as_slice()),
    ])
}

fn check_cross(e: &ZooEntry, idx: usize, seed: u64, rec: &mut Recorder) {
    let mut rng = rng_for(seed, 300 + idx as u64);
    let bx = e.spec.state_box();
    let worst = (0..20).try_fold([0.0_f64; 4], |acc, _| -> Result<[f64; 4]> {
        let d = analytic_fd_discrepancy(e.model.as_ref(), &bx.sample(&mut rng))?;
        Ok([0, 1, 2, 3].map(|i| acc[i].max(d[i])))
    });
    // Tolerances grow with the nesting depth of the finite differences.
    let checks = [("spray", 1e-6), ("connection", 1e-6), ("berwald", 1e-5), ("curvature", 1e-3)];
    for (i, (what, tol)) in checks.into_iter().enumerate() {
        rec.below(
            format!("cross_check.{}.{what}", e.label),
            e.label,
            worst.clone().map(|w| w[i]),
            tol,
        );
    }
}

/// Runs the selected suites. Records are sorted by name; the report passes
/// iff every record passes.
pub fn run_verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    if !(opts.tolerance_scale.is_finite() && opts.tolerance_scale > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "tolerance scale must be positive, got {}",
            opts.tolerance_scale
        )));
    }
    let zoo = zoo()?;
    let (scale, seed, suites) = (opts.tolerance_scale, opts.seed, &opts.suites[..]);
    let want = |s: Suite| suites.contains(&s);
    let zoo = &zoo[..];

    // Independent checks run on scoped threads; records are sorted afterwards.
    let records = std::thread::scope(|scope| {
        let sweeps: Vec<_> = if [Suite::V2, Suite::Oracle, Suite::Horizontality, Suite::Covariance]
            .into_iter()
            .any(want)
        {
            zoo.iter().map(|e| scope.spawn(move || run_sweep(zoo, e, seed))).collect()
        } else {
            Vec::new()
        };

        type Job<'a> = Box<dyn FnOnce(&mut Recorder) + Send + 'a>;
        let mut pending: Vec<Job> = Vec::new();
        if want(Suite::JacobiClosedForm) {
            pending.push(Box::new(|rec| check_jacobi_closed_form(zoo, rec)));
        }
        if want(Suite::V2) {
            pending.push(Box::new(|rec| check_v2_sphere(zoo, rec)));
        }
        if want(Suite::Horizontality) {
            pending.push(Box::new(|rec| check_horizontality_controls(zoo, rec)));
        }
        if want(Suite::Homogeneity) || want(Suite::Miron) {
            for (idx, e) in zoo.iter().enumerate() {
                if matches!(e.force_spec, ForceSpec::Zero) {
                    pending.push(Box::new(move |rec| check_pointwise(e, idx, suites, seed, rec)));
                }
            }
        }
        if want(Suite::CrossCheck) {
            for (idx, e) in zoo.iter().enumerate() {
                if e.analytic() && matches!(e.force_spec, ForceSpec::Zero) {
                    pending.push(Box::new(move |rec| check_cross(e, idx, seed, rec)));
                }
            }
        }
        if want(Suite::Drag) {
            pending.push(Box::new(|rec| check_drag(zoo, seed, rec)));
        }
        if want(Suite::Convergence) {
            pending.push(Box::new(check_convergence));
        }
        if want(Suite::Energy) {
            pending.push(Box::new(|rec| check_energy(zoo, rec)));
        }
        if want(Suite::Transport) {
            pending.push(Box::new(|rec| check_transport(zoo, rec)));
        }
        if want(Suite::Remark) {
            pending.push(Box::new(check_remark));
        }

        let jobs: Vec<_> = pending
            .into_iter()
            .map(|f| {
                scope.spawn(move || {
                    let mut rec = Recorder::new(scale);
                    f(&mut rec);
                    rec.records
                })
            })
            .collect();

        let mut rec = Recorder::new(scale);
        if !sweeps.is_empty() {
            let results = sweeps.into_iter().map(|h| h.join().expect("sweep thread")).collect();
            record_sweeps(zoo, results, suites, &mut rec);
        }
        for h in jobs {
            rec.records.extend(h.join().expect("verify thread"));
        }
        rec.records
    });

    let mut records = records;
    records.sort_by(|a, b| a.name.cmp(&b.name));
    let pass = records.iter().all(|r| r.pass);
    Ok(VerifyReport {
        seed: opts.seed,
        tolerance_scale: opts.tolerance_scale,
        records,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_selector_parses_names() {
        assert_eq!(Suite::select("all").unwrap().len(), Suite::ALL.len());
        assert_eq!(Suite::select("homogeneity").unwrap(), vec![Suite::Homogeneity]);
        let err = Suite::select("nope").unwrap_err().to_string();
        assert!(err.contains("jacobi_closed_form"), "{err}");
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
    }

    #[test]
    fn polar_map_preserves_speed() {
        let [_, v, w, _] = polar_to_cartesian(&[1.5, 0.4], &[0.3, -0.2], &[0.1, 0.5], &[0.0, 0.0]);
        let polar = 0.3_f64.powi(2) + 1.5_f64.powi(2) * 0.04;
        assert!((v[0] * v[0] + v[1] * v[1] - polar).abs() < 1e-14);
        let polar_w = 0.01 + 2.25 * 0.25;
        assert!((w[0] * w[0] + w[1] * w[1] - polar_w).abs() < 1e-14);
    }

    #[test]
    fn nan_residuals_fail_both_directions() {
        let mut rec = Recorder::new(1.0);
        rec.below("a", "m", Ok(f64::NAN), 1.0);
        rec.above("b", "m", Ok(f64::NAN), 1.0);
        rec.below("c", "m", Err(Error::NonFinite("x")), 1.0);
        assert!(rec.records.iter().all(|r| !r.pass));
        assert!(rec.records[2].note.is_some());
    }
}
