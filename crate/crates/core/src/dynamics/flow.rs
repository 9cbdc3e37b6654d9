use super::rk4::{hermite_mid, rk4_step, rk4_step_with_k1, Stage};
use super::{IntegratorConfig, Trajectory};
use crate::connections::{connection_at, our_dual_coefficients, spray_at, DualCoefficients};
use crate::diff::DiffStrategy;
use crate::error::{check_dim, Error, Result};
use crate::metric::check_state;
use crate::model::{ForceField, GeometryModel};
use crate::state::{FirstOrderState, SecondOrderState};
use crate::tensor::{ensure_finite, SquareField};

/// `y2 = -G(x, y) + F(x, y) / 2`, the second-order coordinate of a
/// trajectory of `x'' + 2G = F`.
pub fn on_extension_y2(
    model: &dyn GeometryModel,
    force: &dyn ForceField,
    x: &[f64],
    y: &[f64],
    d: &DiffStrategy,
) -> Result<Vec<f64>> {
    let s = FirstOrderState::new(x.to_vec(), y.to_vec())?;
    check_state(model, &s)?;
    let g = spray_at(model, x, y, d)?;
    let f = force.force(x, y);
    check_dim(x.len(), f.len())?;
    Ok(g.iter().zip(&f).map(|(g, f)| -g + 0.5 * f).collect())
}

fn split(z: &[f64]) -> (&[f64], &[f64]) {
    z.split_at(z.len() / 2)
}

/// Integrates `x'' + 2G(x, x') = F(x, x')` from `init` with fixed-step RK4.
/// Samples carry `y2 = -G + F/2`. Failures report the time of the last
/// accepted sample.
pub fn integrate_trajectory(
    model: &dyn GeometryModel,
    force: &dyn ForceField,
    init: &FirstOrderState,
    cfg: &IntegratorConfig,
    d: &DiffStrategy,
) -> Result<Trajectory> {
    cfg.validate()?;
    d.validate()?;
    check_state(model, init)?;
    let steps = cfg.steps();
    let dt = cfg.dt;
    let rhs = |_: Stage, z: &[f64]| -> Result<Vec<f64>> {
        let (x, y) = split(z);
        let y2 = on_extension_y2(model, force, x, y, d)?;
        let mut out = y.to_vec();
        out.extend(y2.iter().map(|v| 2.0 * v));
        Ok(out)
    };

    let mut traj = Trajectory::empty(dt);
    let mut z: Vec<f64> = init.x.iter().chain(&init.y).copied().collect();
    for k in 0..=steps {
        let t = k as f64 * dt;
        let k1 = rhs(Stage::Start, &z).map_err(|e| e.at(t))?;
        let (x, y) = split(&z);
        traj.t.push(t);
        traj.x.push(x.to_vec());
        traj.y.push(y.to_vec());
        traj.y2.push(k1[x.len()..].iter().map(|v| 0.5 * v).collect());
        if k == steps {
            break;
        }
        z = rk4_step_with_k1(rhs, &z, k1, dt).map_err(|e| e.at(t))?;
        ensure_finite(&z, "trajectory state").map_err(|e| e.at(t))?;
    }
    Ok(traj)
}

/// Interpolated first-order state at the midpoint of step `k`; the slopes are
/// `dx/dt = y` and `dy/dt = 2 y2`.
fn mid_state(traj: &Trajectory, k: usize) -> (Vec<f64>, Vec<f64>) {
    let dt = traj.dt;
    let two = |v: &[f64]| v.iter().map(|a| 2.0 * a).collect::<Vec<_>>();
    let x = hermite_mid(&traj.x[k], &traj.y[k], &traj.x[k + 1], &traj.y[k + 1], dt);
    let y = hermite_mid(&traj.y[k], &two(&traj.y2[k]), &traj.y[k + 1], &two(&traj.y2[k + 1]), dt);
    (x, y)
}

/// Evaluates `coeff` at every node and step midpoint of `traj`.
/// Returns `(nodes, mids)`.
fn along<T, F>(traj: &Trajectory, coeff: F) -> Result<(Vec<T>, Vec<T>)>
where
    F: Fn(&[f64], &[f64]) -> Result<T>,
{
    let m = traj.len();
    let nodes = (0..m)
        .map(|k| coeff(&traj.x[k], &traj.y[k]).map_err(|e| e.at(traj.t[k])))
        .collect::<Result<Vec<_>>>()?;
    let mids = (0..m.saturating_sub(1))
        .map(|k| {
            let (x, y) = mid_state(traj, k);
            coeff(&x, &y).map_err(|e| e.at(traj.t[k]))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((nodes, mids))
}

fn check_field(traj: &Trajectory, v: &[f64]) -> Result<()> {
    if traj.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: traj.len() });
    }
    check_dim(traj.dim(), v.len())?;
    ensure_finite(v, "initial field")
}

/// Integrates the Jacobi equation `w'' + 2 M1 w' + 2 M2 w = 0` along `traj`
/// with our dual coefficients evaluated on the extension (`y2 = -G + F/2`).
/// Returns a copy of `traj` with `w` and `w1` filled.
pub fn integrate_jacobi(
    model: &dyn GeometryModel,
    force: &dyn ForceField,
    traj: &Trajectory,
    w0: &[f64],
    w0dot: &[f64],
    d: &DiffStrategy,
) -> Result<Trajectory> {
    check_field(traj, w0)?;
    check_field(traj, w0dot)?;
    d.validate()?;
    let coeff = |x: &[f64], y: &[f64]| -> Result<DualCoefficients> {
        let y2 = on_extension_y2(model, force, x, y, d)?;
        let s2 = SecondOrderState::new(x.to_vec(), y.to_vec(), y2)?;
        our_dual_coefficients(model, force, &s2, d)
    };
    let (nodes, mids) = along(traj, coeff)?;
    let n = traj.dim();

    let mut out = traj.clone();
    let mut w = Vec::with_capacity(traj.len());
    let mut w1 = Vec::with_capacity(traj.len());
    let mut z: Vec<f64> = w0.iter().chain(w0dot).copied().collect();
    for k in 0..traj.len() {
        w.push(z[..n].to_vec());
        w1.push(z[n..].to_vec());
        if k + 1 == traj.len() {
            break;
        }
        let rhs = |stage: Stage, z: &[f64]| -> Result<Vec<f64>> {
            let mc = match stage {
                Stage::Start => &nodes[k],
                Stage::Mid => &mids[k],
                Stage::End => &nodes[k + 1],
            };
            let (w, v) = split(z);
            let a = mc.m1.mul_vec(v);
            let b = mc.m2.mul_vec(w);
            let mut out = v.to_vec();
            out.extend((0..n).map(|i| -2.0 * (a[i] + b[i])));
            Ok(out)
        };
        z = rk4_step(rhs, &z, traj.dt)?;
        ensure_finite(&z, "deviation field").map_err(|e| e.at(traj.t[k]))?;
    }
    out.w = Some(w);
    out.w1 = Some(w1);
    Ok(out)
}

/// Options for the finite-difference deviation oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Perturbation size.
    pub h: f64,
    /// Combine `h` and `h/2` by Richardson extrapolation.
    pub richardson: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            h: 1e-4,
            richardson: false,
        }
    }
}

/// Deviation field computed by differencing trajectories launched from
/// `(x0 +- h w0, y0 +- h w0dot)`. Returns the base trajectory with `w` and
/// `w1` filled.
#[allow(clippy::too_many_arguments)]
pub fn deviation_oracle(
    model: &dyn GeometryModel,
    force: &dyn ForceField,
    init: &FirstOrderState,
    w0: &[f64],
    w0dot: &[f64],
    cfg: &IntegratorConfig,
    opts: &OracleOptions,
    d: &DiffStrategy,
) -> Result<Trajectory> {
    check_dim(init.dim(), w0.len())?;
    check_dim(init.dim(), w0dot.len())?;
    if !(opts.h.is_finite() && opts.h > 0.0) {
        return Err(Error::InvalidSpec(format!("oracle step must be positive, got {}", opts.h)));
    }
    let central = |h: f64| -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let launch = |sign: f64| -> Result<Trajectory> {
            let x = init.x.iter().zip(w0).map(|(a, b)| a + sign * h * b).collect();
            let y = init.y.iter().zip(w0dot).map(|(a, b)| a + sign * h * b).collect();
            integrate_trajectory(model, force, &FirstOrderState::new(x, y)?, cfg, d)
        };
        let (p, m) = (launch(1.0)?, launch(-1.0)?);
        let diff = |a: &[Vec<f64>], b: &[Vec<f64>]| {
            a.iter()
                .zip(b)
                .map(|(u, v)| u.iter().zip(v).map(|(u, v)| (u - v) / (2.0 * h)).collect())
                .collect()
        };
        Ok((diff(&p.x, &m.x), diff(&p.y, &m.y)))
    };

    let mut base = integrate_trajectory(model, force, init, cfg, d)?;
    let (mut w, mut w1) = central(opts.h)?;
    if opts.richardson {
        let (wh, w1h) = central(0.5 * opts.h)?;
        let extrap = |coarse: &mut Vec<Vec<f64>>, fine: &[Vec<f64>]| {
            for (c, f) in coarse.iter_mut().zip(fine) {
                for (c, f) in c.iter_mut().zip(f) {
                    *c = (4.0 * f - *c) / 3.0;
                }
            }
        };
        extrap(&mut w, &wh);
        extrap(&mut w1, &w1h);
    }
    base.w = Some(w);
    base.w1 = Some(w1);
    Ok(base)
}

/// Transports `w0` along `traj` by the nonlinear connection:
/// `dw/dt + N(x, y) w = 0`. Meaningful along geodesics; see
/// [`geodesic_defect`]. Returns a copy of `traj` with `w` and `w1` filled.
pub fn parallel_transport(
    model: &dyn GeometryModel,
    traj: &Trajectory,
    w0: &[f64],
    d: &DiffStrategy,
) -> Result<Trajectory> {
    check_field(traj, w0)?;
    d.validate()?;
    let coeff = |x: &[f64], y: &[f64]| -> Result<SquareField> {
        check_state(model, &FirstOrderState::new(x.to_vec(), y.to_vec())?)?;
        connection_at(model, x, y, d)
    };
    let (nodes, mids) = along(traj, coeff)?;
    let rate = |n: &SquareField, w: &[f64]| -> Vec<f64> { n.mul_vec(w).into_iter().map(|v| -v).collect() };

    let mut out = traj.clone();
    let mut w = Vec::with_capacity(traj.len());
    let mut w1 = Vec::with_capacity(traj.len());
    let mut z = w0.to_vec();
    for k in 0..traj.len() {
        w1.push(rate(&nodes[k], &z));
        w.push(z.clone());
        if k + 1 == traj.len() {
            break;
        }
        let rhs = |stage: Stage, z: &[f64]| -> Result<Vec<f64>> {
            let n = match stage {
                Stage::Start => &nodes[k],
                Stage::Mid => &mids[k],
                Stage::End => &nodes[k + 1],
            };
            Ok(rate(n, z))
        };
        z = rk4_step(rhs, &z, traj.dt)?;
        ensure_finite(&z, "transported field").map_err(|e| e.at(traj.t[k]))?;
    }
    out.w = Some(w);
    out.w1 = Some(w1);
    Ok(out)
}

/// `max_k |2 y2 + 2G(x, y)|` over the samples; zero for a geodesic.
pub fn geodesic_defect(model: &dyn GeometryModel, traj: &Trajectory, d: &DiffStrategy) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..traj.len() {
        let g = spray_at(model, &traj.x[k], &traj.y[k], d)?;
        for (a, b) in traj.y2[k].iter().zip(&g) {
            worst = worst.max((2.0 * (a + b)).abs());
        }
    }
    Ok(worst)
}
