use crate::error::Result;
use crate::tensor::axpy;

/// Position of an RK4 stage within the step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Stage {
    Start,
    Mid,
    End,
}

/// One classical Runge-Kutta step of `z' = f(stage, z)`.
pub(crate) fn rk4_step<F>(mut f: F, z: &[f64], dt: f64) -> Result<Vec<f64>>
where
    F: FnMut(Stage, &[f64]) -> Result<Vec<f64>>,
{
    let k1 = f(Stage::Start, z)?;
    rk4_step_with_k1(f, z, k1, dt)
}

/// As [`rk4_step`] with the first stage already evaluated.
pub(crate) fn rk4_step_with_k1<F>(mut f: F, z: &[f64], k1: Vec<f64>, dt: f64) -> Result<Vec<f64>>
where
    F: FnMut(Stage, &[f64]) -> Result<Vec<f64>>,
{
    let k2 = f(Stage::Mid, &axpy(0.5 * dt, &k1, z))?;
    let k3 = f(Stage::Mid, &axpy(0.5 * dt, &k2, z))?;
    let k4 = f(Stage::End, &axpy(dt, &k3, z))?;
    Ok((0..z.len())
        .map(|i| z[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Cubic Hermite value at the midpoint of a step from endpoint values and slopes.
pub(crate) fn hermite_mid(p0: &[f64], m0: &[f64], p1: &[f64], m1: &[f64], dt: f64) -> Vec<f64> {
    (0..p0.len())
        .map(|i| 0.5 * (p0[i] + p1[i]) + dt / 8.0 * (m0[i] - m1[i]))
        .collect()
}
