use super::Trajectory;
use crate::connections::{adapted_components, connection_at, DualCoefficients};
use crate::diff::{vector_series_derivative, DiffStrategy, SeriesOrder, SERIES_EDGE};
use crate::error::{check_dim, Error, Result};
use crate::metric::check_state;
use crate::model::GeometryModel;
use crate::state::SecondOrderState;
use crate::tensor::max_abs;

/// `dv/dt + N(x_k, y_k) v`, the Berwald covariant rate of `v` at sample `k`.
pub fn berwald_covariant_rate(
    model: &dyn GeometryModel,
    traj: &Trajectory,
    k: usize,
    v: &[f64],
    vdot: &[f64],
    d: &DiffStrategy,
) -> Result<Vec<f64>> {
    let s = traj.state(k)?.first_order();
    check_dim(s.dim(), v.len())?;
    check_dim(s.dim(), vdot.len())?;
    check_state(model, &s)?;
    let nv = connection_at(model, &s.x, &s.y, d)?.mul_vec(v);
    Ok(vdot.iter().zip(nv).map(|(a, b)| a + b).collect())
}

/// `(Dy/dt, D^2y/dt^2)` along `traj`, with `D` the Berwald covariant rate.
/// `dy/dt` is read from the stored `2 y2`; the outer time derivative is
/// differenced, so the first and last [`SERIES_EDGE`] samples are less accurate.
pub fn berwald_acceleration_rates(
    model: &dyn GeometryModel,
    traj: &Trajectory,
    d: &DiffStrategy,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let mut first = Vec::with_capacity(traj.len());
    let mut conns = Vec::with_capacity(traj.len());
    for k in 0..traj.len() {
        let s = traj.state(k)?.first_order();
        check_state(model, &s)?;
        let n = connection_at(model, &s.x, &s.y, d)?;
        let ny = n.mul_vec(&s.y);
        first.push((0..s.dim()).map(|i| 2.0 * traj.y2[k][i] + ny[i]).collect::<Vec<_>>());
        conns.push(n);
    }
    let rate = vector_series_derivative(&first, traj.dt, SeriesOrder::First)?;
    let second = rate
        .iter()
        .zip(&first)
        .zip(&conns)
        .map(|((r, f), n)| r.iter().zip(n.mul_vec(f)).map(|(a, b)| a + b).collect())
        .collect();
    Ok((first, second))
}

fn coefficients<F>(traj: &Trajectory, k: usize, mc: &F) -> Result<DualCoefficients>
where
    F: Fn(&SecondOrderState) -> Result<DualCoefficients>,
{
    mc(&traj.state(k)?)
}

/// `|v2-component|_inf` of the lift `(w, dw/dt, (1/2) d^2w/dt^2)` of the
/// deviation field at every sample; `dw/dt` and `d^2w/dt^2` are differenced.
/// Vanishes along solutions of `w'' + 2 M1 w' + 2 M2 w = 0`.
pub fn v2_residual<F>(traj: &Trajectory, mc: F) -> Result<Vec<f64>>
where
    F: Fn(&SecondOrderState) -> Result<DualCoefficients>,
{
    let w = traj
        .w
        .as_ref()
        .ok_or_else(|| Error::InvalidSpec("trajectory carries no deviation field".into()))?;
    let wdot = vector_series_derivative(w, traj.dt, SeriesOrder::First)?;
    let wddot = vector_series_derivative(w, traj.dt, SeriesOrder::Second)?;
    (0..traj.len())
        .map(|k| {
            let half: Vec<f64> = wddot[k].iter().map(|v| 0.5 * v).collect();
            let (_, _, v2) = adapted_components(&w[k], &wdot[k], &half, &coefficients(traj, k, &mc)?)?;
            Ok(max_abs(&v2))
        })
        .collect()
}

/// `(|delta y1/dt|_inf, |delta y2/dt|_inf)` of the extension's velocity at every
/// sample, with `dx/dt`, `dy/dt`, `dy2/dt` differenced from the samples.
pub fn horizontality_residual<F>(traj: &Trajectory, mc: F) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(&SecondOrderState) -> Result<DualCoefficients>,
{
    let xdot = vector_series_derivative(&traj.x, traj.dt, SeriesOrder::First)?;
    let ydot = vector_series_derivative(&traj.y, traj.dt, SeriesOrder::First)?;
    let y2dot = vector_series_derivative(&traj.y2, traj.dt, SeriesOrder::First)?;
    let mut r1 = Vec::with_capacity(traj.len());
    let mut r2 = Vec::with_capacity(traj.len());
    for k in 0..traj.len() {
        let (_, v1, v2) = adapted_components(&xdot[k], &ydot[k], &y2dot[k], &coefficients(traj, k, &mc)?)?;
        r1.push(max_abs(&v1));
        r2.push(max_abs(&v2));
    }
    Ok((r1, r2))
}

/// Supremum of a residual series, skipping [`SERIES_EDGE`] samples at each end.
pub fn interior_sup(residual: &[f64]) -> f64 {
    if residual.len() <= 2 * SERIES_EDGE {
        return f64::NAN;
    }
    residual[SERIES_EDGE..residual.len() - SERIES_EDGE]
        .iter()
        .fold(0.0, |a: f64, &b| if b.is_nan() { f64::NAN } else { a.max(b) })
}
