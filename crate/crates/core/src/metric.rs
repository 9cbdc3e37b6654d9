//! Lagrangian derivatives, the induced metric `g_ij = (1/2) d^2L/dy^i dy^j`
//! and its inverse.

use nalgebra::DMatrix;

use crate::diff::{partial_x, partial_y, DiffStrategy};
use crate::error::{check_dim, Error, Result};
use crate::model::{ForceField, GeometryModel, LagrangianDerivatives};
use crate::state::FirstOrderState;
use crate::tensor::SquareField;

/// Condition number above which a metric is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

pub(crate) fn check_state(model: &dyn GeometryModel, s: &FirstOrderState) -> Result<()> {
    check_dim(model.dim(), s.dim())?;
    let y_min = model.y_min();
    let norm = s.speed();
    if norm < y_min {
        return Err(Error::SingularVelocity { norm, y_min });
    }
    model.check_domain(&s.x).map_err(Error::DomainExit)
}

fn scalar_l<'a>(model: &'a dyn GeometryModel) -> impl Fn(&[f64], &[f64]) -> Result<Vec<f64>> + 'a {
    move |x: &[f64], y: &[f64]| Ok(vec![model.lagrangian(x, y)])
}

fn grad_y_l<'a>(model: &'a dyn GeometryModel, h: f64) -> impl Fn(&[f64], &[f64]) -> Result<Vec<f64>> + 'a {
    move |x: &[f64], y: &[f64]| {
        (0..y.len())
            .map(|s| partial_y(scalar_l(model), x, y, s, h).map(|v| v[0]))
            .collect()
    }
}

/// Derivatives of `L` needed by the canonical spray, analytic when the model
/// provides them and the strategy allows it.
pub fn lagrangian_derivatives(
    model: &dyn GeometryModel,
    s: &FirstOrderState,
    d: &DiffStrategy,
) -> Result<LagrangianDerivatives> {
    if d.uses_analytic() {
        if let Some(ld) = model.lagrangian_derivatives(&s.x, &s.y) {
            return Ok(ld);
        }
    }
    let n = s.dim();
    let (x, y) = (&s.x[..], &s.y[..]);
    let dl_dx = (0..n)
        .map(|k| partial_x(scalar_l(model), x, y, k, d.h1).map(|v| v[0]))
        .collect::<Result<Vec<f64>>>()?;
    let grad = grad_y_l(model, d.h2);
    let mut d2l_dy2 = SquareField::zeros(n);
    let mut d2l_dydx = SquareField::zeros(n);
    for j in 0..n {
        let col_y = partial_y(&grad, x, y, j, d.h2)?;
        let col_x = partial_x(&grad, x, y, j, d.h2)?;
        for i in 0..n {
            d2l_dy2.set(i, j, col_y[i]);
            d2l_dydx.set(i, j, col_x[i]);
        }
    }
    Ok(LagrangianDerivatives {
        dl_dx,
        d2l_dy2,
        d2l_dydx,
    })
}

/// `d^2L/dy^i dy^j` before symmetrization.
pub fn lagrangian_hessian_y(
    model: &dyn GeometryModel,
    s: &FirstOrderState,
    d: &DiffStrategy,
) -> Result<SquareField> {
    check_state(model, s)?;
    if d.uses_analytic() {
        if let Some(ld) = model.lagrangian_derivatives(&s.x, &s.y) {
            return Ok(ld.d2l_dy2);
        }
    }
    let n = s.dim();
    let grad = grad_y_l(model, d.h2);
    let mut h = SquareField::zeros(n);
    for j in 0..n {
        let col = partial_y(&grad, &s.x, &s.y, j, d.h2)?;
        for (i, v) in col.into_iter().enumerate() {
            h.set(i, j, v);
        }
    }
    Ok(h)
}

/// The Lagrange metric `g_ij = (1/2) d^2L/dy^i dy^j`, symmetrized.
pub fn metric_tensor(model: &dyn GeometryModel, s: &FirstOrderState, d: &DiffStrategy) -> Result<SquareField> {
    let g = lagrangian_hessian_y(model, s, d)?.scale(0.5).symmetrized();
    if !g.is_finite() {
        return Err(Error::NonFinite("metric"));
    }
    Ok(g)
}

/// 2-norm condition number via singular values.
pub fn condition_number(g: &SquareField) -> f64 {
    let n = g.dim();
    let m = DMatrix::from_row_slice(n, n, g.as_slice());
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `g^ij`. Fails with `SingularMetric` when the condition number exceeds
/// [`MAX_CONDITION`].
pub fn invert_metric(g: &SquareField) -> Result<SquareField> {
    let n = g.dim();
    let cond = condition_number(g);
    if !(cond <= MAX_CONDITION) {
        return Err(Error::SingularMetric { cond });
    }
    let m = DMatrix::from_row_slice(n, n, g.as_slice());
    let inv = m.try_inverse().ok_or(Error::SingularMetric { cond })?;
    Ok(SquareField::from_fn(n, |i, j| inv[(i, j)]))
}

/// `(dF/dx, dF/dy)`, analytic when available.
pub fn force_jacobians(
    force: &dyn ForceField,
    x: &[f64],
    y: &[f64],
    d: &DiffStrategy,
) -> Result<(SquareField, SquareField)> {
    let n = x.len();
    let analytic = d.uses_analytic();
    let f = |x: &[f64], y: &[f64]| Ok(force.force(x, y));
    let fd = |wrt_x: bool| -> Result<SquareField> {
        let mut m = SquareField::zeros(n);
        for j in 0..n {
            let col = if wrt_x {
                partial_x(f, x, y, j, d.h1)?
            } else {
                partial_y(f, x, y, j, d.h1)?
            };
            check_dim(n, col.len())?;
            for (i, v) in col.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        Ok(m)
    };
    let fx = match force.force_dx(x, y).filter(|_| analytic) {
        Some(m) => m,
        None => fd(true)?,
    };
    let fy = match force.force_dy(x, y).filter(|_| analytic) {
        Some(m) => m,
        None => fd(false)?,
    };
    Ok((fx, fy))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_diagonal() {
        let g = SquareField::from_diag(&[1.0, 0.5]);
        let inv = invert_metric(&g).unwrap();
        assert_eq!(inv.to_rows(), vec![vec![1.0, 0.0], vec![0.0, 2.0]]);
        assert_eq!(invert_metric(&SquareField::identity(3)).unwrap(), SquareField::identity(3));
    }

    #[test]
    fn near_singular_metric_is_rejected() {
        let g = SquareField::from_diag(&[1.0, 1e-13]);
        assert!(matches!(invert_metric(&g), Err(Error::SingularMetric { .. })));
        let g = SquareField::zeros(2);
        assert!(matches!(invert_metric(&g), Err(Error::SingularMetric { .. })));
    }

    #[test]
    fn random_spd_inverse_residual() {
        // A = B B^T + I for a fixed B.
        let b = [[0.3, -1.2, 0.5], [0.7, 0.1, -0.4], [1.1, 0.9, 0.2]];
        let a = SquareField::from_fn(3, |i, j| {
            (0..3).map(|k| b[i][k] * b[j][k]).sum::<f64>() + if i == j { 1.0 } else { 0.0 }
        });
        let inv = invert_metric(&a).unwrap();
        let resid = (&(&a * &inv) - &SquareField::identity(3)).max_abs();
        assert!(resid < 1e-10 * condition_number(&a), "{resid}");
    }
}
