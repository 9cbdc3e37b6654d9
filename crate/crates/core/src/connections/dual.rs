use serde::{Deserialize, Serialize};

use super::curvature::curvature_r;
use super::spray::{berwald_at, connection_at, connection_dx_at};
use crate::diff::{directional, DiffStrategy};
use crate::error::{check_dim, Result};
use crate::metric::{check_state, force_jacobians};
use crate::model::{ForceField, GeometryModel};
use crate::state::SecondOrderState;
use crate::tensor::{max_abs, SquareField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Built from the second variation of the Lagrangian with forces.
    Ours,
    /// Miron's pair `M2 = (1/2)(C(M1) + M1 M1)`.
    Miron,
    /// Halved coefficients of a user-supplied linear second-order system.
    PdeSupplied,
}

/// Dual coefficients `(M1, M2)` of a nonlinear connection on the second-order
/// tangent bundle: `delta y1 = dy + M1 dx`, `delta y2 = dy2 + M1 dy + M2 dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCoefficients {
    pub m1: SquareField,
    pub m2: SquareField,
    pub evaluated_at: Option<SecondOrderState>,
    pub provenance: Provenance,
}

/// `C(f) = y^k df/dx^k + 2 y2^k df/dy^k`, the derivative of `f` along the
/// extension direction; a single directional stencil.
pub fn c_operator<F>(field: F, s2: &SecondOrderState, d: &DiffStrategy) -> Result<SquareField>
where
    F: Fn(&[f64], &[f64]) -> Result<SquareField>,
{
    let n = s2.dim();
    let dy: Vec<f64> = s2.y2.iter().map(|v| 2.0 * v).collect();
    let flat = directional(|x, y| field(x, y).map(|m| m.as_slice().to_vec()), &s2.x, &s2.y, &s2.y, &dy, d.h3)?;
    SquareField::from_flat(n, &flat)
}

/// `C(N)`, from analytic `dN/dx` and Berwald coefficients when both exist.
fn c_of_connection(model: &dyn GeometryModel, s2: &SecondOrderState, d: &DiffStrategy) -> Result<SquareField> {
    let (x, y) = (&s2.x[..], &s2.y[..]);
    let n = s2.dim();
    if d.uses_analytic() && model.connection_dx(x, y).is_some() && model.berwald(x, y).is_some() {
        let dn = connection_dx_at(model, x, y, d)?;
        let l = berwald_at(model, x, y, d)?;
        return Ok(SquareField::from_fn(n, |i, j| {
            (0..n)
                .map(|k| y[k] * dn.get(i, j, k) + 2.0 * s2.y2[k] * l.get(i, j, k))
                .sum()
        }));
    }
    c_operator(|x, y| connection_at(model, x, y, d), s2, d)
}

/// Dual coefficients whose `v2`-horizontal lifts are the Jacobi fields of
/// `delta y / dt = F`:
///
/// `M1 = N - (1/2) dF/dy`,
/// `M2 = (1/2)(C(N) + N N - y^k R^i_jk - L^i_jk F^k - dF/dx)`.
///
/// The force term enters with a minus sign; it is what the linearization of
/// `x'' + 2G(x, x') = F(x, x')` produces when `C` is evaluated at
/// `y2 = -G + F/2`.
pub fn our_dual_coefficients(
    model: &dyn GeometryModel,
    force: &dyn ForceField,
    s2: &SecondOrderState,
    d: &DiffStrategy,
) -> Result<DualCoefficients> {
    let s = s2.first_order();
    check_state(model, &s)?;
    let (x, y) = (&s2.x[..], &s2.y[..]);
    let n = connection_at(model, x, y, d)?;
    let f = force.force(x, y);
    check_dim(s2.dim(), f.len())?;
    let (fx, fy) = force_jacobians(force, x, y, d)?;
    let c = c_of_connection(model, s2, d)?;
    let yr = curvature_r(model, &s, d)?.contract_last(y);

    let mut inner = &(&c + &(&n * &n)) - &yr;
    if max_abs(&f) > 0.0 {
        let lf = berwald_at(model, x, y, d)?.contract_last(&f);
        inner = &inner - &lf;
    }
    let m2 = (&inner - &fx).scale(0.5);
    let m1 = &n - &fy.scale(0.5);
    Ok(DualCoefficients {
        m1,
        m2,
        evaluated_at: Some(s2.clone()),
        provenance: Provenance::Ours,
    })
}

/// Miron's pair restricted to `M1 = N^i_j(x, y)`: `M2 = (1/2)(C(N) + N N)`.
pub fn miron_dual_coefficients(
    model: &dyn GeometryModel,
    s2: &SecondOrderState,
    d: &DiffStrategy,
) -> Result<DualCoefficients> {
    check_state(model, &s2.first_order())?;
    let n = connection_at(model, &s2.x, &s2.y, d)?;
    let c = c_of_connection(model, s2, d)?;
    let m2 = (&c + &(&n * &n)).scale(0.5);
    Ok(DualCoefficients {
        m1: n,
        m2,
        evaluated_at: Some(s2.clone()),
        provenance: Provenance::Miron,
    })
}

/// Dual coefficients of the system
/// `d^2X/dt^2 + a dX/dt + b X = 0`: `M1 = a/2`, `M2 = b/2`.
pub fn from_pde_coefficients(a: &SquareField, b: &SquareField) -> Result<DualCoefficients> {
    check_dim(a.dim(), b.dim())?;
    Ok(DualCoefficients {
        m1: a.scale(0.5),
        m2: b.scale(0.5),
        evaluated_at: None,
        provenance: Provenance::PdeSupplied,
    })
}

/// Components of a tangent vector in the adapted frame:
/// `(dx/dt, dy1/dt + M1 dx/dt, dy2/dt + M1 dy1/dt + M2 dx/dt)`.
pub fn adapted_components(
    dxdt: &[f64],
    dy1dt: &[f64],
    dy2dt: &[f64],
    mc: &DualCoefficients,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let n = mc.m1.dim();
    check_dim(n, dxdt.len())?;
    check_dim(n, dy1dt.len())?;
    check_dim(n, dy2dt.len())?;
    let m1dx = mc.m1.mul_vec(dxdt);
    let m1dy = mc.m1.mul_vec(dy1dt);
    let m2dx = mc.m2.mul_vec(dxdt);
    let v1 = (0..n).map(|i| dy1dt[i] + m1dx[i]).collect();
    let v2 = (0..n).map(|i| dy2dt[i] + m1dy[i] + m2dx[i]).collect();
    Ok((dxdt.to_vec(), v1, v2))
}
