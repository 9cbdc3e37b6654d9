use crate::diff::{partial_x, partial_y, DiffStrategy};
use crate::error::{Error, Result};
use crate::metric::{check_state, invert_metric, lagrangian_derivatives};
use crate::model::GeometryModel;
use crate::state::FirstOrderState;
use crate::tensor::{ensure_finite, CubeField, SquareField, Tensor4};

/// Spray, nonlinear connection and Berwald coefficients at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionPack {
    /// `G^i`
    pub spray: Vec<f64>,
    /// `N^i_j`
    pub n: SquareField,
    /// `L^i_jk`
    pub berwald: CubeField,
    pub evaluated_at: FirstOrderState,
}

impl ConnectionPack {
    /// `max_i |2G^i - N^i_j y^j|`; zero for 2-homogeneous sprays.
    pub fn euler_residual(&self) -> f64 {
        let ny = self.n.mul_vec(&self.evaluated_at.y);
        self.spray
            .iter()
            .zip(&ny)
            .fold(0.0_f64, |m, (g, v)| m.max((2.0 * g - v).abs()))
    }
}

/// Canonical spray `2G^i = (1/2) g^is (d^2L/dy^s dx^j y^j - dL/dx^s)`.
pub fn spray_coefficients(model: &dyn GeometryModel, s: &FirstOrderState, d: &DiffStrategy) -> Result<Vec<f64>> {
    check_state(model, s)?;
    spray_at(model, &s.x, &s.y, d)
}

pub(crate) fn spray_at(model: &dyn GeometryModel, x: &[f64], y: &[f64], d: &DiffStrategy) -> Result<Vec<f64>> {
    let s = FirstOrderState {
        x: x.to_vec(),
        y: y.to_vec(),
    };
    let ld = lagrangian_derivatives(model, &s, d)?;
    let g = ld.d2l_dy2.scale(0.5).symmetrized();
    let ginv = invert_metric(&g)?;
    let mixed = ld.d2l_dydx.mul_vec(y);
    let rhs: Vec<f64> = mixed.iter().zip(&ld.dl_dx).map(|(a, b)| a - b).collect();
    let spray: Vec<f64> = ginv.mul_vec(&rhs).into_iter().map(|v| 0.25 * v).collect();
    ensure_finite(&spray, "spray")?;
    Ok(spray)
}

/// Columns `df/dx^k` (or `df/dy^k`) of a flattened field, `k = 0..n`.
fn jacobian_columns<F>(f: F, x: &[f64], y: &[f64], wrt_x: bool, h: f64) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64], &[f64]) -> Result<Vec<f64>>,
{
    (0..x.len())
        .map(|k| if wrt_x { partial_x(&f, x, y, k, h) } else { partial_y(&f, x, y, k, h) })
        .collect()
}

/// `N^i_j = dG^i/dy^j`.
pub fn nonlinear_connection(model: &dyn GeometryModel, s: &FirstOrderState, d: &DiffStrategy) -> Result<SquareField> {
    check_state(model, s)?;
    connection_at(model, &s.x, &s.y, d)
}

pub(crate) fn connection_at(model: &dyn GeometryModel, x: &[f64], y: &[f64], d: &DiffStrategy) -> Result<SquareField> {
    if d.uses_analytic() {
        if let Some(n) = model.connection(x, y) {
            return Ok(n);
        }
    }
    let cols = jacobian_columns(|x, y| spray_at(model, x, y, d), x, y, false, d.h3)?;
    Ok(SquareField::from_fn(x.len(), |i, j| cols[j][i]))
}

/// `dN^i_j/dx^k` as `(i, j, k)`.
pub(crate) fn connection_dx_at(
    model: &dyn GeometryModel,
    x: &[f64],
    y: &[f64],
    d: &DiffStrategy,
) -> Result<CubeField> {
    if d.uses_analytic() {
        if let Some(c) = model.connection_dx(x, y) {
            return Ok(c);
        }
    }
    let n = x.len();
    let cols = jacobian_columns(|x, y| connection_at(model, x, y, d).map(|m| m.as_slice().to_vec()), x, y, true, d.h3)?;
    Ok(CubeField::from_fn(n, |i, j, k| cols[k][i * n + j]))
}

/// Berwald coefficients `L^i_jk = dN^i_j/dy^k`, symmetrized in `(j, k)`.
pub fn berwald_coefficients(model: &dyn GeometryModel, s: &FirstOrderState, d: &DiffStrategy) -> Result<CubeField> {
    check_state(model, s)?;
    berwald_at(model, &s.x, &s.y, d)
}

pub(crate) fn berwald_at(model: &dyn GeometryModel, x: &[f64], y: &[f64], d: &DiffStrategy) -> Result<CubeField> {
    if d.uses_analytic() {
        if let Some(l) = model.berwald(x, y) {
            return Ok(l.symmetrized_lower());
        }
    }
    let n = x.len();
    let cols = jacobian_columns(|x, y| connection_at(model, x, y, d).map(|m| m.as_slice().to_vec()), x, y, false, d.h3)?;
    Ok(CubeField::from_fn(n, |i, j, k| cols[k][i * n + j]).symmetrized_lower())
}

fn berwald_derivative(model: &dyn GeometryModel, x: &[f64], y: &[f64], d: &DiffStrategy, wrt_x: bool) -> Result<Tensor4> {
    let n = x.len();
    let cols = jacobian_columns(|x, y| berwald_at(model, x, y, d).map(|c| c.as_slice().to_vec()), x, y, wrt_x, d.h3)?;
    Ok(Tensor4::from_fn(n, |i, j, k, l| cols[l][(i * n + j) * n + k]))
}

/// `dL^i_jk/dx^l` as `(i, j, k, l)`.
pub(crate) fn berwald_dx_at(model: &dyn GeometryModel, x: &[f64], y: &[f64], d: &DiffStrategy) -> Result<Tensor4> {
    if d.uses_analytic() {
        if let Some(t) = model.berwald_dx(x, y) {
            return Ok(t);
        }
    }
    berwald_derivative(model, x, y, d, true)
}

/// `dL^i_jk/dy^l` as `(i, j, k, l)`.
pub(crate) fn berwald_dy_at(model: &dyn GeometryModel, x: &[f64], y: &[f64], d: &DiffStrategy) -> Result<Tensor4> {
    if d.uses_analytic() {
        if let Some(t) = model.berwald_dy(x, y) {
            return Ok(t);
        }
    }
    berwald_derivative(model, x, y, d, false)
}

/// Spray, connection and Berwald coefficients in one call.
pub fn connection_pack(model: &dyn GeometryModel, s: &FirstOrderState, d: &DiffStrategy) -> Result<ConnectionPack> {
    check_state(model, s)?;
    let spray = spray_at(model, &s.x, &s.y, d)?;
    let n = connection_at(model, &s.x, &s.y, d)?;
    let berwald = berwald_at(model, &s.x, &s.y, d)?;
    if !n.is_finite() {
        return Err(Error::NonFinite("nonlinear connection"));
    }
    Ok(ConnectionPack {
        spray,
        n,
        berwald,
        evaluated_at: s.clone(),
    })
}
