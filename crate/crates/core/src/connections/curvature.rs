use super::spray::{berwald_at, berwald_dx_at, berwald_dy_at, connection_at, connection_dx_at};
use crate::diff::{directional, unit, DiffStrategy};
use crate::error::Result;
use crate::metric::check_state;
use crate::model::GeometryModel;
use crate::state::FirstOrderState;
use crate::tensor::{CubeField, SquareField, Tensor4};

/// Torsion component and Berwald curvatures at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureData {
    /// `R^i_jk`, antisymmetric in `(j, k)`.
    pub r_tor: CubeField,
    /// `R_j^i_kl` stored as `(j, i, k, l)`.
    pub r_hh: Tensor4,
    /// `P_j^i_kl = dL^i_jk/dy^l` stored as `(j, i, k, l)`.
    pub p_hv: Tensor4,
    /// `max |y^h R_h^i_jk - R^i_jk|`. Vanishes for spray-induced connections;
    /// reported, not enforced.
    pub contraction_residual: f64,
    pub evaluated_at: FirstOrderState,
}

/// Applies `delta_(0)i = d/dx^i - N^j_i d/dy^j` to a field of `(x, y)`.
/// Row `i` of the result is `delta_(0)i f`.
pub fn delta0_derivative<F>(f: F, s: &FirstOrderState, n: &SquareField, d: &DiffStrategy) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64], &[f64]) -> Result<Vec<f64>>,
{
    let dim = s.dim();
    (0..dim)
        .map(|i| {
            let dx = unit(dim, i);
            let dy: Vec<f64> = (0..dim).map(|j| -n.get(j, i)).collect();
            directional(&f, &s.x, &s.y, &dx, &dy, d.h3)
        })
        .collect()
}

/// `D(i, j, k) = delta_(0)k N^i_j`.
fn delta_connection(model: &dyn GeometryModel, s: &FirstOrderState, d: &DiffStrategy) -> Result<CubeField> {
    let dim = s.dim();
    let n = connection_at(model, &s.x, &s.y, d)?;
    let analytic = d.uses_analytic()
        && model.connection_dx(&s.x, &s.y).is_some()
        && model.berwald(&s.x, &s.y).is_some();
    if analytic {
        let dn = connection_dx_at(model, &s.x, &s.y, d)?;
        let l = berwald_at(model, &s.x, &s.y, d)?;
        return Ok(CubeField::from_fn(dim, |i, j, k| {
            dn.get(i, j, k) - (0..dim).map(|m| n.get(m, k) * l.get(i, j, m)).sum::<f64>()
        }));
    }
    let rows = delta0_derivative(
        |x, y| connection_at(model, x, y, d).map(|m| m.as_slice().to_vec()),
        s,
        &n,
        d,
    )?;
    Ok(CubeField::from_fn(dim, |i, j, k| rows[k][i * dim + j]))
}

/// `R^i_jk = delta_(0)k N^i_j - delta_(0)j N^i_k`.
pub fn curvature_r(model: &dyn GeometryModel, s: &FirstOrderState, d: &DiffStrategy) -> Result<CubeField> {
    check_state(model, s)?;
    let dn = delta_connection(model, s, d)?;
    Ok(CubeField::from_fn(s.dim(), |i, j, k| dn.get(i, j, k) - dn.get(i, k, j)))
}

/// `delta_(0)l L^i_jk` as `(i, j, k, l)`.
fn delta_berwald(model: &dyn GeometryModel, s: &FirstOrderState, n: &SquareField, d: &DiffStrategy) -> Result<Tensor4> {
    let dim = s.dim();
    let analytic = d.uses_analytic()
        && model.berwald_dx(&s.x, &s.y).is_some()
        && model.berwald_dy(&s.x, &s.y).is_some();
    if analytic {
        let lx = berwald_dx_at(model, &s.x, &s.y, d)?;
        let ly = berwald_dy_at(model, &s.x, &s.y, d)?;
        return Ok(Tensor4::from_fn(dim, |i, j, k, l| {
            lx.get(i, j, k, l) - (0..dim).map(|m| n.get(m, l) * ly.get(i, j, k, m)).sum::<f64>()
        }));
    }
    let rows = delta0_derivative(
        |x, y| berwald_at(model, x, y, d).map(|c| c.as_slice().to_vec()),
        s,
        n,
        d,
    )?;
    Ok(Tensor4::from_fn(dim, |i, j, k, l| rows[l][(i * dim + j) * dim + k]))
}

/// Horizontal and mixed curvatures of the Berwald connection together with the
/// torsion component `R^i_jk`.
pub fn berwald_curvatures(model: &dyn GeometryModel, s: &FirstOrderState, d: &DiffStrategy) -> Result<CurvatureData> {
    check_state(model, s)?;
    let dim = s.dim();
    let n = connection_at(model, &s.x, &s.y, d)?;
    let l = berwald_at(model, &s.x, &s.y, d)?;
    let dl = delta_berwald(model, s, &n, d)?;
    let ly = berwald_dy_at(model, &s.x, &s.y, d)?;
    let r_tor = curvature_r(model, s, d)?;

    let r_hh = Tensor4::from_fn(dim, |j, i, k, l_| {
        let quad: f64 = (0..dim)
            .map(|m| l.get(m, j, k) * l.get(i, m, l_) - l.get(m, j, l_) * l.get(i, m, k))
            .sum();
        dl.get(i, j, k, l_) - dl.get(i, j, l_, k) + quad
    });
    let p_hv = Tensor4::from_fn(dim, |j, i, k, l_| ly.get(i, j, k, l_));

    let mut contraction_residual: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                let contracted: f64 = (0..dim).map(|h| s.y[h] * r_hh.get(h, i, j, k)).sum();
                contraction_residual = contraction_residual.max((contracted - r_tor.get(i, j, k)).abs());
            }
        }
    }

    Ok(CurvatureData {
        r_tor,
        r_hh,
        p_hv,
        contraction_residual,
        evaluated_at: s.clone(),
    })
}
