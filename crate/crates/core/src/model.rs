//! Model interfaces: the Lagrangian that generates all geometry, and the
//! external force field.

use crate::tensor::{CubeField, SquareField, Tensor4};

/// Analytic partial derivatives of a Lagrangian at `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianDerivatives {
    /// `dL/dx^s`
    pub dl_dx: Vec<f64>,
    /// `d^2 L / dy^i dy^j`
    pub d2l_dy2: SquareField,
    /// `d^2 L / dy^s dx^j`, indexed `(s, j)`
    pub d2l_dydx: SquareField,
}

/// A first-order Lagrangian `L(x, y)` and, optionally, analytic derivatives
/// of it and of its spray.
///
/// Every optional callback returning `None` is replaced by finite differences
/// of the next lower level; in forced finite-difference mode they are all
/// ignored. Implementations must be reentrant.
pub trait GeometryModel: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn lagrangian(&self, x: &[f64], y: &[f64]) -> f64;

    /// `true` when `L(x, s y) = s^2 L(x, y)` for `s > 0`, so the spray is
    /// 2-homogeneous.
    fn is_spray_homogeneous(&self) -> bool {
        true
    }

    /// Radius of the cone around `y = 0` where the Lagrangian is not smooth.
    fn y_min(&self) -> f64 {
        0.0
    }

    /// `Err(reason)` when `x` is outside the working chart.
    fn check_domain(&self, _x: &[f64]) -> std::result::Result<(), String> {
        Ok(())
    }

    fn lagrangian_derivatives(&self, _x: &[f64], _y: &[f64]) -> Option<LagrangianDerivatives> {
        None
    }

    /// `N^i_j = dG^i/dy^j`
    fn connection(&self, _x: &[f64], _y: &[f64]) -> Option<SquareField> {
        None
    }

    /// `dN^i_j/dx^k`, indexed `(i, j, k)`
    fn connection_dx(&self, _x: &[f64], _y: &[f64]) -> Option<CubeField> {
        None
    }

    /// Berwald coefficients `L^i_jk = d^2 G^i / dy^j dy^k`
    fn berwald(&self, _x: &[f64], _y: &[f64]) -> Option<CubeField> {
        None
    }

    /// `dL^i_jk/dx^l`, indexed `(i, j, k, l)`
    fn berwald_dx(&self, _x: &[f64], _y: &[f64]) -> Option<Tensor4> {
        None
    }

    /// `dL^i_jk/dy^l`, indexed `(i, j, k, l)`
    fn berwald_dy(&self, _x: &[f64], _y: &[f64]) -> Option<Tensor4> {
        None
    }
}

/// External force `F^i(x, y)`. Trajectories satisfy `dy/dt + N y = F`, i.e.
/// `d^2x/dt^2 + 2G(x, dx/dt) = F`.
pub trait ForceField: Send + Sync {
    fn name(&self) -> &str;

    fn force(&self, x: &[f64], y: &[f64]) -> Vec<f64>;

    /// `dF^i/dx^j`
    fn force_dx(&self, _x: &[f64], _y: &[f64]) -> Option<SquareField> {
        None
    }

    /// `dF^i/dy^j`
    fn force_dy(&self, _x: &[f64], _y: &[f64]) -> Option<SquareField> {
        None
    }
}

/// The zero force.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoForce;

impl ForceField for NoForce {
    fn name(&self) -> &str {
        "zero"
    }

    fn force(&self, _x: &[f64], y: &[f64]) -> Vec<f64> {
        vec![0.0; y.len()]
    }

    fn force_dx(&self, x: &[f64], _y: &[f64]) -> Option<SquareField> {
        Some(SquareField::zeros(x.len()))
    }

    fn force_dy(&self, x: &[f64], _y: &[f64]) -> Option<SquareField> {
        Some(SquareField::zeros(x.len()))
    }
}
