//! Non-Riemannian presets: Randers metrics and locally Minkowski norms.

use std::sync::Arc;

use crate::model::{GeometryModel, LagrangianDerivatives};
use crate::tensor::{CubeField, SquareField, Tensor4};

/// Default singular-cone radius for Lagrangians that are only smooth off `y = 0`.
pub const FINSLER_Y_MIN: f64 = 1e-8;

/// `L = (|y| + b_i(x) y^i)^2` with the drift covector `b(x) = b0 + B x`,
/// `B_ij = d b_i / d x^j`. Positive definite while `|b(x)| < 1`.
pub struct RandersModel {
    pub b0: Vec<f64>,
    pub b_gradient: SquareField,
}

impl RandersModel {
    pub fn drift(&self, x: &[f64]) -> Vec<f64> {
        let bx = self.b_gradient.mul_vec(x);
        self.b0.iter().zip(bx).map(|(a, b)| a + b).collect()
    }
}

impl GeometryModel for RandersModel {
    fn name(&self) -> &str {
        "randers"
    }

    fn dim(&self) -> usize {
        self.b0.len()
    }

    fn lagrangian(&self, x: &[f64], y: &[f64]) -> f64 {
        let alpha = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let beta: f64 = self.drift(x).iter().zip(y).map(|(b, v)| b * v).sum();
        (alpha + beta).powi(2)
    }

    fn y_min(&self) -> f64 {
        FINSLER_Y_MIN
    }

    fn check_domain(&self, x: &[f64]) -> Result<(), String> {
        let norm = self.drift(x).iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1.0 {
            Ok(())
        } else {
            Err(format!("Randers drift |b(x)| = {norm} reached 1"))
        }
    }
}

pub type NormFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Locally Minkowski space: `L` depends on `y` only. The default quadratic
/// norm `L = sum (y^i)^2` has analytic (zero) connection data; a custom
/// `lagrangian(y)` is differentiated numerically.
pub struct MinkowskiModel {
    pub n: usize,
    pub lagrangian: Option<Arc<NormFn>>,
}

impl MinkowskiModel {
    fn quadratic(&self) -> bool {
        self.lagrangian.is_none()
    }
}

impl GeometryModel for MinkowskiModel {
    fn name(&self) -> &str {
        "minkowski_norm"
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn lagrangian(&self, _x: &[f64], y: &[f64]) -> f64 {
        match &self.lagrangian {
            Some(f) => f(y),
            None => y.iter().map(|v| v * v).sum(),
        }
    }

    fn y_min(&self) -> f64 {
        if self.quadratic() {
            0.0
        } else {
            FINSLER_Y_MIN
        }
    }

    fn lagrangian_derivatives(&self, _x: &[f64], _y: &[f64]) -> Option<LagrangianDerivatives> {
        self.quadratic().then(|| LagrangianDerivatives {
            dl_dx: vec![0.0; self.n],
            d2l_dy2: SquareField::identity(self.n).scale(2.0),
            d2l_dydx: SquareField::zeros(self.n),
        })
    }

    fn connection(&self, _x: &[f64], _y: &[f64]) -> Option<SquareField> {
        self.quadratic().then(|| SquareField::zeros(self.n))
    }

    fn connection_dx(&self, _x: &[f64], _y: &[f64]) -> Option<CubeField> {
        self.quadratic().then(|| CubeField::zeros(self.n))
    }

    fn berwald(&self, _x: &[f64], _y: &[f64]) -> Option<CubeField> {
        self.quadratic().then(|| CubeField::zeros(self.n))
    }

    fn berwald_dx(&self, _x: &[f64], _y: &[f64]) -> Option<Tensor4> {
        self.quadratic().then(|| Tensor4::zeros(self.n))
    }

    fn berwald_dy(&self, _x: &[f64], _y: &[f64]) -> Option<Tensor4> {
        self.quadratic().then(|| Tensor4::zeros(self.n))
    }
}
