use std::sync::Arc;

use crate::model::ForceField;
use crate::tensor::SquareField;

/// `F = -k y`
pub struct LinearDrag {
    pub k: f64,
}

impl ForceField for LinearDrag {
    fn name(&self) -> &str {
        "linear_drag"
    }
    fn force(&self, _x: &[f64], y: &[f64]) -> Vec<f64> {
        y.iter().map(|v| -self.k * v).collect()
    }
    fn force_dx(&self, x: &[f64], _y: &[f64]) -> Option<SquareField> {
        Some(SquareField::zeros(x.len()))
    }
    fn force_dy(&self, x: &[f64], _y: &[f64]) -> Option<SquareField> {
        Some(SquareField::identity(x.len()).scale(-self.k))
    }
}

/// `F = -K x`
pub struct PositionSpring {
    pub k: SquareField,
}

impl ForceField for PositionSpring {
    fn name(&self) -> &str {
        "position_spring"
    }
    fn force(&self, x: &[f64], _y: &[f64]) -> Vec<f64> {
        self.k.mul_vec(x).into_iter().map(|v| -v).collect()
    }
    fn force_dx(&self, _x: &[f64], _y: &[f64]) -> Option<SquareField> {
        Some(self.k.scale(-1.0))
    }
    fn force_dy(&self, x: &[f64], _y: &[f64]) -> Option<SquareField> {
        Some(SquareField::zeros(x.len()))
    }
}

pub type ForceFn = dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync;

/// User force; Jacobians by finite differences.
pub struct CallbackForce {
    pub f: Arc<ForceFn>,
}

impl ForceField for CallbackForce {
    fn name(&self) -> &str {
        "callback"
    }
    fn force(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        (self.f)(x, y)
    }
}
