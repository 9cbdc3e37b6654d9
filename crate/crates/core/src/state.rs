use crate::error::{check_dim, Error, Result};

/// Chart coordinates `x^i` of a point of the base manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct BasePoint {
    pub x: Vec<f64>,
}

impl BasePoint {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidSpec("base point needs at least one coordinate".into()));
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("base point"));
        }
        Ok(Self { x })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// A point `(x, y)` of the tangent bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl FirstOrderState {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_dim(x.len(), y.len())?;
        if x.is_empty() {
            return Err(Error::InvalidSpec("state needs at least one coordinate".into()));
        }
        if !x.iter().chain(&y).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("first-order state"));
        }
        Ok(Self { x, y })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn speed(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Lifts to the second-order bundle with the given `y^(2)`.
    pub fn with_y2(&self, y2: Vec<f64>) -> Result<SecondOrderState> {
        SecondOrderState::new(self.x.clone(), self.y.clone(), y2)
    }
}

/// A point `(x, y, y^(2))` of the second-order tangent bundle. Along the
/// extension of a curve, `y = dx/dt` and `y^(2) = (1/2) d^2x/dt^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub y2: Vec<f64>,
}

impl SecondOrderState {
    pub fn new(x: Vec<f64>, y: Vec<f64>, y2: Vec<f64>) -> Result<Self> {
        check_dim(x.len(), y.len())?;
        check_dim(x.len(), y2.len())?;
        if x.is_empty() {
            return Err(Error::InvalidSpec("state needs at least one coordinate".into()));
        }
        if !x.iter().chain(&y).chain(&y2).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("second-order state"));
        }
        Ok(Self { x, y, y2 })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn first_order(&self) -> FirstOrderState {
        FirstOrderState {
            x: self.x.clone(),
            y: self.y.clone(),
        }
    }
}
