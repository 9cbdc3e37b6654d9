//! Trajectories, deviation (Jacobi) fields and parallel transport, together
//! with the residuals that certify horizontality and vanishing
//! `v2`-components along extension curves.

mod flow;
mod residuals;
mod rk4;

use serde::{Deserialize, Serialize};

pub use flow::{
    deviation_oracle, geodesic_defect, integrate_jacobi, integrate_trajectory, on_extension_y2, parallel_transport,
    OracleOptions,
};
pub use residuals::{
    berwald_acceleration_rates, berwald_covariant_rate, horizontality_residual, interior_sup, v2_residual,
};

use crate::diff::{vector_series_derivative, SeriesOrder};
use crate::error::{Error, Result};
use crate::state::SecondOrderState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Fixed-step classical Runge-Kutta.
    #[default]
    Rk4,
}

/// Largest permitted number of steps.
pub const MAX_STEPS: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub method: Method,
}

impl IntegratorConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            method: Method::Rk4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidSpec(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::InvalidSpec(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.t_end / self.dt > MAX_STEPS {
            return Err(Error::InvalidSpec(format!(
                "t_end/dt = {} exceeds {MAX_STEPS}",
                self.t_end / self.dt
            )));
        }
        Ok(())
    }

    /// Number of steps; the grid ends at `steps * dt`, the multiple of `dt`
    /// nearest to `t_end`.
    pub fn steps(&self) -> usize {
        ((self.t_end / self.dt).round() as usize).max(1)
    }
}

/// A curve sampled on the uniform grid `t_k = k dt` together with its
/// extension to the second-order bundle: `y = dx/dt`, `y2 = (1/2) d^2x/dt^2`.
/// Optionally carries a deviation field `w` and its rate `w1 = dw/dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub y2: Vec<Vec<f64>>,
    pub w: Option<Vec<Vec<f64>>>,
    pub w1: Option<Vec<Vec<f64>>>,
}

impl Trajectory {
    /// Samples a known curve: `f(t)` returns `(x, dx/dt, d^2x/dt^2)`.
    pub fn from_curve<F>(dt: f64, steps: usize, f: F) -> Self
    where
        F: Fn(f64) -> (Vec<f64>, Vec<f64>, Vec<f64>),
    {
        let mut traj = Self::empty(dt);
        for k in 0..=steps {
            let t = k as f64 * dt;
            let (x, y, acc) = f(t);
            traj.t.push(t);
            traj.x.push(x);
            traj.y.push(y);
            traj.y2.push(acc.into_iter().map(|a| 0.5 * a).collect());
        }
        traj
    }

    pub(crate) fn empty(dt: f64) -> Self {
        Self {
            dt,
            t: Vec::new(),
            x: Vec::new(),
            y: Vec::new(),
            y2: Vec::new(),
            w: None,
            w1: None,
        }
    }

    /// Attaches a deviation field sampled by `f(t) = (w, dw/dt)`.
    pub fn with_deviation<F>(mut self, f: F) -> Self
    where
        F: Fn(f64) -> (Vec<f64>, Vec<f64>),
    {
        let (w, w1) = self.t.iter().map(|&t| f(t)).unzip();
        self.w = Some(w);
        self.w1 = Some(w1);
        self
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    pub fn state(&self, k: usize) -> Result<SecondOrderState> {
        if k >= self.len() {
            return Err(Error::IndexOutOfRange { index: k, len: self.len() });
        }
        Ok(SecondOrderState {
            x: self.x[k].clone(),
            y: self.y[k].clone(),
            y2: self.y2[k].clone(),
        })
    }

    /// `(max |y - dx/dt|, max |2 y2 - dy/dt|)` over interior samples, with the
    /// time derivatives taken by differencing the stored samples.
    pub fn extension_defect(&self) -> Result<(f64, f64)> {
        let xdot = vector_series_derivative(&self.x, self.dt, SeriesOrder::First)?;
        let ydot = vector_series_derivative(&self.y, self.dt, SeriesOrder::First)?;
        let mut dy: f64 = 0.0;
        let mut dy2: f64 = 0.0;
        for k in 2..self.len() - 2 {
            for i in 0..self.dim() {
                dy = dy.max((self.y[k][i] - xdot[k][i]).abs());
                dy2 = dy2.max((2.0 * self.y2[k][i] - ydot[k][i]).abs());
            }
        }
        Ok((dy, dy2))
    }
}
