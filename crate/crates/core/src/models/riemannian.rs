//! Riemannian presets with closed-form Christoffel symbols. For `L = g_ij(x) y^i y^j`
//! the spray is `G^i = (1/2) Gamma^i_jk y^j y^k`, so every connection
//! quantity follows from `Gamma` and its first derivatives.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::model::{GeometryModel, LagrangianDerivatives};
use crate::tensor::{CubeField, SquareField, Tensor4};

/// Closed-form metric data of a chart.
pub trait ChristoffelChart: Send + Sync {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn metric(&self, x: &[f64]) -> SquareField;
    /// `d g_ij / dx^k` as `(i, j, k)`
    fn metric_dx(&self, x: &[f64]) -> CubeField;
    /// `Gamma^i_jk`
    fn christoffel(&self, x: &[f64]) -> CubeField;
    /// `d Gamma^i_jk / dx^l` as `(i, j, k, l)`
    fn christoffel_dx(&self, x: &[f64]) -> Tensor4;
    fn check_domain(&self, _x: &[f64]) -> Result<(), String> {
        Ok(())
    }
}

/// Adapts a [`ChristoffelChart`] into a [`GeometryModel`] with every analytic
/// callback populated.
pub struct Riemannian<C>(pub C);

impl<C: ChristoffelChart> GeometryModel for Riemannian<C> {
    fn name(&self) -> &str {
        self.0.name()
    }

    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn lagrangian(&self, x: &[f64], y: &[f64]) -> f64 {
        let g = self.0.metric(x);
        quadratic_form(&g, y)
    }

    fn check_domain(&self, x: &[f64]) -> Result<(), String> {
        self.0.check_domain(x)
    }

    fn lagrangian_derivatives(&self, x: &[f64], y: &[f64]) -> Option<LagrangianDerivatives> {
        let n = self.dim();
        let g = self.0.metric(x);
        let dg = self.0.metric_dx(x);
        let dl_dx = (0..n)
            .map(|s| {
                (0..n)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .map(|(i, j)| dg.get(i, j, s) * y[i] * y[j])
                    .sum()
            })
            .collect();
        let d2l_dydx = SquareField::from_fn(n, |s, j| 2.0 * (0..n).map(|k| dg.get(s, k, j) * y[k]).sum::<f64>());
        Some(LagrangianDerivatives {
            dl_dx,
            d2l_dy2: g.scale(2.0),
            d2l_dydx,
        })
    }

    fn connection(&self, x: &[f64], y: &[f64]) -> Option<SquareField> {
        Some(self.0.christoffel(x).contract_last(y))
    }

    fn connection_dx(&self, x: &[f64], y: &[f64]) -> Option<CubeField> {
        let n = self.dim();
        let dg = self.0.christoffel_dx(x);
        Some(CubeField::from_fn(n, |i, j, k| (0..n).map(|m| dg.get(i, j, m, k) * y[m]).sum()))
    }

    fn berwald(&self, x: &[f64], _y: &[f64]) -> Option<CubeField> {
        Some(self.0.christoffel(x))
    }

    fn berwald_dx(&self, x: &[f64], _y: &[f64]) -> Option<Tensor4> {
        Some(self.0.christoffel_dx(x))
    }

    fn berwald_dy(&self, x: &[f64], _y: &[f64]) -> Option<Tensor4> {
        Some(Tensor4::zeros(x.len()))
    }
}

pub(crate) fn quadratic_form(g: &SquareField, y: &[f64]) -> f64 {
    let gy = g.mul_vec(y);
    gy.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Flat `R^n` in Cartesian coordinates, `L = sum (y^i)^2`.
pub struct EuclideanChart {
    pub n: usize,
    pub label: &'static str,
}

impl ChristoffelChart for EuclideanChart {
    fn name(&self) -> &str {
        self.label
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn metric(&self, _x: &[f64]) -> SquareField {
        SquareField::identity(self.n)
    }
    fn metric_dx(&self, _x: &[f64]) -> CubeField {
        CubeField::zeros(self.n)
    }
    fn christoffel(&self, _x: &[f64]) -> CubeField {
        CubeField::zeros(self.n)
    }
    fn christoffel_dx(&self, _x: &[f64]) -> Tensor4 {
        Tensor4::zeros(self.n)
    }
}

/// The flat plane in polar coordinates `(r, phi)`, `L = (y^r)^2 + r^2 (y^phi)^2`.
pub struct FlatPolarChart;

impl ChristoffelChart for FlatPolarChart {
    fn name(&self) -> &str {
        "flat_polar"
    }
    fn dim(&self) -> usize {
        2
    }
    fn metric(&self, x: &[f64]) -> SquareField {
        SquareField::from_diag(&[1.0, x[0] * x[0]])
    }
    fn metric_dx(&self, x: &[f64]) -> CubeField {
        let mut c = CubeField::zeros(2);
        c.set(1, 1, 0, 2.0 * x[0]);
        c
    }
    fn christoffel(&self, x: &[f64]) -> CubeField {
        let r = x[0];
        let mut c = CubeField::zeros(2);
        c.set(0, 1, 1, -r);
        c.set(1, 0, 1, 1.0 / r);
        c.set(1, 1, 0, 1.0 / r);
        c
    }
    fn christoffel_dx(&self, x: &[f64]) -> Tensor4 {
        let r = x[0];
        Tensor4::from_fn(2, |i, j, k, l| match (i, j, k, l) {
            (0, 1, 1, 0) => -1.0,
            (1, 0, 1, 0) | (1, 1, 0, 0) => -1.0 / (r * r),
            _ => 0.0,
        })
    }
    fn check_domain(&self, x: &[f64]) -> Result<(), String> {
        if x[0] > 0.0 {
            Ok(())
        } else {
            Err(format!("polar radius r = {} must be positive", x[0]))
        }
    }
}

/// Lower bound of the polar angle kept away from the poles.
pub const SPHERE_POLE_GUARD: f64 = 0.05;

/// Round sphere of radius `radius` in `(theta, phi)`:
/// `L = radius^2 ((y^theta)^2 + sin^2(theta) (y^phi)^2)`.
pub struct SphereChart {
    pub radius: f64,
}

impl ChristoffelChart for SphereChart {
    fn name(&self) -> &str {
        "sphere"
    }
    fn dim(&self) -> usize {
        2
    }
    fn metric(&self, x: &[f64]) -> SquareField {
        let r2 = self.radius * self.radius;
        let s = x[0].sin();
        SquareField::from_diag(&[r2, r2 * s * s])
    }
    fn metric_dx(&self, x: &[f64]) -> CubeField {
        let mut c = CubeField::zeros(2);
        c.set(1, 1, 0, self.radius * self.radius * (2.0 * x[0]).sin());
        c
    }
    fn christoffel(&self, x: &[f64]) -> CubeField {
        let (s, co) = x[0].sin_cos();
        let mut c = CubeField::zeros(2);
        c.set(0, 1, 1, -s * co);
        c.set(1, 0, 1, co / s);
        c.set(1, 1, 0, co / s);
        c
    }
    fn christoffel_dx(&self, x: &[f64]) -> Tensor4 {
        let s = x[0].sin();
        let c2 = (2.0 * x[0]).cos();
        Tensor4::from_fn(2, |i, j, k, l| match (i, j, k, l) {
            (0, 1, 1, 0) => -c2,
            (1, 0, 1, 0) | (1, 1, 0, 0) => -1.0 / (s * s),
            _ => 0.0,
        })
    }
    fn check_domain(&self, x: &[f64]) -> Result<(), String> {
        let theta = x[0];
        if (SPHERE_POLE_GUARD..=PI - SPHERE_POLE_GUARD).contains(&theta) {
            Ok(())
        } else {
            Err(format!(
                "polar angle theta = {theta} outside [{SPHERE_POLE_GUARD}, pi - {SPHERE_POLE_GUARD}]"
            ))
        }
    }
}

/// Poincare upper half-plane, `L = ((y^1)^2 + (y^2)^2) / (x^2)^2`, `x^2 > 0`.
pub struct HyperbolicChart;

impl ChristoffelChart for HyperbolicChart {
    fn name(&self) -> &str {
        "hyperbolic_half_plane"
    }
    fn dim(&self) -> usize {
        2
    }
    fn metric(&self, x: &[f64]) -> SquareField {
        let w = 1.0 / (x[1] * x[1]);
        SquareField::from_diag(&[w, w])
    }
    fn metric_dx(&self, x: &[f64]) -> CubeField {
        let d = -2.0 / x[1].powi(3);
        let mut c = CubeField::zeros(2);
        c.set(0, 0, 1, d);
        c.set(1, 1, 1, d);
        c
    }
    fn christoffel(&self, x: &[f64]) -> CubeField {
        let v = x[1];
        let mut c = CubeField::zeros(2);
        c.set(0, 0, 1, -1.0 / v);
        c.set(0, 1, 0, -1.0 / v);
        c.set(1, 0, 0, 1.0 / v);
        c.set(1, 1, 1, -1.0 / v);
        c
    }
    fn christoffel_dx(&self, x: &[f64]) -> Tensor4 {
        let v2 = x[1] * x[1];
        Tensor4::from_fn(2, |i, j, k, l| match (i, j, k, l) {
            (0, 0, 1, 1) | (0, 1, 0, 1) | (1, 1, 1, 1) => 1.0 / v2,
            (1, 0, 0, 1) => -1.0 / v2,
            _ => 0.0,
        })
    }
    fn check_domain(&self, x: &[f64]) -> Result<(), String> {
        if x[1] > 0.0 {
            Ok(())
        } else {
            Err(format!("half-plane coordinate x2 = {} must be positive", x[1]))
        }
    }
}

pub type MetricFn = dyn Fn(&[f64]) -> SquareField + Send + Sync;

/// `L = g_ij(x) y^i y^j` for a user metric; all derivatives by finite differences.
pub struct MetricCallbackModel {
    pub n: usize,
    pub metric: Arc<MetricFn>,
}

impl GeometryModel for MetricCallbackModel {
    fn name(&self) -> &str {
        "riemannian_callback"
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn lagrangian(&self, x: &[f64], y: &[f64]) -> f64 {
        quadratic_form(&(self.metric)(x), y)
    }
}
