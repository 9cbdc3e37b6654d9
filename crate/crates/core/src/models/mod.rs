//! Built-in model zoo and force fields, constructed from serializable specs.

mod finsler;
mod forces;
mod riemannian;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use finsler::{MinkowskiModel, NormFn, RandersModel, FINSLER_Y_MIN};
pub use forces::{CallbackForce, ForceFn, LinearDrag, PositionSpring};
pub use riemannian::{
    ChristoffelChart, EuclideanChart, FlatPolarChart, HyperbolicChart, MetricCallbackModel, MetricFn, Riemannian,
    SphereChart, SPHERE_POLE_GUARD,
};

use crate::error::{Error, Result};
use crate::model::{ForceField, GeometryModel, NoForce};
use crate::state::{FirstOrderState, SecondOrderState};
use crate::tensor::SquareField;

/// Shared handle to a user closure; never serialized.
pub struct Callback<F: ?Sized>(pub Arc<F>);

impl<F: ?Sized> Clone for Callback<F> {
    fn clone(&self) -> Self {
        Self(Arc::clone(&self.0))
    }
}

impl<F: ?Sized> fmt::Debug for Callback<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<callback>")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Euclidean {
        n: usize,
    },
    FlatPolar,
    Sphere {
        #[serde(default = "unit_radius")]
        radius: f64,
    },
    HyperbolicHalfPlane,
    Randers {
        /// Drift covector at the chart origin.
        b: Vec<f64>,
        /// `d b_i / d x^j`; zero when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b_gradient: Option<Vec<Vec<f64>>>,
    },
    MinkowskiNorm {
        n: usize,
        #[serde(skip)]
        lagrangian: Option<Callback<NormFn>>,
    },
    #[serde(skip)]
    RiemannianCallback { n: usize, metric: Callback<MetricFn> },
}

fn unit_radius() -> f64 {
    1.0
}

impl ModelSpec {
    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::Euclidean { n } | ModelSpec::MinkowskiNorm { n, .. } | ModelSpec::RiemannianCallback { n, .. } => {
                *n
            }
            ModelSpec::FlatPolar | ModelSpec::Sphere { .. } | ModelSpec::HyperbolicHalfPlane => 2,
            ModelSpec::Randers { b, .. } => b.len(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpec::Euclidean { .. } => "euclidean",
            ModelSpec::FlatPolar => "flat_polar",
            ModelSpec::Sphere { .. } => "sphere",
            ModelSpec::HyperbolicHalfPlane => "hyperbolic_half_plane",
            ModelSpec::Randers { .. } => "randers",
            ModelSpec::MinkowskiNorm { .. } => "minkowski_norm",
            ModelSpec::RiemannianCallback { .. } => "riemannian_callback",
        }
    }

    /// Box that random test states are drawn from.
    pub fn state_box(&self) -> StateBox {
        let n = self.dim();
        let unit = vec![(-1.0, 1.0); n];
        let (x, min_speed) = match self {
            ModelSpec::FlatPolar => (vec![(0.5, 2.0), (-PI, PI)], 0.0),
            ModelSpec::Sphere { .. } => (vec![(0.3, PI - 0.3), (-PI, PI)], 0.0),
            ModelSpec::HyperbolicHalfPlane => (vec![(-1.0, 1.0), (0.5, 2.0)], 0.0),
            ModelSpec::Randers { .. } => (vec![(-0.5, 0.5); n], 0.1),
            ModelSpec::MinkowskiNorm { .. } => (unit.clone(), 0.1),
            ModelSpec::Euclidean { .. } | ModelSpec::RiemannianCallback { .. } => (unit.clone(), 0.0),
        };
        StateBox {
            x,
            y: unit.clone(),
            y2: unit,
            min_speed,
        }
    }

    /// Box for initial conditions that are integrated forward over `t <= 1`:
    /// velocities in `[-1/2, 1/2]`, and the sphere and polar charts pulled
    /// away from their singular sets so trajectories stay well conditioned.
    pub fn trajectory_box(&self) -> StateBox {
        let mut b = self.state_box();
        b.y = vec![(-0.5, 0.5); self.dim()];
        match self {
            ModelSpec::Sphere { .. } => b.x[0] = (PI / 3.0, 2.0 * PI / 3.0),
            ModelSpec::FlatPolar => b.x[0] = (1.0, 2.0),
            _ => {}
        }
        b
    }
}

/// Axis-aligned sampling box for states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateBox {
    pub x: Vec<(f64, f64)>,
    pub y: Vec<(f64, f64)>,
    pub y2: Vec<(f64, f64)>,
    pub min_speed: f64,
}

fn draw<R: Rng>(rng: &mut R, ranges: &[(f64, f64)]) -> Vec<f64> {
    ranges.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect()
}

impl StateBox {
    pub fn sample<R: Rng>(&self, rng: &mut R) -> FirstOrderState {
        loop {
            let x = draw(rng, &self.x);
            let y = draw(rng, &self.y);
            let s = FirstOrderState { x, y };
            if s.speed() >= self.min_speed.max(1e-3) {
                return s;
            }
        }
    }

    pub fn sample_second_order<R: Rng>(&self, rng: &mut R) -> SecondOrderState {
        let s = self.sample(rng);
        SecondOrderState {
            x: s.x,
            y: s.y,
            y2: draw(rng, &self.y2),
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidSpec(msg.into())
}

fn matrix_from_rows(rows: &[Vec<f64>], n: usize, what: &str) -> Result<SquareField> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(invalid(format!("{what} must be {n}x{n}")));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(invalid(format!("{what} has non-finite entries")));
    }
    SquareField::from_rows(rows)
}

pub fn build_model(spec: &ModelSpec) -> Result<Arc<dyn GeometryModel>> {
    Ok(match spec {
        ModelSpec::Euclidean { n } => {
            if *n == 0 {
                return Err(invalid("euclidean: n must be at least 1"));
            }
            Arc::new(Riemannian(EuclideanChart {
                n: *n,
                label: "euclidean",
            }))
        }
        ModelSpec::FlatPolar => Arc::new(Riemannian(FlatPolarChart)),
        ModelSpec::Sphere { radius } => {
            if !(radius.is_finite() && *radius > 0.0) {
                return Err(invalid(format!("sphere: radius must be positive, got {radius}")));
            }
            Arc::new(Riemannian(SphereChart { radius: *radius }))
        }
        ModelSpec::HyperbolicHalfPlane => Arc::new(Riemannian(HyperbolicChart)),
        ModelSpec::Randers { b, b_gradient } => {
            let n = b.len();
            if n == 0 {
                return Err(invalid("randers: drift covector b is empty"));
            }
            if b.iter().any(|v| !v.is_finite()) {
                return Err(invalid("randers: drift covector b has non-finite entries"));
            }
            let norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm >= 1.0 {
                return Err(invalid(format!("randers: |b| = {norm} must be < 1")));
            }
            let grad = match b_gradient {
                Some(rows) => matrix_from_rows(rows, n, "randers: b_gradient")?,
                None => SquareField::zeros(n),
            };
            Arc::new(RandersModel {
                b0: b.clone(),
                b_gradient: grad,
            })
        }
        ModelSpec::MinkowskiNorm { n, lagrangian } => {
            if *n == 0 {
                return Err(invalid("minkowski_norm: n must be at least 1"));
            }
            Arc::new(MinkowskiModel {
                n: *n,
                lagrangian: lagrangian.as_ref().map(|c| Arc::clone(&c.0)),
            })
        }
        ModelSpec::RiemannianCallback { n, metric } => {
            if *n == 0 {
                return Err(invalid("riemannian_callback: n must be at least 1"));
            }
            Arc::new(MetricCallbackModel {
                n: *n,
                metric: Arc::clone(&metric.0),
            })
        }
    })
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForceSpec {
    #[default]
    Zero,
    LinearDrag {
        k: f64,
    },
    PositionSpring {
        k: Vec<Vec<f64>>,
    },
    #[serde(skip)]
    Callback { f: Callback<ForceFn> },
}

impl ForceSpec {
    /// Checks the spec against the model dimension.
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            ForceSpec::LinearDrag { k } if !(k.is_finite() && *k >= 0.0) => {
                Err(invalid(format!("linear_drag: k must be finite and >= 0, got {k}")))
            }
            ForceSpec::PositionSpring { k } => matrix_from_rows(k, n, "position_spring: K").map(|_| ()),
            _ => Ok(()),
        }
    }
}

pub fn build_force(spec: &ForceSpec) -> Result<Arc<dyn ForceField>> {
    Ok(match spec {
        ForceSpec::Zero => Arc::new(NoForce),
        ForceSpec::LinearDrag { k } => {
            spec.validate(0)?;
            Arc::new(LinearDrag { k: *k })
        }
        ForceSpec::PositionSpring { k } => Arc::new(PositionSpring {
            k: matrix_from_rows(k, k.len(), "position_spring: K")?,
        }),
        ForceSpec::Callback { f } => Arc::new(CallbackForce { f: Arc::clone(&f.0) }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specs_deserialize_from_tagged_json() {
        let m: ModelSpec = serde_json::from_str(r#"{"kind":"sphere"}"#).unwrap();
        assert!(matches!(m, ModelSpec::Sphere { radius } if radius == 1.0));
        let m: ModelSpec = serde_json::from_str(r#"{"kind":"randers","b":[0.1,0.2]}"#).unwrap();
        assert_eq!(m.dim(), 2);
        let f: ForceSpec = serde_json::from_str(r#"{"kind":"linear_drag","k":1.0}"#).unwrap();
        assert!(matches!(f, ForceSpec::LinearDrag { k } if k == 1.0));
        assert!(serde_json::from_str::<ModelSpec>(r#"{"kind":"riemannian_callback","n":2}"#).is_err());
    }

    #[test]
    fn invalid_specs_name_the_violated_constraint() {
        let err = build_model(&ModelSpec::Randers {
            b: vec![0.9, 0.9],
            b_gradient: None,
        })
        .err()
        .unwrap();
        assert!(err.to_string().contains("|b|"), "{err}");
        assert!(build_model(&ModelSpec::Sphere { radius: -1.0 }).is_err());
        assert!(build_model(&ModelSpec::Euclidean { n: 0 }).is_err());
        assert!(build_force(&ForceSpec::LinearDrag { k: -1.0 }).is_err());
        let spring = ForceSpec::PositionSpring {
            k: vec![vec![1.0, 0.0]],
        };
        assert!(build_force(&spring).is_err());
        assert!(ForceSpec::PositionSpring {
            k: vec![vec![1.0, 0.0], vec![0.0, 1.0]]
        }
        .validate(3)
        .is_err());
    }

    #[test]
    fn preset_lagrangians() {
        let e = build_model(&ModelSpec::Euclidean { n: 2 }).unwrap();
        assert_eq!(e.lagrangian(&[0.3, -1.0], &[1.0, 2.0]), 5.0);
        let s = build_model(&ModelSpec::Sphere { radius: 1.0 }).unwrap();
        let th = 0.7_f64;
        let expected = 0.25 + th.sin().powi(2) * 4.0;
        assert!((s.lagrangian(&[th, 0.0], &[0.5, 2.0]) - expected).abs() < 1e-15);
        let p = build_model(&ModelSpec::FlatPolar).unwrap();
        assert_eq!(p.lagrangian(&[2.0, 1.0], &[1.0, 0.5]), 2.0);
        assert!(s.check_domain(&[0.01, 0.0]).is_err());
        assert!(p.check_domain(&[-0.1, 0.0]).is_err());
    }

    #[test]
    fn preset_forces() {
        let zero = build_force(&ForceSpec::Zero).unwrap();
        assert_eq!(zero.force(&[1.0, 2.0], &[3.0, 4.0]), vec![0.0, 0.0]);
        assert_eq!(zero.force_dx(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), SquareField::zeros(2));
        let drag = build_force(&ForceSpec::LinearDrag { k: 1.0 }).unwrap();
        assert_eq!(drag.force(&[0.0, 0.0], &[1.0, -2.0]), vec![-1.0, 2.0]);
        assert_eq!(drag.force_dy(&[0.0, 0.0], &[1.0, -2.0]).unwrap(), SquareField::identity(2).scale(-1.0));
        assert_eq!(drag.force_dx(&[0.0, 0.0], &[1.0, -2.0]).unwrap(), SquareField::zeros(2));
        let k = vec![vec![2.0, 1.0], vec![0.0, 3.0]];
        let spring = build_force(&ForceSpec::PositionSpring { k: k.clone() }).unwrap();
        assert_eq!(spring.force(&[1.0, 1.0], &[0.0, 0.0]), vec![-3.0, -3.0]);
        assert_eq!(spring.force_dx(&[1.0, 1.0], &[0.0, 0.0]).unwrap().to_rows(), vec![vec![-2.0, -1.0], vec![0.0, -3.0]]);
    }
}
