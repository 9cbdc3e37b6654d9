//! Nonlinear connections on the second-order tangent bundle of a Lagrangian
//! configuration space: canonical sprays, Berwald curvature, dual
//! coefficients, and the Jacobi fields of forced mechanical systems.

pub mod connections;
pub mod diff;
pub mod dynamics;
pub mod error;
pub mod metric;
pub mod model;
pub mod models;
pub mod state;
pub mod tensor;
pub mod verify;

pub use diff::{DiffMode, DiffStrategy};
pub use dynamics::{IntegratorConfig, Trajectory};
pub use error::{Error, Result};
pub use model::{ForceField, GeometryModel, LagrangianDerivatives, NoForce};
pub use models::{build_force, build_model, ForceSpec, ModelSpec};
pub use state::{BasePoint, FirstOrderState, SecondOrderState};
pub use tensor::{CubeField, SquareField, Tensor4};
