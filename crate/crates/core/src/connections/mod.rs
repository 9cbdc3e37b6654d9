//! Connection-theoretic objects built from a Lagrangian: the canonical spray,
//! the nonlinear connection on the tangent bundle, Berwald coefficients and
//! curvatures, and the dual coefficients `(M1, M2)` of nonlinear connections
//! on the second-order tangent bundle.

mod curvature;
mod dual;
mod spray;

pub use curvature::{berwald_curvatures, curvature_r, delta0_derivative, CurvatureData};
pub use dual::{
    adapted_components, c_operator, from_pde_coefficients, miron_dual_coefficients, our_dual_coefficients,
    DualCoefficients, Provenance,
};
pub use spray::{berwald_coefficients, connection_pack, nonlinear_connection, spray_coefficients, ConnectionPack};

pub(crate) use spray::{connection_at, spray_at};
