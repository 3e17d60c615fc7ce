//! Recovery of solutions to the Poisson problem with unknown Dirichlet data
//! from pointwise interior measurements.
//!
//! The recovered field is `u* = u0 + sum_i U_i phi_i`, where `u0` solves the
//! homogeneous Dirichlet problem for the given source term and the `phi_i`
//! are discrete Riesz representers of the point-evaluation functionals on the
//! space of discrete harmonic functions. The coefficients `U` come from a
//! threshold-regularized pseudo-inverse of the observation matrix
//! `G_ij = phi_j(x_i)`.

pub mod config;
pub mod error;
pub mod exprlang;
pub mod fem;
pub mod linalg;
pub mod mesh;
pub mod metrics;
pub mod recovery;
pub mod riesz;
mod solver;
pub mod util;

pub use error::Error;
pub use exprlang::FieldExpr;
pub use fem::Forms;
pub use linalg::ObservationMatrix;
pub use mesh::{CoeffVec, DofSpace, DomainSpec, TriMesh};
pub use recovery::{MeasurementSet, RecoveryResult};
pub use riesz::RieszPair;
