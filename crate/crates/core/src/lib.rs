//! Variational and dynamical laboratory for two period-4 orbits of the
//! planar equal-mass three-body problem: the collinear Schubart orbit and
//! the Broucke-Hénon orbit.
//!
//! Units are G = 1 with three unit masses. Configurations always have their
//! center of mass at the origin.
//!
//! * [`model`]: configurations, boundary families, phase states.
//! * [`action`]: discretized Lagrangian action and its gradient.
//! * [`bounds`]: closed-form action values and the explicit test path.
//! * [`jacobi`]: Jacobi coordinates, the Δθ angle and the folding map.
//! * [`minimize`]: free-boundary action minimization.
//! * [`dynamics`]: Newtonian integration, trajectory action, shooting.
//! * [`symmetry`]: quarter-to-full-orbit extensions and D₂ checks.

pub mod action;
pub mod bounds;
pub mod dynamics;
pub mod error;
pub mod jacobi;
pub mod minimize;
pub mod model;
pub mod quad;
pub mod states;
pub mod symmetry;

pub use error::{Error, Result};
pub use model::{BoundaryParams, Configuration, DiscretePath, PhaseState, Vec2};
