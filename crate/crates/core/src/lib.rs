//! Eddy-current levitation simulation and static pull-in analysis for
//! hybrid levitation micro-actuators (HLMA): micro-discs levitated
//! inductively by coaxial coils and actuated electrostatically.
//!
//! The induced eddy current in the levitated disc is represented by a
//! finite set of circular filament circuits coupled through mutual
//! inductances and solved as one linear system (quasi-FEM). On top of
//! that sit three static pull-in models of increasing simplification:
//!
//! * [`pullin::QuasiFemModel`]: full filament-mesh solve per displacement,
//! * [`pullin::AnalyticalModel`]: single eddy circuit, closed elliptic form,
//! * [`pullin::SimplifiedModel`]: small-`kappa` linearization, closed form.
//!
//! Module map:
//!
//! * [`ellint`]: complete elliptic integrals and composite kernels,
//! * [`filament`]: self/mutual inductance of circular filaments,
//! * [`geometry`]: coil stacks, disc meshing, frame kinematics,
//! * [`eddy`]: inductance system assembly and eddy-current solve,
//! * [`levforce`]: ponderomotive forces and field maps,
//! * [`pullin`]: equilibrium curves, pull-in extraction, dimensionalization,
//! * [`scenario`]: JSON actuator description shared by the CLI and tests.

// `!(x > 0.0)` guards reject NaN along with nonpositive values; the
// suggested `x <= 0.0` would let NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eddy;
pub mod ellint;
pub mod error;
pub mod filament;
pub mod geometry;
pub mod levforce;
mod linalg;
pub mod pullin;
pub mod scenario;

pub use error::Error;

/// Magnetic permeability of free space (H/m).
pub const MU_0: f64 = 4.0e-7 * std::f64::consts::PI;

/// Vacuum permittivity (F/m).
pub const EPSILON_0: f64 = 8.854e-12;

/// Standard gravity (m/s^2).
pub const STANDARD_GRAVITY: f64 = 9.81;
