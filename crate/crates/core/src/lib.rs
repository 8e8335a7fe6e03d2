//! Nonlinear complementary attitude filters on SO(3).
//!
//! This crate implements three complementary filters that fuse rate-gyro
//! readings with vector observations of known reference directions, together
//! with the analysis machinery that makes their behaviour checkable in code:
//!
//! * [`so3`] — rotation-group primitives: the skew/vex isomorphism, the
//!   normalized distance to the identity, angle-axis / Cayley / Rodrigues
//!   parameterizations, and a 3x3 symmetric eigensolver.
//! * [`filters`] — the filter laws themselves: innovation terms with
//!   constant and error-dependent gains, the group-exact discrete step, and
//!   the vector-measurement formulation that needs no attitude
//!   reconstruction.
//! * [`oracle`] — closed-form solutions of the noise-free error dynamics and
//!   convergence envelopes, plus the fine-step reference integrator used to
//!   cross-check them.
//! * [`robustness`] — error dynamics in Rodrigues coordinates under gyro and
//!   attitude measurement errors: a destabilizing disturbance construction,
//!   explicit input-to-state-stability bounds, and a disturbance-attenuation
//!   check.
//! * [`sim`] — deterministic simulation harness: ground-truth propagation,
//!   seeded sensor synthesis, experiment orchestration, CSV and config I/O.
//! * [`verify`] — the named verification suites exposed by the CLI.

// Validation guards are written `!(x > 0.0)` on purpose: NaN must fail
// them, which `x <= 0.0` would not catch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod filters;
pub mod numfmt;
pub mod oracle;
pub mod rng;
pub mod robustness;
pub mod sim;
pub mod so3;
pub mod verify;

pub use error::{Error, Result};
pub use filters::{
    FilterConfig, FilterKind, FilterState, Measurement, ObservationPair, VectorObservation,
};
pub use so3::{psi, RotationMatrix, SkewMatrix3, SymEigen3, SymMatrix3, Vec3};
