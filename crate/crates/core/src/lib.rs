//! Numerical laboratory for equidistribution of expanding translates of
//! analytic curves under the geodesic flow on the modular surface and the
//! Picard 3-manifold.
//!
//! The crate is organized bottom-up:
//!
//! * [`group`]: matrix models of `PSL(2,R)` and `PSL(2,C)`, Bruhat and
//!   Iwasawa coordinates, boundary maps and hyperbolic distance.
//! * [`lattice`]: fundamental-domain reduction, heights, Haar sampling and
//!   covolumes for `PSL(2,Z)` and `PSL(2,Z[i])`.
//! * [`curve_engine`]: polynomial curves, translated curve measures,
//!   observables, discrepancy, the unipotent-invariance defect and the
//!   non-divergence statistic.
//! * [`torus`]: the flat baseline of dilated curves on `T^n`.
//! * [`rep_theory`]: exact `SL(2)` representation identities and the
//!   `(C, α)`-good estimator.
//! * [`degenerate`]: curves whose boundary image lies in a subsphere and the
//!   resulting concentration on the modular surface inside the Picard manifold.
//! * [`experiment`]: configuration, registry and report writing.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve_engine;
pub mod degenerate;
pub mod error;
pub mod experiment;
pub mod group;
pub mod lattice;
pub mod rep_theory;
pub(crate) mod seeding;
pub mod torus;

pub use error::{Error, Result};
