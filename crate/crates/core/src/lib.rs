//! Hyperbolic-type metrics in the upper half-space, the unit ball and the
//! punctured space.
//!
//! The centerpiece is the c-tilde metric
//!
//! ```text
//! c(x, y) = |x - y| / inf_{z in boundary} max{|x - z|, |y - z|}
//! ```
//!
//! evaluated in closed form ([`metrics`]), next to the triangular ratio metric
//! `s`, the distance ratio metrics `j` and `j*`, and the hyperbolic metric.
//! [`oracle`] recomputes the boundary infima by brute force, [`verify`] sweeps
//! random and extremal point pairs through the known inequalities between the
//! metrics, [`conformal`] checks distortion under Möbius and quasiregular maps,
//! and [`contour`] extracts metric balls as polylines.

// Range checks are written as `!(x > 0.0)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conformal;
pub mod contour;
pub mod error;
pub mod geom;
pub mod metrics;
pub mod oracle;
pub mod par;
pub mod sampling;
pub mod solvers;
pub mod verify;

pub use error::{Error, Result};
pub use geom::{angle_at_origin, Domain, DomainKind, Point};
pub use metrics::{BranchTag, EvalReport, MetricKind};
pub use solvers::SolverConfig;
