//! A desk-scale numerical laboratory around rational lines on diagonal
//! cubic hypersurfaces.
//!
//! The crate computes, exactly where possible and with controlled error
//! elsewhere, the objects a circle-method analysis of line counting touches:
//!
//! * exact counts of rational lines in boxes, by brute force and by a
//!   meet-in-the-middle hash join ([`counting`]);
//! * mean-value counts for the degree-(1,2,3) monomial system and the
//!   classical eight-cube equal-sums count ([`counting`]);
//! * two-variable cubic Weyl sums, complete exponential sums modulo q, local
//!   averages, and truncated singular series ([`expsums`]);
//! * oscillatory box integrals and Monte-Carlo / quadrature estimates of the
//!   singular integral ([`integral`]);
//! * major/minor arc classification, arc measures, pruning shells, and the
//!   kernel sums used on the minor arcs ([`arcs`]);
//! * a job harness with budgets, deterministic reports, and an acceptance
//!   suite ([`harness`]).
//!
//! Counts are exact integers (128-bit, overflow-checked); floating-point
//! reductions run in a fixed order so results do not depend on the number of
//! worker threads.

pub mod acceptance;
pub mod arcs;
pub mod budget;
pub mod counting;
pub mod error;
pub mod expsums;
pub mod forms;
pub mod harness;
pub mod integral;
pub mod parallel;
pub mod report;
pub mod rng;

pub use budget::Budget;
pub use error::{Error, Result};
pub use forms::CoefficientVector;
