//! Lattice Liouville first passage percolation.
//!
//! * [`gff`]: torus and Dirichlet Gaussian free fields, circle averages, heat-kernel and
//!   localized mollification, dyadic rescaling.
//! * [`metric`]: the weighted 8-neighbor lattice `e^{xi h}` and its distance functionals.
//! * [`renorm`]: Monte Carlo medians of the unit-square crossing distance, exponent fits,
//!   scaling ratios.
//! * [`experiments`]: named verification harnesses producing [`experiments::ExperimentReport`]s.

// `!(x > 0.0)` is how NaN gets rejected alongside the range check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod gff;
pub mod lattice;
pub mod metric;
pub mod renorm;
pub mod seed;
pub mod stats;

pub use error::{LfppError, Result};
pub use lattice::{LatticeSpec, Point, Site, SiteRect};
