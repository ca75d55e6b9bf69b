//! Verification workbench for fixed-point iteration on partial b-metric
//! spaces: exact axiom checking, contraction classification, Picard
//! iteration with quantitative certificates, the weighted orbit-sum
//! transform, stability trials, fixed-point sets of powers, and seeded
//! randomized probes.
//!
//! Finite spaces are exact (arbitrary-precision rationals); function-backed
//! spaces are sampled on a grid and every verdict over them says so.

pub mod contraction;
pub mod error;
pub mod examples;
pub mod picard;
pub mod pproperty;
pub mod ratio;
pub mod search;
pub mod selfmap;
pub mod space;
pub mod stability;
pub mod transform;

pub use error::{Error, Result};
pub use ratio::{fmt_q, parse_q, Q};
pub use selfmap::{MapFormula, MapTable, SelfMap};
pub use space::{FiniteSpace, FuncSpace, MetricPair, Space};
