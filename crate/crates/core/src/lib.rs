//! Join-aware mutual information estimation over two-column tables.
//!
//! The library builds fixed-size coordinated-sampling sketches of a
//! "train" table (the side holding the target column) and an "aug" table
//! (a candidate feature keyed for a left outer join), joins the sketches,
//! and estimates the mutual information of the joined column pair without
//! ever materializing the full join.

pub mod aggregate;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod hashing;
pub mod sketch;
pub mod synth;
pub mod table;

pub use error::{Error, Result};
