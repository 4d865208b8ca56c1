//! Constructive geometry of horoball traces on flats, polytope tubes and
//! quadratic loop fillings, with the supporting Coxeter-group machinery.

pub mod bootstrap;
pub mod coxeter;
pub mod error;
pub mod fan;
pub mod filling;
pub mod linalg;
pub mod oracle;
pub mod partition;
pub mod polytope;
pub mod runner;
pub mod trace;
pub mod tube;

pub use error::{Error, PartitionError, Result};
