//! Streaming maximization of monotone submodular functions over matchings,
//! hypermatchings and intersections of partition matroids.
//!
//! Every algorithm here is an instance of one generic improvement pass
//! ([`framework::improve_solution`]) driven by an [`framework::AugmentPolicy`].
//! Element weights are either given (weighted matching) or the streaming
//! marginal gains of a [`oracle::ValueOracle`].

pub mod baselines;
pub mod curvature;
pub mod error;
pub mod framework;
pub mod harness;
pub mod matroid;
pub mod model;
pub mod multipass;
pub mod oracle;
pub mod policy;

pub use error::{Error, Result};
pub use model::{Element, ElementId, IndependentSet, Instance, InstanceHeader, Kind, StreamSource};
pub use oracle::{OracleFamily, ValueOracle};
