//! Sampling, estimation and generation of 2.5K graphs: graphs that match a
//! target joint degree distribution exactly and a degree-dependent average
//! clustering `c̄(k)` approximately.
//!
//! The pipeline is
//! [`sampling`] → [`estimation`] → [`postprocess`] → [`generation`] → [`metrics`],
//! with [`graph`] and [`jdd`] providing the shared data model.

pub mod error;
pub mod estimation;
pub mod generation;
pub mod graph;
pub mod io;
pub mod jdd;
pub mod metrics;
pub mod postprocess;
pub mod sampling;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{Graph, NodeId};
pub use jdd::{DegreeClustering, IntJdd, JddMatrix, RealJdd};
