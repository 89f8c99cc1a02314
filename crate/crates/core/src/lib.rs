//! Citation-graph analytics for comparing academic, industry and mixed
//! research teams.

pub mod classify;
pub mod config;
pub mod corpus;
pub mod disruption;
pub mod ecc;
pub mod error;
pub mod graph;
pub mod impact;
pub mod metrics;
pub mod models;
pub mod novelty;
pub mod pipeline;
pub mod sota;
pub mod strata;
pub mod subfield;
pub mod synth;

pub use error::{CoreError, Result};
