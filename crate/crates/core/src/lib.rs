//! Random regular graph models, exact enumeration oracles, and constructive
//! couplings between them.
//!
//! The crate is organised around five areas:
//!
//! * [`graph`] and [`models`]: labeled (multi)graph types and exact samplers for
//!   the pairing model, its loopless variant, superpositions and unions of
//!   perfect matchings, uniform regular graphs, binomial graphs and d-out graphs.
//! * [`enumeration`]: exact counting oracles (arbitrary precision) and the
//!   asymptotic enumeration formulas they are checked against.
//! * [`coupling`]: optimal couplings with deficiency via max-flow, the
//!   rejection embedding of the loopless pairing model into matching
//!   superpositions, the d-out into G(n,p) embedding, matching extraction and
//!   the end-to-end sandwich pipeline.
//! * [`stats`]: census statistics, moment predictions and empirical checks.
//! * [`harness`]: experiment configs, reproducible trial runners and output.

pub mod coupling;
pub mod enumeration;
pub mod error;
pub mod graph;
pub mod harness;
pub mod models;
pub mod numeric;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{contains, ContainmentMode, Digraph, Matching, Multigraph, Pairing};
pub use rng::RngStream;
