//! Semi-supervised shape-error regression on machined-surface point clouds.
//!
//! Surface points exported from a material-removal simulation become graph
//! nodes; edges come from spatial (kNN), temporal, or hybrid connection
//! strategies. A small graph convolutional network regresses the measured
//! shape error for every node from the few nodes that carry labels, and an
//! epsilon-SVR serves as the non-graphical baseline.
//!
//! The crate is `no_std`-compatible (with `alloc`); all file formats, the
//! experiment CLI, and plotting live in the companion `shapegraph-cli` crate.
//!
//! Modules follow the pipeline order:
//!
//! - [`dataset`]: node tables, CSV text codec, synthetic data generation
//! - [`graph`]: node filtering, connection strategies, adjacency normalization
//! - [`numerics`]: dense/sparse matrices, activations, masked loss, Adam
//! - [`gcn`]: the three-layer GCN regressor and its training loop
//! - [`svr`]: epsilon-SVR with SMO, grid search, and k-fold CV
//! - [`eval`]: MAE, residual reports, trend aggregation, transfer evaluation
//!
//! All randomness flows through explicitly seeded [`rng`] streams; given a
//! seed, every operation in this crate is deterministic.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod dataset;
pub mod error;
pub mod eval;
pub mod gcn;
pub mod graph;
pub mod numerics;
pub mod rng;
pub mod spatial;
pub mod svr;

pub use error::{Error, Result};
