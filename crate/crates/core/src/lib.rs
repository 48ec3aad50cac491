//! Approximate edit distance and longest common subsequence on sparsified
//! alignment grids, with exact baselines, tree-deviation tools and a
//! benchmarking harness.

pub mod baselines;
pub mod bench;
pub mod deviation;
pub mod estimator;
pub mod grids;
pub mod sparse;

pub use grids::{InputPair, Kind};
