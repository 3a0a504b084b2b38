//! Markov chain kernels over the partition posterior: single-site Gibbs and
//! generalized Swendsen-Wang.

mod bonds;
mod chain;
mod delta;
mod gibbs;
mod gsw;
mod state;

pub use bonds::{sample_bonds, BondState, DisjointSets};
pub use chain::{run_chain, run_from, step, ChainConfig, ChainTrace, Init, Kernel, TraceRecord};
pub use delta::{bond_probability, correction_exponent, DeltaRule, Distance};
pub use state::{ChainState, ScanOrder};
