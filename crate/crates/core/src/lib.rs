//! Bayesian nonparametric segmentation of super-pixel graphs.
//!
//! The model couples a Potts smoothness term over neighboring sites with an
//! exchangeable partition prior (finite Dirichlet, Dirichlet process,
//! Poisson-Dirichlet, truncated DP, ...) and a Dirichlet-multinomial
//! likelihood of per-site color histograms. Inference runs single-site Gibbs
//! or a generalized Swendsen-Wang sampler that moves bonded groups of sites.

pub mod error;
pub mod evaluation;
pub mod graph;
pub mod io;
pub mod likelihood;
pub mod model;
pub mod oracle;
pub mod partition;
pub mod prior;
pub mod sampler;

pub use error::{Error, Result};
pub use graph::SiteGraph;
pub use likelihood::{BaseMeasure, ClusterStats, Likelihood, Observations};
pub use model::Model;
pub use partition::{rand_index, ClusterId, Partition};
pub use prior::{LogWeight, PartitionPrior};
