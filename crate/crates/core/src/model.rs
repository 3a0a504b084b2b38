//! The posterior over partitions: graph, partition prior and (optionally)
//! the histogram likelihood.

use crate::error::{Error, Result};
use crate::graph::SiteGraph;
use crate::likelihood::{ClusterStats, Likelihood, SparseCounts};
use crate::partition::Partition;
use crate::prior::{log_prior_unnorm, LogWeight, PartitionPrior};

/// Immutable model shared by any number of chains.
#[derive(Debug, Clone)]
pub struct Model {
    graph: SiteGraph,
    prior: PartitionPrior,
    likelihood: Option<Likelihood>,
    site_counts: Vec<SparseCounts>,
    site_alone: Vec<f64>,
}

impl Model {
    pub fn new(graph: SiteGraph, prior: PartitionPrior, likelihood: Likelihood) -> Result<Self> {
        let n = likelihood.observations().n_sites();
        if n != graph.n_sites() {
            return Err(Error::Input(format!(
                "graph has {} sites, observations have {n}",
                graph.n_sites()
            )));
        }
        prior.validate()?;
        let site_counts: Vec<SparseCounts> = (0..n).map(|i| likelihood.site_counts(i)).collect();
        let empty = ClusterStats::empty(likelihood.observations().dims());
        let site_alone = site_counts
            .iter()
            .map(|c| likelihood.log_ratio_sparse(&empty, c))
            .collect();
        Ok(Model {
            graph,
            prior,
            likelihood: Some(likelihood),
            site_counts,
            site_alone,
        })
    }

    /// Model whose likelihood term is constant: samples from the prior.
    pub fn prior_only(graph: SiteGraph, prior: PartitionPrior) -> Result<Self> {
        prior.validate()?;
        Ok(Model {
            graph,
            prior,
            likelihood: None,
            site_counts: Vec::new(),
            site_alone: Vec::new(),
        })
    }

    pub fn graph(&self) -> &SiteGraph {
        &self.graph
    }

    pub fn prior(&self) -> &PartitionPrior {
        &self.prior
    }

    pub fn likelihood(&self) -> Option<&Likelihood> {
        self.likelihood.as_ref()
    }

    pub fn n_sites(&self) -> usize {
        self.graph.n_sites()
    }

    pub(crate) fn site_counts(&self, site: usize) -> &SparseCounts {
        &self.site_counts[site]
    }

    pub(crate) fn site_alone(&self, site: usize) -> f64 {
        self.site_alone[site]
    }

    /// Same model with a different partition prior.
    pub fn with_prior(&self, prior: PartitionPrior) -> Result<Self> {
        prior.validate()?;
        Ok(Model {
            prior,
            ..self.clone()
        })
    }

    /// Unnormalized log posterior of a partition: Potts term, EPF and the
    /// marginal likelihood of every cluster.
    pub fn log_posterior(&self, partition: &Partition) -> Result<LogWeight> {
        let prior = log_prior_unnorm(&self.prior, &self.graph, partition)?;
        let Some(lik) = &self.likelihood else {
            return Ok(prior);
        };
        if prior.is_zero_mass() {
            return Ok(prior);
        }
        let obs = lik.observations();
        let data: f64 = partition
            .clusters()
            .map(|c| lik.log_marglik(&ClusterStats::from_sites(obs, partition.members(c))))
            .sum();
        Ok(prior + data)
    }

    /// Start partition used when none is given: all singletons when the
    /// prior allows it, otherwise one cluster.
    pub fn default_init(&self) -> Partition {
        let n = self.n_sites();
        let singletons_ok =
            self.prior.min_cluster_size() <= 1 && self.prior.max_clusters().is_none_or(|k| k >= n);
        if singletons_ok {
            Partition::singletons(n)
        } else {
            Partition::single_cluster(n)
        }
    }
}
