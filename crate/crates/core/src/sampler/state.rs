use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::likelihood::{ClusterStats, SparseCounts};
use crate::model::Model;
use crate::partition::Partition;
use crate::prior::{log_prior_unnorm, LogWeight};

use super::bonds::{BondState, DisjointSets};
use super::delta::DeltaRule;

/// Order in which spin-clusters are revisited within a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanOrder {
    /// Ascending smallest site index.
    #[default]
    Ascending,
    /// Fresh uniform permutation every sweep.
    Random,
}

#[derive(Debug, Clone, Default)]
pub(super) struct Scratch {
    pub potts: Vec<f64>,
    pub touched: Vec<usize>,
    pub candidates: Vec<(usize, usize)>,
    pub log_weights: Vec<f64>,
    pub dense: Vec<u64>,
    pub block: SparseCounts,
    pub order: Vec<usize>,
}

/// State of one Markov chain: the partition, cached per-cluster statistics,
/// the current bonds and the chain's own RNG.
#[derive(Debug, Clone)]
pub struct ChainState<'m> {
    pub(super) model: &'m Model,
    pub(super) partition: Partition,
    pub(super) stats: Vec<ClusterStats>,
    pub(super) rng: ChaCha8Rng,
    pub(super) iteration: u64,
    pub(super) bonds: Option<BondState>,
    pub(super) deltas: Option<(DeltaRule, Vec<f64>)>,
    pub(super) dsu: DisjointSets,
    pub(super) scan: ScanOrder,
    pub(super) scratch: Scratch,
}

impl<'m> ChainState<'m> {
    /// Fails with a configuration error if `partition` has zero posterior mass.
    pub fn new(model: &'m Model, partition: Partition, seed: u64) -> Result<Self> {
        Self::with_rng(model, partition, ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn with_rng(model: &'m Model, partition: Partition, rng: ChaCha8Rng) -> Result<Self> {
        if partition.n_sites() != model.n_sites() {
            return Err(Error::Input(format!(
                "partition has {} sites, model has {}",
                partition.n_sites(),
                model.n_sites()
            )));
        }
        let mut state = ChainState {
            model,
            stats: Vec::new(),
            rng,
            iteration: 0,
            bonds: None,
            deltas: None,
            dsu: DisjointSets::new(model.n_sites()),
            scan: ScanOrder::default(),
            scratch: Scratch::default(),
            partition,
        };
        state.rebuild_stats();
        if state.log_posterior()?.is_zero_mass() {
            return Err(Error::Config(
                "initial partition lies outside the prior's support".into(),
            ));
        }
        Ok(state)
    }

    fn rebuild_stats(&mut self) {
        let slots = self.partition.slot_capacity();
        self.scratch.potts = vec![0.0; slots];
        let Some(lik) = self.model.likelihood() else {
            return;
        };
        let obs = lik.observations();
        self.stats = (0..slots)
            .map(|_| ClusterStats::empty(obs.dims()))
            .collect();
        for c in self.partition.clusters() {
            self.stats[c.index()] = ClusterStats::from_sites(obs, self.partition.members(c));
        }
        self.scratch.dense = vec![0; obs.dims()];
    }

    /// Makes sure per-slot buffers cover every slot the partition may hand out.
    pub(super) fn ensure_slot(&mut self, slot: usize) {
        if self.scratch.potts.len() <= slot {
            self.scratch.potts.resize(slot + 1, 0.0);
        }
        if let Some(lik) = self.model.likelihood() {
            let dims = lik.observations().dims();
            while self.stats.len() <= slot {
                self.stats.push(ClusterStats::empty(dims));
            }
        }
    }

    pub fn model(&self) -> &'m Model {
        self.model
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn bonds(&self) -> Option<&BondState> {
        self.bonds.as_ref()
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn set_scan_order(&mut self, scan: ScanOrder) {
        self.scan = scan;
    }

    /// Replaces the partition (statistics are rebuilt).
    pub fn set_partition(&mut self, partition: Partition) -> Result<()> {
        if partition.n_sites() != self.model.n_sites() {
            return Err(Error::Input("partition size mismatch".into()));
        }
        self.partition = partition;
        self.bonds = None;
        self.rebuild_stats();
        Ok(())
    }

    /// Unnormalized log posterior from the cached statistics.
    pub fn log_posterior(&self) -> Result<LogWeight> {
        let model = self.model;
        let prior = log_prior_unnorm(model.prior(), model.graph(), &self.partition)?;
        let Some(lik) = model.likelihood() else {
            return Ok(prior);
        };
        if prior.is_zero_mass() {
            return Ok(prior);
        }
        let data: f64 = self
            .partition
            .clusters()
            .map(|c| lik.log_marglik(&self.stats[c.index()]))
            .sum();
        Ok(prior + data)
    }

    /// Compares cached statistics with a recomputation from scratch.
    pub fn check_consistency(&self) -> Result<()> {
        self.partition.check_invariants()?;
        let Some(lik) = self.model.likelihood() else {
            return Ok(());
        };
        let obs = lik.observations();
        for (slot, stats) in self.stats.iter().enumerate() {
            let expected = if slot < self.partition.slot_capacity() {
                ClusterStats::from_sites(
                    obs,
                    self.partition.members(crate::partition::ClusterId(slot)),
                )
            } else {
                ClusterStats::empty(obs.dims())
            };
            if *stats != expected {
                return Err(Error::Logic(format!(
                    "cached statistics of cluster slot {slot} are stale"
                )));
            }
        }
        Ok(())
    }

    pub(super) fn after_sweep(&mut self) -> Result<()> {
        self.iteration += 1;
        #[cfg(debug_assertions)]
        self.check_consistency()?;
        Ok(())
    }
}

/// Draws an index with probability proportional to `exp(log_weights)`.
/// Weights are shifted by their maximum before exponentiation.
pub(super) fn sample_log_categorical<R: Rng + ?Sized>(
    log_weights: &mut [f64],
    rng: &mut R,
) -> Result<usize> {
    let max = log_weights
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::Logic("every candidate has zero probability".into()));
    }
    let mut total = 0.0;
    for w in log_weights.iter_mut() {
        *w = (*w - max).exp();
        total += *w;
    }
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (idx, &p) in log_weights.iter().enumerate() {
        if p > 0.0 {
            last = idx;
            if u < p {
                return Ok(idx);
            }
            u -= p;
        }
    }
    Ok(last)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn categorical_handles_huge_and_impossible_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = [1000.0, f64::NEG_INFINITY, 1000.0 + 2f64.ln()];
        let mut counts = [0usize; 3];
        for _ in 0..30_000 {
            counts[sample_log_categorical(&mut w.clone(), &mut rng).unwrap()] += 1;
        }
        assert_eq!(counts[1], 0);
        let frac = counts[2] as f64 / 30_000.0;
        assert!((frac - 2.0 / 3.0).abs() < 0.015);
        assert!(sample_log_categorical(&mut [f64::NEG_INFINITY; 2], &mut rng).is_err());
    }
}
