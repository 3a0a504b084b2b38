//! Generalized Swendsen-Wang sweep: sample bonds, then reassign each
//! spin-cluster as a block.

use rand::seq::SliceRandom;

use crate::error::Result;
use crate::partition::ClusterId;
use crate::prior::EpfMove;

use super::bonds::{sample_bonds, BondState};
use super::delta::{correction_exponent, DeltaRule};
use super::state::{sample_log_categorical, ChainState, ScanOrder};

impl ChainState<'_> {
    fn deltas_for(&mut self, rule: &DeltaRule) -> Result<()> {
        if self.deltas.as_ref().is_some_and(|(r, _)| r == rule) {
            return Ok(());
        }
        let model = self.model;
        let obs = model.likelihood().map(|l| l.observations());
        let deltas = rule.edge_deltas(model.graph(), obs)?;
        self.deltas = Some((*rule, deltas));
        Ok(())
    }

    /// Draws fresh bonds for the current partition.
    pub fn sample_bonds(&mut self, rule: &DeltaRule) -> Result<&BondState> {
        self.deltas_for(rule)?;
        let deltas = &self.deltas.as_ref().expect("deltas cached").1;
        let bonds = sample_bonds(
            self.model.graph(),
            &self.partition,
            deltas,
            &mut self.dsu,
            &mut self.rng,
        );
        Ok(self.bonds.insert(bonds))
    }

    /// One generalized Swendsen-Wang iteration.
    pub fn gsw_sweep(&mut self, rule: &DeltaRule) -> Result<()> {
        self.sample_bonds(rule)?;
        let bonds = self.bonds.take().expect("bonds just sampled");
        let mut order = std::mem::take(&mut self.scratch.order);
        order.clear();
        order.extend(0..bonds.n_spin_clusters());
        if self.scan == ScanOrder::Random {
            order.shuffle(&mut self.rng);
        }
        let result = order
            .iter()
            .try_for_each(|&label| self.reassign_spin_cluster(&bonds, label));
        self.scratch.order = order;
        self.bonds = Some(bonds);
        result?;
        self.after_sweep()
    }

    fn reassign_spin_cluster(&mut self, bonds: &BondState, label: usize) -> Result<()> {
        let model = self.model;
        let graph = model.graph();
        let prior = model.prior();
        let lik = model.likelihood();
        let min_size = prior.min_cluster_size();
        let deltas = &self.deltas.as_ref().expect("deltas cached").1;
        let block = &bonds.spin_clusters[label];
        let size = block.len();
        let home = self.partition.cluster_of(block[0]).index();
        let scratch = &mut self.scratch;

        if lik.is_some() {
            let counts = &mut scratch.block;
            counts.entries.clear();
            counts.total = 0;
            counts.members = size;
            for &site in block {
                let sc = model.site_counts(site);
                for &(d, c) in &sc.entries {
                    if scratch.dense[d] == 0 {
                        counts.entries.push((d, 0));
                    }
                    scratch.dense[d] += c;
                }
                counts.total += sc.total;
            }
            for entry in counts.entries.iter_mut() {
                entry.1 = scratch.dense[entry.0];
                scratch.dense[entry.0] = 0;
            }
            self.stats[home].subtract_sparse(counts);
        }

        // Boundary edges are never bonded; internal edges move with the block
        // and contribute the same factor to every candidate.
        for &site in block {
            for nb in graph.neighbors(site) {
                if bonds.spin_label[nb.site] == label {
                    continue;
                }
                let slot = self.partition.cluster_of(nb.site).index();
                let w = correction_exponent(graph.edges()[nb.edge].beta, deltas[nb.edge]);
                if !scratch.touched.contains(&slot) {
                    scratch.touched.push(slot);
                }
                scratch.potts[slot] += w;
            }
        }

        scratch.candidates.clear();
        let mut n_small = 0;
        for c in self.partition.clusters() {
            let m = self.partition.size(c) - if c.index() == home { size } else { 0 };
            if m > 0 {
                n_small += usize::from(m < min_size);
                scratch.candidates.push((c.index(), m));
            }
        }
        let epf = EpfMove::new(prior, scratch.candidates.len(), n_small);

        scratch.log_weights.clear();
        for &(slot, m) in &scratch.candidates {
            let mut w = epf.to_existing(m, size) + scratch.potts[slot];
            if let Some(lik) = lik {
                w += lik.log_ratio_sparse(&self.stats[slot], &scratch.block);
            }
            scratch.log_weights.push(w);
        }
        let mut fresh = epf.to_new(size);
        if let Some(lik) = lik {
            fresh += if size == 1 {
                model.site_alone(block[0])
            } else {
                lik.log_marglik_sparse(&scratch.block)
            };
        }
        scratch.log_weights.push(fresh);

        for &slot in &scratch.touched {
            scratch.potts[slot] = 0.0;
        }
        scratch.touched.clear();

        let pick = sample_log_categorical(&mut scratch.log_weights, &mut self.rng)?;
        let target = if pick < scratch.candidates.len() {
            let slot = scratch.candidates[pick].0;
            if slot != home {
                self.partition.move_block(block, ClusterId(slot));
            }
            slot
        } else {
            let id = self.partition.move_block_to_new(block);
            self.ensure_slot(id.index());
            id.index()
        };
        if lik.is_some() {
            self.stats[target].add_sparse(&self.scratch.block);
        }
        Ok(())
    }
}
