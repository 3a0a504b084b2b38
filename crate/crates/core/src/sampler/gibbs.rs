//! Single-site Gibbs updates.

use crate::error::Result;
use crate::prior::EpfMove;

use super::state::{sample_log_categorical, ChainState};

impl ChainState<'_> {
    /// Visits every site once in index order and redraws its cluster from
    /// the full conditional given all other sites.
    pub fn gibbs_sweep(&mut self) -> Result<()> {
        let model = self.model;
        let graph = model.graph();
        let prior = model.prior();
        let lik = model.likelihood();
        let min_size = prior.min_cluster_size();

        for site in 0..model.n_sites() {
            let home = self.partition.cluster_of(site).index();
            if lik.is_some() {
                self.stats[home].subtract_sparse(model.site_counts(site));
            }

            let scratch = &mut self.scratch;
            for nb in graph.neighbors(site) {
                let slot = self.partition.cluster_of(nb.site).index();
                if scratch.potts[slot] == 0.0 {
                    scratch.touched.push(slot);
                }
                scratch.potts[slot] += graph.edges()[nb.edge].beta;
            }

            scratch.candidates.clear();
            let mut n_small = 0;
            for c in self.partition.clusters() {
                let m = self.partition.size(c) - usize::from(c.index() == home);
                if m > 0 {
                    n_small += usize::from(m < min_size);
                    scratch.candidates.push((c.index(), m));
                }
            }
            let epf = EpfMove::new(prior, scratch.candidates.len(), n_small);

            scratch.log_weights.clear();
            for &(slot, m) in &scratch.candidates {
                let mut w = epf.to_existing(m, 1) + scratch.potts[slot];
                if let Some(lik) = lik {
                    w += lik.log_ratio_sparse(&self.stats[slot], model.site_counts(site));
                }
                scratch.log_weights.push(w);
            }
            let mut fresh = epf.to_new(1);
            if lik.is_some() {
                fresh += model.site_alone(site);
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
                    let id = crate::partition::ClusterId(slot);
                    self.partition.move_block(&[site], id);
                }
                slot
            } else {
                let id = self.partition.move_block_to_new(&[site]);
                self.ensure_slot(id.index());
                id.index()
            };
            if lik.is_some() {
                self.stats[target].add_sparse(model.site_counts(site));
            }
        }
        self.after_sweep()
    }
}
