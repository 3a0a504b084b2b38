//! Set partitions of sites with explicit membership lists, the block-removal
//! view used by the samplers, and the Rand index.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::error::{Error, Result};

/// Opaque cluster handle. Ids are storage slots and carry no meaning beyond
/// identifying a cluster while it is alive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClusterId(pub(crate) usize);

impl ClusterId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Assignment of `n` sites to nonempty clusters.
///
/// Membership is stored per cluster with O(1) removal; emptied clusters are
/// released immediately and their slot may be reused by a later cluster.
#[derive(Debug, Clone)]
pub struct Partition {
    labels: Vec<usize>,
    position: Vec<usize>,
    members: Vec<Vec<usize>>,
    /// Nonempty slots, ascending.
    live: Vec<usize>,
    free: BinaryHeap<Reverse<usize>>,
    n_clusters: usize,
}

impl PartialEq for Partition {
    /// Two partitions are equal when they induce the same set partition,
    /// whatever their internal ids.
    fn eq(&self, other: &Self) -> bool {
        self.canonical_labels() == other.canonical_labels()
    }
}

impl Eq for Partition {}

impl Partition {
    /// Builds a partition from arbitrary per-site labels. Cluster ids are
    /// assigned contiguously in order of first appearance.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut remap: HashMap<usize, usize> = HashMap::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut slots = Vec::with_capacity(labels.len());
        let mut position = Vec::with_capacity(labels.len());
        for (site, &raw) in labels.iter().enumerate() {
            let slot = *remap.entry(raw).or_insert_with(|| {
                members.push(Vec::new());
                members.len() - 1
            });
            position.push(members[slot].len());
            members[slot].push(site);
            slots.push(slot);
        }
        let n_clusters = members.len();
        Partition {
            labels: slots,
            position,
            members,
            live: (0..n_clusters).collect(),
            free: BinaryHeap::new(),
            n_clusters,
        }
    }

    /// Like [`Partition::from_labels`] but checks the label count against `n`.
    pub fn build(labels: &[usize], n: usize) -> Result<Self> {
        if labels.len() != n {
            return Err(Error::Input(format!(
                "expected {n} labels, got {}",
                labels.len()
            )));
        }
        Ok(Self::from_labels(labels))
    }

    pub fn singletons(n: usize) -> Self {
        Self::from_labels(&(0..n).collect::<Vec<_>>())
    }

    pub fn single_cluster(n: usize) -> Self {
        Self::from_labels(&vec![0; n])
    }

    pub fn n_sites(&self) -> usize {
        self.labels.len()
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn cluster_of(&self, site: usize) -> ClusterId {
        ClusterId(self.labels[site])
    }

    pub fn members(&self, id: ClusterId) -> &[usize] {
        &self.members[id.0]
    }

    pub fn size(&self, id: ClusterId) -> usize {
        self.members[id.0].len()
    }

    /// Upper bound (exclusive) on slot indices currently in use.
    pub fn slot_capacity(&self) -> usize {
        self.members.len()
    }

    /// Live clusters in ascending id order.
    pub fn clusters(&self) -> impl Iterator<Item = ClusterId> + '_ {
        self.live.iter().map(|&slot| ClusterId(slot))
    }

    /// Cluster sizes in ascending id order.
    pub fn sizes(&self) -> Vec<usize> {
        self.clusters().map(|c| self.size(c)).collect()
    }

    /// Labels relabelled by order of first appearance (a restricted growth
    /// string). Equal for two partitions iff they induce the same set partition.
    pub fn canonical_labels(&self) -> Vec<usize> {
        let mut remap = vec![usize::MAX; self.members.len()];
        let mut next = 0;
        self.labels
            .iter()
            .map(|&slot| {
                if remap[slot] == usize::MAX {
                    remap[slot] = next;
                    next += 1;
                }
                remap[slot]
            })
            .collect()
    }

    fn detach(&mut self, site: usize) {
        let slot = self.labels[site];
        let pos = self.position[site];
        let list = &mut self.members[slot];
        list.swap_remove(pos);
        if let Some(&moved) = list.get(pos) {
            self.position[moved] = pos;
        }
        if list.is_empty() {
            self.free.push(Reverse(slot));
            if let Ok(idx) = self.live.binary_search(&slot) {
                self.live.remove(idx);
            }
            self.n_clusters -= 1;
        }
    }

    fn attach(&mut self, site: usize, slot: usize) {
        self.labels[site] = slot;
        self.position[site] = self.members[slot].len();
        self.members[slot].push(site);
    }

    fn fresh_slot(&mut self) -> usize {
        // Slots are popped lowest-first so that id allocation is deterministic.
        let slot = match self.free.pop() {
            Some(Reverse(slot)) => slot,
            None => {
                self.members.push(Vec::new());
                self.members.len() - 1
            }
        };
        if let Err(idx) = self.live.binary_search(&slot) {
            self.live.insert(idx, slot);
        }
        slot
    }

    /// Moves `sites` into the existing cluster `to`.
    pub fn move_block(&mut self, sites: &[usize], to: ClusterId) {
        debug_assert!(!self.members[to.0].is_empty(), "target cluster is empty");
        for &site in sites {
            if self.labels[site] != to.0 {
                self.detach(site);
                self.attach(site, to.0);
            }
        }
    }

    /// Moves `sites` into a cluster of their own and returns its id. When the
    /// block already is a whole cluster the partition is left untouched.
    pub fn move_block_to_new(&mut self, sites: &[usize]) -> ClusterId {
        let first = self.labels[sites[0]];
        if self.members[first].len() == sites.len()
            && sites.iter().all(|&s| self.labels[s] == first)
        {
            return ClusterId(first);
        }
        for &site in sites {
            self.detach(site);
        }
        let slot = self.fresh_slot();
        self.n_clusters += 1;
        for &site in sites {
            self.attach(site, slot);
        }
        ClusterId(slot)
    }

    /// Checks membership, positions and counts against the label vector.
    pub fn check_invariants(&self) -> Result<()> {
        let mut live = 0;
        let mut total = 0;
        let mut released = vec![false; self.members.len()];
        for r in &self.free {
            released[r.0] = true;
        }
        for (slot, list) in self.members.iter().enumerate() {
            if !list.is_empty() {
                live += 1;
            } else if !released[slot] {
                return Err(Error::Logic(format!("empty slot {slot} not released")));
            }
            for (pos, &site) in list.iter().enumerate() {
                if self.labels[site] != slot || self.position[site] != pos {
                    return Err(Error::Logic(format!("site {site} misfiled in slot {slot}")));
                }
            }
            total += list.len();
        }
        let listed: Vec<usize> = (0..self.members.len())
            .filter(|&s| !self.members[s].is_empty())
            .collect();
        if total != self.labels.len() || live != self.n_clusters || listed != self.live {
            return Err(Error::Logic("cluster sizes do not sum to n".into()));
        }
        Ok(())
    }

    /// View of this partition with `block` taken out.
    pub fn remove_block(&self, block: &[usize]) -> PartitionView<'_> {
        remove_block(self, block)
    }
}

/// A partition with a block of sites removed: the residual clusters and
/// their reduced sizes. The underlying partition is not modified.
#[derive(Debug, Clone)]
pub struct PartitionView<'a> {
    partition: &'a Partition,
    block: Vec<usize>,
    removed: Vec<(ClusterId, usize)>,
    residual: Vec<(ClusterId, usize)>,
}

/// Removes `block` from `partition` and returns the residual view.
/// Clusters emptied by the removal are dropped from the view.
pub fn remove_block<'a>(partition: &'a Partition, block: &[usize]) -> PartitionView<'a> {
    let mut removed: Vec<(ClusterId, usize)> = Vec::new();
    for &site in block {
        let id = partition.cluster_of(site);
        match removed.iter_mut().find(|(c, _)| *c == id) {
            Some((_, count)) => *count += 1,
            None => removed.push((id, 1)),
        }
    }
    removed.sort();
    let residual = partition
        .clusters()
        .filter_map(|id| {
            let taken = removed
                .iter()
                .find(|(c, _)| *c == id)
                .map_or(0, |(_, k)| *k);
            let left = partition.size(id) - taken;
            (left > 0).then_some((id, left))
        })
        .collect();
    PartitionView {
        partition,
        block: block.to_vec(),
        removed,
        residual,
    }
}

impl PartitionView<'_> {
    pub fn block(&self) -> &[usize] {
        &self.block
    }

    /// Clusters that remain nonempty, with their residual sizes.
    pub fn residual(&self) -> &[(ClusterId, usize)] {
        &self.residual
    }

    pub fn residual_sizes(&self) -> Vec<usize> {
        self.residual.iter().map(|&(_, m)| m).collect()
    }

    pub fn n_clusters(&self) -> usize {
        self.residual.len()
    }

    /// How many block sites were taken from each original cluster.
    pub fn removed_counts(&self) -> &[(ClusterId, usize)] {
        &self.removed
    }

    /// Sizes after putting every block site back in its original cluster,
    /// in ascending id order.
    pub fn reinserted_sizes(&self) -> Vec<usize> {
        self.partition
            .clusters()
            .map(|id| {
                let base = self
                    .residual
                    .iter()
                    .find(|(c, _)| *c == id)
                    .map_or(0, |(_, m)| *m);
                let back = self
                    .removed
                    .iter()
                    .find(|(c, _)| *c == id)
                    .map_or(0, |(_, k)| *k);
                base + back
            })
            .collect()
    }
}

/// Fraction of site pairs on which two labelings agree (both together or
/// both apart).
pub fn rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Input(format!(
            "label vectors differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let n = a.len() as u64;
    if n < 2 {
        return Err(Error::Input("rand index needs at least two sites".into()));
    }
    let pairs = |m: u64| m * (m.saturating_sub(1)) / 2;
    let mut joint: HashMap<(usize, usize), u64> = HashMap::new();
    let mut row: HashMap<usize, u64> = HashMap::new();
    let mut col: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *row.entry(x).or_default() += 1;
        *col.entry(y).or_default() += 1;
    }
    let together_both: u64 = joint.values().map(|&m| pairs(m)).sum();
    let together_a: u64 = row.values().map(|&m| pairs(m)).sum();
    let together_b: u64 = col.values().map(|&m| pairs(m)).sum();
    let total = pairs(n);
    let agree = total + 2 * together_both - together_a - together_b;
    Ok(agree as f64 / total as f64)
}
