//! Bond variables and the spin-clusters they induce.

use rand::Rng;

use crate::graph::SiteGraph;
use crate::partition::Partition;

use super::delta::bond_probability;

/// Disjoint-set forest with union by size and path halving.
#[derive(Debug, Clone)]
pub struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn reset(&mut self) {
        for (i, p) in self.parent.iter_mut().enumerate() {
            *p = i;
        }
        self.size.fill(1);
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Sampled bonds and the resulting spin-clusters.
///
/// Spin-clusters are listed in ascending order of their smallest site, and
/// the sites of each one are ascending.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BondState {
    pub bonds: Vec<bool>,
    pub spin_label: Vec<usize>,
    pub spin_clusters: Vec<Vec<usize>>,
}

impl BondState {
    pub fn n_spin_clusters(&self) -> usize {
        self.spin_clusters.len()
    }

    /// Spin-clusters as connected components of the bonded subgraph.
    pub fn from_bonds(graph: &SiteGraph, bonds: Vec<bool>, dsu: &mut DisjointSets) -> Self {
        dsu.reset();
        for (e, &on) in graph.edges().iter().zip(&bonds) {
            if on {
                dsu.union(e.i, e.j);
            }
        }
        let n = graph.n_sites();
        let mut root_label = vec![usize::MAX; n];
        let mut spin_label = Vec::with_capacity(n);
        let mut spin_clusters: Vec<Vec<usize>> = Vec::new();
        for site in 0..n {
            let root = dsu.find(site);
            if root_label[root] == usize::MAX {
                root_label[root] = spin_clusters.len();
                spin_clusters.push(Vec::new());
            }
            let label = root_label[root];
            spin_clusters[label].push(site);
            spin_label.push(label);
        }
        BondState {
            bonds,
            spin_label,
            spin_clusters,
        }
    }
}

/// Draws `r_ij ~ Ber(1 - exp(-beta_ij delta_ij 1{z_i = z_j}))` for every
/// edge. No random number is consumed for edges that cannot be bonded.
pub fn sample_bonds<R: Rng + ?Sized>(
    graph: &SiteGraph,
    partition: &Partition,
    deltas: &[f64],
    dsu: &mut DisjointSets,
    rng: &mut R,
) -> BondState {
    let bonds = graph
        .edges()
        .iter()
        .zip(deltas)
        .map(|(e, &delta)| {
            if partition.cluster_of(e.i) != partition.cluster_of(e.j) || delta == 0.0 {
                return false;
            }
            rng.random::<f64>() < bond_probability(e.beta, delta)
        })
        .collect();
    BondState::from_bonds(graph, bonds, dsu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dsu_components() {
        let mut d = DisjointSets::new(6);
        assert!(d.union(0, 1));
        assert!(d.union(1, 2));
        assert!(!d.union(0, 2));
        assert!(d.union(4, 5));
        assert_eq!(d.find(2), d.find(0));
        assert_ne!(d.find(3), d.find(0));
        assert_ne!(d.find(4), d.find(0));
    }

    #[test]
    fn bonds_only_within_clusters() {
        let g = SiteGraph::lattice(4, 4, 5.0).unwrap();
        let labels: Vec<usize> = (0..16).map(|s| usize::from(s % 4 >= 2)).collect();
        let p = Partition::from_labels(&labels);
        let deltas = vec![1.0; g.edges().len()];
        let mut dsu = DisjointSets::new(16);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let b = sample_bonds(&g, &p, &deltas, &mut dsu, &mut rng);
            for (e, &on) in g.edges().iter().zip(&b.bonds) {
                if p.cluster_of(e.i) != p.cluster_of(e.j) {
                    assert!(!on);
                }
                if on {
                    assert_eq!(b.spin_label[e.i], b.spin_label[e.j]);
                }
            }
            for c in &b.spin_clusters {
                assert!(c.iter().all(|&s| p.cluster_of(s) == p.cluster_of(c[0])));
            }
            let mins: Vec<usize> = b.spin_clusters.iter().map(|c| c[0]).collect();
            assert!(mins.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn zero_delta_gives_singletons() {
        let g = SiteGraph::lattice(3, 3, 1.0).unwrap();
        let p = Partition::single_cluster(9);
        let mut dsu = DisjointSets::new(9);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = sample_bonds(&g, &p, &vec![0.0; g.edges().len()], &mut dsu, &mut rng);
        assert_eq!(b.n_spin_clusters(), 9);
        assert!(b.bonds.iter().all(|&on| !on));
    }

    #[test]
    fn half_bond_probability() {
        let g = SiteGraph::new(2, [(0, 1, std::f64::consts::LN_2)]).unwrap();
        let p = Partition::single_cluster(2);
        let mut dsu = DisjointSets::new(2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let trials = 200_000;
        let on = (0..trials)
            .filter(|_| sample_bonds(&g, &p, &[1.0], &mut dsu, &mut rng).bonds[0])
            .count();
        let freq = on as f64 / trials as f64;
        // 5 standard errors of a fair coin
        assert!((freq - 0.5).abs() < 5.0 * (0.25 / trials as f64).sqrt());
    }
}
