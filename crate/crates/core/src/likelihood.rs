//! Dirichlet-multinomial marginal likelihood of pooled histograms.
//!
//! Per-site multinomial coefficients are left out: they multiply the
//! likelihood of every partition by the same factor.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Per-site histogram counts, `n` rows of `D` bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Observations {
    dims: usize,
    counts: Vec<u32>,
    totals: Vec<u64>,
    nonzero: Vec<Vec<(u32, u32)>>,
}

impl Observations {
    /// Each row must have `dims` entries and a positive sum.
    pub fn new(dims: usize, rows: Vec<Vec<u32>>) -> Result<Self> {
        if dims == 0 {
            return Err(Error::Input("histogram dimension must be positive".into()));
        }
        let mut counts = Vec::with_capacity(rows.len() * dims);
        let mut totals = Vec::with_capacity(rows.len());
        let mut nonzero = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dims {
                return Err(Error::Input(format!(
                    "site {i} has {} bins, expected {dims}",
                    row.len()
                )));
            }
            let total: u64 = row.iter().map(|&c| c as u64).sum();
            if total == 0 {
                return Err(Error::Input(format!("site {i} has an empty histogram")));
            }
            counts.extend_from_slice(row);
            totals.push(total);
            nonzero.push(
                row.iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(d, &c)| (d as u32, c))
                    .collect(),
            );
        }
        Ok(Observations {
            dims,
            counts,
            totals,
            nonzero,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.totals.len()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn row(&self, site: usize) -> &[u32] {
        &self.counts[site * self.dims..(site + 1) * self.dims]
    }

    pub fn total(&self, site: usize) -> u64 {
        self.totals[site]
    }

    /// `(bin, count)` pairs of the site's nonzero bins.
    pub fn nonzero(&self, site: usize) -> &[(u32, u32)] {
        &self.nonzero[site]
    }

    /// Elementwise sum of all rows.
    pub fn bin_totals(&self) -> Vec<u64> {
        let mut out = vec![0u64; self.dims];
        for site in 0..self.n_sites() {
            for &(d, c) in self.nonzero(site) {
                out[d as usize] += c as u64;
            }
        }
        out
    }

    /// Histogram normalized to sum to one.
    pub fn normalized(&self, site: usize) -> Vec<f64> {
        let total = self.total(site) as f64;
        self.row(site).iter().map(|&c| c as f64 / total).collect()
    }
}

/// Dirichlet concentration vector of the base measure.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseMeasure {
    pi: Vec<f64>,
    sum: f64,
    sum_ln_gamma: f64,
}

impl BaseMeasure {
    pub fn new(pi: Vec<f64>) -> Result<Self> {
        if pi.is_empty() || pi.iter().any(|&p| !(p.is_finite() && p > 0.0)) {
            return Err(Error::Input(
                "concentration entries must be finite and > 0".into(),
            ));
        }
        let sum = pi.iter().sum();
        let sum_ln_gamma = pi.iter().map(|&p| ln_gamma(p)).sum();
        Ok(BaseMeasure {
            pi,
            sum,
            sum_ln_gamma,
        })
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn dims(&self) -> usize {
        self.pi.len()
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn sum_ln_gamma(&self) -> f64 {
        self.sum_ln_gamma
    }
}

/// `pi = phi * ybar`, where `ybar` is the normalized pooled histogram.
/// Bins absent from the data are floored at `1e-6 * phi / D`.
pub fn base_measure_from_data(obs: &Observations, phi: f64) -> Result<BaseMeasure> {
    if !(phi.is_finite() && phi > 0.0) {
        return Err(Error::Config(format!("phi must be positive, got {phi}")));
    }
    let totals = obs.bin_totals();
    let grand: u64 = totals.iter().sum();
    if grand == 0 {
        return Err(Error::Input("observations contain no counts".into()));
    }
    let floor = 1e-6 * phi / obs.dims() as f64;
    let pi = totals
        .iter()
        .map(|&t| (phi * t as f64 / grand as f64).max(floor))
        .collect();
    BaseMeasure::new(pi)
}

/// Pooled bin sums of a cluster's member sites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterStats {
    bins: Vec<u64>,
    total: u64,
    members: usize,
}

impl ClusterStats {
    pub fn empty(dims: usize) -> Self {
        ClusterStats {
            bins: vec![0; dims],
            total: 0,
            members: 0,
        }
    }

    pub fn from_sites(obs: &Observations, sites: &[usize]) -> Self {
        let mut stats = Self::empty(obs.dims());
        for &s in sites {
            stats.add_site(obs, s);
        }
        stats
    }

    pub fn bins(&self) -> &[u64] {
        &self.bins
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn members(&self) -> usize {
        self.members
    }

    pub fn is_empty(&self) -> bool {
        self.members == 0
    }

    pub fn add_site(&mut self, obs: &Observations, site: usize) {
        for &(d, c) in obs.nonzero(site) {
            self.bins[d as usize] += c as u64;
        }
        self.total += obs.total(site);
        self.members += 1;
    }

    pub fn remove_site(&mut self, obs: &Observations, site: usize) {
        for &(d, c) in obs.nonzero(site) {
            self.bins[d as usize] -= c as u64;
        }
        self.total -= obs.total(site);
        self.members -= 1;
    }

    pub fn add(&mut self, other: &ClusterStats) {
        for (a, b) in self.bins.iter_mut().zip(&other.bins) {
            *a += b;
        }
        self.total += other.total;
        self.members += other.members;
    }

    pub fn subtract(&mut self, other: &ClusterStats) {
        for (a, b) in self.bins.iter_mut().zip(&other.bins) {
            *a -= b;
        }
        self.total -= other.total;
        self.members -= other.members;
    }

    pub fn merged(&self, other: &ClusterStats) -> ClusterStats {
        let mut out = self.clone();
        out.add(other);
        out
    }

    pub(crate) fn add_sparse(&mut self, block: &SparseCounts) {
        for &(d, c) in &block.entries {
            self.bins[d] += c;
        }
        self.total += block.total;
        self.members += block.members;
    }

    pub(crate) fn subtract_sparse(&mut self, block: &SparseCounts) {
        for &(d, c) in &block.entries {
            self.bins[d] -= c;
        }
        self.total -= block.total;
        self.members -= block.members;
    }
}

/// `ln p(y_A)` for the pooled statistics of cluster `A`.
pub fn log_marglik(stats: &ClusterStats, base: &BaseMeasure) -> f64 {
    if stats.total == 0 {
        return 0.0;
    }
    let mut acc = ln_gamma(base.sum) - ln_gamma(base.sum + stats.total as f64);
    for (&s, &p) in stats.bins.iter().zip(&base.pi) {
        if s > 0 {
            acc += ln_gamma(p + s as f64) - ln_gamma(p);
        }
    }
    acc
}

/// `ln p(y_{A ∪ B}) - ln p(y_A)` for disjoint `A` (cluster) and `B` (block).
pub fn log_marglik_ratio(cluster: &ClusterStats, block: &ClusterStats, base: &BaseMeasure) -> f64 {
    let mut acc = ln_gamma(base.sum + cluster.total as f64)
        - ln_gamma(base.sum + (cluster.total + block.total) as f64);
    for ((&s, &b), &p) in cluster.bins.iter().zip(&block.bins).zip(&base.pi) {
        if b > 0 {
            acc += ln_gamma(p + (s + b) as f64) - ln_gamma(p + s as f64);
        }
    }
    acc
}

/// Sparse pooled counts of a block of sites.
#[derive(Debug, Clone, Default)]
pub(crate) struct SparseCounts {
    pub(crate) entries: Vec<(usize, u64)>,
    pub(crate) total: u64,
    pub(crate) members: usize,
}

/// Observations together with their base measure and lookup tables of
/// `ln Gamma` offsets, indexed by integer counts that can occur in the data.
#[derive(Debug, Clone)]
pub struct Likelihood {
    obs: Observations,
    base: BaseMeasure,
    bin_table: Vec<Vec<f64>>,
    total_table: Vec<f64>,
}

impl Likelihood {
    pub fn new(obs: Observations, base: BaseMeasure) -> Result<Self> {
        if obs.dims() != base.dims() {
            return Err(Error::Input(format!(
                "base measure has {} bins, observations have {}",
                base.dims(),
                obs.dims()
            )));
        }
        let bin_totals = obs.bin_totals();
        let bin_table = bin_totals
            .iter()
            .zip(base.pi())
            .map(|(&t, &p)| {
                let anchor = ln_gamma(p);
                (0..=t).map(|s| ln_gamma(p + s as f64) - anchor).collect()
            })
            .collect();
        let grand: u64 = bin_totals.iter().sum();
        let anchor = ln_gamma(base.sum());
        let total_table = (0..=grand)
            .map(|s| anchor - ln_gamma(base.sum() + s as f64))
            .collect();
        Ok(Likelihood {
            obs,
            base,
            bin_table,
            total_table,
        })
    }

    /// Likelihood with `pi = phi * ybar`.
    pub fn from_data(obs: Observations, phi: f64) -> Result<Self> {
        let base = base_measure_from_data(&obs, phi)?;
        Self::new(obs, base)
    }

    pub fn observations(&self) -> &Observations {
        &self.obs
    }

    pub fn base(&self) -> &BaseMeasure {
        &self.base
    }

    /// Same value as [`log_marglik`], read from the tables.
    pub fn log_marglik(&self, stats: &ClusterStats) -> f64 {
        let mut acc = self.total_table[stats.total as usize];
        for (d, &s) in stats.bins.iter().enumerate() {
            if s > 0 {
                acc += self.bin_table[d][s as usize];
            }
        }
        acc
    }

    pub(crate) fn log_ratio_sparse(&self, cluster: &ClusterStats, block: &SparseCounts) -> f64 {
        let s = cluster.total as usize;
        let mut acc = self.total_table[s + block.total as usize] - self.total_table[s];
        for &(d, b) in &block.entries {
            let table = &self.bin_table[d];
            let cur = cluster.bins[d] as usize;
            acc += table[cur + b as usize] - table[cur];
        }
        acc
    }

    pub(crate) fn log_marglik_sparse(&self, block: &SparseCounts) -> f64 {
        let mut acc = self.total_table[block.total as usize];
        for &(d, b) in &block.entries {
            acc += self.bin_table[d][b as usize];
        }
        acc
    }

    pub(crate) fn site_counts(&self, site: usize) -> SparseCounts {
        SparseCounts {
            entries: self
                .obs
                .nonzero(site)
                .iter()
                .map(|&(d, c)| (d as usize, c as u64))
                .collect(),
            total: self.obs.total(site),
            members: 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn obs(rows: &[&[u32]]) -> Observations {
        Observations::new(rows[0].len(), rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn base_measure_examples() {
        let b = base_measure_from_data(&obs(&[&[1, 0], &[0, 1]]), 50.0).unwrap();
        assert_eq!(b.pi(), &[25.0, 25.0]);
        let b = base_measure_from_data(&obs(&[&[3, 1]]), 4.0).unwrap();
        assert_eq!(b.pi(), &[3.0, 1.0]);
        let b = base_measure_from_data(&obs(&[&[2, 2, 2], &[1, 1, 1]]), 9.0).unwrap();
        assert!(b.pi().iter().all(|&p| close(p, 3.0)));
        let b = base_measure_from_data(&obs(&[&[2, 0]]), 10.0).unwrap();
        assert!(close(b.pi()[1], 1e-6 * 10.0 / 2.0));
        assert!(base_measure_from_data(&obs(&[&[2, 0]]), 0.0).is_err());
    }

    #[test]
    fn observation_validation() {
        assert!(Observations::new(2, vec![vec![0, 0]]).is_err());
        assert!(Observations::new(2, vec![vec![1, 0, 0]]).is_err());
        assert!(Observations::new(0, vec![]).is_err());
    }

    #[test]
    fn beta_bernoulli_closed_forms() {
        let data = obs(&[&[1, 0], &[1, 0]]);
        let base = BaseMeasure::new(vec![1.0, 1.0]).unwrap();
        let one = ClusterStats::from_sites(&data, &[0]);
        let two = ClusterStats::from_sites(&data, &[0, 1]);
        assert!(close(log_marglik(&one, &base), 0.5f64.ln()));
        assert!(close(log_marglik(&two, &base), (1.0f64 / 3.0).ln()));
        assert_eq!(log_marglik(&ClusterStats::empty(2), &base), 0.0);
        let other = ClusterStats::from_sites(&data, &[1]);
        assert!(close(
            log_marglik_ratio(&one, &other, &base),
            (2.0f64 / 3.0).ln()
        ));
        assert!(close(
            log_marglik_ratio(&ClusterStats::empty(2), &one, &base),
            log_marglik(&one, &base)
        ));
    }

    fn rows_strategy() -> impl Strategy<Value = (usize, Vec<Vec<u32>>)> {
        (1usize..5).prop_flat_map(|d| {
            (
                Just(d),
                prop::collection::vec(prop::collection::vec(0u32..6, d), 1..7).prop_map(
                    |mut rows| {
                        for r in rows.iter_mut() {
                            if r.iter().all(|&c| c == 0) {
                                r[0] = 1;
                            }
                        }
                        rows
                    },
                ),
            )
        })
    }

    proptest! {
        #[test]
        fn ratio_then_merge_equals_union((d, rows) in rows_strategy(), split in 0usize..7, phi in 0.5f64..60.0) {
            let data = Observations::new(d, rows.clone()).unwrap();
            let lik = Likelihood::from_data(data.clone(), phi).unwrap();
            let n = rows.len();
            let cut = split.min(n);
            let a: Vec<usize> = (0..cut).collect();
            let b: Vec<usize> = (cut..n).collect();
            let sa = ClusterStats::from_sites(&data, &a);
            let sb = ClusterStats::from_sites(&data, &b);
            let union = ClusterStats::from_sites(&data, &(0..n).collect::<Vec<_>>());
            let lhs = log_marglik(&sa, lik.base()) + log_marglik_ratio(&sa, &sb, lik.base());
            prop_assert!(close(lhs, log_marglik(&union, lik.base())));
            prop_assert!(close(lik.log_marglik(&union), log_marglik(&union, lik.base())));
            // sparse hot path agrees with the dense ratio
            let mut block = SparseCounts::default();
            for &s in &b {
                let site = lik.site_counts(s);
                for (bin, c) in site.entries {
                    match block.entries.iter_mut().find(|(x, _)| *x == bin) {
                        Some((_, acc)) => *acc += c,
                        None => block.entries.push((bin, c)),
                    }
                }
                block.total += site.total;
                block.members += 1;
            }
            let dense = log_marglik_ratio(&sa, &sb, lik.base());
            prop_assert!((lik.log_ratio_sparse(&sa, &block) - dense).abs() < 1e-9);
        }

        #[test]
        fn depends_only_on_pooled_sums((d, rows) in rows_strategy(), phi in 0.5f64..60.0) {
            let data = Observations::new(d, rows.clone()).unwrap();
            let base = base_measure_from_data(&data, phi).unwrap();
            let sites: Vec<usize> = (0..rows.len()).collect();
            let forward = ClusterStats::from_sites(&data, &sites);
            let reversed: Vec<usize> = sites.iter().rev().copied().collect();
            prop_assert_eq!(log_marglik(&forward, &base), log_marglik(&ClusterStats::from_sites(&data, &reversed), &base));
            // one site carrying the pooled histogram
            let pooled: Vec<u32> = forward.bins().iter().map(|&c| c as u32).collect();
            let single = Observations::new(d, vec![pooled]).unwrap();
            prop_assert_eq!(log_marglik(&forward, &base), log_marglik(&ClusterStats::from_sites(&single, &[0]), &base));
        }

        #[test]
        fn add_remove_roundtrip((d, rows) in rows_strategy(), order in prop::collection::vec(0usize..7, 0..10)) {
            let data = Observations::new(d, rows.clone()).unwrap();
            let n = rows.len();
            let all: Vec<usize> = (0..n).collect();
            let mut stats = ClusterStats::from_sites(&data, &all);
            let mut present = vec![true; n];
            for k in order {
                let s = k % n;
                if present[s] { stats.remove_site(&data, s) } else { stats.add_site(&data, s) }
                present[s] = !present[s];
            }
            let members: Vec<usize> = (0..n).filter(|&s| present[s]).collect();
            prop_assert_eq!(stats, ClusterStats::from_sites(&data, &members));
        }
    }
}
