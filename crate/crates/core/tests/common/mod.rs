//! Brute-force reference implementations shared by the integration tests.
//! Nothing here calls into the scoring code of the library.

#![allow(dead_code)]

use std::collections::HashMap;

use gswseg::{BaseMeasure, Likelihood, Model, Observations, PartitionPrior, SiteGraph};
use statrs::function::gamma::ln_gamma;

/// A small problem described by plain data.
#[derive(Debug, Clone)]
pub struct Instance {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub rows: Vec<Vec<u32>>,
    pub pi: Vec<f64>,
    pub prior: PartitionPrior,
}

/// Every set partition of `0..n` as canonical labels, built recursively.
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n: usize, cur: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for l in 0..=k {
            cur.push(l);
            rec(i + 1, n, cur, k.max(l + 1), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::new(), 0, &mut out);
    out
}

/// Relabels by order of first appearance.
pub fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map = HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

pub fn cluster_sizes(labels: &[usize]) -> Vec<usize> {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0; k];
    for &l in labels {
        sizes[l] += 1;
    }
    sizes.retain(|&s| s > 0);
    sizes
}

/// Log EPF written out as products of factors.
pub fn epf(prior: &PartitionPrior, sizes: &[usize]) -> f64 {
    let k = sizes.len();
    let falling = |kk: usize| -> f64 {
        if k > kk {
            return f64::NEG_INFINITY;
        }
        (0..k).map(|i| ((kk - i) as f64).ln()).sum()
    };
    let rising = |a: f64, m: usize| -> f64 { (0..m).map(|i| (a + i as f64).ln()).sum() };
    match *prior {
        PartitionPrior::MaxK { k: kk } => falling(kk),
        PartitionPrior::FiniteDirichlet { k: kk, alpha } => {
            falling(kk)
                + sizes
                    .iter()
                    .map(|&m| ln_gamma(alpha) + rising(alpha, m))
                    .sum::<f64>()
        }
        PartitionPrior::DirichletProcess { alpha } => {
            k as f64 * alpha.ln() + sizes.iter().map(|&m| rising(1.0, m - 1)).sum::<f64>()
        }
        PartitionPrior::PoissonDirichlet { alpha, theta } => {
            (1..k).map(|i| (alpha + i as f64 * theta).ln()).sum::<f64>()
                + sizes
                    .iter()
                    .map(|&m| rising(1.0 - theta, m - 1))
                    .sum::<f64>()
        }
        PartitionPrior::TruncatedDp { alpha, t_min } => {
            if sizes.iter().any(|&m| m < t_min) {
                f64::NEG_INFINITY
            } else {
                epf(&PartitionPrior::DirichletProcess { alpha }, sizes)
            }
        }
    }
}

/// Dirichlet-multinomial evidence of pooled counts, by sequential Polya-urn
/// prediction of each individual pixel.
pub fn polya_evidence(counts: &[u64], pi: &[f64]) -> f64 {
    let a: f64 = pi.iter().sum();
    let mut seen = 0u64;
    let mut lp = 0.0;
    for (d, &c) in counts.iter().enumerate() {
        for j in 0..c {
            lp += ((pi[d] + j as f64) / (a + seen as f64)).ln();
            seen += 1;
        }
    }
    lp
}

impl Instance {
    pub fn graph(&self) -> SiteGraph {
        SiteGraph::new(self.n, self.edges.iter().copied()).unwrap()
    }

    pub fn model(&self) -> Model {
        let obs = Observations::new(self.pi.len(), self.rows.clone()).unwrap();
        let lik = Likelihood::new(obs, BaseMeasure::new(self.pi.clone()).unwrap()).unwrap();
        Model::new(self.graph(), self.prior, lik).unwrap()
    }

    pub fn log_score(&self, labels: &[usize]) -> f64 {
        let labels = canonical(labels);
        let prior = epf(&self.prior, &cluster_sizes(&labels));
        if prior == f64::NEG_INFINITY {
            return prior;
        }
        let potts: f64 = self
            .edges
            .iter()
            .filter(|(i, j, _)| labels[*i] == labels[*j])
            .map(|(_, _, b)| b)
            .sum();
        let k = labels.iter().max().unwrap() + 1;
        let mut lik = 0.0;
        for c in 0..k {
            let mut pooled = vec![0u64; self.pi.len()];
            for s in (0..self.n).filter(|&s| labels[s] == c) {
                for (p, &v) in pooled.iter_mut().zip(&self.rows[s]) {
                    *p += v as u64;
                }
            }
            lik += polya_evidence(&pooled, &self.pi);
        }
        prior + potts + lik
    }

    /// Normalized posterior over every partition with positive mass.
    pub fn posterior(&self) -> HashMap<Vec<usize>, f64> {
        let scored: Vec<(Vec<usize>, f64)> = all_partitions(self.n)
            .into_iter()
            .map(|l| {
                let s = self.log_score(&l);
                (l, s)
            })
            .filter(|(_, s)| s.is_finite())
            .collect();
        let max = scored.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = scored.iter().map(|x| (x.1 - max).exp()).sum();
        scored
            .into_iter()
            .map(|(l, s)| (l, (s - max).exp() / z))
            .collect()
    }
}

/// Exact law of one ascending single-site Gibbs sweep, from the brute-force
/// score: each site's conditional is proportional to the score of the
/// labeling it produces.
pub fn exact_gibbs_sweep(inst: &Instance, start: &[usize]) -> HashMap<Vec<usize>, f64> {
    let mut layer: HashMap<Vec<usize>, f64> = HashMap::from([(canonical(start), 1.0)]);
    for site in 0..inst.n {
        let mut next = HashMap::new();
        for (labels, p) in layer {
            let fresh = labels.iter().max().unwrap() + 1;
            let mut options: Vec<usize> = (0..inst.n)
                .filter(|&s| s != site)
                .map(|s| labels[s])
                .collect();
            options.sort_unstable();
            options.dedup();
            options.push(fresh);
            let cand: Vec<(Vec<usize>, f64)> = options
                .into_iter()
                .map(|c| {
                    let mut l = labels.clone();
                    l[site] = c;
                    let s = inst.log_score(&l);
                    (canonical(&l), s)
                })
                .filter(|c| c.1.is_finite())
                .collect();
            let max = cand.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = cand.iter().map(|c| (c.1 - max).exp()).sum();
            for (l, s) in cand {
                *next.entry(l).or_insert(0.0) += p * (s - max).exp() / z;
            }
        }
        layer = next;
    }
    layer
}

pub fn total_variation(p: &HashMap<Vec<usize>, f64>, counts: &HashMap<Vec<usize>, u64>) -> f64 {
    let total = counts.values().sum::<u64>() as f64;
    let mut tv: f64 = p
        .iter()
        .map(|(k, pk)| (pk - counts.get(k).copied().unwrap_or(0) as f64 / total).abs())
        .sum();
    tv += counts
        .iter()
        .filter(|(k, _)| !p.contains_key(*k))
        .map(|(_, &c)| c as f64 / total)
        .sum::<f64>();
    tv / 2.0
}

/// Rand index from its definition: fraction of site pairs on which the two
/// labelings agree about "same cluster".
pub fn rand_index_pairs(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let mut agree = 0u64;
    let mut pairs = 0u64;
    for i in 0..n {
        for j in i + 1..n {
            pairs += 1;
            if (a[i] == a[j]) == (b[i] == b[j]) {
                agree += 1;
            }
        }
    }
    agree as f64 / pairs as f64
}

/// Connected regions of equal color in an RGB raster (4-connectivity).
pub fn color_regions(width: usize, height: usize, rgb: &[u8]) -> usize {
    let px = |i: usize| &rgb[3 * i..3 * i + 3];
    let mut seen = vec![false; width * height];
    let mut regions = 0;
    for start in 0..width * height {
        if seen[start] {
            continue;
        }
        regions += 1;
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            let (x, y) = (i % width, i / width);
            let mut nb = Vec::new();
            if x > 0 {
                nb.push(i - 1);
            }
            if x + 1 < width {
                nb.push(i + 1);
            }
            if y > 0 {
                nb.push(i - width);
            }
            if y + 1 < height {
                nb.push(i + width);
            }
            for j in nb {
                if !seen[j] && px(j) == px(i) {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    regions
}

/// Connected components of each cluster in the site graph.
pub fn graph_regions(n: usize, edges: &[(usize, usize)], labels: &[usize]) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            x = p[x];
        }
        x
    }
    for &(i, j) in edges {
        if labels[i] == labels[j] {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            parent[a] = b;
        }
    }
    (0..n).filter(|&i| find(&mut parent, i) == i).count()
}
