//! Exact posterior over all set partitions of a small site set.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::Model;
use crate::partition::Partition;

/// Largest site count accepted by [`exact_posterior`] (Bell(12) = 4213597).
pub const MAX_EXACT_SITES: usize = 12;

/// Calls `visit` on every restricted growth string of length `n`, in
/// lexicographic order. Each string is the canonical labeling of one set
/// partition.
pub fn for_each_set_partition(n: usize, mut visit: impl FnMut(&[usize])) {
    if n == 0 {
        return;
    }
    let mut labels = vec![0usize; n];
    // prefix_max[i] = max(labels[..i]), with prefix_max[0] unused
    let mut prefix_max = vec![0usize; n];
    loop {
        visit(&labels);
        // rightmost position that can still be incremented
        let mut i = n - 1;
        loop {
            if i == 0 {
                return;
            }
            if labels[i] <= prefix_max[i] {
                break;
            }
            i -= 1;
        }
        labels[i] += 1;
        for j in i + 1..n {
            prefix_max[j] = prefix_max[j - 1].max(labels[j - 1]);
            labels[j] = 0;
        }
    }
}

/// Normalized posterior probabilities of every in-support partition.
#[derive(Debug, Clone)]
pub struct ExactPosterior {
    entries: Vec<(Vec<usize>, f64)>,
    index: HashMap<Vec<usize>, usize>,
}

impl ExactPosterior {
    /// `(canonical labels, probability)` pairs in lexicographic label order.
    pub fn entries(&self) -> &[(Vec<usize>, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Probability of the partition induced by `labels` (0 if outside support).
    pub fn probability(&self, labels: &[usize]) -> f64 {
        let key = Partition::from_labels(labels).canonical_labels();
        self.index.get(&key).map_or(0.0, |&i| self.entries[i].1)
    }

    /// Position of a canonical labeling in [`ExactPosterior::entries`].
    pub fn position(&self, canonical: &[usize]) -> Option<usize> {
        self.index.get(canonical).copied()
    }

    /// Total-variation distance between this distribution and empirical
    /// counts keyed by canonical labels.
    pub fn total_variation(&self, counts: &HashMap<Vec<usize>, u64>) -> f64 {
        let total: u64 = counts.values().sum();
        let total = total.max(1) as f64;
        let mut tv = 0.0;
        for (key, p) in &self.entries {
            let q = counts.get(key).copied().unwrap_or(0) as f64 / total;
            tv += (p - q).abs();
        }
        for (key, &c) in counts {
            if !self.index.contains_key(key) {
                tv += c as f64 / total;
            }
        }
        0.5 * tv
    }
}

/// Enumerates every set partition of the model's sites and normalizes the
/// unnormalized log posterior over them.
pub fn exact_posterior(model: &Model) -> Result<ExactPosterior> {
    let n = model.n_sites();
    if n > MAX_EXACT_SITES {
        return Err(Error::Config(format!(
            "exact enumeration refused for {n} sites (limit {MAX_EXACT_SITES})"
        )));
    }
    if n == 0 {
        return Err(Error::Input("model has no sites".into()));
    }
    let mut scored: Vec<(Vec<usize>, f64)> = Vec::new();
    let mut failure = None;
    for_each_set_partition(n, |labels| {
        if failure.is_some() {
            return;
        }
        match model.log_posterior(&Partition::from_labels(labels)) {
            Ok(lw) if lw.is_finite() => scored.push((labels.to_vec(), lw.value())),
            Ok(_) => {}
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    if scored.is_empty() {
        return Err(Error::Config(
            "no partition lies in the prior's support".into(),
        ));
    }
    let max = scored
        .iter()
        .map(|(_, w)| *w)
        .fold(f64::NEG_INFINITY, f64::max);
    let norm: f64 = scored.iter().map(|(_, w)| (w - max).exp()).sum();
    let entries: Vec<(Vec<usize>, f64)> = scored
        .into_iter()
        .map(|(k, w)| (k, (w - max).exp() / norm))
        .collect();
    let index = entries
        .iter()
        .enumerate()
        .map(|(i, (k, _))| (k.clone(), i))
        .collect();
    Ok(ExactPosterior { entries, index })
}
