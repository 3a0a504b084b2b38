//! Synthetic lattice problems with planted segmentations.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;

use crate::error::{Error, Result};
use crate::graph::SiteGraph;
use crate::likelihood::Observations;

use super::problem::{Footprint, ProblemFile};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub width: usize,
    pub height: usize,
    /// Number of planted clusters.
    pub clusters: usize,
    /// Symmetric Dirichlet parameter of the planted multinomials; small
    /// values give well-separated clusters.
    pub dirichlet: f64,
    pub pixels_per_site: u32,
    pub beta: f64,
    pub bins: usize,
    /// Side of the square pixel block drawn for each site.
    pub cell_pixels: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            width: 20,
            height: 20,
            clusters: 4,
            dirichlet: 0.3,
            pixels_per_site: 60,
            beta: 0.02,
            bins: 8,
            cell_pixels: 4,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.width * self.height;
        if n == 0 || self.bins == 0 || self.cell_pixels == 0 || self.pixels_per_site == 0 {
            return Err(Error::Config(
                "synthetic dimensions must be positive".into(),
            ));
        }
        if self.clusters == 0 || self.clusters > n {
            return Err(Error::Config(format!(
                "planted cluster count must be in 1..={n}, got {}",
                self.clusters
            )));
        }
        if !(self.dirichlet > 0.0 && self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::Config("dirichlet must be > 0 and beta >= 0".into()));
        }
        Ok(())
    }
}

/// Grows `k` contiguous regions from random seed cells by randomized
/// flood fill over the 4-neighbor lattice.
fn plant_regions(width: usize, height: usize, k: usize, rng: &mut impl Rng) -> Vec<usize> {
    let n = width * height;
    let mut labels = vec![usize::MAX; n];
    let mut frontier: Vec<(usize, usize)> = Vec::new();
    for (label, cell) in sample(rng, n, k).into_iter().enumerate() {
        labels[cell] = label;
        frontier.push((cell, label));
    }
    while !frontier.is_empty() {
        let (cell, label) = frontier.swap_remove(rng.random_range(0..frontier.len()));
        let (x, y) = (cell % width, cell / width);
        let mut push = |c: usize| {
            if labels[c] == usize::MAX {
                labels[c] = label;
                frontier.push((c, label));
            }
        };
        if x > 0 {
            push(cell - 1);
        }
        if x + 1 < width {
            push(cell + 1);
        }
        if y > 0 {
            push(cell - width);
        }
        if y + 1 < height {
            push(cell + width);
        }
    }
    labels
}

/// Builds a lattice problem with ground truth: planted regions, one random
/// multinomial per region, and per-site histograms drawn from them.
pub fn synthesize(spec: &SyntheticSpec) -> Result<ProblemFile> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (w, h) = (spec.width, spec.height);
    let labels = plant_regions(w, h, spec.clusters, &mut rng);

    let gamma = Gamma::new(spec.dirichlet, 1.0)
        .map_err(|e| Error::Config(format!("invalid Dirichlet parameter: {e}")))?;
    let mut samplers = Vec::with_capacity(spec.clusters);
    for _ in 0..spec.clusters {
        let mut p: Vec<f64> = (0..spec.bins).map(|_| gamma.sample(&mut rng)).collect();
        if p.iter().all(|&x| x <= 0.0) {
            p[rng.random_range(0..spec.bins)] = 1.0;
        }
        samplers.push(WeightedIndex::new(&p).map_err(|e| Error::Logic(e.to_string()))?);
    }
    let rows: Vec<Vec<u32>> = labels
        .iter()
        .map(|&k| {
            let mut row = vec![0u32; spec.bins];
            for _ in 0..spec.pixels_per_site {
                row[samplers[k].sample(&mut rng)] += 1;
            }
            row
        })
        .collect();

    let cell = spec.cell_pixels;
    let (pw, ph) = (w * cell, h * cell);
    let sites = (0..ph)
        .flat_map(|py| (0..pw).map(move |px| ((py / cell) * w + px / cell) as u32))
        .collect();

    Ok(ProblemFile {
        graph: SiteGraph::lattice(w, h, spec.beta)?,
        observations: Observations::new(spec.bins, rows)?,
        ground_truth: Some(labels),
        footprint: Some(Footprint {
            width: pw,
            height: ph,
            sites,
        }),
    })
}
