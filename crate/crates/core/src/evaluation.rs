//! Prior simulation, CRP draws and the lambda-sweep study.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::statistics::{Data, Distribution, Median, OrderStatistics};

use crate::error::{Error, Result};
use crate::graph::SiteGraph;
use crate::model::Model;
use crate::partition::Partition;
use crate::prior::PartitionPrior;
use crate::sampler::{
    run_chain, step, ChainConfig, ChainState, DeltaRule, Init, Kernel, ScanOrder,
};

/// Mixes a base seed with a stream index into an independent chain seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One draw from the Dirichlet-process partition model by sequential
/// seating: site `i` opens a new cluster with probability `alpha/(alpha+i)`
/// and otherwise joins the cluster of a uniformly chosen earlier site.
pub fn crp_sample<R: Rng + ?Sized>(alpha: f64, n: usize, rng: &mut R) -> Result<Partition> {
    if alpha.is_nan() || alpha <= 0.0 || n == 0 {
        return Err(Error::Config(format!(
            "CRP needs alpha > 0 and n >= 1 (alpha={alpha}, n={n})"
        )));
    }
    let mut labels = Vec::with_capacity(n);
    let mut k = 0;
    for i in 0..n {
        let label = if rng.random::<f64>() * (alpha + i as f64) < alpha {
            k += 1;
            k - 1
        } else {
            labels[rng.random_range(0..i)]
        };
        labels.push(label);
    }
    Ok(Partition::from_labels(&labels))
}

/// Expected number of CRP clusters: `sum_{i<n} alpha / (alpha + i)`.
pub fn crp_expected_clusters(alpha: f64, n: usize) -> f64 {
    (0..n).map(|i| alpha / (alpha + i as f64)).sum()
}

/// Summary of a sample of cluster counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountSummary {
    pub mean: f64,
    pub std_dev: f64,
    pub std_error: f64,
    pub median: f64,
    pub lower_quartile: f64,
    pub upper_quartile: f64,
}

impl CountSummary {
    pub fn of(values: &[f64]) -> Self {
        let mut data = Data::new(values.to_vec());
        let mean = data.mean().unwrap_or(f64::NAN);
        let std_dev = data.std_dev().unwrap_or(0.0);
        CountSummary {
            mean,
            std_dev,
            std_error: std_dev / (values.len() as f64).sqrt(),
            median: data.median(),
            lower_quartile: data.lower_quartile(),
            upper_quartile: data.upper_quartile(),
        }
    }
}

/// Draws of the cluster count and pooled cluster-size histogram.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PriorStats {
    pub cluster_counts: Vec<usize>,
    /// Cluster size -> number of clusters of that size across all draws.
    pub size_histogram: BTreeMap<usize, u64>,
}

impl PriorStats {
    pub fn record(&mut self, partition: &Partition) {
        self.cluster_counts.push(partition.n_clusters());
        for m in partition.sizes() {
            *self.size_histogram.entry(m).or_default() += 1;
        }
    }

    pub fn merge(&mut self, other: PriorStats) {
        self.cluster_counts.extend(other.cluster_counts);
        for (m, c) in other.size_histogram {
            *self.size_histogram.entry(m).or_default() += c;
        }
    }

    pub fn len(&self) -> usize {
        self.cluster_counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cluster_counts.is_empty()
    }

    pub fn summary(&self) -> CountSummary {
        let k: Vec<f64> = self.cluster_counts.iter().map(|&k| k as f64).collect();
        CountSummary::of(&k)
    }
}

/// Draws from the CRP, collected as [`PriorStats`].
pub fn crp_stats(alpha: f64, n: usize, draws: usize, seed: u64) -> Result<PriorStats> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = PriorStats::default();
    for _ in 0..draws {
        stats.record(&crp_sample(alpha, n, &mut rng)?);
    }
    Ok(stats)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriorSimConfig {
    pub draws: usize,
    pub sweeps_per_draw: u64,
    pub burn_in: u64,
    pub seed: u64,
    /// Independent chains, run on separate threads; draws are split evenly.
    pub chains: usize,
    pub init: Init,
}

impl Default for PriorSimConfig {
    fn default() -> Self {
        PriorSimConfig {
            draws: 1000,
            sweeps_per_draw: 200,
            burn_in: 200,
            seed: 0,
            chains: 1,
            init: Init::Auto,
        }
    }
}

/// Simulates the combined Potts-partition prior on `graph` with a
/// constant likelihood, keeping one partition every `sweeps_per_draw` sweeps.
pub fn prior_simulate(
    prior: &PartitionPrior,
    graph: &SiteGraph,
    rule: &DeltaRule,
    config: &PriorSimConfig,
) -> Result<PriorStats> {
    if config.chains == 0 || config.sweeps_per_draw == 0 {
        return Err(Error::Config(
            "chains and sweeps_per_draw must be positive".into(),
        ));
    }
    let model = Model::prior_only(graph.clone(), *prior)?;
    let chains = config.chains;
    let share = |c: usize| config.draws / chains + usize::from(c < config.draws % chains);
    let run = |c: usize| -> Result<PriorStats> {
        let init = config.init.partition(&model)?;
        let mut state = ChainState::new(&model, init, derive_seed(config.seed, c as u64))?;
        state.set_scan_order(ScanOrder::Ascending);
        let kernel = Kernel::Gsw(*rule);
        for _ in 0..config.burn_in {
            step(&mut state, &kernel)?;
        }
        let mut stats = PriorStats::default();
        for _ in 0..share(c) {
            for _ in 0..config.sweeps_per_draw {
                step(&mut state, &kernel)?;
            }
            stats.record(state.partition());
        }
        Ok(stats)
    };
    let results: Vec<Result<PriorStats>> = if chains == 1 {
        vec![run(0)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..chains).map(|c| scope.spawn(move || run(c))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("prior simulation thread panicked"))
                .collect()
        })
    };
    let mut all = PriorStats::default();
    for r in results {
        all.merge(r?);
    }
    Ok(all)
}

/// Summary of one lambda value across all problems and repeats.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaRow {
    pub lambda: f64,
    pub best: CountSummary,
    /// Percentage increase of the best log posterior over the lambda = 0 run
    /// with the same problem and repeat: `100 (b - b0) / |b0|`.
    pub increase_pct: CountSummary,
    /// Median over runs of the log-posterior variance in the second half of
    /// each trace.
    pub median_tail_variance: f64,
    /// Best log posterior of every run, problem-major.
    pub runs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSweepConfig {
    pub lambdas: Vec<f64>,
    pub iterations: u64,
    pub repeats: usize,
    pub seed: u64,
    pub init: Init,
}

/// Variance of the log posterior over the second half of a trace.
pub fn tail_variance(trace: &crate::sampler::ChainTrace) -> f64 {
    let half = trace.records.len() / 2;
    let tail: Vec<f64> = trace.records[half..]
        .iter()
        .map(|r| r.log_posterior)
        .collect();
    Data::new(tail).variance().unwrap_or(0.0)
}

/// Runs GSW with constant `delta = lambda` on every problem, `repeats`
/// times each, and compares the best log posterior reached against
/// single-site Gibbs (`lambda = 0`).
pub fn lambda_sweep(problems: &[Model], config: &LambdaSweepConfig) -> Result<Vec<LambdaRow>> {
    if problems.is_empty() || config.repeats == 0 {
        return Err(Error::Config(
            "lambda sweep needs problems and repeats".into(),
        ));
    }
    let run = |model: &Model, lambda: f64, stream: u64| {
        run_chain(
            model,
            &ChainConfig {
                iterations: config.iterations,
                seed: derive_seed(config.seed, stream),
                init: config.init.clone(),
                kernel: Kernel::Gsw(DeltaRule::Constant(lambda)),
                scan: ScanOrder::Ascending,
            },
        )
    };
    let mut per_lambda: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let mut baseline = Vec::new();
    for (p, model) in problems.iter().enumerate() {
        for r in 0..config.repeats {
            let stream = (p * config.repeats + r) as u64;
            baseline.push(run(model, 0.0, stream)?.best_log_posterior);
        }
    }
    for &lambda in &config.lambdas {
        let mut bests = Vec::new();
        let mut variances = Vec::new();
        for (p, model) in problems.iter().enumerate() {
            for r in 0..config.repeats {
                let stream = (p * config.repeats + r) as u64;
                let trace = run(model, lambda, stream)?;
                bests.push(trace.best_log_posterior);
                variances.push(tail_variance(&trace));
            }
        }
        per_lambda.push((bests, variances));
    }
    Ok(config
        .lambdas
        .iter()
        .zip(per_lambda)
        .map(|(&lambda, (runs, variances))| {
            let increase: Vec<f64> = runs
                .iter()
                .zip(&baseline)
                .map(|(b, b0)| 100.0 * (b - b0) / b0.abs())
                .collect();
            LambdaRow {
                lambda,
                best: CountSummary::of(&runs),
                increase_pct: CountSummary::of(&increase),
                median_tail_variance: Data::new(variances).median(),
                runs,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crp_single_site() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(crp_sample(0.5, 1, &mut rng).unwrap().n_clusters(), 1);
        }
        assert!(crp_sample(0.0, 3, &mut rng).is_err());
    }

    #[test]
    fn crp_tiny_alpha_gives_one_cluster() {
        let stats = crp_stats(1e-6, 50, 10_000, 9).unwrap();
        assert!(stats.cluster_counts.iter().all(|&k| k == 1));
    }

    #[test]
    fn crp_mean_matches_analytic() {
        let draws = 10_000;
        let stats = crp_stats(3.0, 1000, draws, 17).unwrap();
        let s = stats.summary();
        let expected = crp_expected_clusters(3.0, 1000);
        assert!(
            (s.mean - expected).abs() < 3.0 * s.std_error,
            "{} vs {expected}",
            s.mean
        );
        assert_eq!(stats.len(), draws);
    }

    #[test]
    fn seeds_differ_per_stream() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }

    #[test]
    fn prior_stats_counts_draws() {
        let g = SiteGraph::lattice(4, 4, 0.1).unwrap();
        let cfg = PriorSimConfig {
            draws: 7,
            sweeps_per_draw: 2,
            burn_in: 3,
            chains: 2,
            ..Default::default()
        };
        let stats = prior_simulate(
            &PartitionPrior::DirichletProcess { alpha: 1.0 },
            &g,
            &DeltaRule::Constant(1.0),
            &cfg,
        )
        .unwrap();
        assert_eq!(stats.len(), 7);
        let sites: u64 = stats
            .size_histogram
            .iter()
            .map(|(m, c)| *m as u64 * c)
            .sum();
        assert_eq!(sites, 7 * 16);
    }
}
