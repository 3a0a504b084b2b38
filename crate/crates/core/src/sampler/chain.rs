//! Running a chain and recording its trace.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::Model;
use crate::partition::Partition;

use super::delta::DeltaRule;
use super::state::{ChainState, ScanOrder};

/// Transition kernel applied once per iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Gibbs,
    Gsw(DeltaRule),
}

/// Starting partition of a chain.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Init {
    /// Singletons, or one cluster when the prior rules singletons out.
    #[default]
    Auto,
    Singletons,
    SingleCluster,
    Labels(Vec<usize>),
}

impl Init {
    pub fn partition(&self, model: &Model) -> Result<Partition> {
        let n = model.n_sites();
        Ok(match self {
            Init::Auto => model.default_init(),
            Init::Singletons => Partition::singletons(n),
            Init::SingleCluster => Partition::single_cluster(n),
            Init::Labels(labels) => Partition::build(labels, n)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    /// Number of sweeps; iteration 0 is the initial state.
    pub iterations: u64,
    pub seed: u64,
    pub init: Init,
    pub kernel: Kernel,
    pub scan: ScanOrder,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            iterations: 1000,
            seed: 0,
            init: Init::Auto,
            kernel: Kernel::Gsw(DeltaRule::Constant(10.0)),
            scan: ScanOrder::Ascending,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iteration: u64,
    pub log_posterior: f64,
    pub n_clusters: usize,
}

/// Per-iteration diagnostics plus the best partition visited.
///
/// Wall-clock timings live in `elapsed` and are the only part of a trace
/// that differs between two runs with the same seed.
#[derive(Debug, Clone)]
pub struct ChainTrace {
    pub records: Vec<TraceRecord>,
    pub elapsed: Vec<f64>,
    pub best_labels: Vec<usize>,
    pub best_log_posterior: f64,
    pub best_iteration: u64,
}

impl ChainTrace {
    /// Running maximum of the log posterior, one entry per record.
    pub fn running_best(&self) -> Vec<f64> {
        self.records
            .iter()
            .scan(f64::NEG_INFINITY, |best, r| {
                *best = best.max(r.log_posterior);
                Some(*best)
            })
            .collect()
    }

    pub fn final_labels(&self) -> &[usize] {
        &self.best_labels
    }
}

impl PartialEq for ChainTrace {
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records
            && self.best_labels == other.best_labels
            && self.best_log_posterior.to_bits() == other.best_log_posterior.to_bits()
            && self.best_iteration == other.best_iteration
    }
}

/// Applies one iteration of `kernel` to `state`.
pub fn step(state: &mut ChainState<'_>, kernel: &Kernel) -> Result<()> {
    match kernel {
        Kernel::Gibbs => state.gibbs_sweep(),
        Kernel::Gsw(rule) => state.gsw_sweep(rule),
    }
}

/// Runs a chain for `config.iterations` sweeps, recording every state.
pub fn run_chain(model: &Model, config: &ChainConfig) -> Result<ChainTrace> {
    let init = config.init.partition(model)?;
    let mut state = ChainState::new(model, init, config.seed)?;
    state.set_scan_order(config.scan);
    run_from(&mut state, config.iterations, &config.kernel)
}

/// Continues an existing chain and traces it.
pub fn run_from(
    state: &mut ChainState<'_>,
    iterations: u64,
    kernel: &Kernel,
) -> Result<ChainTrace> {
    let start = Instant::now();
    let capacity = iterations as usize + 1;
    let mut records = Vec::with_capacity(capacity);
    let mut elapsed = Vec::with_capacity(capacity);
    let first = state.log_posterior()?.value();
    let mut best_labels = state.partition().canonical_labels();
    let mut best = first;
    let mut best_iteration = state.iteration();
    records.push(TraceRecord {
        iteration: state.iteration(),
        log_posterior: first,
        n_clusters: state.partition().n_clusters(),
    });
    elapsed.push(start.elapsed().as_secs_f64());
    for _ in 0..iterations {
        step(state, kernel)?;
        let lp = state.log_posterior()?.value();
        if !lp.is_finite() {
            return Err(Error::Logic(format!(
                "chain left the support at iteration {}",
                state.iteration()
            )));
        }
        if lp > best {
            best = lp;
            best_labels = state.partition().canonical_labels();
            best_iteration = state.iteration();
        }
        records.push(TraceRecord {
            iteration: state.iteration(),
            log_posterior: lp,
            n_clusters: state.partition().n_clusters(),
        });
        elapsed.push(start.elapsed().as_secs_f64());
    }
    Ok(ChainTrace {
        records,
        elapsed,
        best_labels,
        best_log_posterior: best,
        best_iteration,
    })
}
