//! Exchangeable partition functions, the Potts smoothness term and their
//! product, all as unnormalized log weights.

use std::fmt;
use std::ops::Add;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::graph::SiteGraph;
use crate::partition::Partition;

/// Log of an unnormalized weight; `-inf` marks zero prior mass.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogWeight(f64);

impl LogWeight {
    pub const ZERO_MASS: LogWeight = LogWeight(f64::NEG_INFINITY);

    pub fn new(value: f64) -> Self {
        debug_assert!(!value.is_nan());
        LogWeight(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_zero_mass(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl Add for LogWeight {
    type Output = LogWeight;
    fn add(self, rhs: LogWeight) -> LogWeight {
        LogWeight(self.0 + rhs.0)
    }
}

impl Add<f64> for LogWeight {
    type Output = LogWeight;
    fn add(self, rhs: f64) -> LogWeight {
        LogWeight(self.0 + rhs)
    }
}

impl fmt::Display for LogWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Exchangeable partition prior `g(m_1, ..., m_k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PartitionPrior {
    /// `K!/(K-k)!` on `k <= K`.
    MaxK { k: usize },
    /// `K!/(K-k)! * prod Gamma(alpha + m_j)` on `k <= K`.
    FiniteDirichlet { k: usize, alpha: f64 },
    /// `alpha^k * prod Gamma(m_j)`.
    DirichletProcess { alpha: f64 },
    /// `[theta + alpha]_theta^(k-1) * prod [1 - theta]_1^(m_j - 1)`.
    PoissonDirichlet { alpha: f64, theta: f64 },
    /// Dirichlet process restricted to partitions whose clusters all have at
    /// least `t_min` members. `t_min` of 0 or 1 imposes no restriction.
    TruncatedDp { alpha: f64, t_min: usize },
}

impl PartitionPrior {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        match *self {
            PartitionPrior::MaxK { k } => {
                if k == 0 {
                    return Err(Error::Config("K must be at least 1".into()));
                }
                Ok(())
            }
            PartitionPrior::FiniteDirichlet { k, alpha } => {
                if k == 0 {
                    return Err(Error::Config("K must be at least 1".into()));
                }
                positive("alpha", alpha)
            }
            PartitionPrior::DirichletProcess { alpha } => positive("alpha", alpha),
            PartitionPrior::TruncatedDp { alpha, .. } => positive("alpha", alpha),
            PartitionPrior::PoissonDirichlet { alpha, theta } => {
                if !alpha.is_finite() || !theta.is_finite() {
                    return Err(Error::Config("alpha and theta must be finite".into()));
                }
                if (0.0..1.0).contains(&theta) && alpha > -theta {
                    return Ok(());
                }
                if theta < 0.0 {
                    let l = alpha / -theta;
                    if l >= 1.0 - 1e-9 && (l - l.round()).abs() < 1e-9 {
                        return Ok(());
                    }
                }
                Err(Error::Config(format!(
                    "Poisson-Dirichlet needs alpha > -theta with 0 <= theta < 1, \
                     or theta < 0 with alpha = -L*theta for integer L >= 1 \
                     (got alpha={alpha}, theta={theta})"
                )))
            }
        }
    }

    /// Smallest cluster size inside the prior's support.
    pub fn min_cluster_size(&self) -> usize {
        match *self {
            PartitionPrior::TruncatedDp { t_min, .. } => t_min.max(1),
            _ => 1,
        }
    }

    /// Largest number of clusters inside the prior's support, if bounded.
    pub fn max_clusters(&self) -> Option<usize> {
        match *self {
            PartitionPrior::MaxK { k } | PartitionPrior::FiniteDirichlet { k, .. } => Some(k),
            PartitionPrior::PoissonDirichlet { alpha, theta } if theta < 0.0 => {
                Some((alpha / -theta).round() as usize)
            }
            _ => None,
        }
    }
}

fn ln_falling_k(big_k: usize, k: usize) -> f64 {
    // ln K!/(K-k)!
    ln_gamma(big_k as f64 + 1.0) - ln_gamma((big_k - k) as f64 + 1.0)
}

fn ln_gamma_ratio(x: f64, c: usize) -> f64 {
    // ln Gamma(x + c) / Gamma(x)
    if c == 1 {
        x.ln()
    } else {
        ln_gamma(x + c as f64) - ln_gamma(x)
    }
}

fn pd_cluster_term(theta: f64, m: usize) -> f64 {
    // ln [1 - theta]_1^(m-1) = ln Gamma(m - theta) - ln Gamma(1 - theta)
    ln_gamma(m as f64 - theta) - ln_gamma(1.0 - theta)
}

fn pd_count_term(alpha: f64, theta: f64, k: usize) -> f64 {
    // ln [theta + alpha]_theta^(k-1) = sum_{i=1}^{k-1} ln(alpha + i theta)
    if k <= 1 {
        return 0.0;
    }
    let steps = (k - 1) as f64;
    if theta == 0.0 {
        steps * alpha.ln()
    } else if theta > 0.0 {
        let r = alpha / theta;
        steps * theta.ln() + ln_gamma(r + k as f64) - ln_gamma(r + 1.0)
    } else {
        let mut acc = 0.0;
        for i in 1..k {
            let f = alpha + i as f64 * theta;
            if f <= 0.0 {
                return f64::NEG_INFINITY;
            }
            acc += f.ln();
        }
        acc
    }
}

/// `ln g(m)` for the given prior, up to the prior's normalizing constant.
pub fn log_epf(prior: &PartitionPrior, sizes: &[usize]) -> Result<LogWeight> {
    prior.validate()?;
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::Input(
            "cluster sizes must be nonempty and positive".into(),
        ));
    }
    let k = sizes.len();
    let value = match *prior {
        PartitionPrior::MaxK { k: big_k } => {
            if k > big_k {
                return Ok(LogWeight::ZERO_MASS);
            }
            ln_falling_k(big_k, k)
        }
        PartitionPrior::FiniteDirichlet { k: big_k, alpha } => {
            if k > big_k {
                return Ok(LogWeight::ZERO_MASS);
            }
            ln_falling_k(big_k, k)
                + sizes
                    .iter()
                    .map(|&m| ln_gamma(alpha + m as f64))
                    .sum::<f64>()
        }
        PartitionPrior::DirichletProcess { alpha } => dp_log_epf(alpha, sizes),
        PartitionPrior::TruncatedDp { alpha, .. } => {
            if sizes.iter().any(|&m| m < prior.min_cluster_size()) {
                return Ok(LogWeight::ZERO_MASS);
            }
            dp_log_epf(alpha, sizes)
        }
        PartitionPrior::PoissonDirichlet { alpha, theta } => {
            pd_count_term(alpha, theta, k)
                + sizes
                    .iter()
                    .map(|&m| pd_cluster_term(theta, m))
                    .sum::<f64>()
        }
    };
    Ok(LogWeight::new(value))
}

fn dp_log_epf(alpha: f64, sizes: &[usize]) -> f64 {
    sizes.len() as f64 * alpha.ln() + sizes.iter().map(|&m| ln_gamma(m as f64)).sum::<f64>()
}

/// Destination of a block move relative to a residual partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveTarget {
    /// Index into the residual size vector.
    Existing(usize),
    New,
}

/// Summary of a residual partition that prices block moves in O(1).
///
/// Values are `ln g(after) - ln g(residual)` with the residual's support
/// ignored; a move is out of support (`-inf`) when the resulting partition is.
#[derive(Debug, Clone, Copy)]
pub struct EpfMove<'p> {
    prior: &'p PartitionPrior,
    k: usize,
    n_small: usize,
    min_size: usize,
}

impl<'p> EpfMove<'p> {
    /// `k` residual clusters, `n_small` of which are below the prior's
    /// minimum cluster size.
    pub fn new(prior: &'p PartitionPrior, k: usize, n_small: usize) -> Self {
        EpfMove {
            prior,
            k,
            n_small,
            min_size: prior.min_cluster_size(),
        }
    }

    pub fn from_sizes(prior: &'p PartitionPrior, residual: &[usize]) -> Self {
        let min = prior.min_cluster_size();
        Self::new(
            prior,
            residual.len(),
            residual.iter().filter(|&&m| m < min).count(),
        )
    }

    /// Joining a residual cluster of size `m` with a block of `c` sites.
    pub fn to_existing(&self, m: usize, c: usize) -> f64 {
        if self.min_size > 1 {
            let feasible = if m < self.min_size {
                self.n_small == 1 && m + c >= self.min_size
            } else {
                self.n_small == 0
            };
            if !feasible {
                return f64::NEG_INFINITY;
            }
        }
        let m = m as f64;
        match *self.prior {
            PartitionPrior::MaxK { .. } => 0.0,
            PartitionPrior::FiniteDirichlet { alpha, .. } => ln_gamma_ratio(alpha + m, c),
            PartitionPrior::DirichletProcess { .. } | PartitionPrior::TruncatedDp { .. } => {
                ln_gamma_ratio(m, c)
            }
            PartitionPrior::PoissonDirichlet { theta, .. } => ln_gamma_ratio(m - theta, c),
        }
    }

    /// Opening a new cluster holding a block of `c` sites.
    pub fn to_new(&self, c: usize) -> f64 {
        if self.min_size > 1 && (self.n_small > 0 || c < self.min_size) {
            return f64::NEG_INFINITY;
        }
        let k = self.k;
        match *self.prior {
            PartitionPrior::MaxK { k: big_k } => {
                if k >= big_k {
                    f64::NEG_INFINITY
                } else {
                    ((big_k - k) as f64).ln()
                }
            }
            PartitionPrior::FiniteDirichlet { k: big_k, alpha } => {
                if k >= big_k {
                    f64::NEG_INFINITY
                } else {
                    ((big_k - k) as f64).ln() + ln_gamma(alpha + c as f64)
                }
            }
            PartitionPrior::DirichletProcess { alpha }
            | PartitionPrior::TruncatedDp { alpha, .. } => alpha.ln() + ln_gamma(c as f64),
            PartitionPrior::PoissonDirichlet { alpha, theta } => {
                let count = if k == 0 {
                    0.0
                } else {
                    let f = alpha + k as f64 * theta;
                    if f <= 0.0 {
                        return f64::NEG_INFINITY;
                    }
                    f.ln()
                };
                count + pd_cluster_term(theta, c)
            }
        }
    }
}

/// `ln g(after) - ln g(residual)` for moving a block of `c` sites into
/// `target`. With an empty residual this is `ln g((c))`.
pub fn log_epf_move_ratio(
    prior: &PartitionPrior,
    residual: &[usize],
    target: MoveTarget,
    c: usize,
) -> Result<LogWeight> {
    prior.validate()?;
    if c == 0 {
        return Err(Error::Input("block size must be positive".into()));
    }
    let mv = EpfMove::from_sizes(prior, residual);
    let value = match target {
        MoveTarget::Existing(idx) => {
            let &m = residual.get(idx).ok_or_else(|| {
                Error::Logic(format!(
                    "target cluster {idx} out of range for {} residual clusters",
                    residual.len()
                ))
            })?;
            mv.to_existing(m, c)
        }
        MoveTarget::New => mv.to_new(c),
    };
    Ok(LogWeight::new(value))
}

/// Potts exponent: sum of couplings over edges whose endpoints share a cluster.
pub fn log_potts(graph: &SiteGraph, partition: &Partition) -> f64 {
    graph
        .edges()
        .iter()
        .filter(|e| partition.cluster_of(e.i) == partition.cluster_of(e.j))
        .map(|e| e.beta)
        .sum()
}

/// `ln M(partition) + ln g(sizes)`.
pub fn log_prior_unnorm(
    prior: &PartitionPrior,
    graph: &SiteGraph,
    partition: &Partition,
) -> Result<LogWeight> {
    if graph.n_sites() != partition.n_sites() {
        return Err(Error::Input(format!(
            "partition covers {} sites, graph has {}",
            partition.n_sites(),
            graph.n_sites()
        )));
    }
    Ok(log_epf(prior, &partition.sizes())? + log_potts(graph, partition))
}
