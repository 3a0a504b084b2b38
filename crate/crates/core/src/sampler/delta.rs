//! Bond-strength hyperparameters of the generalized Swendsen-Wang kernel.

use crate::error::{Error, Result};
use crate::graph::SiteGraph;
use crate::likelihood::Observations;

/// Distance between two sites' normalized histograms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Distance {
    #[default]
    TotalVariation,
    Hellinger,
}

impl Distance {
    pub fn between(self, p: &[f64], q: &[f64]) -> f64 {
        match self {
            Distance::TotalVariation => {
                0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
            }
            Distance::Hellinger => {
                let bc: f64 = p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum();
                (1.0 - bc).max(0.0).sqrt()
            }
        }
    }
}

/// Rule producing one `delta_ij >= 0` per graph edge.
///
/// `Constant(0.0)` gives single-site Gibbs and `Constant(1.0)` classical
/// Swendsen-Wang.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaRule {
    Constant(f64),
    /// `lambda * exp(-tau * d(y_i, y_j))`.
    DataDependent {
        lambda: f64,
        tau: f64,
        distance: Distance,
    },
}

impl DeltaRule {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v >= 0.0 && v.is_finite();
        match *self {
            DeltaRule::Constant(lambda) if ok(lambda) => Ok(()),
            DeltaRule::DataDependent { lambda, tau, .. } if ok(lambda) && ok(tau) => Ok(()),
            _ => Err(Error::Config(format!(
                "delta rule parameters must be finite and >= 0: {self:?}"
            ))),
        }
    }

    /// Per-edge deltas, in the graph's edge order.
    pub fn edge_deltas(&self, graph: &SiteGraph, obs: Option<&Observations>) -> Result<Vec<f64>> {
        self.validate()?;
        match *self {
            DeltaRule::Constant(lambda) => Ok(vec![lambda; graph.edges().len()]),
            DeltaRule::DataDependent {
                lambda,
                tau,
                distance,
            } => {
                let obs = obs.ok_or_else(|| {
                    Error::Config("data-dependent delta rule needs observations".into())
                })?;
                let normalized: Vec<Vec<f64>> =
                    (0..obs.n_sites()).map(|s| obs.normalized(s)).collect();
                Ok(graph
                    .edges()
                    .iter()
                    .map(|e| {
                        lambda * (-tau * distance.between(&normalized[e.i], &normalized[e.j])).exp()
                    })
                    .collect())
            }
        }
    }
}

/// Log of the reassignment correction for an unbonded boundary edge whose
/// far endpoint sits in the candidate cluster: `beta * (1 - delta)`.
pub fn correction_exponent(beta: f64, delta: f64) -> f64 {
    beta * (1.0 - delta)
}

/// Probability that an edge between two same-cluster sites is bonded.
pub fn bond_probability(beta: f64, delta: f64) -> f64 {
    -(-beta * delta).exp_m1()
}
