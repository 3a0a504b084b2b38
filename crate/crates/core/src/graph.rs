//! Site adjacency graph with per-edge Potts couplings.

use crate::error::{Error, Result};

/// An undirected edge `(i, j)` with `i < j` and coupling `beta > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub beta: f64,
}

/// Neighbor entry in an adjacency list: the other endpoint and the edge index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub site: usize,
    pub edge: usize,
}

/// Immutable adjacency structure over `n` sites.
///
/// Pairs that are not neighbors carry no edge at all, so every stored
/// coupling is strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteGraph {
    n: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<Neighbor>>,
}

impl SiteGraph {
    /// Builds a graph from `(i, j, beta)` triples. Endpoints may be given in
    /// either order; they are stored with `i < j`.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut stored: Vec<Edge> = Vec::new();
        let mut adjacency: Vec<Vec<Neighbor>> = vec![Vec::new(); n];
        for (a, b, beta) in edges {
            if a >= n || b >= n {
                return Err(Error::Input(format!(
                    "edge ({a}, {b}) out of range for {n} sites"
                )));
            }
            if a == b {
                return Err(Error::Input(format!("self-loop on site {a}")));
            }
            if !(beta.is_finite() && beta > 0.0) {
                return Err(Error::Input(format!(
                    "edge ({a}, {b}) has coupling {beta}; couplings must be finite and > 0"
                )));
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if adjacency[i].iter().any(|nb| nb.site == j) {
                return Err(Error::Input(format!("duplicate edge ({i}, {j})")));
            }
            let edge = stored.len();
            stored.push(Edge { i, j, beta });
            adjacency[i].push(Neighbor { site: j, edge });
            adjacency[j].push(Neighbor { site: i, edge });
        }
        Ok(SiteGraph {
            n,
            edges: stored,
            adjacency,
        })
    }

    /// Graph with `n` sites and no edges.
    pub fn empty(n: usize) -> Self {
        SiteGraph {
            n,
            edges: Vec::new(),
            adjacency: vec![Vec::new(); n],
        }
    }

    /// 4-neighbor lattice over `width * height` cells in row-major order.
    /// A `beta` of zero yields an edge-free graph.
    pub fn lattice(width: usize, height: usize, beta: f64) -> Result<Self> {
        Self::partial_lattice(width * height, width, beta)
    }

    /// First `n` cells of a row-major lattice of the given width, with
    /// 4-neighbor edges among them. Lets any site count sit on a grid.
    pub fn partial_lattice(n: usize, width: usize, beta: f64) -> Result<Self> {
        if width == 0 {
            return Err(Error::Input("lattice width must be positive".into()));
        }
        if beta == 0.0 {
            return Ok(Self::empty(n));
        }
        let mut edges = Vec::new();
        for s in 0..n {
            if s % width + 1 < width && s + 1 < n {
                edges.push((s, s + 1, beta));
            }
            if s + width < n {
                edges.push((s, s + width, beta));
            }
        }
        Self::new(n, edges)
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, site: usize) -> &[Neighbor] {
        &self.adjacency[site]
    }

    /// Copy of this graph with every coupling replaced by `beta`
    /// (`beta == 0` drops all edges).
    pub fn with_constant_beta(&self, beta: f64) -> Result<Self> {
        if beta == 0.0 {
            return Ok(Self::empty(self.n));
        }
        Self::new(self.n, self.edges.iter().map(|e| (e.i, e.j, beta)))
    }
}
