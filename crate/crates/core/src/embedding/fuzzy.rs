use std::collections::BTreeMap;

use super::calibrate::CalibratedRow;
use super::knn::NeighborGraph;

/// Symmetric membership graph. Each undirected edge is stored once with
/// `i < j`; weights lie in `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl FuzzyGraph {
    /// Builds a graph from undirected edges, merging by fuzzy union when an
    /// edge appears twice. Intended for fixtures.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Self {
        let mut map = BTreeMap::new();
        for &(i, j, w) in edges {
            if i == j || w <= 0.0 {
                continue;
            }
            let key = (i.min(j), i.max(j));
            let e = map.entry(key).or_insert(0.0);
            *e = fuzzy_union(*e, w);
        }
        FuzzyGraph {
            n,
            edges: map.into_iter().map(|((i, j), w)| (i, j, w)).collect(),
        }
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let key = (i.min(j), i.max(j));
        self.edges
            .binary_search_by(|&(a, b, _)| (a, b).cmp(&key))
            .map(|pos| self.edges[pos].2)
            .unwrap_or(0.0)
    }

    /// Both orientations of every edge.
    pub fn directed_edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().flat_map(|&(i, j, w)| [(i, j, w), (j, i, w)])
    }

    /// Weighted degree of every vertex.
    pub fn degrees(&self) -> Vec<f64> {
        let mut deg = vec![0.0; self.n];
        for &(i, j, w) in &self.edges {
            deg[i] += w;
            deg[j] += w;
        }
        deg
    }
}

/// Probabilistic t-conorm `a + b − a·b`.
pub fn fuzzy_union(a: f64, b: f64) -> f64 {
    a + b - a * b
}

/// Directed memberships `exp(−max(0, d − rho_i) / sigma_i)`, symmetrized by
/// fuzzy union.
pub fn fuzzy_graph(g: &NeighborGraph, cal: &[CalibratedRow]) -> FuzzyGraph {
    let mut directed: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (i, (idx, dist)) in g.indices.iter().zip(&g.distances).enumerate() {
        let CalibratedRow { rho, sigma, .. } = cal[i];
        for (&j, &d) in idx.iter().zip(dist) {
            let mu = (-(d - rho).max(0.0) / sigma).exp();
            if mu > 0.0 {
                directed.insert((i, j), mu);
            }
        }
    }
    let mut sym: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (&(i, j), &w) in &directed {
        let back = directed.get(&(j, i)).copied().unwrap_or(0.0);
        let key = (i.min(j), i.max(j));
        sym.insert(key, fuzzy_union(w, back));
    }
    FuzzyGraph {
        n: g.n_points(),
        edges: sym
            .into_iter()
            .filter(|&(_, w)| w > 0.0)
            .map(|((i, j), w)| (i, j, w.min(1.0)))
            .collect(),
    }
}
