use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::euclidean;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
}

/// Exact k-nearest-neighbour lists, one per row, nearest first.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    pub k: usize,
    pub metric: Metric,
    pub indices: Vec<Vec<usize>>,
    pub distances: Vec<Vec<f64>>,
}

impl NeighborGraph {
    pub fn n_points(&self) -> usize {
        self.indices.len()
    }
}

/// Brute-force kNN. A point is never its own neighbour; equal distances
/// are ordered by lower index.
pub fn knn_graph(data: ArrayView2<'_, f64>, k: usize, metric: Metric) -> Result<NeighborGraph> {
    let n = data.nrows();
    if n < 2 || k == 0 || k > n - 1 {
        return Err(Error::KTooLarge {
            k,
            n,
            constraint: "1 <= k <= N - 1",
        });
    }
    let rows: Vec<Vec<f64>> = data.rows().into_iter().map(|r| r.to_vec()).collect();
    let (indices, distances) = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut cand: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = match metric {
                        Metric::Euclidean => euclidean(&rows[i], &rows[j]),
                    };
                    (d, j)
                })
                .collect();
            cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            cand.truncate(k);
            cand.into_iter().map(|(d, j)| (j, d)).unzip::<_, _, Vec<_>, Vec<_>>()
        })
        .unzip();
    Ok(NeighborGraph {
        k,
        metric,
        indices,
        distances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn one_dimensional_k1() {
        let g = knn_graph(array![[0.0], [1.0], [3.0]].view(), 1, Metric::Euclidean).unwrap();
        assert_eq!(g.indices, [[1], [0], [1]]);
        assert_eq!(g.distances, [[1.0], [1.0], [2.0]]);
    }

    #[test]
    fn k_equal_n_minus_one_is_complete() {
        let data = array![[0.0, 0.0], [1.0, 0.0], [0.0, 2.0], [5.0, 5.0]];
        let g = knn_graph(data.view(), 3, Metric::Euclidean).unwrap();
        for (i, row) in g.indices.iter().enumerate() {
            let mut sorted = row.clone();
            sorted.sort();
            let expected: Vec<usize> = (0..4).filter(|&j| j != i).collect();
            assert_eq!(sorted, expected);
            assert!(g.distances[i].windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn duplicates_are_zero_distance_neighbours_not_self_loops() {
        let data = array![[1.0, 1.0], [1.0, 1.0], [4.0, 4.0]];
        let g = knn_graph(data.view(), 1, Metric::Euclidean).unwrap();
        assert_eq!(g.indices[0], [1]);
        assert_eq!(g.indices[1], [0]);
        assert_eq!(g.distances[0], [0.0]);
    }

    #[test]
    fn ties_prefer_lower_index() {
        let data = array![[0.0], [-1.0], [1.0]];
        let g = knn_graph(data.view(), 1, Metric::Euclidean).unwrap();
        assert_eq!(g.indices[0], [1]);
    }

    #[test]
    fn k_bounds() {
        let data = array![[0.0], [1.0]];
        assert!(matches!(
            knn_graph(data.view(), 2, Metric::Euclidean),
            Err(Error::KTooLarge { .. })
        ));
        assert!(knn_graph(data.view(), 0, Metric::Euclidean).is_err());
        assert!(knn_graph(array![[0.0]].view(), 1, Metric::Euclidean).is_err());
    }
}
