//! k-means, silhouette and adjusted Rand index.

use std::collections::HashMap;

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::stats::{euclidean, squared_euclidean};

const MAX_LLOYD_ITER: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centroids: Array2<f64>,
    pub inertia: f64,
    /// Seed of the restart that produced this result.
    pub seed: u64,
}

fn rows(data: ArrayView2<'_, f64>) -> Vec<Vec<f64>> {
    data.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// k-means++ seeding followed by Lloyd iterations.
fn kmeans_once(points: &[Vec<f64>], k: usize, seed: u64) -> KMeansResult {
    let n = points.len();
    let dim = points[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut centers: Vec<Vec<f64>> = vec![points[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| squared_euclidean(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random_range(0.0..total);
            let mut idx = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if r < w {
                    idx = i;
                    break;
                }
                r -= w;
            }
            idx
        } else {
            rng.random_range(0..n)
        };
        centers.push(points[pick].clone());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(squared_euclidean(p, centers.last().unwrap()));
        }
    }

    let mut labels = vec![0usize; n];
    for iter in 0..MAX_LLOYD_ITER {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let best = (0..k)
                .min_by(|&a, &b| squared_euclidean(p, &centers[a]).total_cmp(&squared_euclidean(p, &centers[b])))
                .unwrap();
            if labels[i] != best || iter == 0 {
                changed |= labels[i] != best;
                labels[i] = best;
            }
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(p) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        if !changed && iter > 0 {
            break;
        }
    }

    let inertia = points
        .iter()
        .zip(&labels)
        .map(|(p, &l)| squared_euclidean(p, &centers[l]))
        .sum();
    let mut centroids = Array2::zeros((k, dim));
    for (c, center) in centers.iter().enumerate() {
        for (t, &x) in center.iter().enumerate() {
            centroids[[c, t]] = x;
        }
    }
    KMeansResult {
        labels,
        centroids,
        inertia,
        seed,
    }
}

/// Best of `restarts` runs by inertia; ties go to the lowest restart seed.
/// Restart `r` uses seed `seed + r`.
pub fn kmeans(data: ArrayView2<'_, f64>, k: usize, restarts: usize, seed: u64) -> KMeansResult {
    assert!(k >= 1 && k <= data.nrows(), "k must be in 1..=N");
    let points = rows(data);
    (0..restarts.max(1) as u64)
        .map(|r| kmeans_once(&points, k, seed.wrapping_add(r)))
        .reduce(|best, cand| if cand.inertia < best.inertia { cand } else { best })
        .unwrap()
}

fn choose2(x: u64) -> f64 {
    (x * x.saturating_sub(1) / 2) as f64
}

/// Adjusted Rand index of two labelings of the same points.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as u64;
    let mut table: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    // both trivial (one cluster, or all singletons) and identical structure
    if rows.len() == cols.len() && (rows.len() == 1 || rows.len() as u64 == n) {
        return 1.0;
    }
    let index: f64 = table.values().map(|&c| choose2(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| choose2(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| choose2(c)).sum();
    let expected = sum_a * sum_b / choose2(n);
    let max = 0.5 * (sum_a + sum_b);
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

/// Mean silhouette coefficient. Points in singleton clusters score 0.
pub fn silhouette_score(data: ArrayView2<'_, f64>, labels: &[usize]) -> f64 {
    let points = rows(data);
    let n = points.len();
    let mut clusters: Vec<usize> = labels.to_vec();
    clusters.sort_unstable();
    clusters.dedup();
    if clusters.len() < 2 {
        return 0.0;
    }
    let slot: HashMap<usize, usize> = clusters.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut sizes = vec![0usize; clusters.len()];
    for l in labels {
        sizes[slot[l]] += 1;
    }
    let mut total = 0.0;
    for i in 0..n {
        let own = slot[&labels[i]];
        if sizes[own] < 2 {
            continue;
        }
        let mut sums = vec![0.0; clusters.len()];
        for j in 0..n {
            if i != j {
                sums[slot[&labels[j]]] += euclidean(&points[i], &points[j]);
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..clusters.len())
            .filter(|&c| c != own)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    total / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn ari_identical_and_relabelled() {
        let a = [0, 0, 1, 1, 2, 2];
        assert_eq!(adjusted_rand_index(&a, &a), 1.0);
        assert_eq!(adjusted_rand_index(&a, &[5, 5, 3, 3, 9, 9]), 1.0);
    }

    #[test]
    fn ari_known_value() {
        // sklearn: adjusted_rand_score([0,0,1,1],[0,0,1,2]) = 0.5714285714
        let v = adjusted_rand_index(&[0, 0, 1, 1], &[0, 0, 1, 2]);
        assert!((v - 4.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn ari_random_partitions_average_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut acc = 0.0;
        for _ in 0..200 {
            let a: Vec<usize> = (0..100).map(|_| rng.random_range(0..3)).collect();
            let b: Vec<usize> = (0..100).map(|_| rng.random_range(0..3)).collect();
            acc += adjusted_rand_index(&a, &b);
        }
        assert!((acc / 200.0).abs() < 0.01);
    }

    #[test]
    fn kmeans_separates_obvious_groups() {
        let data = array![
            [0.0, 0.0],
            [0.1, 0.0],
            [0.0, 0.1],
            [10.0, 10.0],
            [10.1, 10.0],
            [10.0, 10.1]
        ];
        let r = kmeans(data.view(), 2, 5, 0);
        assert_eq!(adjusted_rand_index(&r.labels, &[0, 0, 0, 1, 1, 1]), 1.0);
        assert!(r.inertia < 0.1);
    }

    #[test]
    fn silhouette_of_two_tight_pairs() {
        // a = 1, b = mean(10, 11) = 10.5 for the point at 0: s = 9.5/10.5
        let data = array![[0.0], [1.0], [10.0], [11.0]];
        let s = silhouette_score(data.view(), &[0, 0, 1, 1]);
        let expected = [9.5 / 10.5, 8.5 / 9.5, 8.5 / 9.5, 9.5 / 10.5].iter().sum::<f64>() / 4.0;
        assert!((s - expected).abs() < 1e-12);
    }
}
