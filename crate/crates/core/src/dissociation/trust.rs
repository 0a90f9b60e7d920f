use ndarray::ArrayView2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::stats::squared_euclidean;

/// Other points ordered by distance from `i`, ties by index.
fn neighbor_order(points: &[Vec<f64>], i: usize) -> Vec<usize> {
    let mut order: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(j, p)| (squared_euclidean(&points[i], p), j))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    order.into_iter().map(|(_, j)| j).collect()
}

/// Trustworthiness of an embedding with respect to the original data:
///
/// `1 − 2/(N·k·(2N − 3k − 1)) · Σ_i Σ_{j ∈ U_k(i)} (r(i, j) − k)`
///
/// where `U_k(i)` holds the embedded k-neighbours of `i` that are not among
/// its original k-neighbours and `r(i, j)` is the 1-based rank of `j` by
/// original-space distance from `i`.
pub fn trustworthiness(original: ArrayView2<'_, f64>, embedded: ArrayView2<'_, f64>, k: usize) -> Result<f64> {
    let n = original.nrows();
    if embedded.nrows() != n {
        return Err(Error::ShapeMismatch(format!(
            "original has {n} rows, embedding has {}",
            embedded.nrows()
        )));
    }
    if k == 0 || 2 * k >= n {
        return Err(Error::KTooLarge {
            k,
            n,
            constraint: "1 <= k < N/2",
        });
    }
    let high: Vec<Vec<f64>> = original.rows().into_iter().map(|r| r.to_vec()).collect();
    let low: Vec<Vec<f64>> = embedded.rows().into_iter().map(|r| r.to_vec()).collect();

    let penalty: usize = (0..n)
        .into_par_iter()
        .map(|i| {
            let high_order = neighbor_order(&high, i);
            let mut rank = vec![0usize; n];
            for (r, &j) in high_order.iter().enumerate() {
                rank[j] = r + 1;
            }
            neighbor_order(&low, i)
                .into_iter()
                .take(k)
                .filter(|&j| rank[j] > k)
                .map(|j| rank[j] - k)
                .sum::<usize>()
        })
        .sum();

    let (nf, kf) = (n as f64, k as f64);
    Ok(1.0 - 2.0 / (nf * kf * (2.0 * nf - 3.0 * kf - 1.0)) * penalty as f64)
}
