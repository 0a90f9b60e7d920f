//! Per-point bandwidth search for the neighbour membership kernel.

use serde::{Deserialize, Serialize};

/// Default absolute tolerance on the membership-sum residual.
pub const SMOOTH_K_TOLERANCE: f64 = 1e-5;

const MAX_ITER: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibratedRow {
    /// Distance to the nearest neighbour.
    pub rho: f64,
    pub sigma: f64,
    /// True when the target sum was unreachable and sigma was clamped.
    pub clamped: bool,
}

/// Lower bound for sigma: 1e-3 × mean neighbour distance, or 1e-8 when
/// every distance is zero.
pub fn sigma_min(dists: &[f64]) -> f64 {
    let mean = dists.iter().sum::<f64>() / dists.len().max(1) as f64;
    if mean > 0.0 {
        1e-3 * mean
    } else {
        1e-8
    }
}

/// `Σ_j exp(−max(0, d_j − rho) / sigma)`.
pub fn membership_sum(dists: &[f64], rho: f64, sigma: f64) -> f64 {
    dists.iter().map(|&d| (-(d - rho).max(0.0) / sigma).exp()).sum()
}

/// Finds sigma so the memberships of the row sum to `log2(k)`.
///
/// `dists` must be ascending and of length `k`. The sum is increasing in
/// sigma, bounded below by the number of distances equal to `rho` and above
/// by `k`; when the target lies outside that range sigma is clamped to
/// [`sigma_min`].
pub fn smooth_knn_calibrate(dists: &[f64], k: usize, tol: f64) -> CalibratedRow {
    debug_assert_eq!(dists.len(), k);
    let rho = dists.first().copied().unwrap_or(0.0);
    let floor = sigma_min(dists);
    let target = (k as f64).log2();
    let at_rho = dists.iter().filter(|&&d| d <= rho).count() as f64;
    let clamp = CalibratedRow {
        rho,
        sigma: floor,
        clamped: true,
    };
    if k == 0 || target <= at_rho || target >= k as f64 {
        return clamp;
    }

    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut guard = 0;
    while membership_sum(dists, rho, hi) < target {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 1100 {
            return clamp;
        }
    }

    let mut sigma = 0.5 * (lo + hi);
    for _ in 0..MAX_ITER {
        sigma = 0.5 * (lo + hi);
        let residual = membership_sum(dists, rho, sigma) - target;
        if residual.abs() < tol {
            break;
        }
        if residual > 0.0 {
            hi = sigma;
        } else {
            lo = sigma;
        }
    }

    if sigma < floor {
        return clamp;
    }
    CalibratedRow {
        rho,
        sigma,
        clamped: false,
    }
}
