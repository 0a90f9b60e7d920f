//! Fitting the low-dimensional similarity curve `(1 + a·x^(2b))⁻¹`.

use crate::error::{Error, Result};

const GRID_POINTS: usize = 300;
const MAX_RMS_RESIDUAL: f64 = 0.1;

/// Low-dimensional membership `(1 + a·d^(2b))⁻¹`.
pub fn phi_ab(d: f64, a: f64, b: f64) -> f64 {
    1.0 / (1.0 + a * d.powf(2.0 * b))
}

/// Target curve: 1 up to `min_dist`, exponential decay with scale `spread` after.
pub fn target_curve(x: f64, min_dist: f64, spread: f64) -> f64 {
    if x <= min_dist {
        1.0
    } else {
        (-(x - min_dist) / spread).exp()
    }
}

/// Uniform grid of `GRID_POINTS` samples over `(0, 3·spread]`.
pub fn fit_grid(spread: f64) -> Vec<f64> {
    let top = 3.0 * spread;
    (1..=GRID_POINTS).map(|i| top * i as f64 / GRID_POINTS as f64).collect()
}

fn sum_sq(xs: &[f64], ys: &[f64], a: f64, b: f64) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = phi_ab(x, a, b) - y;
            r * r
        })
        .sum()
}

/// Levenberg–Marquardt least squares for `(a, b)`.
pub fn fit_ab(min_dist: f64, spread: f64) -> Result<(f64, f64)> {
    if !(spread > 0.0 && min_dist >= 0.0 && min_dist < 3.0 * spread) {
        return Err(Error::InvalidParameter(format!(
            "need spread > 0 and 0 <= min_dist < 3*spread (min_dist = {min_dist}, spread = {spread})"
        )));
    }
    let xs = fit_grid(spread);
    let ys: Vec<f64> = xs.iter().map(|&x| target_curve(x, min_dist, spread)).collect();

    let (mut a, mut b) = (1.0_f64, 1.0_f64);
    let mut lambda = 1e-3;
    let mut cost = sum_sq(&xs, &ys, a, b);
    for _ in 0..500 {
        // J^T J and J^T r
        let (mut jaa, mut jab, mut jbb, mut ga, mut gb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&x, &y) in xs.iter().zip(&ys) {
            let x2b = x.powf(2.0 * b);
            let denom = 1.0 + a * x2b;
            let f = 1.0 / denom;
            let r = f - y;
            let da = -x2b / (denom * denom);
            let db = -a * x2b * 2.0 * x.ln() / (denom * denom);
            jaa += da * da;
            jab += da * db;
            jbb += db * db;
            ga += da * r;
            gb += db * r;
        }
        let mut improved = false;
        for _ in 0..50 {
            let (m00, m11) = (jaa * (1.0 + lambda), jbb * (1.0 + lambda));
            let det = m00 * m11 - jab * jab;
            if det == 0.0 || !det.is_finite() {
                lambda *= 10.0;
                continue;
            }
            let step_a = -(m11 * ga - jab * gb) / det;
            let step_b = -(m00 * gb - jab * ga) / det;
            let (na, nb) = (a + step_a, b + step_b);
            if na > 0.0 && nb > 0.0 {
                let new_cost = sum_sq(&xs, &ys, na, nb);
                if new_cost.is_finite() && new_cost <= cost {
                    let rel = (cost - new_cost) / cost.max(f64::MIN_POSITIVE);
                    a = na;
                    b = nb;
                    cost = new_cost;
                    lambda = (lambda * 0.3).max(1e-12);
                    improved = rel > 1e-15;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }

    let rms = (cost / xs.len() as f64).sqrt();
    if !(a.is_finite() && b.is_finite()) || rms > MAX_RMS_RESIDUAL {
        return Err(Error::FitDiverged {
            min_dist,
            spread,
            residual: rms,
        });
    }
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Nested grid search over (ln a, b); independent of the LM path.
    fn grid_oracle(min_dist: f64, spread: f64) -> (f64, f64) {
        let xs = fit_grid(spread);
        let ys: Vec<f64> = xs.iter().map(|&x| target_curve(x, min_dist, spread)).collect();
        let (mut la, mut b) = (0.0_f64, 1.0_f64);
        let (mut wa, mut wb) = (4.0, 1.5);
        for _ in 0..40 {
            let mut best = (f64::INFINITY, la, b);
            for i in -10..=10 {
                for j in -10..=10 {
                    let cla = la + wa * i as f64 / 10.0;
                    let cb = b + wb * j as f64 / 10.0;
                    if cb <= 0.0 {
                        continue;
                    }
                    let c = sum_sq(&xs, &ys, cla.exp(), cb);
                    if c < best.0 {
                        best = (c, cla, cb);
                    }
                }
            }
            la = best.1;
            b = best.2;
            wa *= 0.5;
            wb *= 0.5;
        }
        (la.exp(), b)
    }

    #[test]
    fn default_parameters() {
        let (a, b) = fit_ab(0.1, 1.0).unwrap();
        assert!((a - 1.58).abs() < 0.01, "a = {a}");
        assert!((b - 0.90).abs() < 0.01, "b = {b}");
        let (oa, ob) = grid_oracle(0.1, 1.0);
        assert!((a - oa).abs() < 1e-4 && (b - ob).abs() < 1e-4, "{a},{b} vs {oa},{ob}");
    }

    #[test]
    fn curve_starts_at_one() {
        for &(a, b) in &[(1.58, 0.9), (0.1, 2.0), (10.0, 0.3)] {
            assert!((phi_ab(1e-12, a, b) - 1.0).abs() < 1e-6);
            assert_eq!(phi_ab(0.0, a, b), 1.0);
        }
    }

    #[test]
    fn larger_min_dist_means_smaller_a() {
        let sweep = [0.0, 0.05, 0.1, 0.2, 0.35, 0.5, 0.8, 1.0];
        let fits: Vec<(f64, f64)> = sweep.iter().map(|&m| fit_ab(m, 1.0).unwrap()).collect();
        for (w, &m) in fits.windows(2).zip(&sweep) {
            assert!(w[1].0 < w[0].0, "a not decreasing after min_dist {m}: {fits:?}");
        }
        for (&(a, b), &m) in fits.iter().zip(&sweep) {
            let (oa, ob) = grid_oracle(m, 1.0);
            assert!(
                (a - oa).abs() < 1e-3 * oa.max(1.0) && (b - ob).abs() < 1e-3,
                "min_dist {m}"
            );
        }
    }

    #[test]
    fn invalid_ranges() {
        assert!(fit_ab(3.0, 1.0).is_err());
        assert!(fit_ab(0.1, 0.0).is_err());
        assert!(fit_ab(-0.1, 1.0).is_err());
    }
}
