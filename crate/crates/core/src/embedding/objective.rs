//! Full-batch fuzzy cross-entropy of a layout. O(N²); used as a reference
//! for the stochastic optimizer, not by it.

use ndarray::{Array2, ArrayView2};

use super::fuzzy::FuzzyGraph;

/// Guard inside the repulsive logarithm.
pub const REPULSION_EPS: f64 = 1e-3;

/// Cross-entropy over every unordered pair `i < j`:
///
/// `−μ·ln Φ(d) − (1 − μ)·ln(1 − Φ(d) + ε)`, with `Φ(d) = (1 + a·d^(2b))⁻¹`
/// and `μ = 0` for pairs without an edge.
///
/// Returns the loss and its gradient with respect to every coordinate.
pub fn layout_objective(coords: ArrayView2<'_, f64>, graph: &FuzzyGraph, a: f64, b: f64) -> (f64, Array2<f64>) {
    let n = coords.nrows();
    let dim = coords.ncols();
    let mut grad = Array2::zeros((n, dim));
    let mut loss = 0.0;

    for i in 0..n {
        for j in (i + 1)..n {
            let mu = graph.weight(i, j);
            let mut d2 = 0.0;
            for k in 0..dim {
                let diff = coords[[i, k]] - coords[[j, k]];
                d2 += diff * diff;
            }
            let q = a * d2.powf(b);
            let phi = 1.0 / (1.0 + q);
            // d q / d(d²)
            let dq = if d2 > 0.0 { a * b * d2.powf(b - 1.0) } else { 0.0 };

            let mut dloss_dd2 = 0.0;
            if mu > 0.0 {
                loss += mu * (1.0 + q).ln();
                dloss_dd2 += mu * dq / (1.0 + q);
            }
            if mu < 1.0 {
                let rep = 1.0 - phi + REPULSION_EPS;
                loss -= (1.0 - mu) * rep.ln();
                // d(1 − Φ)/d(d²) = dq / (1 + q)²
                dloss_dd2 -= (1.0 - mu) * dq / ((1.0 + q) * (1.0 + q) * rep);
            }

            for k in 0..dim {
                let g = 2.0 * dloss_dd2 * (coords[[i, k]] - coords[[j, k]]);
                grad[[i, k]] += g;
                grad[[j, k]] -= g;
            }
        }
    }
    (loss, grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn coincident_attracted_pair_costs_nothing() {
        let g = FuzzyGraph::from_edges(2, &[(0, 1, 1.0)]);
        let (loss, grad) = layout_objective(array![[0.3, 0.3], [0.3, 0.3]].view(), &g, 1.58, 0.9);
        assert_eq!(loss, 0.0);
        assert!(grad.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn unit_offset_with_a_b_one() {
        let g = FuzzyGraph::from_edges(2, &[(0, 1, 1.0)]);
        let (loss, _) = layout_objective(array![[0.0, 0.0], [1.0, 0.0]].view(), &g, 1.0, 1.0);
        assert!((loss - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let coords = array![[0.1, 0.4], [1.2, -0.3], [-0.7, 0.9], [0.5, 1.5]];
        let g = FuzzyGraph::from_edges(4, &[(0, 1, 0.8), (1, 2, 0.3), (0, 3, 1.0)]);
        let (a, b) = (1.58, 0.9);
        let (_, grad) = layout_objective(coords.view(), &g, a, b);
        let h = 1e-6;
        for i in 0..4 {
            for k in 0..2 {
                let mut p = coords.clone();
                p[[i, k]] += h;
                let mut m = coords.clone();
                m[[i, k]] -= h;
                let fd = (layout_objective(p.view(), &g, a, b).0 - layout_objective(m.view(), &g, a, b).0) / (2.0 * h);
                assert!((fd - grad[[i, k]]).abs() < 1e-6 * (1.0 + fd.abs()), "{i},{k}");
            }
        }
    }
}
