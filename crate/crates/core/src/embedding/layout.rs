//! Stochastic layout optimization with negative sampling.
//!
//! Each positive edge is sampled in proportion to its membership; every
//! positive sample is followed by `negative_samples` repulsive samples
//! against uniformly drawn vertices. The learning rate decays linearly to 0.

use std::sync::atomic::{AtomicU64, Ordering};

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::fuzzy::FuzzyGraph;

const GRAD_CLIP: f64 = 4.0;
/// Added to squared distances in the repulsive coefficient.
const REPULSION_EPS: f64 = 1e-3;

#[derive(Debug, Clone, Copy)]
pub struct LayoutOptions {
    pub epochs: usize,
    pub negative_samples: usize,
    pub learning_rate: f64,
    pub a: f64,
    pub b: f64,
    pub parallel: bool,
}

struct Schedule {
    head: Vec<usize>,
    tail: Vec<usize>,
    epochs_per_sample: Vec<f64>,
}

impl Schedule {
    /// Directed edge list with sampling periods. Edges too weak to be
    /// sampled once during training are dropped.
    fn new(graph: &FuzzyGraph, epochs: usize) -> Self {
        let max_w = graph.edges.iter().map(|e| e.2).fold(0.0, f64::max);
        let cutoff = max_w / epochs.max(1) as f64;
        let mut s = Schedule {
            head: Vec::new(),
            tail: Vec::new(),
            epochs_per_sample: Vec::new(),
        };
        for (i, j, w) in graph.directed_edges() {
            if w < cutoff || w <= 0.0 {
                continue;
            }
            s.head.push(i);
            s.tail.push(j);
            s.epochs_per_sample.push(max_w / w);
        }
        s
    }
}

#[inline]
fn clip(x: f64) -> f64 {
    x.clamp(-GRAD_CLIP, GRAD_CLIP)
}

#[inline]
fn attractive_coeff(d2: f64, a: f64, b: f64) -> f64 {
    if d2 > 0.0 {
        -2.0 * a * b * d2.powf(b - 1.0) / (a * d2.powf(b) + 1.0)
    } else {
        0.0
    }
}

#[inline]
fn repulsive_coeff(d2: f64, a: f64, b: f64) -> f64 {
    if d2 > 0.0 {
        2.0 * b / ((REPULSION_EPS + d2) * (a * d2.powf(b) + 1.0))
    } else {
        0.0
    }
}

/// Runs the optimizer in place on `coords` (one row per vertex).
pub fn optimize_layout(coords: &mut Array2<f64>, graph: &FuzzyGraph, opts: &LayoutOptions, seed: u64) {
    if opts.parallel {
        optimize_parallel(coords, graph, opts, seed);
    } else {
        optimize_sequential(coords, graph, opts, seed);
    }
}

fn optimize_sequential(coords: &mut Array2<f64>, graph: &FuzzyGraph, opts: &LayoutOptions, seed: u64) {
    let sched = Schedule::new(graph, opts.epochs);
    let n = coords.nrows();
    let dim = coords.ncols();
    let neg_rate = opts.negative_samples as f64;
    let mut next_sample = sched.epochs_per_sample.clone();
    let epochs_per_neg: Vec<f64> = sched
        .epochs_per_sample
        .iter()
        .map(|e| if neg_rate > 0.0 { e / neg_rate } else { f64::INFINITY })
        .collect();
    let mut next_neg = epochs_per_neg.clone();
    let mut order: Vec<usize> = (0..sched.head.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = (opts.a, opts.b);
    let mut diff = vec![0.0; dim];

    for epoch in 0..opts.epochs {
        let alpha = opts.learning_rate * (1.0 - epoch as f64 / opts.epochs as f64);
        let now = epoch as f64 + 1.0;
        order.shuffle(&mut rng);
        for &e in &order {
            if next_sample[e] > now {
                continue;
            }
            let (j, k) = (sched.head[e], sched.tail[e]);
            let mut d2 = 0.0;
            for (t, dv) in diff.iter_mut().enumerate() {
                *dv = coords[[j, t]] - coords[[k, t]];
                d2 += *dv * *dv;
            }
            let coeff = attractive_coeff(d2, a, b);
            for (t, dv) in diff.iter().enumerate() {
                let g = clip(coeff * dv) * alpha;
                coords[[j, t]] += g;
                coords[[k, t]] -= g;
            }
            next_sample[e] += sched.epochs_per_sample[e];

            let n_neg = if neg_rate > 0.0 {
                ((now - next_neg[e]) / epochs_per_neg[e]).max(0.0) as usize
            } else {
                0
            };
            for _ in 0..n_neg {
                let other = rng.random_range(0..n);
                if other == j {
                    continue;
                }
                let mut d2 = 0.0;
                for (t, dv) in diff.iter_mut().enumerate() {
                    *dv = coords[[j, t]] - coords[[other, t]];
                    d2 += *dv * *dv;
                }
                let coeff = repulsive_coeff(d2, a, b);
                for (t, dv) in diff.iter().enumerate() {
                    let g = if coeff > 0.0 { clip(coeff * dv) } else { 0.0 };
                    coords[[j, t]] += g * alpha;
                }
            }
            next_neg[e] += n_neg as f64 * epochs_per_neg[e];
        }
    }
}

/// Lock-free variant: edges are split across threads and positions are
/// read and written without synchronization, so results depend on thread
/// scheduling.
fn optimize_parallel(coords: &mut Array2<f64>, graph: &FuzzyGraph, opts: &LayoutOptions, seed: u64) {
    let sched = Schedule::new(graph, opts.epochs);
    let n = coords.nrows();
    let dim = coords.ncols();
    let shared: Vec<AtomicU64> = coords.iter().map(|x| AtomicU64::new(x.to_bits())).collect();
    let load = |i: usize, t: usize| f64::from_bits(shared[i * dim + t].load(Ordering::Relaxed));
    let store = |i: usize, t: usize, v: f64| shared[i * dim + t].store(v.to_bits(), Ordering::Relaxed);
    let neg_rate = opts.negative_samples as f64;
    let (a, b) = (opts.a, opts.b);
    let n_edges = sched.head.len();
    let chunk = n_edges.div_ceil(rayon::current_num_threads().max(1) * 4).max(1);

    let mut next_sample = sched.epochs_per_sample.clone();
    let epochs_per_neg: Vec<f64> = sched
        .epochs_per_sample
        .iter()
        .map(|e| if neg_rate > 0.0 { e / neg_rate } else { f64::INFINITY })
        .collect();
    let mut next_neg = epochs_per_neg.clone();

    for epoch in 0..opts.epochs {
        let alpha = opts.learning_rate * (1.0 - epoch as f64 / opts.epochs as f64);
        let now = epoch as f64 + 1.0;
        next_sample
            .par_chunks_mut(chunk)
            .zip(next_neg.par_chunks_mut(chunk))
            .enumerate()
            .for_each(|(c, (ns, nn))| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((epoch as u64) << 32) ^ c as u64);
                let mut diff = vec![0.0; dim];
                for (off, (ns, nn)) in ns.iter_mut().zip(nn.iter_mut()).enumerate() {
                    let e = c * chunk + off;
                    if *ns > now {
                        continue;
                    }
                    let (j, k) = (sched.head[e], sched.tail[e]);
                    let mut d2 = 0.0;
                    for (t, dv) in diff.iter_mut().enumerate() {
                        *dv = load(j, t) - load(k, t);
                        d2 += *dv * *dv;
                    }
                    let coeff = attractive_coeff(d2, a, b);
                    for (t, dv) in diff.iter().enumerate() {
                        let g = clip(coeff * dv) * alpha;
                        store(j, t, load(j, t) + g);
                        store(k, t, load(k, t) - g);
                    }
                    *ns += sched.epochs_per_sample[e];

                    let n_neg = if neg_rate > 0.0 {
                        ((now - *nn) / epochs_per_neg[e]).max(0.0) as usize
                    } else {
                        0
                    };
                    for _ in 0..n_neg {
                        let other = rng.random_range(0..n);
                        if other == j {
                            continue;
                        }
                        let mut d2 = 0.0;
                        for (t, dv) in diff.iter_mut().enumerate() {
                            *dv = load(j, t) - load(other, t);
                            d2 += *dv * *dv;
                        }
                        let coeff = repulsive_coeff(d2, a, b);
                        for (t, dv) in diff.iter().enumerate() {
                            let g = if coeff > 0.0 { clip(coeff * dv) } else { 0.0 };
                            store(j, t, load(j, t) + g * alpha);
                        }
                    }
                    *nn += n_neg as f64 * epochs_per_neg[e];
                }
            });
    }

    for (dst, src) in coords.iter_mut().zip(&shared) {
        *dst = f64::from_bits(src.load(Ordering::Relaxed));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn opts(parallel: bool) -> LayoutOptions {
        LayoutOptions {
            epochs: 200,
            negative_samples: 5,
            learning_rate: 1.0,
            a: 1.58,
            b: 0.9,
            parallel,
        }
    }

    fn two_cliques() -> FuzzyGraph {
        let mut edges = Vec::new();
        for base in [0, 5] {
            for i in 0..5 {
                for j in (i + 1)..5 {
                    edges.push((base + i, base + j, 1.0));
                }
            }
        }
        FuzzyGraph::from_edges(10, &edges)
    }

    fn spread_init() -> Array2<f64> {
        Array2::from_shape_fn((10, 2), |(i, t)| ((i * 7 + t * 3) % 10) as f64)
    }

    fn mean_dist(c: &Array2<f64>, idx: &[(usize, usize)]) -> f64 {
        idx.iter()
            .map(|&(i, j)| ((c[[i, 0]] - c[[j, 0]]).powi(2) + (c[[i, 1]] - c[[j, 1]]).powi(2)).sqrt())
            .sum::<f64>()
            / idx.len() as f64
    }

    #[test]
    fn cliques_pull_together_and_apart() {
        for parallel in [false, true] {
            let mut c = spread_init();
            optimize_layout(&mut c, &two_cliques(), &opts(parallel), 3);
            assert!(c.iter().all(|x| x.is_finite()));
            let within: Vec<_> = (0..5).flat_map(|i| ((i + 1)..5).map(move |j| (i, j))).collect();
            let across: Vec<_> = (0..5).flat_map(|i| (5..10).map(move |j| (i, j))).collect();
            assert!(mean_dist(&c, &within) < mean_dist(&c, &across));
        }
    }

    #[test]
    fn sequential_is_reproducible() {
        let mut x = spread_init();
        let mut y = spread_init();
        optimize_layout(&mut x, &two_cliques(), &opts(false), 11);
        optimize_layout(&mut y, &two_cliques(), &opts(false), 11);
        assert_eq!(x, y);
    }

    #[test]
    fn no_edges_leaves_layout_untouched() {
        let mut c = array![[0.0, 1.0], [2.0, 3.0]];
        let before = c.clone();
        optimize_layout(&mut c, &FuzzyGraph::from_edges(2, &[]), &opts(false), 0);
        assert_eq!(c, before);
    }
}
