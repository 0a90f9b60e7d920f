//! Level 3: nonlinear embedding of the state vectors into a low-dimensional
//! latent space.
//!
//! Pipeline: exact kNN graph → per-point bandwidth calibration → fuzzy union
//! of directed memberships → fit of the `(a, b)` similarity curve →
//! spectral (or random) initialization → stochastic layout optimization.
//!
//! Latent coordinates are arbitrary units. Only relative geometry
//! (distances, groupings) is meaningful, and only up to rigid motions.

pub mod calibrate;
pub mod curve;
pub mod fuzzy;
pub mod knn;
pub mod layout;
pub mod objective;
pub mod spectral;

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use calibrate::{smooth_knn_calibrate, CalibratedRow, SMOOTH_K_TOLERANCE};
pub use curve::{fit_ab, phi_ab};
pub use fuzzy::{fuzzy_graph, FuzzyGraph};
pub use knn::{knn_graph, Metric, NeighborGraph};
pub use objective::layout_objective;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    #[default]
    Spectral,
    Random,
}

impl std::str::FromStr for InitMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "spectral" => Ok(InitMode::Spectral),
            "random" => Ok(InitMode::Random),
            other => Err(format!("unknown init mode `{other}` (expected spectral|random)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerMode {
    /// Seeded edge order; bit-reproducible.
    #[default]
    Sequential,
    /// Concurrent unsynchronized updates; not reproducible.
    Parallel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedParams {
    pub n_neighbors: usize,
    pub min_dist: f64,
    pub spread: f64,
    pub n_components: usize,
    pub metric: Metric,
    pub epochs: usize,
    pub negative_samples: usize,
    pub learning_rate: f64,
    pub init: InitMode,
    pub optimizer: OptimizerMode,
}

impl Default for EmbedParams {
    fn default() -> Self {
        EmbedParams {
            n_neighbors: 15,
            min_dist: 0.1,
            spread: 1.0,
            n_components: 2,
            metric: Metric::Euclidean,
            epochs: 500,
            negative_samples: 5,
            learning_rate: 1.0,
            init: InitMode::Spectral,
            optimizer: OptimizerMode::Sequential,
        }
    }
}

/// Latent coordinates plus everything needed to reproduce them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingResult {
    /// `N × n_components`.
    #[serde(skip)]
    pub coords: Array2<f64>,
    pub params: EmbedParams,
    pub a: f64,
    pub b: f64,
    pub seed: u64,
    /// Initialization actually used (spectral may fall back to random).
    pub init_used: InitMode,
}

/// Seeded uniform coordinates in `[−10, 10]^dim`.
pub fn random_init<R: Rng>(n: usize, dim: usize, rng: &mut R) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, dim), || rng.random_range(-10.0..=10.0))
}

/// Rescales each column of a spectral layout into `[0, 10]`.
fn rescale_columns(mut init: Array2<f64>) -> Array2<f64> {
    for mut col in init.columns_mut() {
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let range = hi - lo;
        col.mapv_inplace(|x| if range > 0.0 { 10.0 * (x - lo) / range } else { 0.0 });
    }
    init
}

/// Builds the symmetric membership graph of `data`.
pub fn build_graph(data: ArrayView2<'_, f64>, params: &EmbedParams) -> Result<FuzzyGraph> {
    let g = knn_graph(data, params.n_neighbors, params.metric)?;
    let cal: Vec<CalibratedRow> = g
        .distances
        .iter()
        .map(|d| smooth_knn_calibrate(d, g.k, SMOOTH_K_TOLERANCE))
        .collect();
    Ok(fuzzy_graph(&g, &cal))
}

/// Embeds the rows of `data`.
///
/// In sequential mode the result is a pure function of `(data, params, seed)`.
pub fn embed(data: ArrayView2<'_, f64>, params: &EmbedParams, seed: u64) -> Result<EmbeddingResult> {
    let n = data.nrows();
    if n < params.n_neighbors + 1 {
        return Err(Error::KTooLarge {
            k: params.n_neighbors,
            n,
            constraint: "N >= n_neighbors + 1",
        });
    }
    if params.n_components == 0 {
        return Err(Error::InvalidParameter("n_components must be >= 1".into()));
    }
    if !data.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let graph = build_graph(data, params)?;
    let (a, b) = fit_ab(params.min_dist, params.spread)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut coords, init_used) = match params.init {
        InitMode::Spectral => match spectral::spectral_layout(&graph, params.n_components, &mut rng) {
            Some(init) => (rescale_columns(init), InitMode::Spectral),
            None => (random_init(n, params.n_components, &mut rng), InitMode::Random),
        },
        InitMode::Random => (random_init(n, params.n_components, &mut rng), InitMode::Random),
    };

    let opts = layout::LayoutOptions {
        epochs: params.epochs,
        negative_samples: params.negative_samples,
        learning_rate: params.learning_rate,
        a,
        b,
        parallel: params.optimizer == OptimizerMode::Parallel,
    };
    let layout_seed: u64 = rng.random();
    layout::optimize_layout(&mut coords, &graph, &opts, layout_seed);

    if !coords.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(EmbeddingResult {
        coords,
        params: params.clone(),
        a,
        b,
        seed,
        init_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn small_blobs() -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        Array2::from_shape_fn((60, 3), |(i, _)| {
            let center = if i < 30 { 0.0 } else { 20.0 };
            center + rng.random_range(-1.0..1.0)
        })
    }

    #[test]
    fn rejects_too_few_points() {
        let data = Array2::zeros((10, 3));
        assert!(matches!(
            embed(data.view(), &EmbedParams::default(), 0),
            Err(Error::KTooLarge { .. })
        ));
    }

    #[test]
    fn reproducible_and_records_parameters() {
        let params = EmbedParams {
            epochs: 100,
            ..Default::default()
        };
        let x = embed(small_blobs().view(), &params, 4).unwrap();
        let y = embed(small_blobs().view(), &params, 4).unwrap();
        assert_eq!(x.coords, y.coords);
        assert_eq!(x.coords.dim(), (60, 2));
        assert_eq!(x.params, params);
        assert_eq!(x.seed, 4);
        assert!((x.a - 1.577).abs() < 0.01);
    }

    #[test]
    fn random_init_stays_in_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let z = random_init(100, 3, &mut rng);
        assert!(z.iter().all(|v| (-10.0..=10.0).contains(v)));
    }

    #[test]
    fn parallel_mode_runs() {
        let params = EmbedParams {
            epochs: 100,
            optimizer: OptimizerMode::Parallel,
            ..Default::default()
        };
        let r = embed(small_blobs().view(), &params, 1).unwrap();
        assert!(r.coords.iter().all(|v| v.is_finite()));
    }
}
