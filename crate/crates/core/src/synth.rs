//! Seeded synthetic gait datasets.
//!
//! Features are drawn from Gaussians per (condition, session) cell, then
//! shifted along the score-weight vector and scaled so that the cell's GPPS
//! (computed on the raw features) has exactly the requested mean and SD in
//! distribution. Feature-level structure beyond that is free; the output is
//! synthetic and says nothing about real recordings.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{ConditionLabel, GaitDataset, GaitObservation, Phase, SessionLabel, StateVector, FEATURE_COUNT};
use crate::level1::GPPS_WEIGHTS;

/// Reference per-cell GPPS summaries used as calibration targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub condition: ConditionLabel,
    pub m1_mean: f64,
    pub m1_sd: f64,
    pub m2_mean: f64,
    pub m2_sd: f64,
    /// Reported relative change, percent.
    pub delta_percent: f64,
}

pub const TABLE1: [TableRow; 6] = [
    TableRow {
        condition: ConditionLabel::Onl,
        m1_mean: 8.3,
        m1_sd: 1.5,
        m2_mean: 8.5,
        m2_sd: 1.4,
        delta_percent: 2.41,
    },
    TableRow {
        condition: ConditionLabel::Osl,
        m1_mean: 7.9,
        m1_sd: 1.3,
        m2_mean: 7.9,
        m2_sd: 1.2,
        delta_percent: 0.00,
    },
    TableRow {
        condition: ConditionLabel::Obl,
        m1_mean: 6.2,
        m1_sd: 1.6,
        m2_mean: 6.5,
        m2_sd: 1.5,
        delta_percent: 4.84,
    },
    TableRow {
        condition: ConditionLabel::Oc2_5,
        m1_mean: 9.1,
        m1_sd: 1.2,
        m2_mean: 9.4,
        m2_sd: 1.2,
        delta_percent: 3.30,
    },
    TableRow {
        condition: ConditionLabel::Oc3,
        m1_mean: 8.8,
        m1_sd: 1.3,
        m2_mean: 9.1,
        m2_sd: 1.2,
        delta_percent: 3.41,
    },
    TableRow {
        condition: ConditionLabel::Oc3p,
        m1_mean: 7.5,
        m1_sd: 1.4,
        m2_mean: 7.8,
        m2_sd: 1.3,
        delta_percent: 4.00,
    },
];

/// Baseline feature means: speed 1.2 m/s, cadence 110 steps/min, step time
/// 0.55 s, small asymmetries, step length 0.65 m, CoP index 0. CAPA is set
/// so the baseline GPPS is about 8.
pub const BASE_MEAN: [f64; FEATURE_COUNT] = [1.2, 110.0, 0.55, 0.05, 0.04, 0.05, 0.65, 0.0, -8.5];
pub const BASE_SD: [f64; FEATURE_COUNT] = [0.10, 5.0, 0.03, 0.02, 0.02, 0.02, 0.05, 1.0, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureCovariance {
    /// Per-feature standard deviations.
    Diagonal([f64; FEATURE_COUNT]),
    /// Full covariance, row-major, must be symmetric positive semi-definite.
    Full(Vec<[f64; FEATURE_COUNT]>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub condition: ConditionLabel,
    pub session: SessionLabel,
    pub n: usize,
    pub feature_mean: [f64; FEATURE_COUNT],
    pub covariance: FeatureCovariance,
    /// Target GPPS mean; `None` keeps the mean implied by `feature_mean`.
    pub target_gpps_mean: Option<f64>,
    /// Target GPPS SD; `None` keeps the SD implied by the covariance.
    pub target_gpps_sd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub cells: Vec<CellSpec>,
    pub seed: u64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Square-root factor `L` with `L·Lᵀ = Σ`, plus `wᵀΣw`.
fn factor(cov: &FeatureCovariance) -> Result<(DMatrix<f64>, f64)> {
    let w = GPPS_WEIGHTS;
    match cov {
        FeatureCovariance::Diagonal(sd) => {
            if let Some(bad) = sd.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
                return Err(Error::InvalidSpec(format!(
                    "standard deviations must be >= 0, got {bad}"
                )));
            }
            let l = DMatrix::from_fn(FEATURE_COUNT, FEATURE_COUNT, |i, j| if i == j { sd[i] } else { 0.0 });
            let var = w.iter().zip(sd).map(|(w, s)| w * w * s * s).sum();
            Ok((l, var))
        }
        FeatureCovariance::Full(rows) => {
            if rows.len() != FEATURE_COUNT {
                return Err(Error::InvalidSpec(format!("covariance needs {FEATURE_COUNT} rows")));
            }
            let m = DMatrix::from_fn(FEATURE_COUNT, FEATURE_COUNT, |i, j| rows[i][j]);
            if !m.iter().all(|x| x.is_finite()) || (&m - m.transpose()).amax() > 1e-12 * m.amax().max(1.0) {
                return Err(Error::InvalidSpec("covariance must be finite and symmetric".into()));
            }
            let eig = SymmetricEigen::new(m.clone());
            let scale = eig.eigenvalues.amax().max(1.0);
            if eig.eigenvalues.iter().any(|&l| l < -1e-10 * scale) {
                return Err(Error::InvalidSpec("covariance is not positive semi-definite".into()));
            }
            let root = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
            let l = &eig.eigenvectors * root;
            let wv = nalgebra::DVector::from_row_slice(&w);
            let var = (wv.transpose() * &m * &wv)[(0, 0)];
            Ok((l, var))
        }
    }
}

impl CellSpec {
    fn validate(&self) -> Result<()> {
        if !self.feature_mean.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidSpec("feature means must be finite".into()));
        }
        if let Some(sd) = self.target_gpps_sd {
            if !(sd.is_finite() && sd >= 0.0) {
                return Err(Error::InvalidSpec(format!("target GPPS SD must be >= 0, got {sd}")));
            }
        }
        if let Some(m) = self.target_gpps_mean {
            if !m.is_finite() {
                return Err(Error::InvalidSpec("target GPPS mean must be finite".into()));
            }
        }
        Ok(())
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        for c in &self.cells {
            c.validate()?;
            factor(&c.covariance)?;
        }
        Ok(())
    }
}

/// Draws every cell of `spec` in order. Ids run from 1 in generation order.
pub fn generate_calibrated(spec: &GeneratorSpec) -> Result<GaitDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let w = GPPS_WEIGHTS;
    let w_norm2 = dot(&w, &w);
    let mut observations = Vec::new();
    let mut next_id = 1u64;

    for cell in &spec.cells {
        let (l, var) = factor(&cell.covariance)?;
        let implied_sd = var.sqrt();
        let scale = match cell.target_gpps_sd {
            None => 1.0,
            Some(0.0) => 0.0,
            Some(t) if implied_sd > 0.0 => t / implied_sd,
            Some(t) => {
                return Err(Error::InvalidSpec(format!(
                    "{}/{}: target GPPS SD {t} needs a covariance with nonzero score variance",
                    cell.condition, cell.session
                )))
            }
        };
        let implied_mean = dot(&w, &cell.feature_mean);
        let shift = cell.target_gpps_mean.map_or(0.0, |t| (t - implied_mean) / w_norm2);
        let center: Vec<f64> = cell.feature_mean.iter().zip(&w).map(|(m, wj)| m + shift * wj).collect();

        for _ in 0..cell.n {
            let z: Vec<f64> = (0..FEATURE_COUNT).map(|_| StandardNormal.sample(&mut rng)).collect();
            let mut x = [0.0; FEATURE_COUNT];
            for (i, xi) in x.iter_mut().enumerate() {
                let noise: f64 = (0..FEATURE_COUNT).map(|j| l[(i, j)] * z[j]).sum();
                *xi = center[i] + scale * noise;
            }
            observations.push(GaitObservation {
                obs_id: next_id,
                session: cell.session,
                condition: cell.condition,
                phase: Phase::Linear,
                state: StateVector(x),
            });
            next_id += 1;
        }
    }
    Ok(GaitDataset {
        observations,
        provenance: format!("synthetic (seed {})", spec.seed),
    })
}

/// Twelve cells (6 conditions × 2 sessions) calibrated to [`TABLE1`].
pub fn table1_spec(n_per_cell: usize, seed: u64) -> GeneratorSpec {
    let mut cells = Vec::new();
    for row in TABLE1 {
        for (session, mean, sd) in [
            (SessionLabel::M1, row.m1_mean, row.m1_sd),
            (SessionLabel::M2, row.m2_mean, row.m2_sd),
        ] {
            cells.push(CellSpec {
                condition: row.condition,
                session,
                n: n_per_cell,
                feature_mean: BASE_MEAN,
                covariance: FeatureCovariance::Diagonal(BASE_SD),
                target_gpps_mean: Some(mean),
                target_gpps_sd: Some(sd),
            });
        }
    }
    GeneratorSpec { cells, seed }
}

/// Offset between the two scenario conditions. Components pair up features
/// whose weights cancel (step time with step length, the two timing
/// asymmetries, speed with CoP), so the offset is orthogonal to the score
/// weights and each pair moves by the same multiple of a shared noise SD.
pub const DISSOCIATION_OFFSET: [f64; FEATURE_COUNT] = [0.4, 0.0, 0.24, 0.08, -0.08, 0.0, 0.24, -0.4, 0.0];

const SCENARIO_MEAN: [f64; FEATURE_COUNT] = [1.2, 110.0, 0.55, 0.12, 0.12, 0.05, 0.65, 0.0, -8.5];
const SCENARIO_SD: [f64; FEATURE_COUNT] = [0.05, 4.0, 0.03, 0.01, 0.01, 0.02, 0.03, 0.05, 0.6];
/// GPPS drop of the control condition.
const CONTROL_CAPA_DROP: f64 = 2.0;
pub const SCENARIO_N: usize = 300;

/// Conditions used by [`dissociation_scenario`]: the matched pair, then the
/// low-score control.
pub const SCENARIO_PAIR: (ConditionLabel, ConditionLabel) = (ConditionLabel::Oc2_5, ConditionLabel::Oc3);
pub const SCENARIO_CONTROL: ConditionLabel = ConditionLabel::Obl;

fn scenario_cell(condition: ConditionLabel, mean: [f64; FEATURE_COUNT], n: usize) -> CellSpec {
    CellSpec {
        condition,
        session: SessionLabel::M1,
        n,
        feature_mean: mean,
        covariance: FeatureCovariance::Diagonal(SCENARIO_SD),
        target_gpps_mean: None,
        target_gpps_sd: None,
    }
}

/// Two conditions with equal expected GPPS but disjoint feature supports
/// along a score-neutral direction, plus a lower-scoring control. Session
/// M1 only, [`SCENARIO_N`] rows per condition.
pub fn dissociation_scenario(seed: u64) -> GaitDataset {
    let half = |sign: f64| {
        let mut m = SCENARIO_MEAN;
        for (x, d) in m.iter_mut().zip(DISSOCIATION_OFFSET) {
            *x += sign * 0.5 * d;
        }
        m
    };
    let mut control = SCENARIO_MEAN;
    control[8] -= CONTROL_CAPA_DROP;
    let spec = GeneratorSpec {
        cells: vec![
            scenario_cell(SCENARIO_PAIR.0, half(1.0), SCENARIO_N),
            scenario_cell(SCENARIO_PAIR.1, half(-1.0), SCENARIO_N),
            scenario_cell(SCENARIO_CONTROL, control, SCENARIO_N),
        ],
        seed,
    };
    let mut ds = generate_calibrated(&spec).expect("scenario spec is valid");
    ds.provenance = format!("synthetic dissociation scenario (seed {seed})");
    ds
}

/// Negative control: two conditions drawn from one distribution.
pub fn iid_pair_scenario(seed: u64, n_per_condition: usize) -> GaitDataset {
    let spec = GeneratorSpec {
        cells: vec![
            scenario_cell(ConditionLabel::Onl, SCENARIO_MEAN, n_per_condition),
            scenario_cell(ConditionLabel::Osl, SCENARIO_MEAN, n_per_condition),
        ],
        seed,
    };
    let mut ds = generate_calibrated(&spec).expect("scenario spec is valid");
    ds.provenance = format!("synthetic i.i.d. pair (seed {seed})");
    ds
}

/// Isotropic unit-variance Gaussian clusters whose centers sit on a regular
/// simplex with the given pairwise `separation`. Returns points and labels.
pub fn gaussian_clusters(
    n_clusters: usize,
    n_per_cluster: usize,
    dim: usize,
    separation: f64,
    seed: u64,
) -> (Array2<f64>, Vec<usize>) {
    assert!(n_clusters >= 1 && dim >= n_clusters, "dim must be >= n_clusters");
    // e_c / sqrt(2) are pairwise sqrt(2)/sqrt(2) = 1 apart
    let scale = separation / std::f64::consts::SQRT_2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_clusters * n_per_cluster;
    let mut data = Array2::zeros((n, dim));
    let mut labels = Vec::with_capacity(n);
    for c in 0..n_clusters {
        for r in 0..n_per_cluster {
            let row = c * n_per_cluster + r;
            for t in 0..dim {
                let z: f64 = StandardNormal.sample(&mut rng);
                data[[row, t]] = z + if t == c { scale } else { 0.0 };
            }
            labels.push(c);
        }
    }
    (data, labels)
}
