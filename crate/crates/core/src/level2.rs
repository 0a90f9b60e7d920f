//! Level 2: descriptive statistics of state-space trajectories.
//!
//! A trajectory is the sequence of state vectors for one condition and
//! session, taken in acquisition (row) order. Nothing here estimates a
//! vector field; the statistics only describe how spread out and how long
//! the visited path is.

use std::cmp::Ordering;

use ndarray::{Array1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{ConditionLabel, SessionLabel};
use crate::preprocess::FeatureMatrix;
use crate::stats::euclidean;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionStats {
    /// Mean Euclidean distance over all unordered point pairs.
    pub mean_pairwise_dist: f64,
    /// Root mean square distance to the centroid.
    pub rms_centroid_dist: f64,
    /// Sum of distances between consecutive points.
    pub path_length: f64,
    pub n_points: usize,
}

/// Which statistic [`rank_compactness`] sorts by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompactnessKey {
    MeanPairwise,
    RmsCentroid,
}

/// Dispersion of an ordered point sequence (one point per row).
pub fn trajectory_dispersion(points: ArrayView2<'_, f64>) -> Result<DispersionStats> {
    let n = points.nrows();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    let rows: Vec<Vec<f64>> = points.rows().into_iter().map(|r| r.to_vec()).collect();

    let mut pair_sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            pair_sum += euclidean(&rows[i], &rows[j]);
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;

    let centroid: Array1<f64> = points.mean_axis(Axis(0)).expect("n >= 2");
    let centroid = centroid.to_vec();
    let ms: f64 = rows
        .iter()
        .map(|r| {
            let d = euclidean(r, &centroid);
            d * d
        })
        .sum::<f64>()
        / n as f64;

    let path_length = rows.windows(2).map(|w| euclidean(&w[0], &w[1])).sum();

    Ok(DispersionStats {
        mean_pairwise_dist: pair_sum / pairs,
        rms_centroid_dist: ms.sqrt(),
        path_length,
        n_points: n,
    })
}

/// Orders conditions from most to least compact; ties go to the
/// lexicographically smaller label.
pub fn rank_compactness(stats: &[(ConditionLabel, DispersionStats)], key: CompactnessKey) -> Vec<ConditionLabel> {
    let value = |s: &DispersionStats| match key {
        CompactnessKey::MeanPairwise => s.mean_pairwise_dist,
        CompactnessKey::RmsCentroid => s.rms_centroid_dist,
    };
    let mut sorted: Vec<_> = stats.to_vec();
    sorted.sort_by(|(la, sa), (lb, sb)| {
        value(sa)
            .partial_cmp(&value(sb))
            .unwrap_or(Ordering::Equal)
            .then_with(|| la.as_str().cmp(lb.as_str()))
    });
    sorted.into_iter().map(|(l, _)| l).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsRow {
    pub condition: ConditionLabel,
    pub session: SessionLabel,
    pub stats: DispersionStats,
}

/// Dispersion for every (condition, session) cell with at least two rows.
///
/// Returns the table and the cells that were too small to describe.
pub fn dynamics_table(m: &FeatureMatrix) -> (Vec<DynamicsRow>, Vec<(ConditionLabel, SessionLabel)>) {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for condition in ConditionLabel::ALL {
        for session in SessionLabel::ALL {
            let cell = m.select(|l| l.condition == condition && l.session == session);
            match cell.nrows() {
                0 => {}
                1 => skipped.push((condition, session)),
                _ => rows.push(DynamicsRow {
                    condition,
                    session,
                    stats: trajectory_dispersion(cell.values.view()).expect("checked size"),
                }),
            }
        }
    }
    (rows, skipped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn stats(v: f64) -> DispersionStats {
        DispersionStats {
            mean_pairwise_dist: v,
            rms_centroid_dist: v,
            path_length: v,
            n_points: 2,
        }
    }

    #[test]
    fn identical_points_have_zero_dispersion() {
        let s = trajectory_dispersion(array![[1.0, 2.0], [1.0, 2.0]].view()).unwrap();
        assert_eq!(
            (s.mean_pairwise_dist, s.rms_centroid_dist, s.path_length),
            (0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn unit_segment() {
        let s = trajectory_dispersion(array![[0.0, 0.0], [1.0, 0.0]].view()).unwrap();
        assert_eq!(s.mean_pairwise_dist, 1.0);
        assert_eq!(s.rms_centroid_dist, 0.5);
        assert_eq!(s.path_length, 1.0);
    }

    #[test]
    fn single_point_is_rejected() {
        assert!(matches!(
            trajectory_dispersion(array![[0.0, 0.0]].view()),
            Err(Error::TooFewPoints(1))
        ));
    }

    #[test]
    fn ranking_sorts_ascending_with_label_tiebreak() {
        use ConditionLabel::*;
        let ranked = rank_compactness(
            &[(Onl, stats(0.5)), (Osl, stats(0.2)), (Obl, stats(0.1))],
            CompactnessKey::MeanPairwise,
        );
        assert_eq!(ranked, [Obl, Osl, Onl]);

        let ranked = rank_compactness(
            &[
                (Osl, stats(1.0)),
                (Oc3p, stats(1.0)),
                (Onl, stats(1.0)),
                (Oc2_5, stats(1.0)),
            ],
            CompactnessKey::RmsCentroid,
        );
        assert_eq!(ranked, [Oc2_5, Oc3p, Onl, Osl]);

        assert_eq!(
            rank_compactness(&[(Oc3, stats(3.0))], CompactnessKey::MeanPairwise),
            [Oc3]
        );
    }
}
