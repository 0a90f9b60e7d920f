use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cluster::{adjusted_rand_index, kmeans};
use super::procrustes::procrustes_disparity;
use crate::embedding::{embed, EmbedParams};
use crate::error::{Error, Result};
use crate::ingest::ConditionLabel;
use crate::preprocess::{FeatureMatrix, RowLabel};

/// k-means restarts per embedding.
pub const KMEANS_RESTARTS: usize = 20;
/// Base seed for the k-means restarts (restart `r` uses `KMEANS_SEED + r`).
pub const KMEANS_SEED: u64 = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunPair {
    pub seed_a: u64,
    pub seed_b: u64,
    pub ari: f64,
    pub disparity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupingConsistency {
    pub condition: ConditionLabel,
    /// Mean over runs of the fraction of this condition's points that share
    /// its most common k-means cluster.
    pub mean_purity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub seeds: Vec<u64>,
    pub n_clusters: usize,
    pub mean_ari: f64,
    pub mean_disparity: f64,
    pub per_pair: Vec<RunPair>,
    pub grouping_consistency: Vec<GroupingConsistency>,
}

fn modal_fraction(assignments: &[usize]) -> f64 {
    let mut counts = std::collections::HashMap::new();
    for &a in assignments {
        *counts.entry(a).or_insert(0usize) += 1;
    }
    counts.values().copied().max().unwrap_or(0) as f64 / assignments.len().max(1) as f64
}

/// Compares a set of embeddings (one per seed) of the same labelled rows.
pub fn stability_from_embeddings(runs: &[(u64, Array2<f64>)], labels: &[RowLabel]) -> Result<StabilityReport> {
    if runs.len() < 2 {
        return Err(Error::InvalidParameter("stability needs at least 2 seeds".into()));
    }
    let conditions: Vec<ConditionLabel> = ConditionLabel::ALL
        .into_iter()
        .filter(|c| labels.iter().any(|l| l.condition == *c))
        .collect();
    let k = conditions.len().max(1);

    let partitions: Vec<Vec<usize>> = runs
        .par_iter()
        .map(|(_, z)| kmeans(z.view(), k, KMEANS_RESTARTS, KMEANS_SEED).labels)
        .collect();

    let mut per_pair = Vec::new();
    for i in 0..runs.len() {
        for j in (i + 1)..runs.len() {
            per_pair.push(RunPair {
                seed_a: runs[i].0,
                seed_b: runs[j].0,
                ari: adjusted_rand_index(&partitions[i], &partitions[j]),
                disparity: procrustes_disparity(runs[i].1.view(), runs[j].1.view())?,
            });
        }
    }
    let m = per_pair.len() as f64;
    let grouping_consistency = conditions
        .iter()
        .map(|&c| {
            let rows: Vec<usize> = (0..labels.len()).filter(|&r| labels[r].condition == c).collect();
            let purity = partitions
                .iter()
                .map(|p| modal_fraction(&rows.iter().map(|&r| p[r]).collect::<Vec<_>>()))
                .sum::<f64>()
                / partitions.len() as f64;
            GroupingConsistency {
                condition: c,
                mean_purity: purity,
            }
        })
        .collect();

    Ok(StabilityReport {
        seeds: runs.iter().map(|r| r.0).collect(),
        n_clusters: k,
        mean_ari: per_pair.iter().map(|p| p.ari).sum::<f64>() / m,
        mean_disparity: per_pair.iter().map(|p| p.disparity).sum::<f64>() / m,
        per_pair,
        grouping_consistency,
    })
}

/// Embeds `m` once per seed and compares every pair of runs.
pub fn stability_assess(m: &FeatureMatrix, params: &EmbedParams, seeds: &[u64]) -> Result<StabilityReport> {
    if seeds.len() < 2 {
        return Err(Error::InvalidParameter("stability needs at least 2 seeds".into()));
    }
    let runs = seeds
        .par_iter()
        .map(|&s| embed(m.values.view(), params, s).map(|r| (s, r.coords)))
        .collect::<Result<Vec<_>>>()?;
    stability_from_embeddings(&runs, &m.labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::SessionLabel;
    use ndarray::array;

    #[test]
    fn identical_runs_are_perfectly_stable() {
        let z = array![[0.0, 0.0], [0.1, 0.0], [5.0, 5.0], [5.1, 5.0]];
        let labels: Vec<RowLabel> = [
            ConditionLabel::Onl,
            ConditionLabel::Onl,
            ConditionLabel::Osl,
            ConditionLabel::Osl,
        ]
        .iter()
        .enumerate()
        .map(|(i, &condition)| RowLabel {
            obs_id: i as u64,
            session: SessionLabel::M1,
            condition,
        })
        .collect();
        let r = stability_from_embeddings(&[(1, z.clone()), (1, z)], &labels).unwrap();
        assert_eq!(r.mean_ari, 1.0);
        assert_eq!(r.mean_disparity, 0.0);
        assert_eq!(r.n_clusters, 2);
        assert!(r.grouping_consistency.iter().all(|g| g.mean_purity == 1.0));
    }

    #[test]
    fn one_seed_is_not_enough() {
        assert!(stability_from_embeddings(&[(1, array![[0.0]])], &[]).is_err());
    }
}
