//! Shared inputs for the benchmarks.

use gaitlevels_core::synth::{gaussian_clusters, generate_calibrated, table1_spec};
use gaitlevels_core::GaitDataset;
use ndarray::Array2;

/// Three well-separated 9-D clusters with `n_per` points each.
pub fn cluster_data(n_per: usize) -> Array2<f64> {
    gaussian_clusters(3, n_per, 9, 10.0, 1).0
}

/// Twelve-cell dataset calibrated to the reference session table.
pub fn table_dataset(n_per_cell: usize) -> GaitDataset {
    generate_calibrated(&table1_spec(n_per_cell, 3)).expect("valid spec")
}
