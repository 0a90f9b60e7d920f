//! Outlier replacement and min–max normalization of the feature matrix.
//!
//! The pipeline order is fixed: per-column IQR replacement first, then
//! global min–max scaling. Normalization always spans all sessions and
//! conditions together so scores stay comparable between sessions.

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{ConditionLabel, GaitDataset, SessionLabel, FEATURE_COUNT, FEATURE_NAMES};
use crate::stats;

/// Per-row identity carried alongside the numeric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RowLabel {
    pub obs_id: u64,
    pub session: SessionLabel,
    pub condition: ConditionLabel,
}

/// N × 9 matrix of observations, columns in [`FEATURE_NAMES`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub values: Array2<f64>,
    pub labels: Vec<RowLabel>,
}

impl FeatureMatrix {
    pub fn from_dataset(ds: &GaitDataset) -> Self {
        let n = ds.len();
        let mut values = Array2::zeros((n, FEATURE_COUNT));
        let mut labels = Vec::with_capacity(n);
        for (mut row, o) in values.rows_mut().into_iter().zip(&ds.observations) {
            for (dst, src) in row.iter_mut().zip(o.state.0) {
                *dst = src;
            }
            labels.push(RowLabel {
                obs_id: o.obs_id,
                session: o.session,
                condition: o.condition,
            });
        }
        FeatureMatrix { values, labels }
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    /// Row `i` as a fixed-size state vector.
    pub fn row_array(&self, i: usize) -> [f64; FEATURE_COUNT] {
        let mut out = [0.0; FEATURE_COUNT];
        for (dst, src) in out.iter_mut().zip(self.values.row(i)) {
            *dst = *src;
        }
        out
    }

    /// Rows matching `keep`, order preserved.
    pub fn select(&self, keep: impl Fn(&RowLabel) -> bool) -> FeatureMatrix {
        let idx: Vec<usize> = (0..self.nrows()).filter(|&i| keep(&self.labels[i])).collect();
        FeatureMatrix {
            values: self.values.select(Axis(0), &idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizeScope {
    #[default]
    Global,
}

/// Column minima and maxima used by [`minmax_normalize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub scope: NormalizeScope,
}

impl ScalerParams {
    /// Applies the stored affine map; constant columns map to zero.
    pub fn apply(&self, values: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if values.ncols() != self.min.len() {
            return Err(Error::ShapeMismatch(format!(
                "scaler has {} columns, matrix has {}",
                self.min.len(),
                values.ncols()
            )));
        }
        let mut out = values.to_owned();
        for (j, mut col) in out.columns_mut().into_iter().enumerate() {
            let (lo, hi) = (self.min[j], self.max[j]);
            let range = hi - lo;
            col.mapv_inplace(|x| if range > 0.0 { (x - lo) / range } else { 0.0 });
        }
        Ok(out)
    }
}

/// Replaces values outside `[Q1 − f·IQR, Q3 + f·IQR]` with the column median.
///
/// Quartiles and median come from the original column. Returns the new
/// column and the number of replaced entries.
pub fn iqr_replace_column(col: &[f64], factor: f64) -> Result<(Vec<f64>, usize)> {
    if col.is_empty() {
        return Err(Error::EmptyColumn);
    }
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::InvalidParameter(format!("iqr factor must be > 0, got {factor}")));
    }
    let (lo, hi, median) = iqr_fences(col, factor);
    let mut replaced = 0;
    let out = col
        .iter()
        .map(|&x| {
            if x < lo || x > hi {
                replaced += 1;
                median
            } else {
                x
            }
        })
        .collect();
    Ok((out, replaced))
}

/// `(lower fence, upper fence, median)` of a nonempty column.
pub fn iqr_fences(col: &[f64], factor: f64) -> (f64, f64, f64) {
    let (q1, median, q3) = stats::quartiles(col);
    let iqr = q3 - q1;
    (q1 - factor * iqr, q3 + factor * iqr, median)
}

/// Min–max scales every column into `[0, 1]`.
pub fn minmax_normalize(m: &FeatureMatrix, scope: NormalizeScope) -> (FeatureMatrix, ScalerParams) {
    let params = fit_scaler(m.values.view(), scope);
    let values = params.apply(m.values.view()).expect("scaler fitted on the same matrix");
    (
        FeatureMatrix {
            values,
            labels: m.labels.clone(),
        },
        params,
    )
}

fn fit_scaler(values: ArrayView2<'_, f64>, scope: NormalizeScope) -> ScalerParams {
    let (min, max) = values
        .columns()
        .into_iter()
        .map(|col| {
            col.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            })
        })
        .unzip();
    ScalerParams { min, max, scope }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    /// Tukey fence multiplier (`iqr.factor`).
    pub iqr_factor: f64,
    /// `normalize.scope`; only `global` exists.
    pub scope: NormalizeScope,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            iqr_factor: 1.5,
            scope: NormalizeScope::Global,
        }
    }
}

/// Replacement count for one column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnAudit {
    pub column: String,
    pub replaced: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditLog {
    pub columns: Vec<ColumnAudit>,
    pub iqr_factor: f64,
    pub scope: NormalizeScope,
}

impl AuditLog {
    pub fn total_replaced(&self) -> usize {
        self.columns.iter().map(|c| c.replaced).sum()
    }

    pub fn replaced(&self, column: &str) -> Option<usize> {
        self.columns.iter().find(|c| c.column == column).map(|c| c.replaced)
    }
}

/// Output of [`preprocess_pipeline`].
#[derive(Debug, Clone)]
pub struct Preprocessed {
    /// After outlier replacement, before scaling.
    pub cleaned: FeatureMatrix,
    /// After outlier replacement and scaling.
    pub normalized: FeatureMatrix,
    pub scaler: ScalerParams,
    pub audit: AuditLog,
}

/// IQR replacement per column, then global min–max normalization.
pub fn preprocess_pipeline(ds: &GaitDataset, cfg: &PreprocessConfig) -> Result<Preprocessed> {
    if ds.is_empty() {
        return Err(Error::EmptyColumn);
    }
    let raw = FeatureMatrix::from_dataset(ds);
    let mut cleaned = raw.clone();
    let mut columns = Vec::with_capacity(FEATURE_COUNT);
    for (j, name) in FEATURE_NAMES.iter().enumerate() {
        let col: Vec<f64> = raw.values.column(j).to_vec();
        let (new_col, replaced) = iqr_replace_column(&col, cfg.iqr_factor)?;
        for (dst, src) in cleaned.values.column_mut(j).iter_mut().zip(new_col) {
            *dst = src;
        }
        columns.push(ColumnAudit {
            column: name.to_string(),
            replaced,
        });
    }
    let (normalized, scaler) = minmax_normalize(&cleaned, cfg.scope);
    Ok(Preprocessed {
        cleaned,
        normalized,
        scaler,
        audit: AuditLog {
            columns,
            iqr_factor: cfg.iqr_factor,
            scope: cfg.scope,
        },
    })
}
