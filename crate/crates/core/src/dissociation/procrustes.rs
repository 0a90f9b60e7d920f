use nalgebra::DMatrix;
use ndarray::ArrayView2;

use crate::error::{Error, Result};

fn centered(m: ArrayView2<'_, f64>) -> DMatrix<f64> {
    let (n, d) = m.dim();
    let mut out = DMatrix::from_fn(n, d, |i, j| m[[i, j]]);
    for j in 0..d {
        let mean = out.column(j).mean();
        out.column_mut(j).add_scalar_mut(-mean);
    }
    out
}

/// Residual shape difference after optimal translation, rotation or
/// reflection, and uniform scaling of `b` onto `a`, divided by the total
/// variance (sum of squares about the centroid) of `a`.
///
/// Equals `1 − (Σ σ_k)² / (‖A‖²‖B‖²)` for centered `A`, `B` with `σ_k` the
/// singular values of `AᵀB`, so it is symmetric in its arguments and lies
/// in `[0, 1]`.
pub fn procrustes_disparity(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::ShapeMismatch(format!(
            "procrustes needs equal shapes, got {:?} and {:?}",
            a.dim(),
            b.dim()
        )));
    }
    if a.nrows() == 0 {
        return Err(Error::ShapeMismatch("procrustes needs at least one row".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    let ca = centered(a);
    let cb = centered(b);
    let na = ca.norm_squared();
    let nb = cb.norm_squared();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ShapeMismatch(
            "procrustes is undefined for a configuration with zero variance".into(),
        ));
    }
    let cross = ca.transpose() * &cb;
    let trace_norm: f64 = cross.singular_values().iter().sum();
    Ok((1.0 - trace_norm * trace_norm / (na * nb)).max(0.0))
}
