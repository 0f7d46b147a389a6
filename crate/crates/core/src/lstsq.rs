//! Truncated-SVD least squares for the collocation fits.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Solution of `min ‖A w - b‖` discarding singular values below
/// `rel_cutoff · σ_max`.
#[derive(Clone, Debug)]
pub struct TsvdSolution {
    pub weights: DVector<f64>,
    pub rank: usize,
    pub sigma_max: f64,
}

pub fn solve_tsvd(a: DMatrix<f64>, b: &DVector<f64>, rel_cutoff: f64) -> Result<TsvdSolution> {
    if a.nrows() != b.len() {
        return Err(Error::LengthMismatch {
            values: b.len(),
            points: a.nrows(),
        });
    }
    if b.iter().all(|&v| v == 0.0) {
        return Ok(TsvdSolution {
            weights: DVector::zeros(a.ncols()),
            rank: 0,
            sigma_max: 0.0,
        });
    }
    let svd = a.svd(true, true);
    let sigma_max = svd.singular_values.max();
    let eps = rel_cutoff * sigma_max;
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    let weights = svd
        .solve(b, eps)
        .map_err(|e| Error::InvalidInput(format!("svd solve: {e}")))?;
    Ok(TsvdSolution {
        weights,
        rank,
        sigma_max,
    })
}
