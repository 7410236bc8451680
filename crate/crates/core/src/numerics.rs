//! Small dense linear algebra: numerical rank, affine hyperplane fits and
//! least squares.
//!
//! Every comparison in the crate goes through one [`ToleranceConfig`]. The
//! SVD-based routines are backed by `nalgebra`; [`rank_by_elimination`] is an
//! independent second route kept in-crate so the two can be cross-checked.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::Hyperplane;

/// Comparison thresholds shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Relative singular-value (or pivot) threshold for rank decisions.
    pub rank_tol: f64,
    /// Agreement threshold for parameters and hyperplanes.
    pub match_tol: f64,
    /// Least-squares residual threshold, relative to the data scale.
    pub residual_tol: f64,
    /// Threshold for quantities that are exactly zero in exact arithmetic.
    pub zero_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            rank_tol: 1e-9,
            match_tol: 1e-8,
            residual_tol: 1e-8,
            zero_tol: 1e-12,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let all = [self.rank_tol, self.match_tol, self.residual_tol, self.zero_tol];
        if all.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::Tolerance(format!(
                "all tolerances must be positive and finite, got {self:?}"
            )));
        }
        if self.rank_tol > self.match_tol {
            return Err(Error::Tolerance(format!(
                "rank_tol ({}) must not exceed match_tol ({})",
                self.rank_tol, self.match_tol
            )));
        }
        Ok(())
    }
}

/// Result of fitting a hyperplane through a point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFit {
    pub hyperplane: Hyperplane,
    /// Largest `|<a, p> + b|` over the input points.
    pub max_residual: f64,
}

fn check_nonempty(matrix: &DMatrix<f64>) -> Result<()> {
    if matrix.nrows() == 0 || matrix.ncols() == 0 {
        return Err(Error::Input("empty matrix".into()));
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("matrix contains non-finite entries".into()));
    }
    Ok(())
}

/// Numerical rank: singular values above `rank_tol` times the largest one.
pub fn rank(matrix: &DMatrix<f64>, tol: &ToleranceConfig) -> Result<usize> {
    check_nonempty(matrix)?;
    let sv = matrix.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    if max == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > tol.rank_tol * max).count())
}

/// Numerical rank by Gaussian elimination with complete pivoting.
///
/// A pivot counts when it exceeds `rank_tol` times the largest entry of the
/// input, the elimination analogue of the relative singular-value threshold.
pub fn rank_by_elimination(matrix: &DMatrix<f64>, tol: &ToleranceConfig) -> Result<usize> {
    check_nonempty(matrix)?;
    let mut m = matrix.clone();
    let (rows, cols) = m.shape();
    let scale = m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return Ok(0);
    }
    let threshold = tol.rank_tol * scale;
    let mut rank = 0;
    for step in 0..rows.min(cols) {
        let mut best = (step, step, 0.0_f64);
        for r in step..rows {
            for c in step..cols {
                let v = m[(r, c)].abs();
                if v > best.2 {
                    best = (r, c, v);
                }
            }
        }
        if best.2 <= threshold {
            break;
        }
        m.swap_rows(step, best.0);
        m.swap_columns(step, best.1);
        let pivot = m[(step, step)];
        for r in (step + 1)..rows {
            let factor = m[(r, step)] / pivot;
            if factor != 0.0 {
                for c in step..cols {
                    let delta = factor * m[(step, c)];
                    m[(r, c)] -= delta;
                }
            }
        }
        rank += 1;
    }
    Ok(rank)
}

/// Builds a row-major matrix from equal-length rows.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let ncols = rows.first().map(Vec::len).unwrap_or(0);
    if rows.is_empty() || ncols == 0 {
        return Err(Error::Input("empty matrix".into()));
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != ncols) {
        return Err(Error::Input(format!(
            "row {bad} has length {}, expected {ncols}",
            rows[bad].len()
        )));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |r, c| rows[r][c]))
}

/// Fits the hyperplane through `points`, which must affinely span a flat of
/// dimension exactly `d - 1`.
///
/// The normal is the right singular vector of the centered point matrix with
/// the smallest singular value.
pub fn affine_fit(points: &[Vec<f64>], tol: &ToleranceConfig) -> Result<AffineFit> {
    let d = points.first().map(Vec::len).unwrap_or(0);
    if d == 0 {
        return Err(Error::Input("affine_fit needs at least one non-empty point".into()));
    }
    if let Some(bad) = points.iter().position(|p| p.len() != d) {
        return Err(Error::Input(format!(
            "point {bad} has dimension {}, expected {d}",
            points[bad].len()
        )));
    }
    if points.len() < d {
        return Err(Error::Input(format!(
            "affine_fit in dimension {d} needs at least {d} points, got {}",
            points.len()
        )));
    }
    let n = points.len();
    let mut centroid = vec![0.0; d];
    for p in points {
        for (c, v) in centroid.iter_mut().zip(p) {
            *c += v / n as f64;
        }
    }
    let centered = DMatrix::from_fn(n, d, |r, c| points[r][c] - centroid[c]);
    let max_coord = points
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0_f64, |acc, v| acc.max(v.abs()));

    let svd = centered.svd(false, true);
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::Internal("SVD did not return right singular vectors".into()))?;
    let sv = &svd.singular_values;
    let sigma_max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let threshold = tol.rank_tol * sigma_max.max(max_coord).max(f64::MIN_POSITIVE);
    let flat_rank = sv.iter().filter(|&&s| s > threshold).count();
    if flat_rank != d - 1 {
        return Err(Error::DegenerateFit(format!(
            "points span an affine flat of dimension {flat_rank}, expected {}",
            d - 1
        )));
    }
    let (min_idx, _) = sv.iter().enumerate().fold(
        (0, f64::INFINITY),
        |best, (i, &s)| if s < best.1 { (i, s) } else { best },
    );
    // With n >= d the thin SVD carries all d right singular vectors.
    let normal: Vec<f64> = v_t.row(min_idx).iter().cloned().collect();
    let offset = -dot(&normal, &centroid);
    let hyperplane = Hyperplane::from_affine(&normal, offset, tol)
        .ok_or_else(|| Error::Internal("affine_fit produced a zero normal".into()))?
        .hyperplane;
    let max_residual = points
        .iter()
        .map(|p| hyperplane.signed_distance(p).abs())
        .fold(0.0_f64, f64::max);
    Ok(AffineFit {
        hyperplane,
        max_residual,
    })
}

/// Minimizes `||A z - y||`; returns the minimum-norm minimizer and the residual norm.
pub fn solve_least_squares(a: &DMatrix<f64>, y: &DVector<f64>, tol: &ToleranceConfig) -> Result<(DVector<f64>, f64)> {
    check_nonempty(a)?;
    if a.nrows() != y.len() {
        return Err(Error::Input(format!(
            "least squares: matrix has {} rows but right-hand side has length {}",
            a.nrows(),
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("right-hand side contains non-finite entries".into()));
    }
    let svd = a.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let eps = tol.rank_tol * sigma_max;
    let z = svd
        .solve(y, eps)
        .map_err(|e| Error::Internal(format!("least squares solve failed: {e}")))?;
    let residual = (a * &z - y).norm();
    Ok((z, residual))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
