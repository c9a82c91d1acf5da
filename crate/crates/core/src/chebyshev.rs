//! Univariate and tensorized Chebyshev polynomial evaluation, sampling from
//! the Chebyshev (arcsine) product measure, and sensing-matrix assembly.
//!
//! The basis is orthonormalized with respect to dσ(t) = dt / (π √(1−t²)):
//! T_0 ≡ 1 and T_j(t) = √2 cos(j arccos t) for j ≥ 1, tensorized over the
//! active dimensions of a multi-index. Evaluation uses the cos/arccos form,
//! which is stable on [−1, 1]; the classical three-term recurrence is kept
//! in the tests as an independent oracle.

use std::io::Write;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use crate::error::CoreError;
use crate::multiindex::MultiIndex;
use crate::rng::stream_rng;

/// Tolerance absorbing floating-point drift at the domain boundary: inputs
/// with |t| ≤ 1 + CLAMP_TOL are clamped to [−1, 1], larger ones are rejected.
pub const CLAMP_TOL: f64 = 1e-12;

fn clamp_to_domain(t: f64) -> Result<f64, CoreError> {
    if t.abs() > 1.0 + CLAMP_TOL || t.is_nan() {
        return Err(CoreError::Domain(format!("point {t} lies outside [-1, 1]")));
    }
    Ok(t.clamp(-1.0, 1.0))
}

/// Orthonormal univariate Chebyshev polynomial T_j(t).
pub fn cheb_univariate(degree: u32, t: f64) -> Result<f64, CoreError> {
    let t = clamp_to_domain(t)?;
    if degree == 0 {
        return Ok(1.0);
    }
    Ok(std::f64::consts::SQRT_2 * (f64::from(degree) * t.acos()).cos())
}

/// Tensorized Chebyshev polynomial T_ν(y) = ∏_{j ∈ supp ν} T_{ν_j}(y_j).
pub fn cheb_tensor(nu: &MultiIndex, y: &[f64]) -> Result<f64, CoreError> {
    if nu.max_dim() as usize > y.len() {
        return Err(CoreError::Dimension(format!(
            "index touches dimension {} but the point has only {} coordinates",
            nu.max_dim(),
            y.len()
        )));
    }
    let mut prod = 1.0;
    for &(j, k) in nu.entries() {
        prod *= cheb_univariate(k, y[j as usize - 1])?;
    }
    Ok(prod)
}

/// ‖T_ν‖_∞ = √2^{‖ν‖₀}.
pub fn tensor_sup_norm(nu: &MultiIndex) -> f64 {
    std::f64::consts::SQRT_2.powi(nu.support_size() as i32)
}

/// A batch of i.i.d. sample points from the Chebyshev product measure on
/// [−1, 1]^d. Reproducible from (seed, d, count); point i is generated from
/// its own sub-stream, so the batch does not depend on evaluation order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    seed: u64,
    d: usize,
    points: Vec<Vec<f64>>,
}

impl SampleBatch {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// CSV export: `#seed=` / `#d=` header lines, a column header, then one
    /// row per point.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "#seed={}", self.seed)?;
        writeln!(out, "#d={}", self.d)?;
        let header: Vec<String> = (1..=self.d).map(|j| format!("y_{j}")).collect();
        writeln!(out, "{}", header.join(","))?;
        for p in &self.points {
            let row: Vec<String> = p.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Draws `m` points y^(i) ∈ [−1, 1]^d with every coordinate distributed as
/// y = cos(π U), U uniform (the inverse-CDF form of the arcsine law).
pub fn sample_measure(seed: u64, d: usize, m: usize) -> SampleBatch {
    assert!(d >= 1, "dimension must be positive");
    let points: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            (0..d)
                .map(|_| (std::f64::consts::PI * rng.random::<f64>()).cos())
                .collect()
        })
        .collect();
    SampleBatch { seed, d, points }
}

/// Dense sensing matrix Φ with Φ_{i,ν} = T_ν(y^(i)); the column order is the
/// canonical order of the supplied candidate set.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingMatrix {
    columns: Vec<MultiIndex>,
    matrix: DMatrix<f64>,
}

impl SensingMatrix {
    /// Wraps an already assembled evaluation matrix; the column list must
    /// match the matrix width.
    pub fn from_parts(columns: Vec<MultiIndex>, matrix: DMatrix<f64>) -> Self {
        assert_eq!(columns.len(), matrix.ncols(), "one multi-index per column");
        Self { columns, matrix }
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn columns(&self) -> &[MultiIndex] {
        &self.columns
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Evaluates the tensorized basis at every sample point. Assembly is
/// parallel over columns; entries are bounded by √2^{‖ν‖₀}.
pub fn build_sensing_matrix(
    batch: &SampleBatch,
    gamma: &[MultiIndex],
) -> Result<SensingMatrix, CoreError> {
    let m = batch.len();
    for nu in gamma {
        if nu.max_dim() as usize > batch.d() {
            return Err(CoreError::Dimension(format!(
                "candidate index {} exceeds sample dimension {}",
                nu,
                batch.d()
            )));
        }
    }
    let cols: Vec<Vec<f64>> = gamma
        .par_iter()
        .map(|nu| {
            (0..m)
                .map(|i| cheb_tensor(nu, batch.point(i)).expect("dimensions checked above"))
                .collect()
        })
        .collect();
    let mut data = Vec::with_capacity(m * gamma.len());
    for col in &cols {
        data.extend_from_slice(col);
    }
    Ok(SensingMatrix {
        columns: gamma.to_vec(),
        matrix: DMatrix::from_vec(m, gamma.len(), data),
    })
}

/// Nodes of the n-point Gauss-Chebyshev rule; with uniform weights 1/n the
/// rule integrates polynomials of degree ≤ 2n−1 exactly against dσ.
pub fn gauss_chebyshev_nodes(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| (std::f64::consts::PI * (2.0 * i as f64 - 1.0) / (2.0 * n as f64)).cos())
        .collect()
}
