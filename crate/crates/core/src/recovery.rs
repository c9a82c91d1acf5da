//! Weighted sparse recovery from Chebyshev sensing matrices: weighted
//! orthogonal matching pursuit (WOMP), weighted hard thresholding pursuit
//! (WHTP), weighted basis pursuit (WBP) via a primal-dual scheme, plus
//! least-squares and Monte-Carlo-projection baselines.
//!
//! All methods share the weighted sparsity budget ‖x‖_{ω,0} = Σ ω_ν² over the
//! selected support. Tie-breaking is deterministic everywhere (lowest
//! canonical column index wins), so results are reproducible bit for bit.

use nalgebra::{DMatrix, DVector};

use crate::chebyshev::{tensor_sup_norm, SampleBatch, SensingMatrix};
use crate::error::CoreError;
use crate::multiindex::MultiIndex;
use crate::weights::WeightedVector;

/// Recovery algorithm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Womp,
    Whtp,
    Wbp,
    Lsq,
    Mc,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Womp => "womp",
            Algorithm::Whtp => "whtp",
            Algorithm::Wbp => "wbp",
            Algorithm::Lsq => "lsq",
            Algorithm::Mc => "mc",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, CoreError> {
        match s.to_ascii_lowercase().as_str() {
            "womp" | "omp" => Ok(Algorithm::Womp),
            "whtp" | "htp" => Ok(Algorithm::Whtp),
            "wbp" | "bp" => Ok(Algorithm::Wbp),
            "lsq" | "ls" => Ok(Algorithm::Lsq),
            "mc" => Ok(Algorithm::Mc),
            other => Err(CoreError::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// One recovery task: sensing matrix, right-hand side, per-column weights
/// and the weighted sparsity budget.
pub struct RecoveryRequest<'a> {
    pub matrix: &'a SensingMatrix,
    pub rhs: &'a [f64],
    pub weights: &'a [f64],
    pub budget: f64,
    pub algorithm: Algorithm,
    /// Residual bound η for WBP (0 means equality constraints).
    pub noise_level: Option<f64>,
}

impl<'a> RecoveryRequest<'a> {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.rhs.len() != self.matrix.rows() {
            return Err(CoreError::Dimension(format!(
                "rhs has {} entries, matrix has {} rows",
                self.rhs.len(),
                self.matrix.rows()
            )));
        }
        if self.weights.len() != self.matrix.cols() {
            return Err(CoreError::Dimension(format!(
                "{} weights for {} columns",
                self.weights.len(),
                self.matrix.cols()
            )));
        }
        for (w, nu) in self.weights.iter().zip(self.matrix.columns()) {
            let floor = tensor_sup_norm(nu);
            if !(*w >= 1.0) || *w + 1e-12 < floor {
                return Err(CoreError::InvalidWeights(format!(
                    "weight {w} for column {nu} is below max(1, ‖T_ν‖_∞ = {floor})"
                )));
            }
        }
        if !(self.budget >= 0.0) {
            return Err(CoreError::Config(format!("budget must be >= 0, got {}", self.budget)));
        }
        Ok(())
    }
}

/// Result of one recovery run. `coefficients` is dense over the matrix
/// columns (exact zeros outside the selected support).
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub coefficients: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub achieved_weighted_sparsity: f64,
    pub converged: bool,
    /// Columns skipped because the selected subsystem became singular.
    pub skipped_columns: usize,
    /// Per-coefficient standard errors (Monte-Carlo projection only).
    pub std_errors: Option<Vec<f64>>,
}

impl RecoveryResult {
    /// Sparse view over the matrix columns, skipping exact zeros.
    pub fn as_weighted_vector(&self, columns: &[MultiIndex]) -> WeightedVector {
        let mut support = Vec::new();
        let mut values = Vec::new();
        for (nu, &v) in columns.iter().zip(&self.coefficients) {
            if v != 0.0 {
                support.push(nu.clone());
                values.push(v);
            }
        }
        WeightedVector::new(support, values).expect("columns are distinct")
    }

    /// CSV export: `#key=value` metadata header (algorithm, budget,
    /// residual, iterations), then `multiindex,coefficient` rows.
    pub fn write_csv<W: std::io::Write>(
        &self,
        columns: &[MultiIndex],
        algorithm: Algorithm,
        budget: f64,
        mut out: W,
    ) -> std::io::Result<()> {
        writeln!(out, "#algorithm={}", algorithm.name())?;
        writeln!(out, "#budget={budget}")?;
        writeln!(out, "#residual={}", self.residual_norm)?;
        writeln!(out, "#iterations={}", self.iterations)?;
        writeln!(out, "multiindex,coefficient")?;
        for (nu, c) in columns.iter().zip(&self.coefficients) {
            writeln!(out, "{nu},{c}")?;
        }
        Ok(())
    }
}

/// Dispatches on `request.algorithm`.
pub fn recover(request: &RecoveryRequest) -> Result<RecoveryResult, CoreError> {
    match request.algorithm {
        Algorithm::Womp => womp(request),
        Algorithm::Whtp => whtp(request),
        Algorithm::Wbp => wbp(request),
        Algorithm::Lsq => least_squares(request),
        Algorithm::Mc => Err(CoreError::Config(
            "Monte-Carlo projection needs sample values; call mc_project directly".into(),
        )),
    }
}

fn dvec(values: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(values)
}

/// Weighted sparsity Σ ω² of a support set.
fn support_sparsity(support: &[usize], weights: &[f64]) -> f64 {
    support.iter().map(|&j| weights[j] * weights[j]).sum()
}

/// Least-squares fit of `b` on the columns `support` of `phi`. Returns the
/// coefficient vector on the support, or None when the subsystem is
/// numerically singular.
fn ls_on_support(phi: &DMatrix<f64>, b: &DVector<f64>, support: &[usize]) -> Option<DVector<f64>> {
    let m = phi.nrows();
    let k = support.len();
    if k == 0 {
        return Some(DVector::zeros(0));
    }
    let mut sub = DMatrix::zeros(m, k);
    for (c, &j) in support.iter().enumerate() {
        sub.set_column(c, &phi.column(j));
    }
    ls_solve(&sub, b)
}

/// Thin-QR least squares min ‖A x − b‖₂ for m ≥ n; None when R is singular.
fn ls_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let n = a.ncols();
    let qr = a.clone().qr();
    let r = qr.r();
    let max_diag = (0..n).map(|i| r[(i, i)].abs()).fold(0.0f64, f64::max);
    if max_diag == 0.0 || (0..n).any(|i| r[(i, i)].abs() < 1e-12 * max_diag) {
        return None;
    }
    let qtb = qr.q().transpose() * b;
    r.solve_upper_triangular(&qtb)
}

/// Minimum-norm solution of an underdetermined consistent system via thin QR
/// of Aᵀ: x = Q R^{-T} b.
fn min_norm_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let at = a.transpose();
    let m = a.nrows();
    let qr = at.qr();
    let r = qr.r();
    let max_diag = (0..m).map(|i| r[(i, i)].abs()).fold(0.0f64, f64::max);
    if max_diag == 0.0 || (0..m).any(|i| r[(i, i)].abs() < 1e-12 * max_diag) {
        return None;
    }
    let w = r.transpose().solve_lower_triangular(b)?;
    Some(qr.q() * w)
}

/// Ridge-regularized normal equations, the fallback when QR reports rank
/// deficiency.
fn ridge_normal_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut gram = a.transpose() * a;
    let scale = gram.diagonal().iter().fold(0.0f64, |acc, d| acc.max(*d));
    let ridge = 1e-12 * scale.max(1.0);
    for i in 0..n {
        gram[(i, i)] += ridge;
    }
    let atb = a.transpose() * b;
    gram.cholesky()
        .map(|ch| ch.solve(&atb))
        .unwrap_or_else(|| DVector::zeros(n))
}

fn residual_norm(phi: &DMatrix<f64>, x: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (phi * x - b).norm()
}

/// Power-method estimate of ‖Φ‖² = λ_max(ΦᵀΦ), with a small safety margin.
/// Deterministic start vector, so recovery stays reproducible.
fn spectral_norm_sq_estimate(phi: &DMatrix<f64>) -> f64 {
    let n = phi.ncols();
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.01 * ((i as f64) + 1.0).sin());
    v /= v.norm();
    let mut lambda = 0.0;
    for _ in 0..60 {
        let w = phi.transpose() * (phi * &v);
        let norm = w.norm();
        if norm == 0.0 {
            return 1.0;
        }
        let new_lambda = norm;
        v = w / norm;
        if (new_lambda - lambda).abs() <= 1e-6 * new_lambda {
            lambda = new_lambda;
            break;
        }
        lambda = new_lambda;
    }
    lambda * 1.02
}

/// Weighted orthogonal matching pursuit: repeatedly selects the column
/// maximizing |⟨r, φ_ν⟩| / ω_ν, stops when the next selection would exceed
/// the weighted sparsity budget or the residual is negligible, and re-fits
/// on the selected support by least squares after every selection. Columns
/// making the subsystem singular are skipped (counted, not fatal).
pub fn womp(request: &RecoveryRequest) -> Result<RecoveryResult, CoreError> {
    request.validate()?;
    let phi = request.matrix.matrix();
    let b = dvec(request.rhs);
    let n = phi.ncols();
    let b_norm = b.norm();

    let mut residual = b.clone();
    let mut support: Vec<usize> = Vec::new();
    let mut in_support = vec![false; n];
    let mut banned = vec![false; n];
    let mut coeffs_on_support = DVector::zeros(0);
    let mut iterations = 0;
    let mut skipped = 0;

    while iterations < n {
        if residual.norm() <= 1e-12 * b_norm {
            break;
        }
        // column of largest weight-normalized correlation
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if in_support[j] || banned[j] {
                continue;
            }
            let corr = phi.column(j).dot(&residual).abs() / request.weights[j];
            match best {
                Some((_, c)) if corr <= c => {}
                _ => {
                    if corr > 0.0 {
                        best = Some((j, corr));
                    }
                }
            }
        }
        let Some((j, _)) = best else { break };
        let w2 = request.weights[j] * request.weights[j];
        if support_sparsity(&support, request.weights) + w2 > request.budget + 1e-9 {
            break;
        }
        support.push(j);
        match ls_on_support(phi, &b, &support) {
            Some(x) => {
                in_support[j] = true;
                coeffs_on_support = x;
                let mut fitted = DVector::zeros(phi.nrows());
                for (c, &jj) in support.iter().enumerate() {
                    fitted += phi.column(jj) * coeffs_on_support[c];
                }
                residual = &b - fitted;
                iterations += 1;
            }
            None => {
                support.pop();
                banned[j] = true;
                skipped += 1;
            }
        }
    }

    let mut coefficients = vec![0.0; n];
    for (c, &j) in support.iter().enumerate() {
        coefficients[j] = coeffs_on_support[c];
    }
    let x = dvec(&coefficients);
    Ok(RecoveryResult {
        residual_norm: residual_norm(phi, &x, &b),
        coefficients,
        iterations,
        achieved_weighted_sparsity: support_sparsity(&support, request.weights),
        converged: true,
        skipped_columns: skipped,
        std_errors: None,
    })
}

/// Greedy weighted thresholding: keeps entries in decreasing density
/// v_ν² / ω_ν², retaining every entry that still fits Σ ω² ≤ budget.
/// Ties break toward the lower canonical column index.
fn threshold_support(values: &DVector<f64>, weights: &[f64], budget: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).filter(|&j| values[j] != 0.0).collect();
    order.sort_by(|&a, &b| {
        let da = values[a] * values[a] / (weights[a] * weights[a]);
        let db = values[b] * values[b] / (weights[b] * weights[b]);
        db.partial_cmp(&da).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    let mut used = 0.0;
    let mut support = Vec::new();
    for j in order {
        let w2 = weights[j] * weights[j];
        if used + w2 <= budget + 1e-9 {
            used += w2;
            support.push(j);
        }
    }
    support.sort_unstable();
    support
}

/// Weighted hard thresholding pursuit: gradient step on the measure-
/// normalized system (step 1/‖Φ‖²_est, power-method estimate), weighted
/// greedy thresholding to the budget, then a least-squares re-fit on that
/// support. Stops on support stabilization; hitting the iteration cap
/// returns the final iterate flagged as not converged.
pub fn whtp(request: &RecoveryRequest) -> Result<RecoveryResult, CoreError> {
    request.validate()?;
    let phi = request.matrix.matrix();
    let b = dvec(request.rhs);
    let n = phi.ncols();
    let kappa = 1.0 / spectral_norm_sq_estimate(phi);

    let max_iters = 100;
    let mut x = DVector::zeros(n);
    let mut support: Vec<usize> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=max_iters {
        iterations = it;
        let grad_step = &x + phi.transpose() * (&b - phi * &x) * kappa;
        let new_support = threshold_support(&grad_step, request.weights, request.budget);
        let coeffs = match ls_on_support(phi, &b, &new_support) {
            Some(c) => c,
            None => {
                // singular subsystem: fall back to ridge on the support
                let m = phi.nrows();
                let mut sub = DMatrix::zeros(m, new_support.len());
                for (c, &j) in new_support.iter().enumerate() {
                    sub.set_column(c, &phi.column(j));
                }
                ridge_normal_solve(&sub, &b)
            }
        };
        x = DVector::zeros(n);
        for (c, &j) in new_support.iter().enumerate() {
            x[j] = coeffs[c];
        }
        let stabilized = new_support == support;
        support = new_support;
        if stabilized {
            converged = true;
            break;
        }
    }

    let coefficients: Vec<f64> = x.iter().copied().collect();
    Ok(RecoveryResult {
        residual_norm: residual_norm(phi, &x, &b),
        coefficients,
        iterations,
        achieved_weighted_sparsity: support_sparsity(&support, request.weights),
        converged,
        skipped_columns: 0,
        std_errors: None,
    })
}

/// Weighted basis pursuit (denoising): min ‖z‖_{ω,1} subject to
/// ‖Φz − b‖₂ ≤ η, run to a duality gap of 1e−8. The equality case η = 0 is
/// solved by a projection ADMM (affine projections through a cached QR of
/// Φᵀ); the denoising case by a Chambolle-Pock primal-dual iteration. An
/// upfront least-squares solve detects noise levels below the distance from
/// b to the column span.
pub fn wbp(request: &RecoveryRequest) -> Result<RecoveryResult, CoreError> {
    request.validate()?;
    let eta = request.noise_level.ok_or_else(|| {
        CoreError::Config("weighted basis pursuit needs a noise level (0 for equality)".into())
    })?;
    if !(eta >= 0.0) {
        return Err(CoreError::Config(format!("noise level must be >= 0, got {eta}")));
    }
    let phi = request.matrix.matrix();
    let b = dvec(request.rhs);
    let n = phi.ncols();
    let b_norm = b.norm();

    // trivial optimum: the zero vector is feasible
    if b_norm <= eta {
        return Ok(RecoveryResult {
            coefficients: vec![0.0; n],
            residual_norm: b_norm,
            iterations: 0,
            achieved_weighted_sparsity: 0.0,
            converged: true,
            skipped_columns: 0,
            std_errors: None,
        });
    }

    // distance from b to range(Φ): the constraint set is empty below it
    let distance = {
        let ls = least_squares(&RecoveryRequest {
            matrix: request.matrix,
            rhs: request.rhs,
            weights: request.weights,
            budget: f64::INFINITY,
            algorithm: Algorithm::Lsq,
            noise_level: None,
        })?;
        ls.residual_norm
    };
    if eta + 1e-9 * b_norm.max(1.0) < distance {
        return Err(CoreError::Infeasible(format!(
            "noise level {eta} is below the distance {distance} from the data to the column span"
        )));
    }

    let result = if eta == 0.0 {
        wbp_equality_admm(phi, &b, request.weights)
    } else {
        wbp_denoising_cp(phi, &b, request.weights, eta)
    };
    let (z, iterations, converged) = result?;
    let coefficients: Vec<f64> = z.iter().copied().collect();
    let support: Vec<usize> = (0..n).filter(|&j| coefficients[j] != 0.0).collect();
    Ok(RecoveryResult {
        residual_norm: residual_norm(phi, &z, &b),
        coefficients,
        iterations,
        achieved_weighted_sparsity: support_sparsity(&support, request.weights),
        converged,
        skipped_columns: 0,
        std_errors: None,
    })
}

const WBP_GAP_TOL: f64 = 1e-8;
const WBP_MAX_ITERS: usize = 50_000;

/// Scales a dual candidate into the feasible set {|Φᵀξ| ≤ ω} and returns the
/// dual objective −⟨b, ξ̂⟩ − η‖ξ̂‖.
fn wbp_dual_value(
    phi: &DMatrix<f64>,
    b: &DVector<f64>,
    weights: &[f64],
    xi: &DVector<f64>,
    eta: f64,
) -> f64 {
    let corr = phi.transpose() * xi;
    let infeas = corr
        .iter()
        .zip(weights)
        .map(|(c, w)| c.abs() / w)
        .fold(0.0f64, f64::max);
    let scale = infeas.max(1.0);
    (-xi.dot(b) - eta * xi.norm()) / scale
}

/// ADMM for the equality case: alternating projection onto {Φx = b} and
/// weighted soft thresholding, with residual-balanced penalty updates. The
/// projection reuses one QR factorization of Φᵀ.
fn wbp_equality_admm(
    phi: &DMatrix<f64>,
    b: &DVector<f64>,
    weights: &[f64],
) -> Result<(DVector<f64>, usize, bool), CoreError> {
    let (m, n) = (phi.nrows(), phi.ncols());
    let qr = phi.transpose().clone_owned().qr();
    let q = qr.q();
    let r = qr.r();
    let max_diag = (0..m.min(n)).map(|i| r[(i, i)].abs()).fold(0.0f64, f64::max);
    let rank_ok = max_diag > 0.0 && (0..m.min(n)).all(|i| r[(i, i)].abs() > 1e-12 * max_diag);
    if !rank_ok || m > n {
        // rank-deficient rows or a tall system: fall back to the primal-dual
        // scheme, which needs no factorization (the equality set is
        // nonempty, the upfront distance check passed)
        return wbp_denoising_cp(phi, b, weights, 0.0);
    }
    // P(v) = v − Q R^{-T} (Φ v − b)
    let project = |v: &DVector<f64>| -> DVector<f64> {
        let defect = phi * v - b;
        let w = r
            .transpose()
            .solve_lower_triangular(&defect)
            .expect("diagonal checked above");
        v - &q * w
    };

    let mut x = project(&DVector::zeros(n));
    // start the thresholds ω/ρ at the scale of the feasible iterate
    let x_scale = x.amax();
    let w_scale = weights.iter().sum::<f64>() / n as f64;
    let mut rho = if x_scale > 0.0 { w_scale / x_scale } else { 1.0 };
    let mut z = x.clone();
    let mut u = DVector::<f64>::zeros(n);
    let soft = |v: &DVector<f64>, rho: f64| -> DVector<f64> {
        DVector::from_fn(n, |j, _| {
            let t = weights[j] / rho;
            let val: f64 = v[j];
            val.signum() * (val.abs() - t).max(0.0)
        })
    };

    let primal = |z: &DVector<f64>| -> f64 {
        z.iter().zip(weights).map(|(v, w)| w * v.abs()).sum()
    };

    let mut iterations = 0;
    let mut converged = false;
    // standard over-relaxation factor
    let alpha = 1.8;
    for it in 1..=WBP_MAX_ITERS {
        iterations = it;
        x = project(&(&z - &u));
        let z_old = z.clone();
        let x_relaxed = &x * alpha + &z_old * (1.0 - alpha);
        z = soft(&(&x_relaxed + &u), rho);
        u += &x_relaxed - &z;

        if it % 25 == 0 || it == WBP_MAX_ITERS {
            let r_primal = (&x - &z).norm();
            let r_dual = rho * (&z - &z_old).norm();
            let p_val = primal(&z);
            // dual candidate ξ from ρu ∈ ∂‖W·‖₁(z): solve Φᵀξ = −ρu
            let qtu = q.transpose() * &u;
            if let Some(xi_neg) = r.solve_upper_triangular(&qtu) {
                let xi = xi_neg * (-rho);
                let d_val = wbp_dual_value(phi, b, weights, &xi, 0.0);
                let scale = x.norm().max(1.0);
                if p_val - d_val <= WBP_GAP_TOL * p_val.abs().max(1.0)
                    && r_primal <= 1e-10 * scale
                {
                    converged = true;
                    break;
                }
            }
            // residual balancing keeps the two ADMM residuals comparable
            if r_primal > 10.0 * r_dual && rho < 1e8 {
                rho *= 2.0;
                u /= 2.0;
            } else if r_dual > 10.0 * r_primal && rho > 1e-8 {
                rho /= 2.0;
                u *= 2.0;
            }
        }
    }
    Ok((z, iterations, converged))
}

/// Chambolle-Pock primal-dual iteration for the denoising case η ≥ 0.
fn wbp_denoising_cp(
    phi: &DMatrix<f64>,
    b: &DVector<f64>,
    weights: &[f64],
    eta: f64,
) -> Result<(DVector<f64>, usize, bool), CoreError> {
    let n = phi.ncols();
    let b_norm = b.norm();
    let op_norm = spectral_norm_sq_estimate(phi).sqrt();
    let tau = 0.99 / op_norm;
    let sigma = 0.99 / op_norm;
    let feas_tol = 1e-8 * b_norm.max(1.0);

    let mut z = DVector::<f64>::zeros(n);
    let mut z_bar = z.clone();
    let mut xi = DVector::<f64>::zeros(phi.nrows());
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=WBP_MAX_ITERS {
        iterations = it;
        // dual ascent: prox of (ι_{‖·−b‖ ≤ η})^* is a shrunk translation
        let mut q = &xi + (phi * &z_bar - b) * sigma;
        let qn = q.norm();
        let shrink = if qn > 0.0 { (1.0 - sigma * eta / qn).max(0.0) } else { 0.0 };
        q *= shrink;
        xi = q;

        // primal descent: weighted soft thresholding
        let grad = phi.transpose() * &xi;
        let mut z_new = DVector::zeros(n);
        for j in 0..n {
            let v = z[j] - tau * grad[j];
            let t = tau * weights[j];
            z_new[j] = v.signum() * (v.abs() - t).max(0.0);
        }
        z_bar = &z_new * 2.0 - &z;
        z = z_new;

        if it % 50 == 0 || it == WBP_MAX_ITERS {
            let feas = (phi * &z - b).norm();
            if feas <= eta + feas_tol {
                let p_val: f64 = z.iter().zip(weights).map(|(v, w)| w * v.abs()).sum();
                let d_val = wbp_dual_value(phi, b, weights, &xi, eta);
                if p_val - d_val <= WBP_GAP_TOL * p_val.abs().max(1.0) {
                    converged = true;
                    break;
                }
            }
        }
    }
    Ok((z, iterations, converged))
}

/// Weighted basis pursuit with the residual bound chosen by holdout cross
/// validation over a grid of noise levels (every fifth sample is held out,
/// the bound minimizing the holdout error wins, and the final fit uses all
/// samples with the bound rescaled by √(m / m_train)).
pub fn wbp_cross_validated(
    matrix: &SensingMatrix,
    rhs: &[f64],
    weights: &[f64],
    budget: f64,
) -> Result<RecoveryResult, CoreError> {
    let m = matrix.rows();
    if m < 10 {
        // too few samples to hold out: fall back to equality constraints
        let request = RecoveryRequest {
            matrix,
            rhs,
            weights,
            budget,
            algorithm: Algorithm::Wbp,
            noise_level: Some(0.0),
        };
        return wbp(&request);
    }
    let holdout: Vec<usize> = (0..m).filter(|i| i % 5 == 4).collect();
    let train: Vec<usize> = (0..m).filter(|i| i % 5 != 4).collect();
    let train_matrix = submatrix_rows(matrix, &train);
    let train_rhs: Vec<f64> = train.iter().map(|&i| rhs[i]).collect();
    let train_norm = train_rhs.iter().map(|v| v * v).sum::<f64>().sqrt();

    // candidate residual bounds never fall below the least-squares distance
    // to the column span (the constraint set would be empty there)
    let distance = |mat: &SensingMatrix, data: &[f64]| -> Result<f64, CoreError> {
        Ok(least_squares(&RecoveryRequest {
            matrix: mat,
            rhs: data,
            weights,
            budget: f64::INFINITY,
            algorithm: Algorithm::Lsq,
            noise_level: None,
        })?
        .residual_norm)
    };
    let train_distance = distance(&train_matrix, &train_rhs)?;
    let floor = |dist: f64, scale: f64| -> f64 {
        if dist <= 1e-12 * scale.max(1.0) {
            0.0
        } else {
            dist * (1.0 + 1e-6)
        }
    };
    let train_floor = floor(train_distance, train_norm);

    let grid = [0.0, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 3e-3, 1e-2, 3e-2];
    let mut best: Option<(f64, f64)> = None; // (holdout rmse, eta fraction)
    for &frac in &grid {
        let request = RecoveryRequest {
            matrix: &train_matrix,
            rhs: &train_rhs,
            weights,
            budget,
            algorithm: Algorithm::Wbp,
            noise_level: Some((frac * train_norm).max(train_floor)),
        };
        let Ok(result) = wbp(&request) else { continue };
        let mut err = 0.0;
        for &i in &holdout {
            let row = matrix.matrix().row(i);
            let pred: f64 = row
                .iter()
                .zip(&result.coefficients)
                .map(|(a, c)| a * c)
                .sum();
            err += (pred - rhs[i]) * (pred - rhs[i]);
        }
        let rmse = (err / holdout.len() as f64).sqrt();
        if best.is_none_or(|(b, _)| rmse < b) {
            best = Some((rmse, frac));
        }
    }
    let frac = best
        .ok_or_else(|| CoreError::Infeasible("no noise level on the grid was feasible".into()))?
        .1;
    let full_norm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    let full_floor = floor(distance(matrix, rhs)?, full_norm);
    let request = RecoveryRequest {
        matrix,
        rhs,
        weights,
        budget,
        algorithm: Algorithm::Wbp,
        noise_level: Some((frac * full_norm).max(full_floor)),
    };
    wbp(&request)
}

fn submatrix_rows(matrix: &SensingMatrix, rows: &[usize]) -> SensingMatrix {
    let src = matrix.matrix();
    let mut data = DMatrix::zeros(rows.len(), src.ncols());
    for (r, &i) in rows.iter().enumerate() {
        data.set_row(r, &src.row(i));
    }
    SensingMatrix::from_parts(matrix.columns().to_vec(), data)
}

/// Least squares min ‖Φz − b‖₂: square systems by LU, overdetermined by thin
/// QR (with a ridge-regularized normal-equation fallback), underdetermined by
/// the minimum-norm solution.
pub fn least_squares(request: &RecoveryRequest) -> Result<RecoveryResult, CoreError> {
    request.validate()?;
    let phi = request.matrix.matrix();
    let b = dvec(request.rhs);
    let (m, n) = (phi.nrows(), phi.ncols());

    let x = if m == n {
        phi.clone()
            .lu()
            .solve(&b)
            .or_else(|| ls_solve(phi, &b))
            .unwrap_or_else(|| ridge_normal_solve(phi, &b))
    } else if m > n {
        ls_solve(phi, &b).unwrap_or_else(|| ridge_normal_solve(phi, &b))
    } else {
        min_norm_solve(phi, &b).unwrap_or_else(|| ridge_normal_solve(phi, &b))
    };

    let coefficients: Vec<f64> = x.iter().copied().collect();
    let support: Vec<usize> = (0..n).filter(|&j| coefficients[j] != 0.0).collect();
    Ok(RecoveryResult {
        residual_norm: residual_norm(phi, &x, &b),
        coefficients,
        iterations: 1,
        achieved_weighted_sparsity: support_sparsity(&support, request.weights),
        converged: true,
        skipped_columns: 0,
        std_errors: None,
    })
}

/// Monte-Carlo coefficient estimation by orthonormality:
/// F̂_ν = (1/m) Σ_i F(y^(i)) T_ν(y^(i)), with per-coefficient standard
/// errors of the sample mean.
pub fn mc_project(
    batch: &SampleBatch,
    values: &[f64],
    gamma: &[MultiIndex],
) -> Result<RecoveryResult, CoreError> {
    let m = batch.len();
    if m == 0 {
        return Err(CoreError::Config("Monte-Carlo projection needs at least one sample".into()));
    }
    if values.len() != m {
        return Err(CoreError::Dimension(format!(
            "{} values for {} sample points",
            values.len(),
            m
        )));
    }
    let phi = crate::chebyshev::build_sensing_matrix(batch, gamma)?;
    let mut coefficients = Vec::with_capacity(gamma.len());
    let mut std_errors = Vec::with_capacity(gamma.len());
    for j in 0..gamma.len() {
        let col = phi.matrix().column(j);
        let mut mean = 0.0;
        for i in 0..m {
            mean += values[i] * col[i];
        }
        mean /= m as f64;
        let mut var = 0.0;
        if m > 1 {
            for i in 0..m {
                let dev = values[i] * col[i] - mean;
                var += dev * dev;
            }
            var /= (m - 1) as f64;
        }
        coefficients.push(mean);
        std_errors.push((var / m as f64).sqrt());
    }
    let x = dvec(&coefficients);
    let b = dvec(values);
    Ok(RecoveryResult {
        residual_norm: residual_norm(phi.matrix(), &x, &b),
        coefficients,
        iterations: 1,
        achieved_weighted_sparsity: f64::NAN,
        converged: true,
        skipped_columns: 0,
        std_errors: Some(std_errors),
    })
}
