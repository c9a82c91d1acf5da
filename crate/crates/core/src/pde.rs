//! Affine-parametric diffusion problems on (0,1)^n, n ∈ {1, 2}, with P1
//! finite element solvers on a dyadic mesh hierarchy, QoI evaluation and the
//! per-level detail ΔF^l.
//!
//! The coefficient is a(x, y) = ā(x) + Σ_j y_j ψ_j(x) with either a cosine
//! family ψ_j(x) = cos(π j ‖x‖) / j^μ or patchwise-constant fluctuations on
//! an equispaced partition. Solves are pure functions of (problem, y, level),
//! so the driver may dispatch them concurrently across samples.

pub mod fem;

use std::fmt;
use std::sync::Arc;

use crate::error::CoreError;

/// Evaluable scalar function of the spatial point.
pub type SpatialFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Scalar field on the physical domain: constant or an arbitrary evaluable
/// function of the spatial point.
#[derive(Clone)]
pub enum Field {
    Constant(f64),
    Function(SpatialFn),
}

impl Field {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Field::Constant(c) => *c,
            Field::Function(f) => f(x),
        }
    }

    fn describe(&self) -> String {
        match self {
            Field::Constant(c) => format!("{c}"),
            Field::Function(_) => "custom".into(),
        }
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({})", self.describe())
    }
}

/// The affine fluctuation family ψ_j.
#[derive(Debug, Clone, PartialEq)]
pub enum Fluctuation {
    /// ψ_j(x) = cos(π j ‖x‖) / j^μ for j = 1..=terms, with ‖x‖ the Euclidean
    /// norm of the spatial point.
    Cosine { mu: f64, terms: usize },
    /// ψ_j = c_j · χ_{D_j} on an equispaced partition into d patches
    /// (d subintervals in 1D, a √d × √d grid of cells in 2D).
    Patchwise { amplitudes: Vec<f64> },
}

impl Fluctuation {
    pub fn terms(&self) -> usize {
        match self {
            Fluctuation::Cosine { terms, .. } => *terms,
            Fluctuation::Patchwise { amplitudes } => amplitudes.len(),
        }
    }
}

/// Linear quantity-of-interest functional applied to the solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QoiSpec {
    /// G(u) = ∫_D u dx.
    Integral,
}

/// An affine-parametric diffusion problem −∇·(a(·,y)∇u) = f, u|∂D = 0.
#[derive(Debug, Clone)]
pub struct ParametricProblem {
    spatial_dim: usize,
    mean_field: Field,
    fluctuation: Fluctuation,
    forcing: Field,
    qoi: QoiSpec,
}

impl ParametricProblem {
    pub fn new(
        spatial_dim: usize,
        mean_field: Field,
        fluctuation: Fluctuation,
        forcing: Field,
        qoi: QoiSpec,
    ) -> Result<Self, CoreError> {
        if spatial_dim != 1 && spatial_dim != 2 {
            return Err(CoreError::Config(format!(
                "spatial dimension must be 1 or 2, got {spatial_dim}"
            )));
        }
        if let Fluctuation::Patchwise { amplitudes } = &fluctuation {
            if amplitudes.is_empty() {
                return Err(CoreError::Config("patchwise family needs at least one patch".into()));
            }
            if spatial_dim == 2 {
                let d = amplitudes.len();
                let k = (d as f64).sqrt().round() as usize;
                if k * k != d {
                    return Err(CoreError::Config(format!(
                        "2D patchwise family needs a square patch count, got {d}"
                    )));
                }
            }
        }
        if let Fluctuation::Cosine { mu, terms } = &fluctuation {
            if *terms == 0 {
                return Err(CoreError::Config("cosine family needs at least one term".into()));
            }
            if !mu.is_finite() {
                return Err(CoreError::Config("cosine decay exponent must be finite".into()));
            }
        }
        Ok(Self {
            spatial_dim,
            mean_field,
            fluctuation,
            forcing,
            qoi,
        })
    }

    pub fn spatial_dim(&self) -> usize {
        self.spatial_dim
    }

    /// Number of parameter dimensions (fluctuation terms).
    pub fn parameter_dim(&self) -> usize {
        self.fluctuation.terms()
    }

    pub fn fluctuation(&self) -> &Fluctuation {
        &self.fluctuation
    }

    pub fn mean_field(&self) -> &Field {
        &self.mean_field
    }

    pub fn forcing(&self) -> &Field {
        &self.forcing
    }

    pub fn qoi_spec(&self) -> QoiSpec {
        self.qoi
    }

    /// ψ_j(x) for the 1-based term j.
    pub fn psi(&self, j: usize, x: &[f64]) -> f64 {
        debug_assert!(j >= 1 && j <= self.parameter_dim());
        match &self.fluctuation {
            Fluctuation::Cosine { mu, .. } => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                (std::f64::consts::PI * j as f64 * r).cos() / (j as f64).powf(*mu)
            }
            Fluctuation::Patchwise { amplitudes } => {
                if self.patch_of(x) == j {
                    amplitudes[j - 1]
                } else {
                    0.0
                }
            }
        }
    }

    /// 1-based patch index containing x (patchwise families only); points on
    /// patch boundaries are assigned to the lower patch, which never matters
    /// because coefficients are read at element midpoints/centroids.
    fn patch_of(&self, x: &[f64]) -> usize {
        let d = self.parameter_dim();
        match self.spatial_dim {
            1 => {
                let idx = (x[0] * d as f64).floor() as usize;
                idx.min(d - 1) + 1
            }
            _ => {
                let k = (d as f64).sqrt().round() as usize;
                let col = ((x[0] * k as f64).floor() as usize).min(k - 1);
                let row = ((x[1] * k as f64).floor() as usize).min(k - 1);
                row * k + col + 1
            }
        }
    }

    /// Diffusion coefficient a(x, y) = ā(x) + Σ_j y_j ψ_j(x).
    pub fn coefficient(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut a = self.mean_field.eval(x);
        match &self.fluctuation {
            Fluctuation::Patchwise { amplitudes } => {
                // disjoint supports: only the owning patch contributes
                let j = self.patch_of(x);
                a += y[j - 1] * amplitudes[j - 1];
            }
            Fluctuation::Cosine { .. } => {
                for j in 1..=self.parameter_dim() {
                    a += y[j - 1] * self.psi(j, x);
                }
            }
        }
        a
    }

    /// Short text fingerprint recording the problem in surrogate files.
    pub fn fingerprint(&self) -> String {
        let fluct = match &self.fluctuation {
            Fluctuation::Cosine { mu, terms } => format!("cosine(mu={mu},d={terms})"),
            Fluctuation::Patchwise { amplitudes } => {
                let amp: Vec<String> = amplitudes.iter().map(|a| a.to_string()).collect();
                format!("patchwise(c={})", amp.join("|"))
            }
        };
        format!(
            "n={};mean={};fluct={};f={};qoi=integral",
            self.spatial_dim,
            self.mean_field.describe(),
            fluct,
            self.forcing.describe()
        )
    }
}

/// Dyadic hierarchy of uniform meshes on (0,1)^n: level l has meshwidth
/// h_l = 2^{−l} h_0 with h_0 = 1/cells0. Node and element tables are implicit
/// in the structured numbering used by the assembly routines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeshHierarchy {
    spatial_dim: usize,
    cells0: usize,
    levels: usize,
}

impl MeshHierarchy {
    pub fn new(spatial_dim: usize, cells0: usize, levels: usize) -> Result<Self, CoreError> {
        if spatial_dim != 1 && spatial_dim != 2 {
            return Err(CoreError::Config(format!(
                "spatial dimension must be 1 or 2, got {spatial_dim}"
            )));
        }
        if cells0 < 2 {
            return Err(CoreError::Config(format!(
                "coarsest mesh needs at least 2 cells per side, got {cells0}"
            )));
        }
        if levels == 0 {
            return Err(CoreError::Config("hierarchy needs at least one level".into()));
        }
        Ok(Self {
            spatial_dim,
            cells0,
            levels,
        })
    }

    /// Builds a hierarchy whose coarsest meshwidth is (approximately) h0;
    /// 1/h0 must be an integer within 1e−9.
    pub fn from_h0(spatial_dim: usize, h0: f64, levels: usize) -> Result<Self, CoreError> {
        if !(h0 > 0.0 && h0 <= 0.5) {
            return Err(CoreError::Config(format!("h0 must lie in (0, 1/2], got {h0}")));
        }
        let inv = 1.0 / h0;
        let cells0 = inv.round() as usize;
        if (inv - cells0 as f64).abs() > 1e-9 * inv {
            return Err(CoreError::Config(format!(
                "1/h0 must be an integer cell count, got 1/{h0} = {inv}"
            )));
        }
        Self::new(spatial_dim, cells0, levels)
    }

    pub fn spatial_dim(&self) -> usize {
        self.spatial_dim
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Cells per side at level l.
    pub fn cells(&self, level: usize) -> usize {
        self.cells0 << level
    }

    /// Meshwidth h_l = 2^{−l} h_0.
    pub fn h(&self, level: usize) -> f64 {
        1.0 / self.cells(level) as f64
    }

    /// Interior degrees of freedom at level l.
    pub fn dofs(&self, level: usize) -> usize {
        let n = self.cells(level);
        match self.spatial_dim {
            1 => n - 1,
            _ => (n - 1) * (n - 1),
        }
    }
}

/// Interior nodal coefficients of a P1 solution at one hierarchy level.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSolution {
    pub level: usize,
    pub values: Vec<f64>,
}

/// Verifies the uniform ellipticity assumption on a fine evaluation grid:
/// returns (r, R) with r = ess-inf (ā − Σ|ψ_j|) and R = ess-sup (ā + Σ|ψ_j|),
/// failing when r ≤ 0.
pub fn check_uea(problem: &ParametricProblem) -> Result<(f64, f64), CoreError> {
    let d = problem.parameter_dim();
    let mut r = f64::INFINITY;
    let mut big_r = f64::NEG_INFINITY;
    let mut visit = |x: &[f64]| {
        let abar = problem.mean_field.eval(x);
        let spread: f64 = (1..=d).map(|j| problem.psi(j, x).abs()).sum();
        r = r.min(abar - spread);
        big_r = big_r.max(abar + spread);
    };
    match problem.spatial_dim {
        1 => {
            let n = 4096usize;
            for i in 0..n {
                let x = [(i as f64 + 0.5) / n as f64];
                visit(&x);
            }
        }
        _ => {
            let n = 256usize;
            for iy in 0..n {
                for ix in 0..n {
                    let x = [(ix as f64 + 0.5) / n as f64, (iy as f64 + 0.5) / n as f64];
                    visit(&x);
                }
            }
        }
    }
    if r <= 0.0 {
        return Err(CoreError::EllipticityViolation(format!(
            "ess-inf of the coefficient is {r} <= 0"
        )));
    }
    Ok((r, big_r))
}

/// P1 Galerkin solve of the diffusion problem at parameter y on hierarchy
/// level `level`: exact tridiagonal solve in 1D, diagonally preconditioned
/// conjugate gradients (relative residual 1e−10) in 2D.
pub fn solve(
    problem: &ParametricProblem,
    y: &[f64],
    level: usize,
    mesh: &MeshHierarchy,
) -> Result<DiscreteSolution, CoreError> {
    if y.len() < problem.parameter_dim() {
        return Err(CoreError::Dimension(format!(
            "parameter vector has {} coordinates, problem needs {}",
            y.len(),
            problem.parameter_dim()
        )));
    }
    if level >= mesh.levels() {
        return Err(CoreError::Config(format!(
            "level {level} outside hierarchy of {} levels",
            mesh.levels()
        )));
    }
    if mesh.spatial_dim() != problem.spatial_dim() {
        return Err(CoreError::Dimension(
            "mesh and problem spatial dimensions disagree".into(),
        ));
    }
    check_patch_alignment(problem, mesh.cells(level))?;
    let values = fem::solve_uniform(problem, y, mesh.cells(level))?;
    Ok(DiscreteSolution { level, values })
}

/// Patchwise coefficients are evaluated at element midpoints/centroids; the
/// mesh must resolve patch boundaries exactly for this to be exact.
fn check_patch_alignment(problem: &ParametricProblem, cells: usize) -> Result<(), CoreError> {
    if let Fluctuation::Patchwise { amplitudes } = &problem.fluctuation {
        let patches_per_side = match problem.spatial_dim {
            1 => amplitudes.len(),
            _ => (amplitudes.len() as f64).sqrt().round() as usize,
        };
        if !cells.is_multiple_of(patches_per_side) {
            return Err(CoreError::Config(format!(
                "mesh with {cells} cells per side does not align with {patches_per_side} patches per side"
            )));
        }
    }
    Ok(())
}

/// QoI G(u) = ∫_D u dx of a P1 function, integrated exactly (nodal quadrature
/// with element weights; boundary values vanish).
pub fn qoi(
    u: &DiscreteSolution,
    problem: &ParametricProblem,
    mesh: &MeshHierarchy,
) -> Result<f64, CoreError> {
    let n = mesh.cells(u.level);
    let expect = mesh.dofs(u.level);
    if u.values.len() != expect {
        return Err(CoreError::Dimension(format!(
            "solution has {} dofs, level {} expects {expect}",
            u.values.len(),
            u.level
        )));
    }
    match problem.qoi_spec() {
        QoiSpec::Integral => Ok(fem::integrate_p1(problem.spatial_dim(), n, &u.values)),
    }
}

/// QoI of the P1 solve on a standalone uniform mesh with `cells` cells per
/// side. Used for reference ("truth") solutions on grids finer than the
/// hierarchy.
pub fn qoi_at_resolution(
    problem: &ParametricProblem,
    y: &[f64],
    cells: usize,
) -> Result<f64, CoreError> {
    if y.len() < problem.parameter_dim() {
        return Err(CoreError::Dimension(format!(
            "parameter vector has {} coordinates, problem needs {}",
            y.len(),
            problem.parameter_dim()
        )));
    }
    check_patch_alignment(problem, cells)?;
    let values = fem::solve_uniform(problem, y, cells)?;
    Ok(fem::integrate_p1(problem.spatial_dim(), cells, &values))
}

/// Per-level detail ΔF^l(y): the difference of QoI values between
/// consecutive discretization levels, with the convention that the solution
/// below the coarsest level is identically zero (so ΔF^0 = F^0).
pub fn detail(
    problem: &ParametricProblem,
    y: &[f64],
    level: usize,
    mesh: &MeshHierarchy,
) -> Result<f64, CoreError> {
    let fine = solve(problem, y, level, mesh)?;
    let f_fine = qoi(&fine, problem, mesh)?;
    if level == 0 {
        return Ok(f_fine);
    }
    let coarse = solve(problem, y, level - 1, mesh)?;
    let f_coarse = qoi(&coarse, problem, mesh)?;
    Ok(f_fine - f_coarse)
}
