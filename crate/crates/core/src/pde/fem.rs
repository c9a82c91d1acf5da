//! P1 finite element backend on uniform meshes of (0,1) and (0,1)².
//!
//! 1D meshes are uniform interval partitions solved exactly by the Thomas
//! algorithm; 2D meshes are uniform triangulations of the unit square (two
//! right triangles per cell) solved by Jacobi-preconditioned conjugate
//! gradients. Coefficients are read at element midpoints (1D) or centroids
//! (2D), which is exact for patchwise-constant data aligned with the mesh.
//! Assembled matrices are per-call locals; nothing is cached globally.

use crate::error::CoreError;
use crate::pde::ParametricProblem;

/// Relative residual target for the 2D conjugate-gradient solve.
const CG_TOL: f64 = 1e-10;
const CG_MAX_ITERS: usize = 50_000;

/// Interior nodal values of the P1 Galerkin solution on `cells` cells per
/// side (homogeneous Dirichlet data).
pub fn solve_uniform(
    problem: &ParametricProblem,
    y: &[f64],
    cells: usize,
) -> Result<Vec<f64>, CoreError> {
    match problem.spatial_dim() {
        1 => solve_1d(problem, y, cells),
        _ => solve_2d(problem, y, cells),
    }
}

fn solve_1d(problem: &ParametricProblem, y: &[f64], n: usize) -> Result<Vec<f64>, CoreError> {
    let h = 1.0 / n as f64;
    // element coefficients at midpoints
    let mut a_elem = Vec::with_capacity(n);
    for e in 0..n {
        let mid = [(e as f64 + 0.5) * h];
        let a = problem.coefficient(&mid, y);
        if a <= 0.0 {
            return Err(CoreError::EllipticityViolation(format!(
                "coefficient {a} at x = {} is not positive",
                mid[0]
            )));
        }
        a_elem.push(a);
    }
    // tridiagonal stiffness over interior nodes 1..n-1
    let dofs = n - 1;
    let mut diag = vec![0.0; dofs];
    let mut off = vec![0.0; dofs.saturating_sub(1)];
    for i in 0..dofs {
        diag[i] = (a_elem[i] + a_elem[i + 1]) / h;
        if i + 1 < dofs {
            off[i] = -a_elem[i + 1] / h;
        }
    }
    // load: ∫ f φ_i by the element midpoint rule (exact for constant f)
    let rhs: Vec<f64> = (0..dofs)
        .map(|i| {
            let left = [(i as f64 + 0.5) * h];
            let right = [(i as f64 + 1.5) * h];
            0.5 * h * (problem.forcing().eval(&left) + problem.forcing().eval(&right))
        })
        .collect();
    Ok(solve_tridiagonal(&diag, &off, &rhs))
}

/// Thomas algorithm for a symmetric tridiagonal system.
fn solve_tridiagonal(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    if n == 0 {
        return Vec::new();
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = if n > 1 { off[0] / diag[0] } else { 0.0 };
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - off[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = off[i] / m;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Compressed sparse row matrix over the interior dofs.
struct Csr {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl Csr {
    fn matvec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.col_idx[k]];
            }
            *o = acc;
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        let n = self.row_ptr.len() - 1;
        let mut d = vec![0.0; n];
        for (i, di) in d.iter_mut().enumerate() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col_idx[k] == i {
                    *di = self.vals[k];
                }
            }
        }
        d
    }
}

fn solve_2d(problem: &ParametricProblem, y: &[f64], n: usize) -> Result<Vec<f64>, CoreError> {
    let h = 1.0 / n as f64;
    let dofs = (n - 1) * (n - 1);
    // interior dof index of grid node (ix, iy), or None on the boundary
    let dof_of = |ix: usize, iy: usize| -> Option<usize> {
        if ix == 0 || iy == 0 || ix == n || iy == n {
            None
        } else {
            Some((iy - 1) * (n - 1) + (ix - 1))
        }
    };

    let mut rows: Vec<std::collections::BTreeMap<usize, f64>> =
        vec![std::collections::BTreeMap::new(); dofs];
    let mut rhs = vec![0.0; dofs];

    let mut add_triangle = |vertices: [(usize, usize); 3]| -> Result<(), CoreError> {
        let px: Vec<f64> = vertices.iter().map(|&(ix, _)| ix as f64 * h).collect();
        let py: Vec<f64> = vertices.iter().map(|&(_, iy)| iy as f64 * h).collect();
        let centroid = [
            (px[0] + px[1] + px[2]) / 3.0,
            (py[0] + py[1] + py[2]) / 3.0,
        ];
        let a = problem.coefficient(&centroid, y);
        if a <= 0.0 {
            return Err(CoreError::EllipticityViolation(format!(
                "coefficient {a} at centroid ({}, {}) is not positive",
                centroid[0], centroid[1]
            )));
        }
        let f_t = problem.forcing().eval(&centroid);
        let area = 0.5
            * ((px[1] - px[0]) * (py[2] - py[0]) - (px[2] - px[0]) * (py[1] - py[0])).abs();
        let b = [py[1] - py[2], py[2] - py[0], py[0] - py[1]];
        let c = [px[2] - px[1], px[0] - px[2], px[1] - px[0]];
        for (loc_a, &(ix, iy)) in vertices.iter().enumerate() {
            let Some(row) = dof_of(ix, iy) else { continue };
            rhs[row] += f_t * area / 3.0;
            for (loc_b, &(jx, jy)) in vertices.iter().enumerate() {
                let Some(col) = dof_of(jx, jy) else { continue };
                let k = a * (b[loc_a] * b[loc_b] + c[loc_a] * c[loc_b]) / (4.0 * area);
                *rows[row].entry(col).or_insert(0.0) += k;
            }
        }
        Ok(())
    };

    for cy in 0..n {
        for cx in 0..n {
            // two triangles per cell, consistent diagonal direction
            add_triangle([(cx, cy), (cx + 1, cy), (cx + 1, cy + 1)])?;
            add_triangle([(cx, cy), (cx + 1, cy + 1), (cx, cy + 1)])?;
        }
    }

    let mut row_ptr = Vec::with_capacity(dofs + 1);
    let mut col_idx = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for row in &rows {
        for (&c, &v) in row {
            col_idx.push(c);
            vals.push(v);
        }
        row_ptr.push(col_idx.len());
    }
    let csr = Csr {
        row_ptr,
        col_idx,
        vals,
    };
    pcg(&csr, &rhs)
}

/// Conjugate gradients with Jacobi preconditioning.
fn pcg(a: &Csr, b: &[f64]) -> Result<Vec<f64>, CoreError> {
    let n = b.len();
    let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if b_norm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|&d| 1.0 / d).collect();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for _ in 0..CG_MAX_ITERS {
        a.matvec(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let r_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r_norm <= CG_TOL * b_norm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(CoreError::SolverDivergence(format!(
        "conjugate gradients did not reach {CG_TOL} in {CG_MAX_ITERS} iterations"
    )))
}

/// Exact integral of the P1 function with the given interior nodal values
/// (boundary values vanish): trapezoid-consistent nodal quadrature, weight
/// h per interior node in 1D and h² in 2D.
pub fn integrate_p1(spatial_dim: usize, cells: usize, values: &[f64]) -> f64 {
    let h = 1.0 / cells as f64;
    let w = match spatial_dim {
        1 => h,
        _ => h * h,
    };
    values.iter().sum::<f64>() * w
}
