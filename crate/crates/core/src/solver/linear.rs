use crate::assembly::LinearSystem;
use crate::{Error, Result};
use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::{Mat, Par};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Systems whose estimated condition number exceeds this are reported singular.
const CONDITION_LIMIT: f64 = 1e14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSolveStats {
    pub dim: usize,
    pub nnz: usize,
    /// `‖Ax − b‖ / ‖b‖` (absolute when `b = 0`).
    pub relative_residual: f64,
}

/// Sparse LU factorization with a cheap conditioning probe.
pub struct SparseLu {
    dim: usize,
    nnz: usize,
    lu: Lu<usize, f64>,
}

impl std::fmt::Debug for SparseLu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseLu")
            .field("dim", &self.dim)
            .field("nnz", &self.nnz)
            .finish()
    }
}

impl SparseLu {
    pub fn new(system: &LinearSystem) -> Result<Self> {
        faer::set_global_parallelism(Par::Seq);
        let a = system.matrix()?;
        let nnz = a.compute_nnz();
        let lu = a
            .sp_lu()
            .map_err(|_| Error::SingularMatrix(f64::INFINITY))?;
        let this = Self {
            dim: system.dim,
            nnz,
            lu,
        };

        // Condition estimate ‖A‖_∞ ‖A⁻¹ y‖_∞ / ‖y‖_∞ with a fixed oscillating probe.
        let mut row_sums = vec![0.0; system.dim];
        for &(i, _, v) in &system.triplets {
            row_sums[i] += v.abs();
        }
        let norm_a = row_sums.iter().cloned().fold(0.0, f64::max);
        let probe = DMatrix::from_fn(system.dim, 1, |i, _| {
            1.0 + 0.5 * ((i as f64) * 0.7391).sin()
        });
        let y = this.solve_many(&probe);
        let growth = y.amax() / probe.amax();
        let cond = norm_a * growth;
        if !cond.is_finite() || cond > CONDITION_LIMIT {
            return Err(Error::SingularMatrix(cond));
        }
        Ok(this)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.nnz
    }

    pub fn solve_many(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        let b = Mat::<f64>::from_fn(rhs.nrows(), rhs.ncols(), |i, j| rhs[(i, j)]);
        let x = self.lu.solve(&b);
        DMatrix::from_fn(rhs.nrows(), rhs.ncols(), |i, j| x[(i, j)])
    }

    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let b = DMatrix::from_column_slice(rhs.len(), 1, rhs.as_slice());
        DVector::from_column_slice(self.solve_many(&b).as_slice())
    }
}

/// Direct sparse solve with a residual check.
pub fn linear_solve(system: &LinearSystem) -> Result<DVector<f64>> {
    Ok(linear_solve_with_stats(system)?.0)
}

pub fn linear_solve_with_stats(system: &LinearSystem) -> Result<(DVector<f64>, LinearSolveStats)> {
    let lu = SparseLu::new(system)?;
    let x = lu.solve(&system.rhs);
    let r = system.apply(&x) - &system.rhs;
    let b = system.rhs.norm();
    let rel = if b > 0.0 { r.norm() / b } else { r.norm() };
    if !rel.is_finite() || rel > 1e-10 {
        return Err(Error::SingularMatrix(rel));
    }
    Ok((
        x,
        LinearSolveStats {
            dim: system.dim,
            nnz: lu.nnz(),
            relative_residual: rel,
        },
    ))
}

/// Direct solve of a system whose row `row` is a dense constraint `tᵀx = b_row`, where `kernel`
/// spans the null space of the remaining rows and `tᵀkernel ≠ 0`.
///
/// The dense row makes the column elimination tree of the LU a chain, so it is replaced by a
/// single pinned entry; the constraint is restored afterwards by adding a multiple of `kernel`.
pub fn kernel_constrained_solve(
    system: &LinearSystem,
    row: usize,
    kernel: &DVector<f64>,
) -> Result<(DVector<f64>, LinearSolveStats)> {
    let pin = kernel.iamax();
    let mut t = DVector::zeros(system.dim);
    let mut pinned = LinearSystem::new(system.dim);
    pinned.triplets.reserve(system.triplets.len());
    for &(i, j, v) in &system.triplets {
        if i == row {
            t[j] += v;
        } else {
            pinned.triplets.push((i, j, v));
        }
    }
    let tk = t.dot(kernel);
    if tk.is_nan() || tk == 0.0 {
        return Err(Error::SingularMatrix(f64::INFINITY));
    }
    pinned.triplets.push((row, pin, 1.0));
    pinned.rhs = system.rhs.clone();
    pinned.rhs[row] = 0.0;
    let lu = SparseLu::new(&pinned)?;
    let mut x = lu.solve(&pinned.rhs);
    let c = (system.rhs[row] - t.dot(&x)) / tk;
    x.axpy(c, kernel, 1.0);
    let r = system.apply(&x) - &system.rhs;
    let b = system.rhs.norm();
    let rel = if b > 0.0 { r.norm() / b } else { r.norm() };
    if !rel.is_finite() || rel > 1e-10 {
        return Err(Error::SingularMatrix(rel));
    }
    Ok((
        x,
        LinearSolveStats {
            dim: system.dim,
            nnz: lu.nnz(),
            relative_residual: rel,
        },
    ))
}
