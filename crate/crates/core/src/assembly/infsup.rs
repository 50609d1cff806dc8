//! Smallest generalized singular values of the discrete coupling forms.
//!
//! For `b(τ, v)` with Gram matrices `X` (on τ) and `Y` (on v), the inf-sup
//! constant is `β = sqrt(λ_min(B X⁻¹ Bᵀ, Y))`. The Schur complement is never
//! formed: `(B X⁻¹ Bᵀ)⁻¹ z` is the second block of the saddle solve
//! `[X Bᵀ; B 0][a; y] = [0; −z]`, so a block inverse iteration only needs one
//! sparse factorization. `X` is the `H(div)` Gram matrix (L² part through the
//! projections plus stabilization, and the divergence part) and `Y` the L²
//! Gram matrix of the piecewise polynomials.

use super::{Discretization, LinearSystem};
use crate::solver::SparseLu;
use crate::vemlocal::forms::{block_diag2, kron4};
use crate::Result;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfSupConstants {
    /// For `b(τ, (v, ω)) = ∫ v·div τ + ∫ ω:τ`.
    pub beta_s: f64,
    /// For `b(η, ψ) = ∫ ψ div η`.
    pub beta_t: f64,
}

const IDENTITY4: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

pub fn inf_sup_constants(disc: &Discretization<'_>) -> Result<InfSupConstants> {
    Ok(InfSupConstants {
        beta_s: flow_constant(disc)?,
        beta_t: heat_constant(disc)?,
    })
}

fn flow_constant(disc: &Discretization<'_>) -> Result<f64> {
    let d = &disc.dofmap;
    let pr = d.n_poly;
    let ny = 3 * pr * d.n_cells;
    let n = d.n_sigma + ny;
    let mut sys = LinearSystem::new(n);
    let mut y_blocks = Vec::with_capacity(d.n_cells);
    for c in 0..d.n_cells {
        let sp = &disc.spaces[c];
        let map = d.sigma_map(disc.mesh, c);
        let b_div = block_diag2(&sp.gram) * &sp.div_t;
        let x = sp.proj_t.transpose() * kron4(&IDENTITY4, &sp.gram) * &sp.proj_t
            + &sp.stab_t
            + sp.div_t.transpose() * &b_div;
        let b_skw = sp.skew_block();
        let y0 = d.n_sigma + c * 3 * pr;
        for (i, &(gi, si)) in map.iter().enumerate() {
            for (j, &(gj, sj)) in map.iter().enumerate() {
                sys.triplets.push((gi, gj, si * sj * x[(i, j)]));
            }
            for b in 0..2 * pr {
                sys.triplets.push((gi, y0 + b, si * b_div[(b, i)]));
                sys.triplets.push((y0 + b, gi, si * b_div[(b, i)]));
            }
            for b in 0..pr {
                sys.triplets.push((gi, y0 + 2 * pr + b, si * b_skw[(b, i)]));
                sys.triplets.push((y0 + 2 * pr + b, gi, si * b_skw[(b, i)]));
            }
        }
        // ‖ω‖² = 2‖w‖² for ω = w [[0,1],[-1,0]].
        let mut y = DMatrix::zeros(3 * pr, 3 * pr);
        y.view_mut((0, 0), (2 * pr, 2 * pr))
            .copy_from(&block_diag2(&sp.gram));
        y.view_mut((2 * pr, 2 * pr), (pr, pr))
            .copy_from(&(&sp.gram * 2.0));
        y_blocks.push(y);
    }
    smallest_value(&sys, d.n_sigma, &y_blocks)
}

fn heat_constant(disc: &Discretization<'_>) -> Result<f64> {
    let d = &disc.dofmap;
    let pr = d.n_poly;
    let n = d.heat_dim;
    let mut sys = LinearSystem::new(n);
    let mut y_blocks = Vec::with_capacity(d.n_cells);
    for c in 0..d.n_cells {
        let sp = &disc.spaces[c];
        let map = d.rho_map(disc.mesh, c);
        let b_t = &sp.gram * &sp.div;
        let x = sp.proj.transpose() * block_diag2(&sp.gram) * &sp.proj
            + &sp.stab
            + sp.div.transpose() * &b_t;
        let y0 = d.phi_start(c);
        for (i, &(gi, si)) in map.iter().enumerate() {
            for (j, &(gj, sj)) in map.iter().enumerate() {
                sys.triplets.push((gi, gj, si * sj * x[(i, j)]));
            }
            for b in 0..pr {
                sys.triplets.push((gi, y0 + b, si * b_t[(b, i)]));
                sys.triplets.push((y0 + b, gi, si * b_t[(b, i)]));
            }
        }
        y_blocks.push(sp.gram.clone());
    }
    sys.eliminate(&d.constrained_rho);
    smallest_value(&sys, d.n_rho, &y_blocks)
}

/// Block inverse iteration on the Y-inner-product Schur complement.
fn smallest_value(saddle: &LinearSystem, offset: usize, y_blocks: &[DMatrix<f64>]) -> Result<f64> {
    let n = saddle.dim;
    let ny = n - offset;
    let k = 6.min(ny);
    let lu = SparseLu::new(saddle)?;
    let apply_y = |v: &DMatrix<f64>| -> DMatrix<f64> {
        let mut out = DMatrix::zeros(ny, v.ncols());
        let mut row = 0;
        for b in y_blocks {
            let m = b.nrows();
            out.rows_mut(row, m).copy_from(&(b * v.rows(row, m)));
            row += m;
        }
        out
    };
    // (B X⁻¹ Bᵀ)⁻¹ z from the saddle solve.
    let apply_inv = |z: &DMatrix<f64>| -> DMatrix<f64> {
        let mut rhs = DMatrix::zeros(n, z.ncols());
        rhs.rows_mut(offset, ny).copy_from(&(-z));
        lu.solve_many(&rhs).rows(offset, ny).into_owned()
    };
    let mut q = DMatrix::from_fn(ny, k, |i, j| {
        ((i + 1) as f64 * (0.37 + 0.61 * j as f64)).sin() + 0.1 * (j as f64 + 1.0)
    });
    let mut theta_old = f64::NAN;
    for _ in 0..500 {
        q = y_orthonormalize(&q, &apply_y);
        let w = apply_inv(&apply_y(&q));
        let h = q.transpose() * apply_y(&w);
        let h = (&h + h.transpose()) * 0.5;
        let eig = SymmetricEigen::new(h);
        let theta = eig.eigenvalues.max();
        if (theta - theta_old).abs() <= 1e-12 * theta.abs() {
            return Ok((1.0 / theta).sqrt());
        }
        theta_old = theta;
        q = w;
    }
    Ok((1.0 / theta_old).sqrt())
}

fn y_orthonormalize(
    q: &DMatrix<f64>,
    apply_y: &dyn Fn(&DMatrix<f64>) -> DMatrix<f64>,
) -> DMatrix<f64> {
    let g = q.transpose() * apply_y(q);
    let g = (&g + g.transpose()) * 0.5;
    let eig = SymmetricEigen::new(g);
    let mut scale = eig.eigenvectors.clone();
    for (j, l) in eig.eigenvalues.iter().enumerate() {
        let s = if *l > 0.0 { 1.0 / l.sqrt() } else { 0.0 };
        scale.column_mut(j).scale_mut(s);
    }
    q * scale
}
