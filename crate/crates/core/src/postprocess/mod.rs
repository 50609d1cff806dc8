//! Pressure recovery, error norms, rate tables and field export.

mod rates;
mod vtk;

pub use rates::{rate_table, RateRow, RateTable};
pub use vtk::{cell_fields, export_fields, write_vtk, CellFields};

use crate::assembly::{DiscreteSolution, Discretization};
use crate::manufactured::ExactSolution;
use crate::model::Problem;
use crate::polyspace::l2_project;
use crate::{Point, Result};
use nalgebra::{DVector, Matrix2, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Per-cell polynomial fields of a discrete solution, in the cell's scaled monomials.
#[derive(Debug, Clone)]
pub struct ProjectedCell {
    /// `𝓟𝓟_r σ_h`, row-major components.
    pub sigma: DVector<f64>,
    /// `div σ_h`.
    pub div_sigma: DVector<f64>,
    pub u: DVector<f64>,
    /// Scalar `w_h` of `γ_h = w_h [[0, 1], [-1, 0]]`.
    pub gamma: DVector<f64>,
    /// `𝓟_r ρ_h`.
    pub rho: DVector<f64>,
    pub div_rho: DVector<f64>,
    pub phi: DVector<f64>,
    /// `p_h` in `P_{2r}`.
    pub pressure: DVector<f64>,
}

/// `p_h = −½ (tr 𝓟𝓟_r σ_h + |u_h|²)` per cell, as `P_{2r}` coefficients.
///
/// Expects the trace shift to have been applied (as returned by the solvers).
pub fn recover_pressure(
    disc: &Discretization<'_>,
    solution: &DiscreteSolution,
) -> Result<Vec<DVector<f64>>> {
    let d = &disc.dofmap;
    (0..d.n_cells)
        .into_par_iter()
        .map(|c| {
            let sp = &disc.spaces[c];
            let pr = d.n_poly;
            let sig = &sp.proj_t * solution.sigma_local(d, disc.mesh, c);
            let tr: Vec<f64> = (0..pr).map(|a| sig[a] + sig[3 * pr + a]).collect();
            let u = solution.u_cell(d, c);
            let high = sp.basis.with_degree(2 * d.r);
            l2_project(&high, &sp.quad, |x| {
                -0.5 * (sp.basis.eval_poly(&tr, x) + sp.basis.eval_vector(u, x).norm_squared())
            })
        })
        .collect()
}

pub fn project_cells(
    disc: &Discretization<'_>,
    solution: &DiscreteSolution,
) -> Result<Vec<ProjectedCell>> {
    let d = &disc.dofmap;
    let pressure = recover_pressure(disc, solution)?;
    Ok((0..d.n_cells)
        .into_par_iter()
        .zip(pressure)
        .map(|(c, p)| {
            let sp = &disc.spaces[c];
            let sigma = solution.sigma_local(d, disc.mesh, c);
            let rho = solution.rho_local(d, disc.mesh, c);
            ProjectedCell {
                sigma: &sp.proj_t * &sigma,
                div_sigma: &sp.div_t * &sigma,
                u: DVector::from_column_slice(solution.u_cell(d, c)),
                gamma: DVector::from_column_slice(solution.gamma_cell(d, c)),
                rho: &sp.proj * &rho,
                div_rho: &sp.div * &rho,
                phi: DVector::from_column_slice(solution.phi_cell(d, c)),
                pressure: p,
            }
        })
        .collect())
}

fn tensor_at(
    basis: &crate::polyspace::ScaledMonomialBasis,
    coeffs: &DVector<f64>,
    x: Point,
) -> Matrix2<f64> {
    basis.eval_tensor(coeffs.as_slice(), x)
}

/// The six error quantities against an exact solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub h: f64,
    /// `‖σ − 𝓟𝓟σ_h‖_0 + ‖div σ − div σ_h‖_{0,6/5}`.
    pub sigma: f64,
    /// `‖u − u_h‖_{0,6}`.
    pub u: f64,
    /// `‖γ − γ_h‖_0` (tensor norm).
    pub gamma: f64,
    pub p: f64,
    /// `‖ρ − 𝓟ρ_h‖_0 + ‖div ρ − div ρ_h‖_{0,6/5}`.
    pub rho: f64,
    /// `‖φ − φ_h‖_{0,6}`.
    pub phi: f64,
}

impl ErrorReport {
    pub fn values(&self) -> [f64; 6] {
        [self.sigma, self.u, self.gamma, self.p, self.rho, self.phi]
    }

    /// Entry-wise ratio to `norms` (typically [`exact_norms`]); `h` is kept.
    pub fn relative_to(&self, norms: &ErrorReport) -> ErrorReport {
        let q = |e: f64, n: f64| if n > 0.0 { e / n } else { e };
        ErrorReport {
            h: self.h,
            sigma: q(self.sigma, norms.sigma),
            u: q(self.u, norms.u),
            gamma: q(self.gamma, norms.gamma),
            p: q(self.p, norms.p),
            rho: q(self.rho, norms.rho),
            phi: q(self.phi, norms.phi),
        }
    }
}

#[derive(Default, Clone, Copy)]
struct Sums {
    sigma_l2: f64,
    div_sigma: f64,
    u6: f64,
    gamma: f64,
    p: f64,
    rho_l2: f64,
    div_rho: f64,
    phi6: f64,
}

impl std::ops::Add for Sums {
    type Output = Sums;
    fn add(self, o: Sums) -> Sums {
        Sums {
            sigma_l2: self.sigma_l2 + o.sigma_l2,
            div_sigma: self.div_sigma + o.div_sigma,
            u6: self.u6 + o.u6,
            gamma: self.gamma + o.gamma,
            p: self.p + o.p,
            rho_l2: self.rho_l2 + o.rho_l2,
            div_rho: self.div_rho + o.div_rho,
            phi6: self.phi6 + o.phi6,
        }
    }
}

pub fn compute_errors(
    disc: &Discretization<'_>,
    solution: &DiscreteSolution,
    exact: &dyn ExactSolution,
) -> Result<ErrorReport> {
    let cells = project_cells(disc, solution)?;
    let r = disc.r();
    let per_cell: Vec<Sums> = cells
        .par_iter()
        .enumerate()
        .map(|(c, f)| {
            let sp = &disc.spaces[c];
            let b = &sp.basis;
            let b2 = b.with_degree(2 * r);
            let mut s = Sums::default();
            for (x, w) in sp.quad.iter() {
                s.sigma_l2 += w * (exact.sigma(x) - tensor_at(b, &f.sigma, x)).norm_squared();
                s.div_sigma += w
                    * (exact.div_sigma(x) - b.eval_vector(f.div_sigma.as_slice(), x))
                        .norm()
                        .powf(1.2);
                s.u6 += w
                    * (exact.velocity(x) - b.eval_vector(f.u.as_slice(), x))
                        .norm()
                        .powi(6);
                s.gamma +=
                    w * 2.0 * (exact.vorticity(x) - b.eval_poly(f.gamma.as_slice(), x)).powi(2);
                s.p += w * (exact.pressure(x) - b2.eval_poly(f.pressure.as_slice(), x)).powi(2);
                s.rho_l2 += w * (exact.rho(x) - b.eval_vector(f.rho.as_slice(), x)).norm_squared();
                s.div_rho += w
                    * (exact.div_rho(x) - b.eval_poly(f.div_rho.as_slice(), x))
                        .abs()
                        .powf(1.2);
                s.phi6 += w * (exact.temperature(x) - b.eval_poly(f.phi.as_slice(), x)).powi(6);
            }
            s
        })
        .collect();
    let s = per_cell.into_iter().fold(Sums::default(), |a, b| a + b);
    Ok(ErrorReport {
        h: disc.mesh.h(),
        sigma: s.sigma_l2.sqrt() + s.div_sigma.powf(1.0 / 1.2),
        u: s.u6.powf(1.0 / 6.0),
        gamma: s.gamma.sqrt(),
        p: s.p.sqrt(),
        rho: s.rho_l2.sqrt() + s.div_rho.powf(1.0 / 1.2),
        phi: s.phi6.powf(1.0 / 6.0),
    })
}

/// Norms of the exact fields, measured exactly like [`compute_errors`] measures errors.
pub fn exact_norms(disc: &Discretization<'_>, exact: &dyn ExactSolution) -> Result<ErrorReport> {
    compute_errors(disc, &DiscreteSolution::zeros(&disc.dofmap), exact)
}

/// Boundary heat flux `Σ_e ∫_e ρ_h·n` over all boundary edges, and `Σ_e |∫_e ρ_h·n|`.
pub fn boundary_flux(disc: &Discretization<'_>, solution: &DiscreteSolution) -> (f64, f64) {
    let r1 = disc.r() + 1;
    let (mut sum, mut abs) = (0.0, 0.0);
    for (e, _) in disc.mesh.boundary_edges() {
        let v = disc.mesh.boundary_orientation(e) * solution.heat[e * r1];
        sum += v;
        abs += v.abs();
    }
    (sum, abs)
}

/// Largest cell value of `‖div σ_h + 𝒫_r(s_b φ_h g + f)‖_{0,E}`, the discrete momentum balance.
pub fn momentum_balance(
    disc: &Discretization<'_>,
    problem: &Problem,
    solution: &DiscreteSolution,
) -> Result<f64> {
    let d = &disc.dofmap;
    let g = problem.coefficients.g_eff();
    let vals = (0..d.n_cells)
        .into_par_iter()
        .map(|c| {
            let sp = &disc.spaces[c];
            let div = &sp.div_t * solution.sigma_local(d, disc.mesh, c);
            let phi = solution.phi_cell(d, c);
            let load = crate::polyspace::l2_project_vector(&sp.basis, &sp.quad, |x| {
                g * sp.basis.eval_poly(phi, x) + problem.momentum_source(x)
            })?;
            let res = div + load;
            Ok(sp
                .quad
                .integrate(|x| sp.basis.eval_vector(res.as_slice(), x).norm_squared())
                .sqrt())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// Cell-wise maximum of `|u_h|` sampled at the quadrature points.
pub fn max_velocity(disc: &Discretization<'_>, solution: &DiscreteSolution) -> f64 {
    let d = &disc.dofmap;
    (0..d.n_cells)
        .map(|c| {
            let sp = &disc.spaces[c];
            let u = solution.u_cell(d, c);
            sp.quad
                .iter()
                .map(|(x, _)| sp.basis.eval_vector(u, x).norm())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Evaluates a vector polynomial of a cell at its centroid.
pub(crate) fn cell_mean_vector(
    disc: &Discretization<'_>,
    c: usize,
    coeffs: &DVector<f64>,
) -> Vector2<f64> {
    let sp = &disc.spaces[c];
    let m = sp.monomial_integrals();
    let pr = m.len();
    Vector2::new(
        m.dot(&coeffs.rows(0, pr)) / sp.area,
        m.dot(&coeffs.rows(pr, pr)) / sp.area,
    )
}
