//! Residual and exact Jacobian of the fully coupled discrete system.

use super::{DiscreteSolution, Discretization, LinearSystem};
use crate::model::Problem;
use crate::vemlocal::{local_forms, LocalState};
use crate::Result;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

struct CellBlock {
    map: Vec<(usize, f64)>,
    residual: DVector<f64>,
    jacobian: Option<DMatrix<f64>>,
}

/// Coupled residual `F(x)`; rows of eliminated ρ DoFs hold `x_i`.
pub fn coupled_residual(
    disc: &Discretization<'_>,
    problem: &Problem,
    state: &DiscreteSolution,
) -> Result<DVector<f64>> {
    Ok(assemble(disc, problem, state, false)?.0)
}

/// Residual and Jacobian at `state`, in the coupled ordering (flow block, heat block).
pub fn assemble_coupled(
    disc: &Discretization<'_>,
    problem: &Problem,
    state: &DiscreteSolution,
) -> Result<(DVector<f64>, LinearSystem)> {
    let (res, jac) = assemble(disc, problem, state, true)?;
    Ok((res, jac.expect("jacobian requested")))
}

fn assemble(
    disc: &Discretization<'_>,
    problem: &Problem,
    state: &DiscreteSolution,
    with_jacobian: bool,
) -> Result<(DVector<f64>, Option<LinearSystem>)> {
    let d = &disc.dofmap;
    let blocks = (0..d.n_cells)
        .into_par_iter()
        .map(|c| cell_block(disc, problem, state, c, with_jacobian))
        .collect::<Result<Vec<_>>>()?;
    let n = d.coupled_dim();
    let mut residual = DVector::zeros(n);
    let mut sys = with_jacobian.then(|| LinearSystem::new(n));
    for b in blocks {
        for (a, &(ga, sa)) in b.map.iter().enumerate() {
            residual[ga] += sa * b.residual[a];
        }
        if let (Some(sys), Some(j)) = (sys.as_mut(), b.jacobian.as_ref()) {
            for (a, &(ga, sa)) in b.map.iter().enumerate() {
                for (bb, &(gb, sb)) in b.map.iter().enumerate() {
                    let v = j[(a, bb)];
                    if v != 0.0 {
                        sys.triplets.push((ga, gb, sa * sb * v));
                    }
                }
            }
        }
    }
    let constrained: Vec<usize> = d.constrained_rho.iter().map(|&i| d.flow_dim + i).collect();
    for &i in &constrained {
        residual[i] = state.heat[i - d.flow_dim];
    }
    if let Some(sys) = sys.as_mut() {
        sys.eliminate_with(&constrained, false);
        sys.rhs = -&residual;
    }
    Ok((residual, sys))
}

fn cell_block(
    disc: &Discretization<'_>,
    problem: &Problem,
    state: &DiscreteSolution,
    c: usize,
    with_jacobian: bool,
) -> Result<CellBlock> {
    let d = &disc.dofmap;
    let sp = &disc.spaces[c];
    let pr = d.n_poly;
    let (nt, nv) = (sp.n_tensor(), sp.n_vector());
    let (o_u, o_g) = (nt, nt + 2 * pr);
    let o_l = o_g + pr;
    let o_r = o_l + 1;
    let o_p = o_r + nv;
    let n_loc = o_p + pr;

    let mut map = d.sigma_map(disc.mesh, c);
    map.extend((0..2 * pr).map(|b| (d.u_start(c) + b, 1.0)));
    map.extend((0..pr).map(|b| (d.gamma_start(c) + b, 1.0)));
    map.push((d.lambda, 1.0));
    map.extend(
        d.rho_map(disc.mesh, c)
            .into_iter()
            .map(|(g, s)| (d.flow_dim + g, s)),
    );
    map.extend((0..pr).map(|b| (d.flow_dim + d.phi_start(c) + b, 1.0)));

    let u = DVector::from_column_slice(state.u_cell(d, c));
    let gamma = DVector::from_column_slice(state.gamma_cell(d, c));
    let phi = DVector::from_column_slice(state.phi_cell(d, c));
    let lambda = state.lambda(d);
    let sigma = state.sigma_local(d, disc.mesh, c);
    let rho = state.rho_local(d, disc.mesh, c);

    let f = local_forms(
        sp,
        problem,
        LocalState {
            phi: phi.as_slice(),
            z: u.as_slice(),
        },
        &disc.dirichlet_flags(c),
    )?;

    let mut res = DVector::zeros(n_loc);
    let r_tau = &f.a_s * &sigma
        + &f.o_s * &u
        + f.b_div.transpose() * &u
        + f.b_skw.transpose() * &gamma
        + &f.trace * lambda;
    res.rows_mut(0, nt).copy_from(&r_tau);
    res.rows_mut(o_u, 2 * pr)
        .copy_from(&(&f.b_div * &sigma - &f.f_s));
    res.rows_mut(o_g, pr).copy_from(&(&f.b_skw * &sigma));
    res[o_l] = f.trace.dot(&sigma);
    let r_eta = &f.a_t * &rho + &f.o_t * &phi + f.b_t.transpose() * &phi - &f.f_t;
    res.rows_mut(o_r, nv).copy_from(&r_eta);
    res.rows_mut(o_p, pr).copy_from(&(&f.b_t * &rho - &f.g_t));

    if !with_jacobian {
        return Ok(CellBlock {
            map,
            residual: res,
            jacobian: None,
        });
    }

    let mut j = DMatrix::zeros(n_loc, n_loc);
    j.view_mut((0, 0), (nt, nt)).copy_from(&f.a_s);
    j.view_mut((0, o_u), (nt, 2 * pr))
        .copy_from(&f.b_div.transpose());
    j.view_mut((0, o_g), (nt, pr))
        .copy_from(&f.b_skw.transpose());
    j.view_mut((0, o_l), (nt, 1)).copy_from(&f.trace);
    j.view_mut((o_u, 0), (2 * pr, nt)).copy_from(&f.b_div);
    j.view_mut((o_g, 0), (pr, nt)).copy_from(&f.b_skw);
    j.view_mut((o_l, 0), (1, nt))
        .copy_from(&f.trace.transpose());
    j.view_mut((o_r, o_r), (nv, nv)).copy_from(&f.a_t);
    j.view_mut((o_r, o_p), (nv, pr))
        .copy_from(&f.b_t.transpose());
    j.view_mut((o_p, o_r), (pr, nv)).copy_from(&f.b_t);

    // Quadrature-point contributions of the nonlinear terms.
    let coeffs = &problem.coefficients;
    let g = coeffs.g_eff();
    let pt = &sp.proj_t;
    let pv = &sp.proj;
    let sig_coef = pt * &sigma;
    let rho_coef = pv * &rho;
    let mut m = vec![0.0; pr];
    let mut psi = DMatrix::zeros(4, nt);
    let mut eta = DMatrix::zeros(2, nv);
    for (x, w) in sp.quad.iter() {
        sp.basis.eval_into(x, &mut m);
        let dot = |coef: &[f64]| -> f64 { m.iter().zip(coef).map(|(a, b)| a * b).sum() };
        let phi_q = dot(phi.as_slice());
        let uq = if problem.convection {
            [dot(&u.as_slice()[..pr]), dot(&u.as_slice()[pr..])]
        } else {
            [0.0, 0.0]
        };
        let (mu, dmu) = coeffs.mu_eff(phi_q)?;
        let (ka, dka) = coeffs.kappa_eff(phi_q)?;
        let mut s = [0.0; 4];
        for (cc, sc) in s.iter_mut().enumerate() {
            *sc = dot(&sig_coef.as_slice()[cc * pr..(cc + 1) * pr]);
        }
        let rq = [
            dot(&rho_coef.as_slice()[..pr]),
            dot(&rho_coef.as_slice()[pr..]),
        ];
        psi.fill(0.0);
        for i in 0..nt {
            for cc in 0..4 {
                psi[(cc, i)] = (0..pr).map(|a| pt[(cc * pr + a, i)] * m[a]).sum();
            }
        }
        eta.fill(0.0);
        for i in 0..nv {
            for cc in 0..2 {
                eta[(cc, i)] = (0..pr).map(|a| pv[(cc * pr + a, i)] * m[a]).sum();
            }
        }
        // (Σ + u⊗u)ᵈ with Σ = 𝓟𝓟σ.
        let mut t = [
            s[0] + uq[0] * uq[0],
            s[1] + uq[0] * uq[1],
            s[2] + uq[1] * uq[0],
            s[3] + uq[1] * uq[1],
        ];
        let tr = 0.5 * (t[0] + t[3]);
        t[0] -= tr;
        t[3] -= tr;
        for i in 0..nt {
            let psi_i = [psi[(0, i)], psi[(1, i)], psi[(2, i)], psi[(3, i)]];
            // ∂/∂u: (δ⊗u + u⊗δ)ᵈ : Ψ_i; Ψ_i is paired with a deviator so the trace part drops.
            let pd = {
                let tr = 0.5 * (psi_i[0] + psi_i[3]);
                [psi_i[0] - tr, psi_i[1], psi_i[2], psi_i[3] - tr]
            };
            for jc in 0..2 {
                // (e_j⊗u + u⊗e_j) : Ψᵈ
                let mut v = 0.0;
                for a in 0..2 {
                    v += pd[jc * 2 + a] * uq[a] + pd[a * 2 + jc] * uq[a];
                }
                let v = w / mu * v;
                for (b, mb) in m.iter().enumerate() {
                    j[(i, o_u + jc * pr + b)] += v * mb;
                }
            }
            let tp: f64 = (0..4).map(|k| t[k] * psi_i[k]).sum();
            let v = -w * dmu / (mu * mu) * tp;
            for (b, mb) in m.iter().enumerate() {
                j[(i, o_p + b)] += v * mb;
            }
        }
        for (beta, mbeta) in m.iter().enumerate() {
            for (b, mb) in m.iter().enumerate() {
                j[(o_u + beta, o_p + b)] += w * g.x * mb * mbeta;
                j[(o_u + pr + beta, o_p + b)] += w * g.y * mb * mbeta;
            }
        }
        let flux = [rq[0] + uq[0] * phi_q, rq[1] + uq[1] * phi_q];
        for i in 0..nv {
            let e = [eta[(0, i)], eta[(1, i)]];
            for jc in 0..2 {
                if !problem.convection {
                    break;
                }
                let v = w / ka * phi_q * e[jc];
                for (b, mb) in m.iter().enumerate() {
                    j[(o_r + i, o_u + jc * pr + b)] += v * mb;
                }
            }
            let v = w
                * (-dka / (ka * ka) * (flux[0] * e[0] + flux[1] * e[1])
                    + (uq[0] * e[0] + uq[1] * e[1]) / ka);
            for (b, mb) in m.iter().enumerate() {
                j[(o_r + i, o_p + b)] += v * mb;
            }
        }
    }

    // Derivatives of the stabilization scales through 𝒫_0 φ_h.
    let ints = sp.monomial_integrals() / sp.area;
    let phi_bar = sp.mean(phi.as_slice());
    let (mu_bar, dmu_bar) = coeffs.mu_eff(phi_bar)?;
    let (ka_bar, dka_bar) = coeffs.kappa_eff(phi_bar)?;
    let s_sigma = &sp.stab_t * &sigma * (-dmu_bar / (mu_bar * mu_bar));
    let s_rho = &sp.stab * &rho * (-dka_bar / (ka_bar * ka_bar));
    for b in 0..pr {
        for i in 0..nt {
            j[(i, o_p + b)] += s_sigma[i] * ints[b];
        }
        for i in 0..nv {
            j[(o_r + i, o_p + b)] += s_rho[i] * ints[b];
        }
    }

    Ok(CellBlock {
        map,
        residual: res,
        jacobian: Some(j),
    })
}
