//! Element matrices of the discrete bilinear forms and load functionals.

use super::LocalVemSpace;
use crate::model::Problem;
use crate::polyspace::{legendre, weighted_gram_at};
use crate::Result;
use nalgebra::{DMatrix, DVector};

/// Element restrictions of the lagged temperature and velocity, as `P_r` and
/// `𝐏_r` monomial coefficients.
#[derive(Debug, Clone, Copy)]
pub struct LocalState<'a> {
    pub phi: &'a [f64],
    pub z: &'a [f64],
}

/// Rows index test functions, columns trial functions.
#[derive(Debug, Clone)]
pub struct LocalFormMatrices {
    /// `n_t × n_t`.
    pub a_s: DMatrix<f64>,
    /// `n_v × n_v`.
    pub a_t: DMatrix<f64>,
    /// `∫ v·div τ`, `2π × n_t`.
    pub b_div: DMatrix<f64>,
    /// `∫ ω : 𝓟𝓟τ` with `ω = w [[0,1],[-1,0]]`, `π × n_t`.
    pub b_skw: DMatrix<f64>,
    /// `∫ ψ div η`, `π × n_v`.
    pub b_t: DMatrix<f64>,
    /// `n_t × 2π`.
    pub o_s: DMatrix<f64>,
    /// `n_v × π`.
    pub o_t: DMatrix<f64>,
    /// `-∫ (s_b φ g + f)·v`.
    pub f_s: DVector<f64>,
    /// `⟨η·n, φ_D⟩` over Dirichlet edges, with local outward normals.
    pub f_t: DVector<f64>,
    /// `-∫ q ψ`.
    pub g_t: DVector<f64>,
    /// `∫ tr 𝓟𝓟τ`.
    pub trace: DVector<f64>,
}

/// `Q = I − ½ e eᵀ` on row-major tensor components, so `τ:Qζ = τᵈ:ζᵈ`.
pub(crate) const DEVIATOR: [[f64; 4]; 4] = [
    [0.5, 0.0, 0.0, -0.5],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [-0.5, 0.0, 0.0, 0.5],
];

/// `dev(z ⊗ e_j)` in row-major components.
pub(crate) fn dev_outer(z: [f64; 2], j: usize) -> [f64; 4] {
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    [
        z[0] * d(0, j) - 0.5 * z[j],
        z[0] * d(1, j),
        z[1] * d(0, j),
        z[1] * d(1, j) - 0.5 * z[j],
    ]
}

/// Kronecker product `Q ⊗ W` for the 4 tensor components.
pub(crate) fn kron4(q: &[[f64; 4]; 4], w: &DMatrix<f64>) -> DMatrix<f64> {
    let n = w.nrows();
    let mut k = DMatrix::zeros(4 * n, 4 * n);
    for (c, qc) in q.iter().enumerate() {
        for (c2, &v) in qc.iter().enumerate() {
            if v != 0.0 {
                k.view_mut((c * n, c2 * n), (n, n)).copy_from(&(w * v));
            }
        }
    }
    k
}

pub(crate) fn block_diag2(w: &DMatrix<f64>) -> DMatrix<f64> {
    let n = w.nrows();
    let mut k = DMatrix::zeros(2 * n, 2 * n);
    k.view_mut((0, 0), (n, n)).copy_from(w);
    k.view_mut((n, n), (n, n)).copy_from(w);
    k
}

impl LocalVemSpace {
    /// `∫_E m_α`.
    pub fn monomial_integrals(&self) -> DVector<f64> {
        self.gram.column(0).into_owned()
    }

    /// `𝒫_0 φ_h` for `P_r` coefficients.
    pub fn mean(&self, coeffs: &[f64]) -> f64 {
        self.monomial_integrals()
            .iter()
            .zip(coeffs)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / self.area
    }

    /// `∫ ω : 𝓟𝓟τ` rows from the Gram matrix and tensor projector.
    pub fn skew_block(&self) -> DMatrix<f64> {
        let pr = self.n_poly();
        let d = self.proj_t.rows(pr, pr) - self.proj_t.rows(2 * pr, pr);
        &self.gram * d
    }

    /// `∫ tr 𝓟𝓟τ`.
    pub fn trace_row(&self) -> DVector<f64> {
        let pr = self.n_poly();
        let s = self.proj_t.rows(0, pr) + self.proj_t.rows(3 * pr, pr);
        (self.monomial_integrals().transpose() * s).transpose()
    }
}

pub fn local_forms(
    space: &LocalVemSpace,
    problem: &Problem,
    state: LocalState<'_>,
    dirichlet_edges: &[bool],
) -> Result<LocalFormMatrices> {
    let coeffs = &problem.coefficients;
    let pr = space.n_poly();
    let basis = &space.basis;
    let quad = &space.quad;
    let nq = quad.len();

    let mut m = vec![0.0; pr];
    let mut inv_mu = Vec::with_capacity(nq);
    let mut inv_kappa = Vec::with_capacity(nq);
    let mut phi_q = Vec::with_capacity(nq);
    let mut z_q = Vec::with_capacity(nq);
    for (x, _) in quad.iter() {
        basis.eval_into(x, &mut m);
        let phi: f64 = m.iter().zip(state.phi).map(|(a, b)| a * b).sum();
        let zx: f64 = m.iter().zip(&state.z[..pr]).map(|(a, b)| a * b).sum();
        let zy: f64 = m.iter().zip(&state.z[pr..2 * pr]).map(|(a, b)| a * b).sum();
        inv_mu.push(1.0 / coeffs.mu_eff(phi)?.0);
        inv_kappa.push(1.0 / coeffs.kappa_eff(phi)?.0);
        phi_q.push(phi);
        z_q.push([zx, zy]);
    }
    let w_mu = weighted_gram_at(basis, quad, &inv_mu);
    let w_kappa = weighted_gram_at(basis, quad, &inv_kappa);

    let phi_bar = space.mean(state.phi);
    let mu_bar = coeffs.mu_eff(phi_bar)?.0;
    let kappa_bar = coeffs.kappa_eff(phi_bar)?.0;

    let pt = &space.proj_t;
    let pv = &space.proj;
    let a_s =
        pt.transpose() * kron4(&DEVIATOR, &w_mu) * pt + space.stabilization_tensor(1.0 / mu_bar);
    let a_t = pv.transpose() * block_diag2(&w_kappa) * pv + space.stabilization(1.0 / kappa_bar);

    let mut w_os = DMatrix::zeros(4 * pr, 2 * pr);
    let mut w_ot = DMatrix::zeros(2 * pr, pr);
    let mut f_s = DVector::zeros(2 * pr);
    let mut g_t = DVector::zeros(pr);
    let g = coeffs.g_eff();
    for (q, (x, w)) in quad.iter().enumerate() {
        basis.eval_into(x, &mut m);
        let z = z_q[q];
        if problem.convection && z != [0.0, 0.0] {
            for j in 0..2 {
                let dz = dev_outer(z, j);
                for (c, dzc) in dz.iter().enumerate() {
                    if *dzc == 0.0 {
                        continue;
                    }
                    let s = w * inv_mu[q] * dzc;
                    for a in 0..pr {
                        for b in 0..pr {
                            w_os[(c * pr + a, j * pr + b)] += s * m[a] * m[b];
                        }
                    }
                }
                let s = w * inv_kappa[q] * z[j];
                for a in 0..pr {
                    for b in 0..pr {
                        w_ot[(j * pr + a, b)] += s * m[a] * m[b];
                    }
                }
            }
        }
        let load = g * phi_q[q] + problem.momentum_source(x);
        let heat = problem.heat_source(x);
        for b in 0..pr {
            f_s[b] -= w * load.x * m[b];
            f_s[pr + b] -= w * load.y * m[b];
            g_t[b] -= w * heat * m[b];
        }
    }

    let r = space.r;
    let mut f_t = DVector::zeros(space.n_vector());
    for (j, e) in space.edges.iter().enumerate() {
        if !dirichlet_edges[j] {
            continue;
        }
        for (x, s, w) in e.gauss(12) {
            let v = problem.boundary_temperature.eval(x) * w;
            for k in 0..=r {
                f_t[j * (r + 1) + k] += (2 * k + 1) as f64 / e.length * legendre(k, s) * v;
            }
        }
    }

    Ok(LocalFormMatrices {
        a_s,
        a_t,
        b_div: block_diag2(&space.gram) * &space.div_t,
        b_skw: space.skew_block(),
        b_t: &space.gram * &space.div,
        o_s: pt.transpose() * w_os,
        o_t: pv.transpose() * w_ot,
        f_s,
        f_t,
        g_t,
        trace: space.trace_row(),
    })
}
