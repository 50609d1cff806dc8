//! Local virtual element spaces on one polygon.
//!
//! Vector space DoFs, in order:
//! * edge moments `∫_e (η·n) P_k(s)` for each local edge and `k ≤ r`, where
//!   `s ∈ [-1, 1]` runs along the counter-clockwise edge direction;
//! * gradient moments `∫_E η·∇m_β` for the non-constant monomials of degree ≤ r;
//! * complement moments `h_E⁻¹ ∫_E η·p_j` against [`PerpBasis`] members.
//!
//! The tensor space is two row-wise copies. Tensor DoFs are laid out as edge
//! blocks `e·2(r+1) + i(r+1) + k` for row `i`, then interior blocks
//! `2·d_E(r+1) + i·n_int + m`.

pub(crate) mod forms;

pub use forms::{local_forms, LocalFormMatrices, LocalState};

use crate::mesh::Polygon;
use crate::polyspace::{
    dim, gauss_legendre, gram_matrix, legendre, perp_basis, perp_dim, quad_rule, PerpBasis,
    QuadratureRule, ScaledMonomialBasis,
};
use crate::{Error, Point, Result};
use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalEdge {
    pub a: Point,
    pub b: Point,
    pub length: f64,
    /// Outward unit normal.
    pub normal: Point,
}

impl LocalEdge {
    /// Gauss points `(x, s, weight)` with `∫_e f ≈ Σ w f(x)`.
    pub fn gauss(&self, n: usize) -> Vec<(Point, f64, f64)> {
        gauss_legendre(n)
            .iter()
            .map(|&(s, w)| {
                (
                    self.a + (self.b - self.a) * (0.5 * (s + 1.0)),
                    s,
                    0.5 * w * self.length,
                )
            })
            .collect()
    }
}

/// Quadrature used for interpolating smooth (non-polynomial) fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterpolationRule {
    pub edge_points: usize,
    pub cell_degree: usize,
}

impl Default for InterpolationRule {
    fn default() -> Self {
        Self {
            edge_points: 12,
            cell_degree: 20,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LocalVemSpace {
    pub r: usize,
    pub polygon: Polygon,
    pub basis: ScaledMonomialBasis,
    pub area: f64,
    /// Cell rule exact to degree `2r + 6`.
    pub quad: QuadratureRule,
    pub edges: Vec<LocalEdge>,
    pub perp: PerpBasis,
    /// `∫ m_α m_β` over `P_r`.
    pub gram: DMatrix<f64>,
    /// DoFs → `P_r` coefficients of `div η` (`π_r × n_v`).
    pub div: DMatrix<f64>,
    /// DoFs → `𝐏_r` coefficients of the L² projection (`2π_r × n_v`).
    pub proj: DMatrix<f64>,
    /// DoFs of the vector monomials (`n_v × 2π_r`).
    pub dof_of_monomials: DMatrix<f64>,
    /// `(I − Π)ᵀ(I − Π)` with unit scale.
    pub stab: DMatrix<f64>,
    pub div_t: DMatrix<f64>,
    pub proj_t: DMatrix<f64>,
    pub stab_t: DMatrix<f64>,
}

impl LocalVemSpace {
    pub fn new(polygon: &Polygon, r: usize) -> Result<Self> {
        let basis = ScaledMonomialBasis::new(polygon, r);
        let quad = quad_rule(polygon, 2 * r + 6)?;
        let area = polygon.area();
        let h = basis.h;
        let n = polygon.n_vertices();
        let edges: Vec<LocalEdge> = (0..n)
            .map(|j| {
                let (a, b) = polygon.edge(j);
                let d = b - a;
                let length = d.norm();
                LocalEdge {
                    a,
                    b,
                    length,
                    normal: Point::new(d.y, -d.x) / length,
                }
            })
            .collect();
        let perp = perp_basis(&basis, &quad);
        let pr = dim(r);
        let pr1 = dim(r + 1);
        let ne = n * (r + 1);
        let nv = ne + (pr - 1) + perp.len();

        let b1 = basis.with_degree(r + 1);
        let gram1 = gram_matrix(&b1, &quad);
        let gram = gram1.view((0, 0), (pr, pr)).into_owned();
        let chol = gram.clone().cholesky().ok_or(Error::SingularGram)?;

        // edge moments ∫_e P_k m_α for α of degree ≤ r + 1
        let mut edge_mom = vec![DMatrix::<f64>::zeros(r + 1, pr1); n];
        let mut m1 = vec![0.0; pr1];
        for (j, e) in edges.iter().enumerate() {
            for (x, s, w) in e.gauss(r + 3) {
                b1.eval_into(x, &mut m1);
                for k in 0..=r {
                    let lk = legendre(k, s) * w;
                    for a in 0..pr1 {
                        edge_mom[j][(k, a)] += lk * m1[a];
                    }
                }
            }
        }
        let ck = |k: usize, len: f64| (2 * k + 1) as f64 / len;

        // divergence: H div = R
        let mut rmat = DMatrix::zeros(pr, nv);
        for (j, e) in edges.iter().enumerate() {
            for k in 0..=r {
                for b in 0..pr {
                    rmat[(b, j * (r + 1) + k)] = ck(k, e.length) * edge_mom[j][(k, b)];
                }
            }
        }
        for b in 1..pr {
            rmat[(b, ne + b - 1)] = -1.0;
        }
        let div = chol.solve(&rmat);

        // projection onto ∇P_{r+1} ⊕ P_r^⊥
        let grad = b1.gradient_matrix();
        let np = perp.len();
        let mut t = DMatrix::zeros(2 * pr, 2 * pr);
        t.view_mut((0, 0), (2 * pr, pr1 - 1))
            .copy_from(&grad.view((0, 1), (2 * pr, pr1 - 1)));
        t.view_mut((0, pr1 - 1), (2 * pr, np))
            .copy_from(&perp.coeffs);
        let mut mass = DMatrix::zeros(2 * pr, 2 * pr);
        mass.view_mut((0, 0), (pr, pr)).copy_from(&gram);
        mass.view_mut((pr, pr), (pr, pr)).copy_from(&gram);
        let mut rhs = DMatrix::zeros(2 * pr, nv);
        let h10 = gram1.view((0, 0), (pr1, pr)).into_owned();
        let hdiv = &h10 * &div;
        for a in 1..pr1 {
            for (j, e) in edges.iter().enumerate() {
                for k in 0..=r {
                    rhs[(a - 1, j * (r + 1) + k)] += ck(k, e.length) * edge_mom[j][(k, a)];
                }
            }
            for c in 0..nv {
                rhs[(a - 1, c)] -= hdiv[(a, c)];
            }
        }
        for p in 0..np {
            rhs[(pr1 - 1 + p, ne + pr - 1 + p)] = h;
        }
        let tmt = t.transpose() * &mass * &t;
        let lu = tmt.lu();
        let sol = lu.solve(&rhs).ok_or(Error::RankDeficiency(2 * pr))?;
        let proj = &t * sol;

        // DoFs of vector monomials
        let mut dmat = DMatrix::zeros(nv, 2 * pr);
        for (j, e) in edges.iter().enumerate() {
            for k in 0..=r {
                for a in 0..pr {
                    dmat[(j * (r + 1) + k, a)] = e.normal.x * edge_mom[j][(k, a)];
                    dmat[(j * (r + 1) + k, pr + a)] = e.normal.y * edge_mom[j][(k, a)];
                }
            }
        }
        let (mut gx, mut gy, mut m) = (vec![0.0; pr], vec![0.0; pr], vec![0.0; pr]);
        for (x, w) in quad.iter() {
            basis.eval_into(x, &mut m);
            basis.grad_into(x, &mut gx, &mut gy);
            for b in 1..pr {
                for a in 0..pr {
                    dmat[(ne + b - 1, a)] += w * m[a] * gx[b];
                    dmat[(ne + b - 1, pr + a)] += w * m[a] * gy[b];
                }
            }
        }
        let mp = &mass * &perp.coeffs;
        for p in 0..np {
            for c in 0..2 * pr {
                dmat[(ne + pr - 1 + p, c)] = mp[(c, p)] / h;
            }
        }

        let resid = DMatrix::identity(nv, nv) - &dmat * &proj;
        let stab = resid.transpose() * &resid;

        let mut space = Self {
            r,
            polygon: polygon.clone(),
            basis,
            area,
            quad,
            edges,
            perp,
            gram,
            div,
            proj,
            dof_of_monomials: dmat,
            stab,
            div_t: DMatrix::zeros(0, 0),
            proj_t: DMatrix::zeros(0, 0),
            stab_t: DMatrix::zeros(0, 0),
        };
        let nt = space.n_tensor();
        let mut div_t = DMatrix::zeros(2 * pr, nt);
        let mut proj_t = DMatrix::zeros(4 * pr, nt);
        let mut stab_t = DMatrix::zeros(nt, nt);
        for i in 0..2 {
            for d in 0..nv {
                let td = space.tensor_index(i, d);
                for b in 0..pr {
                    div_t[(i * pr + b, td)] = space.div[(b, d)];
                }
                for c in 0..2 * pr {
                    proj_t[(i * 2 * pr + c, td)] = space.proj[(c, d)];
                }
                for d2 in 0..nv {
                    stab_t[(td, space.tensor_index(i, d2))] = space.stab[(d, d2)];
                }
            }
        }
        space.div_t = div_t;
        space.proj_t = proj_t;
        space.stab_t = stab_t;
        Ok(space)
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Polynomial dimension `π_r`.
    pub fn n_poly(&self) -> usize {
        dim(self.r)
    }

    pub fn n_edge_dofs(&self) -> usize {
        self.edges.len() * (self.r + 1)
    }

    /// Interior DoFs per vector (row).
    pub fn n_interior(&self) -> usize {
        dim(self.r) - 1 + perp_dim(self.r)
    }

    pub fn n_vector(&self) -> usize {
        self.n_edge_dofs() + self.n_interior()
    }

    pub fn n_tensor(&self) -> usize {
        2 * self.n_vector()
    }

    /// Tensor DoF index of vector DoF `d` in row `i`.
    pub fn tensor_index(&self, i: usize, d: usize) -> usize {
        let r1 = self.r + 1;
        let ne = self.n_edge_dofs();
        if d < ne {
            (d / r1) * 2 * r1 + i * r1 + d % r1
        } else {
            2 * ne + i * self.n_interior() + (d - ne)
        }
    }

    pub fn stabilization(&self, scale: f64) -> DMatrix<f64> {
        &self.stab * scale
    }

    pub fn stabilization_tensor(&self, scale: f64) -> DMatrix<f64> {
        &self.stab_t * scale
    }

    /// DoFs of a smooth vector field.
    pub fn interpolate_vector<F: Fn(Point) -> Vector2<f64>>(
        &self,
        f: F,
        rule: InterpolationRule,
    ) -> Result<DVector<f64>> {
        let quad = quad_rule(&self.polygon, rule.cell_degree)?;
        Ok(self.vector_dofs_with(&f, rule.edge_points, &quad))
    }

    /// DoFs of a smooth tensor field.
    pub fn interpolate_tensor<F: Fn(Point) -> Matrix2<f64>>(
        &self,
        f: F,
        rule: InterpolationRule,
    ) -> Result<DVector<f64>> {
        let quad = quad_rule(&self.polygon, rule.cell_degree)?;
        let mut out = DVector::zeros(self.n_tensor());
        for i in 0..2 {
            let row = |p: Point| {
                let t = f(p);
                Vector2::new(t[(i, 0)], t[(i, 1)])
            };
            let v = self.vector_dofs_with(&row, rule.edge_points, &quad);
            for (d, x) in v.iter().enumerate() {
                out[self.tensor_index(i, d)] = *x;
            }
        }
        Ok(out)
    }

    fn vector_dofs_with(
        &self,
        f: &dyn Fn(Point) -> Vector2<f64>,
        edge_points: usize,
        quad: &QuadratureRule,
    ) -> DVector<f64> {
        let r = self.r;
        let pr = dim(r);
        let ne = self.n_edge_dofs();
        let mut dofs = DVector::zeros(self.n_vector());
        for (j, e) in self.edges.iter().enumerate() {
            for (x, s, w) in e.gauss(edge_points) {
                let fn_ = f(x).dot(&e.normal) * w;
                for k in 0..=r {
                    dofs[j * (r + 1) + k] += fn_ * legendre(k, s);
                }
            }
        }
        let (mut gx, mut gy, mut m) = (vec![0.0; pr], vec![0.0; pr], vec![0.0; pr]);
        let np = self.perp.len();
        for (x, w) in quad.iter() {
            let v = f(x) * w;
            self.basis.grad_into(x, &mut gx, &mut gy);
            for b in 1..pr {
                dofs[ne + b - 1] += v.x * gx[b] + v.y * gy[b];
            }
            if np > 0 {
                self.basis.eval_into(x, &mut m);
                for p in 0..np {
                    let c = self.perp.coeffs.column(p);
                    let (mut px, mut py) = (0.0, 0.0);
                    for a in 0..pr {
                        px += c[a] * m[a];
                        py += c[pr + a] * m[a];
                    }
                    dofs[ne + pr - 1 + p] += (v.x * px + v.y * py) / self.basis.h;
                }
            }
        }
        dofs
    }
}
