//! Scaled monomial bases, polygon quadrature, Gram matrices and L² projections.
//!
//! Monomials of degree ≤ ℓ are ordered by total degree, then by the power of
//! `y`: index `d(d+1)/2 + b` for `m = X^a Y^b`, `d = a + b`. Vector
//! coefficients are stored component-major (`j·π_ℓ + α`) and tensor
//! coefficients row-major (`(2i + j)·π_ℓ + α`).

mod quadrature;

pub use quadrature::{
    gauss_legendre, legendre, quad_rule, reference_triangle_rule, triangulate, QuadratureRule,
};

use crate::mesh::Polygon;
use crate::{Error, Point, Result};
use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

/// `(ℓ+1)(ℓ+2)/2`, the dimension of scalar polynomials of degree ≤ ℓ.
pub const fn dim(l: usize) -> usize {
    (l + 1) * (l + 2) / 2
}

/// Exponent pairs `(a, b)` in basis order.
pub fn exponents(l: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::with_capacity(dim(l));
    for d in 0..=l {
        for b in 0..=d {
            e.push((d - b, b));
        }
    }
    e
}

pub const fn index(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledMonomialBasis {
    pub center: Point,
    pub h: f64,
    pub degree: usize,
}

impl ScaledMonomialBasis {
    /// Basis centred at the polygon centroid and scaled by its diameter.
    pub fn new(poly: &Polygon, degree: usize) -> Self {
        Self {
            center: poly.centroid(),
            h: poly.diameter(),
            degree,
        }
    }

    pub fn with_degree(&self, degree: usize) -> Self {
        Self { degree, ..*self }
    }

    pub fn dim(&self) -> usize {
        dim(self.degree)
    }

    pub fn eval_into(&self, p: Point, out: &mut [f64]) {
        let x = (p.x - self.center.x) / self.h;
        let y = (p.y - self.center.y) / self.h;
        let l = self.degree;
        let mut k = 0;
        for d in 0..=l {
            for b in 0..=d {
                out[k] = x.powi((d - b) as i32) * y.powi(b as i32);
                k += 1;
            }
        }
    }

    pub fn eval(&self, p: Point) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        self.eval_into(p, &mut v);
        v
    }

    /// Gradients `(∂x m_α, ∂y m_α)`.
    pub fn grad_into(&self, p: Point, gx: &mut [f64], gy: &mut [f64]) {
        let x = (p.x - self.center.x) / self.h;
        let y = (p.y - self.center.y) / self.h;
        let mut k = 0;
        for d in 0..=self.degree {
            for b in 0..=d {
                let a = d - b;
                gx[k] = if a > 0 {
                    a as f64 * x.powi(a as i32 - 1) * y.powi(b as i32) / self.h
                } else {
                    0.0
                };
                gy[k] = if b > 0 {
                    b as f64 * x.powi(a as i32) * y.powi(b as i32 - 1) / self.h
                } else {
                    0.0
                };
                k += 1;
            }
        }
    }

    pub fn eval_poly(&self, coeffs: &[f64], p: Point) -> f64 {
        let m = self.eval(p);
        m.iter().zip(coeffs).map(|(a, b)| a * b).sum()
    }

    pub fn eval_vector(&self, coeffs: &[f64], p: Point) -> Vector2<f64> {
        let n = self.dim();
        let m = self.eval(p);
        let dot = |c: &[f64]| m.iter().zip(c).map(|(a, b)| a * b).sum::<f64>();
        Vector2::new(dot(&coeffs[..n]), dot(&coeffs[n..2 * n]))
    }

    pub fn eval_tensor(&self, coeffs: &[f64], p: Point) -> Matrix2<f64> {
        let n = self.dim();
        let m = self.eval(p);
        let dot = |c: &[f64]| m.iter().zip(c).map(|(a, b)| a * b).sum::<f64>();
        Matrix2::new(
            dot(&coeffs[..n]),
            dot(&coeffs[n..2 * n]),
            dot(&coeffs[2 * n..3 * n]),
            dot(&coeffs[3 * n..4 * n]),
        )
    }

    /// Matrix of `∇` from degree-`ℓ` scalar coefficients to degree-`(ℓ-1)` vector
    /// coefficients (`2·dim(ℓ-1) × dim(ℓ)`).
    pub fn gradient_matrix(&self) -> DMatrix<f64> {
        let l = self.degree;
        assert!(l >= 1);
        let lo = dim(l - 1);
        let mut g = DMatrix::zeros(2 * lo, dim(l));
        for (k, (a, b)) in exponents(l).into_iter().enumerate() {
            if a > 0 {
                g[(index(a - 1, b), k)] = a as f64 / self.h;
            }
            if b > 0 {
                g[(lo + index(a, b - 1), k)] = b as f64 / self.h;
            }
        }
        g
    }
}

/// `H_{αβ} = ∫ m_α m_β`.
pub fn gram_matrix(basis: &ScaledMonomialBasis, quad: &QuadratureRule) -> DMatrix<f64> {
    weighted_gram(basis, quad, |_| 1.0)
}

/// `∫ w m_α m_β`.
pub fn weighted_gram<W: Fn(Point) -> f64>(
    basis: &ScaledMonomialBasis,
    quad: &QuadratureRule,
    weight: W,
) -> DMatrix<f64> {
    let values: Vec<f64> = quad.points.iter().map(|&p| weight(p)).collect();
    weighted_gram_at(basis, quad, &values)
}

/// `∫ w m_α m_β` with `w` given at the quadrature points.
pub fn weighted_gram_at(
    basis: &ScaledMonomialBasis,
    quad: &QuadratureRule,
    values: &[f64],
) -> DMatrix<f64> {
    let n = basis.dim();
    let mut h = DMatrix::zeros(n, n);
    let mut m = vec![0.0; n];
    for ((p, w), v) in quad.iter().zip(values) {
        basis.eval_into(p, &mut m);
        let ww = w * v;
        for i in 0..n {
            let wi = ww * m[i];
            for j in 0..=i {
                h[(i, j)] += wi * m[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            h[(j, i)] = h[(i, j)];
        }
    }
    h
}

fn solve_gram(h: DMatrix<f64>, rhs: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = h.cholesky().ok_or(Error::SingularGram)?;
    Ok(chol.solve(&rhs))
}

/// Coefficients of the L² projection onto `P_ℓ(E)` of `f`.
pub fn l2_project<F: Fn(Point) -> f64>(
    basis: &ScaledMonomialBasis,
    quad: &QuadratureRule,
    f: F,
) -> Result<DVector<f64>> {
    let n = basis.dim();
    let mut b = DMatrix::zeros(n, 1);
    let mut m = vec![0.0; n];
    for (p, w) in quad.iter() {
        basis.eval_into(p, &mut m);
        let fw = w * f(p);
        for i in 0..n {
            b[(i, 0)] += fw * m[i];
        }
    }
    Ok(solve_gram(gram_matrix(basis, quad), b)?
        .column(0)
        .into_owned())
}

/// Componentwise projection onto `𝐏_ℓ(E)`; coefficients `[x-part, y-part]`.
pub fn l2_project_vector<F: Fn(Point) -> Vector2<f64>>(
    basis: &ScaledMonomialBasis,
    quad: &QuadratureRule,
    f: F,
) -> Result<DVector<f64>> {
    let n = basis.dim();
    let mut b = DMatrix::zeros(n, 2);
    let mut m = vec![0.0; n];
    for (p, w) in quad.iter() {
        basis.eval_into(p, &mut m);
        let v = f(p) * w;
        for i in 0..n {
            b[(i, 0)] += v.x * m[i];
            b[(i, 1)] += v.y * m[i];
        }
    }
    let c = solve_gram(gram_matrix(basis, quad), b)?;
    Ok(DVector::from_iterator(2 * n, c.iter().copied()))
}

/// Componentwise projection onto `ℙ_ℓ(E)`; coefficients row-major by component.
pub fn l2_project_tensor<F: Fn(Point) -> Matrix2<f64>>(
    basis: &ScaledMonomialBasis,
    quad: &QuadratureRule,
    f: F,
) -> Result<DVector<f64>> {
    let n = basis.dim();
    let mut b = DMatrix::zeros(n, 4);
    let mut m = vec![0.0; n];
    for (p, w) in quad.iter() {
        basis.eval_into(p, &mut m);
        let t = f(p) * w;
        let comps = [t[(0, 0)], t[(0, 1)], t[(1, 0)], t[(1, 1)]];
        for i in 0..n {
            for (c, v) in comps.iter().enumerate() {
                b[(i, c)] += v * m[i];
            }
        }
    }
    let c = solve_gram(gram_matrix(basis, quad), b)?;
    Ok(DVector::from_iterator(4 * n, c.iter().copied()))
}

/// Basis of the L²(E)-orthogonal complement of `∇P_{r+1}(E)` in `𝐏_r(E)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerpBasis {
    pub degree: usize,
    /// Vector monomial coefficients, one column per member; members are
    /// mutually orthogonal with `∫_E |p|² = |E|`.
    pub coeffs: DMatrix<f64>,
}

impl PerpBasis {
    pub fn len(&self) -> usize {
        self.coeffs.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.ncols() == 0
    }

    /// Tensor analogue: one copy of every member per tensor row.
    pub fn tensor_coeffs(&self) -> DMatrix<f64> {
        let (rows, cols) = self.coeffs.shape();
        let mut t = DMatrix::zeros(2 * rows, 2 * cols);
        t.view_mut((0, 0), (rows, cols)).copy_from(&self.coeffs);
        t.view_mut((rows, cols), (rows, cols))
            .copy_from(&self.coeffs);
        t
    }
}

/// `2π_r − (π_{r+1} − 1)`.
pub const fn perp_dim(r: usize) -> usize {
    2 * dim(r) - (dim(r + 1) - 1)
}

/// Computes the complement by pivoted Gram–Schmidt of the vector monomials
/// against the gradient space. `quad` must be exact to degree `2r`.
pub fn perp_basis(basis: &ScaledMonomialBasis, quad: &QuadratureRule) -> PerpBasis {
    let r = basis.degree;
    let n = dim(r);
    let target = perp_dim(r);
    let h = gram_matrix(basis, quad);
    let area: f64 = quad.weights.iter().sum();
    let mut mass = DMatrix::zeros(2 * n, 2 * n);
    mass.view_mut((0, 0), (n, n)).copy_from(&h);
    mass.view_mut((n, n), (n, n)).copy_from(&h);
    let inner = |a: &DVector<f64>, b: &DVector<f64>| a.dot(&(&mass * b));

    let grad = basis.with_degree(r + 1).gradient_matrix();
    let mut q: Vec<DVector<f64>> = Vec::new();
    for k in 1..grad.ncols() {
        let mut v = grad.column(k).into_owned();
        for _ in 0..2 {
            for u in &q {
                let c = inner(u, &v);
                v -= u * c;
            }
        }
        let nv = inner(&v, &v).sqrt();
        q.push(v / nv);
    }

    let mut members: Vec<DVector<f64>> = Vec::new();
    let mut candidates: Vec<DVector<f64>> = (0..2 * n)
        .map(|k| {
            let mut e = DVector::zeros(2 * n);
            e[k] = 1.0 / mass[(k, k)].sqrt();
            e
        })
        .collect();
    while members.len() < target {
        let mut best = (0, -1.0, DVector::zeros(2 * n));
        for (k, c) in candidates.iter().enumerate() {
            let mut v = c.clone();
            for _ in 0..2 {
                for u in q.iter().chain(members.iter()) {
                    let s = inner(u, &v);
                    v -= u * s;
                }
            }
            let nv = inner(&v, &v).sqrt();
            if nv > best.1 {
                best = (k, nv, v);
            }
        }
        let (k, nv, v) = best;
        candidates.remove(k);
        members.push(v / nv);
    }
    let mut coeffs = DMatrix::zeros(2 * n, target);
    for (j, m) in members.iter().enumerate() {
        coeffs.set_column(j, &(m * area.sqrt()));
    }
    PerpBasis { degree: r, coeffs }
}
