//! Gauss rules on intervals and triangles, and polygon quadrature by ear clipping.

use crate::mesh::Polygon;
use crate::{Error, Point, Result};
use gauss_quad::GaussLegendre;
use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

type Rule1d = Arc<Vec<(f64, f64)>>;
type TriangleRule = Arc<Vec<(f64, f64, f64)>>;

/// `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Rule1d {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule1d>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let rule = GaussLegendre::new(NonZeroUsize::new(n.max(1)).unwrap());
            let mut v: Vec<(f64, f64)> = rule.iter().map(|&(x, w)| (x, w)).collect();
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            Arc::new(v)
        })
        .clone()
}

/// Rule on the reference triangle `(0,0), (1,0), (0,1)` exact to `degree`, as
/// `(s, t, weight)` triples with weights summing to 1/2.
///
/// Collapsed (Duffy) product of Gauss–Legendre rules; the collapse Jacobian
/// `1 − t` raises the degree in `t` by one.
pub fn reference_triangle_rule(degree: usize) -> Arc<Vec<(f64, f64, f64)>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, TriangleRule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(r) = cache
        .lock()
        .expect("quadrature cache poisoned")
        .get(&degree)
    {
        return r.clone();
    }
    let gs = gauss_legendre((degree + 2) / 2);
    let gt = gauss_legendre((degree + 3) / 2);
    let mut pts = Vec::with_capacity(gs.len() * gt.len());
    for &(eta, wt) in gt.iter() {
        let t = 0.5 * (1.0 + eta);
        for &(xi, ws) in gs.iter() {
            let s = 0.5 * (1.0 + xi) * (1.0 - t);
            pts.push((s, t, 0.25 * ws * wt * (1.0 - t)));
        }
    }
    let r = Arc::new(pts);
    cache
        .lock()
        .expect("quadrature cache poisoned")
        .insert(degree, r.clone());
    r
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.points
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }

    pub fn integrate<F: Fn(Point) -> f64>(&self, f: F) -> f64 {
        self.iter().map(|(p, w)| w * f(p)).sum()
    }
}

fn cross(a: Point, b: Point) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Ear-clipping triangulation of a counter-clockwise simple polygon.
pub fn triangulate(poly: &Polygon) -> Result<Vec<[usize; 3]>> {
    let n = poly.n_vertices();
    if n < 3 {
        return Err(Error::TriangulationFailure(format!("{n} vertices")));
    }
    let v = &poly.vertices;
    let scale = poly.diameter();
    let eps = 1e-14 * scale * scale;
    let mut idx: Vec<usize> = (0..n).collect();
    let mut tris = Vec::with_capacity(n - 2);
    while idx.len() > 3 {
        let m = idx.len();
        let mut best: Option<(usize, f64)> = None;
        for k in 0..m {
            let (ia, ib, ic) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            let (a, b, c) = (v[ia], v[ib], v[ic]);
            let area = cross(b - a, c - a);
            if area <= eps {
                continue;
            }
            let blocked = idx.iter().any(|&j| {
                if j == ia || j == ib || j == ic {
                    return false;
                }
                let p = v[j];
                cross(b - a, p - a) >= -eps
                    && cross(c - b, p - b) >= -eps
                    && cross(a - c, p - c) >= -eps
            });
            if blocked {
                continue;
            }
            // prefer ears with the largest minimum angle proxy
            let q =
                area / ((b - a).norm_squared() + (c - b).norm_squared() + (a - c).norm_squared());
            if best.is_none_or(|(_, bq)| q > bq) {
                best = Some((k, q));
            }
        }
        let Some((k, _)) = best else {
            return Err(Error::TriangulationFailure("no ear found".into()));
        };
        tris.push([idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]]);
        idx.remove(k);
    }
    let (a, b, c) = (v[idx[0]], v[idx[1]], v[idx[2]]);
    if cross(b - a, c - a) <= eps {
        return Err(Error::TriangulationFailure(
            "degenerate final triangle".into(),
        ));
    }
    tris.push([idx[0], idx[1], idx[2]]);
    Ok(tris)
}

/// Quadrature on a polygon exact for polynomials of total degree `degree`.
pub fn quad_rule(poly: &Polygon, degree: usize) -> Result<QuadratureRule> {
    let tris = triangulate(poly)?;
    let reference = reference_triangle_rule(degree);
    let mut points = Vec::with_capacity(tris.len() * reference.len());
    let mut weights = Vec::with_capacity(points.capacity());
    for t in tris {
        let (a, b, c) = (
            poly.vertices[t[0]],
            poly.vertices[t[1]],
            poly.vertices[t[2]],
        );
        let jac = cross(b - a, c - a);
        for &(s, r, w) in reference.iter() {
            points.push(a + (b - a) * s + (c - a) * r);
            weights.push(w * jac);
        }
    }
    Ok(QuadratureRule {
        points,
        weights,
        degree,
    })
}

/// Legendre polynomial `P_k(s)` on `[-1, 1]`.
pub fn legendre(k: usize, s: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, s);
    if k == 0 {
        return p0;
    }
    for j in 1..k {
        let jf = j as f64;
        let p2 = ((2.0 * jf + 1.0) * s * p1 - jf * p0) / (jf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}
