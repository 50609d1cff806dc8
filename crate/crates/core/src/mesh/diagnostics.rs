//! Shape-regularity diagnostics.

use super::{cross, Polygon, PolygonalMesh};
use crate::Point;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshDiagnostics {
    pub h: f64,
    /// Minimum of `h_e / h_E` over all cells and their edges.
    pub min_edge_ratio: f64,
    /// Minimum over cells of `ρ_E / h_E`, where `ρ_E` is the radius of a disk
    /// contained in the kernel of `E` (so `E` is star-shaped with respect to it).
    pub star_shapedness: f64,
}

pub fn mesh_diagnostics(mesh: &PolygonalMesh) -> MeshDiagnostics {
    let mut min_edge_ratio = f64::INFINITY;
    let mut star = f64::INFINITY;
    for poly in mesh.polygons() {
        let h = poly.diameter();
        for j in 0..poly.n_vertices() {
            let (a, b) = poly.edge(j);
            min_edge_ratio = min_edge_ratio.min((b - a).norm() / h);
        }
        star = star.min(kernel_disk_radius(poly) / h);
    }
    MeshDiagnostics {
        h: mesh.h(),
        min_edge_ratio,
        star_shapedness: star,
    }
}

/// Kernel of a counter-clockwise polygon (points seeing the whole polygon) as a
/// convex polygon, obtained by clipping with every edge half-plane.
pub fn polygon_kernel(poly: &Polygon) -> Vec<Point> {
    let (mut lo, mut hi) = (poly.vertices[0], poly.vertices[0]);
    for p in &poly.vertices {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let mut k = vec![lo, Point::new(hi.x, lo.y), hi, Point::new(lo.x, hi.y)];
    for j in 0..poly.n_vertices() {
        let (a, b) = poly.edge(j);
        let d = b - a;
        let side = |p: &Point| cross(d, p - a);
        let input = std::mem::take(&mut k);
        let n = input.len();
        for i in 0..n {
            let cur = input[i];
            let prev = input[(i + n - 1) % n];
            let (sc, sp) = (side(&cur), side(&prev));
            if (sc >= 0.0) != (sp >= 0.0) {
                let t = sp / (sp - sc);
                k.push(prev + (cur - prev) * t);
            }
            if sc >= 0.0 {
                k.push(cur);
            }
        }
        if k.len() < 3 {
            return Vec::new();
        }
    }
    k
}

/// Radius of the largest disk centred at the kernel centroid inside the kernel.
fn kernel_disk_radius(poly: &Polygon) -> f64 {
    let k = polygon_kernel(poly);
    if k.len() < 3 {
        return 0.0;
    }
    let kp = Polygon::new(k);
    if kp.area() <= 0.0 {
        return 0.0;
    }
    let c = kp.centroid();
    let mut r = f64::INFINITY;
    for j in 0..kp.n_vertices() {
        let (a, b) = kp.edge(j);
        let len = (b - a).norm();
        if len > 0.0 {
            r = r.min(cross(b - a, c - a).abs() / len);
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate, BoundaryTag, Domain, MeshFamily, MeshKind};

    #[test]
    fn unit_square_ratios() {
        let v = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let m =
            PolygonalMesh::build_from_arrays(v, vec![vec![0, 1, 2, 3]], |_, _| BoundaryTag::GammaD)
                .unwrap();
        let d = mesh_diagnostics(&m);
        assert!((d.min_edge_ratio - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        // inradius 1/2 over diameter √2
        assert!((d.star_shapedness - 0.5 / 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn uniform_ratio_is_refinement_invariant() {
        let a: Vec<f64> = [2, 4, 8]
            .iter()
            .map(|&n| {
                let m = generate(
                    &MeshFamily::new(MeshKind::UniformQuad, n),
                    &Domain::square(-1.0, 1.0),
                )
                .unwrap();
                mesh_diagnostics(&m).min_edge_ratio
            })
            .collect();
        assert!((a[0] - a[1]).abs() < 1e-14 && (a[1] - a[2]).abs() < 1e-14);
    }

    #[test]
    fn non_convex_diagnostics_bounded_below() {
        // regression baselines for the zig-zag pattern
        for n in [4, 8, 16] {
            let m = generate(
                &MeshFamily::new(MeshKind::NonConvex, n),
                &Domain::square(-1.0, 1.0),
            )
            .unwrap();
            let d = mesh_diagnostics(&m);
            assert!(d.min_edge_ratio > 0.3, "{d:?}");
            assert!(d.star_shapedness > 0.02, "{d:?}");
        }
    }

    #[test]
    fn kernel_of_reflex_polygon_is_smaller() {
        let p = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 2.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 2.0),
        ]);
        let k = Polygon::new(polygon_kernel(&p));
        assert!(k.area() > 0.0 && k.area() < p.area());
    }
}
