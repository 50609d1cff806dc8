//! Conforming polygonal meshes of planar domains.
//!
//! Cells are counter-clockwise vertex cycles. Each undirected edge is stored
//! once, oriented from its smaller to its larger vertex index; the global
//! normal of an edge is the clockwise rotation of that direction, so it
//! points out of the cell on its left.

mod diagnostics;
mod generate;
mod io;

pub use diagnostics::{mesh_diagnostics, polygon_kernel, MeshDiagnostics};
pub use generate::{generate, Domain, Hole, MeshFamily, MeshKind};
pub use io::{MeshBoundaryEntry, MeshDocument};

use crate::{Error, Point, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryTag {
    Interior,
    GammaD,
    GammaN,
}

/// A simple polygon given by its vertex cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Self {
        Self { vertices }
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Directed edge `j`, from vertex `j` to vertex `j + 1`.
    pub fn edge(&self, j: usize) -> (Point, Point) {
        let n = self.vertices.len();
        (self.vertices[j], self.vertices[(j + 1) % n])
    }

    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        let mut a = 0.0;
        for j in 0..n {
            let (p, q) = self.edge(j);
            a += p.x * q.y - q.x * p.y;
        }
        0.5 * a
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn centroid(&self) -> Point {
        let n = self.vertices.len();
        let mut c = Point::zeros();
        let mut a = 0.0;
        for j in 0..n {
            let (p, q) = self.edge(j);
            let w = p.x * q.y - q.x * p.y;
            a += w;
            c += (p + q) * w;
        }
        c / (3.0 * a)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, p) in self.vertices.iter().enumerate() {
            for q in &self.vertices[i + 1..] {
                d = d.max((p - q).norm());
            }
        }
        d
    }

    /// True when no two non-adjacent edges intersect and no edge has zero length.
    pub fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return false;
        }
        let scale = self.diameter();
        for j in 0..n {
            let (a, b) = self.edge(j);
            if (b - a).norm() <= 1e-14 * scale {
                return false;
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (a, b) = self.edge(i);
                let (c, d) = self.edge(j);
                if segments_intersect(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }

    /// Interior angle test: true if vertex `j` is reflex for a counter-clockwise cycle.
    pub fn is_reflex(&self, j: usize) -> bool {
        let n = self.vertices.len();
        let prev = self.vertices[(j + n - 1) % n];
        let cur = self.vertices[j];
        let next = self.vertices[(j + 1) % n];
        cross(cur - prev, next - cur) < 0.0
    }
}

pub(crate) fn cross(a: Point, b: Point) -> f64 {
    a.x * b.y - a.y * b.x
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Point, q: Point, r: Point, o: f64| {
        o == 0.0
            && r.x >= p.x.min(q.x)
            && r.x <= p.x.max(q.x)
            && r.y >= p.y.min(q.y)
            && r.y <= p.y.max(q.y)
    };
    on(a, b, c, d1) || on(a, b, d, d2) || on(c, d, a, d3) || on(c, d, b, d4)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshEdge {
    /// Global orientation: `vertices[0] < vertices[1]`.
    pub vertices: [usize; 2],
    /// Cell traversing the edge from `vertices[0]` to `vertices[1]`.
    pub left: Option<usize>,
    /// Cell traversing the edge in the opposite direction.
    pub right: Option<usize>,
    pub tag: BoundaryTag,
}

impl MeshEdge {
    pub fn is_boundary(&self) -> bool {
        self.left.is_none() || self.right.is_none()
    }
}

/// Local edge `j` of a cell (from its vertex `j` to `j + 1`) and whether that
/// direction agrees with the global edge orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellEdge {
    pub edge: usize,
    pub aligned: bool,
}

#[derive(Debug, Clone)]
pub struct PolygonalMesh {
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
    edges: Vec<MeshEdge>,
    cell_edges: Vec<Vec<CellEdge>>,
    polygons: Vec<Polygon>,
    h: f64,
}

impl PolygonalMesh {
    /// Builds and validates a mesh. `boundary_rule` receives the midpoint and the
    /// global vertex pair of each boundary edge; returning `Interior` falls back
    /// to `GammaD`.
    pub fn build_from_arrays<F>(
        vertices: Vec<Point>,
        cells: Vec<Vec<usize>>,
        boundary_rule: F,
    ) -> Result<Self>
    where
        F: Fn(Point, [usize; 2]) -> BoundaryTag,
    {
        let nv = vertices.len();
        let mut polygons = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            if let Some(&v) = cell.iter().find(|&&v| v >= nv) {
                return Err(Error::MissingVertex { cell: c, vertex: v });
            }
            let n = cell.len();
            if n < 3 || (0..n).any(|j| cell[j] == cell[(j + 1) % n]) {
                return Err(Error::DegenerateCell(c));
            }
            let poly = Polygon::new(cell.iter().map(|&v| vertices[v]).collect());
            if poly.signed_area() <= 0.0 {
                return Err(Error::NegativeArea(c));
            }
            if !poly.is_simple() {
                return Err(Error::SelfIntersecting(c));
            }
            polygons.push(poly);
        }

        let mut edges: Vec<MeshEdge> = Vec::new();
        let mut lookup: HashMap<[usize; 2], usize> = HashMap::new();
        let mut cell_edges = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let n = cell.len();
            let mut local = Vec::with_capacity(n);
            for j in 0..n {
                let (a, b) = (cell[j], cell[(j + 1) % n]);
                let key = [a.min(b), a.max(b)];
                let aligned = a < b;
                let e = *lookup.entry(key).or_insert_with(|| {
                    edges.push(MeshEdge {
                        vertices: key,
                        left: None,
                        right: None,
                        tag: BoundaryTag::Interior,
                    });
                    edges.len() - 1
                });
                let slot = if aligned {
                    &mut edges[e].left
                } else {
                    &mut edges[e].right
                };
                if slot.is_some() {
                    return Err(Error::NonManifoldEdge(key[0], key[1]));
                }
                *slot = Some(c);
                local.push(CellEdge { edge: e, aligned });
            }
            cell_edges.push(local);
        }

        let mut used = vec![false; nv];
        for cell in &cells {
            for &v in cell {
                used[v] = true;
            }
        }
        if let Some(v) = used.iter().position(|&u| !u) {
            return Err(Error::DanglingVertex(v));
        }

        for e in edges.iter_mut() {
            if e.is_boundary() {
                let mid = 0.5 * (vertices[e.vertices[0]] + vertices[e.vertices[1]]);
                e.tag = match boundary_rule(mid, e.vertices) {
                    BoundaryTag::Interior => BoundaryTag::GammaD,
                    t => t,
                };
            }
        }

        let h = polygons.iter().map(Polygon::diameter).fold(0.0, f64::max);
        Ok(Self {
            vertices,
            cells,
            edges,
            cell_edges,
            polygons,
            h,
        })
    }

    /// Re-tags every boundary edge with `rule(midpoint, vertices)`.
    pub fn retag_boundary<F>(&mut self, rule: F)
    where
        F: Fn(Point, [usize; 2]) -> BoundaryTag,
    {
        for e in self.edges.iter_mut().filter(|e| e.is_boundary()) {
            let mid = 0.5 * (self.vertices[e.vertices[0]] + self.vertices[e.vertices[1]]);
            e.tag = match rule(mid, e.vertices) {
                BoundaryTag::Interior => BoundaryTag::GammaD,
                t => t,
            };
        }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn edges(&self) -> &[MeshEdge] {
        &self.edges
    }

    pub fn cell_edges(&self, cell: usize) -> &[CellEdge] {
        &self.cell_edges[cell]
    }

    pub fn polygon(&self, cell: usize) -> &Polygon {
        &self.polygons[cell]
    }

    pub fn polygons(&self) -> &[Polygon] {
        &self.polygons
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Maximum cell diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn area(&self) -> f64 {
        self.polygons.iter().map(Polygon::area).sum()
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = (usize, &MeshEdge)> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_boundary())
    }

    pub fn has_dirichlet_boundary(&self) -> bool {
        self.edges.iter().any(|e| e.tag == BoundaryTag::GammaD)
    }

    /// `#V - #E + #cells`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.cells.len() as i64
    }

    /// Unit normal of a global edge (clockwise rotation of its direction) and its length.
    pub fn edge_normal(&self, e: usize) -> (Point, f64) {
        let [a, b] = self.edges[e].vertices;
        let d = self.vertices[b] - self.vertices[a];
        let len = d.norm();
        (Point::new(d.y, -d.x) / len, len)
    }

    /// Sign relating the global edge normal to the outward normal of the cell owning
    /// a boundary edge: `+1` when they agree.
    pub fn boundary_orientation(&self, e: usize) -> f64 {
        if self.edges[e].left.is_some() {
            1.0
        } else {
            -1.0
        }
    }
}
