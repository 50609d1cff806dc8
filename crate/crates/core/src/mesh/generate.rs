//! Mesh generators for rectangles and the disk-with-holes geometry.

use super::{BoundaryTag, Polygon, PolygonalMesh};
use crate::{Error, Point, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshKind {
    UniformQuad,
    DistortedQuad,
    Hexagonal,
    NonConvex,
    FromFile(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshFamily {
    pub kind: MeshKind,
    pub n: usize,
    /// Amplitude of the vertex perturbation for `DistortedQuad`, relative to h.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distortion: Option<f64>,
}

impl MeshFamily {
    pub fn new(kind: MeshKind, n: usize) -> Self {
        Self {
            kind,
            n,
            distortion: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hole {
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Domain {
    Rectangle { min: [f64; 2], max: [f64; 2] },
    DiskWithHoles { radius: f64, holes: Vec<Hole> },
}

impl Domain {
    pub fn square(a: f64, b: f64) -> Self {
        Domain::Rectangle {
            min: [a, a],
            max: [b, b],
        }
    }

    /// Unit disk with four holes of radius 1/8 centred at (±1/2, ±1/2).
    pub fn shell_and_tube() -> Self {
        let holes = [(0.5, 0.5), (-0.5, 0.5), (-0.5, -0.5), (0.5, -0.5)]
            .iter()
            .map(|&(x, y)| Hole {
                center: [x, y],
                radius: 0.125,
            })
            .collect();
        Domain::DiskWithHoles { radius: 1.0, holes }
    }
}

/// Generates a mesh with every boundary edge tagged `GammaD`.
///
/// On `DiskWithHoles` only `UniformQuad` is accepted; it produces the
/// block-structured polar/O-grid mesh described in [`disk_with_holes`].
pub fn generate(family: &MeshFamily, domain: &Domain) -> Result<PolygonalMesh> {
    if family.n == 0 {
        return Err(Error::Config("mesh resolution must be at least 1".into()));
    }
    if let MeshKind::FromFile(path) = &family.kind {
        return PolygonalMesh::read_json(path);
    }
    match domain {
        Domain::Rectangle { min, max } => {
            let (lo, hi) = (Point::new(min[0], min[1]), Point::new(max[0], max[1]));
            if hi.x <= lo.x || hi.y <= lo.y {
                return Err(Error::UnsupportedDomain("empty rectangle".into()));
            }
            let (v, c) = match family.kind {
                MeshKind::UniformQuad => quad_grid(lo, hi, family.n),
                MeshKind::DistortedQuad => {
                    let (mut v, c) = quad_grid(lo, hi, family.n);
                    let amp = family.distortion.unwrap_or(0.1);
                    let h =
                        ((hi.x - lo.x).powi(2) + (hi.y - lo.y).powi(2)).sqrt() / family.n as f64;
                    let tol = 1e-12 * (hi - lo).norm();
                    for p in v.iter_mut() {
                        let interior = p.x > lo.x + tol
                            && p.x < hi.x - tol
                            && p.y > lo.y + tol
                            && p.y < hi.y - tol;
                        if interior {
                            let s = amp * h * (2.0 * PI * p.x).sin() * (2.0 * PI * p.y).sin();
                            *p += Point::new(s, s);
                        }
                    }
                    (v, c)
                }
                MeshKind::Hexagonal => hexagonal(lo, hi, family.n),
                MeshKind::NonConvex => non_convex(lo, hi, family.n),
                MeshKind::FromFile(_) => unreachable!(),
            };
            PolygonalMesh::build_from_arrays(v, c, |_, _| BoundaryTag::GammaD)
        }
        Domain::DiskWithHoles { radius, holes } => match family.kind {
            MeshKind::UniformQuad => {
                let (v, c) = disk_with_holes(*radius, holes, family.n)?;
                PolygonalMesh::build_from_arrays(v, c, |_, _| BoundaryTag::GammaD)
            }
            _ => Err(Error::UnsupportedDomain(format!(
                "{:?} on a disk with holes",
                family.kind
            ))),
        },
    }
}

type Arrays = (Vec<Point>, Vec<Vec<usize>>);

fn quad_grid(lo: Point, hi: Point, n: usize) -> Arrays {
    let (dx, dy) = ((hi.x - lo.x) / n as f64, (hi.y - lo.y) / n as f64);
    let mut v = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            v.push(Point::new(lo.x + i as f64 * dx, lo.y + j as f64 * dy));
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut cells = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    (v, cells)
}

/// Merges coincident points within a tolerance.
struct PointPool {
    points: Vec<Point>,
    grid: HashMap<(i64, i64), Vec<usize>>,
    tol: f64,
}

impl PointPool {
    fn new(tol: f64) -> Self {
        Self {
            points: Vec::new(),
            grid: HashMap::new(),
            tol,
        }
    }

    fn key(&self, p: Point) -> (i64, i64) {
        (
            (p.x / (4.0 * self.tol)).floor() as i64,
            (p.y / (4.0 * self.tol)).floor() as i64,
        )
    }

    fn insert(&mut self, p: Point) -> usize {
        let (kx, ky) = self.key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.grid.get(&(kx + dx, ky + dy)) {
                    for &i in ids {
                        if (self.points[i] - p).norm() <= self.tol {
                            return i;
                        }
                    }
                }
            }
        }
        self.points.push(p);
        let id = self.points.len() - 1;
        self.grid.entry((kx, ky)).or_default().push(id);
        id
    }

    /// Inserts a polygon, dropping repeated consecutive vertices and fixing orientation.
    fn insert_cell(&mut self, poly: &[Point]) -> Option<Vec<usize>> {
        let mut ids: Vec<usize> = Vec::with_capacity(poly.len());
        for &p in poly {
            let i = self.insert(p);
            if ids.last() != Some(&i) {
                ids.push(i);
            }
        }
        while ids.len() > 1 && ids.first() == ids.last() {
            ids.pop();
        }
        if ids.len() < 3 {
            return None;
        }
        let area = Polygon::new(ids.iter().map(|&i| self.points[i]).collect()).signed_area();
        if area.abs() <= self.tol * self.tol {
            return None;
        }
        if area < 0.0 {
            ids.reverse();
        }
        Some(ids)
    }
}

/// Sutherland–Hodgman clip of a polygon against an axis-aligned box.
fn clip_to_box(poly: &[Point], lo: Point, hi: Point) -> Vec<Point> {
    let mut out = poly.to_vec();
    // (axis, bound, keep-if-greater)
    for (axis, bound, greater) in [
        (0, lo.x, true),
        (0, hi.x, false),
        (1, lo.y, true),
        (1, hi.y, false),
    ] {
        let inside = |p: &Point| {
            if greater {
                p[axis] >= bound
            } else {
                p[axis] <= bound
            }
        };
        let input = std::mem::take(&mut out);
        let n = input.len();
        for k in 0..n {
            let cur = input[k];
            let prev = input[(k + n - 1) % n];
            let (ci, pi) = (inside(&cur), inside(&prev));
            if ci != pi {
                let t = (bound - prev[axis]) / (cur[axis] - prev[axis]);
                let mut x = prev + (cur - prev) * t;
                x[axis] = bound;
                out.push(x);
            }
            if ci {
                out.push(cur);
            }
        }
        if out.is_empty() {
            break;
        }
    }
    out
}

/// Voronoi cells of a triangular lattice with `n` columns, clipped to the box.
/// Interior cells are hexagons with diameter close to `2 (hi.x - lo.x) / (n √3)`.
fn hexagonal(lo: Point, hi: Point, n: usize) -> Arrays {
    let dx = (hi.x - lo.x) / n as f64;
    let rows = (((hi.y - lo.y) / (dx * 3f64.sqrt() / 2.0)).round() as usize).max(1);
    let dy = (hi.y - lo.y) / rows as f64;
    let s = (dy * dy - dx * dx / 4.0) / (2.0 * dy);
    let t = (dx * dx / 4.0 + dy * dy) / (2.0 * dy);
    let offsets = [
        Point::new(0.0, -t),
        Point::new(dx / 2.0, -s),
        Point::new(dx / 2.0, s),
        Point::new(0.0, t),
        Point::new(-dx / 2.0, s),
        Point::new(-dx / 2.0, -s),
    ];
    let mut pool = PointPool::new(1e-9 * (hi - lo).norm());
    let mut cells = Vec::new();
    for j in 0..=rows {
        let y = lo.y + j as f64 * dy;
        let seeds: Vec<f64> = if j % 2 == 0 {
            (0..=n).map(|i| lo.x + i as f64 * dx).collect()
        } else {
            (0..n).map(|i| lo.x + (i as f64 + 0.5) * dx).collect()
        };
        for x in seeds {
            let c = Point::new(x, y);
            let hex: Vec<Point> = offsets.iter().map(|o| c + o).collect();
            let clipped = clip_to_box(&hex, lo, hi);
            if let Some(cell) = pool.insert_cell(&clipped) {
                cells.push(cell);
            }
        }
    }
    (pool.points, cells)
}

/// Each grid square is split by a zig-zag polyline into two interlocking
/// hexagons, each with one reflex vertex.
fn non_convex(lo: Point, hi: Point, n: usize) -> Arrays {
    let (dx, dy) = ((hi.x - lo.x) / n as f64, (hi.y - lo.y) / n as f64);
    let left = [
        (0.0, 0.0),
        (0.5, 0.0),
        (0.65, 0.35),
        (0.35, 0.65),
        (0.5, 1.0),
        (0.0, 1.0),
    ];
    let right = [
        (0.5, 0.0),
        (1.0, 0.0),
        (1.0, 1.0),
        (0.5, 1.0),
        (0.35, 0.65),
        (0.65, 0.35),
    ];
    let mut pool = PointPool::new(1e-9 * (hi - lo).norm());
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let o = Point::new(lo.x + i as f64 * dx, lo.y + j as f64 * dy);
            for pattern in [&left, &right] {
                let poly: Vec<Point> = pattern
                    .iter()
                    .map(|&(a, b)| o + Point::new(a * dx, b * dy))
                    .collect();
                cells.extend(pool.insert_cell(&poly));
            }
        }
    }
    (pool.points, cells)
}

/// Block-structured mesh of a disk with circular holes.
///
/// The disk is cut into `8k` concentric rings (`k = n`) with `16k` angular
/// sectors near the rim, halving toward the centre, which is a single polygon.
/// Each hole must lie inside the block `θ_c ± 22.5°`, `R/2 ≤ r ≤ R`, where its
/// centre angle `θ_c` is a multiple of 22.5°; that block is replaced by an
/// O-grid of `2k` layers around the hole. The outer circle is approximated by `16k` segments and each
/// hole by `12k` segments.
pub fn disk_with_holes(radius: f64, holes: &[Hole], n: usize) -> Result<Arrays> {
    let k = n;
    let m = 8 * k;
    let full = 16 * k;
    let dr = radius / m as f64;
    let sector = 2.0 * PI / 16.0;
    // block index range in the finest angular numbering (width 2 sectors of 22.5°)
    let mut blocks: Vec<(usize, Hole)> = Vec::new();
    for h in holes {
        let c = Point::new(h.center[0], h.center[1]);
        let theta = c.y.atan2(c.x).rem_euclid(2.0 * PI);
        let q = (theta - sector) / sector;
        let qi = q.round();
        let d = c.norm();
        if (q - qi).abs() > 1e-9
            || h.radius >= d * sector.sin()
            || d - h.radius <= 0.5 * radius + 1e-3 * radius
            || d + h.radius >= radius - 1e-3 * radius
            || h.radius <= 0.0
        {
            return Err(Error::UnsupportedDomain(format!(
                "hole at ({}, {}) does not fit the block layout",
                c.x, c.y
            )));
        }
        let lo = ((qi.rem_euclid(16.0) as usize) * k) % full;
        if blocks
            .iter()
            .any(|(b, _)| (lo + full - b) % full < 2 * k || (b + full - lo) % full < 2 * k)
        {
            return Err(Error::UnsupportedDomain("overlapping hole blocks".into()));
        }
        blocks.push((lo, *h));
    }

    let count = |i: usize| -> usize {
        let mut c = full;
        while c.is_multiple_of(2) && c / 2 >= 8 && c as f64 > 4.0 * PI * i as f64 {
            c /= 2;
        }
        c
    };
    let mut pool = PointPool::new(1e-9 * radius);
    // vertex j of the count(i) points on circle i, created on first use
    let vid = |pool: &mut PointPool, i: usize, j: usize| -> usize {
        let nc = count(i);
        let a = 2.0 * PI * (j % nc) as f64 / nc as f64;
        let r = i as f64 * dr;
        pool.insert(Point::new(r * a.cos(), r * a.sin()))
    };
    let mut cells: Vec<Vec<usize>> = vec![(0..count(1)).map(|j| vid(&mut pool, 1, j)).collect()];
    let in_block = |i: usize, j_fine: usize| -> bool {
        i >= m / 2
            && blocks
                .iter()
                .any(|(lo, _)| (j_fine + full - lo) % full < 2 * k)
    };
    for i in 1..m {
        let (ni, no) = (count(i), count(i + 1));
        let ratio = no / ni;
        for j in 0..ni {
            if ni == full && in_block(i, j) {
                continue;
            }
            let mut cell = vec![vid(&mut pool, i, j), vid(&mut pool, i, j + 1)];
            for t in (0..=ratio).rev() {
                cell.push(vid(&mut pool, i + 1, j * ratio + t));
            }
            cells.push(cell);
        }
    }

    let layers = 2 * k;
    let half = m / 2;
    for (lo, hole) in &blocks {
        let hc = Point::new(hole.center[0], hole.center[1]);
        let idx = |j: usize| (lo + j) % full;
        // counter-clockwise perimeter around the hole centre
        let mut perim: Vec<usize> = Vec::new();
        for j in (1..=2 * k).rev() {
            perim.push(vid(&mut pool, half, idx(j)));
        }
        for i in half..m {
            perim.push(vid(&mut pool, i, idx(0)));
        }
        for j in 0..2 * k {
            perim.push(vid(&mut pool, m, idx(j)));
        }
        for i in (half + 1..=m).rev() {
            perim.push(vid(&mut pool, i, idx(2 * k)));
        }
        let p = perim.len();
        let mut rings: Vec<Vec<usize>> = Vec::with_capacity(layers + 1);
        for l in 0..=layers {
            if l == layers {
                rings.push(perim.clone());
                continue;
            }
            let s = l as f64 / layers as f64;
            let ring = perim
                .iter()
                .map(|&pid| {
                    let q = pool.points[pid];
                    let dir = (q - hc).normalize();
                    let inner = hc + dir * hole.radius;
                    pool.insert(inner + (q - inner) * s)
                })
                .collect();
            rings.push(ring);
        }
        for l in 0..layers {
            for j in 0..p {
                let j1 = (j + 1) % p;
                cells.push(vec![
                    rings[l][j],
                    rings[l][j1],
                    rings[l + 1][j1],
                    rings[l + 1][j],
                ]);
            }
        }
    }

    for cell in cells.iter_mut() {
        let area = Polygon::new(cell.iter().map(|&i| pool.points[i]).collect()).signed_area();
        if area < 0.0 {
            cell.reverse();
        }
    }
    Ok((pool.points, cells))
}
