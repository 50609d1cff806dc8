//! Global numbering and sparse assembly of the flow, heat and coupled systems.
//!
//! Flow unknowns are ordered `[σ edge DoFs, σ interior DoFs, u, γ, λ]`, heat
//! unknowns `[ρ edge DoFs, ρ interior DoFs, φ]`; the coupled Newton state is
//! the flow block followed by the heat block. Edge DoFs are defined with the
//! global edge orientation; a cell traversing an edge against it sees
//! `P_k(−s) = (−1)^k P_k(s)` and the opposite normal, hence the sign
//! `(−1)^{k+1}`.

mod coupled;
mod infsup;
mod system;

pub use coupled::{assemble_coupled, coupled_residual};
pub use infsup::{inf_sup_constants, InfSupConstants};
pub use system::LinearSystem;

use crate::mesh::{BoundaryTag, PolygonalMesh};
use crate::model::Problem;
use crate::polyspace::{dim, perp_dim};
use crate::vemlocal::{local_forms, LocalFormMatrices, LocalState, LocalVemSpace};
use crate::Result;
use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Triplets and right-hand-side entries of one cell.
type CellContribution = (Vec<(usize, usize, f64)>, Vec<(usize, f64)>);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalDofMap {
    pub r: usize,
    pub n_cells: usize,
    pub n_edges: usize,
    /// `π_r`.
    pub n_poly: usize,
    /// Interior DoFs per vector row and cell.
    pub n_interior: usize,
    pub n_sigma: usize,
    pub u_offset: usize,
    pub gamma_offset: usize,
    pub lambda: usize,
    pub flow_dim: usize,
    pub n_rho: usize,
    pub phi_offset: usize,
    pub heat_dim: usize,
    /// Heat indices of ρ edge DoFs on `GammaN` edges.
    pub constrained_rho: Vec<usize>,
}

pub fn build_dofmap(mesh: &PolygonalMesh, r: usize) -> GlobalDofMap {
    let (nc, ne) = (mesh.n_cells(), mesh.n_edges());
    let n_poly = dim(r);
    let n_interior = n_poly - 1 + perp_dim(r);
    let n_sigma = 2 * (r + 1) * ne + 2 * n_interior * nc;
    let u_offset = n_sigma;
    let gamma_offset = u_offset + 2 * n_poly * nc;
    let lambda = gamma_offset + n_poly * nc;
    let n_rho = (r + 1) * ne + n_interior * nc;
    let mut constrained_rho = Vec::new();
    for (e, edge) in mesh.edges().iter().enumerate() {
        if edge.tag == BoundaryTag::GammaN {
            constrained_rho.extend((0..=r).map(|k| e * (r + 1) + k));
        }
    }
    GlobalDofMap {
        r,
        n_cells: nc,
        n_edges: ne,
        n_poly,
        n_interior,
        n_sigma,
        u_offset,
        gamma_offset,
        lambda,
        flow_dim: lambda + 1,
        n_rho,
        phi_offset: n_rho,
        heat_dim: n_rho + n_poly * nc,
        constrained_rho,
    }
}

impl GlobalDofMap {
    pub fn coupled_dim(&self) -> usize {
        self.flow_dim + self.heat_dim
    }

    fn edge_sign(&self, aligned: bool, k: usize) -> f64 {
        if aligned || k % 2 == 1 {
            1.0
        } else {
            -1.0
        }
    }

    /// Global flow index and sign of every local σ DoF of a cell.
    pub fn sigma_map(&self, mesh: &PolygonalMesh, cell: usize) -> Vec<(usize, f64)> {
        let r1 = self.r + 1;
        let edges = mesh.cell_edges(cell);
        let mut map = Vec::with_capacity(2 * (edges.len() * r1 + self.n_interior));
        for ce in edges {
            for i in 0..2 {
                for k in 0..r1 {
                    map.push((ce.edge * 2 * r1 + i * r1 + k, self.edge_sign(ce.aligned, k)));
                }
            }
        }
        let base = 2 * r1 * self.n_edges + cell * 2 * self.n_interior;
        map.extend((0..2 * self.n_interior).map(|m| (base + m, 1.0)));
        map
    }

    /// Global heat index and sign of every local ρ DoF of a cell.
    pub fn rho_map(&self, mesh: &PolygonalMesh, cell: usize) -> Vec<(usize, f64)> {
        let r1 = self.r + 1;
        let edges = mesh.cell_edges(cell);
        let mut map = Vec::with_capacity(edges.len() * r1 + self.n_interior);
        for ce in edges {
            for k in 0..r1 {
                map.push((ce.edge * r1 + k, self.edge_sign(ce.aligned, k)));
            }
        }
        let base = r1 * self.n_edges + cell * self.n_interior;
        map.extend((0..self.n_interior).map(|m| (base + m, 1.0)));
        map
    }

    pub fn u_start(&self, cell: usize) -> usize {
        self.u_offset + cell * 2 * self.n_poly
    }

    pub fn gamma_start(&self, cell: usize) -> usize {
        self.gamma_offset + cell * self.n_poly
    }

    pub fn phi_start(&self, cell: usize) -> usize {
        self.phi_offset + cell * self.n_poly
    }
}

/// Global coefficient vectors of all five fields and the trace multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSolution {
    pub flow: DVector<f64>,
    pub heat: DVector<f64>,
    /// Constant `c` already added as `c I` to the σ DoFs.
    pub shift: f64,
}

impl DiscreteSolution {
    pub fn zeros(dofmap: &GlobalDofMap) -> Self {
        Self {
            flow: DVector::zeros(dofmap.flow_dim),
            heat: DVector::zeros(dofmap.heat_dim),
            shift: 0.0,
        }
    }

    pub fn from_coupled(dofmap: &GlobalDofMap, x: &DVector<f64>) -> Self {
        Self {
            flow: x.rows(0, dofmap.flow_dim).into_owned(),
            heat: x.rows(dofmap.flow_dim, dofmap.heat_dim).into_owned(),
            shift: 0.0,
        }
    }

    pub fn coupled(&self) -> DVector<f64> {
        let mut x = DVector::zeros(self.flow.len() + self.heat.len());
        x.rows_mut(0, self.flow.len()).copy_from(&self.flow);
        x.rows_mut(self.flow.len(), self.heat.len())
            .copy_from(&self.heat);
        x
    }

    /// The state with the trace shift removed, i.e. satisfying `∫ tr 𝓟𝓟σ_h = 0`.
    pub fn unshifted(&self, disc: &Discretization<'_>) -> Self {
        let mut s = self.clone();
        if s.shift != 0.0 {
            add_identity_to_sigma(disc, &mut s.flow, -s.shift);
            s.shift = 0.0;
        }
        s
    }

    pub fn u_cell<'a>(&'a self, d: &GlobalDofMap, cell: usize) -> &'a [f64] {
        &self.flow.as_slice()[d.u_start(cell)..d.u_start(cell) + 2 * d.n_poly]
    }

    pub fn gamma_cell<'a>(&'a self, d: &GlobalDofMap, cell: usize) -> &'a [f64] {
        &self.flow.as_slice()[d.gamma_start(cell)..d.gamma_start(cell) + d.n_poly]
    }

    pub fn phi_cell<'a>(&'a self, d: &GlobalDofMap, cell: usize) -> &'a [f64] {
        &self.heat.as_slice()[d.phi_start(cell)..d.phi_start(cell) + d.n_poly]
    }

    pub fn lambda(&self, d: &GlobalDofMap) -> f64 {
        self.flow[d.lambda]
    }

    pub fn sigma_local(&self, d: &GlobalDofMap, mesh: &PolygonalMesh, cell: usize) -> DVector<f64> {
        let map = d.sigma_map(mesh, cell);
        DVector::from_iterator(map.len(), map.iter().map(|&(g, s)| s * self.flow[g]))
    }

    pub fn rho_local(&self, d: &GlobalDofMap, mesh: &PolygonalMesh, cell: usize) -> DVector<f64> {
        let map = d.rho_map(mesh, cell);
        DVector::from_iterator(map.len(), map.iter().map(|&(g, s)| s * self.heat[g]))
    }
}

/// Mesh, numbering and the per-cell local spaces for one polynomial degree.
#[derive(Debug, Clone)]
pub struct Discretization<'m> {
    pub mesh: &'m PolygonalMesh,
    pub dofmap: GlobalDofMap,
    pub spaces: Vec<LocalVemSpace>,
}

impl<'m> Discretization<'m> {
    pub fn new(mesh: &'m PolygonalMesh, r: usize) -> Result<Self> {
        let spaces = mesh
            .polygons()
            .par_iter()
            .map(|p| LocalVemSpace::new(p, r))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            mesh,
            dofmap: build_dofmap(mesh, r),
            spaces,
        })
    }

    pub fn r(&self) -> usize {
        self.dofmap.r
    }

    pub fn dirichlet_flags(&self, cell: usize) -> Vec<bool> {
        self.mesh
            .cell_edges(cell)
            .iter()
            .map(|ce| self.mesh.edges()[ce.edge].tag == BoundaryTag::GammaD)
            .collect()
    }

    /// Local forms of every cell with the lagged fields of `lag`.
    pub fn local_forms_all(
        &self,
        problem: &Problem,
        z_from: &DiscreteSolution,
        phi_from: &DiscreteSolution,
    ) -> Result<Vec<LocalFormMatrices>> {
        let d = &self.dofmap;
        (0..d.n_cells)
            .into_par_iter()
            .map(|c| {
                let state = LocalState {
                    phi: phi_from.phi_cell(d, c),
                    z: z_from.u_cell(d, c),
                };
                local_forms(&self.spaces[c], problem, state, &self.dirichlet_flags(c))
            })
            .collect()
    }

    /// Global DoFs of a smooth tensor field (σ block only, other entries zero).
    pub fn interpolate_sigma<F>(&self, f: F) -> Result<DVector<f64>>
    where
        F: Fn(crate::Point) -> nalgebra::Matrix2<f64> + Sync,
    {
        let d = &self.dofmap;
        let locals = (0..d.n_cells)
            .into_par_iter()
            .map(|c| self.spaces[c].interpolate_tensor(&f, Default::default()))
            .collect::<Result<Vec<_>>>()?;
        let mut x = DVector::zeros(d.flow_dim);
        for (c, l) in locals.iter().enumerate() {
            for (&(g, s), v) in d.sigma_map(self.mesh, c).iter().zip(l.iter()) {
                x[g] = s * v;
            }
        }
        Ok(x)
    }

    /// Global DoFs of a smooth vector field (ρ block only).
    pub fn interpolate_rho<F>(&self, f: F) -> Result<DVector<f64>>
    where
        F: Fn(crate::Point) -> nalgebra::Vector2<f64> + Sync,
    {
        let d = &self.dofmap;
        let locals = (0..d.n_cells)
            .into_par_iter()
            .map(|c| self.spaces[c].interpolate_vector(&f, Default::default()))
            .collect::<Result<Vec<_>>>()?;
        let mut x = DVector::zeros(d.heat_dim);
        for (c, l) in locals.iter().enumerate() {
            for (&(g, s), v) in d.rho_map(self.mesh, c).iter().zip(l.iter()) {
                x[g] = s * v;
            }
        }
        Ok(x)
    }
}

/// Adds `scale · I` to the σ DoFs of a flow vector.
pub fn add_identity_to_sigma(disc: &Discretization<'_>, flow: &mut DVector<f64>, scale: f64) {
    let d = &disc.dofmap;
    let pr = d.n_poly;
    let mut done = vec![false; d.flow_dim];
    for c in 0..d.n_cells {
        let sp = &disc.spaces[c];
        let map = d.sigma_map(disc.mesh, c);
        for i in 0..2 {
            let dofs = sp.dof_of_monomials.column(i * pr);
            for (dd, v) in dofs.iter().enumerate() {
                let (g, s) = map[sp.tensor_index(i, dd)];
                if !done[g] {
                    flow[g] += scale * s * v;
                    done[g] = true;
                }
            }
        }
    }
}

/// Flow system for one Picard step with lagged velocity `z` and temperature `φ`.
pub fn assemble_flow(
    disc: &Discretization<'_>,
    problem: &Problem,
    z_from: &DiscreteSolution,
    phi_from: &DiscreteSolution,
) -> Result<LinearSystem> {
    let d = &disc.dofmap;
    let forms = disc.local_forms_all(problem, z_from, phi_from)?;
    let pr = d.n_poly;
    let chunks: Vec<CellContribution> = forms
        .par_iter()
        .enumerate()
        .map(|(c, f)| {
            let smap = d.sigma_map(disc.mesh, c);
            let (u0, g0) = (d.u_start(c), d.gamma_start(c));
            let mut t = Vec::new();
            let mut rhs = Vec::new();
            for (i, &(gi, si)) in smap.iter().enumerate() {
                for (j, &(gj, sj)) in smap.iter().enumerate() {
                    t.push((gi, gj, si * sj * f.a_s[(i, j)]));
                }
                for b in 0..2 * pr {
                    t.push((gi, u0 + b, si * (f.o_s[(i, b)] + f.b_div[(b, i)])));
                    t.push((u0 + b, gi, si * f.b_div[(b, i)]));
                }
                for b in 0..pr {
                    t.push((gi, g0 + b, si * f.b_skw[(b, i)]));
                    t.push((g0 + b, gi, si * f.b_skw[(b, i)]));
                }
                t.push((gi, d.lambda, si * f.trace[i]));
                t.push((d.lambda, gi, si * f.trace[i]));
            }
            for b in 0..2 * pr {
                rhs.push((u0 + b, f.f_s[b]));
            }
            (t, rhs)
        })
        .collect();
    let mut sys = LinearSystem::new(d.flow_dim);
    for (t, rhs) in chunks {
        sys.triplets.extend(t);
        for (i, v) in rhs {
            sys.rhs[i] += v;
        }
    }
    Ok(sys)
}

/// Heat system for one Picard step; `GammaN` ρ DoFs are eliminated.
pub fn assemble_heat(
    disc: &Discretization<'_>,
    problem: &Problem,
    z_from: &DiscreteSolution,
    phi_from: &DiscreteSolution,
) -> Result<LinearSystem> {
    let d = &disc.dofmap;
    let forms = disc.local_forms_all(problem, z_from, phi_from)?;
    let pr = d.n_poly;
    let chunks: Vec<CellContribution> = forms
        .par_iter()
        .enumerate()
        .map(|(c, f)| {
            let rmap = d.rho_map(disc.mesh, c);
            let p0 = d.phi_start(c);
            let mut t = Vec::new();
            let mut rhs = Vec::new();
            for (i, &(gi, si)) in rmap.iter().enumerate() {
                for (j, &(gj, sj)) in rmap.iter().enumerate() {
                    t.push((gi, gj, si * sj * f.a_t[(i, j)]));
                }
                for b in 0..pr {
                    t.push((gi, p0 + b, si * (f.o_t[(i, b)] + f.b_t[(b, i)])));
                    t.push((p0 + b, gi, si * f.b_t[(b, i)]));
                }
                if f.f_t[i] != 0.0 {
                    rhs.push((gi, si * f.f_t[i]));
                }
            }
            for b in 0..pr {
                rhs.push((p0 + b, f.g_t[b]));
            }
            (t, rhs)
        })
        .collect();
    let mut sys = LinearSystem::new(d.heat_dim);
    for (t, rhs) in chunks {
        sys.triplets.extend(t);
        for (i, v) in rhs {
            sys.rhs[i] += v;
        }
    }
    sys.eliminate(&d.constrained_rho);
    Ok(sys)
}
