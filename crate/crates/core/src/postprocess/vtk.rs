//! Legacy ASCII VTK output of cell-wise means.

use super::{cell_mean_vector, project_cells};
use crate::assembly::{DiscreteSolution, Discretization};
use crate::Result;
use nalgebra::DVector;
use std::fmt::Write as _;
use std::path::Path;

/// Cell means of the projected fields, one entry per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFields {
    pub sigma_11: Vec<f64>,
    pub sigma_22: Vec<f64>,
    pub u_magnitude: Vec<f64>,
    pub gamma_magnitude: Vec<f64>,
    pub pressure: Vec<f64>,
    pub rho_magnitude: Vec<f64>,
    pub temperature: Vec<f64>,
}

impl CellFields {
    pub fn named(&self) -> [(&'static str, &[f64]); 7] {
        [
            ("sigma_11", &self.sigma_11),
            ("sigma_22", &self.sigma_22),
            ("u_magnitude", &self.u_magnitude),
            ("gamma_magnitude", &self.gamma_magnitude),
            ("pressure", &self.pressure),
            ("rho_magnitude", &self.rho_magnitude),
            ("temperature", &self.temperature),
        ]
    }
}

pub fn cell_fields(disc: &Discretization<'_>, solution: &DiscreteSolution) -> Result<CellFields> {
    let cells = project_cells(disc, solution)?;
    let n = cells.len();
    let mut out = CellFields {
        sigma_11: Vec::with_capacity(n),
        sigma_22: Vec::with_capacity(n),
        u_magnitude: Vec::with_capacity(n),
        gamma_magnitude: Vec::with_capacity(n),
        pressure: Vec::with_capacity(n),
        rho_magnitude: Vec::with_capacity(n),
        temperature: Vec::with_capacity(n),
    };
    for (c, f) in cells.iter().enumerate() {
        let sp = &disc.spaces[c];
        let m = sp.monomial_integrals();
        let pr = m.len();
        let mean = |v: &DVector<f64>| m.dot(&v.rows(0, pr)) / sp.area;
        out.sigma_11.push(mean(&f.sigma));
        out.sigma_22
            .push(m.dot(&f.sigma.rows(3 * pr, pr)) / sp.area);
        out.u_magnitude.push(cell_mean_vector(disc, c, &f.u).norm());
        out.gamma_magnitude
            .push(std::f64::consts::SQRT_2 * mean(&f.gamma).abs());
        let high = sp.basis.with_degree(2 * disc.r());
        out.pressure.push(
            sp.quad
                .integrate(|x| high.eval_poly(f.pressure.as_slice(), x))
                / sp.area,
        );
        out.rho_magnitude
            .push(cell_mean_vector(disc, c, &f.rho).norm());
        out.temperature.push(mean(&f.phi));
    }
    Ok(out)
}

/// Writes an unstructured grid of polygons with the given cell data.
pub fn write_vtk(disc: &Discretization<'_>, fields: &CellFields, path: &Path) -> Result<()> {
    let mesh = disc.mesh;
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\nmixed VEM Boussinesq solution\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", mesh.n_vertices());
    for v in mesh.vertices() {
        let _ = writeln!(s, "{:.12e} {:.12e} 0", v.x, v.y);
    }
    let size: usize = mesh.cells().iter().map(|c| c.len() + 1).sum();
    let _ = writeln!(s, "CELLS {} {}", mesh.n_cells(), size);
    for cell in mesh.cells() {
        let _ = write!(s, "{}", cell.len());
        for v in cell {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {}", mesh.n_cells());
    for _ in mesh.cells() {
        s.push_str("7\n");
    }
    let _ = writeln!(s, "CELL_DATA {}", mesh.n_cells());
    for (name, values) in fields.named() {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in values {
            let _ = writeln!(s, "{v:.12e}");
        }
    }
    std::fs::write(path, s)?;
    Ok(())
}

pub fn export_fields(
    disc: &Discretization<'_>,
    solution: &DiscreteSolution,
    path: &Path,
) -> Result<()> {
    write_vtk(disc, &cell_fields(disc, solution)?, path)
}
