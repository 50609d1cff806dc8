//! Configured runs: the three benchmark problems and custom setups.

use crate::assembly::{assemble_flow, assemble_heat, DiscreteSolution, Discretization};
use crate::manufactured::Example1;
use crate::mesh::{generate, Domain, MeshFamily, MeshKind, PolygonalMesh};
use crate::model::{CoefficientLaw, Coefficients, Problem, ScalarField};
use crate::postprocess::{
    boundary_flux, compute_errors, exact_norms, export_fields, max_velocity, momentum_balance,
    rate_table, ErrorReport, RateTable,
};
use crate::solver::{residual_norm, solve, SolveTrace, SolverConfig};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Manufactured solution on (−1, 1)², with rate table.
    Example1,
    /// Heated cavity on (0, 1)².
    Example2,
    /// Disk with four heated tubes.
    Example3,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    UniformQuad,
    DistortedQuad,
    Hexagonal,
    NonConvex,
    FromFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub family: FamilyKind,
    /// Strictly increasing resolution parameters, one solve each.
    pub resolutions: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distortion: Option<f64>,
    /// Mesh document for `from_file`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    pub mu: CoefficientLaw,
    pub kappa: CoefficientLaw,
    pub g: [f64; 2],
    pub ra: f64,
    pub pr: f64,
    /// Scale momentum by 2·Pr and buoyancy by Ra·Pr; otherwise both scales are 1.
    pub scaled: bool,
    pub boundary_temperature: ScalarField,
    pub domain: Domain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub export_vtk: bool,
    /// Matrix Market files of the flow and heat systems at the final state.
    pub export_systems: bool,
    pub trace: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("output"),
            export_vtk: false,
            export_systems: false,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub degree: usize,
    pub mesh: MeshConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    pub physics: PhysicsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn example1(family: FamilyKind, degree: usize, resolutions: Vec<usize>) -> Self {
        let e = Example1::default();
        Self {
            experiment: ExperimentKind::Example1,
            degree,
            mesh: MeshConfig {
                family,
                resolutions,
                distortion: None,
                path: None,
            },
            solver: SolverConfig::newton(),
            physics: PhysicsConfig {
                mu: e.mu,
                kappa: e.kappa,
                g: e.g,
                ra: 1.0,
                pr: 1.0,
                scaled: false,
                boundary_temperature: ScalarField::Constant { value: 0.0 },
                domain: Domain::square(-1.0, 1.0),
            },
            output: OutputConfig::default(),
        }
    }

    pub fn example2(family: FamilyKind, resolutions: Vec<usize>) -> Self {
        Self {
            experiment: ExperimentKind::Example2,
            degree: 0,
            mesh: MeshConfig {
                family,
                resolutions,
                distortion: None,
                path: None,
            },
            solver: SolverConfig::newton(),
            physics: PhysicsConfig {
                mu: CoefficientLaw::exp(-1.0),
                kappa: CoefficientLaw::exp(1.0),
                g: [0.0, 1.0],
                ra: 4000.0,
                pr: 0.5,
                scaled: true,
                boundary_temperature: ScalarField::HeatedBottom,
                domain: Domain::square(0.0, 1.0),
            },
            output: OutputConfig::default(),
        }
    }

    pub fn example3(resolutions: Vec<usize>) -> Self {
        Self {
            experiment: ExperimentKind::Example3,
            degree: 0,
            mesh: MeshConfig {
                family: FamilyKind::UniformQuad,
                resolutions,
                distortion: None,
                path: None,
            },
            solver: SolverConfig::newton(),
            physics: PhysicsConfig {
                mu: CoefficientLaw::exp(-1.0),
                kappa: CoefficientLaw::exp(1.0),
                g: [0.0, 1.0],
                ra: 100.0,
                pr: 1.0,
                scaled: true,
                boundary_temperature: ScalarField::ShellAndTube {
                    inner: 1.0,
                    outer: -0.01,
                    split: 0.9,
                },
                domain: Domain::shell_and_tube(),
            },
            output: OutputConfig::default(),
        }
    }

    /// Defaults for `example` with the given mesh sweep.
    pub fn for_example(
        example: u8,
        family: FamilyKind,
        degree: usize,
        resolutions: Vec<usize>,
    ) -> Result<Self> {
        let mut cfg = match example {
            1 => Self::example1(family, degree, resolutions),
            2 => Self::example2(family, resolutions),
            3 => Self::example3(resolutions),
            _ => {
                return Err(Error::Config(format!(
                    "unknown example {example}; expected 1, 2 or 3"
                )))
            }
        };
        cfg.degree = degree;
        cfg.mesh.family = family;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree > 1 {
            return Err(Error::Config(format!(
                "degree must be 0 or 1, got {}",
                self.degree
            )));
        }
        if self.mesh.resolutions.is_empty() {
            return Err(Error::Config(
                "at least one mesh resolution is required".into(),
            ));
        }
        if self.mesh.resolutions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "mesh resolutions must be strictly increasing".into(),
            ));
        }
        if self.mesh.resolutions[0] == 0 {
            return Err(Error::Config("mesh resolutions must be at least 1".into()));
        }
        if !(self.physics.ra > 0.0 && self.physics.pr > 0.0) {
            return Err(Error::Config("Ra and Pr must be positive".into()));
        }
        if self.mesh.family == FamilyKind::FromFile && self.mesh.path.is_none() {
            return Err(Error::Config("family `from_file` needs `mesh.path`".into()));
        }
        self.solver.validate()
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }

    pub fn coefficients(&self) -> Coefficients {
        let p = &self.physics;
        if p.scaled {
            Coefficients::natural_convection(p.mu, p.kappa, p.g, p.ra, p.pr)
        } else {
            Coefficients::new(p.mu, p.kappa, p.g)
        }
    }

    /// The manufactured solution, for `example1`.
    pub fn exact(&self) -> Option<Example1> {
        (self.experiment == ExperimentKind::Example1).then_some(Example1 {
            mu: self.physics.mu,
            kappa: self.physics.kappa,
            g: self.physics.g,
        })
    }

    pub fn problem(&self) -> Problem {
        let p = Problem::new(self.coefficients(), self.physics.boundary_temperature);
        match self.exact() {
            Some(e) => p.with_sources(Arc::new(e)),
            None => p,
        }
    }

    pub fn mesh(&self, n: usize) -> Result<PolygonalMesh> {
        let kind = match self.mesh.family {
            FamilyKind::UniformQuad => MeshKind::UniformQuad,
            FamilyKind::DistortedQuad => MeshKind::DistortedQuad,
            FamilyKind::Hexagonal => MeshKind::Hexagonal,
            FamilyKind::NonConvex => MeshKind::NonConvex,
            FamilyKind::FromFile => MeshKind::FromFile(self.mesh.path.clone().unwrap_or_default()),
        };
        let family = MeshFamily {
            kind,
            n,
            distortion: self.mesh.distortion,
        };
        generate(&family, &self.physics.domain)
    }
}

/// Scalar record of one solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub n: usize,
    pub h: f64,
    pub n_cells: usize,
    pub flow_dofs: usize,
    pub heat_dofs: usize,
    pub iterations: usize,
    /// Coupled residual norm at the returned state.
    pub residual: f64,
    pub errors: Option<ErrorReport>,
    /// `errors` divided by the norms of the exact fields.
    pub relative_errors: Option<ErrorReport>,
    pub max_velocity: f64,
    /// Sum of boundary fluxes of ρ_h and the sum of their absolute values.
    pub boundary_flux: [f64; 2],
    pub momentum_balance: f64,
}

#[derive(Debug, Clone)]
pub struct LevelRun {
    pub mesh: PolygonalMesh,
    pub solution: DiscreteSolution,
    pub trace: SolveTrace,
    pub summary: LevelSummary,
}

impl LevelRun {
    pub fn discretization(&self, r: usize) -> Result<Discretization<'_>> {
        Discretization::new(&self.mesh, r)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub levels: Vec<LevelRun>,
    /// Present for `example1` with at least two levels.
    pub table: Option<RateTable>,
}

pub fn solve_level(config: &ExperimentConfig, n: usize) -> Result<LevelRun> {
    let mesh = config.mesh(n)?;
    let problem = config.problem();
    let disc = Discretization::new(&mesh, config.degree)?;
    let (solution, trace) = solve(&disc, &problem, &config.solver, None)?;
    let (errors, relative_errors) = match config.exact() {
        Some(e) => {
            let err = compute_errors(&disc, &solution, &e)?;
            (Some(err), Some(err.relative_to(&exact_norms(&disc, &e)?)))
        }
        None => (None, None),
    };
    let (flux, flux_abs) = boundary_flux(&disc, &solution);
    let summary = LevelSummary {
        n,
        h: mesh.h(),
        n_cells: mesh.n_cells(),
        flow_dofs: disc.dofmap.flow_dim,
        heat_dofs: disc.dofmap.heat_dim,
        iterations: trace.n_iterations(),
        residual: residual_norm(&disc, &problem, &solution)?,
        errors,
        relative_errors,
        max_velocity: max_velocity(&disc, &solution),
        boundary_flux: [flux, flux_abs],
        momentum_balance: momentum_balance(&disc, &problem, &solution)?,
    };
    drop(disc);
    Ok(LevelRun {
        mesh,
        solution,
        trace,
        summary,
    })
}

/// Solves every resolution (concurrently) and builds the rate table when an exact solution exists.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let levels = config
        .mesh
        .resolutions
        .par_iter()
        .map(|&n| solve_level(config, n))
        .collect::<Result<Vec<_>>>()?;
    let reports: Vec<ErrorReport> = levels.iter().filter_map(|l| l.summary.errors).collect();
    let table = if reports.len() >= 2 {
        Some(rate_table(&reports)?)
    } else {
        None
    };
    Ok(RunOutput { levels, table })
}

pub fn run_example1(config: &ExperimentConfig) -> Result<RunOutput> {
    expect_kind(config, ExperimentKind::Example1)?;
    run(config)
}

pub fn run_example2(config: &ExperimentConfig) -> Result<RunOutput> {
    expect_kind(config, ExperimentKind::Example2)?;
    run(config)
}

pub fn run_example3(config: &ExperimentConfig) -> Result<RunOutput> {
    expect_kind(config, ExperimentKind::Example3)?;
    if !matches!(config.physics.domain, Domain::DiskWithHoles { .. }) {
        return Err(Error::Config(
            "example3 needs a disk-with-holes domain".into(),
        ));
    }
    run(config)
}

fn expect_kind(config: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if config.experiment == kind {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "expected a {kind:?} configuration, got {:?}",
            config.experiment
        )))
    }
}

impl RunOutput {
    /// Writes `summary.json`, `rates.csv` and the flag-gated per-level files into `config.output.dir`.
    pub fn write(&self, config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
        let out = &config.output;
        std::fs::create_dir_all(&out.dir)?;
        let mut written = Vec::new();
        let summaries: Vec<&LevelSummary> = self.levels.iter().map(|l| &l.summary).collect();
        let path = out.dir.join("summary.json");
        std::fs::write(&path, serde_json::to_string_pretty(&summaries)?)?;
        written.push(path);
        if let Some(t) = &self.table {
            let path = out.dir.join("rates.csv");
            t.write_csv(&path)?;
            written.push(path);
        }
        let problem = config.problem();
        for level in &self.levels {
            let n = level.summary.n;
            if out.trace {
                let path = out.dir.join(format!("level_{n}_trace.json"));
                level.trace.write_json(&path)?;
                written.push(path);
            }
            if !(out.export_vtk || out.export_systems) {
                continue;
            }
            let disc = level.discretization(config.degree)?;
            if out.export_vtk {
                let path = out.dir.join(format!("level_{n}.vtk"));
                export_fields(&disc, &level.solution, &path)?;
                written.push(path);
            }
            if out.export_systems {
                let state = level.solution.unshifted(&disc);
                let heat = assemble_heat(&disc, &problem, &state, &state)?;
                let flow = assemble_flow(&disc, &problem, &state, &state)?;
                for (name, sys) in [("heat", heat), ("flow", flow)] {
                    let path = out.dir.join(format!("level_{n}_{name}.mtx"));
                    sys.write_matrix_market(&path)?;
                    written.push(path);
                }
            }
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests;
