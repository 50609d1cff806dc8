//! Picard and Newton drivers over a sparse direct solver.

mod linear;

pub use linear::{
    kernel_constrained_solve, linear_solve, linear_solve_with_stats, LinearSolveStats, SparseLu,
};

use crate::assembly::{
    add_identity_to_sigma, assemble_coupled, assemble_flow, assemble_heat, coupled_residual,
    DiscreteSolution, Discretization,
};
use crate::model::Problem;
use crate::{Error, Result};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMode {
    Picard,
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Zero,
    Given,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub mode: SolverMode,
    /// Bound on the ℓ² norm of the increment of all DoFs.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub initial: InitialState,
    pub damping: f64,
    /// Picard sweeps before Newton starts.
    pub warm_start_sweeps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mode: SolverMode::Newton,
            tolerance: 1e-6,
            max_iterations: 50,
            initial: InitialState::Zero,
            damping: 1.0,
            warm_start_sweeps: 1,
        }
    }
}

impl SolverConfig {
    pub fn picard() -> Self {
        Self {
            mode: SolverMode::Picard,
            ..Self::default()
        }
    }

    pub fn newton() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::Config(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Config(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub increment: f64,
    /// Coupled residual norm at the iterate before the update (Newton only).
    pub residual: Option<f64>,
    pub linear_solves: Vec<LinearSolveStats>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub mode: Option<SolverMode>,
    pub warm_start: Vec<IterationRecord>,
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
    /// Constant `c` of the final shift `σ_h ← σ_h + c I`.
    pub trace_shift: f64,
}

impl SolveTrace {
    pub fn n_iterations(&self) -> usize {
        self.iterations.len()
    }

    pub fn final_increment(&self) -> Option<f64> {
        self.iterations.last().map(|r| r.increment)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer_pretty(f, self)?;
        Ok(())
    }
}

fn initial_state(
    disc: &Discretization<'_>,
    config: &SolverConfig,
    given: Option<&DiscreteSolution>,
) -> Result<DiscreteSolution> {
    match (config.initial, given) {
        (InitialState::Zero, _) => Ok(DiscreteSolution::zeros(&disc.dofmap)),
        (InitialState::Given, Some(s)) => {
            let d = &disc.dofmap;
            if s.flow.len() != d.flow_dim || s.heat.len() != d.heat_dim {
                return Err(Error::Config(
                    "initial state does not match the discretization".into(),
                ));
            }
            Ok(s.unshifted(disc))
        }
        (InitialState::Given, None) => Err(Error::Config(
            "initial state policy `given` needs a state".into(),
        )),
    }
}

/// One application of the discrete fixed-point map: heat with `(z, φ)`, then flow with `(z, φ*)`.
fn picard_sweep(
    disc: &Discretization<'_>,
    problem: &Problem,
    state: &DiscreteSolution,
) -> Result<(DiscreteSolution, Vec<LinearSolveStats>)> {
    let heat_sys = assemble_heat(disc, problem, state, state)?;
    let (heat, s1) = linear_solve_with_stats(&heat_sys)?;
    let star = DiscreteSolution {
        flow: state.flow.clone(),
        heat,
        shift: 0.0,
    };
    let flow_sys = assemble_flow(disc, problem, state, &star)?;
    let (flow, s2) = kernel_constrained_solve(
        &flow_sys,
        disc.dofmap.lambda,
        &identity_kernel(disc, disc.dofmap.flow_dim),
    )?;
    Ok((
        DiscreteSolution {
            flow,
            heat: star.heat,
            shift: 0.0,
        },
        vec![s1, s2],
    ))
}

/// DoFs of `σ = I` padded with zeros to `dim`: the null direction of every row but the trace constraint.
fn identity_kernel(disc: &Discretization<'_>, dim: usize) -> DVector<f64> {
    let mut k = DVector::zeros(dim);
    add_identity_to_sigma(disc, &mut k, 1.0);
    k
}

fn damped(old: &DVector<f64>, new: &DVector<f64>, theta: f64) -> DVector<f64> {
    if theta == 1.0 {
        new.clone()
    } else {
        old + (new - old) * theta
    }
}

fn increment_norm(a: &DiscreteSolution, b: &DiscreteSolution) -> f64 {
    ((&a.flow - &b.flow).norm_squared() + (&a.heat - &b.heat).norm_squared()).sqrt()
}

/// `c = −(1/(2|Ω|)) ∫ |u_h|²`.
pub fn trace_shift(disc: &Discretization<'_>, state: &DiscreteSolution) -> f64 {
    let d = &disc.dofmap;
    let mut total = 0.0;
    for c in 0..d.n_cells {
        let sp = &disc.spaces[c];
        let u = state.u_cell(d, c);
        total += sp
            .quad
            .integrate(|x| sp.basis.eval_vector(u, x).norm_squared());
    }
    -total / (2.0 * disc.mesh.area())
}

fn finish(
    disc: &Discretization<'_>,
    mut state: DiscreteSolution,
    trace: &mut SolveTrace,
) -> DiscreteSolution {
    let c = trace_shift(disc, &state);
    add_identity_to_sigma(disc, &mut state.flow, c);
    state.shift = c;
    trace.trace_shift = c;
    trace.converged = true;
    state
}

fn check_boundary(disc: &Discretization<'_>) -> Result<()> {
    if disc.mesh.has_dirichlet_boundary() {
        Ok(())
    } else {
        Err(Error::NoDirichletBoundary)
    }
}

pub fn picard_solve(
    disc: &Discretization<'_>,
    problem: &Problem,
    config: &SolverConfig,
    given: Option<&DiscreteSolution>,
) -> Result<(DiscreteSolution, SolveTrace)> {
    config.validate()?;
    check_boundary(disc)?;
    let mut state = initial_state(disc, config, given)?;
    let mut trace = SolveTrace {
        mode: Some(SolverMode::Picard),
        ..Default::default()
    };
    for it in 1..=config.max_iterations {
        let (cand, stats) = picard_sweep(disc, problem, &state)?;
        let next = DiscreteSolution {
            flow: damped(&state.flow, &cand.flow, config.damping),
            heat: damped(&state.heat, &cand.heat, config.damping),
            shift: 0.0,
        };
        let inc = increment_norm(&next, &state);
        trace.iterations.push(IterationRecord {
            iteration: it,
            increment: inc,
            residual: None,
            linear_solves: stats,
        });
        state = next;
        if inc <= config.tolerance {
            let sol = finish(disc, state, &mut trace);
            return Ok((sol, trace));
        }
    }
    Err(no_convergence(trace))
}

fn no_convergence(trace: SolveTrace) -> Error {
    Error::NoConvergence {
        iterations: trace.iterations.len(),
        last_increment: trace.final_increment().unwrap_or(f64::NAN),
        trace: Box::new(trace),
    }
}

pub fn newton_solve(
    disc: &Discretization<'_>,
    problem: &Problem,
    config: &SolverConfig,
    given: Option<&DiscreteSolution>,
) -> Result<(DiscreteSolution, SolveTrace)> {
    config.validate()?;
    check_boundary(disc)?;
    let d = &disc.dofmap;
    let mut state = initial_state(disc, config, given)?;
    let mut trace = SolveTrace {
        mode: Some(SolverMode::Newton),
        ..Default::default()
    };
    for it in 1..=config.warm_start_sweeps {
        let (next, stats) = picard_sweep(disc, problem, &state)?;
        trace.warm_start.push(IterationRecord {
            iteration: it,
            increment: increment_norm(&next, &state),
            residual: None,
            linear_solves: stats,
        });
        state = next;
    }
    let mut x = state.coupled();
    let kernel = identity_kernel(disc, d.coupled_dim());
    for it in 1..=config.max_iterations {
        let current = DiscreteSolution::from_coupled(d, &x);
        let (res, jac) = assemble_coupled(disc, problem, &current)?;
        let (delta, stats) = match kernel_constrained_solve(&jac, d.lambda, &kernel) {
            Ok(v) => v,
            Err(Error::SingularMatrix(_)) => return Err(Error::SingularJacobian),
            Err(e) => return Err(e),
        };
        let step = delta * config.damping;
        let inc = step.norm();
        x += step;
        trace.iterations.push(IterationRecord {
            iteration: it,
            increment: inc,
            residual: Some(res.norm()),
            linear_solves: vec![stats],
        });
        if inc <= config.tolerance {
            let sol = finish(disc, DiscreteSolution::from_coupled(d, &x), &mut trace);
            return Ok((sol, trace));
        }
    }
    Err(no_convergence(trace))
}

/// Dispatches on `config.mode`.
pub fn solve(
    disc: &Discretization<'_>,
    problem: &Problem,
    config: &SolverConfig,
    given: Option<&DiscreteSolution>,
) -> Result<(DiscreteSolution, SolveTrace)> {
    match config.mode {
        SolverMode::Picard => picard_solve(disc, problem, config, given),
        SolverMode::Newton => newton_solve(disc, problem, config, given),
    }
}

/// Coupled residual norm of a state, evaluated with its trace shift removed.
pub fn residual_norm(
    disc: &Discretization<'_>,
    problem: &Problem,
    state: &DiscreteSolution,
) -> Result<f64> {
    Ok(coupled_residual(disc, problem, &state.unshifted(disc))?.norm())
}

#[cfg(test)]
mod tests;
