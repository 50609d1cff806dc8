use super::*;
use crate::assembly::{build_dofmap, LinearSystem};
use crate::manufactured::Example1;
use crate::mesh::{generate, BoundaryTag, Domain, MeshFamily, MeshKind, PolygonalMesh};
use crate::model::{CoefficientLaw, Coefficients, ScalarField};
use nalgebra::DVector;

fn quads(n: usize) -> PolygonalMesh {
    generate(
        &MeshFamily::new(MeshKind::UniformQuad, n),
        &Domain::square(-1.0, 1.0),
    )
    .unwrap()
}

fn zero_data() -> Problem {
    Problem::new(
        Coefficients::new(
            CoefficientLaw::exp(-0.25),
            CoefficientLaw::exp(0.25),
            [0.0, 0.0],
        ),
        ScalarField::Constant { value: 0.0 },
    )
}

#[test]
fn identity_system_returns_rhs() {
    let mut sys = LinearSystem::new(5);
    sys.triplets = (0..5).map(|i| (i, i, 1.0)).collect();
    sys.rhs = DVector::from_fn(5, |i, _| i as f64 - 1.5);
    assert_eq!(linear_solve(&sys).unwrap(), sys.rhs);
}

#[test]
fn single_cell_heat_solve_matches_dense_oracle() {
    let v = [
        (0.0, 0.0),
        (0.5, 0.0),
        (0.65, 0.35),
        (0.35, 0.65),
        (0.5, 1.0),
        (0.0, 1.0),
    ];
    let mesh = PolygonalMesh::build_from_arrays(
        v.iter().map(|&(x, y)| crate::Point::new(x, y)).collect(),
        vec![(0..6).collect()],
        |_, _| BoundaryTag::GammaD,
    )
    .unwrap();
    let disc = Discretization::new(&mesh, 1).unwrap();
    let p = Problem::new(
        Coefficients::new(
            CoefficientLaw::constant(1.0),
            CoefficientLaw::exp(0.3),
            [0.0, 1.0],
        ),
        ScalarField::HeatedBottom,
    );
    let mut lag = DiscreteSolution::zeros(&disc.dofmap);
    lag.heat.fill(0.2);
    lag.flow.fill(-0.1);
    let sys = assemble_heat(&disc, &p, &lag, &lag).unwrap();
    let x = linear_solve(&sys).unwrap();
    let dense = sys.to_dense().lu().solve(&sys.rhs).unwrap();
    assert!((x - &dense).amax() < 1e-12 * dense.amax().max(1.0));
}

#[test]
fn flow_system_without_trace_constraint_is_singular() {
    let mesh = quads(2);
    let disc = Discretization::new(&mesh, 0).unwrap();
    let p = Example1::default().problem();
    let zero = DiscreteSolution::zeros(&disc.dofmap);
    let mut sys = assemble_flow(&disc, &p, &zero, &zero).unwrap();
    sys.triplets
        .retain(|&(i, j, _)| i != disc.dofmap.lambda && j != disc.dofmap.lambda);
    // Keep the dimension: drop σ row 0 of the kernel direction instead of λ.
    sys.triplets
        .push((disc.dofmap.lambda, disc.dofmap.lambda, 1.0));
    sys.rhs[disc.dofmap.lambda] = 0.0;
    assert!(matches!(linear_solve(&sys), Err(Error::SingularMatrix(_))));
}

#[test]
fn zero_data_gives_zero_state_in_one_iteration() {
    let mesh = quads(4);
    for r in 0..2 {
        let disc = Discretization::new(&mesh, r).unwrap();
        for cfg in [SolverConfig::picard(), SolverConfig::newton()] {
            let (sol, trace) = solve(&disc, &zero_data(), &cfg, None).unwrap();
            assert_eq!(trace.n_iterations(), 1);
            assert_eq!(sol.flow.amax(), 0.0);
            assert_eq!(sol.heat.amax(), 0.0);
        }
    }
}

#[test]
fn picard_and_newton_agree_on_example1() {
    let mesh = quads(8);
    let disc = Discretization::new(&mesh, 0).unwrap();
    let p = Example1::default().problem();
    let (a, ta) = picard_solve(&disc, &p, &SolverConfig::picard(), None).unwrap();
    let (b, tb) = newton_solve(&disc, &p, &SolverConfig::newton(), None).unwrap();
    assert!(ta.n_iterations() <= 30, "{}", ta.n_iterations());
    assert!(tb.n_iterations() <= 8, "{}", tb.n_iterations());
    let cfg = SolverConfig::picard();
    assert!(residual_norm(&disc, &p, &a).unwrap() <= 10.0 * cfg.tolerance);
    assert!(residual_norm(&disc, &p, &b).unwrap() <= 10.0 * cfg.tolerance);
    // Both fixed points, resolved well below the agreement threshold.
    let tight = SolverConfig {
        tolerance: 1e-11,
        ..SolverConfig::picard()
    };
    let (a, _) = picard_solve(&disc, &p, &tight, None).unwrap();
    assert!((&a.flow - &b.flow).amax() < 1e-8);
    assert!((&a.heat - &b.heat).amax() < 1e-8);
}

#[test]
fn newton_converges_superlinearly() {
    let mesh = quads(8);
    let disc = Discretization::new(&mesh, 1).unwrap();
    let p = Example1::default().problem();
    let cfg = SolverConfig {
        tolerance: 1e-11,
        ..SolverConfig::newton()
    };
    let (_, t) = newton_solve(&disc, &p, &cfg, None).unwrap();
    let inc: Vec<f64> = t.iterations.iter().map(|r| r.increment).collect();
    let n = inc.len();
    assert!(n >= 3, "{inc:?}");
    // e_{k+1} ≤ C e_k² with a modest C, or already at round-off.
    for k in n - 3..n - 1 {
        assert!(
            inc[k + 1] <= 10.0 * inc[k] * inc[k] || inc[k + 1] < 1e-12,
            "{inc:?}"
        );
    }
}

#[test]
fn frozen_linear_limit_matches_one_shot_solve() {
    let mesh = generate(
        &MeshFamily::new(MeshKind::Hexagonal, 4),
        &Domain::square(-1.0, 1.0),
    )
    .unwrap();
    let disc = Discretization::new(&mesh, 1).unwrap();
    let mut p = Problem::new(
        Coefficients::new(
            CoefficientLaw::constant(0.8),
            CoefficientLaw::constant(1.7),
            [0.2, 1.0],
        ),
        ScalarField::HeatedBottom,
    );
    p.convection = false;
    let cfg = SolverConfig {
        tolerance: 1e-12,
        ..SolverConfig::picard()
    };
    let (pic, _) = picard_solve(&disc, &p, &cfg, None).unwrap();
    let zero = DiscreteSolution::zeros(&disc.dofmap);
    let (res, jac) = crate::assembly::assemble_coupled(&disc, &p, &zero).unwrap();
    assert!((jac.rhs.clone() + &res).amax() == 0.0);
    let x = linear_solve(&jac).unwrap();
    let one_shot = DiscreteSolution::from_coupled(&disc.dofmap, &x);
    let pic = pic.unshifted(&disc);
    let scale = x.amax();
    assert!((&pic.flow - &one_shot.flow).amax() < 1e-12 * scale);
    assert!((&pic.heat - &one_shot.heat).amax() < 1e-12 * scale);
}

fn heated_problem(scale: f64) -> Problem {
    let mut c = Example1::default().coefficients();
    c.g = [0.0, 20.0 * scale];
    Problem::new(c, ScalarField::Constant { value: 0.8 * scale })
}

#[test]
fn smaller_data_needs_fewer_picard_iterations() {
    let mesh = generate(
        &MeshFamily::new(MeshKind::NonConvex, 4),
        &Domain::square(-1.0, 1.0),
    )
    .unwrap();
    let disc = Discretization::new(&mesh, 0).unwrap();
    let cfg = SolverConfig::picard();
    let (_, big) = picard_solve(&disc, &heated_problem(1.0), &cfg, None).unwrap();
    let (_, small) = picard_solve(&disc, &heated_problem(0.1), &cfg, None).unwrap();
    assert!(
        small.n_iterations() < big.n_iterations(),
        "{} vs {}",
        small.n_iterations(),
        big.n_iterations()
    );
}

#[test]
fn repeated_solves_give_identical_traces() {
    let mesh = generate(
        &MeshFamily::new(MeshKind::Hexagonal, 4),
        &Domain::square(-1.0, 1.0),
    )
    .unwrap();
    let disc = Discretization::new(&mesh, 1).unwrap();
    let p = Example1::default().problem();
    let (a, ta) = newton_solve(&disc, &p, &SolverConfig::newton(), None).unwrap();
    let (b, tb) = newton_solve(&disc, &p, &SolverConfig::newton(), None).unwrap();
    assert_eq!(
        serde_json::to_string(&ta).unwrap(),
        serde_json::to_string(&tb).unwrap()
    );
    assert_eq!(a, b);
}

#[test]
fn iteration_cap_reports_trace() {
    let mesh = quads(4);
    let disc = Discretization::new(&mesh, 0).unwrap();
    let cfg = SolverConfig {
        max_iterations: 2,
        ..SolverConfig::picard()
    };
    match picard_solve(&disc, &heated_problem(1.0), &cfg, None) {
        Err(Error::NoConvergence {
            iterations, trace, ..
        }) => {
            assert_eq!(iterations, 2);
            assert_eq!(trace.iterations.len(), 2);
            assert!(!trace.converged);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn neumann_only_temperature_boundary_is_rejected() {
    let mut mesh = quads(2);
    mesh.retag_boundary(|_, _| BoundaryTag::GammaN);
    assert_eq!(build_dofmap(&mesh, 0).constrained_rho.len(), 8);
    let disc = Discretization::new(&mesh, 0).unwrap();
    assert!(matches!(
        picard_solve(&disc, &zero_data(), &SolverConfig::picard(), None),
        Err(Error::NoDirichletBoundary)
    ));
}

#[test]
fn given_initial_state_is_used() {
    let mesh = quads(4);
    let disc = Discretization::new(&mesh, 0).unwrap();
    let p = Example1::default().problem();
    let (sol, _) = newton_solve(&disc, &p, &SolverConfig::newton(), None).unwrap();
    let cfg = SolverConfig {
        initial: InitialState::Given,
        warm_start_sweeps: 0,
        ..SolverConfig::newton()
    };
    let (again, t) = newton_solve(&disc, &p, &cfg, Some(&sol)).unwrap();
    assert!(t.n_iterations() <= 2);
    assert!((&again.flow - &sol.flow).amax() < 1e-8);
    assert!(matches!(
        newton_solve(&disc, &p, &cfg, None),
        Err(Error::Config(_))
    ));
}

#[test]
fn config_validation_and_round_trip() {
    assert!(SolverConfig {
        tolerance: 0.0,
        ..Default::default()
    }
    .validate()
    .is_err());
    assert!(SolverConfig {
        max_iterations: 0,
        ..Default::default()
    }
    .validate()
    .is_err());
    assert!(SolverConfig {
        damping: 1.5,
        ..Default::default()
    }
    .validate()
    .is_err());
    let cfg = SolverConfig {
        mode: SolverMode::Picard,
        damping: 0.5,
        ..Default::default()
    };
    let s = serde_json::to_string(&cfg).unwrap();
    assert_eq!(serde_json::from_str::<SolverConfig>(&s).unwrap(), cfg);
}

#[test]
fn trace_serializes_to_json() {
    let mesh = quads(2);
    let disc = Discretization::new(&mesh, 0).unwrap();
    let (_, t) = picard_solve(
        &disc,
        &Example1::default().problem(),
        &SolverConfig::picard(),
        None,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.json");
    t.write_json(&path).unwrap();
    let back: SolveTrace = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(back, t);
}

#[test]
fn pinned_trace_solve_matches_full_solve() {
    let mesh = generate(
        &MeshFamily::new(MeshKind::NonConvex, 3),
        &Domain::square(-1.0, 1.0),
    )
    .unwrap();
    for r in 0..=1 {
        let disc = Discretization::new(&mesh, r).unwrap();
        let d = &disc.dofmap;
        let p = Example1::default().problem();
        let mut lag = DiscreteSolution::zeros(d);
        lag.flow
            .iter_mut()
            .enumerate()
            .for_each(|(i, v)| *v = (i as f64 * 0.37).sin());
        lag.heat
            .iter_mut()
            .enumerate()
            .for_each(|(i, v)| *v = 0.3 * (i as f64 * 0.11).cos());
        let mut sys = assemble_flow(&disc, &p, &lag, &lag).unwrap();
        sys.rhs[d.lambda] = 0.7;
        let full = linear_solve(&sys).unwrap();
        let (x, stats) =
            kernel_constrained_solve(&sys, d.lambda, &identity_kernel(&disc, d.flow_dim)).unwrap();
        assert!((&x - &full).amax() < 1e-10 * full.amax(), "r={r}");
        assert!(stats.relative_residual < 1e-12);
    }
}

#[test]
fn pinned_trace_solve_rejects_kernel_orthogonal_to_constraint() {
    let mut sys = LinearSystem::new(2);
    sys.triplets = vec![(0, 0, 1.0), (1, 0, 1.0)];
    let k = DVector::from_vec(vec![0.0, 1.0]);
    assert!(matches!(
        kernel_constrained_solve(&sys, 1, &k),
        Err(Error::SingularMatrix(_))
    ));
}
