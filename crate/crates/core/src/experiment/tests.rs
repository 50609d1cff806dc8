use super::*;

fn small(kind: u8) -> ExperimentConfig {
    let mut c =
        ExperimentConfig::for_example(kind, FamilyKind::UniformQuad, 0, vec![2, 4]).unwrap();
    c.solver.tolerance = 1e-9;
    c
}

#[test]
fn toml_round_trip_for_every_example() {
    for k in 1..=3 {
        let mut c = small(k);
        c.output.export_vtk = true;
        let s = c.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&s).unwrap(), c, "{s}");
    }
}

#[test]
fn hand_written_document_parses() {
    let doc = r#"
experiment = "custom"
degree = 1

[mesh]
family = "distorted_quad"
resolutions = [4, 8]
distortion = 0.2

[solver]
mode = "picard"
tolerance = 1e-8

[physics]
mu = { law = "exp", factor = 1.0, rate = -0.5 }
kappa = { law = "constant", value = 2.0 }
g = [0.0, -1.0]
ra = 10.0
pr = 0.7
scaled = true
boundary_temperature = { kind = "heated_bottom" }
domain = { type = "rectangle", min = [0.0, 0.0], max = [1.0, 2.0] }
"#;
    let c = ExperimentConfig::from_toml_str(doc).unwrap();
    c.validate().unwrap();
    assert_eq!(c.mesh.distortion, Some(0.2));
    assert_eq!(
        c.solver.max_iterations,
        SolverConfig::default().max_iterations
    );
    assert_eq!(c.output, OutputConfig::default());
    assert_eq!(c.physics.kappa, CoefficientLaw::constant(2.0));
}

#[test]
fn unknown_keys_are_rejected() {
    let mut s = small(1).to_toml_string().unwrap();
    s = s.replacen("degree = 0", "degree = 0\nbogus = 1", 1);
    assert!(matches!(
        ExperimentConfig::from_toml_str(&s),
        Err(Error::Config(_))
    ));
}

#[test]
fn validation() {
    let bad = |f: &dyn Fn(&mut ExperimentConfig)| {
        let mut c = small(1);
        f(&mut c);
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        assert!(run(&c).is_err());
    };
    bad(&|c| c.mesh.resolutions.clear());
    bad(&|c| c.mesh.resolutions = vec![0, 2]);
    bad(&|c| c.mesh.resolutions = vec![4, 2]);
    bad(&|c| c.mesh.resolutions = vec![4, 4]);
    bad(&|c| c.degree = 2);
    bad(&|c| c.physics.ra = 0.0);
    bad(&|c| c.physics.pr = -1.0);
    bad(&|c| c.mesh.family = FamilyKind::FromFile);
    assert!(ExperimentConfig::for_example(4, FamilyKind::Hexagonal, 0, vec![2]).is_err());
}

#[test]
fn example_runners_check_the_kind() {
    assert!(run_example2(&small(1)).is_err());
    assert!(run_example1(&small(3)).is_err());
    let mut c = small(3);
    c.physics.domain = Domain::square(0.0, 1.0);
    assert!(run_example3(&c).is_err());
}

#[test]
fn example1_sweep_produces_table_and_errors_decrease() {
    let out = run_example1(&small(1)).unwrap();
    let t = out.table.as_ref().unwrap();
    assert_eq!(t.rows.len(), 2);
    let (a, b) = (
        out.levels[0].summary.errors.unwrap(),
        out.levels[1].summary.errors.unwrap(),
    );
    assert!(b.sigma < a.sigma && b.phi < a.phi);
    for l in &out.levels {
        assert!(l.summary.residual < 1e-6, "{}", l.summary.residual);
        assert_eq!(l.summary.n_cells, l.summary.n * l.summary.n);
    }
}

#[test]
fn single_level_has_no_table() {
    let mut c = small(1);
    c.mesh.resolutions = vec![4];
    assert!(run(&c).unwrap().table.is_none());
    let mut c = small(2);
    c.physics.ra = 10.0;
    assert!(run(&c).unwrap().table.is_none());
}

#[test]
fn rerun_writes_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small(1);
    c.output = OutputConfig {
        dir: dir.path().join("a"),
        export_vtk: true,
        export_systems: true,
        trace: true,
    };
    let files_a = run(&c).unwrap().write(&c).unwrap();
    c.output.dir = dir.path().join("b");
    let files_b = run(&c).unwrap().write(&c).unwrap();
    // summary, rates, and per level: trace, vtk, heat, flow (+ two rhs files)
    assert_eq!(files_a.len(), 2 + 2 * 4);
    assert_eq!(files_a.len(), files_b.len());
    for (a, b) in files_a.iter().zip(&files_b) {
        assert_eq!(a.file_name(), b.file_name());
        assert_eq!(
            std::fs::read(a).unwrap(),
            std::fs::read(b).unwrap(),
            "{a:?}"
        );
    }
    let csv = std::fs::read_to_string(dir.path().join("a/rates.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(dir.path().join("a/level_4_flow_rhs.mtx").exists());
}

#[test]
fn example3_runs_on_the_coarsest_mesh() {
    let mut c = small(3);
    c.mesh.resolutions = vec![1];
    let out = run_example3(&c).unwrap();
    let s = &out.levels[0].summary;
    assert!(s.errors.is_none());
    assert!(s.max_velocity.is_finite() && s.boundary_flux[1] > 0.0);
}

#[test]
fn coarsest_nonconvex_relative_errors_match_reference_order() {
    let mut c = ExperimentConfig::example1(FamilyKind::NonConvex, 0, vec![4]);
    c.solver.tolerance = 1e-8;
    let rel = solve_level(&c, 4).unwrap().summary.relative_errors.unwrap();
    // Reference r = 0 row for the coarsest non-convex mesh: e(σ), e(u), e(φ).
    for (ours, reference) in [
        (rel.sigma, 6.972e-1),
        (rel.u, 7.601e-1),
        (rel.phi, 4.190e-1),
    ] {
        let ratio = ours / reference;
        assert!((1.0 / 3.0..=3.0).contains(&ratio), "{ours} vs {reference}");
    }
}
