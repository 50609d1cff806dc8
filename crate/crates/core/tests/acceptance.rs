//! Acceptance checks, one test per criterion. Each prints a `criterion N: PASS|FAIL` line
//! (written past the test harness capture) before asserting.

use bousvem::assembly::{
    assemble_coupled, coupled_residual, inf_sup_constants, DiscreteSolution, Discretization,
};
use bousvem::experiment::{run, solve_level, ExperimentConfig, FamilyKind};
use bousvem::manufactured::Example1;
use bousvem::mesh::{generate, Domain, MeshFamily, MeshKind, Polygon};
use bousvem::model::{CoefficientLaw, Coefficients, Problem, ScalarField};
use bousvem::polyspace::{exponents, l2_project, quad_rule, ScaledMonomialBasis};
use bousvem::solver::{solve, SolverConfig};
use bousvem::vemlocal::{local_forms, InterpolationRule, LocalState, LocalVemSpace};
use bousvem::Point;
use gauss_quad::GaussLegendre;
use nalgebra::{DVector, Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::num::NonZeroUsize;
use std::time::Instant;

const FIELDS: [&str; 6] = ["sigma", "u", "gamma", "p", "rho", "phi"];

fn verdict(n: u32, pass: bool, detail: impl std::fmt::Display) {
    let line = format!(
        "criterion {n:>2}: {} | {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
    assert!(pass, "criterion {n} failed: {detail}");
}

fn fmt_rates(r: &[f64; 6]) -> String {
    FIELDS
        .iter()
        .zip(r)
        .map(|(n, v)| format!("{n}={v:.3}"))
        .collect::<Vec<_>>()
        .join(" ")
}

// ---------------------------------------------------------------------------
// Independent polygon integration: Green's theorem with the x-antiderivative
// evaluated by a nested Gauss–Legendre rule. Exact for polynomial integrands of
// moderate degree; shares nothing with the library's triangulated rules.

struct GreenRule {
    gl: Vec<(f64, f64)>,
}

impl GreenRule {
    fn new(n: usize) -> Self {
        let rule = GaussLegendre::new(NonZeroUsize::new(n).unwrap());
        Self {
            gl: rule.iter().map(|&(x, w)| (x, w)).collect(),
        }
    }

    /// `∫_E g` via `∮ F dy` with `∂F/∂x = g`, `F(x0, y) = 0`.
    fn integrate(&self, poly: &Polygon, g: &dyn Fn(Point) -> f64) -> f64 {
        let v = &poly.vertices;
        let x0 = v.iter().map(|p| p.x).sum::<f64>() / v.len() as f64;
        let mut total = 0.0;
        for j in 0..v.len() {
            let (a, b) = (v[j], v[(j + 1) % v.len()]);
            let dy = (b.y - a.y) / 2.0;
            if dy == 0.0 {
                continue;
            }
            for &(t, wt) in &self.gl {
                let p = a + (b - a) * ((t + 1.0) / 2.0);
                let half = (p.x - x0) / 2.0;
                let f: f64 = self
                    .gl
                    .iter()
                    .map(|&(s, ws)| ws * g(Point::new(x0 + half * (s + 1.0), p.y)))
                    .sum::<f64>()
                    * half;
                total += wt * f * dy;
            }
        }
        total
    }
}

/// Scaled monomials of degree ≤ `r`, evaluated from their definition.
fn monomials(basis: &ScaledMonomialBasis, r: usize, p: Point) -> Vec<f64> {
    let (xi, eta) = (
        (p.x - basis.center.x) / basis.h,
        (p.y - basis.center.y) / basis.h,
    );
    exponents(r)
        .iter()
        .map(|&(a, b)| xi.powi(a as i32) * eta.powi(b as i32))
        .collect()
}

/// Star-shaped (possibly non-convex) random polygon.
fn random_polygon(rng: &mut ChaCha8Rng) -> Polygon {
    let k = rng.gen_range(3..=9);
    let c = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let s = rng.gen_range(0.2..1.0);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let verts = (0..k)
        .map(|i| {
            let th = phase + std::f64::consts::TAU * (i as f64 + 0.8 * rng.gen::<f64>()) / k as f64;
            let rad = s * rng.gen_range(0.35..1.0);
            c + Point::new(th.cos(), th.sin()) * rad
        })
        .collect();
    Polygon::new(verts)
}

fn random_coeffs(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn rel_diff(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1e-300)
}

// ---------------------------------------------------------------------------

fn rate_criterion(n: u32, degree: usize, budget_s: f64, check: impl Fn(usize, f64) -> bool) {
    let cfg = ExperimentConfig::example1(FamilyKind::UniformQuad, degree, vec![8, 16, 32, 64]);
    let t = Instant::now();
    let out = run(&cfg).unwrap();
    let elapsed = t.elapsed().as_secs_f64();
    let rates = out.table.unwrap().finest_rates();
    let bad: Vec<&str> = (0..6)
        .filter(|&i| !check(i, rates[i]))
        .map(|i| FIELDS[i])
        .collect();
    let pass = bad.is_empty() && elapsed <= budget_s;
    verdict(
        n,
        pass,
        format!(
            "r={degree} quads n=8..64, finest-pair rates {}; out of range: {bad:?}; {elapsed:.1}s (budget {budget_s}s)",
            fmt_rates(&rates)
        ),
    );
}

#[test]
fn criterion_01_rates_degree_0() {
    rate_criterion(1, 0, 120.0, |_, r| (0.85..=1.25).contains(&r));
}

#[test]
fn criterion_02_rates_degree_1() {
    // The pressure is accepted from 1.8 upwards (superconvergent entries).
    rate_criterion(2, 1, 600.0, |i, r| {
        if FIELDS[i] == "p" {
            r >= 1.8
        } else {
            (1.8..=2.2).contains(&r)
        }
    });
}

#[test]
fn criterion_03_hexagonal_error_magnitudes() {
    // Reference relative errors at nominal h = 1/32, which is the resolution n = 32 on (−1, 1)².
    let cfg = ExperimentConfig::example1(FamilyKind::Hexagonal, 0, vec![32]);
    let level = solve_level(&cfg, 32).unwrap();
    let rel = level.summary.relative_errors.unwrap();
    let ratios = [rel.sigma / 9.403e-2, rel.phi / 3.994e-2];
    let pass = ratios.iter().all(|q| (1.0 / 3.0..=3.0).contains(q));
    verdict(
        3,
        pass,
        format!(
            "hexagonal n=32 (diameter {:.3e}): e(sigma)={:.4e} (x{:.2} of 9.403e-2), e(phi)={:.4e} (x{:.2} of 3.994e-2)",
            level.summary.h, rel.sigma, ratios[0], rel.phi, ratios[1]
        ),
    );
}

#[test]
fn criterion_04_projection_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let green = GreenRule::new(12);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let poly = random_polygon(&mut rng);
        let r = k % 3;
        let basis = ScaledMonomialBasis::new(&poly, r);
        let quad = quad_rule(&poly, 2 * r + 6).unwrap();
        // Random polynomial of degree ≤ 5 in global coordinates.
        let exps = exponents(5);
        let c = random_coeffs(&mut rng, exps.len());
        let f = |p: Point| -> f64 {
            exps.iter()
                .zip(&c)
                .map(|(&(a, b), w)| w * p.x.powi(a as i32) * p.y.powi(b as i32))
                .sum()
        };
        let ours = l2_project(&basis, &quad, f).unwrap();

        let n = basis.dim();
        let gram = nalgebra::DMatrix::from_fn(n, n, |i, j| {
            green.integrate(&poly, &|p| {
                let m = monomials(&basis, r, p);
                m[i] * m[j]
            })
        });
        let rhs = DVector::from_fn(n, |i, _| {
            green.integrate(&poly, &|p| f(p) * monomials(&basis, r, p)[i])
        });
        let oracle = gram.lu().solve(&rhs).unwrap();
        worst = worst.max(rel_diff(&ours, &oracle));
    }
    verdict(
        4,
        worst <= 1e-12,
        format!(
            "100 random polygons, r in 0..=2, worst relative deviation {worst:.2e} (tol 1e-12)"
        ),
    );
}

#[test]
fn criterion_05_reproduction_and_commutativity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut repro, mut comm): (f64, f64) = (0.0, 0.0);
    for k in 0..100 {
        let poly = random_polygon(&mut rng);
        let r = k % 2;
        let sp = LocalVemSpace::new(&poly, r).unwrap();
        let pr = sp.n_poly();
        let rule = InterpolationRule::default();

        let qt = DVector::from_vec(random_coeffs(&mut rng, 4 * pr));
        let dofs = sp
            .interpolate_tensor(|x| sp.basis.eval_tensor(qt.as_slice(), x), rule)
            .unwrap();
        repro = repro.max(rel_diff(&(&sp.proj_t * dofs), &qt));
        let qv = DVector::from_vec(random_coeffs(&mut rng, 2 * pr));
        let dofs = sp
            .interpolate_vector(|x| sp.basis.eval_vector(qv.as_slice(), x), rule)
            .unwrap();
        repro = repro.max(rel_diff(&(&sp.proj * dofs), &qv));

        let (a, b, w) = (
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.5..2.0),
        );
        let eta =
            |p: Point| Vector2::new((w * p.x).sin() * (a * p.y).exp(), (b * p.x + w * p.y).cos());
        let div_eta =
            |p: Point| w * (w * p.x).cos() * (a * p.y).exp() - w * (b * p.x + w * p.y).sin();
        let dofs = sp.interpolate_vector(eta, rule).unwrap();
        let lhs = &sp.div * dofs;
        let rhs = l2_project(&sp.basis, &quad_rule(&poly, 24).unwrap(), div_eta).unwrap();
        comm = comm.max(rel_diff(&lhs, &rhs));
    }
    let pass = repro <= 1e-12 && comm <= 1e-12;
    verdict(
        5,
        pass,
        format!("100 random polygon/field pairs, r in 0..=1: reproduction {repro:.2e}, commutativity {comm:.2e} (tol 1e-12)"),
    );
}

#[test]
fn criterion_06_patch_test() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let green = GreenRule::new(10);
    let mu = 1.7;
    let problem = Problem::new(
        Coefficients::new(
            CoefficientLaw::constant(mu),
            CoefficientLaw::constant(1.0),
            [0.0, 1.0],
        ),
        ScalarField::Constant { value: 0.0 },
    );
    let (mut stab, mut pairing): (f64, f64) = (0.0, 0.0);
    for k in 0..50 {
        let poly = random_polygon(&mut rng);
        let r = k % 2;
        let sp = LocalVemSpace::new(&poly, r).unwrap();
        let pr = sp.n_poly();
        let zero_phi = vec![0.0; pr];
        let zero_z = vec![0.0; 2 * pr];
        let state = LocalState {
            phi: &zero_phi,
            z: &zero_z,
        };
        let forms = local_forms(&sp, &problem, state, &vec![true; sp.n_edges()]).unwrap();
        let q = DVector::from_vec(random_coeffs(&mut rng, 4 * pr));
        let q_i = sp
            .interpolate_tensor(
                |x| sp.basis.eval_tensor(q.as_slice(), x),
                InterpolationRule::default(),
            )
            .unwrap();
        let s = sp.stabilization_tensor(1.0);
        stab = stab.max((&s * &q_i).amax() / (s.amax() * q_i.amax()));

        let ours = &forms.a_s * &q_i;
        let dev = |t: Matrix2<f64>| t - Matrix2::identity() * (t.trace() / 2.0);
        let oracle = DVector::from_fn(sp.n_tensor(), |j, _| {
            let ptau = sp.proj_t.column(j).into_owned();
            green.integrate(&poly, &|x| {
                dev(sp.basis.eval_tensor(q.as_slice(), x))
                    .dot(&dev(sp.basis.eval_tensor(ptau.as_slice(), x)))
                    / mu
            })
        });
        pairing = pairing.max(rel_diff(&ours, &oracle));
    }
    let pass = stab <= 1e-11 && pairing <= 1e-11;
    verdict(
        6,
        pass,
        format!("50 random polygons, r in 0..=1: stabilization on interpolants {stab:.2e}, A_S vs exact pairing {pairing:.2e} (tol 1e-11)"),
    );
}

#[test]
fn criterion_07_jacobian_finite_differences() {
    let mesh = generate(
        &MeshFamily::new(MeshKind::UniformQuad, 4),
        &Domain::square(-1.0, 1.0),
    )
    .unwrap();
    let disc = Discretization::new(&mesh, 0).unwrap();
    let d = &disc.dofmap;
    let problem = Example1::default().problem();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut state = DiscreteSolution::zeros(d);
    state
        .flow
        .iter_mut()
        .for_each(|v| *v = rng.gen_range(-1.0..1.0));
    state
        .heat
        .iter_mut()
        .for_each(|v| *v = rng.gen_range(-0.5..0.5));
    let x = state.coupled();
    let (_, jac) = assemble_coupled(&disc, &problem, &state).unwrap();
    let j = jac.to_dense();
    let h = 1e-6;
    let mut fd = nalgebra::DMatrix::zeros(x.len(), x.len());
    for c in 0..x.len() {
        let eval = |s: f64| {
            let mut y = x.clone();
            y[c] += s;
            coupled_residual(&disc, &problem, &DiscreteSolution::from_coupled(d, &y)).unwrap()
        };
        fd.set_column(c, &((eval(h) - eval(-h)) / (2.0 * h)));
    }
    let rel = (&j - &fd).amax() / j.amax();
    verdict(
        7,
        rel <= 1e-6,
        format!(
            "4x4 quads, r=0, {} unknowns, max |J - J_fd| / max |J| = {rel:.2e} (tol 1e-6)",
            x.len()
        ),
    );
}

#[test]
fn criterion_08_picard_and_newton() {
    // h = 1/8 read as the nominal 1/n (n = 8), as the cell side (n = 16) and as the
    // largest cell diameter 2√2/n ≤ 1/8 (n = 23).
    let problem = Example1::default().problem();
    let mut pass = true;
    let mut details = Vec::new();
    for n in [8, 16, 23] {
        let mesh = generate(
            &MeshFamily::new(MeshKind::UniformQuad, n),
            &Domain::square(-1.0, 1.0),
        )
        .unwrap();
        let disc = Discretization::new(&mesh, 0).unwrap();
        let (p, tp) = solve(&disc, &problem, &SolverConfig::picard(), None).unwrap();
        let (q, tq) = solve(&disc, &problem, &SolverConfig::newton(), None).unwrap();
        let diff = (&p.flow - &q.flow).amax().max((&p.heat - &q.heat).amax());
        let ok = tp.n_iterations() <= 30
            && tq.warm_start.len() == 1
            && tq.n_iterations() <= 8
            && diff <= 1e-8;
        pass &= ok;
        details.push(format!(
            "n={n}: Picard {} it, Newton {}+{} it, max DoF difference {diff:.2e}",
            tp.n_iterations(),
            tq.warm_start.len(),
            tq.n_iterations()
        ));
    }
    verdict(8, pass, details.join("; "));
}

#[test]
fn criterion_09_inf_sup_monitoring() {
    let levels = [4, 8, 16, 32];
    let constants = |r: usize| -> Vec<(f64, f64)> {
        levels
            .iter()
            .map(|&n| {
                let mesh = generate(
                    &MeshFamily::new(MeshKind::UniformQuad, n),
                    &Domain::square(-1.0, 1.0),
                )
                .unwrap();
                let c = inf_sup_constants(&Discretization::new(&mesh, r).unwrap()).unwrap();
                (c.beta_s, c.beta_t)
            })
            .collect()
    };
    let drift = |v: &[f64]| {
        v.iter()
            .map(|b| (b - v[0]).abs() / v[0])
            .fold(0.0, f64::max)
    };
    let r1 = constants(1);
    let r0 = constants(0);
    let bs1: Vec<f64> = r1.iter().map(|c| c.0).collect();
    let bt1: Vec<f64> = r1.iter().map(|c| c.1).collect();
    let bs0: Vec<f64> = r0.iter().map(|c| c.0).collect();
    let bt0: Vec<f64> = r0.iter().map(|c| c.1).collect();
    let (ds1, dt1, dt0) = (drift(&bs1), drift(&bt1), drift(&bt0));
    let pass = ds1 <= 0.2
        && dt1 <= 0.2
        && dt0 <= 0.2
        && bs1.iter().chain(&bt1).chain(&bt0).all(|&b| b > 0.0);
    let f = |v: &[f64]| {
        v.iter()
            .map(|b| format!("{b:.4}"))
            .collect::<Vec<_>>()
            .join(",")
    };
    verdict(
        9,
        pass,
        format!(
            "quads n=4..32: beta_S(r=1)=[{}] drift {:.1}%, beta_T(r=1)=[{}] drift {:.1}%, beta_T(r=0)=[{}] drift {:.1}%; \
             not checked: beta_S(r=0)=[{}]",
            f(&bs1),
            100.0 * ds1,
            f(&bt1),
            100.0 * dt1,
            f(&bt0),
            100.0 * dt0,
            f(&bs0)
        ),
    );
}

#[test]
fn criterion_10_zero_data() {
    let mesh = generate(
        &MeshFamily::new(MeshKind::NonConvex, 4),
        &Domain::square(-1.0, 1.0),
    )
    .unwrap();
    let problem = Problem::new(
        Coefficients::new(
            CoefficientLaw::exp(-0.25),
            CoefficientLaw::exp(0.25),
            [0.0, 0.0],
        ),
        ScalarField::Constant { value: 0.0 },
    );
    let mut pass = true;
    let mut details = Vec::new();
    for r in 0..=1 {
        let disc = Discretization::new(&mesh, r).unwrap();
        let mut newton = SolverConfig::newton();
        newton.warm_start_sweeps = 0;
        for (name, cfg) in [("Picard", SolverConfig::picard()), ("Newton", newton)] {
            let (s, t) = solve(&disc, &problem, &cfg, None).unwrap();
            let m = s.flow.amax().max(s.heat.amax());
            pass &= t.n_iterations() == 1 && m <= 1e-14;
            details.push(format!(
                "r={r} {name}: {} it, max |x| = {m:.1e}",
                t.n_iterations()
            ));
        }
    }
    verdict(10, pass, details.join("; "));
}

#[test]
fn criterion_11_examples_2_and_3() {
    let cfg2 = ExperimentConfig::example2(FamilyKind::Hexagonal, vec![32]);
    let hot = solve_level(&cfg2, 32).unwrap().summary;
    let mut cold_cfg = cfg2.clone();
    cold_cfg.physics.ra = 1e-6;
    let cold = solve_level(&cold_cfg, 32).unwrap().summary;
    let reduction = hot.max_velocity / cold.max_velocity;

    let cfg3 = ExperimentConfig::example3(vec![4]);
    let shell = solve_level(&cfg3, 4).unwrap().summary;
    let flux = shell.boundary_flux[0].abs() / shell.boundary_flux[1];

    let pass = reduction >= 1e3 && hot.residual <= 1e-6 && shell.residual <= 1e-6 && flux <= 1e-8;
    verdict(
        11,
        pass,
        format!(
            "example 2 (hexagonal n=32, {} cells): {} it, max|u| {:.4e} at Ra=4000 vs {:.4e} at Ra=1e-6 (reduction {reduction:.1e}); \
             example 3 ({} cells): {} it, boundary flux {:.1e} of its absolute total",
            hot.n_cells, hot.iterations, hot.max_velocity, cold.max_velocity, shell.n_cells, shell.iterations, flux
        ),
    );
}
