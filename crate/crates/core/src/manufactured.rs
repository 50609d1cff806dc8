//! Smooth manufactured solution on `(-1, 1)²` with closed-form derivatives.
//!
//! `u = curl(F(x)F(y))` with `F(t) = (t² − 1) sin(πt)`, `p = x² − y²` and
//! `φ = (x² − 1)(y² − 1)`; the momentum and energy sources make these exact.

use crate::model::{CoefficientLaw, Coefficients, Problem, ScalarField, SourceTerms};
use crate::Point;
use nalgebra::{Matrix2, Vector2};
use std::f64::consts::PI;
use std::sync::Arc;

/// Exact fields used for error measurement.
pub trait ExactSolution: Send + Sync {
    fn sigma(&self, p: Point) -> Matrix2<f64>;
    fn div_sigma(&self, p: Point) -> Vector2<f64>;
    fn velocity(&self, p: Point) -> Vector2<f64>;
    /// Scalar `w` with vorticity `w [[0, 1], [-1, 0]]`.
    fn vorticity(&self, p: Point) -> f64;
    fn pressure(&self, p: Point) -> f64;
    fn rho(&self, p: Point) -> Vector2<f64>;
    fn div_rho(&self, p: Point) -> f64;
    fn temperature(&self, p: Point) -> f64;
}

/// `F` and its first three derivatives.
fn f4(t: f64) -> [f64; 4] {
    let (s, c) = ((PI * t).sin(), (PI * t).cos());
    let q = t * t - 1.0;
    [
        q * s,
        2.0 * t * s + PI * q * c,
        2.0 * s + 4.0 * PI * t * c - PI * PI * q * s,
        6.0 * PI * c - 6.0 * PI * PI * t * s - PI.powi(3) * q * c,
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example1 {
    pub mu: CoefficientLaw,
    pub kappa: CoefficientLaw,
    pub g: [f64; 2],
}

impl Default for Example1 {
    fn default() -> Self {
        Self {
            mu: CoefficientLaw::exp(-0.25),
            kappa: CoefficientLaw::exp(0.25),
            g: [0.0, 1.0],
        }
    }
}

impl Example1 {
    pub fn coefficients(&self) -> Coefficients {
        Coefficients::new(self.mu, self.kappa, self.g)
    }

    pub fn problem(&self) -> Problem {
        Problem::new(self.coefficients(), ScalarField::Constant { value: 0.0 })
            .with_sources(Arc::new(*self))
    }

    fn grad_u(&self, p: Point) -> Matrix2<f64> {
        let (a, b) = (f4(p.x), f4(p.y));
        Matrix2::new(a[1] * b[1], a[0] * b[2], -a[2] * b[0], -a[1] * b[1])
    }

    fn strain(&self, p: Point) -> Matrix2<f64> {
        let g = self.grad_u(p);
        (g + g.transpose()) * 0.5
    }

    fn div_strain(&self, p: Point) -> Vector2<f64> {
        let (a, b) = (f4(p.x), f4(p.y));
        Vector2::new(
            0.5 * a[2] * b[1] + 0.5 * a[0] * b[3],
            -0.5 * a[1] * b[2] - 0.5 * a[3] * b[0],
        )
    }

    fn grad_phi(&self, p: Point) -> Vector2<f64> {
        Vector2::new(2.0 * p.x * (p.y * p.y - 1.0), 2.0 * p.y * (p.x * p.x - 1.0))
    }

    /// `div(μ(φ) e(u))`.
    fn div_viscous(&self, p: Point) -> Vector2<f64> {
        let phi = self.temperature(p);
        let (mu, dmu) = (self.mu.value(phi), self.mu.derivative(phi));
        self.div_strain(p) * mu + self.strain(p) * self.grad_phi(p) * dmu
    }

    fn convection(&self, p: Point) -> Vector2<f64> {
        self.grad_u(p) * self.velocity(p)
    }
}

impl ExactSolution for Example1 {
    fn sigma(&self, p: Point) -> Matrix2<f64> {
        let u = self.velocity(p);
        self.strain(p) * self.mu.value(self.temperature(p))
            - u * u.transpose()
            - Matrix2::identity() * self.pressure(p)
    }

    fn div_sigma(&self, p: Point) -> Vector2<f64> {
        self.div_viscous(p) - self.convection(p) - Vector2::new(2.0 * p.x, -2.0 * p.y)
    }

    fn velocity(&self, p: Point) -> Vector2<f64> {
        let (a, b) = (f4(p.x), f4(p.y));
        Vector2::new(a[0] * b[1], -a[1] * b[0])
    }

    fn vorticity(&self, p: Point) -> f64 {
        let (a, b) = (f4(p.x), f4(p.y));
        0.5 * (a[0] * b[2] + a[2] * b[0])
    }

    fn pressure(&self, p: Point) -> f64 {
        p.x * p.x - p.y * p.y
    }

    fn rho(&self, p: Point) -> Vector2<f64> {
        let phi = self.temperature(p);
        self.grad_phi(p) * self.kappa.value(phi) - self.velocity(p) * phi
    }

    fn div_rho(&self, p: Point) -> f64 {
        -self.heat(p)
    }

    fn temperature(&self, p: Point) -> f64 {
        (p.x * p.x - 1.0) * (p.y * p.y - 1.0)
    }
}

impl SourceTerms for Example1 {
    /// `-div(μ e(u)) + (∇u)u + ∇p − φ g`.
    fn momentum(&self, p: Point) -> Vector2<f64> {
        -self.div_viscous(p) + self.convection(p) + Vector2::new(2.0 * p.x, -2.0 * p.y)
            - Vector2::new(self.g[0], self.g[1]) * self.temperature(p)
    }

    /// `-div(κ ∇φ) + u·∇φ`.
    fn heat(&self, p: Point) -> f64 {
        let phi = self.temperature(p);
        let gp = self.grad_phi(p);
        let lap = 2.0 * (p.y * p.y - 1.0) + 2.0 * (p.x * p.x - 1.0);
        -(self.kappa.value(phi) * lap + self.kappa.derivative(phi) * gp.norm_squared())
            + self.velocity(p).dot(&gp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: f64 = 1e-5;

    fn d<F: Fn(Point) -> f64>(f: F, p: Point, dir: Vector2<f64>) -> f64 {
        (f(p + dir * H) - f(p - dir * H)) / (2.0 * H)
    }

    const PTS: [(f64, f64); 3] = [(0.3, -0.6), (-0.71, 0.2), (0.05, 0.93)];

    #[test]
    fn derivatives_of_f() {
        for t in [-0.8, 0.1, 0.55] {
            for k in 0..3 {
                let fd = (f4(t + H)[k] - f4(t - H)[k]) / (2.0 * H);
                assert!((fd - f4(t)[k + 1]).abs() < 1e-6, "k = {k}");
            }
        }
    }

    #[test]
    fn velocity_is_divergence_free_and_vanishes_on_boundary() {
        let e = Example1::default();
        let (ex, ey) = (Vector2::x(), Vector2::y());
        for (x, y) in PTS {
            let p = Point::new(x, y);
            let div = d(|q| e.velocity(q).x, p, ex) + d(|q| e.velocity(q).y, p, ey);
            assert!(div.abs() < 1e-8);
        }
        for t in [-0.4, 0.3] {
            for p in [
                Point::new(1.0, t),
                Point::new(-1.0, t),
                Point::new(t, 1.0),
                Point::new(t, -1.0),
            ] {
                assert!(e.velocity(p).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn divergences_match_finite_differences() {
        let e = Example1::default();
        let (ex, ey) = (Vector2::x(), Vector2::y());
        for (x, y) in PTS {
            let p = Point::new(x, y);
            for i in 0..2 {
                let fd = d(|q| e.sigma(q)[(i, 0)], p, ex) + d(|q| e.sigma(q)[(i, 1)], p, ey);
                assert!((fd - e.div_sigma(p)[i]).abs() < 1e-6);
            }
            let fd = d(|q| e.rho(q).x, p, ex) + d(|q| e.rho(q).y, p, ey);
            assert!((fd - e.div_rho(p)).abs() < 1e-6);
            // div σ = −φ g − f
            let lhs = e.div_sigma(p);
            let rhs = -Vector2::new(0.0, 1.0) * e.temperature(p) - e.momentum(p);
            assert!((lhs - rhs).norm() < 1e-12);
            let w = 0.5 * (d(|q| e.velocity(q).x, p, ey) - d(|q| e.velocity(q).y, p, ex));
            assert!((w - e.vorticity(p)).abs() < 1e-7);
        }
    }

    #[test]
    fn pressure_from_trace() {
        let e = Example1::default();
        let p = Point::new(0.2, -0.4);
        let u = e.velocity(p);
        let rec = -0.5 * (e.sigma(p).trace() + u.norm_squared());
        assert!((rec - e.pressure(p)).abs() < 1e-13);
    }
}
