//! Coefficient laws, problem data and source terms.

use crate::{Error, Point, Result};
use nalgebra::Vector2;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// `Constant(c)` or `c·exp(a·φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum CoefficientLaw {
    Constant { value: f64 },
    Exp { factor: f64, rate: f64 },
}

impl CoefficientLaw {
    pub fn exp(rate: f64) -> Self {
        CoefficientLaw::Exp { factor: 1.0, rate }
    }

    pub fn constant(value: f64) -> Self {
        CoefficientLaw::Constant { value }
    }

    pub fn value(&self, phi: f64) -> f64 {
        match *self {
            CoefficientLaw::Constant { value } => value,
            CoefficientLaw::Exp { factor, rate } => factor * (rate * phi).exp(),
        }
    }

    pub fn derivative(&self, phi: f64) -> f64 {
        match *self {
            CoefficientLaw::Constant { .. } => 0.0,
            CoefficientLaw::Exp { factor, rate } => factor * rate * (rate * phi).exp(),
        }
    }
}

/// Viscosity and conductivity laws, body force and the natural-convection scalings.
///
/// The momentum equation solved is
/// `-div(s_m μ(φ) e(u)) + (∇u)u + ∇p = s_b φ g + f`, with `s_m = 2 Pr` and
/// `s_b = Ra Pr` in the dimensionless cavity form and `s_m = s_b = 1` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub mu: CoefficientLaw,
    pub kappa: CoefficientLaw,
    pub g: [f64; 2],
    #[serde(default = "one")]
    pub momentum_scale: f64,
    #[serde(default = "one")]
    pub buoyancy_scale: f64,
}

fn one() -> f64 {
    1.0
}

impl Coefficients {
    pub fn new(mu: CoefficientLaw, kappa: CoefficientLaw, g: [f64; 2]) -> Self {
        Self {
            mu,
            kappa,
            g,
            momentum_scale: 1.0,
            buoyancy_scale: 1.0,
        }
    }

    /// Dimensionless natural-convection scaling with Rayleigh and Prandtl numbers.
    pub fn natural_convection(
        mu: CoefficientLaw,
        kappa: CoefficientLaw,
        g: [f64; 2],
        ra: f64,
        pr: f64,
    ) -> Self {
        Self {
            mu,
            kappa,
            g,
            momentum_scale: 2.0 * pr,
            buoyancy_scale: ra * pr,
        }
    }

    /// Effective viscosity and its derivative; fails on non-positive values.
    pub fn mu_eff(&self, phi: f64) -> Result<(f64, f64)> {
        let v = self.momentum_scale * self.mu.value(phi);
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::CoefficientOutOfBounds {
                name: "mu",
                value: v,
            });
        }
        Ok((v, self.momentum_scale * self.mu.derivative(phi)))
    }

    pub fn kappa_eff(&self, phi: f64) -> Result<(f64, f64)> {
        let v = self.kappa.value(phi);
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::CoefficientOutOfBounds {
                name: "kappa",
                value: v,
            });
        }
        Ok((v, self.kappa.derivative(phi)))
    }

    pub fn g_eff(&self) -> Vector2<f64> {
        Vector2::new(self.g[0], self.g[1]) * self.buoyancy_scale
    }
}

/// Whitelisted scalar fields for boundary temperatures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarField {
    Constant {
        value: f64,
    },
    /// `½(1 − cos 2πx)(1 − y)`.
    HeatedBottom,
    /// `inner` on hole boundaries (points with `|x| < split`), `outer` elsewhere.
    ShellAndTube {
        inner: f64,
        outer: f64,
        split: f64,
    },
}

impl ScalarField {
    pub fn eval(&self, p: Point) -> f64 {
        match *self {
            ScalarField::Constant { value } => value,
            ScalarField::HeatedBottom => 0.5 * (1.0 - (2.0 * PI * p.x).cos()) * (1.0 - p.y),
            ScalarField::ShellAndTube {
                inner,
                outer,
                split,
            } => {
                if p.norm() < split {
                    inner
                } else {
                    outer
                }
            }
        }
    }
}

/// Extra volume sources: `f` in the momentum equation and `q` in the energy equation.
pub trait SourceTerms: Send + Sync {
    fn momentum(&self, p: Point) -> Vector2<f64>;
    fn heat(&self, p: Point) -> f64;
}

#[derive(Clone)]
pub struct Problem {
    pub coefficients: Coefficients,
    pub boundary_temperature: ScalarField,
    pub sources: Option<Arc<dyn SourceTerms>>,
    /// When false the convective terms `u⊗u` and `uφ` are dropped.
    pub convection: bool,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("coefficients", &self.coefficients)
            .field("boundary_temperature", &self.boundary_temperature)
            .field("sources", &self.sources.is_some())
            .field("convection", &self.convection)
            .finish()
    }
}

impl Problem {
    pub fn new(coefficients: Coefficients, boundary_temperature: ScalarField) -> Self {
        Self {
            coefficients,
            boundary_temperature,
            sources: None,
            convection: true,
        }
    }

    pub fn with_sources(mut self, sources: Arc<dyn SourceTerms>) -> Self {
        self.sources = Some(sources);
        self
    }

    pub fn momentum_source(&self, p: Point) -> Vector2<f64> {
        self.sources
            .as_ref()
            .map_or(Vector2::zeros(), |s| s.momentum(p))
    }

    pub fn heat_source(&self, p: Point) -> f64 {
        self.sources.as_ref().map_or(0.0, |s| s.heat(p))
    }

    /// True when every datum that drives the solution vanishes.
    pub fn is_homogeneous(&self) -> bool {
        self.coefficients.g == [0.0, 0.0]
            && self.boundary_temperature == ScalarField::Constant { value: 0.0 }
            && self.sources.is_none()
    }
}
