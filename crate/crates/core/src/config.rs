//! Reproducible run description.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureParams;
use crate::sources::{classify_exponents, SourceSpec};
use crate::spectrum::{DomainSpec, SpectralBasis, DEFAULT_EIGEN_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Imex,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeAmplitude {
    pub j: usize,
    pub amplitude: f64,
}

/// Initial displacement or velocity profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialProfile {
    Constant {
        value: f64,
    },
    Eigenmode {
        j: usize,
        amplitude: f64,
    },
    Mix {
        modes: Vec<ModeAmplitude>,
    },
    /// `Σ_k coeffs[k] x^k`, projected onto the basis.
    Polynomial {
        coeffs: Vec<f64>,
    },
}

impl Default for InitialProfile {
    fn default() -> Self {
        InitialProfile::Constant { value: 0.0 }
    }
}

impl InitialProfile {
    /// Galerkin coefficients of the projected profile.
    pub fn project(&self, basis: &SpectralBasis) -> Result<Vec<f64>> {
        let n = basis.len();
        let check = |j: usize| {
            if j == 0 || j > n {
                Err(Error::Config(format!(
                    "initial eigenmode {j} outside 1..={n}"
                )))
            } else {
                Ok(j - 1)
            }
        };
        match self {
            InitialProfile::Constant { value } => {
                if *value == 0.0 {
                    Ok(vec![0.0; n])
                } else {
                    Ok(basis.project(|_| *value))
                }
            }
            InitialProfile::Eigenmode { j, amplitude } => {
                let mut c = vec![0.0; n];
                c[check(*j)?] = *amplitude;
                Ok(c)
            }
            InitialProfile::Mix { modes } => {
                let mut c = vec![0.0; n];
                for m in modes {
                    c[check(m.j)?] += m.amplitude;
                }
                Ok(c)
            }
            InitialProfile::Polynomial { coeffs } => {
                Ok(basis.project(|x| coeffs.iter().rev().fold(0.0, |acc, a| acc * x + a)))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct InitialData {
    pub u0: InitialProfile,
    #[serde(default)]
    pub u1: InitialProfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AutoKeyword {
    #[serde(rename = "auto")]
    Auto,
}

/// `"auto"` or an explicit value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamChoice {
    Value(f64),
    Auto(AutoKeyword),
}

impl Default for ParamChoice {
    fn default() -> Self {
        ParamChoice::Auto(AutoKeyword::Auto)
    }
}

impl ParamChoice {
    pub fn value(&self) -> Option<f64> {
        match self {
            ParamChoice::Value(v) => Some(*v),
            ParamChoice::Auto(_) => None,
        }
    }
}

/// Outcome the run is expected to produce; a global run that blows up exits
/// with a distinct code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Global,
    Blowup,
}

fn default_threshold() -> f64 {
    1e6
}
fn default_residual_tol() -> f64 {
    1e-3
}
fn default_record_every() -> usize {
    1
}
fn default_eigen_tol() -> f64 {
    DEFAULT_EIGEN_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub p: f64,
    pub sources: SourceSpec,
    #[serde(default)]
    pub domain: DomainSpec,
    pub modes: usize,
    #[serde(default)]
    pub quadrature: QuadratureParams,
    pub dt0: f64,
    pub t_end: f64,
    #[serde(default = "default_threshold")]
    pub blowup_threshold: f64,
    /// Per-step energy-identity residual allowed relative to `max(1, 𝓔)`.
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    pub initial_data: InitialData,
    #[serde(default)]
    pub alpha: ParamChoice,
    #[serde(default)]
    pub beta: ParamChoice,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub expect: Option<Expectation>,
    #[serde(default = "default_eigen_tol")]
    pub eigen_tol: f64,
    /// Run even when the exponents fall outside the admissible window.
    #[serde(default)]
    pub allow_inadmissible: bool,
}

impl SimulationConfig {
    /// Power-law sources, IMEX stepping and default numerics.
    pub fn new(p: f64, q: f64, r: f64, length: f64, modes: usize, u0: InitialProfile) -> Self {
        Self {
            p,
            sources: SourceSpec::power_law(q, r),
            domain: DomainSpec { length },
            modes,
            quadrature: QuadratureParams::default(),
            dt0: 1e-3,
            t_end: 1.0,
            blowup_threshold: default_threshold(),
            residual_tol: default_residual_tol(),
            scheme: Scheme::Imex,
            record_every: 1,
            initial_data: InitialData {
                u0,
                u1: InitialProfile::default(),
            },
            alpha: ParamChoice::default(),
            beta: ParamChoice::default(),
            seed: 0,
            expect: None,
            eigen_tol: DEFAULT_EIGEN_TOL,
            allow_inadmissible: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.p > 2.0 && self.p < 3.0) {
            return bad(format!("p = {} must lie in (2, 3)", self.p));
        }
        if self.modes == 0 {
            return bad("modes must be at least 1".into());
        }
        if !(self.dt0 > 0.0 && self.dt0.is_finite()) {
            return bad(format!("dt0 must be positive, got {}", self.dt0));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.domain.length > 0.0 && self.domain.length.is_finite()) {
            return bad(format!(
                "domain length must be positive, got {}",
                self.domain.length
            ));
        }
        if self.quadrature.subintervals == 0 || self.quadrature.points == 0 {
            return bad("quadrature needs at least one subinterval and one point".into());
        }
        if !(self.blowup_threshold > 0.0) {
            return bad("blowup_threshold must be positive".into());
        }
        if !(self.residual_tol > 0.0) {
            return bad("residual_tol must be positive".into());
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1".into());
        }
        if !(self.eigen_tol > 0.0) {
            return bad("eigen_tol must be positive".into());
        }
        if let Some(a) = self.alpha.value() {
            if !(a > 0.0 && a < 0.5) {
                return bad(format!("alpha must lie in (0, 1/2), got {a}"));
            }
        }
        if let Some(b) = self.beta.value() {
            if !(b > 0.0 && b < 0.5) {
                return bad(format!("beta must lie in (0, 1/2), got {b}"));
            }
        }
        self.sources.validate()?;
        let regime = classify_exponents(self.p, self.sources.q, self.sources.r)?;
        if !regime.admissible_3d && !self.allow_inadmissible {
            return bad(format!(
                "exponents q = {}, r = {} are outside the admissible window for p = {}; set allow_inadmissible to override",
                self.sources.q, self.sources.r, self.p
            ));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn build_basis(&self) -> Result<SpectralBasis> {
        SpectralBasis::with_params(self.domain, self.modes, self.eigen_tol, self.quadrature)
    }
}
