//! Interior and boundary sources `f`, `h`, their primitives, truncations and
//! the exponent-regime classifier.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_space::{w1p_norm, NodalFunction};

/// One term `coef · |s|^{exponent-1} s` of a custom source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub coef: f64,
    pub exponent: f64,
}

impl PowerTerm {
    fn eval(&self, s: f64) -> f64 {
        if s == 0.0 {
            0.0
        } else {
            self.coef * s.abs().powf(self.exponent - 1.0) * s
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum SourceForm {
    /// `f(s) = (q+1)|s|^{q-1}s`, `h(s) = (r+1)|s|^{r-1}s`.
    PowerLaw,
    /// `f(s) = a s`, `h(s) = b s`.
    Linear {
        interior_slope: f64,
        boundary_slope: f64,
    },
    /// Sums of signed power terms.
    Custom {
        interior: Vec<PowerTerm>,
        boundary: Vec<PowerTerm>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Truncation {
    #[default]
    None,
    /// Rescale the argument onto the `W^{1,p}` ball of radius `k`.
    NormBall { k: f64 },
    /// Multiply by the smooth cutoff `η_n`.
    Cutoff { n: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    #[serde(flatten)]
    pub form: SourceForm,
    pub q: f64,
    pub r: f64,
    #[serde(default)]
    pub truncation: Truncation,
    /// Growth constant `C` in `|f(s)| ≤ C(|s|^q + 1)`; derived from the form
    /// when absent.
    #[serde(default)]
    pub growth_constant: Option<f64>,
    /// Local Lipschitz estimates; `None` means unknown.
    #[serde(default)]
    pub lipschitz_f: Option<f64>,
    #[serde(default)]
    pub lipschitz_h: Option<f64>,
}

impl SourceSpec {
    pub fn power_law(q: f64, r: f64) -> Self {
        Self {
            form: SourceForm::PowerLaw,
            q,
            r,
            truncation: Truncation::None,
            growth_constant: None,
            lipschitz_f: None,
            lipschitz_h: None,
        }
    }

    pub fn with_truncation(mut self, truncation: Truncation) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q >= 1.0 && self.r >= 1.0) {
            return Err(Error::Config(format!(
                "source exponents must satisfy q, r >= 1 (q = {}, r = {})",
                self.q, self.r
            )));
        }
        match self.truncation {
            Truncation::NormBall { k } if !(k > 0.0) => {
                return Err(Error::Config(format!(
                    "norm-ball radius must be positive, got {k}"
                )))
            }
            Truncation::Cutoff { n } if !(n > 0.0) => {
                return Err(Error::Config(format!(
                    "cutoff level must be positive, got {n}"
                )))
            }
            _ => {}
        }
        if let Some(c) = self.growth_constant {
            if !(c > 0.0) {
                return Err(Error::Config(format!(
                    "growth constant must be positive, got {c}"
                )));
            }
        }
        Ok(())
    }

    pub fn f(&self, s: f64) -> f64 {
        match &self.form {
            SourceForm::PowerLaw => power_law(self.q, s),
            SourceForm::Linear { interior_slope, .. } => interior_slope * s,
            SourceForm::Custom { interior, .. } => interior.iter().map(|t| t.eval(s)).sum(),
        }
    }

    pub fn h(&self, s: f64) -> f64 {
        match &self.form {
            SourceForm::PowerLaw => power_law(self.r, s),
            SourceForm::Linear { boundary_slope, .. } => boundary_slope * s,
            SourceForm::Custom { boundary, .. } => boundary.iter().map(|t| t.eval(s)).sum(),
        }
    }

    /// `F(s) = ∫_0^s f`.
    pub fn primitive_f(&self, s: f64) -> f64 {
        match &self.form {
            SourceForm::PowerLaw => s.abs().powf(self.q + 1.0),
            SourceForm::Linear { interior_slope, .. } => 0.5 * interior_slope * s * s,
            SourceForm::Custom { .. } => adaptive_simpson(|x| self.f(x), 0.0, s, 1e-12),
        }
    }

    /// `H(s) = ∫_0^s h`.
    pub fn primitive_h(&self, s: f64) -> f64 {
        match &self.form {
            SourceForm::PowerLaw => s.abs().powf(self.r + 1.0),
            SourceForm::Linear { boundary_slope, .. } => 0.5 * boundary_slope * s * s,
            SourceForm::Custom { .. } => adaptive_simpson(|x| self.h(x), 0.0, s, 1e-12),
        }
    }

    /// Constant `C` of the envelope `|f(s)| ≤ C(|s|^q+1)`, `|h(s)| ≤ C(|s|^r+1)`.
    pub fn growth_constant(&self) -> f64 {
        if let Some(c) = self.growth_constant {
            return c;
        }
        match &self.form {
            SourceForm::PowerLaw => (self.q + 1.0).max(self.r + 1.0),
            SourceForm::Linear {
                interior_slope,
                boundary_slope,
            } => interior_slope.abs().max(boundary_slope.abs()),
            SourceForm::Custom { interior, boundary } => {
                let sum = |ts: &[PowerTerm]| ts.iter().map(|t| t.coef.abs()).sum::<f64>();
                sum(interior).max(sum(boundary))
            }
        }
    }

    /// Constant of the local Lipschitz envelope
    /// `|f(a)-f(b)| ≤ C(|a|^{q-1}+|b|^{q-1}+1)|a-b|`.
    pub fn lipschitz_envelope_constant(&self) -> f64 {
        match &self.form {
            SourceForm::PowerLaw => 3.0 * (self.q.max(self.r) + 1.0),
            SourceForm::Linear { .. } => self.growth_constant(),
            SourceForm::Custom { interior, boundary } => {
                let sum = |ts: &[PowerTerm]| {
                    ts.iter()
                        .map(|t| t.coef.abs() * t.exponent.max(1.0))
                        .sum::<f64>()
                };
                3.0 * sum(interior).max(sum(boundary))
            }
        }
    }

    /// Pointwise sources in effect for a state with `‖u‖_{1,p} = norm`.
    pub fn effective(&self, norm: f64) -> EffectiveSource<'_> {
        let scale = match self.truncation {
            Truncation::NormBall { k } if norm > k => k / norm,
            _ => 1.0,
        };
        EffectiveSource { spec: self, scale }
    }

    pub fn needs_norm(&self) -> bool {
        matches!(self.truncation, Truncation::NormBall { .. })
    }
}

fn power_law(e: f64, s: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        (e + 1.0) * s.abs().powf(e - 1.0) * s
    }
}

/// Truncated sources evaluated pointwise; the norm-ball scaling is fixed at
/// construction.
#[derive(Debug, Clone, Copy)]
pub struct EffectiveSource<'a> {
    spec: &'a SourceSpec,
    scale: f64,
}

impl EffectiveSource<'_> {
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn f(&self, s: f64) -> f64 {
        match self.spec.truncation {
            Truncation::None => self.spec.f(s),
            Truncation::NormBall { .. } => {
                if self.scale == 1.0 {
                    self.spec.f(s)
                } else {
                    self.spec.f(self.scale * s)
                }
            }
            Truncation::Cutoff { n } => self.spec.f(s) * cutoff_eta(n, s),
        }
    }

    pub fn h(&self, s: f64) -> f64 {
        match self.spec.truncation {
            Truncation::None => self.spec.h(s),
            Truncation::NormBall { .. } => {
                if self.scale == 1.0 {
                    self.spec.h(s)
                } else {
                    self.spec.h(self.scale * s)
                }
            }
            Truncation::Cutoff { n } => self.spec.h(s) * cutoff_eta(n, s),
        }
    }
}

/// Norm-ball truncation `f_K`, `h_K` for the state `u`.
pub fn truncate_norm_ball<'a>(
    spec: &'a SourceSpec,
    u: &NodalFunction<'_>,
    p: f64,
) -> EffectiveSource<'a> {
    spec.effective(w1p_norm(u, p))
}

/// Cubic-smoothstep cutoff: 1 on `|s| ≤ n`, 0 on `|s| ≥ 2n`, `|η'| ≤ 1.5/n`.
pub fn cutoff_eta(n: f64, s: f64) -> f64 {
    let a = s.abs();
    if a <= n {
        1.0
    } else if a >= 2.0 * n {
        0.0
    } else {
        let t = 2.0 - a / n;
        t * t * (3.0 - 2.0 * t)
    }
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(&f, a, b, fa, fm, fb, whole, tol, 40)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RegimeThresholds {
    /// Interior admissibility bound `5p/(2(3-p))`.
    pub interior_critical: f64,
    /// Boundary admissibility bound `3p/(2(3-p))`.
    pub boundary_critical: f64,
    /// Global-existence bound `p/2`.
    pub global: f64,
    /// Blow-up window lower bound `p-1`.
    pub blowup: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RegimeReport {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub admissible_3d: bool,
    pub global_guaranteed: bool,
    pub blowup_candidate: bool,
    pub thresholds: RegimeThresholds,
    pub geometry_note: String,
}

pub fn classify_exponents(p: f64, q: f64, r: f64) -> Result<RegimeReport> {
    if !(p > 2.0 && p < 3.0) {
        return Err(Error::InvalidP(p));
    }
    let thresholds = RegimeThresholds {
        interior_critical: 5.0 * p / (2.0 * (3.0 - p)),
        boundary_critical: 3.0 * p / (2.0 * (3.0 - p)),
        global: p / 2.0,
        blowup: p - 1.0,
    };
    let admissible_3d = q >= 1.0
        && r >= 1.0
        && q < thresholds.interior_critical
        && r < thresholds.boundary_critical;
    let global_guaranteed = admissible_3d && q <= thresholds.global && r <= thresholds.global;
    let blowup_candidate = admissible_3d && q > thresholds.blowup && r > thresholds.blowup;
    Ok(RegimeReport {
        p,
        q,
        r,
        admissible_3d,
        global_guaranteed,
        blowup_candidate,
        thresholds,
        geometry_note: "exponent thresholds are the three-dimensional Sobolev/trace bounds; \
                        the simulated geometry is a one-dimensional interval"
            .into(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub growth_constant: f64,
    pub lipschitz_constant: f64,
    pub max_growth_ratio: f64,
    pub max_lipschitz_ratio: f64,
    pub ok: bool,
}

/// Samples the growth and local Lipschitz envelopes of both sources on
/// `[-range, range]`. Ratios are measured against the envelope; `ok` means
/// every ratio is at most one.
pub fn validate_growth(spec: &SourceSpec, range: f64, samples: usize) -> GrowthReport {
    let c = spec.growth_constant();
    let cl = spec.lipschitz_envelope_constant();
    let pts: Vec<f64> = (0..=samples)
        .map(|i| -range + 2.0 * range * i as f64 / samples as f64)
        .collect();
    let mut growth: f64 = 0.0;
    let mut lip: f64 = 0.0;
    let pairs: [(&dyn Fn(f64) -> f64, f64); 2] =
        [(&|s| spec.f(s), spec.q), (&|s| spec.h(s), spec.r)];
    for (g, e) in pairs {
        for &s in &pts {
            growth = growth.max(g(s).abs() / (c * (s.abs().powf(e) + 1.0)));
        }
        for (i, &a) in pts.iter().enumerate() {
            for &b in pts.iter().skip(i + 1).step_by(7) {
                let env =
                    cl * (a.abs().powf(e - 1.0) + b.abs().powf(e - 1.0) + 1.0) * (a - b).abs();
                lip = lip.max((g(a) - g(b)).abs() / env);
            }
        }
    }
    GrowthReport {
        growth_constant: c,
        lipschitz_constant: cl,
        max_growth_ratio: growth,
        max_lipschitz_ratio: lip,
        ok: growth <= 1.0 && lip <= 1.0,
    }
}
