//! Functions on the interval sampled at quadrature nodes, and the norms and
//! pairings of the `W^{1,p}` setting: `‖u‖_{1,p} = (‖u'‖_p^p + |γu|_p^p)^{1/p}`
//! where the trace `γu` is the pair of endpoint values.

use std::ops::Deref;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;
use crate::spectrum::SpectralBasis;

/// `|z|^{e} z`, extended by 0 at `z = 0`.
#[inline]
pub fn signed_power(z: f64, e: f64) -> f64 {
    if z == 0.0 {
        0.0
    } else {
        z.abs().powf(e) * z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Interior,
    Boundary,
}

/// Values and derivatives at the quadrature nodes plus the two endpoint traces.
#[derive(Debug, Clone)]
pub struct NodalFunction<'a> {
    quad: &'a QuadratureRule,
    values: Vec<f64>,
    derivs: Vec<f64>,
    trace: [f64; 2],
}

impl<'a> NodalFunction<'a> {
    /// Samples a function given in closed form together with its derivative.
    pub fn from_fn<F, D>(quad: &'a QuadratureRule, f: F, df: D) -> Self
    where
        F: Fn(f64) -> f64,
        D: Fn(f64) -> f64,
    {
        let values = quad.nodes().iter().map(|&x| f(x)).collect();
        let derivs = quad.nodes().iter().map(|&x| df(x)).collect();
        let trace = [f(0.0), f(quad.length())];
        Self {
            quad,
            values,
            derivs,
            trace,
        }
    }

    pub fn quadrature(&self) -> &'a QuadratureRule {
        self.quad
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn derivs(&self) -> &[f64] {
        &self.derivs
    }

    pub fn trace(&self) -> [f64; 2] {
        self.trace
    }
}

/// An element `u_N = Σ c_j w_j` of the Galerkin space.
#[derive(Debug, Clone)]
pub struct DiscreteFunction<'a> {
    basis: &'a SpectralBasis,
    coeffs: Vec<f64>,
    nodal: NodalFunction<'a>,
}

impl<'a> DiscreteFunction<'a> {
    pub fn new(basis: &'a SpectralBasis, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                got: coeffs.len(),
            });
        }
        let m = basis.quadrature().len();
        let mut values = vec![0.0; m];
        let mut derivs = vec![0.0; m];
        basis.synthesize(&coeffs, false, &mut values);
        basis.synthesize(&coeffs, true, &mut derivs);
        let trace = basis.synthesize_trace(&coeffs);
        Ok(Self {
            basis,
            coeffs,
            nodal: NodalFunction {
                quad: basis.quadrature(),
                values,
                derivs,
                trace,
            },
        })
    }

    pub fn zero(basis: &'a SpectralBasis) -> Self {
        Self::new(basis, vec![0.0; basis.len()]).expect("length matches")
    }

    /// The 1-based basis function `w_j`.
    pub fn basis_function(basis: &'a SpectralBasis, j: usize) -> Result<Self> {
        if j == 0 || j > basis.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: basis.len(),
            });
        }
        let mut c = vec![0.0; basis.len()];
        c[j - 1] = 1.0;
        Self::new(basis, c)
    }

    pub fn basis(&self) -> &'a SpectralBasis {
        self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

impl<'a> Deref for DiscreteFunction<'a> {
    type Target = NodalFunction<'a>;

    fn deref(&self) -> &Self::Target {
        &self.nodal
    }
}

pub fn lp_norm(u: &NodalFunction<'_>, s: f64, region: Region) -> f64 {
    assert!(s >= 1.0, "L^s norm needs s >= 1");
    match region {
        Region::Interior => u
            .quad
            .weights()
            .iter()
            .zip(&u.values)
            .map(|(w, v)| w * v.abs().powf(s))
            .sum::<f64>()
            .powf(1.0 / s),
        Region::Boundary => (u.trace[0].abs().powf(s) + u.trace[1].abs().powf(s)).powf(1.0 / s),
    }
}

/// `‖u‖_{1,p}^p = ∫|u'|^p dx + |u(0)|^p + |u(L)|^p`.
pub fn w1p_norm_pow(u: &NodalFunction<'_>, p: f64) -> f64 {
    let interior: f64 = u
        .quad
        .weights()
        .iter()
        .zip(&u.derivs)
        .map(|(w, d)| w * d.abs().powf(p))
        .sum();
    interior + u.trace[0].abs().powf(p) + u.trace[1].abs().powf(p)
}

pub fn w1p_norm(u: &NodalFunction<'_>, p: f64) -> f64 {
    w1p_norm_pow(u, p).powf(1.0 / p)
}

/// Duality pairing `⟨-Δ_p u, φ⟩_p`.
pub fn plap_pairing(u: &NodalFunction<'_>, phi: &NodalFunction<'_>, p: f64) -> f64 {
    assert_eq!(
        u.values.len(),
        phi.values.len(),
        "functions on different quadratures"
    );
    let e = p - 2.0;
    let interior: f64 = u
        .quad
        .weights()
        .iter()
        .zip(u.derivs.iter().zip(&phi.derivs))
        .map(|(w, (du, dphi))| w * signed_power(*du, e) * dphi)
        .sum();
    let boundary =
        signed_power(u.trace[0], e) * phi.trace[0] + signed_power(u.trace[1], e) * phi.trace[1];
    interior + boundary
}

/// `(∇v, ∇φ)_Ω + (γv, γφ)_Γ`.
pub fn damping_pairing(v: &NodalFunction<'_>, phi: &NodalFunction<'_>) -> f64 {
    plap_pairing(v, phi, 2.0)
}

/// `⟨-Δ_p u + Δ_p v, u - v⟩_p`, nonnegative for a monotone operator.
pub fn monotonicity_gap(u: &NodalFunction<'_>, v: &NodalFunction<'_>, p: f64) -> f64 {
    assert_eq!(u.values.len(), v.values.len());
    let e = p - 2.0;
    let interior: f64 = u
        .quad
        .weights()
        .iter()
        .zip(u.derivs.iter().zip(&v.derivs))
        .map(|(w, (a, b))| w * (signed_power(*a, e) - signed_power(*b, e)) * (a - b))
        .sum();
    let boundary: f64 = (0..2)
        .map(|i| {
            let (a, b) = (u.trace[i], v.trace[i]);
            (signed_power(a, e) - signed_power(b, e)) * (a - b)
        })
        .sum();
    interior + boundary
}

/// Assembled `damping_pairing(w_k, w_j)` over the basis.
pub fn damping_matrix(basis: &SpectralBasis) -> Vec<Vec<f64>> {
    let fns: Vec<DiscreteFunction<'_>> = (1..=basis.len())
        .map(|j| DiscreteFunction::basis_function(basis, j).expect("in range"))
        .collect();
    fns.iter()
        .map(|a| fns.iter().map(|b| damping_pairing(a, b)).collect())
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct DualNormReport {
    pub trials: usize,
    pub max_ratio: f64,
}

pub const DUAL_NORM_QUAD_SLACK: f64 = 1e-8;

/// Checks `|⟨-Δ_p u, φ⟩_p| ≤ 2‖u‖_{1,p}^{p-1}‖φ‖_{1,p}` for random `φ ∈ V_N`
/// with coefficients uniform on [-1, 1]. The reported ratio is the left side
/// over the right side.
pub fn dual_norm_bound_check(
    u: &DiscreteFunction<'_>,
    p: f64,
    trials: usize,
    seed: u64,
) -> Result<DualNormReport> {
    let basis = u.basis();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unorm = w1p_norm(u, p);
    let mut max_ratio = 0.0f64;
    for trial in 0..trials.max(1) {
        let coeffs: Vec<f64> = (0..basis.len())
            .map(|_| rng.gen_range(-1.0..=1.0))
            .collect();
        let phi = DiscreteFunction::new(basis, coeffs)?;
        let ratio = dual_norm_ratio(u, unorm, &phi, p);
        if ratio > 1.0 + DUAL_NORM_QUAD_SLACK {
            return Err(Error::BoundViolation {
                trial,
                ratio,
                witness: phi.coeffs().to_vec(),
            });
        }
        max_ratio = max_ratio.max(ratio);
    }
    Ok(DualNormReport {
        trials: trials.max(1),
        max_ratio,
    })
}

/// `|⟨-Δ_p u, φ⟩| / (2‖u‖^{p-1}‖φ‖)`, zero when either norm vanishes.
pub fn dual_norm_ratio(u: &NodalFunction<'_>, unorm: f64, phi: &NodalFunction<'_>, p: f64) -> f64 {
    let denom = 2.0 * unorm.powf(p - 1.0) * w1p_norm(phi, p);
    if denom == 0.0 {
        0.0
    } else {
        plap_pairing(u, phi, p).abs() / denom
    }
}
