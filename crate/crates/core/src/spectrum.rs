//! Robin eigenbasis of `-d²/dx²` on `[0, L]` with `∂_ν w + w = 0` at both ends.
//!
//! Eigenfunctions have the closed form `w(x) = c (μ cos μx + sin μx)`; the
//! boundary condition at `x = 0` holds identically and the one at `x = L`
//! reduces to the characteristic equation
//! `R(μ) = (1 - μ²) sin μL + 2μ cos μL = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{QuadratureParams, QuadratureRule};

pub const DEFAULT_EIGEN_TOL: f64 = 1e-12;

/// The interval `[0, L]`; outward normals are -1 at 0 and +1 at L.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub length: f64,
}

impl DomainSpec {
    pub fn new(length: f64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidDomain(format!(
                "length must be positive, got {length}"
            )));
        }
        Ok(Self { length })
    }

    pub fn boundary_points(&self) -> [f64; 2] {
        [0.0, self.length]
    }

    pub fn outward_normals(&self) -> [f64; 2] {
        [-1.0, 1.0]
    }
}

impl Default for DomainSpec {
    fn default() -> Self {
        Self {
            length: std::f64::consts::PI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobinEigenpair {
    pub j: usize,
    pub mu: f64,
    pub lambda: f64,
    pub norm_const: f64,
}

pub fn characteristic_residual(mu: f64, length: f64) -> f64 {
    let (s, c) = (mu * length).sin_cos();
    (1.0 - mu * mu) * s + 2.0 * mu * c
}

fn characteristic_derivative(mu: f64, length: f64) -> f64 {
    let (s, c) = (mu * length).sin_cos();
    -2.0 * mu * s + (1.0 - mu * mu) * length * c + 2.0 * c - 2.0 * mu * length * s
}

/// Bisection on a sign-changing bracket down to width `tol`, followed by a
/// Newton polish that is only accepted while it stays inside the bracket and
/// lowers the residual.
pub fn refine_root(mut a: f64, mut b: f64, length: f64, tol: f64) -> f64 {
    let mut fa = characteristic_residual(a, length);
    if fa == 0.0 {
        return a;
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = characteristic_residual(m, length);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let mut x = 0.5 * (a + b);
    let mut fx = characteristic_residual(x, length).abs();
    for _ in 0..8 {
        let d = characteristic_derivative(x, length);
        if d == 0.0 {
            break;
        }
        let next = x - characteristic_residual(x, length) / d;
        if !(next >= a && next <= b) {
            break;
        }
        let fnext = characteristic_residual(next, length).abs();
        if fnext >= fx {
            break;
        }
        x = next;
        fx = fnext;
    }
    x
}

/// The first `n` Robin eigenpairs with unit `L²` normalization under `quad`.
pub fn robin_eigenpairs(
    domain: DomainSpec,
    n: usize,
    tol: f64,
    quad: &QuadratureRule,
) -> Result<Vec<RobinEigenpair>> {
    if n == 0 {
        return Err(Error::Config("number of modes must be at least 1".into()));
    }
    let length = domain.length;
    let step = (0.1f64).min(std::f64::consts::PI / (4.0 * length));
    let mu_max = (n as f64 + 2.0) * std::f64::consts::PI / length + 2.0;
    let mut pairs = Vec::with_capacity(n);
    let mut lo = step;
    let mut r_lo = characteristic_residual(lo, length);
    let mut k = 1usize;
    while pairs.len() < n {
        let hi = step * (k + 1) as f64;
        if hi > mu_max {
            return Err(Error::BracketFailure {
                found: pairs.len(),
                wanted: n,
                mu_max,
            });
        }
        let r_hi = characteristic_residual(hi, length);
        let root = if r_lo == 0.0 {
            Some(lo)
        } else if (r_lo > 0.0) != (r_hi > 0.0) && r_hi != 0.0 {
            Some(refine_root(lo, hi, length, tol))
        } else {
            None
        };
        if let Some(mu) = root {
            let raw = quad.integrate(|x| {
                let (s, c) = (mu * x).sin_cos();
                let w = mu * c + s;
                w * w
            });
            pairs.push(RobinEigenpair {
                j: pairs.len() + 1,
                mu,
                lambda: mu * mu,
                norm_const: 1.0 / raw.sqrt(),
            });
        }
        lo = hi;
        r_lo = r_hi;
        k += 1;
    }
    Ok(pairs)
}

/// Galerkin space `V_N` with eigenfunction values cached at quadrature nodes.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    domain: DomainSpec,
    pairs: Vec<RobinEigenpair>,
    quad: QuadratureRule,
    // row-major [j][node]
    values: Vec<f64>,
    derivs: Vec<f64>,
    // [j] -> (w_j(0), w_j(L))
    traces: Vec<[f64; 2]>,
}

impl SpectralBasis {
    pub fn new(domain: DomainSpec, n: usize) -> Result<Self> {
        Self::with_params(domain, n, DEFAULT_EIGEN_TOL, QuadratureParams::default())
    }

    pub fn with_params(
        domain: DomainSpec,
        n: usize,
        tol: f64,
        params: QuadratureParams,
    ) -> Result<Self> {
        let domain = DomainSpec::new(domain.length)?;
        if !(tol > 0.0) {
            return Err(Error::Config(format!(
                "eigenvalue tolerance must be positive, got {tol}"
            )));
        }
        let quad = QuadratureRule::new(domain.length, params);
        let pairs = robin_eigenpairs(domain, n, tol, &quad)?;
        Ok(Self::assemble(domain, pairs, quad))
    }

    /// Rebuild a basis from stored eigenpairs without re-solving or
    /// re-normalizing.
    pub fn from_pairs(
        domain: DomainSpec,
        pairs: Vec<RobinEigenpair>,
        params: QuadratureParams,
    ) -> Result<Self> {
        let domain = DomainSpec::new(domain.length)?;
        if pairs.is_empty() {
            return Err(Error::Config("empty eigenpair list".into()));
        }
        for (i, pair) in pairs.iter().enumerate() {
            if pair.j != i + 1 {
                return Err(Error::Config(format!(
                    "eigenpair {} has index {}",
                    i + 1,
                    pair.j
                )));
            }
            if !(pair.mu > 0.0 && pair.norm_const > 0.0) {
                return Err(Error::Config(format!(
                    "eigenpair {} is not positive",
                    pair.j
                )));
            }
        }
        if pairs.windows(2).any(|w| w[1].lambda <= w[0].lambda) {
            return Err(Error::Config(
                "eigenvalues are not strictly increasing".into(),
            ));
        }
        let quad = QuadratureRule::new(domain.length, params);
        Ok(Self::assemble(domain, pairs, quad))
    }

    fn assemble(domain: DomainSpec, pairs: Vec<RobinEigenpair>, quad: QuadratureRule) -> Self {
        let m = quad.len();
        let mut values = Vec::with_capacity(pairs.len() * m);
        let mut derivs = Vec::with_capacity(pairs.len() * m);
        let mut traces = Vec::with_capacity(pairs.len());
        for pair in &pairs {
            for &x in quad.nodes() {
                values.push(closed_form(pair, x, 0));
                derivs.push(closed_form(pair, x, 1));
            }
            traces.push([
                closed_form(pair, 0.0, 0),
                closed_form(pair, domain.length, 0),
            ]);
        }
        Self {
            domain,
            pairs,
            quad,
            values,
            derivs,
            traces,
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn domain(&self) -> DomainSpec {
        self.domain
    }

    pub fn length(&self) -> f64 {
        self.domain.length
    }

    pub fn pairs(&self) -> &[RobinEigenpair] {
        &self.pairs
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quad
    }

    pub fn eigenvalues(&self) -> impl Iterator<Item = f64> + '_ {
        self.pairs.iter().map(|p| p.lambda)
    }

    /// Nodal values of `w_j` (0-based `j`).
    pub fn nodal_values(&self, j: usize) -> &[f64] {
        let m = self.quad.len();
        &self.values[j * m..(j + 1) * m]
    }

    /// Nodal values of `w_j'` (0-based `j`).
    pub fn nodal_derivs(&self, j: usize) -> &[f64] {
        let m = self.quad.len();
        &self.derivs[j * m..(j + 1) * m]
    }

    /// `(w_j(0), w_j(L))` for 0-based `j`.
    pub fn trace(&self, j: usize) -> [f64; 2] {
        self.traces[j]
    }

    /// `w_j(x)` or `w_j'(x)` for the 1-based index `j`.
    pub fn evaluate(&self, j: usize, x: f64, derivative_order: u8) -> Result<f64> {
        if j == 0 || j > self.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.len(),
            });
        }
        Ok(closed_form(&self.pairs[j - 1], x, derivative_order))
    }

    /// `A^s` applied to a coefficient vector: component j scaled by `λ_j^s`.
    pub fn fractional_power_apply(&self, s: f64, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() > self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: coeffs.len(),
            });
        }
        Ok(coeffs
            .iter()
            .zip(&self.pairs)
            .map(|(c, pair)| c * pair.lambda.powf(s))
            .collect())
    }

    /// Orthogonal projection onto `V_N`: `((f, w_j))_j` by quadrature.
    pub fn project<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        let samples: Vec<f64> = self.quad.nodes().iter().map(|&x| f(x)).collect();
        self.project_nodal(&samples)
    }

    pub fn project_nodal(&self, samples: &[f64]) -> Vec<f64> {
        assert_eq!(samples.len(), self.quad.len());
        let weighted: Vec<f64> = samples
            .iter()
            .zip(self.quad.weights())
            .map(|(f, w)| f * w)
            .collect();
        (0..self.len())
            .map(|j| dot(&weighted, self.nodal_values(j)))
            .collect()
    }

    /// Quadrature Gram matrix `(w_i, w_j)`.
    #[allow(clippy::needless_range_loop)]
    pub fn gram_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut g = vec![vec![0.0; n]; n];
        for i in 0..n {
            let weighted: Vec<f64> = self
                .nodal_values(i)
                .iter()
                .zip(self.quad.weights())
                .map(|(a, w)| a * w)
                .collect();
            for k in i..n {
                let v = dot(&weighted, self.nodal_values(k));
                g[i][k] = v;
                g[k][i] = v;
            }
        }
        g
    }

    /// Accumulate `Σ_j coeffs[j] · row_j` over the cached nodal rows.
    pub(crate) fn synthesize(&self, coeffs: &[f64], derivative: bool, out: &mut [f64]) {
        let table = if derivative {
            &self.derivs
        } else {
            &self.values
        };
        let m = self.quad.len();
        out.iter_mut().for_each(|o| *o = 0.0);
        for (j, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let row = &table[j * m..(j + 1) * m];
            for (o, r) in out.iter_mut().zip(row) {
                *o += c * r;
            }
        }
    }

    pub(crate) fn synthesize_trace(&self, coeffs: &[f64]) -> [f64; 2] {
        let mut t = [0.0; 2];
        for (c, tr) in coeffs.iter().zip(&self.traces) {
            t[0] += c * tr[0];
            t[1] += c * tr[1];
        }
        t
    }

    /// `(∫ g w_j' dx)_j` for nodal weights already multiplied in.
    pub(crate) fn test_against(&self, weighted: &[f64], derivative: bool, out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            let row = if derivative {
                self.nodal_derivs(j)
            } else {
                self.nodal_values(j)
            };
            *o = dot(weighted, row);
        }
    }
}

fn closed_form(pair: &RobinEigenpair, x: f64, order: u8) -> f64 {
    let mu = pair.mu;
    let (s, c) = (mu * x).sin_cos();
    match order {
        0 => pair.norm_const * (mu * c + s),
        _ => pair.norm_const * mu * (c - mu * s),
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn residual_spot_values() {
        assert!((characteristic_residual(1.0, PI) + 2.0).abs() < 1e-14);
        assert!((characteristic_residual(0.5, PI) - 0.75).abs() < 1e-14);
        // high-precision evaluation: -0.41030068607823...
        assert!((characteristic_residual(0.7, PI) + 0.410_300_686_078_239).abs() < 1e-12);
    }

    #[test]
    fn first_root_bracketed() {
        let b = SpectralBasis::new(DomainSpec::new(PI).unwrap(), 1).unwrap();
        let mu = b.pairs()[0].mu;
        assert!(mu > 0.5 && mu < 1.0);
        // independent bisection oracle on the same bracket
        let (mut a, mut c) = (0.5f64, 1.0f64);
        for _ in 0..200 {
            let m = 0.5 * (a + c);
            if characteristic_residual(m, PI) > 0.0 {
                a = m;
            } else {
                c = m;
            }
        }
        assert!((mu - a).abs() < 1e-12);
    }

    #[test]
    fn five_pairs_increasing() {
        let b = SpectralBasis::new(DomainSpec::default(), 5).unwrap();
        assert_eq!(b.len(), 5);
        assert!(b.pairs()[0].lambda > 0.0);
        for w in b.pairs().windows(2) {
            assert!(w[1].lambda > w[0].lambda);
        }
        for (i, p) in b.pairs().iter().enumerate() {
            assert_eq!(p.j, i + 1);
            assert_eq!(p.lambda, p.mu * p.mu);
            assert!(characteristic_residual(p.mu, PI).abs() < 10.0 * DEFAULT_EIGEN_TOL);
        }
    }

    #[test]
    fn high_frequency_offset_shrinks() {
        // μ_j L - (j-1)π ≈ 2/μ_j for large j (tan μL ≈ 2/μ).
        let b = SpectralBasis::new(DomainSpec::default(), 50).unwrap();
        let offsets: Vec<f64> = b
            .pairs()
            .iter()
            .map(|p| p.mu * PI - (p.j as f64 - 1.0) * PI)
            .collect();
        for w in offsets.windows(2) {
            assert!(w[1] < w[0]);
        }
        let last = b.pairs().last().unwrap();
        assert!((offsets[49] - 2.0 / last.mu).abs() < 1e-3);
        for p in b.pairs().iter().skip(9) {
            let ratio = p.mu * PI / ((p.j as f64 - 1.0) * PI);
            assert!((ratio - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn normalization_matches_closed_form() {
        let b = SpectralBasis::new(DomainSpec::new(1.3).unwrap(), 8).unwrap();
        let l = 1.3;
        for p in b.pairs() {
            let mu = p.mu;
            let raw = (mu * mu + 1.0) * l / 2.0
                + (mu * mu - 1.0) * (2.0 * mu * l).sin() / (4.0 * mu)
                + (mu * l).sin().powi(2);
            assert!((p.norm_const - 1.0 / raw.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn evaluate_and_orthonormality() {
        let b = SpectralBasis::new(DomainSpec::default(), 12).unwrap();
        let p = b.pairs()[0];
        assert!((b.evaluate(1, 0.0, 0).unwrap() - p.norm_const * p.mu).abs() < 1e-15);
        assert!(matches!(
            b.evaluate(0, 0.0, 0),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            b.evaluate(13, 0.0, 0),
            Err(Error::IndexOutOfRange { .. })
        ));
        let g = b.gram_matrix();
        for (i, row) in g.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                let e = if i == k { 1.0 } else { 0.0 };
                assert!((v - e).abs() < 1e-8, "G[{i}][{k}] = {v}");
            }
        }
        // cache agrees with closed form
        let x = b.quadrature().nodes()[17];
        assert_eq!(b.nodal_values(3)[17], b.evaluate(4, x, 0).unwrap());
        assert_eq!(b.nodal_derivs(3)[17], b.evaluate(4, x, 1).unwrap());
    }

    #[test]
    fn robin_conditions_hold() {
        let b = SpectralBasis::new(DomainSpec::new(2.0).unwrap(), 6).unwrap();
        for j in 1..=6 {
            let w0 = b.evaluate(j, 0.0, 0).unwrap();
            let d0 = b.evaluate(j, 0.0, 1).unwrap();
            let wl = b.evaluate(j, 2.0, 0).unwrap();
            let dl = b.evaluate(j, 2.0, 1).unwrap();
            assert!((-d0 + w0).abs() < 1e-9);
            assert!((dl + wl).abs() < 1e-9 * b.pairs()[j - 1].lambda);
        }
    }

    #[test]
    fn fractional_powers() {
        let b = SpectralBasis::new(DomainSpec::default(), 4).unwrap();
        let c = [0.3, -1.0, 2.0, 0.5];
        assert_eq!(b.fractional_power_apply(0.0, &c).unwrap(), c.to_vec());
        let e1 = b.fractional_power_apply(1.0, &[1.0]).unwrap();
        assert_eq!(e1, vec![b.pairs()[0].lambda]);
        let half = b.fractional_power_apply(0.5, &c).unwrap();
        let twice = b.fractional_power_apply(0.5, &half).unwrap();
        let once = b.fractional_power_apply(1.0, &c).unwrap();
        for (a, b) in twice.iter().zip(&once) {
            assert!((a - b).abs() < 1e-12 * b.abs().max(1.0));
        }
        assert!(b.fractional_power_apply(1.0, &[0.0; 5]).is_err());
    }

    #[test]
    fn projections() {
        let b = SpectralBasis::new(DomainSpec::default(), 6).unwrap();
        let w2 = b.project(|x| b.evaluate(2, x, 0).unwrap());
        for (j, c) in w2.iter().enumerate() {
            let e = if j == 1 { 1.0 } else { 0.0 };
            assert!((c - e).abs() < 1e-10);
        }
        assert!(b.project(|_| 0.0).iter().all(|&c| c == 0.0));
        // ∫ w_j = c_j (sin μL + (1 - cos μL)/μ)
        let ones = b.project(|_| 1.0);
        for (p, c) in b.pairs().iter().zip(&ones) {
            let exact = p.norm_const * ((p.mu * PI).sin() + (1.0 - (p.mu * PI).cos()) / p.mu);
            assert!((c - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn round_trip_through_pairs() {
        let b = SpectralBasis::new(DomainSpec::default(), 7).unwrap();
        let json = serde_json::to_string(b.pairs()).unwrap();
        let pairs: Vec<RobinEigenpair> = serde_json::from_str(&json).unwrap();
        let r = SpectralBasis::from_pairs(b.domain(), pairs, b.quadrature().params()).unwrap();
        assert_eq!(r.pairs(), b.pairs());
        assert_eq!(r.nodal_values(6), b.nodal_values(6));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(DomainSpec::new(0.0).is_err());
        assert!(DomainSpec::new(-1.0).is_err());
        assert!(SpectralBasis::new(DomainSpec::default(), 0).is_err());
    }
}
