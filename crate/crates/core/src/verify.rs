//! Re-checks stored runs against the invariants of the energy analysis.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::artifacts::{read_energy, read_summary, read_trajectory};
use crate::dynamics::GalerkinSystem;
use crate::energy::energy_identity_residuals;
use crate::error::{Error, Result};
use crate::function_space::{dual_norm_ratio, w1p_norm, DiscreteFunction, DUAL_NORM_QUAD_SLACK};
use crate::spectrum::SpectralBasis;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VerifyTolerances {
    /// Allowed `|energy residual| / max(1, sup 𝓔)`.
    pub energy_residual: f64,
    /// Lowest acceptable value of 𝓔 and its parts.
    pub positivity: f64,
    /// Random test functions per sampled state for the dual-norm bound.
    pub dual_norm_trials: usize,
    /// Number of states sampled for the dual-norm bound.
    pub dual_norm_states: usize,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        Self {
            energy_residual: 1e-2,
            positivity: -1e-12,
            dual_norm_trials: 20,
            dual_norm_states: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
    pub max_energy_residual: f64,
    pub max_relative_energy_residual: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.passed)
    }
}

pub fn verify_run(dir: &Path, tol: &VerifyTolerances) -> Result<VerifyReport> {
    let summary = read_summary(dir)?;
    let records = read_energy(dir)?;
    let states = read_trajectory(dir)?;
    if records.len() != states.len() || records.is_empty() {
        return Err(Error::Config(format!(
            "energy.csv has {} rows but trajectory.csv has {}",
            records.len(),
            states.len()
        )));
    }
    let cfg = &summary.config;
    let basis = SpectralBasis::from_pairs(cfg.domain, summary.eigenpairs.clone(), cfg.quadrature)?;
    let sys = GalerkinSystem::new(&basis, &cfg.sources, cfg.p);
    let mut checks = Vec::new();

    let worst = records
        .iter()
        .map(|r| (r.t, r.e_pos.min(r.kinetic).min(r.potential)))
        .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    checks.push(CheckResult {
        name: "positivity",
        passed: worst.1 >= tol.positivity,
        detail: format!(
            "min of E_pos, kinetic, potential = {:e} at t = {}",
            worst.1, worst.0
        ),
    });

    let drop = records
        .windows(2)
        .map(|w| (w[1].t, w[0].g - w[1].g))
        .fold((0.0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    checks.push(CheckResult {
        name: "g_monotone",
        passed: drop.1 <= 0.0,
        detail: format!("largest decrease of G = {:e} at t = {}", drop.1, drop.0),
    });

    let residuals = energy_identity_residuals(&sys, &states)?;
    let mut sup_e: f64 = 1.0;
    let mut max_abs: f64 = 0.0;
    let mut max_rel: f64 = 0.0;
    for (r, rec) in residuals.iter().zip(&records) {
        sup_e = sup_e.max(rec.e_pos);
        max_abs = max_abs.max(r.abs());
        max_rel = max_rel.max(r.abs() / sup_e);
    }
    checks.push(CheckResult {
        name: "energy_residual",
        passed: max_rel <= tol.energy_residual,
        detail: format!("max |residual| = {max_abs:e}, relative {max_rel:e}"),
    });

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let stride = (states.len() / tol.dual_norm_states.max(1)).max(1);
    let mut max_ratio: f64 = 0.0;
    for s in states.iter().step_by(stride) {
        let u = DiscreteFunction::new(&basis, s.c.clone())?;
        let unorm = w1p_norm(&u, cfg.p);
        for _ in 0..tol.dual_norm_trials {
            let coeffs: Vec<f64> = (0..basis.len())
                .map(|_| rng.gen_range(-1.0..=1.0))
                .collect();
            let phi = DiscreteFunction::new(&basis, coeffs)?;
            max_ratio = max_ratio.max(dual_norm_ratio(&u, unorm, &phi, cfg.p));
        }
    }
    checks.push(CheckResult {
        name: "dual_norm_bound",
        passed: max_ratio <= 1.0 + DUAL_NORM_QUAD_SLACK,
        detail: format!("max ratio = {max_ratio}"),
    });

    Ok(VerifyReport {
        checks,
        max_energy_residual: max_abs,
        max_relative_energy_residual: max_rel,
    })
}
