//! The modal Galerkin system
//! `c_j'' + P_j(c) + λ_j c_j' = F_j(c)`, `j = 1..N`,
//! with `P_j = ⟨-Δ_p u_N, w_j⟩_p` and `F_j = (f(u_N), w_j)_Ω + (h(γu_N), γw_j)_Γ`.
//! The mass matrix is the identity and the Kelvin-Voigt damping matrix is
//! `diag(λ_j)` because the basis is orthonormal and Robin-compatible.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::config::{Scheme, SimulationConfig};
use crate::energy::{
    resolve_blowup_parameters, BlowupParameters, EnergyRecord, InstantEnergy, Ledger,
};
use crate::error::{Error, Result};
use crate::function_space::signed_power;
use crate::sources::SourceSpec;
use crate::spectrum::SpectralBasis;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalState {
    pub t: f64,
    pub c: Vec<f64>,
    pub v: Vec<f64>,
}

impl ModalState {
    pub fn zero(n: usize) -> Self {
        Self {
            t: 0.0,
            c: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.c.iter().chain(&self.v).all(|x| x.is_finite())
    }
}

/// Everything the dynamics and the energy ledger need from the displacement
/// coefficients alone.
#[derive(Debug, Clone)]
pub struct ModalForces {
    /// `⟨-Δ_p u_N, w_j⟩_p`.
    pub plap: Vec<f64>,
    /// `(f(u_N), w_j)_Ω + (h(γu_N), γw_j)_Γ` with truncation applied.
    pub source: Vec<f64>,
    /// `‖u_N‖_{1,p}^p`.
    pub norm_pow: f64,
    /// `∫ F(u_N) dx`.
    pub f_int: f64,
    /// `Σ_Γ H(γu_N)`.
    pub h_int: f64,
    /// Largest `|u_N|` over quadrature nodes and endpoints.
    pub sup_amplitude: f64,
    /// Norm-ball scaling factor in effect (1 when inactive).
    pub source_scale: f64,
}

/// The assembled system for one basis, source and exponent.
#[derive(Debug, Clone, Copy)]
pub struct GalerkinSystem<'a> {
    basis: &'a SpectralBasis,
    spec: &'a SourceSpec,
    p: f64,
}

impl<'a> GalerkinSystem<'a> {
    pub fn new(basis: &'a SpectralBasis, spec: &'a SourceSpec, p: f64) -> Self {
        Self { basis, spec, p }
    }

    pub fn basis(&self) -> &'a SpectralBasis {
        self.basis
    }

    pub fn spec(&self) -> &'a SourceSpec {
        self.spec
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn lambda(&self, j: usize) -> f64 {
        self.basis.pairs()[j].lambda
    }

    pub fn forces(&self, c: &[f64]) -> Result<ModalForces> {
        let n = self.dim();
        if c.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: c.len(),
            });
        }
        let quad = self.basis.quadrature();
        let m = quad.len();
        let e = self.p - 2.0;
        let mut u = vec![0.0; m];
        let mut du = vec![0.0; m];
        self.basis.synthesize(c, false, &mut u);
        self.basis.synthesize(c, true, &mut du);
        let tr = self.basis.synthesize_trace(c);

        let mut norm_pow = 0.0;
        let mut flux = vec![0.0; m];
        for ((g, &d), &w) in flux.iter_mut().zip(&du).zip(quad.weights()) {
            *g = w * signed_power(d, e);
            norm_pow += *g * d;
        }
        let bflux = [signed_power(tr[0], e), signed_power(tr[1], e)];
        norm_pow += bflux[0] * tr[0] + bflux[1] * tr[1];

        let eff = if self.spec.needs_norm() {
            self.spec.effective(norm_pow.powf(1.0 / self.p))
        } else {
            self.spec.effective(0.0)
        };
        let mut f_int = 0.0;
        let mut sup_amplitude = tr[0].abs().max(tr[1].abs());
        let mut fw = vec![0.0; m];
        for ((out, &x), &w) in fw.iter_mut().zip(&u).zip(quad.weights()) {
            *out = w * eff.f(x);
            f_int += w * self.spec.primitive_f(x);
            sup_amplitude = sup_amplitude.max(x.abs());
        }
        let hb = [eff.h(tr[0]), eff.h(tr[1])];
        let h_int = self.spec.primitive_h(tr[0]) + self.spec.primitive_h(tr[1]);

        let mut plap = vec![0.0; n];
        let mut source = vec![0.0; n];
        self.basis.test_against(&flux, true, &mut plap);
        self.basis.test_against(&fw, false, &mut source);
        for j in 0..n {
            let t = self.basis.trace(j);
            plap[j] += bflux[0] * t[0] + bflux[1] * t[1];
            source[j] += hb[0] * t[0] + hb[1] * t[1];
        }
        if !(norm_pow.is_finite()
            && f_int.is_finite()
            && h_int.is_finite()
            && plap.iter().chain(&source).all(|x| x.is_finite()))
        {
            return Err(Error::NonFiniteValue("modal force assembly"));
        }
        Ok(ModalForces {
            plap,
            source,
            norm_pow,
            f_int,
            h_int,
            sup_amplitude,
            source_scale: eff.scale(),
        })
    }

    /// `a_j = -P_j(c) - λ_j v_j + F_j(c)`.
    pub fn acceleration_from(&self, forces: &ModalForces, v: &[f64]) -> Result<Vec<f64>> {
        let a: Vec<f64> = (0..self.dim())
            .map(|j| -forces.plap[j] - self.lambda(j) * v[j] + forces.source[j])
            .collect();
        if a.iter().all(|x| x.is_finite()) {
            Ok(a)
        } else {
            Err(Error::NonFiniteValue("acceleration"))
        }
    }

    pub fn acceleration(&self, state: &ModalState) -> Result<Vec<f64>> {
        if state.v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: state.v.len(),
            });
        }
        let forces = self.forces(&state.c)?;
        self.acceleration_from(&forces, &state.v)
    }

    /// Semi-implicit step: damping implicit, everything else explicit.
    pub fn imex_step(
        &self,
        state: &ModalState,
        forces: &ModalForces,
        dt: f64,
    ) -> Result<ModalState> {
        let n = self.dim();
        let mut c = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n);
        for j in 0..n {
            let vj = (state.v[j] + dt * (forces.source[j] - forces.plap[j]))
                / (1.0 + dt * self.lambda(j));
            v.push(vj);
            c.push(state.c[j] + dt * vj);
        }
        let next = ModalState {
            t: state.t + dt,
            c,
            v,
        };
        if next.is_finite() {
            Ok(next)
        } else {
            Err(Error::NonFiniteValue("IMEX step"))
        }
    }

    /// Classical fourth-order Runge-Kutta on `(c, v)`.
    pub fn rk4_step(
        &self,
        state: &ModalState,
        forces: &ModalForces,
        dt: f64,
    ) -> Result<ModalState> {
        let n = self.dim();
        let axpy = |x: &[f64], a: f64, y: &[f64]| -> Vec<f64> {
            x.iter().zip(y).map(|(xi, yi)| xi + a * yi).collect()
        };
        let k1c = state.v.clone();
        let k1v = self.acceleration_from(forces, &state.v)?;
        let c2 = axpy(&state.c, 0.5 * dt, &k1c);
        let v2 = axpy(&state.v, 0.5 * dt, &k1v);
        let k2v = self.acceleration_from(&self.forces(&c2)?, &v2)?;
        let k2c = v2;
        let c3 = axpy(&state.c, 0.5 * dt, &k2c);
        let v3 = axpy(&state.v, 0.5 * dt, &k2v);
        let k3v = self.acceleration_from(&self.forces(&c3)?, &v3)?;
        let k3c = v3;
        let c4 = axpy(&state.c, dt, &k3c);
        let v4 = axpy(&state.v, dt, &k3v);
        let k4v = self.acceleration_from(&self.forces(&c4)?, &v4)?;
        let k4c = v4;
        let combine = |x: &[f64], k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|j| x[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
                .collect()
        };
        let next = ModalState {
            t: state.t + dt,
            c: combine(&state.c, &k1c, &k2c, &k3c, &k4c),
            v: combine(&state.v, &k1v, &k2v, &k3v, &k4v),
        };
        if next.is_finite() {
            Ok(next)
        } else {
            Err(Error::NonFiniteValue("RK4 step"))
        }
    }

    pub fn step(&self, state: &ModalState, dt: f64, scheme: Scheme) -> Result<ModalState> {
        assert!(dt > 0.0, "time step must be positive");
        let forces = self.forces(&state.c)?;
        self.step_with(state, &forces, dt, scheme)
    }

    fn step_with(
        &self,
        state: &ModalState,
        forces: &ModalForces,
        dt: f64,
        scheme: Scheme,
    ) -> Result<ModalState> {
        match scheme {
            Scheme::Imex => self.imex_step(state, forces, dt),
            Scheme::Rk4 => self.rk4_step(state, forces, dt),
        }
    }

    pub fn instant_energy(&self, state: &ModalState, forces: &ModalForces) -> InstantEnergy {
        InstantEnergy::from_forces(self, state, forces)
    }
}

pub fn assemble_acceleration(
    basis: &SpectralBasis,
    spec: &SourceSpec,
    p: f64,
    state: &ModalState,
) -> Result<Vec<f64>> {
    GalerkinSystem::new(basis, spec, p).acceleration(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    BlowupDetected { t: f64 },
    DtUnderflow { t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub state: ModalState,
    pub record: EnergyRecord,
    /// `∫ f(u)u' dx + Σ_Γ h(γu)γu'` at this sample.
    pub source_power: f64,
    /// `‖u'‖_{1,2}²` at this sample.
    pub damping_rate: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub min_dt: f64,
    pub max_sup_amplitude: f64,
    pub max_w1p_norm: f64,
    /// `E(0)` of the projected initial data.
    pub initial_total_energy: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: SimulationConfig,
    pub basis: SpectralBasis,
    pub params: Option<BlowupParameters>,
    pub samples: Vec<Sample>,
    pub termination: Termination,
    pub stats: RunStats,
}

impl Trajectory {
    pub fn system(&self) -> GalerkinSystem<'_> {
        GalerkinSystem::new(&self.basis, &self.config.sources, self.config.p)
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.state.t).collect()
    }

    pub fn records(&self) -> impl Iterator<Item = &EnergyRecord> {
        self.samples.iter().map(|s| &s.record)
    }

    pub fn sample_index(&self, t: f64) -> Option<usize> {
        self.samples.iter().position(|s| s.state.t == t)
    }

    pub fn sup_energy(&self) -> f64 {
        self.records().map(|r| r.e_pos).fold(0.0, f64::max)
    }

    pub fn blowup_time(&self) -> Option<f64> {
        match self.termination {
            Termination::BlowupDetected { t } => Some(t),
            _ => None,
        }
    }
}

/// Accepted steps over which 𝓔 must grow monotonically before a threshold
/// crossing counts as blow-up.
pub const BLOWUP_MONOTONE_WINDOW: usize = 10;
/// Accepted steps at a reduced `dt` before it is doubled back toward `dt0`.
const DT_RECOVERY_STREAK: usize = 10;
const DT_UNDERFLOW_HALVINGS: i32 = 20;

pub fn simulate(config: &SimulationConfig) -> Result<Trajectory> {
    config.validate()?;
    let basis = config.build_basis()?;
    let c0 = config.initial_data.u0.project(&basis)?;
    let v0 = config.initial_data.u1.project(&basis)?;
    let (params, samples, termination, stats) = {
        let sys = GalerkinSystem::new(&basis, &config.sources, config.p);
        run(
            &sys,
            config,
            ModalState {
                t: 0.0,
                c: c0,
                v: v0,
            },
        )?
    };
    Ok(Trajectory {
        config: config.clone(),
        basis,
        params,
        samples,
        termination,
        stats,
    })
}

type RunOutput = (Option<BlowupParameters>, Vec<Sample>, Termination, RunStats);

fn run(
    sys: &GalerkinSystem<'_>,
    config: &SimulationConfig,
    initial: ModalState,
) -> Result<RunOutput> {
    let mut state = initial;
    let mut forces = sys.forces(&state.c)?;
    let inst0 = sys.instant_energy(&state, &forces);
    let e0_total = inst0.e_total();
    let params = resolve_blowup_parameters(config, -e0_total, inst0.nprime);
    let mut ledger = Ledger::start(inst0, params);
    let mut samples = vec![Sample {
        state: state.clone(),
        record: ledger.record(0.0),
        source_power: ledger.current().source_power,
        damping_rate: ledger.current().damping_rate,
    }];
    let mut stats = RunStats {
        min_dt: config.dt0,
        max_sup_amplitude: forces.sup_amplitude,
        max_w1p_norm: forces.norm_pow.powf(1.0 / config.p),
        initial_total_energy: e0_total,
        ..RunStats::default()
    };

    let dt_min = config.dt0 * 2f64.powi(-DT_UNDERFLOW_HALVINGS);
    let mut dt = config.dt0;
    let mut streak = 0usize;
    let mut recent: VecDeque<f64> = VecDeque::with_capacity(BLOWUP_MONOTONE_WINDOW + 1);
    recent.push_back(ledger.current().e_pos());
    let termination;
    loop {
        let remaining = config.t_end - state.t;
        if remaining <= 1e-12 * config.t_end {
            termination = Termination::Completed;
            break;
        }
        let h = if remaining <= dt * (1.0 + 1e-9) {
            remaining
        } else {
            dt
        };
        let trial = sys
            .step_with(&state, &forces, h, config.scheme)
            .and_then(|next| sys.forces(&next.c).map(|f| (next, f)));
        let accepted = match trial {
            Ok((next, next_forces)) => {
                let inst = sys.instant_energy(&next, &next_forces);
                let candidate = ledger.advanced(inst, h);
                let jump = candidate.residual() - ledger.residual();
                let scale = ledger.current().e_pos().max(1.0);
                if jump.is_finite() && jump.abs() <= config.residual_tol * scale {
                    Some((next, next_forces, candidate))
                } else {
                    None
                }
            }
            Err(_) => None,
        };
        let Some((next, next_forces, candidate)) = accepted else {
            stats.rejected_steps += 1;
            streak = 0;
            dt *= 0.5;
            stats.min_dt = stats.min_dt.min(dt);
            if dt < dt_min {
                termination = Termination::DtUnderflow { t: state.t };
                break;
            }
            continue;
        };
        state = next;
        forces = next_forces;
        ledger = candidate;
        stats.accepted_steps += 1;
        stats.max_sup_amplitude = stats.max_sup_amplitude.max(forces.sup_amplitude);
        stats.max_w1p_norm = stats.max_w1p_norm.max(forces.norm_pow.powf(1.0 / config.p));
        streak += 1;
        if dt < config.dt0 && streak >= DT_RECOVERY_STREAK {
            dt = (2.0 * dt).min(config.dt0);
            streak = 0;
        }

        let e_pos = ledger.current().e_pos();
        recent.push_back(e_pos);
        if recent.len() > BLOWUP_MONOTONE_WINDOW + 1 {
            recent.pop_front();
        }
        let blown = e_pos > config.blowup_threshold
            && recent.len() == BLOWUP_MONOTONE_WINDOW + 1
            && recent.iter().zip(recent.iter().skip(1)).all(|(a, b)| b > a);
        let finished = config.t_end - state.t <= 1e-12 * config.t_end;
        if blown || finished || stats.accepted_steps.is_multiple_of(config.record_every) {
            samples.push(Sample {
                state: state.clone(),
                record: ledger.record(state.t),
                source_power: ledger.current().source_power,
                damping_rate: ledger.current().damping_rate,
            });
        }
        if blown {
            termination = Termination::BlowupDetected { t: state.t };
            break;
        }
    }
    Ok((params, samples, termination, stats))
}

/// Trapezoid rule over (possibly nonuniform) samples.
pub(crate) fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Galerkin weak-form residual for the 1-based mode `j` at sample `index`:
/// `v_j(t) - v_j(0) + ∫_0^t (P_j + λ_j v_j - F_j) dτ`.
pub fn weak_residual(traj: &Trajectory, j: usize, index: usize) -> Result<f64> {
    let sys = traj.system();
    if j == 0 || j > sys.dim() {
        return Err(Error::IndexOutOfRange {
            index: j,
            len: sys.dim(),
        });
    }
    let k = j - 1;
    let upto = &traj.samples[..=index];
    let mut times = Vec::with_capacity(upto.len());
    let mut integrand = Vec::with_capacity(upto.len());
    for s in upto {
        let f = sys.forces(&s.state.c)?;
        times.push(s.state.t);
        integrand.push(f.plap[k] + sys.lambda(k) * s.state.v[k] - f.source[k]);
    }
    Ok(upto[index].state.v[k] - upto[0].state.v[k] + trapezoid(&times, &integrand))
}
