//! Energy functionals along Galerkin trajectories and the quantities of the
//! global-existence and blow-up arguments.
//!
//! * positive energy `𝓔 = ½‖u'‖₂² + (1/p)‖u‖_{1,p}^p`
//! * total energy `E = 𝓔 - ∫F(u) - Σ_Γ H(γu)`
//! * `G(t) = ∫_0^t ‖u'‖_{1,2}² - E(0)`, `N = ‖u‖₂²`, `N' = 2(u', u)`
//! * `Y = G^{1-α} + βN'`

use serde::{Deserialize, Serialize};

use crate::config::SimulationConfig;
use crate::dynamics::{GalerkinSystem, ModalForces, ModalState, Trajectory};
use crate::error::{Error, Result};
use crate::sources::SourceSpec;
use crate::spectrum::{dot, SpectralBasis};

/// One time sample of the tracked functionals. Field names are the
/// `energy.csv` column names.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub t: f64,
    pub kinetic: f64,
    pub potential: f64,
    #[serde(rename = "E_pos")]
    pub e_pos: f64,
    #[serde(rename = "F_int")]
    pub f_int: f64,
    #[serde(rename = "H_int")]
    pub h_int: f64,
    #[serde(rename = "E_total")]
    pub e_total: f64,
    pub damping_cum: f64,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "Nprime")]
    pub nprime: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "Y")]
    pub y: f64,
    pub energy_residual: f64,
}

pub const ENERGY_CSV_COLUMNS: [&str; 14] = [
    "t",
    "kinetic",
    "potential",
    "E_pos",
    "F_int",
    "H_int",
    "E_total",
    "damping_cum",
    "G",
    "N",
    "Nprime",
    "S",
    "Y",
    "energy_residual",
];

/// Instantaneous functionals of a modal state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstantEnergy {
    pub kinetic: f64,
    pub potential: f64,
    pub f_int: f64,
    pub h_int: f64,
    pub n: f64,
    pub nprime: f64,
    /// `‖u'‖_{1,2}² = Σ λ_j v_j²`.
    pub damping_rate: f64,
    /// `Σ_j F_j(c) v_j`.
    pub source_power: f64,
}

impl InstantEnergy {
    pub fn from_forces(sys: &GalerkinSystem<'_>, state: &ModalState, forces: &ModalForces) -> Self {
        let damping_rate = state
            .v
            .iter()
            .enumerate()
            .map(|(j, v)| sys.lambda(j) * v * v)
            .sum();
        Self {
            kinetic: 0.5 * dot(&state.v, &state.v),
            potential: forces.norm_pow / sys.p(),
            f_int: forces.f_int,
            h_int: forces.h_int,
            n: dot(&state.c, &state.c),
            nprime: 2.0 * dot(&state.c, &state.v),
            damping_rate,
            source_power: dot(&forces.source, &state.v),
        }
    }

    pub fn e_pos(&self) -> f64 {
        self.kinetic + self.potential
    }

    pub fn source_potential(&self) -> f64 {
        self.f_int + self.h_int
    }

    pub fn e_total(&self) -> f64 {
        self.e_pos() - self.source_potential()
    }
}

/// Running time integrals of the energy identity, advanced by the
/// trapezoid rule.
#[derive(Debug, Clone, Copy)]
pub struct Ledger {
    e0_pos: f64,
    e0_total: f64,
    damping_cum: f64,
    work_cum: f64,
    params: Option<BlowupParameters>,
    current: InstantEnergy,
}

impl Ledger {
    pub fn start(initial: InstantEnergy, params: Option<BlowupParameters>) -> Self {
        Self {
            e0_pos: initial.e_pos(),
            e0_total: initial.e_total(),
            damping_cum: 0.0,
            work_cum: 0.0,
            params,
            current: initial,
        }
    }

    pub fn advanced(&self, next: InstantEnergy, dt: f64) -> Self {
        Self {
            damping_cum: self.damping_cum
                + 0.5 * dt * (self.current.damping_rate + next.damping_rate),
            work_cum: self.work_cum + 0.5 * dt * (self.current.source_power + next.source_power),
            current: next,
            ..*self
        }
    }

    pub fn current(&self) -> &InstantEnergy {
        &self.current
    }

    /// `𝓔(t) + ∫‖u'‖_{1,2}² - 𝓔(0) - ∫(f(u),u') - ∫(h(γu),γu')`.
    pub fn residual(&self) -> f64 {
        self.current.e_pos() + self.damping_cum - self.e0_pos - self.work_cum
    }

    pub fn record(&self, t: f64) -> EnergyRecord {
        let cur = &self.current;
        let g = self.damping_cum - self.e0_total;
        EnergyRecord {
            t,
            kinetic: cur.kinetic,
            potential: cur.potential,
            e_pos: cur.e_pos(),
            f_int: cur.f_int,
            h_int: cur.h_int,
            e_total: cur.e_total(),
            damping_cum: self.damping_cum,
            g,
            n: cur.n,
            nprime: cur.nprime,
            s: cur.source_potential(),
            y: self.params.map_or(f64::NAN, |bp| bp.y(g, cur.nprime)),
            energy_residual: self.residual(),
        }
    }
}

/// History needed to place a single state on a trajectory. The default
/// treats the state as the initial one.
#[derive(Debug, Clone, Copy, Default)]
pub struct RecordContext {
    pub damping_cum: f64,
    pub work_cum: f64,
    /// `(𝓔(0), E(0))`.
    pub initial: Option<(f64, f64)>,
    pub params: Option<BlowupParameters>,
}

pub fn energy_record(
    basis: &SpectralBasis,
    spec: &SourceSpec,
    p: f64,
    state: &ModalState,
    ctx: &RecordContext,
) -> Result<EnergyRecord> {
    let sys = GalerkinSystem::new(basis, spec, p);
    let forces = sys.forces(&state.c)?;
    let inst = InstantEnergy::from_forces(&sys, state, &forces);
    let (e0_pos, e0_total) = ctx.initial.unwrap_or((inst.e_pos(), inst.e_total()));
    let ledger = Ledger {
        e0_pos,
        e0_total,
        damping_cum: ctx.damping_cum,
        work_cum: ctx.work_cum,
        params: ctx.params,
        current: inst,
    };
    Ok(ledger.record(state.t))
}

/// Energy-identity residual at every state, recomputed from scratch with
/// trapezoid time integrals over the given states.
pub fn energy_identity_residuals(
    sys: &GalerkinSystem<'_>,
    states: &[ModalState],
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(states.len());
    let mut prev: Option<(f64, InstantEnergy)> = None;
    let (mut dcum, mut wcum, mut e0) = (0.0, 0.0, 0.0);
    for s in states {
        let inst = InstantEnergy::from_forces(sys, s, &sys.forces(&s.c)?);
        match prev {
            None => e0 = inst.e_pos(),
            Some((t0, p)) => {
                let h = s.t - t0;
                dcum += 0.5 * h * (p.damping_rate + inst.damping_rate);
                wcum += 0.5 * h * (p.source_power + inst.source_power);
            }
        }
        out.push(inst.e_pos() + dcum - e0 - wcum);
        prev = Some((s.t, inst));
    }
    Ok(out)
}

pub fn energy_identity_residual(traj: &Trajectory, index: usize) -> Result<f64> {
    let states: Vec<ModalState> = traj.samples[..=index]
        .iter()
        .map(|s| s.state.clone())
        .collect();
    Ok(*energy_identity_residuals(&traj.system(), &states)?
        .last()
        .expect("at least one state"))
}

/// `(𝓔(0) + C_M t) exp(p C_M t)`.
pub fn gronwall_envelope(e0: f64, c_m: f64, p: f64, t: f64) -> f64 {
    (e0 + c_m * t) * (p * c_m * t).exp()
}

/// Smallest `C_M` with `source power ≤ C_M (p𝓔 + 1)` at every sample; this
/// bound integrates to [`gronwall_envelope`].
pub fn fit_gronwall_constant(p: f64, e_pos: &[f64], source_power: &[f64]) -> f64 {
    e_pos
        .iter()
        .zip(source_power)
        .map(|(e, w)| w.max(0.0) / (p * e + 1.0))
        .fold(f64::MIN_POSITIVE, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeCheck {
    pub c_m: f64,
    /// `max_t 𝓔(t) / envelope(t)`.
    pub max_ratio: f64,
    pub holds: bool,
}

pub fn check_gronwall_envelope(traj: &Trajectory, slack: f64) -> EnvelopeCheck {
    let p = traj.config.p;
    let e: Vec<f64> = traj.records().map(|r| r.e_pos).collect();
    let w: Vec<f64> = traj.samples.iter().map(|s| s.source_power).collect();
    let c_m = fit_gronwall_constant(p, &e, &w);
    let e0 = e[0];
    let max_ratio = traj
        .records()
        .map(|r| {
            let env = gronwall_envelope(e0, c_m, p, r.t);
            if env > 0.0 {
                r.e_pos / env
            } else if r.e_pos == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max);
    EnvelopeCheck {
        c_m,
        max_ratio,
        holds: max_ratio <= 1.0 + slack,
    }
}

/// `T₀ = min{T₁, (K - p𝓔(0))/(pC_M), (p-1) ln K/(pC_M)}`, clamped at zero.
pub fn existence_time_t0(k: f64, e0: f64, c_m: f64, p: f64, t1: f64) -> Result<f64> {
    if !(k > p * e0) {
        return Err(Error::InvalidK { k, bound: p * e0 });
    }
    let a = (k - p * e0) / (p * c_m);
    let b = (p - 1.0) * k.ln() / (p * c_m);
    Ok(t1.min(a).min(b).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupParameters {
    pub alpha: f64,
    pub beta: f64,
    /// `min(q, r)`.
    pub m: f64,
    pub y0: f64,
    pub fitted_c: Option<f64>,
}

impl BlowupParameters {
    pub fn y(&self, g: f64, nprime: f64) -> f64 {
        if g > 0.0 {
            g.powf(1.0 - self.alpha) + self.beta * nprime
        } else {
            f64::NAN
        }
    }
}

/// Upper bound for admissible α: `min{(p-2)/(2p), (p-2)/(q+1), (p-2)/(r+1)}`.
pub fn alpha_bound(p: f64, q: f64, r: f64) -> f64 {
    ((p - 2.0) / (2.0 * p))
        .min((p - 2.0) / (q + 1.0))
        .min((p - 2.0) / (r + 1.0))
}

fn beta_for(alpha: f64, g0: f64, nprime0: f64) -> f64 {
    if nprime0 < 0.0 {
        0.25f64.min(g0.powf(1.0 - alpha) / (2.0 * nprime0.abs() + 1e-12))
    } else {
        0.25
    }
}

/// α is half the admissible bound; β is 1/4 unless a negative `N'(0)` forces
/// it smaller to keep `Y(0) > 0`.
pub fn select_blowup_parameters(
    p: f64,
    q: f64,
    r: f64,
    g0: f64,
    nprime0: f64,
) -> Result<BlowupParameters> {
    let m = q.min(r);
    if !(p - 1.0 < m) {
        return Err(Error::NotBlowupCandidate(format!(
            "need p - 1 < min(q, r), got p = {p}, q = {q}, r = {r}"
        )));
    }
    if !(g0 > 0.0) {
        return Err(Error::NotBlowupCandidate(format!(
            "need G(0) = -E(0) > 0, got {g0}"
        )));
    }
    let alpha = 0.5 * alpha_bound(p, q, r);
    let beta = beta_for(alpha, g0, nprime0);
    Ok(BlowupParameters {
        alpha,
        beta,
        m,
        y0: g0.powf(1.0 - alpha) + beta * nprime0,
        fitted_c: None,
    })
}

/// Parameters used for the `Y` column of a run; `None` when `G(0) ≤ 0` or
/// when automatic selection does not apply.
pub fn resolve_blowup_parameters(
    config: &SimulationConfig,
    g0: f64,
    nprime0: f64,
) -> Option<BlowupParameters> {
    if !(g0 > 0.0) {
        return None;
    }
    let (p, q, r) = (config.p, config.sources.q, config.sources.r);
    let mut params = match config.alpha.value() {
        None => select_blowup_parameters(p, q, r, g0, nprime0).ok()?,
        Some(alpha) => BlowupParameters {
            alpha,
            beta: beta_for(alpha, g0, nprime0),
            m: q.min(r),
            y0: 0.0,
            fitted_c: None,
        },
    };
    if let Some(beta) = config.beta.value() {
        params.beta = beta;
    }
    params.y0 = g0.powf(1.0 - params.alpha) + params.beta * nprime0;
    Some(params)
}

/// Blow-up time of `Y' = C Y^{1/(1-α)}`, `Y(0) = y0`:
/// `(1-α)/(Cα) · y0^{-α/(1-α)}`.
pub fn blowup_horizon(alpha: f64, c: f64, y0: f64) -> f64 {
    (1.0 - alpha) / (c * alpha) * y0.powf(-alpha / (1.0 - alpha))
}

/// The alternative bound `y0^{(1-α)/α} / C`, reported next to
/// [`blowup_horizon`] for comparison.
pub fn blowup_horizon_alt(alpha: f64, c: f64, y0: f64) -> f64 {
    y0.powf((1.0 - alpha) / alpha) / c
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowupCertificate {
    pub applicable: bool,
    pub alpha: f64,
    pub beta: f64,
    pub g0: f64,
    pub y0: f64,
    pub g_nondecreasing: bool,
    pub g_strictly_increasing: bool,
    pub y_strictly_increasing: bool,
    /// Time after which `Y` increases strictly to the end of the run.
    pub y_transient_end: f64,
    pub fitted_c: f64,
    pub horizon: f64,
    pub horizon_alt: f64,
    pub observed_blowup_time: Option<f64>,
    pub horizon_consistent: Option<bool>,
    pub notes: Vec<String>,
}

pub fn blowup_certificate(traj: &Trajectory, params: &BlowupParameters) -> BlowupCertificate {
    let recs: Vec<_> = traj.records().copied().collect();
    let g0 = recs[0].g;
    let ys: Vec<f64> = recs.iter().map(|r| params.y(r.g, r.nprime)).collect();
    let g_nondecreasing = recs.windows(2).all(|w| w[1].g >= w[0].g);
    let g_strictly_increasing = recs.windows(2).all(|w| w[1].g > w[0].g);
    let mut start = ys.len() - 1;
    while start > 0 && ys[start] > ys[start - 1] {
        start -= 1;
    }
    let y_strictly_increasing = start == 0 && ys.len() > 1;
    let exponent = 1.0 / (1.0 - params.alpha);
    let fitted_c = recs
        .windows(2)
        .zip(ys.windows(2))
        .filter(|(_, y)| y[0] > 0.0 && y[1] > 0.0)
        .map(|(r, y)| {
            let slope = (y[1] - y[0]) / (r[1].t - r[0].t);
            slope / y[0].max(y[1]).powf(exponent)
        })
        .fold(f64::INFINITY, f64::min);
    let y0 = ys[0];
    let mut notes = Vec::new();
    let fitted_c = if fitted_c.is_finite() {
        fitted_c
    } else {
        f64::NAN
    };
    let horizon = blowup_horizon(params.alpha, fitted_c, y0);
    let horizon_alt = blowup_horizon_alt(params.alpha, fitted_c, y0);
    let observed = traj.blowup_time();
    if !(g0 > 0.0) {
        notes.push("G(0) <= 0: initial total energy is not negative".into());
    }
    if !(fitted_c > 0.0) {
        notes.push("no positive constant C fits Y' >= C Y^(1/(1-alpha))".into());
    }
    if !(y0 > 0.0) {
        notes.push("Y(0) <= 0".into());
    }
    let applicable = g0 > 0.0 && fitted_c > 0.0 && y0 > 0.0 && horizon.is_finite();
    if applicable && observed.is_none() && horizon > traj.config.t_end {
        notes.push("derived horizon exceeds the simulated interval".into());
    }
    BlowupCertificate {
        applicable,
        alpha: params.alpha,
        beta: params.beta,
        g0,
        y0,
        g_nondecreasing,
        g_strictly_increasing,
        y_strictly_increasing,
        y_transient_end: recs[start].t,
        fitted_c,
        horizon,
        horizon_alt,
        observed_blowup_time: observed,
        horizon_consistent: observed.filter(|_| applicable).map(|t| t <= horizon),
        notes,
    }
}

/// `N''` from the state: `2‖u'‖₂² - 2‖u‖_{1,p}^p - 2⟨-Δ₂u', u⟩₂ + 2[(f(u),u) + (h(γu),γu)]`.
pub fn nprime_second_derivative(
    sys: &GalerkinSystem<'_>,
    state: &ModalState,
    forces: &ModalForces,
) -> f64 {
    let damping: f64 = (0..sys.dim())
        .map(|j| sys.lambda(j) * state.c[j] * state.v[j])
        .sum();
    2.0 * dot(&state.v, &state.v) - 2.0 * forces.norm_pow - 2.0 * damping
        + 2.0 * dot(&state.c, &forces.source)
}

/// Same identity with the power-law moments `(q+1)‖u‖_{q+1}^{q+1}` and
/// `(r+1)|γu|_{r+1}^{r+1}` written through the primitives.
pub fn nprime_second_derivative_power_law(
    sys: &GalerkinSystem<'_>,
    state: &ModalState,
    forces: &ModalForces,
) -> f64 {
    let (q, r) = (sys.spec().q, sys.spec().r);
    let damping: f64 = (0..sys.dim())
        .map(|j| sys.lambda(j) * state.c[j] * state.v[j])
        .sum();
    2.0 * dot(&state.v, &state.v) - 2.0 * forces.norm_pow - 2.0 * damping
        + 2.0 * (q + 1.0) * forces.f_int
        + 2.0 * (r + 1.0) * forces.h_int
}

/// `z^η ≤ (1 + 1/G(0))(G(0) + z)` for `0 < η < 1`, `z ≥ 0`.
pub fn fractional_power_envelope(z: f64, eta: f64, g0: f64) -> bool {
    z.powf(eta) <= (1.0 + 1.0 / g0) * (g0 + z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_space::NodalFunction;
    use crate::quadrature::{QuadratureParams, QuadratureRule};
    use crate::spectrum::DomainSpec;

    #[test]
    fn zero_state_record() {
        let b = SpectralBasis::new(DomainSpec::default(), 4).unwrap();
        let spec = SourceSpec::power_law(2.0, 2.0);
        let r = energy_record(
            &b,
            &spec,
            2.5,
            &ModalState::zero(4),
            &RecordContext::default(),
        )
        .unwrap();
        for v in [
            r.kinetic,
            r.potential,
            r.e_pos,
            r.f_int,
            r.h_int,
            r.e_total,
            r.g,
            r.n,
            r.nprime,
            r.s,
        ] {
            assert_eq!(v, 0.0);
        }
        assert_eq!(r.energy_residual, 0.0);
    }

    #[test]
    fn orthogonal_c_and_v() {
        let b = SpectralBasis::new(DomainSpec::default(), 4).unwrap();
        let spec = SourceSpec::power_law(2.0, 2.0);
        let s = ModalState {
            t: 0.0,
            c: vec![1.0, 0.0, 2.0, 0.0],
            v: vec![0.0, 3.0, 0.0, -1.0],
        };
        let r = energy_record(&b, &spec, 2.5, &s, &RecordContext::default()).unwrap();
        assert_eq!(r.nprime, 0.0);
        assert_eq!(r.kinetic, 5.0);
        assert_eq!(r.n, 5.0);
    }

    #[test]
    fn constant_unit_function_functionals() {
        // u ≡ 1 on [0, 1]: 𝓔 = (1/p)(0 + 2), F_int = 1, H_int = 2
        let q = QuadratureRule::new(1.0, QuadratureParams::default());
        let u = NodalFunction::from_fn(&q, |_| 1.0, |_| 0.0);
        let spec = SourceSpec::power_law(2.0, 2.0);
        let p = 2.5;
        let potential = crate::function_space::w1p_norm_pow(&u, p) / p;
        let f_int: f64 = q.sum_nodal(
            &u.values()
                .iter()
                .map(|&x| spec.primitive_f(x))
                .collect::<Vec<_>>(),
        );
        let h_int = spec.primitive_h(u.trace()[0]) + spec.primitive_h(u.trace()[1]);
        assert!((potential - 0.8).abs() < 1e-14);
        assert!((f_int - 1.0).abs() < 1e-12);
        assert_eq!(h_int, 2.0);
        assert!((potential - f_int - h_int + 2.2).abs() < 1e-12);
    }

    #[test]
    fn constant_projection_energy_converges() {
        // Galerkin projection of u ≡ 1 on [0, 1] approaches the same values.
        let spec = SourceSpec::power_law(2.0, 2.0);
        let err = |n: usize| {
            let b = SpectralBasis::new(DomainSpec::new(1.0).unwrap(), n).unwrap();
            let c = b.project(|_| 1.0);
            let r = energy_record(
                &b,
                &spec,
                2.5,
                &ModalState {
                    t: 0.0,
                    c,
                    v: vec![0.0; n],
                },
                &RecordContext::default(),
            )
            .unwrap();
            assert!((r.f_int - 1.0).abs() < 0.05);
            assert!((r.h_int - 2.0).abs() < 0.2);
            (r.e_total + 2.2).abs()
        };
        let (e16, e64) = (err(16), err(64));
        assert!(e64 < e16);
        assert!(e64 < 0.1);
    }

    #[test]
    fn envelope_and_t0_formulas() {
        assert_eq!(gronwall_envelope(3.0, 1.0, 2.5, 0.0), 3.0);
        let v = gronwall_envelope(1.0, 1.0, 2.0, 1.0);
        assert!((v - 2.0 * std::f64::consts::E.powi(2)).abs() < 1e-12);
        let t0 = existence_time_t0(2.0, 0.5, 1.0, 2.0, 10.0).unwrap();
        assert!((t0 - std::f64::consts::LN_2 / 2.0).abs() < 1e-12);
        assert_eq!(existence_time_t0(2.0, 0.5, 1.0, 2.0, 1e-3).unwrap(), 1e-3);
        assert!(matches!(
            existence_time_t0(1.0, 0.5, 1.0, 2.0, 1.0),
            Err(Error::InvalidK { .. })
        ));
        let mut prev = 0.0;
        for k in [1.5, 2.0, 4.0, 16.0, 256.0] {
            let t = existence_time_t0(k, 0.5, 1.0, 2.0, 10.0).unwrap();
            assert!(t >= prev);
            prev = t;
        }
    }

    #[test]
    fn parameter_selection() {
        let bp = select_blowup_parameters(2.5, 2.0, 2.0, 1.0, 0.0).unwrap();
        assert!((bp.alpha - 0.05).abs() < 1e-15);
        assert_eq!(bp.beta, 0.25);
        assert!((bp.y0 - 1.0).abs() < 1e-15);
        let bp = select_blowup_parameters(2.5, 2.0, 2.0, 2.0, -100.0).unwrap();
        assert!(bp.beta < 0.25 && bp.y0 > 0.0);
        assert!(matches!(
            select_blowup_parameters(2.5, 2.0, 2.0, 0.0, 0.0),
            Err(Error::NotBlowupCandidate(_))
        ));
        assert!(select_blowup_parameters(2.5, 1.25, 2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn horizon_closed_form() {
        // Y' = Y², Y(0) = 1 blows up at t = 1.
        assert!((blowup_horizon(0.5, 1.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((blowup_horizon_alt(0.5, 1.0, 1.0) - 1.0).abs() < 1e-15);
        // Y' = 2 Y^{1/(1-α)} integrated by RK4 reaches 1e12 just before t*.
        let (alpha, c, y0) = (0.2, 2.0, 0.5);
        let t_star = blowup_horizon(alpha, c, y0);
        let k = 1.0 / (1.0 - alpha);
        let rhs = |y: f64| c * y.powf(k);
        let (mut t, mut y) = (0.0, y0);
        while y < 1e12 {
            let h = 1e-4 * (1.0 / rhs(y) * y).min(1.0);
            let k1 = rhs(y);
            let k2 = rhs(y + 0.5 * h * k1);
            let k3 = rhs(y + 0.5 * h * k2);
            let k4 = rhs(y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += h;
        }
        assert!(
            t < t_star && t_star - t < 1e-2 * t_star,
            "t = {t}, t* = {t_star}"
        );
    }

    #[test]
    fn power_envelope_samples() {
        for g0 in [0.01, 0.5, 3.0] {
            for eta in [0.05, 0.5, 0.95] {
                for i in 0..200 {
                    let z = i as f64 * 0.37;
                    assert!(fractional_power_envelope(z, eta, g0));
                }
            }
        }
    }
}
