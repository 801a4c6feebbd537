use std::f64::consts::PI;

use plapwave::dynamics::{simulate, weak_residual};
use plapwave::energy::{
    blowup_certificate, check_gronwall_envelope, fractional_power_envelope,
    nprime_second_derivative, nprime_second_derivative_power_law, BlowupParameters,
};
use plapwave::function_space::{lp_norm, w1p_norm_pow, DiscreteFunction, Region};
use plapwave::{InitialProfile, SimulationConfig, Termination, Trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn global(t_end: f64, dt: f64) -> SimulationConfig {
    let mut cfg = SimulationConfig::new(
        2.5,
        1.25,
        1.25,
        PI,
        16,
        InitialProfile::Eigenmode {
            j: 1,
            amplitude: 1.0,
        },
    );
    cfg.dt0 = dt;
    cfg.t_end = t_end;
    cfg.blowup_threshold = 1e12;
    cfg
}

fn blowup(amplitude: f64) -> SimulationConfig {
    let mut cfg = SimulationConfig::new(
        2.5,
        2.0,
        2.0,
        1.0,
        16,
        InitialProfile::Constant { value: amplitude },
    );
    cfg.t_end = 10.0;
    cfg
}

fn max_energy_inequality_excess(traj: &Trajectory) -> f64 {
    let e0 = traj.samples[0].record.e_total;
    traj.records()
        .map(|r| (r.e_total + r.damping_cum - e0) / e0.abs().max(1.0))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn zero_data_stays_zero() {
    let cfg = SimulationConfig::new(
        2.5,
        2.0,
        2.0,
        PI,
        8,
        InitialProfile::Constant { value: 0.0 },
    );
    let traj = simulate(&cfg).unwrap();
    assert_eq!(traj.termination, Termination::Completed);
    assert!(traj
        .samples
        .iter()
        .all(|s| s.state.c.iter().chain(&s.state.v).all(|&x| x == 0.0)));
    assert_eq!(
        weak_residual(&traj, 3, traj.samples.len() - 1).unwrap(),
        0.0
    );
}

#[test]
fn bitwise_determinism() {
    let a = simulate(&blowup(2.0)).unwrap();
    let b = simulate(&blowup(2.0)).unwrap();
    assert_eq!(a.samples.len(), b.samples.len());
    for (x, y) in a.samples.iter().zip(&b.samples) {
        assert_eq!(x.state, y.state);
        assert_eq!(x.record.e_total.to_bits(), y.record.e_total.to_bits());
    }
}

#[test]
fn energy_positive_and_dominates_norm() {
    let traj = simulate(&global(2.0, 1e-3)).unwrap();
    let basis = &traj.basis;
    let p = traj.config.p;
    for s in traj.samples.iter().step_by(50) {
        let u = DiscreteFunction::new(basis, s.state.c.clone()).unwrap();
        let np = w1p_norm_pow(&u, p);
        assert!(s.record.e_pos >= 0.0);
        assert!(np <= p * s.record.e_pos * (1.0 + 1e-12));
        let fq = lp_norm(&u, 2.25, Region::Interior).powf(2.25);
        let hr = lp_norm(&u, 2.25, Region::Boundary).powf(2.25);
        assert!((s.record.f_int - fq).abs() <= 1e-10 * fq.max(1.0));
        assert!((s.record.h_int - hr).abs() <= 1e-10 * hr.max(1.0));
    }
}

#[test]
fn g_nondecreasing_and_positive_for_negative_energy() {
    let traj = simulate(&blowup(2.0)).unwrap();
    let recs: Vec<_> = traj.records().collect();
    assert!(recs[0].e_total < 0.0);
    assert!((recs[0].g + recs[0].e_total).abs() < 1e-12);
    assert!(recs.windows(2).all(|w| w[1].g >= w[0].g));
}

#[test]
fn energy_inequality_excess_vanishes_with_dt() {
    let coarse = max_energy_inequality_excess(&simulate(&global(2.0, 1e-3)).unwrap());
    let fine = max_energy_inequality_excess(&simulate(&global(2.0, 5e-4)).unwrap());
    assert!(fine <= 1e-2, "excess {fine}");
    assert!(
        fine <= 0.0 || fine < 0.6 * coarse.max(0.0),
        "coarse {coarse}, fine {fine}"
    );
}

#[test]
fn gronwall_envelope_in_global_regime() {
    let traj = simulate(&global(10.0, 1e-3)).unwrap();
    assert_eq!(traj.termination, Termination::Completed);
    let check = check_gronwall_envelope(&traj, 1e-9);
    assert!(check.c_m.is_finite() && check.c_m > 0.0);
    assert!(check.holds, "{check:?}");
}

#[test]
fn certificate_for_blowup_run() {
    let traj = simulate(&blowup(2.0)).unwrap();
    let params = traj.params.expect("parameters");
    assert!((params.alpha - 0.05).abs() < 1e-15);
    let cert = blowup_certificate(&traj, &params);
    assert!(cert.applicable);
    assert!(cert.g0 > 0.0 && cert.g_strictly_increasing && cert.y_strictly_increasing);
    assert!(cert.fitted_c > 0.0);
    let observed = cert.observed_blowup_time.expect("blow-up detected");
    assert!(cert.horizon.is_finite() && cert.horizon_alt.is_finite());
    assert!(observed <= cert.horizon, "{observed} vs {}", cert.horizon);
}

#[test]
fn certificate_not_applicable_for_global_run() {
    let traj = simulate(&global(10.0, 1e-3)).unwrap();
    assert!(traj.params.is_none());
    let g0 = traj.samples[0].record.g;
    let params = BlowupParameters {
        alpha: 0.05,
        beta: 0.25,
        m: 1.25,
        y0: g0.powf(0.95),
        fitted_c: None,
    };
    let cert = blowup_certificate(&traj, &params);
    assert!(!cert.applicable);
    assert!(cert.fitted_c.is_nan() || cert.fitted_c <= 0.0 || cert.horizon > traj.config.t_end);
}

#[test]
fn nprime_second_derivative_matches_finite_differences() {
    let errors: Vec<f64> = [1e-3, 5e-4]
        .iter()
        .map(|&dt| {
            let traj = simulate(&global(0.5, dt)).unwrap();
            let sys = traj.system();
            let recs: Vec<_> = traj.records().collect();
            let mut worst: f64 = 0.0;
            for i in (1..recs.len() - 1).step_by(10) {
                let state = &traj.samples[i].state;
                let forces = sys.forces(&state.c).unwrap();
                let exact = nprime_second_derivative(&sys, state, &forces);
                let law = nprime_second_derivative_power_law(&sys, state, &forces);
                assert!((exact - law).abs() <= 1e-9 * exact.abs().max(1.0));
                let fd =
                    (recs[i + 1].nprime - recs[i - 1].nprime) / (recs[i + 1].t - recs[i - 1].t);
                worst = worst.max((fd - exact).abs() / exact.abs().max(1.0));
            }
            worst
        })
        .collect();
    assert!(errors[0] < 0.05, "{errors:?}");
    let ratio = errors[0] / errors[1];
    assert!((1.6..2.5).contains(&ratio), "{errors:?}");
}

#[test]
fn fractional_power_envelope_on_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10_000 {
        let z = rng.gen_range(0.0..1e6f64) * rng.gen::<f64>().powi(4);
        let eta = rng.gen_range(1e-6..1.0 - 1e-6);
        let g0 = 10f64.powf(rng.gen_range(-3.0..3.0));
        assert!(
            fractional_power_envelope(z, eta, g0),
            "z={z} eta={eta} g0={g0}"
        );
    }
}

#[test]
fn blowup_time_decreases_with_amplitude() {
    let times: Vec<f64> = [2.0, 3.0, 4.0]
        .iter()
        .map(|&a| {
            simulate(&blowup(a))
                .unwrap()
                .blowup_time()
                .expect("blow-up")
        })
        .collect();
    assert!(times.windows(2).all(|w| w[1] <= w[0]), "{times:?}");
}

#[test]
fn gronwall_envelope_in_lipschitz_regime() {
    let mut cfg = SimulationConfig::new(
        2.5,
        1.0,
        1.0,
        PI,
        16,
        InitialProfile::Eigenmode {
            j: 1,
            amplitude: 1.0,
        },
    );
    cfg.t_end = 5.0;
    let traj = simulate(&cfg).unwrap();
    assert_eq!(traj.termination, Termination::Completed);
    let check = check_gronwall_envelope(&traj, 1e-9);
    assert!(check.c_m.is_finite() && check.c_m > 0.0);
    assert!(check.holds, "{check:?}");
}
