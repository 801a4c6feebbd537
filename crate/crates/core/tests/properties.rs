use std::f64::consts::PI;
use std::sync::OnceLock;

use approx::{assert_relative_eq, relative_eq};
use plapwave::dynamics::GalerkinSystem;
use plapwave::energy::{existence_time_t0, gronwall_envelope};
use plapwave::function_space::{
    dual_norm_ratio, monotonicity_gap, plap_pairing, signed_power, w1p_norm, w1p_norm_pow,
    DiscreteFunction,
};
use plapwave::{
    DomainSpec, InitialProfile, ModalState, Scheme, SimulationConfig, SourceSpec, SpectralBasis,
};
use proptest::prelude::*;

const N: usize = 8;

fn basis() -> &'static SpectralBasis {
    static BASIS: OnceLock<SpectralBasis> = OnceLock::new();
    BASIS.get_or_init(|| SpectralBasis::new(DomainSpec::new(PI).unwrap(), N).unwrap())
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, N)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn signed_power_is_odd_with_magnitude(z in -50.0..50.0f64, e in 0.0..2.0f64) {
        prop_assert_eq!(signed_power(-z, e), -signed_power(z, e));
        prop_assert!(relative_eq!(signed_power(z, e).abs(), z.abs().powf(e + 1.0), max_relative = 1e-12));
    }

    #[test]
    fn plap_pairing_on_diagonal_is_norm_power(c in coeffs(), p in 2.05..2.95f64) {
        let u = DiscreteFunction::new(basis(), c).unwrap();
        let pair = plap_pairing(&u, &u, p);
        let norm = w1p_norm_pow(&u, p);
        prop_assert!(relative_eq!(pair, norm, epsilon = 1e-300, max_relative = 1e-12));
    }

    #[test]
    fn p_laplacian_is_monotone(a in coeffs(), b in coeffs(), p in 2.05..2.95f64) {
        let u = DiscreteFunction::new(basis(), a).unwrap();
        let v = DiscreteFunction::new(basis(), b).unwrap();
        prop_assert!(monotonicity_gap(&u, &v, p) >= -1e-10);
    }

    #[test]
    fn dual_norm_bound_holds(a in coeffs(), b in coeffs(), p in 2.05..2.95f64) {
        let u = DiscreteFunction::new(basis(), a).unwrap();
        let phi = DiscreteFunction::new(basis(), b).unwrap();
        prop_assert!(dual_norm_ratio(&u, w1p_norm(&u, p), &phi, p) <= 1.0 + 1e-8);
    }

    #[test]
    fn projection_recovers_coefficients(c in coeffs()) {
        let u = DiscreteFunction::new(basis(), c.clone()).unwrap();
        let back = basis().project_nodal(u.values());
        for (x, y) in c.iter().zip(&back) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn imex_damps_free_modes(v in coeffs(), dt in 1e-4..1e-1f64) {
        let spec = SourceSpec::power_law(2.0, 2.0);
        let sys = GalerkinSystem::new(basis(), &spec, 2.5);
        let state = ModalState { t: 0.0, c: vec![0.0; N], v: v.clone() };
        let next = sys.step(&state, dt, Scheme::Imex).unwrap();
        for (j, (before, after)) in v.iter().zip(&next.v).enumerate() {
            let expected = before / (1.0 + dt * sys.lambda(j));
            assert_relative_eq!(*after, expected, epsilon = 1e-15, max_relative = 1e-12);
            prop_assert!(after.abs() <= before.abs());
        }
    }

    #[test]
    fn envelope_dominates_initial_energy(e0 in 0.0..100.0f64, c in 0.0..5.0f64, p in 2.05..2.95f64, t in 0.0..3.0f64) {
        prop_assert!(gronwall_envelope(e0, c, p, t) >= e0);
        let later = gronwall_envelope(e0, c, p, t + 0.1);
        prop_assert!(later >= gronwall_envelope(e0, c, p, t));
    }

    #[test]
    fn existence_time_grows_with_k(e0 in 0.0..10.0f64, c in 0.1..5.0f64, p in 2.05..2.95f64, dk in 0.1..100.0f64) {
        let k = p * e0 + dk;
        let a = existence_time_t0(k, e0, c, p, 100.0).unwrap();
        let b = existence_time_t0(k + 1.0, e0, c, p, 100.0).unwrap();
        prop_assert!(a >= 0.0 && b >= a);
    }

    #[test]
    fn config_json_round_trip(
        p in 2.05..2.95f64,
        q in 1.0..3.0f64,
        r in 1.0..3.0f64,
        length in 0.5..5.0f64,
        modes in 1usize..40,
        amp in -5.0..5.0f64,
        dt in 1e-5..1e-2f64,
        seed in any::<u64>(),
    ) {
        let mut cfg = SimulationConfig::new(p, q, r, length, modes, InitialProfile::Constant { value: amp });
        cfg.dt0 = dt;
        cfg.seed = seed;
        let back = SimulationConfig::from_json(&cfg.to_json_pretty()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
