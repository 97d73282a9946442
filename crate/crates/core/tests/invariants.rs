//! Properties of the public pipeline: profile, spectrum, control, simulator
//! and file formats.

use std::f64::consts::TAU;
use std::sync::{Arc, OnceLock};

use glspiral::control::{admissible_shifts, delay_lower_bound, ControlTriple, Reflection};
use glspiral::discretization::Domain;
use glspiral::geometry::{BoundaryCondition, SurfaceSpec};
use glspiral::io::{self, MapRow};
use glspiral::profile::{continue_rotating_wave, solve_vortex_equilibrium, ContinuationSettings, SpiralProfile};
use glspiral::simulator::{distance_to_orbit, energy, random_smooth_field, Feedback, FieldState, Sample, SimulationSettings, Simulator};
use glspiral::spectrum::{unstable_report, SpectrumSettings};
use glspiral::Exec;
use num_complex::Complex64;
use proptest::prelude::*;

const N_MAX: usize = 8;

struct Fixture {
    vortex: SpiralProfile,
    wave: SpiralProfile,
}

fn fixture() -> &'static Fixture {
    static CELL: OnceLock<Fixture> = OnceLock::new();
    CELL.get_or_init(|| {
        let d = Arc::new(Domain::new(SurfaceSpec::disk(), BoundaryCondition::neumann(), 64).unwrap());
        let settings = ContinuationSettings::default();
        let vortex = solve_vortex_equilibrium(d, 1, 0, 30.0, &settings).unwrap();
        let wave = continue_rotating_wave(&vortex, 0.04, -0.03, &settings).unwrap();
        assert!(wave.omega.abs() > 1e-3, "rotating wave should rotate");
        Fixture { vortex, wave }
    })
}

fn principal_values(p: &SpiralProfile, exec: Exec) -> Vec<Vec<f64>> {
    let r = unstable_report(p, -4.0, &SpectrumSettings { exec, ..Default::default() }).unwrap();
    r.spectra.iter().map(|s| s.eigenvalues.clone()).collect()
}

#[test]
fn execution_policies_give_identical_results() {
    let f = fixture();
    assert_eq!(principal_values(&f.vortex, Exec::Sequential), principal_values(&f.vortex, Exec::Parallel));

    let mut start = FieldState::from_profile(&f.wave, N_MAX).unwrap();
    start.axpy(Complex64::new(1e-2, 0.0), &random_smooth_field(N_MAX, N_MAX, f.wave.domain().grid(), 3));
    let triple = ControlTriple::noninvasive(&f.wave, 0.05, 2.0, Reflection::Plus).unwrap();
    let run = |exec| {
        let settings = SimulationSettings { dt: 2e-3, n_max: N_MAX, exec, ..Default::default() };
        let mut sim = Simulator::new(&f.wave, start.clone(), Some(Feedback { triple, b: -0.7 }), &settings).unwrap();
        let samples = sim.run(0.1, 10).unwrap();
        (samples, sim.state())
    };
    let (seq_samples, seq_state) = run(Exec::Sequential);
    let (par_samples, par_state) = run(Exec::Parallel);
    assert_eq!(seq_samples, par_samples);
    for k in -(N_MAX as i64)..=N_MAX as i64 {
        assert_eq!(seq_state.mode(k), par_state.mode(k));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn gauge_rotation_preserves_residual_and_orbit(theta in 0.05f64..TAU - 0.05) {
        let f = fixture();
        let g = Complex64::from_polar(1.0, theta);
        let v = &f.vortex;
        let rotated = SpiralProfile::from_parts(
            v.domain().clone(), v.m, v.j, v.lambda, v.eta, v.beta, v.omega, v.u.iter().map(|z| z * g).collect(),
        ).unwrap();
        prop_assert!((rotated.residual().unwrap() - v.residual().unwrap()).abs() < 1e-12);
        // The linearisation is taken in the real gauge only.
        prop_assert!(unstable_report(&rotated, -4.0, &SpectrumSettings::default()).is_err());
        // The orbit distance quotients out the same rotation.
        let state = FieldState::from_profile(&rotated, N_MAX).unwrap();
        let d = distance_to_orbit(&state, v).unwrap();
        prop_assert!(d < 1e-10 * state.norm(v.domain().grid().weights()), "distance {}", d);
    }

    #[test]
    fn noninvasive_feedback_vanishes_along_the_wave(tau in 0.0f64..1.5, zeta in 0.0f64..TAU, b in -3.0f64..0.0, minus in any::<bool>()) {
        let f = fixture();
        let iota = if minus { Reflection::Minus } else { Reflection::Plus };
        // Reflected shifts need a closed surface; on the disk only `plus` is valid.
        prop_assume!(iota == Reflection::Plus || f.wave.domain().surface().boundary_empty());
        let triple = ControlTriple::noninvasive(&f.wave, tau, zeta, iota).unwrap();
        let settings = SimulationSettings { dt: 1e-2, n_max: N_MAX, ..Default::default() };
        let start = FieldState::from_profile(&f.wave, N_MAX).unwrap();
        let scale = start.norm(f.wave.domain().grid().weights());
        let mut sim = Simulator::new(&f.wave, start, Some(Feedback { triple, b }), &settings).unwrap();
        for _ in 0..15 {
            sim.step().unwrap();
        }
        prop_assert!(sim.control_norm().unwrap() < 1e-10 * scale);
        prop_assert!(distance_to_orbit(&sim.state(), &f.wave).unwrap() < 1e-8 * scale);
    }

    #[test]
    fn best_shift_dominates(modes in prop::collection::vec(1i64..7, 1..4), j in 0u32..2, zeta in 0.0f64..TAU) {
        let shifts = admissible_shifts(&modes, j);
        let (best, margin) = shifts.best();
        prop_assert!((0.0..TAU).contains(&best));
        prop_assert!((shifts.margin(best) - margin).abs() < 1e-12);
        prop_assert!(margin >= shifts.margin(zeta) - 1e-9);
    }

    #[test]
    fn delay_bound_shrinks_with_gain(delta in 1e-3f64..1.0, b in -5.0f64..-1e-3, factor in 1.0f64..4.0) {
        let tau = delay_lower_bound(delta, b);
        prop_assert!(tau > 0.0 && tau <= 1.0 / b.abs() + 1e-12);
        prop_assert!(delay_lower_bound(delta, factor * b) <= tau + 1e-12);
    }

    #[test]
    fn free_energy_never_rises(seed in 0u64..1000) {
        let f = fixture();
        let v = &f.vortex;
        let mut start = FieldState::from_profile(v, N_MAX).unwrap();
        start.axpy(Complex64::new(0.3, 0.0), &random_smooth_field(N_MAX, N_MAX, v.domain().grid(), seed));
        let settings = SimulationSettings { dt: 1e-3, n_max: N_MAX, ..Default::default() };
        let mut sim = Simulator::new(v, start, None, &settings).unwrap();
        let mut last = energy(&sim.state(), v.domain(), v.lambda, Exec::Sequential).unwrap();
        for _ in 0..60 {
            sim.step().unwrap();
            let e = energy(&sim.state(), v.domain(), v.lambda, Exec::Sequential).unwrap();
            prop_assert!(e <= last + 1e-9 * last.abs().max(1.0), "{} -> {}", last, e);
            last = e;
        }
    }
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6f64..1e6, -1e-6f64..1e-6, Just(0.0), Just(f64::MIN_POSITIVE)]
}

proptest! {
    #[test]
    fn map_rows_reload_exactly(rows in prop::collection::vec((finite(), finite(), finite(), finite(), any::<bool>()), 0..20)) {
        let rows: Vec<MapRow> = rows.into_iter().map(|(b, tau, zeta, margin, stable)| MapRow { b, tau, zeta, margin, stable }).collect();
        prop_assert_eq!(io::map_from_csv(&io::map_to_csv(&rows).unwrap()).unwrap(), rows);
    }

    #[test]
    fn time_series_reloads_exactly(rows in prop::collection::vec((finite(), finite(), finite(), finite(), finite()), 1..20)) {
        let samples: Vec<Sample> = rows
            .into_iter()
            .map(|(t, distance, energy, control_norm, field_norm)| Sample { t, distance, energy, control_norm, field_norm })
            .collect();
        prop_assert_eq!(io::timeseries_from_csv(&io::timeseries_to_csv(&samples).unwrap()).unwrap(), samples);
    }

    #[test]
    fn snapshots_reload_exactly(seed in any::<u64>(), k_max in 0usize..=N_MAX) {
        let grid = fixture().vortex.domain().grid();
        let state = random_smooth_field(N_MAX, k_max, grid, seed);
        let back = io::snapshot_from_csv(&io::snapshot_to_csv(&state, grid).unwrap(), grid, state.t).unwrap();
        for k in -(N_MAX as i64)..=N_MAX as i64 {
            prop_assert_eq!(back.mode(k), state.mode(k));
        }
    }
}
