//! Sequential versus parallel execution of the data-parallel kernels.
//!
//! Build with `--no-default-features` to confirm that both policies then
//! collapse to the same sequential code path.

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use glspiral::control::{stability_verdict, ControlTriple, Reflection, VerdictSettings};
use glspiral::discretization::Domain;
use glspiral::geometry::{BoundaryCondition, SurfaceSpec};
use glspiral::profile::{solve_vortex_equilibrium, ContinuationSettings, SpiralProfile};
use glspiral::simulator::{random_smooth_field, FieldState, SimulationSettings, Simulator};
use glspiral::spectrum::{unstable_report, SpectrumSettings};
use glspiral::Exec;
use num_complex::Complex64;

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn vortex(nodes: usize) -> SpiralProfile {
    let d = Arc::new(Domain::new(SurfaceSpec::disk(), BoundaryCondition::neumann(), nodes).unwrap());
    solve_vortex_equilibrium(d, 1, 0, 50.0, &ContinuationSettings::default()).unwrap()
}

fn spectral_scan(c: &mut Criterion) {
    let p = vortex(128);
    let mut g = c.benchmark_group("spectral_scan");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        let settings = SpectrumSettings { exec, ..Default::default() };
        g.bench_function(BenchmarkId::new(name, 128), |b| b.iter(|| unstable_report(black_box(&p), -12.0, &settings).unwrap()));
    }
    g.finish();
}

fn verdict(c: &mut Criterion) {
    let p = vortex(64);
    let report = unstable_report(&p, -12.0, &SpectrumSettings::default()).unwrap();
    let triple = ControlTriple::noninvasive(&p, 0.5, std::f64::consts::PI, Reflection::Plus).unwrap();
    let mut g = c.benchmark_group("verdict");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        let settings = VerdictSettings { exec, ..Default::default() };
        g.bench_function(name, |b| b.iter(|| stability_verdict(&p, &triple, -2.0, black_box(&report), &settings).unwrap()));
    }
    g.finish();
}

fn time_steps(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulator_50_steps");
    g.sample_size(10);
    for nodes in [64, 256] {
        let p = vortex(nodes);
        let mut start = FieldState::from_profile(&p, 16).unwrap();
        start.axpy(Complex64::new(1e-2, 0.0), &random_smooth_field(16, 16, p.domain().grid(), 1));
        for (name, exec) in POLICIES {
            let settings = SimulationSettings { dt: 1e-3, n_max: 16, exec, ..Default::default() };
            let sim = Simulator::new(&p, start.clone(), None, &settings).unwrap();
            g.bench_function(BenchmarkId::new(name, nodes), |b| {
                b.iter(|| {
                    let mut s = sim.clone();
                    for _ in 0..50 {
                        s.step().unwrap();
                    }
                    s
                })
            });
        }
    }
    g.finish();
}

criterion_group!(benches, spectral_scan, verdict, time_steps);
criterion_main!(benches);
