use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use qtr_core::walk::{build_cycle_hamiltonian, evolve_cycle, CycleState};
use qtr_core::{
    effective_potential_from, find_equilibrium, normal_modes, solve_ring, ABPhase,
    PotentialMethod, RingMethod, Seed, TrapConfig,
};

fn yb(n: usize, rho: f64) -> TrapConfig {
    TrapConfig::yb171(n, 1.5e6, rho).unwrap()
}

fn bench_equilibrium(c: &mut Criterion) {
    for (n, rho) in [(3usize, 1.001), (5, 1.010)] {
        c.bench_function(&format!("find_equilibrium_n{n}"), |b| {
            let cfg = yb(n, rho);
            b.iter(|| find_equilibrium(&cfg, &Seed::RingUp).unwrap());
        });
    }
}

fn bench_modes(c: &mut Criterion) {
    let cfg = yb(5, 1.010);
    let eq = find_equilibrium(&cfg, &Seed::RingUp).unwrap();
    c.bench_function("normal_modes_n5", |b| {
        b.iter(|| normal_modes(&cfg, &eq).unwrap());
    });
}

fn bench_rotor(c: &mut Criterion) {
    let cfg = yb(3, 1.001);
    let eq = find_equilibrium(&cfg, &Seed::RingUp).unwrap();
    c.bench_function("relaxed_potential_n3_g128", |b| {
        b.iter(|| {
            effective_potential_from(&cfg, &eq, PotentialMethod::Relaxed, 128).unwrap()
        });
    });
}

fn bench_ring_solver(c: &mut Criterion) {
    let cfg = yb(3, 1.001);
    let eq = find_equilibrium(&cfg, &Seed::RingUp).unwrap();
    let pot = effective_potential_from(&cfg, &eq, PotentialMethod::Relaxed, 128).unwrap();
    let mut group = c.benchmark_group("solve_ring");
    group.sample_size(10);
    for method in [RingMethod::Fourier, RingMethod::FiniteDifference] {
        group.bench_function(format!("{method}_res256"), |b| {
            b.iter(|| solve_ring(&pot, 256, method).unwrap());
        });
    }
    group.finish();
}

fn bench_walk(c: &mut Criterion) {
    let h = build_cycle_hamiltonian(5, 1.0, ABPhase::new(std::f64::consts::PI / 12.0).unwrap())
        .unwrap();
    c.bench_function("evolve_cycle_n5", |b| {
        b.iter_batched(
            || CycleState::site_basis(10, 1).unwrap(),
            |st| evolve_cycle(&h, &st, 7.3).unwrap(),
            BatchSize::SmallInput,
        );
    });
}

criterion_group!(
    benches,
    bench_equilibrium,
    bench_modes,
    bench_rotor,
    bench_ring_solver,
    bench_walk
);
criterion_main!(benches);
