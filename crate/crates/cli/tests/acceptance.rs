//! Acceptance suite. One test per criterion; each prints its measured
//! values and asserts the pinned tolerance and runtime budget.
//!
//! Run with `cargo test -p qtr-cli --test acceptance -- --nocapture` to see
//! the per-criterion measurements.

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use qtr_core::phys::HBAR;
use qtr_core::tunnel::ring_eigenvalues;
use qtr_core::walk::{
    build_cycle_hamiltonian, evolve_cycle, evolve_two_level, probability_up, walk_distribution,
    CycleState, TwoLevelState,
};
use qtr_core::{
    effective_potential, find_equilibrium, normal_modes, scan_modes, solve_ring, tunneling_rate,
    ABPhase, PotentialMethod, RingMethod, RotorPotential, Seed, TrapConfig,
};

fn yb(n: usize, rho: f64) -> TrapConfig {
    TrapConfig::yb171(n, 1.5e6, rho).unwrap()
}

fn budget(t0: Instant, limit_s: f64, what: &str) {
    let elapsed = t0.elapsed().as_secs_f64();
    println!("  runtime: {elapsed:.2} s (budget {limit_s} s)");
    assert!(elapsed < limit_s, "{what} exceeded its runtime budget");
}

#[test]
fn criterion_1_analytic_crystal_oracles() {
    let t0 = Instant::now();

    // N=2 equilibrium at +-(0, (1/4)^(1/3)) to 1e-9
    let a = 0.25_f64.cbrt();
    let eq2 = find_equilibrium(&yb(2, 1.1), &Seed::Chain).unwrap();
    let mut zs: Vec<f64> = eq2.positions.iter().map(|p| p[1]).collect();
    zs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    assert!(eq2.positions.iter().all(|p| p[0].abs() < 1e-9));
    assert!((zs[0] + a).abs() < 1e-9 && (zs[1] - a).abs() < 1e-9);
    println!("  N=2 equilibrium at z = +-{a:.12} reproduced");

    // COM modes at exactly rho and 1 for N in {3, 5}, to 1e-8 relative
    for (n, rho) in [(3usize, 1.001), (5, 1.01)] {
        let c = yb(n, rho);
        let eq = find_equilibrium(&c, &Seed::RingUp).unwrap();
        let spec = normal_modes(&c, &eq).unwrap();
        for target in [1.0, rho] {
            let best = spec
                .frequencies
                .iter()
                .map(|f| (f - target).abs() / target)
                .fold(f64::INFINITY, f64::min);
            println!("  N={n}: COM mode at {target} off by {best:.2e} relative");
            assert!(best < 1e-8);
        }
    }

    // rotational zero mode at isotropy
    let c = yb(3, 1.0);
    let eq = find_equilibrium(&c, &Seed::RingUp).unwrap();
    let spec = normal_modes(&c, &eq).unwrap();
    println!("  N=3 rho=1 lowest mode: {:.2e} omega_z", spec.frequencies[0]);
    assert!(spec.frequencies[0] < 1e-5);

    budget(t0, 5.0, "criterion 1");
}

#[test]
fn criterion_2_mode_scan_reproduction() {
    let t0 = Instant::now();
    for (n, lo, hi, steps) in [(3usize, 1.0005, 1.2, 40), (5, 1.001, 1.05, 25)] {
        let grid: Vec<f64> = (0..steps)
            .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
            .collect();
        let scan = scan_modes(&yb(n, lo), &grid, &Seed::RingUp).unwrap();
        let mut prev = -1.0;
        for (r, spec) in scan.spectra.iter().enumerate() {
            assert_eq!(spec.frequencies.len(), 2 * n, "mode count is 2N");
            let rot = spec.rotational_frequency().unwrap();
            // the rotational branch is the lowest mode on this whole range
            assert!(
                (rot - spec.frequencies[0]).abs() <= f64::EPSILON * rot.abs(),
                "rotational not the lowest mode at ratio {}",
                grid[r]
            );
            assert!(
                rot > prev,
                "rotational branch not strictly increasing at ratio {}",
                grid[r]
            );
            prev = rot;
        }
        println!(
            "  N={n}: rotational branch monotone over [{lo}, {hi}] ({steps} points), final {prev:.4} omega_z"
        );
    }
    budget(t0, 30.0, "criterion 2");
}

#[test]
fn criterion_3_tunneling_rate_band() {
    let t0 = Instant::now();
    let report = tunneling_rate(&yb(3, 1.001)).unwrap();
    let d = &report.relaxed;
    let per_2pi = d.rate_j / (2.0 * PI);
    let dev_h = (d.rate_hz / 4.95 - 1.0).abs();
    let dev_j = (per_2pi / 4.95 - 1.0).abs();
    println!("  splitting = {:.6e} J", d.splitting);
    println!("  splitting/h       = {:.4} Hz    ({:+.1}% vs 4.95 Hz)", d.rate_hz, 100.0 * (d.rate_hz / 4.95 - 1.0));
    println!("  splitting/2hbar   = {:.4} rad/s ({:.4} Hz, {:+.1}% vs 4.95 Hz)", d.rate_j, per_2pi, 100.0 * (per_2pi / 4.95 - 1.0));
    println!("  rigid-method rate = {:.4} Hz (splitting/h)", report.rigid.rate_hz);
    // the paper's figure corresponds to the splitting/(2 hbar) convention
    // expressed in ordinary hertz; the band absorbs the convention choice
    let dev_best = dev_h.min(dev_j);
    assert!(
        dev_best <= 0.30,
        "no reported rate convention lands within 30% of 4.95 Hz (best deviation {dev_best:.3})"
    );
    // pin the headline numbers against drift
    assert!((d.rate_hz / 9.119686 - 1.0).abs() < 1e-4);
    assert!((per_2pi / 4.559843 - 1.0).abs() < 1e-4);
    assert!(report.relaxed_potential.is_two_well());
    budget(t0, 60.0, "criterion 3");
}

#[test]
fn criterion_4_solver_cross_validation() {
    let t0 = Instant::now();
    let c = yb(3, 1.001);
    let pot = effective_potential(&c, PotentialMethod::Relaxed, 256).unwrap();

    // free ring: plane-wave spectrum against hbar^2 (mN)^2 / 2I to 1e-10
    let free = RotorPotential::free_ring(3, 256, pot.inertia);
    let evals = ring_eigenvalues(&free, 1024, RingMethod::Fourier, 9).unwrap();
    let unit = HBAR * HBAR * 9.0 / (2.0 * pot.inertia);
    let expect = [0.0, 1.0, 1.0, 4.0, 4.0, 9.0, 9.0, 16.0, 16.0];
    let mut worst = 0.0_f64;
    for (ev, ex) in evals.iter().zip(expect) {
        let err = if ex == 0.0 {
            ev.abs() / unit
        } else {
            (ev / (ex * unit) - 1.0).abs()
        };
        worst = worst.max(err);
    }
    println!("  free-ring spectrum vs closed form: worst relative error {worst:.2e}");
    assert!(worst < 1e-10);

    // fourier vs finite difference at resolution 1024.
    //
    // The second-order stencil carries a dispersion error of (N h)^2 / 12
    // ~ 3e-6 on the doublet at 1024 points regardless of the potential
    // (verified by the h^2 Richardson scaling below), so the 1e-6 figure
    // is not reachable at this resolution; it is met at 2048. The
    // assertion keeps the stated tolerance and resolution.
    let f = solve_ring(&pot, 1024, RingMethod::Fourier).unwrap();
    let d = solve_ring(&pot, 1024, RingMethod::FiniteDifference).unwrap();
    let rel_1024 = ((d.splitting - f.splitting) / f.splitting).abs();
    let f2 = solve_ring(&pot, 2048, RingMethod::Fourier).unwrap();
    let d2 = solve_ring(&pot, 2048, RingMethod::FiniteDifference).unwrap();
    let rel_2048 = ((d2.splitting - f2.splitting) / f2.splitting).abs();
    println!("  fourier vs finite-difference splitting: {rel_1024:.3e} relative at 1024");
    println!("  fourier vs finite-difference splitting: {rel_2048:.3e} relative at 2048");
    println!(
        "  ratio {:.2} (second-order stencil: factor 4 per doubling)",
        rel_1024 / rel_2048
    );
    budget(t0, 120.0, "criterion 4");
    assert!(
        rel_1024 <= 1e-6,
        "splittings differ by {rel_1024:.3e} relative at resolution 1024; the plain \
         second-order stencil floors at ~3e-6 there (1e-6 is reached at 2048: {rel_2048:.3e})"
    );
}

#[test]
fn criterion_5_two_level_interference() {
    let t0 = Instant::now();
    let j = 28.65;
    let up = TwoLevelState::psi_up();
    let mut worst = 0.0_f64;
    for theta in [0.0, PI / 24.0, PI / 12.0, PI / 6.0, PI / 2.0] {
        let phase = ABPhase::new(theta).unwrap();
        let h = build_cycle_hamiltonian(1, j, phase).unwrap();
        for i in 0..=1000 {
            let t = 0.5 * i as f64 / 1000.0; // seconds; ~4.6 full periods
            let expect = (2.0 * j * t * theta.cos()).cos().powi(2);
            let evolved = probability_up(&evolve_two_level(&up, j, phase, t).unwrap());
            worst = worst.max((evolved - expect).abs());
            // independent route: two-site cycle through the Fourier evolution
            let cyc = evolve_cycle(&h, &CycleState::site_basis(2, 1).unwrap(), t).unwrap();
            worst = worst.max((cyc.probabilities()[0] - expect).abs());
            if theta == PI / 2.0 {
                assert!(
                    (evolved - 1.0).abs() < 1e-12,
                    "tunneling not suppressed at theta_AB = pi/2"
                );
            }
        }
    }
    println!("  worst |P_up - cos^2(2 j t cos theta)| = {worst:.2e}");
    assert!(worst < 1e-10);
    budget(t0, 1.0, "criterion 5");
}

#[test]
fn criterion_6_cyclic_walk() {
    let t0 = Instant::now();
    let h0 = build_cycle_hamiltonian(3, 1.0, ABPhase::ZERO).unwrap();
    let h6 = build_cycle_hamiltonian(3, 1.0, ABPhase::new(PI / 6.0).unwrap()).unwrap();
    let grid: Vec<f64> = (0..=2000).map(|i| 20.0 * i as f64 / 2000.0).collect();

    let table0 = walk_distribution(&h0, 1, &grid).unwrap();
    let table6 = walk_distribution(&h6, 1, &grid).unwrap();
    let mut max_p4 = 0.0_f64;
    let mut max_unit = 0.0_f64;
    let mut max_asym = 0.0_f64;
    for (r0, r6) in table0.probabilities.iter().zip(&table6.probabilities) {
        max_unit = max_unit.max((r0.iter().sum::<f64>() - 1.0).abs());
        max_unit = max_unit.max((r6.iter().sum::<f64>() - 1.0).abs());
        max_p4 = max_p4.max(r6[3]);
        for k in 0..6 {
            max_asym = max_asym.max((r0[k % 6] - r0[(6 - k) % 6]).abs());
        }
    }
    println!("  unitarity defect {max_unit:.2e}; P(site 4) max {max_p4:.2e}; mirror asymmetry {max_asym:.2e}");
    assert!(max_unit < 1e-12);
    assert!(max_p4 < 1e-10, "destructive interference at the antipode broken");
    assert!(max_asym < 1e-10);

    let revived = evolve_cycle(&h0, &CycleState::site_basis(6, 1).unwrap(), 2.0 * PI).unwrap();
    let p1 = revived.probabilities()[0];
    println!("  revival at t = 2 pi / j: P1 = 1 - {:.2e}", 1.0 - p1);
    assert!(p1 > 1.0 - 1e-10);
    budget(t0, 5.0, "criterion 6");
}

#[test]
fn criterion_7_spectrum_and_gauge() {
    let t0 = Instant::now();
    let j = 2.5;
    let mut worst = 0.0_f64;
    for n_ions in 2..=6usize {
        for theta in [0.0, PI / 24.0, PI / 12.0, PI / 6.0, PI / 2.0] {
            let h = build_cycle_hamiltonian(n_ions, j, ABPhase::new(theta).unwrap()).unwrap();
            let mut closed = h.eigenvalues();
            closed.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut dense: Vec<f64> = h
                .matrix()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .cloned()
                .collect();
            dense.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let scale = 2.0 * HBAR * j;
            for (a, b) in closed.iter().zip(&dense) {
                worst = worst.max((a - b).abs() / scale);
            }
        }
    }
    println!("  circulant spectrum vs dense eigensolve: worst {worst:.2e} of 2 hbar j");
    assert!(worst < 1e-10);

    // probabilities depend on theta_AB only through the total loop flux:
    // invariant under theta -> theta + pi/N
    let grid: Vec<f64> = (0..=200).map(|i| 10.0 * i as f64 / 200.0).collect();
    let mut worst_shift = 0.0_f64;
    for n_ions in [2usize, 3, 5] {
        for theta in [0.07, PI / 24.0, PI / 6.0] {
            let a = walk_distribution(
                &build_cycle_hamiltonian(n_ions, j, ABPhase::new(theta).unwrap()).unwrap(),
                1,
                &grid,
            )
            .unwrap();
            let b = walk_distribution(
                &build_cycle_hamiltonian(
                    n_ions,
                    j,
                    ABPhase::new(theta + PI / n_ions as f64).unwrap(),
                )
                .unwrap(),
                1,
                &grid,
            )
            .unwrap();
            for (ra, rb) in a.probabilities.iter().zip(&b.probabilities) {
                for (x, y) in ra.iter().zip(rb) {
                    worst_shift = worst_shift.max((x - y).abs());
                }
            }
        }
    }
    println!("  gauge shift theta -> theta + pi/N: worst probability change {worst_shift:.2e}");
    assert!(worst_shift < 1e-10);
    budget(t0, 30.0, "criterion 7");
}

#[test]
fn criterion_8_even_odd_barrier_ratio() {
    let t0 = Instant::now();
    let b4 = effective_potential(&yb(4, 1.005), PotentialMethod::Relaxed, 128)
        .unwrap()
        .barrier;
    let b3 = effective_potential(&yb(3, 1.005), PotentialMethod::Relaxed, 128)
        .unwrap()
        .barrier;
    let ratio = b4 / b3;
    println!("  barrier(N=4) / barrier(N=3) at rho = 1.005: {ratio:.1}");
    // spec floor 10; regression threshold frozen at 300 after the first
    // computed value of ~417
    assert!(ratio > 10.0);
    assert!(ratio > 300.0, "even/odd barrier ratio regressed: {ratio:.1}");
    budget(t0, 30.0, "criterion 8");
}

#[test]
fn criterion_9_cli_determinism() {
    let t0 = Instant::now();
    let trap = "[trap]\nn_ions = 3\nomega_z_hz = 1.5e6\nanisotropy = 1.001\nion_mass_u = 170.936\n";
    let specs: &[(&str, &str, &[&str])] = &[
        (
            "modes",
            "[modes]\nratio_min = 1.01\nratio_max = 1.04\nratio_steps = 3\neigenvectors = true\n",
            &["modes.csv", "modes_eigenvectors.csv"],
        ),
        (
            "potential",
            "[potential]\nmethod = both\ngrid_size = 128\nwith_wavefunctions = true\n",
            &["potential.csv"],
        ),
        (
            "tunnel",
            "[tunnel]\ngrid_size = 128\nresolution = 256\n",
            &["tunnel_summary.csv", "tunnel_wavefunctions.csv"],
        ),
        ("walk", "[walk]\ntheta_ab = pi/24\nt_max = 6\nt_steps = 48\n", &["walk.csv"]),
        (
            "interfere",
            "[interfere]\ntheta_ab_list = 0, pi/6, pi/2\nt_max = 3\nt_steps = 60\n",
            &["interfere.csv"],
        ),
        (
            "adiabat",
            "[adiabat]\nratio_start = 1.08\nratio_end = 1.02\nduration_s = 0.004\nsamples = 7\n",
            &["adiabat.csv"],
        ),
    ];
    let tmp = tempfile::tempdir().unwrap();
    for (cmd, section, files) in specs {
        let cfg = tmp.path().join(format!("{cmd}.ini"));
        std::fs::write(&cfg, format!("{trap}{section}")).unwrap();
        let mut passes: Vec<Vec<Vec<u8>>> = Vec::new();
        for pass in 0..2 {
            let dir = tmp.path().join(format!("{cmd}{pass}"));
            let out = std::process::Command::new(env!("CARGO_BIN_EXE_qtr"))
                .args([
                    *cmd,
                    "--config",
                    cfg.to_str().unwrap(),
                    "--out",
                    dir.to_str().unwrap(),
                ])
                .output()
                .unwrap();
            assert!(
                out.status.success(),
                "{cmd}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            passes.push(
                files
                    .iter()
                    .map(|f| std::fs::read(Path::new(&dir).join(f)).unwrap())
                    .collect(),
            );
        }
        for (k, f) in files.iter().enumerate() {
            assert_eq!(passes[0][k], passes[1][k], "{cmd}: {f} differs between runs");
        }
        println!("  {cmd}: byte-identical CSV across runs");
    }
    budget(t0, 120.0, "criterion 9");
}
