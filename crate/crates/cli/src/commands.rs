//! Command implementations: pipeline orchestration and file emission.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use qtr_core::tunnel::TunnelDoublet;
use qtr_core::walk::interference_scan;
use qtr_core::{
    adiabaticity, build_cycle_hamiltonian, effective_potential_from, find_equilibrium,
    scan_modes, solve_ring, tunneling_rate_with, walk_distribution, ABPhase, PotentialMethod,
    RampSample, RingMethod, RotorPotential, Seed, TrapConfig,
};

use crate::config::RunConfig;
use crate::output::{fmt_f64, Csv};
use crate::svg::{heat_map, line_plot, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Svg,
    Both,
}

impl Format {
    fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
    fn svg(self) -> bool {
        matches!(self, Format::Svg | Format::Both)
    }
}

pub struct Emit<'a> {
    pub out_dir: &'a Path,
    pub format: Format,
}

impl Emit<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn write_svg(&self, name: &str, content: &str) -> Result<()> {
        let p = self.path(name);
        std::fs::write(&p, content).with_context(|| format!("writing {}", p.display()))?;
        println!("wrote {}", p.display());
        Ok(())
    }

    fn write_csv(&self, name: &str, csv: &Csv) -> Result<()> {
        let p = self.path(name);
        csv.write(&p).with_context(|| format!("writing {}", p.display()))?;
        println!("wrote {}", p.display());
        Ok(())
    }
}

fn linspace(a: f64, b: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![a];
    }
    (0..steps)
        .map(|i| a + (b - a) * i as f64 / (steps - 1) as f64)
        .collect()
}

/// Time grid of `steps + 1` points from 0 to t_max inclusive.
fn time_grid(t_max: f64, steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|i| t_max * i as f64 / steps as f64)
        .collect()
}

pub fn cmd_modes(cfg: &RunConfig, seed: &Seed, emit: &Emit) -> Result<()> {
    let mc = cfg
        .modes
        .as_ref()
        .ok_or_else(|| crate::config::ConfigError("config has no [modes] section".into()))?;
    if mc.ratio_steps == 0 {
        bail!(crate::config::ConfigError("ratio_steps must be >= 1".into()));
    }
    if !(mc.ratio_min.is_finite() && mc.ratio_max.is_finite() && mc.ratio_min <= mc.ratio_max) {
        bail!(crate::config::ConfigError(
            "ratio_min must be <= ratio_max".into()
        ));
    }
    let grid = linspace(mc.ratio_min, mc.ratio_max, mc.ratio_steps);
    let scan = scan_modes(&cfg.trap, &grid, seed)?;

    if emit.format.csv() {
        let mut csv = Csv::new("ratio,mode_index,freq_over_omega_z,label");
        for (r, spec) in scan.spectra.iter().enumerate() {
            let ids = &scan.stable_ids[r];
            let mut order: Vec<usize> = (0..ids.len()).collect();
            order.sort_by_key(|&k| ids[k]);
            for k in order {
                csv.row(&[
                    fmt_f64(scan.ratios[r]),
                    ids[k].to_string(),
                    fmt_f64(spec.frequencies[k]),
                    spec.labels[k].to_string(),
                ]);
            }
        }
        emit.write_csv("modes.csv", &csv)?;

        if mc.eigenvectors {
            let mut evc = Csv::new("ratio,mode_index,ion_index,dx,dz");
            for (r, spec) in scan.spectra.iter().enumerate() {
                let ids = &scan.stable_ids[r];
                let mut order: Vec<usize> = (0..ids.len()).collect();
                order.sort_by_key(|&k| ids[k]);
                for k in order {
                    for (ion, d) in spec.eigenvectors[k].iter().enumerate() {
                        evc.row(&[
                            fmt_f64(scan.ratios[r]),
                            ids[k].to_string(),
                            ion.to_string(),
                            fmt_f64(d[0]),
                            fmt_f64(d[1]),
                        ]);
                    }
                }
            }
            emit.write_csv("modes_eigenvectors.csv", &evc)?;
        }
    }

    if emit.format.svg() {
        let n_modes = 2 * cfg.trap.n_ions;
        let mut series = Vec::new();
        for id in 0..n_modes {
            let points: Vec<(f64, f64)> = (0..scan.ratios.len())
                .filter_map(|r| scan.tracked_frequency(r, id).map(|f| (scan.ratios[r], f)))
                .collect();
            series.push(Series {
                label: format!("mode{id}"),
                points,
            });
        }
        emit.write_svg(
            "modes.svg",
            &line_plot("collective mode frequencies", "omega_x / omega_z", "omega / omega_z", &series),
        )?;
    }
    Ok(())
}

fn method_potentials(
    trap: &TrapConfig,
    seed: &Seed,
    method: &str,
    grid_size: usize,
) -> Result<Vec<(RotorPotential, &'static str)>> {
    let eq = find_equilibrium(trap, seed)?;
    let mut out = Vec::new();
    match method {
        "relaxed" => out.push((
            effective_potential_from(trap, &eq, PotentialMethod::Relaxed, grid_size)?,
            "relaxed",
        )),
        "rigid" => out.push((
            effective_potential_from(trap, &eq, PotentialMethod::Rigid, grid_size)?,
            "rigid",
        )),
        "both" => {
            out.push((
                effective_potential_from(trap, &eq, PotentialMethod::Relaxed, grid_size)?,
                "relaxed",
            ));
            out.push((
                effective_potential_from(trap, &eq, PotentialMethod::Rigid, grid_size)?,
                "rigid",
            ));
        }
        other => bail!(crate::config::ConfigError(format!(
            "method must be relaxed, rigid or both, got '{other}'"
        ))),
    }
    Ok(out)
}

pub fn cmd_potential(
    cfg: &RunConfig,
    seed: &Seed,
    with_wavefunctions: bool,
    emit: &Emit,
) -> Result<()> {
    let pc = cfg
        .potential
        .as_ref()
        .ok_or_else(|| crate::config::ConfigError("config has no [potential] section".into()))?;
    let with_wf = with_wavefunctions || pc.with_wavefunctions;
    if with_wf && pc.grid_size < 128 {
        bail!(crate::config::ConfigError(
            "with_wavefunctions needs grid_size >= 128 (the ring solve runs on the same grid)"
                .into()
        ));
    }
    let pots = method_potentials(&cfg.trap, seed, &pc.method, pc.grid_size)?;

    let doublet = if with_wf {
        Some(solve_ring(&pots[0].0, pc.grid_size, RingMethod::Fourier)?)
    } else {
        None
    };

    if emit.format.csv() {
        let mut comments = vec![format!("n_ions={}", cfg.trap.n_ions)];
        for (pot, name) in &pots {
            comments.push(format!("method={name}"));
            comments.push(format!("inertia_kg_m2={}", fmt_f64(pot.inertia)));
            comments.push(format!("barrier_joule={}", fmt_f64(pot.barrier)));
            comments.push(format!("minima_per_period={}", pot.minima_count));
        }
        comments.push(format!("config_sha256={}", cfg.sha256));
        let mut header = String::from("theta_rad");
        if pots.len() == 1 {
            header.push_str(",V_joule,V_dimensionless");
        } else {
            header.push_str(",V_relaxed_joule,V_relaxed_dimensionless,V_rigid_joule,V_rigid_dimensionless");
        }
        if doublet.is_some() {
            header.push_str(",psi_up,psi_down");
        }
        let mut csv = Csv::with_comments(&comments, &header);
        let grid = &pots[0].0.theta_grid;
        #[allow(clippy::needless_range_loop)]
        for i in 0..grid.len() {
            let mut row = vec![fmt_f64(grid[i])];
            for (pot, _) in &pots {
                row.push(fmt_f64(pot.values_joule[i]));
                row.push(fmt_f64(pot.values_dimensionless[i]));
            }
            if let Some(d) = &doublet {
                row.push(fmt_f64(d.psi_up[i]));
                row.push(fmt_f64(d.psi_down[i]));
            }
            csv.row(&row);
        }
        emit.write_csv("potential.csv", &csv)?;
    }

    if emit.format.svg() {
        let mut series: Vec<Series> = pots
            .iter()
            .map(|(pot, name)| Series {
                label: format!("V {name}"),
                points: pot
                    .theta_grid
                    .iter()
                    .zip(&pot.values_dimensionless)
                    .map(|(&t, &v)| (t, v))
                    .collect(),
            })
            .collect();
        if let Some(d) = &doublet {
            // overlay scaled to the potential range, display only
            let vspan = pots[0].0.barrier / cfg.trap.energy_unit();
            let vmin = pots[0]
                .0
                .values_dimensionless
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            let pmax = d.psi_up.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            for (psi, label) in [(&d.psi_up, "psi_up"), (&d.psi_down, "psi_down")] {
                series.push(Series {
                    label: label.into(),
                    points: d
                        .theta_grid
                        .iter()
                        .zip(psi.iter())
                        .map(|(&t, &p)| (t, vmin + (0.5 + 0.5 * p / pmax) * vspan))
                        .collect(),
                });
            }
        }
        emit.write_svg(
            "potential.svg",
            &line_plot("effective rotational potential", "theta (rad)", "V (dimensionless)", &series),
        )?;
    }
    Ok(())
}

fn doublet_row(d: &TunnelDoublet, method: &str) -> Vec<String> {
    vec![
        fmt_f64(d.e0),
        fmt_f64(d.e1),
        fmt_f64(d.splitting),
        fmt_f64(d.rate_hz),
        method.to_string(),
        d.resolution.to_string(),
    ]
}

fn print_doublet(d: &TunnelDoublet, method: &str) {
    println!("[{method}]");
    println!("  e0 = {} J", fmt_f64(d.e0));
    println!("  e1 = {} J", fmt_f64(d.e1));
    println!("  splitting = {} J", fmt_f64(d.splitting));
    println!("  rate (splitting/h)      = {} Hz", fmt_f64(d.rate_hz));
    println!("  rate (splitting/2hbar)  = {} rad/s", fmt_f64(d.rate_j));
    println!(
        "  rate (splitting/2hbar)  = {} Hz (per 2pi)",
        fmt_f64(d.rate_j / (2.0 * std::f64::consts::PI))
    );
    if !d.convergence.converged {
        println!(
            "  warning: splitting moved {} under halved resolution; increase resolution",
            fmt_f64(d.convergence.splitting_rel_change)
        );
    }
}

pub fn cmd_tunnel(cfg: &RunConfig, emit: &Emit) -> Result<()> {
    let tc = cfg
        .tunnel
        .as_ref()
        .ok_or_else(|| crate::config::ConfigError("config has no [tunnel] section".into()))?;
    let report = tunneling_rate_with(&cfg.trap, tc.grid_size, tc.resolution)?;

    println!(
        "tunneling doublet for N={} at anisotropy {}",
        cfg.trap.n_ions, cfg.trap.anisotropy
    );
    println!(
        "relaxed barrier = {} J, rigid barrier = {} J, inertia = {} kg m^2",
        fmt_f64(report.relaxed_potential.barrier),
        fmt_f64(report.rigid_potential.barrier),
        fmt_f64(report.relaxed_potential.inertia),
    );
    print_doublet(&report.relaxed, "relaxed");
    print_doublet(&report.rigid, "rigid");

    if emit.format.csv() {
        let mut csv = Csv::new("e0_J,e1_J,splitting_J,rate_hz,method,resolution");
        csv.row(&doublet_row(&report.relaxed, "relaxed"));
        csv.row(&doublet_row(&report.rigid, "rigid"));
        emit.write_csv("tunnel_summary.csv", &csv)?;

        let mut wf = Csv::new("theta_rad,psi0,psi1,psi_up,psi_down");
        let d = &report.relaxed;
        for i in 0..d.theta_grid.len() {
            wf.row(&[
                fmt_f64(d.theta_grid[i]),
                fmt_f64(d.psi0[i]),
                fmt_f64(d.psi1[i]),
                fmt_f64(d.psi_up[i]),
                fmt_f64(d.psi_down[i]),
            ]);
        }
        emit.write_csv("tunnel_wavefunctions.csv", &wf)?;
    }

    if emit.format.svg() {
        let d = &report.relaxed;
        let series: Vec<Series> = [
            ("psi0", &d.psi0),
            ("psi1", &d.psi1),
            ("psi_up", &d.psi_up),
            ("psi_down", &d.psi_down),
        ]
        .into_iter()
        .map(|(label, psi)| Series {
            label: label.into(),
            points: d.theta_grid.iter().zip(psi.iter()).map(|(&t, &p)| (t, p)).collect(),
        })
        .collect();
        emit.write_svg(
            "tunnel.svg",
            &line_plot("tunneling doublet wavefunctions", "theta (rad)", "psi", &series),
        )?;
    }
    Ok(())
}

pub fn cmd_walk(cfg: &RunConfig, emit: &Emit) -> Result<()> {
    let wc = cfg.walk.as_ref().ok_or_else(|| crate::config::ConfigError("config has no [walk] section".into()))?;
    if wc.t_steps == 0 {
        bail!(crate::config::ConfigError("t_steps must be >= 1".into()));
    }
    // normalized-time dynamics: probabilities depend only on j t and theta
    let h = build_cycle_hamiltonian(cfg.trap.n_ions, 1.0, ABPhase::new(wc.theta_ab)?)?;
    let grid = time_grid(wc.t_max, wc.t_steps);
    let table = walk_distribution(&h, wc.initial_site, &grid)?;

    if emit.format.csv() {
        let mut csv = Csv::new("t_normalized,site,probability");
        for (row, &t) in table.probabilities.iter().zip(&table.t_normalized) {
            for (site0, &p) in row.iter().enumerate() {
                csv.row(&[fmt_f64(t), (site0 + 1).to_string(), fmt_f64(p)]);
            }
        }
        emit.write_csv("walk.csv", &csv)?;
    }
    if emit.format.svg() {
        emit.write_svg(
            "walk.svg",
            &heat_map(
                "cycle walk site probabilities",
                "t (units of 1/j)",
                "site",
                &table.probabilities,
            ),
        )?;
    }
    Ok(())
}

pub fn cmd_interfere(cfg: &RunConfig, emit: &Emit) -> Result<()> {
    let ic = cfg
        .interfere
        .as_ref()
        .ok_or_else(|| crate::config::ConfigError("config has no [interfere] section".into()))?;
    if ic.t_steps == 0 {
        bail!(crate::config::ConfigError("t_steps must be >= 1".into()));
    }
    let thetas = ic
        .theta_ab_list
        .iter()
        .map(|&t| ABPhase::new(t))
        .collect::<qtr_core::Result<Vec<_>>>()?;
    let grid = time_grid(ic.t_max, ic.t_steps);
    let rows = interference_scan(1.0, &thetas, &grid)?;

    if emit.format.csv() {
        let mut csv = Csv::new("t_normalized,theta_ab,p_up");
        for r in &rows {
            csv.row(&[fmt_f64(r.t_normalized), fmt_f64(r.theta_ab), fmt_f64(r.p_up)]);
        }
        emit.write_csv("interfere.csv", &csv)?;
    }
    if emit.format.svg() {
        let mut series = Vec::new();
        for th in &thetas {
            let points: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.theta_ab == th.radians())
                .map(|r| (r.t_normalized, r.p_up))
                .collect();
            series.push(Series {
                label: format!("theta={:.4}", th.radians()),
                points,
            });
        }
        emit.write_svg(
            "interfere.svg",
            &line_plot("two-level AB interference", "t (units of 1/j)", "P_up", &series),
        )?;
    }
    Ok(())
}

pub fn cmd_adiabat(cfg: &RunConfig, seed: &Seed, emit: &Emit) -> Result<()> {
    let ac = cfg
        .adiabat
        .as_ref()
        .ok_or_else(|| crate::config::ConfigError("config has no [adiabat] section".into()))?;
    if ac.samples < 2 {
        bail!(crate::config::ConfigError("samples must be >= 2".into()));
    }
    if !(ac.duration_s.is_finite() && ac.duration_s > 0.0) {
        bail!(crate::config::ConfigError(
            "duration_s must be positive".into()
        ));
    }
    let ramp: Vec<RampSample> = (0..ac.samples)
        .map(|i| {
            let f = i as f64 / (ac.samples - 1) as f64;
            RampSample {
                time: ac.duration_s * f,
                omega_x: cfg.trap.omega_z * (ac.ratio_start + (ac.ratio_end - ac.ratio_start) * f),
            }
        })
        .collect();
    let trace = adiabaticity(&cfg.trap, &ramp, seed)?;

    println!("eta_max = {}", fmt_f64(trace.eta_max));

    if emit.format.csv() {
        let mut csv = Csv::new("t_s,omega_x_rad_s,omega_rot_rad_s,eta");
        for s in &trace.samples {
            csv.row(&[
                fmt_f64(s.time),
                fmt_f64(s.omega_x),
                fmt_f64(s.omega_rot),
                fmt_f64(s.eta),
            ]);
        }
        emit.write_csv("adiabat.csv", &csv)?;
    }
    if emit.format.svg() {
        let series = vec![Series {
            label: "eta".into(),
            points: trace.samples.iter().map(|s| (s.time, s.eta)).collect(),
        }];
        emit.write_svg(
            "adiabat.svg",
            &line_plot("ramp adiabaticity", "t (s)", "|d omega_rot/dt| / omega_rot^2", &series),
        )?;
    }
    Ok(())
}
