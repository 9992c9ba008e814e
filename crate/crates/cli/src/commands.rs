use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use clockback_core::bounds::{regime_classify, RegimeReport};
use clockback_core::clock::{self, ClockQuality};
use clockback_core::entanglement::{post_select, postselected_clock_overlap, ClockMomentumState};
use clockback_core::pointer::{
    default_grid, final_pointer_quadrature, pointer_amplitude, pointer_distribution_with, AmplitudeMethod,
    PointerWavefunction,
};
use clockback_core::propagator::{
    stable_step, stationary_transmission, transmitted_fraction, Grid, Propagator, ScatteringRun,
};
use clockback_core::scattering::{self, BarrierSpec};
use clockback_core::Complex64;

use crate::config::RunConfig;
use crate::output::{ensure_dir, json_string, write_csv, write_json};
use crate::{CliError, Command, Invocation};

pub fn dispatch(inv: &Invocation, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = &inv.config;
    let summary = match inv.command {
        Command::Figure3 => figure(cfg, "figure3", cfg.figure3_resolution, &cfg.figure3_alphas, inv.oracle)?,
        Command::Figure4 => figure(cfg, "figure4", cfg.figure4_resolution, &cfg.figure4_alphas, inv.oracle)?,
        Command::TransmissionSweep => transmission_sweep(cfg)?,
        Command::RegimeClassify => serde_json::to_value(regime(cfg)?).expect("serializable"),
        Command::ClockQuality => clock_quality(cfg)?,
        Command::Purity => purity(cfg)?,
        Command::Validate => {
            let report = validate(cfg)?;
            emit(out, &report)?;
            return match report.failures() {
                0 => Ok(()),
                n => Err(CliError::OracleFailure(n)),
            };
        }
        Command::Propagate => propagate(cfg, &inv.snapshots)?,
    };
    emit(out, &summary)
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    out.write_all(json_string(value).as_bytes())
        .map_err(|e| CliError::io("writing to stdout", e))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Quadrature tolerance used when the closed form is replaced by the
/// Fourier integral: well below the comparison tolerance.
fn quadrature_tolerance(cfg: &RunConfig) -> f64 {
    (cfg.tolerance_oracle * 1e-3).clamp(1e-12, 1e-10)
}

/// Pointer grid for one curve. The adaptive grid's span is placed using the
/// closed form; `pointer.grid_points` only changes the sampling density.
pub fn pointer_grid(cfg: &RunConfig, alpha: f64, delta: f64) -> Result<Vec<f64>, CliError> {
    let grid = default_grid(alpha, delta)?;
    if cfg.pointer_grid_points == 0 {
        return Ok(grid);
    }
    Ok(linspace(grid[0], grid[grid.len() - 1], cfg.pointer_grid_points))
}

pub fn pointer_curve(cfg: &RunConfig, alpha: f64, delta: f64, oracle: bool) -> Result<PointerWavefunction, CliError> {
    let grid = pointer_grid(cfg, alpha, delta)?;
    let method = if oracle {
        AmplitudeMethod::Quadrature {
            tol: quadrature_tolerance(cfg),
        }
    } else {
        AmplitudeMethod::ClosedForm
    };
    Ok(pointer_distribution_with(alpha, delta, &grid, method)?)
}

pub fn curve_file_name(figure: &str, alpha: f64) -> String {
    format!("{figure}_alpha{alpha}.csv")
}

#[derive(Debug, Serialize)]
struct CurveSummary {
    alpha: f64,
    file: String,
    mean: f64,
    std: f64,
    skewness: f64,
    norm: f64,
    edge_mass: f64,
}

fn figure(cfg: &RunConfig, name: &str, delta: f64, alphas: &[f64], oracle: bool) -> Result<serde_json::Value, CliError> {
    let dir = &cfg.output_dir;
    ensure_dir(dir)?;
    let mut curves = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let w = pointer_curve(cfg, alpha, delta, oracle)?;
        let scale = w.norm.sqrt();
        let rows = w.grid.iter().zip(&w.amplitudes).map(|(&p, a)| {
            let chi = a / scale;
            [p, chi.re, chi.im, chi.norm_sqr()]
        });
        let path = write_csv(dir, &curve_file_name(name, alpha), &["P", "re_chi", "im_chi", "abs2"], rows)?;
        curves.push(CurveSummary {
            alpha,
            file: file_name(&path),
            mean: w.moments.mean,
            std: w.moments.std,
            skewness: w.moments.skewness,
            norm: w.norm,
            edge_mass: w.edge_mass,
        });
    }
    let summary = json!({
        "figure": name,
        "resolution": delta,
        "method": if oracle { "quadrature" } else { "closed_form" },
        "curves": curves,
    });
    write_json(dir, &format!("{name}_summary.json"), &summary)?;
    Ok(summary)
}

pub const SWEEP_HEADER: [&str; 9] = ["k", "V", "X0", "re_T", "im_T", "abs2_T", "abs2_R", "unitarity_defect", "Q"];

/// Rows ordered by pointer coordinate, then width, then `k`.
pub fn sweep_rows(cfg: &RunConfig) -> Result<Vec<[f64; 9]>, CliError> {
    let ks = linspace(cfg.sweep_k_min, cfg.sweep_k_max, cfg.sweep_k_points);
    let mut rows = Vec::new();
    for &q in &cfg.sweep_pointer_coordinates {
        for &width in &cfg.sweep_widths {
            let barrier = if width > 0.0 {
                BarrierSpec::rectangular(cfg.barrier_lambda, width, q, cfg.barrier_eigenvalue, cfg.clock_mass)?
            } else {
                BarrierSpec::delta(cfg.barrier_lambda, q, cfg.barrier_eigenvalue, cfg.clock_mass)?
            };
            let height = if barrier.delta_strength() == 0.0 { 0.0 } else { barrier.height() };
            for a in scattering::transmission_sweep(&ks, &barrier)? {
                let t2 = a.transmission_probability();
                let r2 = a.reflection_probability();
                rows.push([
                    a.k,
                    height,
                    width,
                    a.transmission.re,
                    a.transmission.im,
                    t2,
                    r2,
                    (t2 + r2 - 1.0).abs(),
                    q,
                ]);
            }
        }
    }
    Ok(rows)
}

fn transmission_sweep(cfg: &RunConfig) -> Result<serde_json::Value, CliError> {
    ensure_dir(&cfg.output_dir)?;
    let rows = sweep_rows(cfg)?;
    let max_defect = rows.iter().map(|r| r[7]).fold(0.0, f64::max);
    let path = write_csv(&cfg.output_dir, "transmission_sweep.csv", &SWEEP_HEADER, &rows)?;
    Ok(json!({
        "file": file_name(&path),
        "rows": rows.len(),
        "max_unitarity_defect": max_defect,
    }))
}

pub fn regime(cfg: &RunConfig) -> Result<RegimeReport, CliError> {
    let scenario = cfg.scenario()?;
    Ok(regime_classify(&scenario, cfg.clock_mean_momentum)?)
}

#[derive(Debug, Serialize)]
struct ClockReport {
    mass: f64,
    mean_momentum: f64,
    position_spread: f64,
    momentum_spread: f64,
    kinetic_energy: f64,
    velocity: f64,
    quality: ClockQuality,
}

fn clock_quality(cfg: &RunConfig) -> Result<serde_json::Value, CliError> {
    let c = cfg.clock()?;
    let report = ClockReport {
        mass: c.mass(),
        mean_momentum: c.mean_momentum(),
        position_spread: c.position_spread(),
        momentum_spread: c.momentum_spread(),
        kinetic_energy: c.kinetic_energy(),
        velocity: c.velocity(),
        quality: clock::assess(&c),
    };
    Ok(serde_json::to_value(report).expect("serializable"))
}

/// `{re: [[..]], im: [[..]]}`, row-major.
fn split_matrix(rows: &[Vec<Complex64>]) -> serde_json::Value {
    let part = |f: fn(&Complex64) -> f64| rows.iter().map(|r| r.iter().map(f).collect::<Vec<_>>()).collect::<Vec<_>>();
    json!({ "re": part(|z| z.re), "im": part(|z| z.im) })
}

fn purity(cfg: &RunConfig) -> Result<serde_json::Value, CliError> {
    let system = cfg.system()?;
    let state = cfg.clock_state()?;
    let sel = post_select(&system, cfg.system_p0, &state, cfg.clock_mass)?;
    let gram_rows: Vec<Vec<Complex64>> = (0..sel.gram.nrows())
        .map(|r| (0..sel.gram.ncols()).map(|c| sel.gram[(r, c)]).collect())
        .collect();
    Ok(json!({
        "eigenvalues": system.eigenvalues(),
        "amplitudes": system.amplitudes().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "P0": cfg.system_p0,
        "clock_mean_k": state.mean_k(),
        "clock_sigma_k": state.sigma_k(),
        "branch": sel.branch,
        "gram": split_matrix(&gram_rows),
        "rho": split_matrix(&sel.rho.rows()),
        "purity": sel.purity,
        "branch_probability": sel.branch_probability,
    }))
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, error: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            error,
            tolerance,
            pass: error <= tolerance,
        }
    }

    fn failed(name: impl Into<String>, err: &CliError) -> Self {
        let mut c = Self::new(format!("{} ({err})", name.into()), f64::INFINITY, 0.0);
        c.pass = false;
        c
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }
}

/// Largest pointwise relative difference between closed form and quadrature
/// over the points where `|χ|` exceeds `1e-8` of its maximum.
pub fn closed_form_deviation(alpha: f64, delta: f64, grid: &[f64], quad_tol: f64) -> Result<f64, CliError> {
    let pairs: Vec<(Complex64, Complex64)> = grid
        .par_iter()
        .map(|&p| -> Result<_, CliError> {
            Ok((
                pointer_amplitude(p, alpha, delta)?,
                final_pointer_quadrature(p, alpha, delta, quad_tol)?,
            ))
        })
        .collect::<Result<_, _>>()?;
    let peak = pairs.iter().map(|(_, q)| q.norm()).fold(0.0, f64::max);
    Ok(pairs
        .iter()
        .filter(|(_, q)| q.norm() > 1e-8 * peak)
        .map(|(c, q)| (c - q).norm() / q.norm())
        .fold(0.0, f64::max))
}

fn check_closed_form(cfg: &RunConfig, delta: f64, alpha: f64) -> Result<Check, CliError> {
    let grid = default_grid(alpha, delta)?;
    let coarse: Vec<f64> = grid.iter().step_by(16).copied().collect();
    let dev = closed_form_deviation(alpha, delta, &coarse, quadrature_tolerance(cfg))?;
    Ok(Check::new(
        format!("pointer closed form vs quadrature (delta={delta}, alpha={alpha})"),
        dev,
        cfg.tolerance_oracle,
    ))
}

/// `|T_rect − T_delta|` at a width of `1e-8/k`; the rectangle converges
/// linearly in its width.
fn check_delta_limit(cfg: &RunConfig) -> Result<Check, CliError> {
    let (k, lambda, q, j, m) = (10.0, 3.0, 1.0, 1.0, cfg.clock_mass);
    let delta = scattering::amplitudes(k, &BarrierSpec::delta(lambda, q, j, m)?)?;
    let rect = scattering::amplitudes(k, &BarrierSpec::rectangular(lambda, 1e-8 / k, q, j, m)?)?;
    Ok(Check::new(
        "narrow rectangle vs delta transmission",
        (rect.transmission - delta.transmission).norm(),
        cfg.tolerance_oracle,
    ))
}

fn check_unitarity(cfg: &RunConfig) -> Result<Check, CliError> {
    let rows = sweep_rows(cfg)?;
    let worst = rows.iter().map(|r| r[7]).fold(0.0, f64::max);
    Ok(Check::new("sweep unitarity", worst, 1e-12))
}

/// Gram diagonal by quadrature against the closed-form damped norm.
fn check_overlap(cfg: &RunConfig) -> Result<Check, CliError> {
    let state = cfg.clock_state()?;
    let (p0, m) = (cfg.system_p0, cfg.clock_mass);
    let mut worst: f64 = 0.0;
    for &j in &cfg.system_eigenvalues {
        if j * p0 <= 0.0 {
            continue;
        }
        let quad = postselected_clock_overlap(j, j, p0, &state, m)?.value.re;
        let exact = state.damped_norm(2.0 * (p0 / j).abs() / m);
        worst = worst.max((quad - exact).abs() / exact);
    }
    Ok(Check::new("post-selected clock norm vs closed form", worst, 1e-8))
}

/// Small packet scattered off a rectangle, compared to the stationary
/// transmission averaged over its momentum distribution.
fn check_propagator() -> Result<Check, CliError> {
    let run = ScatteringRun {
        grid: Grid::new(1024, 100.0)?,
        mass: 1.0,
        mean_k: 2.0,
        sigma_k: 0.2,
        x0: -30.0,
        barrier_height: 1.8,
        barrier_width: 1.0,
        t_total: 30.0,
        sampling: Default::default(),
    };
    let outcome = run.run()?;
    let state = ClockMomentumState::new(run.mean_k, run.sigma_k)?;
    let exact = stationary_transmission(&state, &BarrierSpec::with_height(run.barrier_height, run.barrier_width, run.mass)?)?;
    Ok(Check::new(
        "propagator vs stationary transmission",
        (outcome.transmitted - exact).abs(),
        1e-3,
    ))
}

/// Free packet width against `σ√(1 + t²/(4M²σ⁴))`.
fn check_free_spreading() -> Result<Check, CliError> {
    let grid = Grid::new(1024, 60.0)?;
    let (m, sigma, t) = (1.0, 2.0, 10.0);
    let packet = clockback_core::propagator::Wavepacket::gaussian(grid, m, -10.0, sigma, 1.0)?;
    let zero = clockback_core::propagator::PotentialProfile::zero(&grid);
    let (dt, steps) = stable_step(&grid, m, &zero, t)?;
    let out = Propagator::new(grid, m, &zero, dt)?.evolve(&packet, steps)?;
    let clock = clockback_core::clock::ClockSpec::new(m, 1.0, sigma)?;
    let exact = clock::position_spread_at(&clock, t);
    Ok(Check::new("free packet spreading", (out.position_spread() - exact).abs() / exact, 1e-6))
}

pub fn validate(cfg: &RunConfig) -> Result<ValidationReport, CliError> {
    let mut checks = Vec::new();
    let mut record = |name: &str, r: Result<Check, CliError>| {
        checks.push(r.unwrap_or_else(|e| Check::failed(name, &e)));
    };
    for (delta, alpha) in [(10.0, 2.0), (10.0, 10.0), (5.0, 10.0), (5.0, 20.0), (5.0, 30.0)] {
        record("pointer closed form vs quadrature", check_closed_form(cfg, delta, alpha));
    }
    record("narrow rectangle vs delta transmission", check_delta_limit(cfg));
    record("sweep unitarity", check_unitarity(cfg));
    record("post-selected clock norm vs closed form", check_overlap(cfg));
    record("propagator vs stationary transmission", check_propagator());
    record("free packet spreading", check_free_spreading());
    let passed = checks.iter().all(|c| c.pass);
    Ok(ValidationReport { passed, checks })
}

#[derive(Debug, Serialize)]
struct SnapshotEntry {
    time: f64,
    file: String,
    norm: f64,
}

fn propagate(cfg: &RunConfig, snapshots: &[f64]) -> Result<serde_json::Value, CliError> {
    let run = cfg.scattering_run()?;
    let t_total = run.t_total;
    if let Some(&t) = snapshots.iter().find(|&&t| !(t >= 0.0 && t <= t_total)) {
        return Err(CliError::config(format!("snapshot time {t} outside [0, {t_total}]")));
    }
    ensure_dir(&cfg.output_dir)?;
    let potential = run.potential()?;
    let mut packet = run.initial_packet()?;
    let (dt, steps) = stable_step(&run.grid, run.mass, &potential, t_total)?;
    let propagator = Propagator::new(run.grid, run.mass, &potential, dt)?;
    let initial_energy = packet.energy(&potential);

    let mut order: Vec<(usize, f64)> = snapshots
        .iter()
        .map(|&t| (((t / dt).round() as usize).min(steps), t))
        .collect();
    order.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut done = 0;
    let mut written = Vec::with_capacity(order.len());
    for (step, requested) in order {
        propagator.evolve_in_place(&mut packet, step - done)?;
        done = step;
        let grid = packet.grid();
        let rows = packet
            .psi()
            .iter()
            .enumerate()
            .map(|(i, z)| [grid.x(i), z.re, z.im, z.norm_sqr()]);
        let path = write_csv(
            &cfg.output_dir,
            &format!("snapshot_t{requested}.csv"),
            &["x", "re_psi", "im_psi", "abs2"],
            rows,
        )?;
        written.push(SnapshotEntry {
            time: step as f64 * dt,
            file: file_name(&path),
            norm: packet.norm(),
        });
    }
    propagator.evolve_in_place(&mut packet, steps - done)?;

    let state = ClockMomentumState::new(run.mean_k, run.sigma_k)?;
    let stationary = if run.barrier_height == 0.0 {
        1.0
    } else {
        stationary_transmission(&state, &BarrierSpec::with_height(run.barrier_height, run.barrier_width, run.mass)?)?
    };
    let summary = json!({
        "transmitted": transmitted_fraction(&packet, 0.5 * run.barrier_width)?,
        "stationary_transmission": stationary,
        "dt": dt,
        "steps": steps,
        "t_total": t_total,
        "initial_energy": initial_energy,
        "final_energy": packet.energy(&potential),
        "final_norm": packet.norm(),
        "snapshots": written,
    });
    write_json(&cfg.output_dir, "propagate_summary.json", &summary)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_rows_are_ordered_and_unitary() {
        let cfg = RunConfig::default();
        let rows = sweep_rows(&cfg).unwrap();
        let per_block = cfg.sweep_k_points;
        assert_eq!(
            rows.len(),
            per_block * cfg.sweep_widths.len() * cfg.sweep_pointer_coordinates.len()
        );
        assert!(rows.iter().all(|r| r[7] <= 1e-12));
        assert_eq!(rows[0][0], cfg.sweep_k_min);
        assert_eq!(rows[per_block - 1][0], cfg.sweep_k_max);
        for r in rows.iter().filter(|r| r[8] == 0.0) {
            assert_eq!(r[5], 1.0);
        }
    }

    #[test]
    fn curve_names() {
        assert_eq!(curve_file_name("figure3", 2.0), "figure3_alpha2.csv");
        assert_eq!(curve_file_name("figure4", 2.5), "figure4_alpha2.5.csv");
    }

    #[test]
    fn closed_form_check_passes() {
        let cfg = RunConfig::default();
        assert!(check_closed_form(&cfg, 10.0, 2.0).unwrap().pass);
        assert!(check_delta_limit(&cfg).unwrap().pass);
        assert!(check_overlap(&cfg).unwrap().pass);
    }
}
