//! Run configuration: flat `key = value` text grouped under `[section]`
//! headers. Every key is addressed as `section.key` and may be overridden
//! on the command line with `--section.key=value`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clockback_core::bounds::MeasurementScenario;
use clockback_core::clock::ClockSpec;
use clockback_core::entanglement::{ClockMomentumState, SystemSpec};
use clockback_core::pointer::PointerSpec;
use clockback_core::propagator::{BarrierSampling, Grid, ScatteringRun};
use clockback_core::scattering::BarrierSpec;
use clockback_core::Complex64;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierMode {
    Rectangular,
    Delta,
}

impl FromStr for BarrierMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rect" | "rectangular" => Ok(Self::Rectangular),
            "delta" => Ok(Self::Delta),
            _ => Err(format!("expected `rect` or `delta`, got `{s}`")),
        }
    }
}

fn parse_sampling(s: &str) -> Result<BarrierSampling, String> {
    match s {
        "spectral" => Ok(BarrierSampling::Spectral),
        "cell-average" | "cell_average" => Ok(BarrierSampling::CellAverage),
        _ => Err(format!("expected `spectral` or `cell-average`, got `{s}`")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub clock_mass: f64,
    pub clock_mean_momentum: f64,
    pub clock_position_spread: f64,

    pub barrier_mode: BarrierMode,
    pub barrier_lambda: f64,
    pub barrier_width: f64,
    pub barrier_pointer_coordinate: f64,
    pub barrier_eigenvalue: f64,

    pub pointer_resolution: f64,
    /// Zero selects the adaptive default grid.
    pub pointer_grid_points: usize,

    pub scenario_mean_j: f64,
    pub scenario_delta_j: f64,
    pub scenario_omega: f64,
    pub scenario_ground_energy: f64,

    pub system_eigenvalues: Vec<f64>,
    pub system_amplitudes: Vec<Complex64>,
    pub system_p0: f64,

    pub figure3_resolution: f64,
    pub figure3_alphas: Vec<f64>,
    pub figure4_resolution: f64,
    pub figure4_alphas: Vec<f64>,

    pub sweep_k_min: f64,
    pub sweep_k_max: f64,
    pub sweep_k_points: usize,
    pub sweep_widths: Vec<f64>,
    pub sweep_pointer_coordinates: Vec<f64>,

    pub propagate_grid_points: usize,
    pub propagate_half_width: f64,
    pub propagate_mean_k: f64,
    pub propagate_sigma_k: f64,
    pub propagate_x0: f64,
    pub propagate_t_total: f64,
    pub propagate_height: f64,
    pub propagate_width: f64,
    pub propagate_sampling: BarrierSampling,

    pub tolerance_oracle: f64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            clock_mass: 1.0,
            clock_mean_momentum: 10.0,
            clock_position_spread: 5.0,
            barrier_mode: BarrierMode::Rectangular,
            barrier_lambda: 20.0,
            barrier_width: 1.0,
            barrier_pointer_coordinate: 0.0,
            barrier_eigenvalue: 1.0,
            pointer_resolution: 10.0,
            pointer_grid_points: 0,
            scenario_mean_j: 1.0,
            scenario_delta_j: 1.0,
            scenario_omega: 0.0,
            scenario_ground_energy: 0.0,
            system_eigenvalues: vec![1.0, 2.0],
            system_amplitudes: vec![Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0)],
            system_p0: 1.0,
            figure3_resolution: 10.0,
            figure3_alphas: vec![2.0, 10.0],
            figure4_resolution: 5.0,
            figure4_alphas: vec![10.0, 20.0, 30.0],
            sweep_k_min: 0.5,
            sweep_k_max: 5.0,
            sweep_k_points: 10,
            sweep_widths: vec![1.0, 0.1, 0.01, 0.0],
            sweep_pointer_coordinates: vec![0.0, 0.1],
            propagate_grid_points: 2048,
            propagate_half_width: 160.0,
            propagate_mean_k: 2.0,
            propagate_sigma_k: 0.1,
            propagate_x0: -60.0,
            propagate_t_total: 60.0,
            propagate_height: 1.8,
            propagate_width: 1.0,
            propagate_sampling: BarrierSampling::Spectral,
            tolerance_oracle: 1e-6,
            output_dir: PathBuf::from("out"),
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    v.parse::<f64>()
        .map_err(|_| CliError::config(format!("{key}: `{v}` is not a number")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize, CliError> {
    v.parse::<usize>()
        .map_err(|_| CliError::config(format!("{key}: `{v}` is not a non-negative integer")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>, CliError> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| CliError::config(format!("{key}: cannot parse list entry `{s}`")))
        })
        .collect()
}

fn parse_with<T>(key: &str, v: &str, f: impl Fn(&str) -> Result<T, String>) -> Result<T, CliError> {
    f(v).map_err(|e| CliError::config(format!("{key}: {e}")))
}

impl RunConfig {
    /// Every recognised `section.key`.
    pub const KEYS: &'static [&'static str] = &[
        "clock.mass",
        "clock.mean_momentum",
        "clock.position_spread",
        "barrier.mode",
        "barrier.lambda",
        "barrier.width",
        "barrier.pointer_coordinate",
        "barrier.eigenvalue",
        "pointer.resolution",
        "pointer.grid_points",
        "scenario.mean_j",
        "scenario.delta_j",
        "scenario.omega",
        "scenario.ground_energy",
        "system.eigenvalues",
        "system.amplitudes",
        "system.p0",
        "figure3.resolution",
        "figure3.alphas",
        "figure4.resolution",
        "figure4.alphas",
        "sweep.k_min",
        "sweep.k_max",
        "sweep.k_points",
        "sweep.widths",
        "sweep.pointer_coordinates",
        "propagate.grid_points",
        "propagate.half_width",
        "propagate.mean_k",
        "propagate.sigma_k",
        "propagate.x0",
        "propagate.t_total",
        "propagate.height",
        "propagate.width",
        "propagate.sampling",
        "tolerance.oracle",
        "output.dir",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let v = value.trim();
        match key {
            "clock.mass" => self.clock_mass = parse_f64(key, v)?,
            "clock.mean_momentum" => self.clock_mean_momentum = parse_f64(key, v)?,
            "clock.position_spread" => self.clock_position_spread = parse_f64(key, v)?,
            "barrier.mode" => self.barrier_mode = parse_with(key, v, BarrierMode::from_str)?,
            "barrier.lambda" => self.barrier_lambda = parse_f64(key, v)?,
            "barrier.width" => self.barrier_width = parse_f64(key, v)?,
            "barrier.pointer_coordinate" => self.barrier_pointer_coordinate = parse_f64(key, v)?,
            "barrier.eigenvalue" => self.barrier_eigenvalue = parse_f64(key, v)?,
            "pointer.resolution" => self.pointer_resolution = parse_f64(key, v)?,
            "pointer.grid_points" => self.pointer_grid_points = parse_usize(key, v)?,
            "scenario.mean_j" => self.scenario_mean_j = parse_f64(key, v)?,
            "scenario.delta_j" => self.scenario_delta_j = parse_f64(key, v)?,
            "scenario.omega" => self.scenario_omega = parse_f64(key, v)?,
            "scenario.ground_energy" => self.scenario_ground_energy = parse_f64(key, v)?,
            "system.eigenvalues" => self.system_eigenvalues = parse_list(key, v)?,
            "system.amplitudes" => self.system_amplitudes = parse_list(key, v)?,
            "system.p0" => self.system_p0 = parse_f64(key, v)?,
            "figure3.resolution" => self.figure3_resolution = parse_f64(key, v)?,
            "figure3.alphas" => self.figure3_alphas = parse_list(key, v)?,
            "figure4.resolution" => self.figure4_resolution = parse_f64(key, v)?,
            "figure4.alphas" => self.figure4_alphas = parse_list(key, v)?,
            "sweep.k_min" => self.sweep_k_min = parse_f64(key, v)?,
            "sweep.k_max" => self.sweep_k_max = parse_f64(key, v)?,
            "sweep.k_points" => self.sweep_k_points = parse_usize(key, v)?,
            "sweep.widths" => self.sweep_widths = parse_list(key, v)?,
            "sweep.pointer_coordinates" => self.sweep_pointer_coordinates = parse_list(key, v)?,
            "propagate.grid_points" => self.propagate_grid_points = parse_usize(key, v)?,
            "propagate.half_width" => self.propagate_half_width = parse_f64(key, v)?,
            "propagate.mean_k" => self.propagate_mean_k = parse_f64(key, v)?,
            "propagate.sigma_k" => self.propagate_sigma_k = parse_f64(key, v)?,
            "propagate.x0" => self.propagate_x0 = parse_f64(key, v)?,
            "propagate.t_total" => self.propagate_t_total = parse_f64(key, v)?,
            "propagate.height" => self.propagate_height = parse_f64(key, v)?,
            "propagate.width" => self.propagate_width = parse_f64(key, v)?,
            "propagate.sampling" => self.propagate_sampling = parse_with(key, v, parse_sampling)?,
            "tolerance.oracle" => self.tolerance_oracle = parse_f64(key, v)?,
            "output.dir" => self.output_dir = PathBuf::from(v),
            _ => return Err(CliError::config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies the assignments in `text` on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        let mut section = String::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| CliError::config(format!("line {}: unterminated section header", n + 1)))?;
                section = name.trim().to_string();
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("line {}: expected `key = value`", n + 1)))?;
            let k = k.trim();
            let key = if section.is_empty() { k.to_string() } else { format!("{section}.{k}") };
            self.set(&key, v).map_err(|e| match e {
                CliError::Config(msg) => CliError::config(format!("line {}: {msg}", n + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    /// Renders the configuration in the file format; parsing the result
    /// gives back an equal configuration.
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",");
        let mode = match self.barrier_mode {
            BarrierMode::Rectangular => "rect",
            BarrierMode::Delta => "delta",
        };
        let sampling = match self.propagate_sampling {
            BarrierSampling::Spectral => "spectral",
            BarrierSampling::CellAverage => "cell-average",
        };
        let amps = self
            .system_amplitudes
            .iter()
            .map(|c| format!("{:e}{:+e}i", c.re, c.im))
            .collect::<Vec<_>>()
            .join(",");
        let mut s = String::new();
        let _ = writeln!(s, "[clock]");
        let _ = writeln!(s, "mass = {:e}", self.clock_mass);
        let _ = writeln!(s, "mean_momentum = {:e}", self.clock_mean_momentum);
        let _ = writeln!(s, "position_spread = {:e}", self.clock_position_spread);
        let _ = writeln!(s, "\n[barrier]");
        let _ = writeln!(s, "mode = {mode}");
        let _ = writeln!(s, "lambda = {:e}", self.barrier_lambda);
        let _ = writeln!(s, "width = {:e}", self.barrier_width);
        let _ = writeln!(s, "pointer_coordinate = {:e}", self.barrier_pointer_coordinate);
        let _ = writeln!(s, "eigenvalue = {:e}", self.barrier_eigenvalue);
        let _ = writeln!(s, "\n[pointer]");
        let _ = writeln!(s, "resolution = {:e}", self.pointer_resolution);
        let _ = writeln!(s, "grid_points = {}", self.pointer_grid_points);
        let _ = writeln!(s, "\n[scenario]");
        let _ = writeln!(s, "mean_j = {:e}", self.scenario_mean_j);
        let _ = writeln!(s, "delta_j = {:e}", self.scenario_delta_j);
        let _ = writeln!(s, "omega = {:e}", self.scenario_omega);
        let _ = writeln!(s, "ground_energy = {:e}", self.scenario_ground_energy);
        let _ = writeln!(s, "\n[system]");
        let _ = writeln!(s, "eigenvalues = {}", join(&self.system_eigenvalues));
        let _ = writeln!(s, "amplitudes = {amps}");
        let _ = writeln!(s, "p0 = {:e}", self.system_p0);
        let _ = writeln!(s, "\n[figure3]");
        let _ = writeln!(s, "resolution = {:e}", self.figure3_resolution);
        let _ = writeln!(s, "alphas = {}", join(&self.figure3_alphas));
        let _ = writeln!(s, "\n[figure4]");
        let _ = writeln!(s, "resolution = {:e}", self.figure4_resolution);
        let _ = writeln!(s, "alphas = {}", join(&self.figure4_alphas));
        let _ = writeln!(s, "\n[sweep]");
        let _ = writeln!(s, "k_min = {:e}", self.sweep_k_min);
        let _ = writeln!(s, "k_max = {:e}", self.sweep_k_max);
        let _ = writeln!(s, "k_points = {}", self.sweep_k_points);
        let _ = writeln!(s, "widths = {}", join(&self.sweep_widths));
        let _ = writeln!(s, "pointer_coordinates = {}", join(&self.sweep_pointer_coordinates));
        let _ = writeln!(s, "\n[propagate]");
        let _ = writeln!(s, "grid_points = {}", self.propagate_grid_points);
        let _ = writeln!(s, "half_width = {:e}", self.propagate_half_width);
        let _ = writeln!(s, "mean_k = {:e}", self.propagate_mean_k);
        let _ = writeln!(s, "sigma_k = {:e}", self.propagate_sigma_k);
        let _ = writeln!(s, "x0 = {:e}", self.propagate_x0);
        let _ = writeln!(s, "t_total = {:e}", self.propagate_t_total);
        let _ = writeln!(s, "height = {:e}", self.propagate_height);
        let _ = writeln!(s, "width = {:e}", self.propagate_width);
        let _ = writeln!(s, "sampling = {sampling}");
        let _ = writeln!(s, "\n[tolerance]");
        let _ = writeln!(s, "oracle = {:e}", self.tolerance_oracle);
        let _ = writeln!(s, "\n[output]");
        let _ = writeln!(s, "dir = {}", self.output_dir.display());
        s
    }

    pub fn clock(&self) -> Result<ClockSpec, CliError> {
        Ok(ClockSpec::new(self.clock_mass, self.clock_mean_momentum, self.clock_position_spread)?)
    }

    /// Clock momentum distribution: mean `⟨P⟩`, spread `1/(2ΔX)`.
    pub fn clock_state(&self) -> Result<ClockMomentumState, CliError> {
        let clock = self.clock()?;
        Ok(ClockMomentumState::new(clock.mean_momentum(), clock.momentum_spread())?)
    }

    pub fn barrier(&self) -> Result<BarrierSpec, CliError> {
        let b = match self.barrier_mode {
            BarrierMode::Rectangular => BarrierSpec::rectangular(
                self.barrier_lambda,
                self.barrier_width,
                self.barrier_pointer_coordinate,
                self.barrier_eigenvalue,
                self.clock_mass,
            ),
            BarrierMode::Delta => BarrierSpec::delta(
                self.barrier_lambda,
                self.barrier_pointer_coordinate,
                self.barrier_eigenvalue,
                self.clock_mass,
            ),
        };
        Ok(b?)
    }

    pub fn pointer(&self) -> Result<PointerSpec, CliError> {
        Ok(PointerSpec::new(self.pointer_resolution)?)
    }

    pub fn scenario(&self) -> Result<MeasurementScenario, CliError> {
        Ok(MeasurementScenario::new(
            self.clock()?,
            self.barrier()?,
            self.pointer()?,
            self.scenario_mean_j,
            self.scenario_delta_j,
            self.scenario_omega,
            self.scenario_ground_energy,
        )?)
    }

    pub fn system(&self) -> Result<SystemSpec, CliError> {
        Ok(SystemSpec::new(self.system_eigenvalues.clone(), self.system_amplitudes.clone())?)
    }

    pub fn scattering_run(&self) -> Result<ScatteringRun, CliError> {
        Ok(ScatteringRun {
            grid: Grid::new(self.propagate_grid_points, self.propagate_half_width)?,
            mass: self.clock_mass,
            mean_k: self.propagate_mean_k,
            sigma_k: self.propagate_sigma_k,
            x0: self.propagate_x0,
            barrier_height: self.propagate_height,
            barrier_width: self.propagate_width,
            t_total: self.propagate_t_total,
            sampling: self.propagate_sampling,
        })
    }

    /// Re-validates every section that is checked by a core constructor, plus
    /// the plain ranges the commands rely on. The clock momentum state is left
    /// to `purity`, the only command that needs `⟨P⟩ ≥ 5ΔP`.
    pub fn validate(&self) -> Result<(), CliError> {
        self.clock()?;
        self.barrier()?;
        self.pointer()?;
        self.scenario()?;
        self.system()?;
        let run = self.scattering_run()?;
        run.initial_packet()?;
        run.potential()?;
        for (name, d) in [("figure3.resolution", self.figure3_resolution), ("figure4.resolution", self.figure4_resolution)] {
            PointerSpec::new(d).map_err(|e| CliError::config(format!("{name}: {e}")))?;
        }
        for (name, list) in [("figure3.alphas", &self.figure3_alphas), ("figure4.alphas", &self.figure4_alphas)] {
            if list.is_empty() || list.iter().any(|a| !a.is_finite()) {
                return Err(CliError::config(format!("{name}: needs at least one finite value")));
            }
        }
        if !(self.sweep_k_min > 0.0 && self.sweep_k_max >= self.sweep_k_min && self.sweep_k_max.is_finite()) {
            return Err(CliError::config("sweep: need 0 < k_min <= k_max"));
        }
        if self.sweep_k_points == 0 {
            return Err(CliError::config("sweep.k_points: must be positive"));
        }
        if self.sweep_widths.is_empty() || self.sweep_widths.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(CliError::config("sweep.widths: needs finite, non-negative values"));
        }
        if self.sweep_pointer_coordinates.is_empty() || self.sweep_pointer_coordinates.iter().any(|q| !q.is_finite()) {
            return Err(CliError::config("sweep.pointer_coordinates: needs finite values"));
        }
        if self.pointer_grid_points != 0 && self.pointer_grid_points < 3 {
            return Err(CliError::config("pointer.grid_points: 0 (adaptive) or at least 3"));
        }
        if !(self.propagate_t_total.is_finite() && self.propagate_t_total > 0.0) {
            return Err(CliError::config("propagate.t_total: must be positive"));
        }
        if !(self.tolerance_oracle.is_finite() && self.tolerance_oracle > 0.0) {
            return Err(CliError::config("tolerance.oracle: must be positive"));
        }
        Ok(())
    }
}
