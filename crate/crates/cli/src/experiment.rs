//! Experiment orchestration: builds core objects from the validated config,
//! runs the requested mode, and writes the artifacts (CSV tables, JSON
//! reports, binary snapshots, manifest).

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use dirac1d_core::characteristic::{scalar_step_rk4, ScatteringProfile};
use dirac1d_core::diagnostics::{check_gronwall, fit_nonlinear_decay};
use dirac1d_core::evolve::{run, EvolveError, InitialData, SimConfig, Trajectory};
use dirac1d_core::field::LineGrid;
use dirac1d_core::io::{write_profile, write_spinor};
use dirac1d_core::linpde::measure_decay;
use dirac1d_core::scattering::{
    find_eigenvalues, sample_transmission_grid, SearchBox, SearchOptions, SpectralReport,
};
use dirac1d_core::{Complex, SpinorField};

use crate::config::{ExperimentConfig, InitialConfig, Mode};

/// Failure classification mapped to process exit codes: usage errors exit 1,
/// runtime failures on validated input exit 2.
#[derive(Debug)]
pub enum RunFailure {
    Usage(String),
    Runtime(String),
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunFailure::Usage(m) => write!(f, "usage error: {m}"),
            RunFailure::Runtime(m) => write!(f, "runtime failure: {m}"),
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> RunFailure {
    RunFailure::Usage(e.to_string())
}

fn runtime<E: std::fmt::Display>(e: E) -> RunFailure {
    RunFailure::Runtime(e.to_string())
}

struct ArtifactSink {
    dir: PathBuf,
    names: Vec<String>,
}

impl ArtifactSink {
    fn new(dir: &Path) -> Result<Self, RunFailure> {
        fs::create_dir_all(dir)
            .map_err(|e| usage(format!("cannot create output directory {dir:?}: {e}")))?;
        Ok(Self { dir: dir.to_path_buf(), names: Vec::new() })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.names.push(name.to_string());
        self.dir.join(name)
    }

    fn write_text(&mut self, name: &str, text: &str) -> Result<(), RunFailure> {
        let path = self.path(name);
        fs::write(&path, text).map_err(|e| usage(format!("cannot write {path:?}: {e}")))
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), RunFailure> {
        let text = serde_json::to_string_pretty(value).map_err(runtime)?;
        self.write_text(name, &(text + "\n"))
    }
}

/// Runs one experiment and writes all artifacts plus the manifest. The
/// manifest is written on failure too, carrying the error.
pub fn run_experiment(
    config: &ExperimentConfig,
    mode: Mode,
    output_dir: &Path,
) -> Result<(), RunFailure> {
    let started = Instant::now();
    let mut sink = ArtifactSink::new(output_dir)?;
    let result = dispatch(config, mode, &mut sink);
    let manifest = json!({
        "mode": mode.as_str(),
        "version": env!("CARGO_PKG_VERSION"),
        "status": if result.is_ok() { "ok" } else { "error" },
        "error": result.as_ref().err().map(|e| e.to_string()),
        "wall_time_s": started.elapsed().as_secs_f64(),
        "artifacts": sink.names.clone(),
        "config": config,
    });
    let manifest_path = output_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(runtime)?;
    fs::write(&manifest_path, text + "\n")
        .map_err(|e| usage(format!("cannot write manifest: {e}")))?;
    result
}

fn dispatch(
    config: &ExperimentConfig,
    mode: Mode,
    sink: &mut ArtifactSink,
) -> Result<(), RunFailure> {
    match mode {
        Mode::Simulate => simulate(config, sink),
        Mode::Decay => decay(config, sink),
        Mode::Scatter => scatter(config, sink),
        Mode::CheckBounds => check_bounds(config, sink),
        Mode::ScalarEvolve => scalar_evolve(config, sink),
    }
}

fn build_sim_config(config: &ExperimentConfig) -> Result<SimConfig<f64>, RunFailure> {
    let potential = config
        .potential
        .as_ref()
        .ok_or_else(|| usage("missing potential block"))?
        .build()
        .map_err(usage)?;
    let grid = config.grid.ok_or_else(|| usage("missing grid block"))?;
    let time = config.time.ok_or_else(|| usage("missing time block"))?;
    let initial = match config.initial.as_ref().ok_or_else(|| usage("missing initial block"))? {
        InitialConfig::Gaussian { amplitude, width, center, phase_k } => InitialData::Gaussian {
            amplitude: *amplitude,
            width: *width,
            center: *center,
            phase_k: *phase_k,
        },
        InitialConfig::Sech { amplitude, width } => {
            InitialData::Sech { amplitude: *amplitude, width: *width }
        }
        InitialConfig::FromFile { path } => InitialData::Snapshot(PathBuf::from(path)),
    };
    Ok(SimConfig {
        potential,
        initial,
        half_width: grid.half_width,
        n: grid.points,
        dt: time.dt,
        t_final: time.t_final,
        cadence: time.cadence,
        h1_ceiling: config.limits.and_then(|l| l.h1_ceiling),
        snapshot_times: config.snapshot_times.clone().unwrap_or_default(),
    })
}

fn run_trajectory(config: &ExperimentConfig) -> Result<Trajectory<f64>, RunFailure> {
    let sim = build_sim_config(config)?;
    run(&sim).map_err(|e| match e {
        EvolveError::BlowUp { .. } => runtime(e),
        EvolveError::BadConfig(_) | EvolveError::Grid(_) => usage(e),
        EvolveError::Snapshot(_) => usage(e),
    })
}

fn trajectory_csv(trajectory: &Trajectory<f64>) -> String {
    let mut text = String::from("t,Q,P,H,lp2,lp4,lp6,sup\n");
    for row in &trajectory.rows {
        let c = &row.conserved;
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.t, c.charge, c.momentum, c.hamiltonian, row.lp2, row.lp4, row.lp6, row.sup
        ));
    }
    text
}

fn write_trajectory_outputs(
    config: &ExperimentConfig,
    trajectory: &Trajectory<f64>,
    sink: &mut ArtifactSink,
) -> Result<(), RunFailure> {
    sink.write_text("trajectory.csv", &trajectory_csv(trajectory))?;
    for snap in &trajectory.snapshots {
        let name = format!("snapshot_t{}.bin", snap.time());
        let path = sink.path(&name);
        write_spinor(&path, snap).map_err(runtime)?;
    }
    if config.save_final {
        let path = sink.path("final.bin");
        write_spinor(&path, &trajectory.final_state).map_err(runtime)?;
    }
    Ok(())
}

fn simulate(config: &ExperimentConfig, sink: &mut ArtifactSink) -> Result<(), RunFailure> {
    let trajectory = run_trajectory(config)?;
    write_trajectory_outputs(config, &trajectory, sink)
}

fn build_initial_field(config: &ExperimentConfig) -> Result<SpinorField<f64>, RunFailure> {
    let grid = config.grid.ok_or_else(|| usage("missing grid block"))?;
    let initial = match config.initial.as_ref().ok_or_else(|| usage("missing initial block"))? {
        InitialConfig::Gaussian { amplitude, width, center, phase_k } => InitialData::Gaussian {
            amplitude: *amplitude,
            width: *width,
            center: *center,
            phase_k: *phase_k,
        },
        InitialConfig::Sech { amplitude, width } => {
            InitialData::Sech { amplitude: *amplitude, width: *width }
        }
        InitialConfig::FromFile { path } => InitialData::Snapshot(PathBuf::from(path)),
    };
    initial.build(grid.points, grid.half_width).map_err(usage)
}

fn decay(config: &ExperimentConfig, sink: &mut ArtifactSink) -> Result<(), RunFailure> {
    let field = build_initial_field(config)?;
    let window = config.decay.unwrap_or_default();
    let times: Vec<f64> = (0..window.samples)
        .map(|j| {
            window.t_min
                * (window.t_max / window.t_min).powf(j as f64 / (window.samples - 1) as f64)
        })
        .collect();
    let report = measure_decay(&field, &times).map_err(runtime)?;

    let mut csv = String::from("t,sup_norm,l2_norm\n");
    for s in &report.samples {
        csv.push_str(&format!("{},{},{}\n", s.t, s.sup_norm, s.l2_norm));
    }
    sink.write_text("decay.csv", &csv)?;
    sink.write_json(
        "summary.json",
        &json!({
            "slope": report.sup_fit.slope,
            "stderr": report.sup_fit.stderr,
            "window": [report.window.0, report.window.1],
        }),
    )
}

fn build_profile(config: &ExperimentConfig) -> Result<ScatteringProfile<f64>, RunFailure> {
    let grid_cfg = config.grid.ok_or_else(|| usage("missing grid block"))?;
    let grid = LineGrid::symmetric(grid_cfg.half_width, grid_cfg.points).map_err(usage)?;
    match config.initial.as_ref().ok_or_else(|| usage("missing initial block"))? {
        InitialConfig::Gaussian { amplitude, width, center, phase_k } => {
            ScatteringProfile::from_fn(grid, |xi| {
                let arg = -(xi - center) * (xi - center) / (2.0 * width * width);
                Complex::from_polar(amplitude * arg.exp(), phase_k * xi)
            })
            .map_err(usage)
        }
        InitialConfig::Sech { amplitude, width } => ScatteringProfile::from_fn(grid, |xi| {
            Complex::new(amplitude / (xi / width).cosh(), 0.0)
        })
        .map_err(usage),
        InitialConfig::FromFile { path } => {
            let (profile, _tau) = dirac1d_core::io::read_profile(Path::new(path)).map_err(usage)?;
            Ok(profile)
        }
    }
}

fn spectral_report_json(report: &SpectralReport<f64>) -> serde_json::Value {
    json!({
        "S": report.geometry.l2_sq,
        "K": report.geometry.exclusion_scalar,
        "sector": report.geometry.sector.map(|(lo, hi)| vec![lo, hi]),
        "global_exclusion_candidate": report.geometry.global_exclusion_candidate,
        "eigenvalues": report.eigenvalues.iter().map(|e| {
            json!({
                "re": e.lambda.re,
                "im": e.lambda.im,
                "residual": e.residual,
                "winding": e.winding,
                "quartet": e.quartet().iter().map(|q| vec![q.re, q.im]).collect::<Vec<_>>(),
            })
        }).collect::<Vec<_>>(),
        "total_winding": report.total_winding,
        "grid": {
            "box": [
                report.search_box.re_min,
                report.search_box.re_max,
                report.search_box.im_min,
                report.search_box.im_max,
            ],
        },
    })
}

fn scatter(config: &ExperimentConfig, sink: &mut ArtifactSink) -> Result<(), RunFailure> {
    let profile = build_profile(config)?;
    let scattering = config.scattering.clone().unwrap_or_default();
    let [re_min, re_max, im_min, im_max] = scattering.search_box;
    let rect = SearchBox::new(re_min, re_max, im_min, im_max);
    let opts = SearchOptions {
        axis_margin: scattering.thresholds.axis_margin,
        contour_budget: scattering.thresholds.contour_budget,
        newton_start_diagonal: scattering.thresholds.newton_start_diagonal,
        global_exclusion_threshold: scattering.thresholds.global_exclusion,
    };
    let report = find_eigenvalues(&profile, rect, &opts).map_err(runtime)?;
    sink.write_json("report.json", &spectral_report_json(&report))?;

    let n = scattering.grid_density;
    let samples = sample_transmission_grid(&profile, &rect, n, n).map_err(runtime)?;
    let mut csv = String::from("lambda_re,lambda_im,log_abs_a,arg_a\n");
    for s in &samples {
        csv.push_str(&format!("{},{},{},{}\n", s.lambda.re, s.lambda.im, s.log_abs_a, s.arg_a));
    }
    sink.write_text("heatmap.csv", &csv)
}

fn check_bounds(config: &ExperimentConfig, sink: &mut ArtifactSink) -> Result<(), RunFailure> {
    let trajectory = run_trajectory(config)?;
    write_trajectory_outputs(config, &trajectory, sink)?;
    let ps = config.bounds.clone().unwrap_or_default().p;
    let reports: Vec<_> = ps
        .iter()
        .map(|&p| check_gronwall(&trajectory, p).map_err(runtime))
        .collect::<Result<_, _>>()?;
    sink.write_json("gronwall.json", &reports)?;
    // decay fit over the second half of the trajectory when it is long enough
    if let Some(last) = trajectory.rows.last() {
        if last.t >= 20.0 {
            if let Ok(fit) = fit_nonlinear_decay(&trajectory, (10.0, last.t)) {
                sink.write_json(
                    "decay_fit.json",
                    &json!({"slope": fit.slope, "stderr": fit.stderr, "window": [10.0, last.t]}),
                )?;
            }
        }
    }
    Ok(())
}

fn scalar_evolve(config: &ExperimentConfig, sink: &mut ArtifactSink) -> Result<(), RunFailure> {
    let mut profile = build_profile(config)?;
    let time = config.time.ok_or_else(|| usage("missing time block"))?;
    let steps = (time.t_final / time.dt).round().max(0.0) as usize;
    let mut csv = String::from("tau,l2,sup,mass_re,mass_im\n");
    let mut tau = 0.0;
    let record = |csv: &mut String, tau: f64, p: &ScatteringProfile<f64>| {
        let mass = p.zero_mass_defect();
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            tau,
            p.l2_norm(),
            p.sup_norm(),
            mass.re,
            mass.im
        ));
    };
    record(&mut csv, tau, &profile);
    for step in 1..=steps {
        profile = scalar_step_rk4(&profile, time.dt).map_err(runtime)?;
        tau = time.dt * step as f64;
        if step % time.cadence == 0 || step == steps {
            record(&mut csv, tau, &profile);
        }
    }
    sink.write_text("scalar.csv", &csv)?;
    let path = sink.path("final_profile.bin");
    write_profile(&path, &profile, tau).map_err(runtime)?;
    Ok(())
}
