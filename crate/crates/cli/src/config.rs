//! Experiment configuration: JSON parsing, exhaustive validation with
//! JSON-pointer paths, preset expansion, and defaults.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use dirac1d_core::model::PotentialSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    Decay,
    Scatter,
    CheckBounds,
    ScalarEvolve,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Decay => "decay",
            Mode::Scatter => "scatter",
            Mode::CheckBounds => "check-bounds",
            Mode::ScalarEvolve => "scalar-evolve",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialConfig {
    Preset {
        preset: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        beta: Option<f64>,
    },
    Coefficients {
        #[serde(default)]
        alpha1: f64,
        #[serde(default)]
        alpha2: f64,
        #[serde(default)]
        alpha3: f64,
        #[serde(default)]
        alpha4: f64,
        #[serde(default)]
        beta_sextic: f64,
    },
}

impl PotentialConfig {
    pub fn build(&self) -> Result<PotentialSpec<f64>, String> {
        match self {
            PotentialConfig::Preset { preset, alpha, beta } => match preset.as_str() {
                "mtm" => Ok(PotentialSpec::mtm()),
                "gross_neveu" => Ok(PotentialSpec::gross_neveu()),
                "linear" => Ok(PotentialSpec::linear()),
                "coupled_mode" => Ok(PotentialSpec::coupled_mode(
                    alpha.ok_or("preset coupled_mode requires field alpha")?,
                )),
                "photonic" => Ok(PotentialSpec::photonic(
                    alpha.ok_or("preset photonic requires field alpha")?,
                    beta.ok_or("preset photonic requires field beta")?,
                )),
                "feshbach" => Ok(PotentialSpec::feshbach(
                    alpha.ok_or("preset feshbach requires field alpha")?,
                )),
                other => Err(format!("unknown preset {other:?}")),
            },
            PotentialConfig::Coefficients { alpha1, alpha2, alpha3, alpha4, beta_sextic } => {
                PotentialSpec::new(*alpha1, *alpha2, *alpha3, *alpha4, *beta_sextic)
                    .map_err(|e| e.to_string())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "N")]
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeConfig {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(rename = "T_final")]
    pub t_final: f64,
    #[serde(default = "default_cadence")]
    pub cadence: usize,
}

fn default_dt() -> f64 {
    0.01
}

fn default_cadence() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum InitialConfig {
    Gaussian {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: f64,
        #[serde(default)]
        phase_k: f64,
    },
    Sech {
        amplitude: f64,
        width: f64,
    },
    FromFile {
        path: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayConfig {
    #[serde(default = "default_t_min")]
    pub t_min: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_t_min() -> f64 {
    10.0
}

fn default_t_max() -> f64 {
    100.0
}

fn default_samples() -> usize {
    25
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self { t_min: default_t_min(), t_max: default_t_max(), samples: default_samples() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    #[serde(default = "default_axis_margin")]
    pub axis_margin: f64,
    #[serde(default = "default_global_exclusion")]
    pub global_exclusion: f64,
    #[serde(default = "default_newton_diagonal")]
    pub newton_start_diagonal: f64,
    #[serde(default = "default_contour_budget")]
    pub contour_budget: usize,
}

fn default_axis_margin() -> f64 {
    0.02
}

fn default_global_exclusion() -> f64 {
    0.1
}

fn default_newton_diagonal() -> f64 {
    0.05
}

fn default_contour_budget() -> usize {
    40_000
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            axis_margin: default_axis_margin(),
            global_exclusion: default_global_exclusion(),
            newton_start_diagonal: default_newton_diagonal(),
            contour_budget: default_contour_budget(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringConfig {
    /// [re_min, re_max, im_min, im_max]
    #[serde(rename = "box", default = "default_box")]
    pub search_box: [f64; 4],
    #[serde(default = "default_grid_density")]
    pub grid_density: usize,
    #[serde(default)]
    pub thresholds: ThresholdConfig,
}

fn default_box() -> [f64; 4] {
    [0.1, 2.5, 0.1, 2.5]
}

fn default_grid_density() -> usize {
    24
}

impl Default for ScatteringConfig {
    fn default() -> Self {
        Self {
            search_box: default_box(),
            grid_density: default_grid_density(),
            thresholds: ThresholdConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsConfig {
    #[serde(default = "default_bounds_p")]
    pub p: Vec<u32>,
}

fn default_bounds_p() -> Vec<u32> {
    vec![1, 2, 3]
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self { p: default_bounds_p() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitsConfig {
    pub h1_ceiling: Option<f64>,
}

/// Fully parsed experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecayConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scattering: Option<ScatteringConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limits: Option<LimitsConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_times: Option<Vec<f64>>,
    #[serde(default)]
    pub save_final: bool,
    #[serde(default = "default_output")]
    pub output: String,
}

fn default_output() -> String {
    "out".into()
}

/// One validation failure, addressed by JSON pointer.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub pointer: String,
    pub message: String,
}

impl std::fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.pointer, self.message)
    }
}

fn finite(v: &Value, pointer: &str, issues: &mut Vec<ConfigIssue>) {
    if let Some(x) = v.as_f64() {
        if !x.is_finite() {
            issues.push(ConfigIssue { pointer: pointer.into(), message: "must be finite".into() });
        }
    } else {
        issues.push(ConfigIssue { pointer: pointer.into(), message: "must be a number".into() });
    }
}

/// Parses and validates a config document, reporting every violation rather
/// than stopping at the first.
pub fn parse_config(text: &str, mode: Mode) -> Result<ExperimentConfig, Vec<ConfigIssue>> {
    let value: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => {
            return Err(vec![ConfigIssue {
                pointer: "".into(),
                message: format!("invalid JSON: {e}"),
            }])
        }
    };
    let mut issues = Vec::new();

    if let Some(m) = value.get("mode") {
        match serde_json::from_value::<Mode>(m.clone()) {
            Ok(parsed) if parsed != mode => issues.push(ConfigIssue {
                pointer: "/mode".into(),
                message: format!(
                    "config says {:?} but the {} subcommand was invoked",
                    parsed.as_str(),
                    mode.as_str()
                ),
            }),
            Ok(_) => {}
            Err(_) => issues.push(ConfigIssue {
                pointer: "/mode".into(),
                message: "must be one of simulate, decay, scatter, check-bounds, scalar-evolve"
                    .into(),
            }),
        }
    }

    let needs_potential = matches!(mode, Mode::Simulate | Mode::CheckBounds);
    let needs_time = matches!(mode, Mode::Simulate | Mode::CheckBounds | Mode::ScalarEvolve);

    // required blocks
    for (key, required) in
        [("potential", needs_potential), ("grid", true), ("time", needs_time), ("initial", true)]
    {
        if required && value.get(key).is_none() {
            issues.push(ConfigIssue {
                pointer: format!("/{key}"),
                message: format!("required for mode {}", mode.as_str()),
            });
        }
    }

    if let Some(p) = value.get("potential") {
        validate_potential(p, &mut issues);
    }
    let grid_spacing = value.get("grid").and_then(|g| validate_grid(g, &mut issues));
    if let Some(t) = value.get("time") {
        validate_time(t, grid_spacing, &mut issues);
    }
    if let Some(i) = value.get("initial") {
        validate_initial(i, &mut issues);
    }
    if let Some(d) = value.get("decay") {
        validate_decay(d, &mut issues);
    }
    if let Some(s) = value.get("scattering") {
        validate_scattering(s, &mut issues);
    }
    if let Some(b) = value.get("bounds").and_then(|b| b.get("p")) {
        match b.as_array() {
            Some(arr) => {
                for (i, p) in arr.iter().enumerate() {
                    if !matches!(p.as_u64(), Some(1..=3)) {
                        issues.push(ConfigIssue {
                            pointer: format!("/bounds/p/{i}"),
                            message: "must be 1, 2 or 3".into(),
                        });
                    }
                }
            }
            None => issues.push(ConfigIssue {
                pointer: "/bounds/p".into(),
                message: "must be an array".into(),
            }),
        }
    }
    if let Some(ts) = value.get("snapshot_times") {
        if let Some(arr) = ts.as_array() {
            for (i, t) in arr.iter().enumerate() {
                finite(t, &format!("/snapshot_times/{i}"), &mut issues);
            }
        } else {
            issues.push(ConfigIssue {
                pointer: "/snapshot_times".into(),
                message: "must be an array of times".into(),
            });
        }
    }

    if !issues.is_empty() {
        return Err(issues);
    }
    match serde_json::from_value::<ExperimentConfig>(value) {
        Ok(config) => Ok(config),
        Err(e) => Err(vec![ConfigIssue { pointer: "".into(), message: e.to_string() }]),
    }
}

fn validate_potential(p: &Value, issues: &mut Vec<ConfigIssue>) {
    if let Some(preset) = p.get("preset") {
        let name = preset.as_str().unwrap_or("");
        let known = ["mtm", "gross_neveu", "coupled_mode", "photonic", "feshbach", "linear"];
        if !known.contains(&name) {
            issues.push(ConfigIssue {
                pointer: "/potential/preset".into(),
                message: format!("unknown preset {name:?} (expected one of {known:?})"),
            });
            return;
        }
        if matches!(name, "coupled_mode" | "photonic" | "feshbach") && p.get("alpha").is_none() {
            issues.push(ConfigIssue {
                pointer: "/potential/alpha".into(),
                message: format!("preset {name} requires alpha"),
            });
        }
        if name == "photonic" && p.get("beta").is_none() {
            issues.push(ConfigIssue {
                pointer: "/potential/beta".into(),
                message: "preset photonic requires beta".into(),
            });
        }
    } else {
        for key in ["alpha1", "alpha2", "alpha3", "alpha4", "beta_sextic"] {
            if let Some(v) = p.get(key) {
                finite(v, &format!("/potential/{key}"), issues);
            }
        }
    }
}

fn validate_grid(g: &Value, issues: &mut Vec<ConfigIssue>) -> Option<f64> {
    let l = g.get("L");
    let n = g.get("N");
    if let Some(l) = l {
        finite(l, "/grid/L", issues);
        if l.as_f64().map(|x| x <= 0.0).unwrap_or(false) {
            issues.push(ConfigIssue {
                pointer: "/grid/L".into(),
                message: "must be positive".into(),
            });
        }
    } else {
        issues.push(ConfigIssue { pointer: "/grid/L".into(), message: "missing".into() });
    }
    match n.and_then(Value::as_u64) {
        Some(points) if points.is_power_of_two() => {
            if let Some(half) = l.and_then(Value::as_f64) {
                return Some(2.0 * half / points as f64);
            }
        }
        Some(points) => issues.push(ConfigIssue {
            pointer: "/grid/N".into(),
            message: format!("{points} is not a power of two"),
        }),
        None => issues.push(ConfigIssue {
            pointer: "/grid/N".into(),
            message: "missing or not a positive integer".into(),
        }),
    }
    None
}

fn validate_time(t: &Value, grid_spacing: Option<f64>, issues: &mut Vec<ConfigIssue>) {
    if let Some(dt) = t.get("dt") {
        finite(dt, "/time/dt", issues);
        if let Some(x) = dt.as_f64() {
            if x <= 0.0 {
                issues.push(ConfigIssue {
                    pointer: "/time/dt".into(),
                    message: "must be positive".into(),
                });
            } else if let Some(h) = grid_spacing {
                if x > h {
                    issues.push(ConfigIssue {
                        pointer: "/time/dt".into(),
                        message: format!("dt = {x} exceeds grid spacing h = {h}"),
                    });
                }
            }
        }
    }
    match t.get("T_final") {
        Some(tf) => {
            finite(tf, "/time/T_final", issues);
            if tf.as_f64().map(|x| x < 0.0).unwrap_or(false) {
                issues.push(ConfigIssue {
                    pointer: "/time/T_final".into(),
                    message: "must be non-negative".into(),
                });
            }
        }
        None => {
            issues.push(ConfigIssue { pointer: "/time/T_final".into(), message: "missing".into() })
        }
    }
    if let Some(c) = t.get("cadence") {
        if !matches!(c.as_u64(), Some(1..)) {
            issues.push(ConfigIssue {
                pointer: "/time/cadence".into(),
                message: "must be a positive integer".into(),
            });
        }
    }
}

fn validate_initial(i: &Value, issues: &mut Vec<ConfigIssue>) {
    match i.get("family").and_then(Value::as_str) {
        Some("gaussian") => {
            for key in ["amplitude", "width"] {
                match i.get(key) {
                    Some(v) => finite(v, &format!("/initial/{key}"), issues),
                    None => issues.push(ConfigIssue {
                        pointer: format!("/initial/{key}"),
                        message: "missing".into(),
                    }),
                }
            }
            for key in ["center", "phase_k"] {
                if let Some(v) = i.get(key) {
                    finite(v, &format!("/initial/{key}"), issues);
                }
            }
        }
        Some("sech") => {
            for key in ["amplitude", "width"] {
                match i.get(key) {
                    Some(v) => finite(v, &format!("/initial/{key}"), issues),
                    None => issues.push(ConfigIssue {
                        pointer: format!("/initial/{key}"),
                        message: "missing".into(),
                    }),
                }
            }
        }
        Some("from_file") => {
            if i.get("path").and_then(Value::as_str).map(str::is_empty).unwrap_or(true) {
                issues.push(ConfigIssue {
                    pointer: "/initial/path".into(),
                    message: "must be a non-empty path".into(),
                });
            }
        }
        Some(other) => issues.push(ConfigIssue {
            pointer: "/initial/family".into(),
            message: format!("unknown family {other:?} (expected gaussian, sech or from_file)"),
        }),
        None => issues
            .push(ConfigIssue { pointer: "/initial/family".into(), message: "missing".into() }),
    }
}

fn validate_decay(d: &Value, issues: &mut Vec<ConfigIssue>) {
    let t_min = d.get("t_min").and_then(Value::as_f64).unwrap_or(default_t_min());
    let t_max = d.get("t_max").and_then(Value::as_f64).unwrap_or(default_t_max());
    if t_min < 1.0 {
        issues.push(ConfigIssue { pointer: "/decay/t_min".into(), message: "must be >= 1".into() });
    }
    if t_max <= t_min {
        issues.push(ConfigIssue {
            pointer: "/decay/t_max".into(),
            message: "must exceed t_min".into(),
        });
    }
    if let Some(s) = d.get("samples") {
        if !matches!(s.as_u64(), Some(3..)) {
            issues.push(ConfigIssue {
                pointer: "/decay/samples".into(),
                message: "must be an integer >= 3".into(),
            });
        }
    }
}

fn validate_scattering(s: &Value, issues: &mut Vec<ConfigIssue>) {
    if let Some(b) = s.get("box") {
        let ok = b
            .as_array()
            .filter(|a| a.len() == 4)
            .map(|a| a.iter().filter_map(Value::as_f64).collect::<Vec<_>>())
            .filter(|a| a.len() == 4)
            .map(|a| a[0] > 0.0 && a[1] > a[0] && a[2] > 0.0 && a[3] > a[2])
            .unwrap_or(false);
        if !ok {
            issues.push(ConfigIssue {
                pointer: "/scattering/box".into(),
                message: "must be [re_min, re_max, im_min, im_max] in the open first quadrant"
                    .into(),
            });
        }
    }
    if let Some(d) = s.get("grid_density") {
        if !matches!(d.as_u64(), Some(2..)) {
            issues.push(ConfigIssue {
                pointer: "/scattering/grid_density".into(),
                message: "must be an integer >= 2".into(),
            });
        }
    }
}
