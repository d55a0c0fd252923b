//! Experiment configuration: flat TOML with one table per concern. The
//! full schema is documented in docs/config.md; configs round-trip
//! through serialization losslessly and are embedded verbatim (flattened
//! to dotted key=value pairs) in every output file.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

fn bad(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Lorenz,
    Nse2d,
}

impl std::fmt::Display for SystemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SystemKind::Lorenz => write!(f, "lorenz"),
            SystemKind::Nse2d => write!(f, "nse2d"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub system: SystemKind,
    /// Reference trajectory samples ("seeds") per experiment.
    #[serde(default = "default_seed_count")]
    pub seed_count: usize,
    /// Run horizon in model time units.
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    /// Base value for all deterministic RNG seeding.
    #[serde(default)]
    pub base_seed: u64,
    /// Output directory; the --out flag overrides it.
    #[serde(default)]
    pub out_dir: Option<String>,
}

fn default_seed_count() -> usize {
    5
}

fn default_horizon() -> f64 {
    100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LorenzSection {
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_b")]
    pub b: f64,
    #[serde(default = "default_r")]
    pub r: f64,
    /// Pre-integration time before any experiment so the reference lies on
    /// the attractor.
    #[serde(default = "default_spinup")]
    pub spinup: f64,
    /// Model-time spacing between consecutive reference samples.
    #[serde(default = "default_lorenz_spacing")]
    pub seed_spacing: f64,
}

fn default_sigma() -> f64 {
    10.0
}

fn default_b() -> f64 {
    8.0 / 3.0
}

fn default_r() -> f64 {
    28.0
}

fn default_spinup() -> f64 {
    100.0
}

fn default_lorenz_spacing() -> f64 {
    17.0
}

impl Default for LorenzSection {
    fn default() -> Self {
        Self {
            sigma: default_sigma(),
            b: default_b(),
            r: default_r(),
            spinup: default_spinup(),
            seed_spacing: default_lorenz_spacing(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NseSection {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_box_size")]
    pub box_size: f64,
    #[serde(default = "default_nu")]
    pub nu: f64,
    /// |f| of the deterministic band forcing.
    #[serde(default = "default_amplitude")]
    pub forcing_amplitude: f64,
    /// Integer-mode band [lo, hi] the forcing occupies (m1^2 + m2^2).
    #[serde(default = "default_band")]
    pub forcing_band: [i64; 2],
    /// Interpolation constant for the bound engine.
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_spinup")]
    pub spinup: f64,
    #[serde(default = "default_nse_spacing")]
    pub seed_spacing: f64,
    /// |u| of the random initial field the spin-up starts from.
    #[serde(default = "default_init_energy")]
    pub init_energy: f64,
    /// Support |k|^2 <= this of the random initial field.
    #[serde(default = "default_init_ksq")]
    pub init_k_sq_max: f64,
}

fn default_n() -> usize {
    64
}

fn default_box_size() -> f64 {
    2.0 * std::f64::consts::PI
}

fn default_nu() -> f64 {
    0.1
}

fn default_amplitude() -> f64 {
    1.0
}

fn default_band() -> [i64; 2] {
    [1, 2]
}

fn default_c() -> f64 {
    1.0
}

fn default_nse_spacing() -> f64 {
    10.0
}

fn default_init_energy() -> f64 {
    1.0
}

fn default_init_ksq() -> f64 {
    6.0
}

impl Default for NseSection {
    fn default() -> Self {
        Self {
            n: default_n(),
            box_size: default_box_size(),
            nu: default_nu(),
            forcing_amplitude: default_amplitude(),
            forcing_band: default_band(),
            c: default_c(),
            spinup: default_spinup(),
            seed_spacing: default_nse_spacing(),
            init_energy: default_init_energy(),
            init_k_sq_max: default_init_ksq(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationSection {
    /// Lorenz: observed components, a subset of "xyz" (default "x").
    #[serde(default)]
    pub component: Option<String>,
    /// Navier-Stokes: observe Fourier modes with |k|^2 <= lambda.
    #[serde(default)]
    pub lambda: Option<f64>,
}

impl Default for ObservationSection {
    fn default() -> Self {
        Self {
            component: None,
            lambda: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    /// t_n = n h.
    Uniform,
    /// Gaps drawn uniformly from (0, h]; one independent draw per seed.
    Random,
    /// Explicit list of times.
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub kind: ScheduleKind,
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub times: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EtaKind {
    Zero,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaSection {
    pub kind: EtaKind,
    /// Norm of the random guess (ignored for zero).
    #[serde(default = "default_eta_norm")]
    pub norm: f64,
}

fn default_eta_norm() -> f64 {
    1.0
}

impl Default for EtaSection {
    fn default() -> Self {
        Self {
            kind: EtaKind::Zero,
            norm: default_eta_norm(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Rk4,
    Ifrk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub scheme: SchemeKind,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictSection {
    #[serde(default = "default_tol_rel")]
    pub tol_rel: f64,
    #[serde(default = "default_blowup")]
    pub blowup_factor: f64,
    #[serde(default = "default_dwell")]
    pub dwell_fraction: f64,
}

fn default_tol_rel() -> f64 {
    1e-6
}

fn default_blowup() -> f64 {
    1e3
}

fn default_dwell() -> f64 {
    0.1
}

impl Default for VerdictSection {
    fn default() -> Self {
        Self {
            tol_rel: default_tol_rel(),
            blowup_factor: default_blowup(),
            dwell_fraction: default_dwell(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Record an in-window error sample every this many integrator steps
    /// (0: update instants only).
    #[serde(default)]
    pub sample_stride: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub h_values: Vec<f64>,
    #[serde(default)]
    pub lambda_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSection {
    pub h_lo: f64,
    pub h_hi: f64,
    /// Final bracket width; defaults to (h_hi - h_lo)/32.
    #[serde(default)]
    pub resolution: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub lorenz: Option<LorenzSection>,
    #[serde(default)]
    pub nse2d: Option<NseSection>,
    #[serde(default)]
    pub observation: ObservationSection,
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub eta: EtaSection,
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub verdict: VerdictSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub threshold: Option<ThresholdSection>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| bad("(toml)", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let e = &self.experiment;
        if e.seed_count == 0 {
            return Err(bad("experiment.seed_count", "must be at least 1"));
        }
        if !(e.horizon > 0.0) {
            return Err(bad("experiment.horizon", "must be positive"));
        }
        match e.system {
            SystemKind::Lorenz => {
                let l = self.lorenz.clone().unwrap_or_default();
                if !(l.sigma > 0.0) {
                    return Err(bad("lorenz.sigma", "must be positive"));
                }
                if !(l.b > 1.0) {
                    return Err(bad(
                        "lorenz.b",
                        format!(
                            "must exceed 1: the attractor bound divides by 4(b-1), got b = {}",
                            l.b
                        ),
                    ));
                }
                if !(l.r > 0.0) {
                    return Err(bad("lorenz.r", "must be positive"));
                }
                if let Some(c) = &self.observation.component {
                    if c.is_empty() || !c.chars().all(|ch| "xyz".contains(ch)) {
                        return Err(bad(
                            "observation.component",
                            "must be a non-empty subset of \"xyz\"",
                        ));
                    }
                }
            }
            SystemKind::Nse2d => {
                let n = self.nse2d.clone().unwrap_or_default();
                if n.n < 8 || !n.n.is_power_of_two() {
                    return Err(bad("nse2d.n", "must be a power of two, at least 8"));
                }
                if !(n.box_size > 0.0) {
                    return Err(bad("nse2d.box_size", "must be positive"));
                }
                if !(n.nu > 0.0) {
                    return Err(bad("nse2d.nu", "must be positive"));
                }
                if !(n.forcing_amplitude > 0.0) {
                    return Err(bad("nse2d.forcing_amplitude", "must be positive"));
                }
                if n.forcing_band[0] < 1 || n.forcing_band[1] < n.forcing_band[0] {
                    return Err(bad("nse2d.forcing_band", "needs 1 <= lo <= hi"));
                }
                if !(n.c > 0.0) {
                    return Err(bad("nse2d.c", "must be positive"));
                }
                let lambda = self
                    .observation
                    .lambda
                    .ok_or_else(|| bad("observation.lambda", "required for nse2d"))?;
                if !(lambda >= 0.0) {
                    return Err(bad("observation.lambda", "must be nonnegative"));
                }
            }
        }
        match self.schedule.kind {
            ScheduleKind::Uniform | ScheduleKind::Random => {
                let h = self
                    .schedule
                    .h
                    .ok_or_else(|| bad("schedule.h", "required for this schedule kind"))?;
                if !(h > 0.0) {
                    return Err(bad("schedule.h", "must be positive"));
                }
            }
            ScheduleKind::Explicit => {
                let times = self
                    .schedule
                    .times
                    .as_ref()
                    .ok_or_else(|| bad("schedule.times", "required for explicit schedules"))?;
                if times.len() < 2 || times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(bad(
                        "schedule.times",
                        "need at least two strictly increasing times",
                    ));
                }
            }
        }
        if !(self.eta.norm >= 0.0) {
            return Err(bad("eta.norm", "must be nonnegative"));
        }
        if !(self.integrator.dt > 0.0) {
            return Err(bad("integrator.dt", "must be positive"));
        }
        let v = &self.verdict;
        if !(v.tol_rel > 0.0)
            || !(v.blowup_factor > 1.0)
            || !(0.0..=1.0).contains(&v.dwell_fraction)
        {
            return Err(bad(
                "verdict",
                "tol_rel > 0, blowup_factor > 1, dwell_fraction in [0, 1]",
            ));
        }
        if let Some(s) = &self.sweep {
            if s.h_values.is_empty() {
                return Err(bad("sweep.h_values", "must not be empty"));
            }
            if s.h_values.iter().any(|h| !(*h > 0.0)) {
                return Err(bad("sweep.h_values", "all entries must be positive"));
            }
            if self.experiment.system == SystemKind::Nse2d && s.lambda_values.is_empty() {
                return Err(bad("sweep.lambda_values", "must not be empty for nse2d"));
            }
        }
        if let Some(t) = &self.threshold {
            if !(t.h_lo > 0.0) || !(t.h_hi > t.h_lo) {
                return Err(bad("threshold", "need 0 < h_lo < h_hi"));
            }
        }
        Ok(())
    }

    /// Flatten to dotted key=value pairs for embedding in output files.
    pub fn flatten(&self) -> BTreeMap<String, String> {
        let value = toml::Value::try_from(self).expect("config serializes");
        let mut out = BTreeMap::new();
        flatten_value("", &value, &mut out);
        out
    }
}

fn flatten_value(prefix: &str, v: &toml::Value, out: &mut BTreeMap<String, String>) {
    match v {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten_value(&key, v, out);
            }
        }
        toml::Value::Array(a) => {
            let items: Vec<String> = a.iter().map(|x| x.to_string()).collect();
            out.insert(prefix.to_string(), format!("[{}]", items.join(",")));
        }
        other => {
            out.insert(prefix.to_string(), other.to_string());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lorenz_toml() -> &'static str {
        r#"
[experiment]
system = "lorenz"
horizon = 100.0

[schedule]
kind = "uniform"
h = 0.1

[integrator]
scheme = "rk4"
dt = 0.001
"#
    }

    #[test]
    fn parses_minimal_lorenz_config() {
        let cfg = ExperimentConfig::from_toml(lorenz_toml()).unwrap();
        assert_eq!(cfg.experiment.system, SystemKind::Lorenz);
        assert_eq!(cfg.experiment.seed_count, 5);
        assert_eq!(cfg.verdict.tol_rel, 1e-6);
    }

    #[test]
    fn round_trips_losslessly() {
        let cfg = ExperimentConfig::from_toml(lorenz_toml()).unwrap();
        let text = cfg.to_toml();
        let cfg2 = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, cfg2);
        // and once more through the serializer to pin byte stability
        assert_eq!(text, cfg2.to_toml());
    }

    #[test]
    fn rejects_b_at_one_naming_the_denominator() {
        let text = lorenz_toml().replace("[schedule]", "[lorenz]\nb = 1.0\n\n[schedule]");
        let err = ExperimentConfig::from_toml(&text).unwrap_err();
        assert_eq!(err.field, "lorenz.b");
        assert!(err.to_string().contains("4(b-1)"), "message: {err}");
    }

    #[test]
    fn rejects_unknown_fields() {
        let text = lorenz_toml().replace("dt = 0.001", "dt = 0.001\nstep = 3");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn nse_requires_lambda() {
        let text = r#"
[experiment]
system = "nse2d"

[schedule]
kind = "uniform"
h = 0.25

[integrator]
scheme = "ifrk4"
dt = 0.02
"#;
        let err = ExperimentConfig::from_toml(text).unwrap_err();
        assert_eq!(err.field, "observation.lambda");
    }

    #[test]
    fn flatten_produces_dotted_keys() {
        let cfg = ExperimentConfig::from_toml(lorenz_toml()).unwrap();
        let flat = cfg.flatten();
        assert_eq!(
            flat.get("experiment.system").map(String::as_str),
            Some("\"lorenz\"")
        );
        assert_eq!(flat.get("integrator.dt").map(String::as_str), Some("0.001"));
    }
}
