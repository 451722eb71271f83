//! Run configuration: TOML or JSON file, `--set key=value` overrides, defaults.
//!
//! Everything is merged into one value tree before deserialization so that
//! type errors and unknown keys are reported with their dotted key path.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::device::{Calibration, MaterialParams};
use crate::dynamics::StepOptions;
use crate::error::{Error, Result};
use crate::hamiltonians::DetuningConvention;
use crate::scenarios::ScenarioId;

/// Environment variable naming the default output root.
pub const OUTPUT_ENV: &str = "KERR_MAGNON_OUT";
pub const DEFAULT_OUTPUT: &str = "results";

/// How quoted coherent frequencies (couplings, detunings) are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyUnits {
    /// Values are f = omega / 2pi in Hz.
    #[default]
    Ordinary,
    /// Values are already angular (rad/s).
    Angular,
}

/// How decay rates are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RateUnits {
    /// Rates are in s^-1 as given.
    #[default]
    Plain,
    /// Rates are quoted as f and multiplied by 2pi.
    TwoPi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Conventions {
    pub detuning: DetuningConvention,
    pub frequency_units: FrequencyUnits,
    pub rate_units: RateUnits,
}

impl Conventions {
    /// Quoted frequency -> rad/s.
    pub fn angular(&self, value: f64) -> f64 {
        match self.frequency_units {
            FrequencyUnits::Ordinary => 2.0 * PI * value,
            FrequencyUnits::Angular => value,
        }
    }

    /// Quoted decay rate -> s^-1.
    pub fn rate(&self, value: f64) -> f64 {
        match self.rate_units {
            RateUnits::Plain => value,
            RateUnits::TwoPi => 2.0 * PI * value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Output root; `<dir>/<scenario>/` receives the files.
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsConfig {
    /// Magnon Fock cutoff; scenario default when absent.
    pub cutoff: Option<usize>,
    /// Explicit RK4 step (s).
    pub step: Option<f64>,
    /// Automatic step as a fraction of 1/(spectral radius + max rate).
    pub step_fraction: f64,
    /// Sample intervals per run; scenario default when absent.
    pub samples: Option<usize>,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        let s = StepOptions::default();
        Self {
            cutoff: None,
            step: s.step,
            step_fraction: s.fraction,
            samples: None,
        }
    }
}

impl NumericsConfig {
    pub fn step_options(&self) -> StepOptions {
        StepOptions {
            step: self.step,
            fraction: self.step_fraction,
            refinement: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceConfig {
    /// Sphere radius R (m).
    pub radius: f64,
    /// Spin distance from the sphere surface d (m).
    pub distance: f64,
    /// Bias field B0 (T); the default puts omega_m / 2pi at 5 GHz.
    pub bias_field: f64,
    pub calibration: Calibration,
    /// (omega_q - omega_d) / 2pi of the spin.
    pub spin_detuning_hz: f64,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self {
            radius: 30e-9,
            distance: 6e-9,
            bias_field: 0.178_619,
            calibration: Calibration::Anchored,
            spin_detuning_hz: 10e6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveSection {
    /// (omega_m - omega_d) / 2pi
    pub detuning_hz: f64,
    /// Omega_d / 2pi
    pub amplitude_hz: f64,
    /// Mean-field branch (ascending occupation); lowest stable when absent.
    pub root: Option<usize>,
}

impl Default for DriveSection {
    fn default() -> Self {
        Self {
            detuning_hz: 5e6,
            amplitude_hz: 1e8,
            root: None,
        }
    }
}

/// Where the frame quantities (G, Delta_s, Delta_q) come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FrameSource {
    /// Scenario values (G, ratios) injected directly.
    #[default]
    Quoted,
    /// `[linearized]` values through the Bogoliubov transform.
    Linearized,
    /// Device model -> mean-field drive -> linearization -> Bogoliubov transform.
    Device,
}

impl FrameSource {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Quoted => "quoted",
            Self::Linearized => "linearized",
            Self::Device => "device",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct FrameConfig {
    pub source: FrameSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearizedConfig {
    pub delta_m_hz: f64,
    pub two_magnon_hz: f64,
    pub delta_q_hz: f64,
    /// Bare coupling g / 2pi.
    pub coupling_hz: f64,
}

impl Default for LinearizedConfig {
    fn default() -> Self {
        Self {
            delta_m_hz: 5e6,
            two_magnon_hz: 3e6,
            delta_q_hz: 4e6,
            coupling_hz: 1.5e3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RabiConfig {
    /// G / 2pi
    pub coupling_hz: f64,
    /// Delta_q = Delta_s = ratio * G
    pub detuning_ratio: f64,
    /// Run length in units of pi / (2G).
    pub duration: f64,
}

impl Default for RabiConfig {
    fn default() -> Self {
        Self {
            coupling_hz: 4e6,
            detuning_ratio: 10.0,
            duration: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatteryConfig {
    pub coupling_hz: f64,
    pub detuning_ratio: f64,
    /// Initial magnon Fock numbers; must contain 1.
    pub excitations: Vec<usize>,
    /// Run length in units of pi / (2G).
    pub duration: f64,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self {
            coupling_hz: 4e6,
            detuning_ratio: 10.0,
            excitations: vec![1, 5],
            duration: 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoSpinConfig {
    /// G_eff / 2pi; G = detuning_ratio * G_eff.
    pub g_eff_hz: f64,
    /// Delta_- = Delta_s - Delta_q = ratio * G
    pub detuning_ratio: f64,
    /// Delta_q = ratio * G
    pub delta_q_ratio: f64,
    /// <m_s^dag m_s> entering omega_eff.
    pub magnon_occupation: f64,
    /// Run length in units of pi / (2 G_eff).
    pub duration: f64,
}

impl Default for TwoSpinConfig {
    fn default() -> Self {
        Self {
            g_eff_hz: 70e3,
            detuning_ratio: 10.0,
            delta_q_ratio: 10.0,
            magnon_occupation: 0.0,
            duration: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DissipationConfig {
    pub kappa_m: f64,
    pub gamma_q: f64,
    /// kappa_m multiplier of the robustness run.
    pub kappa_factor: f64,
    /// gamma_q of the spin-decay sensitivity run.
    pub gamma_q_sensitivity: f64,
}

impl Default for DissipationConfig {
    fn default() -> Self {
        Self {
            kappa_m: 1e6,
            gamma_q: 1e3,
            kappa_factor: 2.0,
            gamma_q_sensitivity: 1e4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub radius_min: f64,
    pub radius_max: f64,
    pub radius_points: usize,
    pub distance_min: f64,
    pub distance_max: f64,
    pub distance_points: usize,
    pub squeezing: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            radius_min: 1e-9,
            radius_max: 100e-9,
            radius_points: 61,
            distance_min: 1e-9,
            distance_max: 1e-6,
            distance_points: 61,
            squeezing: vec![0.0, 10.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersiveConfig {
    /// Delta_- / G values.
    pub ratios: Vec<f64>,
}

impl Default for DispersiveConfig {
    fn default() -> Self {
        Self {
            ratios: vec![5.0, 10.0, 20.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Option<ScenarioId>,
    pub output: OutputConfig,
    pub numerics: NumericsConfig,
    pub conventions: Conventions,
    pub material: MaterialParams,
    pub device: DeviceConfig,
    pub drive: DriveSection,
    pub frame: FrameConfig,
    pub linearized: LinearizedConfig,
    pub rabi: RabiConfig,
    pub battery: BatteryConfig,
    pub two_spin: TwoSpinConfig,
    pub dissipation: DissipationConfig,
    pub sweep: SweepConfig,
    pub dispersive: DispersiveConfig,
}

/// One `key=value` override; the value is read as a TOML literal, or as a
/// bare string if it does not parse.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub key: String,
    pub value: Value,
}

impl Override {
    pub fn new(key: impl Into<String>, value: impl Into<Value>) -> Self {
        Self {
            key: key.into(),
            value: value.into(),
        }
    }
}

impl FromStr for Override {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (key, raw) = s
            .split_once('=')
            .ok_or_else(|| Error::config(s, "expected key=value"))?;
        let key = key.trim();
        if key.is_empty() || key.split('.').any(str::is_empty) {
            return Err(Error::config(key, "malformed key"));
        }
        let raw = raw.trim();
        let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
            Ok(mut t) => serde_json::to_value(t.remove("v").unwrap_or(toml::Value::String(raw.into())))?,
            Err(_) => Value::String(raw.into()),
        };
        Ok(Self::new(key, value))
    }
}

fn parse_tree(text: &str, origin: &Path) -> Result<Value> {
    let is_json = origin.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let label = origin.display().to_string();
    let tree = if is_json {
        serde_json::from_str::<Value>(text).map_err(|e| Error::config(label, e.to_string()))?
    } else {
        let t: toml::Table = toml::from_str(text).map_err(|e| Error::config(label, e.message().to_string()))?;
        serde_json::to_value(t)?
    };
    if !tree.is_object() {
        return Err(Error::config(origin.display().to_string(), "top level must be a table"));
    }
    Ok(tree)
}

fn apply(tree: &mut Value, ov: &Override) -> Result<()> {
    let mut node = tree;
    let parts: Vec<&str> = ov.key.split('.').collect();
    for (k, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::config(parts[..k].join("."), "not a table"))?;
        if k + 1 == parts.len() {
            obj.insert((*part).to_string(), ov.value.clone());
            return Ok(());
        }
        node = obj.entry(*part).or_insert_with(|| Value::Object(Map::new()));
    }
    Ok(())
}

fn from_tree(tree: Value) -> Result<RunConfig> {
    let cfg: RunConfig = serde_path_to_error::deserialize(tree).map_err(|e| {
        let path = e.path().to_string();
        Error::config(path, e.into_inner().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    /// Defaults, then the file (if any), then overrides in order.
    pub fn load(file: Option<&Path>, overrides: &[Override]) -> Result<Self> {
        let mut tree = match file {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                parse_tree(&text, path)?
            }
            None => Value::Object(Map::new()),
        };
        for ov in overrides {
            apply(&mut tree, ov)?;
        }
        from_tree(tree)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        from_tree(parse_tree(text, Path::new("<toml>"))?)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        from_tree(parse_tree(text, Path::new("<input>.json"))?)
    }

    /// Output root: config value, else the environment variable, else `results`.
    pub fn output_root(&self) -> PathBuf {
        self.output
            .dir
            .clone()
            .or_else(|| {
                std::env::var_os(OUTPUT_ENV)
                    .filter(|v| !v.is_empty())
                    .map(PathBuf::from)
            })
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT))
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |path: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(path, format!("must be finite and > 0, got {v}")))
            }
        };
        let non_negative = |path: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(path, format!("must be finite and >= 0, got {v}")))
            }
        };
        let finite = |path: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(path, format!("must be finite, got {v}")))
            }
        };

        let n = &self.numerics;
        if let Some(c) = n.cutoff {
            if c < 2 {
                return Err(Error::config("numerics.cutoff", format!("must be >= 2, got {c}")));
            }
        }
        if let Some(h) = n.step {
            positive("numerics.step", h)?;
        }
        if !(n.step_fraction > 0.0 && n.step_fraction <= crate::dynamics::STEP_RULE_LIMIT) {
            return Err(Error::config(
                "numerics.step_fraction",
                format!(
                    "must lie in (0, {}], got {}",
                    crate::dynamics::STEP_RULE_LIMIT,
                    n.step_fraction
                ),
            ));
        }
        if let Some(s) = n.samples {
            if s < 2 {
                return Err(Error::config("numerics.samples", format!("must be >= 2, got {s}")));
            }
        }

        let m = &self.material;
        positive("material.saturation_magnetization", m.saturation_magnetization)?;
        finite("material.anisotropy_constant", m.anisotropy_constant)?;
        positive("material.spin_density", m.spin_density)?;
        finite("material.g_factor", m.g_factor)?;
        if let Some(g) = m.gyromagnetic_ratio {
            if g == 0.0 || !g.is_finite() {
                return Err(Error::config(
                    "material.gyromagnetic_ratio",
                    "must be finite and non-zero",
                ));
            }
        }
        if m.gamma() == 0.0 {
            return Err(Error::config("material.g_factor", "gives a zero gyromagnetic ratio"));
        }
        finite("material.spin", m.spin)?;
        positive("material.mu_0", m.mu_0)?;
        positive("material.bohr_magneton", m.bohr_magneton)?;
        positive("material.hbar", m.hbar)?;

        let d = &self.device;
        positive("device.radius", d.radius)?;
        non_negative("device.distance", d.distance)?;
        non_negative("device.bias_field", d.bias_field)?;
        finite("device.spin_detuning_hz", d.spin_detuning_hz)?;

        finite("drive.detuning_hz", self.drive.detuning_hz)?;
        non_negative("drive.amplitude_hz", self.drive.amplitude_hz)?;

        let l = &self.linearized;
        finite("linearized.delta_m_hz", l.delta_m_hz)?;
        finite("linearized.two_magnon_hz", l.two_magnon_hz)?;
        finite("linearized.delta_q_hz", l.delta_q_hz)?;
        non_negative("linearized.coupling_hz", l.coupling_hz)?;

        positive("rabi.coupling_hz", self.rabi.coupling_hz)?;
        positive("rabi.detuning_ratio", self.rabi.detuning_ratio)?;
        positive("rabi.duration", self.rabi.duration)?;

        let b = &self.battery;
        positive("battery.coupling_hz", b.coupling_hz)?;
        positive("battery.detuning_ratio", b.detuning_ratio)?;
        positive("battery.duration", b.duration)?;
        if !b.excitations.contains(&1) || b.excitations.contains(&0) {
            return Err(Error::config(
                "battery.excitations",
                "must contain 1 and only positive Fock numbers",
            ));
        }

        let t = &self.two_spin;
        positive("two_spin.g_eff_hz", t.g_eff_hz)?;
        positive("two_spin.detuning_ratio", t.detuning_ratio)?;
        finite("two_spin.delta_q_ratio", t.delta_q_ratio)?;
        non_negative("two_spin.magnon_occupation", t.magnon_occupation)?;
        positive("two_spin.duration", t.duration)?;

        let x = &self.dissipation;
        non_negative("dissipation.kappa_m", x.kappa_m)?;
        non_negative("dissipation.gamma_q", x.gamma_q)?;
        positive("dissipation.kappa_factor", x.kappa_factor)?;
        non_negative("dissipation.gamma_q_sensitivity", x.gamma_q_sensitivity)?;

        let s = &self.sweep;
        positive("sweep.radius_min", s.radius_min)?;
        positive("sweep.distance_min", s.distance_min)?;
        if !(s.radius_max > s.radius_min) || !s.radius_max.is_finite() {
            return Err(Error::config("sweep.radius_max", "empty radius range"));
        }
        if !(s.distance_max > s.distance_min) || !s.distance_max.is_finite() {
            return Err(Error::config("sweep.distance_max", "empty distance range"));
        }
        if s.radius_points < 2 {
            return Err(Error::config("sweep.radius_points", "need at least 2 points"));
        }
        if s.distance_points < 2 {
            return Err(Error::config("sweep.distance_points", "need at least 2 points"));
        }
        if s.squeezing.is_empty() {
            return Err(Error::config("sweep.squeezing", "empty list"));
        }
        for (k, r) in s.squeezing.iter().enumerate() {
            non_negative(&format!("sweep.squeezing[{k}]"), *r)?;
        }

        if self.dispersive.ratios.is_empty() {
            return Err(Error::config("dispersive.ratios", "empty list"));
        }
        for (k, r) in self.dispersive.ratios.iter().enumerate() {
            positive(&format!("dispersive.ratios[{k}]"), *r)?;
        }
        Ok(())
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Internal(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_of(err: Error) -> String {
        match err {
            Error::Config { path, .. } => path,
            other => panic!("expected a config error, got {other}"),
        }
    }

    #[test]
    fn empty_input_gives_defaults() {
        let cfg = RunConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.dissipation.kappa_m, 1e6);
        assert_eq!(cfg.two_spin.g_eff_hz, 70e3);
        assert_eq!(RunConfig::load(None, &[]).unwrap(), cfg);
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("run.toml");
        fs::write(&file, "[dissipation]\nkappa_m = 2e6\ngamma_q = 5e2\n").unwrap();
        let from_file = RunConfig::load(Some(&file), &[]).unwrap();
        assert_eq!(from_file.dissipation.kappa_m, 2e6);
        let ov: Override = "dissipation.kappa_m=3e6".parse().unwrap();
        let cfg = RunConfig::load(Some(&file), &[ov]).unwrap();
        assert_eq!(cfg.dissipation.kappa_m, 3e6);
        assert_eq!(cfg.dissipation.gamma_q, 5e2);
    }

    #[test]
    fn negative_rate_names_key() {
        let err = RunConfig::from_toml_str("[dissipation]\nkappa_m = -1.0\n").unwrap_err();
        assert_eq!(path_of(err), "dissipation.kappa_m");
    }

    #[test]
    fn unknown_and_mistyped_keys_name_path() {
        let err = RunConfig::from_toml_str("[dissipation]\nkappa = 1.0\n").unwrap_err();
        assert!(path_of(err).starts_with("dissipation"));
        let err = RunConfig::from_toml_str("[numerics]\ncutoff = \"many\"\n").unwrap_err();
        assert_eq!(path_of(err), "numerics.cutoff");
        let err = RunConfig::from_toml_str("bogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
        let err = RunConfig::load(None, &["rabi.coupling_hz=fast".parse().unwrap()]).unwrap_err();
        assert_eq!(path_of(err), "rabi.coupling_hz");
        let err = RunConfig::from_toml_str("scenario = \"nope\"\n").unwrap_err();
        assert_eq!(path_of(err), "scenario");
    }

    #[test]
    fn override_values() {
        let o: Override = "numerics.cutoff=20".parse().unwrap();
        assert_eq!(o.value, Value::from(20));
        let o: Override = "conventions.detuning=rederived".parse().unwrap();
        assert_eq!(o.value, Value::from("rederived"));
        let o: Override = "dispersive.ratios=[4, 8]".parse().unwrap();
        let cfg = RunConfig::load(None, &[o]).unwrap();
        assert_eq!(cfg.dispersive.ratios, vec![4.0, 8.0]);
        assert!("novalue".parse::<Override>().is_err());
        assert!("a..b=1".parse::<Override>().is_err());
    }

    #[test]
    fn json_and_toml_round_trip() {
        let mut cfg = RunConfig {
            scenario: Some(ScenarioId::Rabi),
            ..RunConfig::default()
        };
        cfg.numerics.cutoff = Some(17);
        cfg.output.dir = Some(PathBuf::from("/tmp/x"));
        cfg.dissipation.kappa_m = 0.1 + 0.2;
        let json = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(RunConfig::from_json_str(&json).unwrap(), cfg);
        let toml = cfg.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&toml).unwrap(), cfg);
    }

    #[test]
    fn unit_conventions() {
        let mut c = Conventions::default();
        assert_eq!(c.angular(1.0), 2.0 * PI);
        assert_eq!(c.rate(3.0), 3.0);
        c.frequency_units = FrequencyUnits::Angular;
        c.rate_units = RateUnits::TwoPi;
        assert_eq!(c.angular(1.0), 1.0);
        assert_eq!(c.rate(1.0), 2.0 * PI);
    }

    #[test]
    fn validation_paths() {
        for (text, key) in [
            ("[numerics]\ncutoff = 1", "numerics.cutoff"),
            ("[device]\nradius = 0.0", "device.radius"),
            ("[battery]\nexcitations = [5]", "battery.excitations"),
            ("[sweep]\nradius_max = 1e-10", "sweep.radius_max"),
            ("[dispersive]\nratios = []", "dispersive.ratios"),
            ("[numerics]\nstep_fraction = 0.5", "numerics.step_fraction"),
        ] {
            assert_eq!(path_of(RunConfig::from_toml_str(text).unwrap_err()), key, "{text}");
        }
    }
}
