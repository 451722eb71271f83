//! Named, reproducible experiment runners.
//!
//! Each run writes `<out>/<scenario>/` containing the data table
//! (`trajectory.csv` or `sweep.csv`) with a `.meta.json` sidecar,
//! `report.json`, `params.json` and, for dynamical scenarios, `frame.json`.

mod battery;
mod rabi;
mod sweep;
mod two_spin;

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{FrameSource, RunConfig};
use crate::device::{bare_coupling, kerr_coefficient, magnon_frequency, BiasField, SphereGeometry, SpinPlacement};
use crate::dynamics::export::{write_json, Table};
use crate::dynamics::StepOptions;
use crate::error::{Error, Result};
use crate::hamiltonians::{
    linearize, squeeze_frame, steady_amplitude, DriveConfig, FrameSummary, LinearizedParams, RootSelection,
    SqueezedFrame,
};

/// Tolerance of the trace-preservation gate.
pub const TRACE_GATE_TOL: f64 = 1e-8;
/// Tolerance of the step-halving and cutoff gates.
pub const CONVERGENCE_GATE_TOL: f64 = 1e-6;
/// Cutoff increment of the truncation gate.
pub const CUTOFF_GATE_STEP: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioId {
    CouplingSweep,
    Rabi,
    Battery,
    StateTransfer,
    IswapFidelity,
    DispersiveCheck,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 6] = [
        ScenarioId::CouplingSweep,
        ScenarioId::Rabi,
        ScenarioId::Battery,
        ScenarioId::StateTransfer,
        ScenarioId::IswapFidelity,
        ScenarioId::DispersiveCheck,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::CouplingSweep => "coupling-sweep",
            Self::Rabi => "rabi",
            Self::Battery => "battery",
            Self::StateTransfer => "state-transfer",
            Self::IswapFidelity => "iswap-fidelity",
            Self::DispersiveCheck => "dispersive-check",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Self::CouplingSweep => {
                "bare coupling g(R, d), Kerr K(R) and enhanced coupling G(d; r_m) over a device grid"
            }
            Self::Rabi => "magnon-spin exchange under the full quantum Rabi model (no rotating-wave approximation)",
            Self::Battery => "spin battery charged by a magnon Fock state: stored energy and power, sqrt(m) speed-up",
            Self::StateTransfer => "magnon-mediated excitation transfer between two spins with magnon and spin decay",
            Self::IswapFidelity => "average iSWAP gate fidelity versus time from process reconstruction",
            Self::DispersiveCheck => "full Tavis-Cummings versus effective exchange dynamics for several detunings",
        }
    }

    /// The figure or claim the scenario reproduces.
    pub fn figure(&self) -> &'static str {
        match self {
            Self::CouplingSweep => "coupling vs sphere radius and vs spin distance (r_m = 0, 10)",
            Self::Rabi => "magnon and spin populations, G = 4 MHz, Delta_q = Delta_s = 10G",
            Self::Battery => "single-spin battery energy and charging power",
            Self::StateTransfer => "occupations of spin 1, spin 2 and magnons",
            Self::IswapFidelity => "two-qubit iSWAP fidelity versus evolution time",
            Self::DispersiveCheck => "adiabatic elimination of the magnon mode",
        }
    }

    fn is_dynamical(&self) -> bool {
        !matches!(self, Self::CouplingSweep)
    }

    fn table_name(&self) -> &'static str {
        if self.is_dynamical() {
            "trajectory"
        } else {
            "sweep"
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::config("scenario", format!("unknown scenario `{s}`")))
    }
}

/// `id  description  [figure]` lines, one per scenario.
pub fn list_scenarios() -> String {
    let mut out = String::new();
    for id in ScenarioId::ALL {
        out.push_str(&format!(
            "{:<18} {}  [{}]\n",
            id.as_str(),
            id.description(),
            id.figure()
        ));
    }
    out
}

/// Where the expected value of a check comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// A number quoted in the source publication.
    Quoted,
    /// Follows directly from a limit case or definition.
    Trivial,
    /// Obtained from an independent analytic or numerical oracle.
    Derived,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    AtLeast,
    AtMost,
    /// |observed - expected| <= tolerance
    Within,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub provenance: Provenance,
    pub relation: Relation,
    pub expected: f64,
    pub tolerance: Option<f64>,
    pub observed: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl Check {
    pub fn at_least(name: impl Into<String>, provenance: Provenance, bound: f64, observed: f64) -> Self {
        Self {
            name: name.into(),
            provenance,
            relation: Relation::AtLeast,
            expected: bound,
            tolerance: None,
            observed,
            passed: observed >= bound,
            note: None,
        }
    }

    pub fn at_most(name: impl Into<String>, provenance: Provenance, bound: f64, observed: f64) -> Self {
        Self {
            name: name.into(),
            provenance,
            relation: Relation::AtMost,
            expected: bound,
            tolerance: None,
            observed,
            passed: observed <= bound,
            note: None,
        }
    }

    pub fn within(
        name: impl Into<String>,
        provenance: Provenance,
        expected: f64,
        tolerance: f64,
        observed: f64,
    ) -> Self {
        Self {
            name: name.into(),
            provenance,
            relation: Relation::Within,
            expected,
            tolerance: Some(tolerance),
            observed,
            passed: (observed - expected).abs() <= tolerance,
            note: None,
        }
    }

    /// Relative tolerance `rel * |expected|`.
    pub fn relative(name: impl Into<String>, provenance: Provenance, expected: f64, rel: f64, observed: f64) -> Self {
        Self::within(name, provenance, expected, rel * expected.abs(), observed)
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Numerical convergence gate evaluated on every scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    pub tolerance: f64,
    /// `None` when the gate does not apply (no time evolution).
    pub observed: Option<f64>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl Gate {
    fn measured(name: &str, tolerance: f64, observed: f64, note: Option<String>) -> Self {
        Self {
            name: name.into(),
            tolerance,
            observed: Some(observed),
            passed: observed <= tolerance,
            note,
        }
    }

    fn not_applicable(name: &str, tolerance: f64, why: &str) -> Self {
        Self {
            name: name.into(),
            tolerance,
            observed: None,
            passed: true,
            note: Some(why.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: ScenarioId,
    pub description: String,
    /// Resolved physical inputs (SI, rad/s and Hz).
    pub parameters: Value,
    pub frame: Option<FrameSummary>,
    /// Files written next to the report.
    pub outputs: Vec<String>,
    pub gates: Vec<Gate>,
    pub checks: Vec<Check>,
    pub advisories: Vec<String>,
    pub diagnostics: Value,
    pub error: Option<String>,
    pub passed: bool,
}

impl ScenarioReport {
    /// True iff no error occurred and every gate and check passed.
    pub fn all_passed(&self) -> bool {
        self.error.is_none() && self.gates.iter().all(|g| g.passed) && self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn gate(&self, name: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.name == name)
    }
}

/// Numerics of one scenario evaluation (base run or a gate variant).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Numerics {
    pub cutoff: Option<usize>,
    pub cutoff_shift: usize,
    pub step: StepOptions,
    pub samples: Option<usize>,
    /// Halved integrator step (Lindblad) or doubled sample density (exact propagation).
    pub refined: bool,
}

impl Numerics {
    fn base(cfg: &RunConfig) -> Self {
        Self {
            cutoff: cfg.numerics.cutoff,
            cutoff_shift: 0,
            step: cfg.numerics.step_options(),
            samples: cfg.numerics.samples,
            refined: false,
        }
    }

    fn halved(&self) -> Self {
        Self {
            step: self.step.halved(),
            refined: true,
            ..*self
        }
    }

    fn shifted(&self) -> Self {
        Self {
            cutoff_shift: CUTOFF_GATE_STEP,
            ..*self
        }
    }

    pub fn cutoff_or(&self, default: usize) -> usize {
        self.cutoff.unwrap_or(default) + self.cutoff_shift
    }

    /// Sample count for exactly-propagated runs (doubled when refined).
    pub fn exact_samples(&self, default: usize) -> usize {
        self.samples.unwrap_or(default) * if self.refined { 2 } else { 1 }
    }

    /// Sample count for integrated runs (the step, not the grid, is refined).
    pub fn integrated_samples(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }
}

/// What a scenario evaluation hands back to the driver.
pub(crate) struct Computed {
    pub table: Table,
    pub checks: Vec<Check>,
    pub parameters: Value,
    pub diagnostics: Value,
    pub frame: Option<FrameSummary>,
    pub advisories: Vec<String>,
    /// Largest trace (or norm) error over every run; `None` without dynamics.
    pub trace_error: Option<f64>,
}

/// Frame quantities for a dynamical scenario.
#[derive(Debug, Clone)]
pub(crate) struct ResolvedFrame {
    pub frame: SqueezedFrame,
    pub delta_q: f64,
    pub summary: FrameSummary,
    pub origin: Value,
}

/// Quoted values unless the configuration asks for a linearized or device-derived frame.
pub(crate) fn resolve_frame(cfg: &RunConfig, quoted: SqueezedFrame, quoted_delta_q: f64) -> Result<ResolvedFrame> {
    let conv = &cfg.conventions;
    let source = cfg.frame.source;
    let (frame, delta_q, origin) = match source {
        FrameSource::Quoted => (quoted, quoted_delta_q, Value::Null),
        FrameSource::Linearized => {
            let l = &cfg.linearized;
            let lin = LinearizedParams::direct(
                conv.angular(l.delta_m_hz),
                conv.angular(l.two_magnon_hz),
                conv.angular(l.delta_q_hz),
            );
            let frame = squeeze_frame(&lin, conv.angular(l.coupling_hz))?;
            (frame, lin.delta_q, json!({ "linearized": lin }))
        }
        FrameSource::Device => {
            let d = &cfg.device;
            let geo = SphereGeometry::new(d.radius)?;
            let placement = SpinPlacement::new(d.distance)?;
            let bias = BiasField::new(d.bias_field)?;
            let kerr = kerr_coefficient(&geo, &cfg.material, d.calibration)?;
            let g = bare_coupling(&geo, &placement, &cfg.material, d.calibration)?;
            let omega_m = magnon_frequency(&bias, &geo, &cfg.material, d.calibration)?;
            let omega_d = omega_m - conv.angular(cfg.drive.detuning_hz);
            let drive = DriveConfig::new(omega_d, conv.angular(cfg.drive.amplitude_hz))?;
            let selection = cfg.drive.root.map_or(RootSelection::LowestStable, RootSelection::Index);
            let kappa = conv.rate(cfg.dissipation.kappa_m);
            let steady = steady_amplitude(omega_m, kerr, kappa, &drive, selection)?;
            let omega_q = omega_d + conv.angular(d.spin_detuning_hz);
            let lin = linearize(omega_m, omega_q, kerr, steady.amplitude, &drive, conv.detuning);
            let frame = squeeze_frame(&lin, g)?;
            let origin = json!({
                "kerr_hz": kerr / (2.0 * PI),
                "bare_coupling_hz": g / (2.0 * PI),
                "magnon_frequency_hz": omega_m / (2.0 * PI),
                "drive_frequency_hz": omega_d / (2.0 * PI),
                "mean_field_roots": steady.roots,
                "selected_root": steady.selected,
                "linearized": lin,
            });
            (frame, lin.delta_q, origin)
        }
    };
    Ok(ResolvedFrame {
        summary: FrameSummary::new(source.name(), &frame, delta_q),
        frame,
        delta_q,
        origin,
    })
}

/// Largest absolute difference between matching columns of two tables. A
/// table sampled twice as densely is compared on the shared grid points.
fn table_difference(base: &Table, other: &Table) -> Result<f64> {
    if base.header != other.header {
        return Err(Error::Internal("gate variant produced different columns".into()));
    }
    let (n, m) = (base.rows(), other.rows());
    let stride = if m == n {
        1
    } else if n > 1 && m == 2 * (n - 1) + 1 {
        2
    } else {
        return Err(Error::Internal(format!("gate variant has {m} rows, base has {n}")));
    };
    let mut diff = 0.0f64;
    for (a, b) in base.columns.iter().zip(&other.columns).skip(1) {
        for (k, x) in a.iter().enumerate() {
            let y = b[k * stride];
            diff = diff.max(if x.is_finite() && y.is_finite() {
                (x - y).abs()
            } else {
                f64::INFINITY
            });
        }
    }
    Ok(diff)
}

fn compute(id: ScenarioId, cfg: &RunConfig, num: &Numerics) -> Result<Computed> {
    match id {
        ScenarioId::CouplingSweep => sweep::compute(cfg),
        ScenarioId::Rabi => rabi::compute(cfg, num),
        ScenarioId::Battery => battery::compute(cfg, num),
        ScenarioId::StateTransfer => two_spin::state_transfer(cfg, num),
        ScenarioId::IswapFidelity => two_spin::iswap_fidelity(cfg, num),
        ScenarioId::DispersiveCheck => two_spin::dispersive_check(cfg, num),
    }
}

fn evaluate(id: ScenarioId, cfg: &RunConfig) -> Result<(Computed, Vec<Gate>)> {
    let num = Numerics::base(cfg);
    let base = compute(id, cfg, &num)?;
    let gates = if id.is_dynamical() {
        let halved = compute(id, cfg, &num.halved())?;
        let shifted = compute(id, cfg, &num.shifted())?;
        let trace = base
            .trace_error
            .into_iter()
            .chain(halved.trace_error)
            .chain(shifted.trace_error)
            .fold(0.0, f64::max);
        vec![
            Gate::measured("trace-preservation", TRACE_GATE_TOL, trace, None),
            Gate::measured(
                "step-halving",
                CONVERGENCE_GATE_TOL,
                table_difference(&base.table, &halved.table)?,
                Some("max |change| of every reported series when the step is halved".into()),
            ),
            Gate::measured(
                "cutoff-plus-5",
                CONVERGENCE_GATE_TOL,
                table_difference(&base.table, &shifted.table)?,
                Some(format!(
                    "max |change| of every reported series when the Fock cutoff is raised by {CUTOFF_GATE_STEP}"
                )),
            ),
        ]
    } else {
        let why = "no time evolution";
        vec![
            Gate::not_applicable("trace-preservation", TRACE_GATE_TOL, why),
            Gate::not_applicable("step-halving", CONVERGENCE_GATE_TOL, why),
            Gate::not_applicable("cutoff-plus-5", CONVERGENCE_GATE_TOL, why),
        ]
    };
    Ok((base, gates))
}

/// Result of [`run`]: the report and the directory it was written to.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: ScenarioReport,
    pub dir: PathBuf,
}

impl RunOutcome {
    pub fn report_path(&self) -> PathBuf {
        self.dir.join("report.json")
    }
}

/// Evaluate the configured scenario and write its output directory.
///
/// Scenario failures (including instability of the requested frame) are
/// recorded in the report; only configuration and I/O problems are returned
/// as errors.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    let id = cfg
        .scenario
        .ok_or_else(|| Error::config("scenario", "no scenario selected"))?;
    cfg.validate()?;
    let mut resolved = cfg.clone();
    resolved.output.dir = Some(cfg.output_root());
    let dir = cfg.output_root().join(id.as_str());
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    // a failed run must not leave the previous run's data next to its report
    let table = id.table_name();
    for stale in [
        format!("{table}.csv"),
        format!("{table}.meta.json"),
        "frame.json".into(),
        "report.json".into(),
    ] {
        let path = dir.join(stale);
        if path.exists() {
            fs::remove_file(&path).map_err(|e| Error::io(&path, e))?;
        }
    }

    let mut report = ScenarioReport {
        scenario: id,
        description: id.description().into(),
        parameters: Value::Null,
        frame: None,
        outputs: Vec::new(),
        gates: Vec::new(),
        checks: Vec::new(),
        advisories: Vec::new(),
        diagnostics: Value::Null,
        error: None,
        passed: false,
    };

    write_json(&dir.join("params.json"), &resolved)?;
    report.outputs.push("params.json".into());

    match evaluate(id, cfg) {
        Ok((computed, gates)) => {
            let table_file = format!("{}.csv", id.table_name());
            let meta_file = format!("{}.meta.json", id.table_name());
            computed.table.write(&dir.join(&table_file))?;
            let sidecar = json!({
                "file": table_file,
                "columns": computed.table.header,
                "rows": computed.table.rows(),
                "number_format": "17 significant digits",
                "parameters": computed.parameters,
                "gates": gates,
                "config": resolved,
            });
            write_json(&dir.join(&meta_file), &sidecar)?;
            report.outputs.push(table_file);
            report.outputs.push(meta_file);
            if let Some(frame) = &computed.frame {
                write_json(&dir.join("frame.json"), frame)?;
                report.outputs.push("frame.json".into());
            }
            report.parameters = computed.parameters;
            report.frame = computed.frame;
            report.gates = gates;
            report.checks = computed.checks;
            report.advisories = computed.advisories;
            report.diagnostics = computed.diagnostics;
        }
        Err(e @ (Error::Config { .. } | Error::Io { .. })) => return Err(e),
        Err(e) => report.error = Some(e.to_string()),
    }
    report.outputs.push("report.json".into());
    report.passed = report.all_passed();
    write_json(&dir.join("report.json"), &report)?;
    Ok(RunOutcome { report, dir })
}

/// Read a report back from disk.
pub fn read_report(path: &Path) -> Result<ScenarioReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// First index `k` at or after `from` where `values[k]` is a local maximum at
/// least `floor`, or `None`.
pub(crate) fn first_peak(values: &[f64], floor: f64) -> Option<usize> {
    (1..values.len().saturating_sub(1))
        .find(|&k| values[k] >= floor && values[k] >= values[k - 1] && values[k] > values[k + 1])
}

/// Index of the maximum of `values[k]` over `times[k]` in `[lo, hi]`.
pub(crate) fn peak_in(times: &[f64], values: &[f64], lo: f64, hi: f64) -> Option<usize> {
    times
        .iter()
        .zip(values)
        .enumerate()
        .filter(|(_, (t, _))| **t >= lo && **t <= hi)
        .max_by(|a, b| a.1 .1.total_cmp(b.1 .1))
        .map(|(k, _)| k)
}

/// Maximize a smooth function on `[a, b]` by golden-section search.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in ScenarioId::ALL {
            assert_eq!(id.as_str().parse::<ScenarioId>().unwrap(), id);
            assert_eq!(serde_json::to_value(id).unwrap(), Value::from(id.as_str()));
        }
        assert!("nope".parse::<ScenarioId>().is_err());
    }

    #[test]
    fn listing() {
        let text = list_scenarios();
        assert_eq!(text.lines().count(), 6);
        assert!(text.contains("rabi"));
        assert!(text.contains("iswap-fidelity"));
    }

    #[test]
    fn check_relations() {
        assert!(Check::at_least("a", Provenance::Derived, 0.9, 0.95).passed);
        assert!(!Check::at_least("a", Provenance::Derived, 0.9, f64::NAN).passed);
        assert!(!Check::at_most("a", Provenance::Derived, 0.015, 0.02).passed);
        assert!(Check::relative("a", Provenance::Quoted, 1.5e3, 0.2, 1.7e3).passed);
        assert!(!Check::relative("a", Provenance::Quoted, 1.5e3, 0.2, 1.9e3).passed);
        let json = serde_json::to_value(Check::at_least("a", Provenance::Trivial, 1.0, 1.0)).unwrap();
        assert_eq!(json["provenance"], "trivial");
        assert_eq!(json["relation"], "at-least");
    }

    #[test]
    fn refined_tables_compare_on_shared_points() {
        let mut a = Table::new();
        a.push("time_s", vec![0.0, 1.0, 2.0]).push("x", vec![0.0, 1.0, 4.0]);
        let mut b = Table::new();
        b.push("time_s", vec![0.0, 0.5, 1.0, 1.5, 2.0])
            .push("x", vec![0.0, 0.25, 1.0, 2.25, 4.5]);
        assert_eq!(table_difference(&a, &b).unwrap(), 0.5);
        assert_eq!(table_difference(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn peak_helpers() {
        let v = [0.0, 0.1, 0.05, 0.6, 0.9, 0.7, 1.0, 0.2];
        assert_eq!(first_peak(&v, 0.5), Some(4));
        let t: Vec<f64> = (0..v.len()).map(|k| k as f64).collect();
        assert_eq!(peak_in(&t, &v, 0.0, 5.0), Some(4));
        let x = golden_max(|x| -(x - 0.3f64).powi(2), 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-9);
    }
}
