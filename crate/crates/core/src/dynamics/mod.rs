//! Time evolution: closed (eigendecomposition) and open (Lindblad, RK4).
//!
//! The master equation is integrated in the form
//! `drho/dt = -i[H, rho] + sum_k rate_k D[L_k] rho`, which is the same
//! generator as `i[rho, H] + ...`.
//!
//! Before integrating, the problem is restricted to the smallest coordinate
//! subspace containing the support of `rho0` that is closed under `H`, every
//! `L_k` and every `L_k^dag L_k`. On that subspace the restricted equation is
//! exact, so the reduction is only a speed-up.

pub mod export;
pub mod gates;

use std::collections::BTreeSet;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    c, max_abs, min_eigenvalue, CMatrix, CVector, HilbertSpec, OperatorMatrix, QuantumState, Subsystem, C64,
};

/// Upper bound on step * (spectral radius of H + max decay rate).
pub const STEP_RULE_LIMIT: f64 = 0.1;
/// Allowed trace drift over a Lindblad run.
pub const TRACE_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct CollapseTerm {
    pub label: String,
    pub operator: OperatorMatrix,
    pub rate: f64,
}

impl CollapseTerm {
    pub fn new(label: impl Into<String>, operator: OperatorMatrix, rate: f64) -> Self {
        Self {
            label: label.into(),
            operator,
            rate,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LindbladModel {
    hamiltonian: OperatorMatrix,
    collapse: Vec<CollapseTerm>,
}

impl LindbladModel {
    pub fn new(hamiltonian: OperatorMatrix, collapse: Vec<CollapseTerm>) -> Result<Self> {
        let scale = hamiltonian.max_abs().max(f64::MIN_POSITIVE);
        let herm = hamiltonian.hermiticity_error();
        if herm > 1e-12 * scale {
            return Err(Error::NonHermitian(herm));
        }
        for term in &collapse {
            if term.operator.spec() != hamiltonian.spec() {
                return Err(Error::SpecMismatch(format!(
                    "collapse operator `{}` acts on {:?}, Hamiltonian on {:?}",
                    term.label,
                    term.operator.spec().tags(),
                    hamiltonian.spec().tags()
                )));
            }
            if !(term.rate >= 0.0 && term.rate.is_finite()) {
                return Err(Error::Domain(format!(
                    "rate of `{}` must be finite and >= 0, got {}",
                    term.label, term.rate
                )));
            }
        }
        Ok(Self { hamiltonian, collapse })
    }

    pub fn closed(hamiltonian: OperatorMatrix) -> Result<Self> {
        Self::new(hamiltonian, Vec::new())
    }

    pub fn hamiltonian(&self) -> &OperatorMatrix {
        &self.hamiltonian
    }

    pub fn collapse(&self) -> &[CollapseTerm] {
        &self.collapse
    }

    pub fn spec(&self) -> &HilbertSpec {
        self.hamiltonian.spec()
    }

    pub fn max_rate(&self) -> f64 {
        self.collapse.iter().map(|t| t.rate).fold(0.0, f64::max)
    }
}

/// Integrator step control.
///
/// With `step = None` each sample interval `dt` is split into
/// `ceil(dt * nu / fraction)` RK4 steps, `nu` being the spectral radius of H
/// plus the largest `rate * ||L^dag L||` on the reachable subspace. An
/// explicit `step` is used as given and rejected if it breaks the step rule.
/// `refinement` multiplies the substep count (2 = halved step).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepOptions {
    pub step: Option<f64>,
    pub fraction: f64,
    pub refinement: usize,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            step: None,
            fraction: 0.01,
            refinement: 1,
        }
    }
}

impl StepOptions {
    pub fn halved(&self) -> Self {
        Self {
            refinement: self.refinement * 2,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(h) = self.step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Domain(format!("integrator step must be > 0, got {h}")));
            }
        }
        if !(self.fraction > 0.0 && self.fraction <= STEP_RULE_LIMIT) {
            return Err(Error::Domain(format!(
                "step fraction must lie in (0, {STEP_RULE_LIMIT}], got {}",
                self.fraction
            )));
        }
        if self.refinement == 0 {
            return Err(Error::Domain("step refinement must be >= 1".into()));
        }
        Ok(())
    }

    fn substeps(&self, dt: f64, nu: f64) -> Result<usize> {
        let k = match self.step {
            Some(h) => {
                let k = (dt / h * (1.0 - 1e-12)).ceil().max(1.0) as usize;
                let used = dt / k as f64;
                if used * nu > STEP_RULE_LIMIT {
                    return Err(Error::StepSize {
                        step: used,
                        value: used * nu,
                        limit: STEP_RULE_LIMIT,
                    });
                }
                k
            }
            None => (dt * nu / self.fraction).ceil().max(1.0) as usize,
        };
        Ok(k * self.refinement)
    }
}

#[derive(Debug, Clone)]
pub struct Observable {
    pub label: String,
    pub operator: OperatorMatrix,
}

impl Observable {
    pub fn new(label: impl Into<String>, operator: OperatorMatrix) -> Self {
        Self {
            label: label.into(),
            operator,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub label: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EvolutionDiagnostics {
    /// max |tr rho - 1| (or |<psi|psi> - 1|) over the grid
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
    /// Dimension actually propagated after the subspace reduction.
    pub reduced_dim: usize,
    pub total_steps: usize,
    pub max_step: f64,
    /// step * nu for the largest step taken
    pub step_rule_value: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub spec: HilbertSpec,
    pub times: Vec<f64>,
    /// One population series per subsystem (in slot order), then observables.
    pub series: Vec<Series>,
    pub final_state: QuantumState,
    pub diagnostics: EvolutionDiagnostics,
}

impl Trajectory {
    pub fn series(&self, label: &str) -> Option<&[f64]> {
        self.series
            .iter()
            .find(|s| s.label == label)
            .map(|s| s.values.as_slice())
    }
}

/// Population label of a subsystem: `magnon` for the boson, `spin<k>` (1-based) for qubits.
pub fn population_label(spec: &HilbertSpec, slot: usize) -> String {
    match spec.subsystems()[slot] {
        Subsystem::Boson { .. } => {
            let bosons_before = spec.subsystems()[..slot]
                .iter()
                .filter(|s| matches!(s, Subsystem::Boson { .. }))
                .count();
            if bosons_before == 0 {
                "magnon".into()
            } else {
                format!("magnon{}", bosons_before + 1)
            }
        }
        Subsystem::Qubit => {
            let k = spec.qubit_slots().iter().position(|&s| s == slot).unwrap_or(0);
            format!("spin{}", k + 1)
        }
    }
}

/// `<m^dag m>` for the boson or `<sigma_+ sigma_->` for a qubit.
pub fn populations(traj: &Trajectory, slot: usize) -> Result<&[f64]> {
    if slot >= traj.spec.len() {
        return Err(Error::Domain(format!(
            "subsystem {slot} not in space of {} subsystems",
            traj.spec.len()
        )));
    }
    Ok(&traj.series[slot].values)
}

/// Level-weighted diagonal sum: sum_i rho_ii * level_slot(i), for every slot.
pub fn subsystem_populations(spec: &HilbertSpec, diagonal: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; spec.len()];
    for i in 0..spec.dim() {
        let p = diagonal(i);
        if p == 0.0 {
            continue;
        }
        for (slot, level) in spec.decode(i).into_iter().enumerate() {
            out[slot] += p * level as f64;
        }
    }
    out
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Domain("time grid is empty".into()));
    }
    if times[0] < 0.0 || !times.iter().all(|t| t.is_finite()) {
        return Err(Error::Domain("time grid must be finite and start at t >= 0".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("time grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Uniform grid of `samples + 1` points on `[0, t_end]`.
pub fn uniform_grid(t_end: f64, samples: usize) -> Vec<f64> {
    (0..=samples).map(|k| t_end * k as f64 / samples as f64).collect()
}

fn check_observables(spec: &HilbertSpec, observables: &[Observable]) -> Result<()> {
    for o in observables {
        if o.operator.spec() != spec {
            return Err(Error::SpecMismatch(format!(
                "observable `{}` acts on a different space",
                o.label
            )));
        }
    }
    Ok(())
}

fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(m.clone());
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Exact propagator `exp(-i H t)` from one eigendecomposition.
#[derive(Debug, Clone)]
pub struct UnitaryPropagator {
    spec: HilbertSpec,
    energies: Vec<f64>,
    vectors: CMatrix,
}

impl UnitaryPropagator {
    pub fn new(h: &OperatorMatrix) -> Result<Self> {
        let scale = h.max_abs().max(f64::MIN_POSITIVE);
        if h.hermiticity_error() > 1e-12 * scale {
            return Err(Error::NonHermitian(h.hermiticity_error()));
        }
        let (energies, vectors) = hermitian_eigen(h.matrix());
        Ok(Self {
            spec: h.spec().clone(),
            energies,
            vectors,
        })
    }

    pub fn spec(&self) -> &HilbertSpec {
        &self.spec
    }

    pub fn spectral_radius(&self) -> f64 {
        self.energies.iter().fold(0.0, |m, e| m.max(e.abs()))
    }

    /// Coefficients of `psi` in the eigenbasis.
    pub fn to_eigenbasis(&self, psi: &CVector) -> CVector {
        self.vectors.adjoint() * psi
    }

    /// exp(-i H t) psi, given `coeffs = to_eigenbasis(psi)`.
    pub fn evolve_coeffs(&self, coeffs: &CVector, t: f64) -> CVector {
        let phased = CVector::from_iterator(
            coeffs.len(),
            coeffs
                .iter()
                .zip(&self.energies)
                .map(|(a, e)| a * C64::from_polar(1.0, -e * t)),
        );
        &self.vectors * phased
    }

    pub fn evolve(&self, psi: &CVector, t: f64) -> CVector {
        self.evolve_coeffs(&self.to_eigenbasis(psi), t)
    }

    /// The unitary matrix exp(-i H t).
    pub fn unitary(&self, t: f64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (j, e) in self.energies.iter().enumerate() {
            let phase = C64::from_polar(1.0, -e * t);
            for v in scaled.column_mut(j).iter_mut() {
                *v *= phase;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// exp(-i H t) applied to every column of `block`.
    pub fn columns(&self, block: &CMatrix, t: f64) -> CMatrix {
        let mut coeffs = self.vectors.adjoint() * block;
        for (j, e) in self.energies.iter().enumerate() {
            let phase = C64::from_polar(1.0, -e * t);
            for v in coeffs.row_mut(j).iter_mut() {
                *v *= phase;
            }
        }
        &self.vectors * coeffs
    }
}

/// psi(t) = exp(-iHt) psi0 on every grid point.
pub fn evolve_unitary(
    h: &OperatorMatrix,
    psi0: &QuantumState,
    times: &[f64],
    observables: &[Observable],
) -> Result<Trajectory> {
    let QuantumState::Pure { spec, vector } = psi0 else {
        return Err(Error::InvalidState("unitary evolution needs a pure state".into()));
    };
    if spec != h.spec() {
        return Err(Error::SpecMismatch(
            "initial state and Hamiltonian spaces differ".into(),
        ));
    }
    check_times(times)?;
    check_observables(spec, observables)?;
    let prop = UnitaryPropagator::new(h)?;
    let coeffs = prop.to_eigenbasis(vector);

    let mut series = init_series(spec, observables, times.len());
    let mut diag = EvolutionDiagnostics {
        reduced_dim: spec.dim(),
        min_eigenvalue: 0.0,
        ..Default::default()
    };
    let mut last = vector.clone();
    for &t in times {
        let psi = prop.evolve_coeffs(&coeffs, t);
        diag.max_trace_error = diag.max_trace_error.max((psi.norm_squared() - 1.0).abs());
        let pops = subsystem_populations(spec, |i| psi[i].norm_sqr());
        for (slot, p) in pops.into_iter().enumerate() {
            series[slot].values.push(p);
        }
        for (k, o) in observables.iter().enumerate() {
            let v = (psi.adjoint() * o.operator.matrix() * &psi)[(0, 0)].re;
            series[spec.len() + k].values.push(v);
        }
        last = psi;
    }
    if diag.max_trace_error > NORM_DRIFT_TOL {
        return Err(Error::Diagnostics(format!(
            "norm drift {:e} exceeds {NORM_DRIFT_TOL:e}",
            diag.max_trace_error
        )));
    }
    Ok(Trajectory {
        spec: spec.clone(),
        times: times.to_vec(),
        series,
        final_state: QuantumState::Pure {
            spec: spec.clone(),
            vector: last,
        },
        diagnostics: diag,
    })
}

/// Allowed norm drift of unitary runs.
pub const NORM_DRIFT_TOL: f64 = 1e-10;

fn init_series(spec: &HilbertSpec, observables: &[Observable], n: usize) -> Vec<Series> {
    (0..spec.len())
        .map(|slot| population_label(spec, slot))
        .chain(observables.iter().map(|o| o.label.clone()))
        .map(|label| Series {
            label,
            values: Vec::with_capacity(n),
        })
        .collect()
}

/// Smallest index set containing `support` and closed under every matrix in `ops`.
pub fn reachable_subspace(support: &[usize], ops: &[&CMatrix]) -> Vec<usize> {
    let mut seen: BTreeSet<usize> = support.iter().copied().collect();
    let mut stack: Vec<usize> = support.to_vec();
    while let Some(j) = stack.pop() {
        for op in ops {
            for i in 0..op.nrows() {
                if op[(i, j)] != C64::new(0.0, 0.0) && seen.insert(i) {
                    stack.push(i);
                }
            }
        }
    }
    seen.into_iter().collect()
}

fn restrict(m: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])])
}

fn expand(m: &CMatrix, idx: &[usize], dim: usize) -> CMatrix {
    let mut out = CMatrix::zeros(dim, dim);
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            out[(i, j)] = m[(a, b)];
        }
    }
    out
}

/// Lindblad generator restricted to a coordinate subspace, in the form
/// `drho = -i (H_nh rho - rho H_nh^dag) + sum_k rate_k L_k rho L_k^dag`.
/// Largest reduced dimension propagated through the d^2 x d^2 step map.
const SUPEROPERATOR_MAX_DIM: usize = 12;

struct Generator {
    h_nh: CMatrix,
    jumps: Vec<(f64, CMatrix, CMatrix)>,
    nu: f64,
}

impl Generator {
    fn new(model: &LindbladModel, idx: &[usize]) -> Self {
        let h = restrict(model.hamiltonian.matrix(), idx);
        let (energies, _) = hermitian_eigen(&h);
        let mut nu = energies.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        let mut h_nh = h;
        let mut jumps = Vec::new();
        let mut dissipative = 0.0f64;
        for term in &model.collapse {
            if term.rate == 0.0 {
                continue;
            }
            let l = restrict(term.operator.matrix(), idx);
            let ldl = l.adjoint() * &l;
            let (ev, _) = hermitian_eigen(&ldl);
            let norm = ev.iter().fold(0.0f64, |m, e| m.max(e.abs()));
            // the step rule names the bare rate; the operator norm makes it safe for bosons
            dissipative = dissipative.max(term.rate * norm.max(1.0));
            h_nh -= ldl * c(0.0, 0.5 * term.rate);
            let ld = l.adjoint();
            jumps.push((term.rate, l, ld));
        }
        nu += dissipative;
        Self { h_nh, jumps, nu }
    }

    fn apply(&self, rho: &CMatrix) -> CMatrix {
        let a = &self.h_nh * rho;
        let mut out = (&a - a.adjoint()) * c(0.0, -1.0);
        for (rate, l, ld) in &self.jumps {
            out += (l * rho * ld) * c(*rate, 0.0);
        }
        out
    }

    /// `apply` without assuming a hermitian argument.
    fn apply_general(&self, x: &CMatrix) -> CMatrix {
        let mut out = (&self.h_nh * x - x * self.h_nh.adjoint()) * c(0.0, -1.0);
        for (rate, l, ld) in &self.jumps {
            out += (l * x * ld) * c(*rate, 0.0);
        }
        out
    }

    /// Matrix of the generator acting on column-major vec(rho).
    fn superoperator(&self) -> CMatrix {
        let d = self.h_nh.nrows();
        let mut sup = CMatrix::zeros(d * d, d * d);
        for b in 0..d * d {
            let mut e = CMatrix::zeros(d, d);
            e[(b % d, b / d)] = c(1.0, 0.0);
            sup.column_mut(b).copy_from_slice(self.apply_general(&e).as_slice());
        }
        sup
    }

    /// k RK4 steps of size h as one linear map on vec(rho): for a linear
    /// time-independent generator a step is exactly sum_{n<=4} (hL)^n / n!.
    fn step_power(sup: &CMatrix, h: f64, k: usize) -> CMatrix {
        let n = sup.nrows();
        let hl = sup * c(h, 0.0);
        let mut step = CMatrix::identity(n, n);
        let mut term = CMatrix::identity(n, n);
        for order in 1..=4 {
            term = &term * &hl * c(1.0 / order as f64, 0.0);
            step += &term;
        }
        let mut out = CMatrix::identity(n, n);
        let (mut base, mut e) = (step, k);
        while e > 0 {
            if e & 1 == 1 {
                out = &out * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        out
    }

    fn rk4(&self, rho: &CMatrix, h: f64) -> CMatrix {
        let k1 = self.apply(rho);
        let k2 = self.apply(&(rho + &k1 * c(0.5 * h, 0.0)));
        let k3 = self.apply(&(rho + &k2 * c(0.5 * h, 0.0)));
        let k4 = self.apply(&(rho + &k3 * c(h, 0.0)));
        rho + (k1 + (k2 + k3) * c(2.0, 0.0) + k4) * c(h / 6.0, 0.0)
    }
}

fn support_of(rho: &CMatrix) -> Vec<usize> {
    (0..rho.nrows())
        .filter(|&i| rho[(i, i)].re > 0.0 || rho.row(i).iter().any(|z| z.norm_sqr() > 0.0))
        .collect()
}

/// Integrate the master equation and hand the full-space state at every grid
/// point to `visit`. Returns the run diagnostics.
pub fn propagate_lindblad(
    model: &LindbladModel,
    rho0: &QuantumState,
    times: &[f64],
    options: &StepOptions,
    mut visit: impl FnMut(usize, &CMatrix) -> Result<()>,
) -> Result<EvolutionDiagnostics> {
    options.validate()?;
    check_times(times)?;
    if rho0.spec() != model.spec() {
        return Err(Error::SpecMismatch("initial state and model spaces differ".into()));
    }
    let full = rho0.density_matrix();
    crate::fock::validate_density(&full)?;
    let dim = full.nrows();

    let mut ops: Vec<&CMatrix> = vec![model.hamiltonian.matrix()];
    let products: Vec<CMatrix> = model
        .collapse
        .iter()
        .filter(|t| t.rate > 0.0)
        .map(|t| t.operator.matrix().adjoint() * t.operator.matrix())
        .collect();
    ops.extend(
        model
            .collapse
            .iter()
            .filter(|t| t.rate > 0.0)
            .map(|t| t.operator.matrix()),
    );
    ops.extend(products.iter());
    let idx = reachable_subspace(&support_of(&full), &ops);
    let generator = Generator::new(model, &idx);

    let mut diag = EvolutionDiagnostics {
        reduced_dim: idx.len(),
        min_eigenvalue: f64::INFINITY,
        ..Default::default()
    };
    let mut rho = restrict(&full, &idx);
    let d = idx.len();
    // small reduced spaces: propagate each interval with a cached k-step map
    let sup = (d <= SUPEROPERATOR_MAX_DIM).then(|| generator.superoperator());
    let mut cached: Option<(usize, f64, CMatrix)> = None;
    let mut t = 0.0;
    for (n, &target) in times.iter().enumerate() {
        let dt = target - t;
        if dt > 0.0 {
            let k = options.substeps(dt, generator.nu)?;
            let h = dt / k as f64;
            if let Some(sup) = &sup {
                let reuse = matches!(&cached, Some((ck, ch, _)) if *ck == k && (ch - h).abs() <= 1e-12 * h);
                if !reuse {
                    cached = Some((k, h, Generator::step_power(sup, h, k)));
                }
                let map = &cached.as_ref().expect("cached interval map").2;
                let v = map * CVector::from_column_slice(rho.as_slice());
                rho = CMatrix::from_column_slice(d, d, v.as_slice());
            } else {
                for _ in 0..k {
                    rho = generator.rk4(&rho, h);
                }
            }
            diag.total_steps += k;
            diag.max_step = diag.max_step.max(h);
            diag.step_rule_value = diag.step_rule_value.max(h * generator.nu);
            t = target;
        }
        let tr = rho.trace();
        diag.max_trace_error = diag.max_trace_error.max((tr - c(1.0, 0.0)).norm());
        diag.max_hermiticity_error = diag.max_hermiticity_error.max(max_abs(&(&rho - rho.adjoint())));
        diag.min_eigenvalue = diag.min_eigenvalue.min(min_eigenvalue(&rho));
        visit(n, &expand(&rho, &idx, dim))?;
    }
    if diag.max_trace_error > TRACE_TOL {
        return Err(Error::Diagnostics(format!(
            "trace drift {:e} exceeds {TRACE_TOL:e}",
            diag.max_trace_error
        )));
    }
    if diag.min_eigenvalue < crate::fock::PSD_FLOOR {
        return Err(Error::Diagnostics(format!(
            "density matrix eigenvalue {:e} below floor {:e}",
            diag.min_eigenvalue,
            crate::fock::PSD_FLOOR
        )));
    }
    Ok(diag)
}

/// Lindblad evolution recording subsystem populations and `observables`.
pub fn evolve_lindblad(
    model: &LindbladModel,
    rho0: &QuantumState,
    times: &[f64],
    observables: &[Observable],
    options: &StepOptions,
) -> Result<Trajectory> {
    let spec = model.spec().clone();
    check_observables(&spec, observables)?;
    let mut series = init_series(&spec, observables, times.len());
    let mut last = CMatrix::zeros(spec.dim(), spec.dim());
    let diagnostics = propagate_lindblad(model, rho0, times, options, |_, rho| {
        let pops = subsystem_populations(&spec, |i| rho[(i, i)].re);
        for (slot, p) in pops.into_iter().enumerate() {
            series[slot].values.push(p);
        }
        for (k, o) in observables.iter().enumerate() {
            series[spec.len() + k]
                .values
                .push(crate::fock::trace_product(rho, o.operator.matrix()).re);
        }
        last.clone_from(rho);
        Ok(())
    })?;
    Ok(Trajectory {
        final_state: QuantumState::Mixed {
            spec: spec.clone(),
            matrix: last,
        },
        spec,
        times: times.to_vec(),
        series,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{annihilation, embed, qubit_ops};
    use crate::hamiltonians::{tavis_cummings_hamiltonian, ModeOperators, SqueezedFrame};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn qubit() -> HilbertSpec {
        HilbertSpec::qubits(1).unwrap()
    }

    #[test]
    fn static_qubit_populations() {
        let h = qubit_ops().sigma_z.scale(0.5 * 3.0);
        let psi = QuantumState::basis(&qubit(), &[1]).unwrap();
        let tr = evolve_unitary(&h, &psi, &uniform_grid(10.0, 50), &[]).unwrap();
        assert!(populations(&tr, 0).unwrap().iter().all(|p| (p - 1.0).abs() < 1e-14));
        assert!(populations(&tr, 1).is_err());
    }

    #[test]
    fn population_values() {
        let spec = qubit();
        let h = OperatorMatrix::zeros(&spec);
        let g = QuantumState::basis(&spec, &[0]).unwrap();
        let plus = QuantumState::pure(
            spec.clone(),
            CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]).unscale(2f64.sqrt()),
        )
        .unwrap();
        let grid = [0.0];
        assert_eq!(evolve_unitary(&h, &g, &grid, &[]).unwrap().series[0].values, vec![0.0]);
        let p = evolve_unitary(&h, &plus, &grid, &[]).unwrap().series[0].values[0];
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn resonant_exchange_at_quarter_period() {
        let g = 0.37;
        let spec = HilbertSpec::magnon_spins(5, 1).unwrap();
        let h = tavis_cummings_hamiltonian(&spec, &SqueezedFrame::quoted(1.0, g), 1.0).unwrap();
        let psi = QuantumState::basis(&spec, &[1, 0]).unwrap();
        let t = PI / (2.0 * g);
        let tr = evolve_unitary(&h, &psi, &[0.0, t / 2.0, t], &[Observable::new("energy", h.clone())]).unwrap();
        let spin = tr.series("spin1").unwrap();
        assert!((spin[2] - 1.0).abs() < 1e-12);
        assert!((spin[1] - 0.5).abs() < 1e-12);
        assert!(tr.series("magnon").unwrap()[2].abs() < 1e-12);
        let e = tr.series("energy").unwrap();
        assert!(e.iter().all(|x| (x - e[0]).abs() < 1e-10));
    }

    #[test]
    fn unitary_rejects_bad_input() {
        let spec = qubit();
        let h = OperatorMatrix::new(
            spec.clone(),
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]),
        )
        .unwrap();
        let psi = QuantumState::basis(&spec, &[0]).unwrap();
        assert!(matches!(
            evolve_unitary(&h, &psi, &[0.0], &[]),
            Err(Error::NonHermitian(_))
        ));
        let z = qubit_ops().sigma_z;
        assert!(evolve_unitary(&z, &psi, &[1.0, 0.5], &[]).is_err());
        assert!(evolve_unitary(&z, &psi.clone().into_mixed(), &[0.0], &[]).is_err());
    }

    #[test]
    fn amplitude_damping() {
        let gamma = 0.8;
        let q = qubit_ops();
        let model = LindbladModel::new(
            q.sigma_z.scale(0.5 * 2.0),
            vec![CollapseTerm::new("sigma_minus", q.sigma_minus.clone(), gamma)],
        )
        .unwrap();
        let rho0 = QuantumState::basis(&qubit(), &[1]).unwrap();
        let grid = uniform_grid(3.0, 30);
        let tr = evolve_lindblad(&model, &rho0, &grid, &[], &StepOptions::default()).unwrap();
        for (t, p) in grid.iter().zip(populations(&tr, 0).unwrap()) {
            assert!((p - (-gamma * t).exp()).abs() < 1e-9, "t = {t}");
        }
        assert!(tr.diagnostics.max_trace_error < 1e-12);
        assert!(tr.diagnostics.step_rule_value <= STEP_RULE_LIMIT);
    }

    #[test]
    fn boson_decay() {
        let kappa = 1.3;
        let spec = HilbertSpec::boson(6).unwrap();
        let a = annihilation(6).unwrap();
        let n = &a.dagger() * &a;
        let model = LindbladModel::new(n.scale(4.0), vec![CollapseTerm::new("m", a, kappa)]).unwrap();
        let rho0 = QuantumState::basis(&spec, &[1]).unwrap();
        let grid = uniform_grid(2.0, 20);
        let tr = evolve_lindblad(&model, &rho0, &grid, &[], &StepOptions::default()).unwrap();
        for (t, p) in grid.iter().zip(&tr.series[0].values) {
            assert!((p - (-kappa * t).exp()).abs() < 1e-9);
        }
        assert_eq!(tr.diagnostics.reduced_dim, 2);
    }

    #[test]
    fn zero_rates_match_unitary() {
        let spec = HilbertSpec::magnon_spins(6, 2).unwrap();
        let frame = SqueezedFrame::quoted(1.2, 0.15);
        let h = tavis_cummings_hamiltonian(&spec, &frame, 0.9).unwrap();
        let ops = ModeOperators::new(&spec).unwrap();
        let model = LindbladModel::new(
            h.clone(),
            vec![
                CollapseTerm::new("m", ops.magnon.clone(), 0.0),
                CollapseTerm::new("s1", ops.sigma_minus[0].clone(), 0.0),
            ],
        )
        .unwrap();
        let psi = QuantumState::basis(&spec, &[1, 1, 0]).unwrap();
        let grid = uniform_grid(40.0, 80);
        let u = evolve_unitary(&h, &psi, &grid, &[]).unwrap();
        let l = evolve_lindblad(&model, &psi, &grid, &[], &StepOptions::default()).unwrap();
        for (a, b) in u.series.iter().zip(&l.series) {
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn reduction_is_exact() {
        let spec = HilbertSpec::magnon_spins(5, 1).unwrap();
        let ops = ModeOperators::new(&spec).unwrap();
        let h = tavis_cummings_hamiltonian(&spec, &SqueezedFrame::quoted(1.0, 0.2), 0.9).unwrap();
        let model = LindbladModel::new(
            h,
            vec![
                CollapseTerm::new("m", ops.magnon.clone(), 0.05),
                CollapseTerm::new("s", ops.sigma_minus[0].clone(), 0.02),
            ],
        )
        .unwrap();
        let rho0 = QuantumState::basis(&spec, &[1, 0]).unwrap();
        let grid = uniform_grid(15.0, 30);
        let fixed = StepOptions {
            step: Some(0.01),
            ..Default::default()
        };
        let reduced = evolve_lindblad(&model, &rho0, &grid, &[], &fixed).unwrap();
        assert_eq!(reduced.diagnostics.reduced_dim, 3);

        // same evolution from a full-support start: mix in a vanishing weight on every level
        let mut full = rho0.density_matrix() * c(1.0 - 1e-300, 0.0);
        for i in 0..spec.dim() {
            full[(i, i)] += c(1e-300 / spec.dim() as f64, 0.0);
        }
        let unreduced_state = QuantumState::mixed(spec.clone(), full).unwrap();
        let unreduced = evolve_lindblad(&model, &unreduced_state, &grid, &[], &fixed).unwrap();
        assert_eq!(unreduced.diagnostics.reduced_dim, spec.dim());
        for (a, b) in reduced.series.iter().zip(&unreduced.series) {
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() < 1e-12, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn reachable_subspace_closure() {
        let a = annihilation(5).unwrap();
        let ad = a.dagger();
        assert_eq!(reachable_subspace(&[2], &[a.matrix()]), vec![0, 1, 2]);
        assert_eq!(reachable_subspace(&[2], &[ad.matrix()]), vec![2, 3, 4]);
        assert_eq!(reachable_subspace(&[0], &[a.matrix()]), vec![0]);
    }

    #[test]
    fn explicit_step_rule() {
        let q = qubit_ops();
        let model = LindbladModel::closed(q.sigma_z.scale(10.0)).unwrap();
        let rho0 = QuantumState::basis(&qubit(), &[1]).unwrap();
        let too_big = StepOptions {
            step: Some(0.05),
            ..Default::default()
        };
        assert!(matches!(
            evolve_lindblad(&model, &rho0, &[0.0, 1.0], &[], &too_big),
            Err(Error::StepSize { .. })
        ));
        let ok = StepOptions {
            step: Some(0.005),
            ..Default::default()
        };
        let tr = evolve_lindblad(&model, &rho0, &[0.0, 1.0], &[], &ok).unwrap();
        assert_eq!(tr.diagnostics.total_steps, 200);
        assert_eq!(
            evolve_lindblad(&model, &rho0, &[0.0, 1.0], &[], &ok.halved())
                .unwrap()
                .diagnostics
                .total_steps,
            400
        );
    }

    #[test]
    fn rejects_invalid_models() {
        let q = qubit_ops();
        assert!(LindbladModel::new(
            q.sigma_z.clone(),
            vec![CollapseTerm::new("s", q.sigma_minus.clone(), -1.0)]
        )
        .is_err());
        assert!(LindbladModel::new(q.sigma_minus.clone(), vec![]).is_err());
        let two = HilbertSpec::qubits(2).unwrap();
        let z2 = embed(&q.sigma_z, 0, &two).unwrap();
        assert!(LindbladModel::new(z2, vec![CollapseTerm::new("s", q.sigma_minus.clone(), 1.0)]).is_err());
        let model = LindbladModel::closed(q.sigma_z.clone()).unwrap();
        let bad = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.7, 0.0), c(0.7, 0.0)]));
        assert!(QuantumState::mixed(qubit(), bad.clone()).is_err());
        let forged = QuantumState::Mixed {
            spec: qubit(),
            matrix: bad,
        };
        assert!(evolve_lindblad(&model, &forged, &[0.0], &[], &StepOptions::default()).is_err());
    }

    #[test]
    fn tavis_cummings_conserves_excitations_in_time() {
        let spec = HilbertSpec::magnon_spins(6, 2).unwrap();
        let ops = ModeOperators::new(&spec).unwrap();
        let h = tavis_cummings_hamiltonian(&spec, &SqueezedFrame::quoted(2.0, 0.3), 1.7).unwrap();
        let psi = QuantumState::basis(&spec, &[2, 1, 0]).unwrap();
        let tr = evolve_unitary(
            &h,
            &psi,
            &uniform_grid(30.0, 100),
            &[Observable::new("n_exc", ops.excitation_number())],
        )
        .unwrap();
        let n = tr.series("n_exc").unwrap();
        let mean = n.iter().sum::<f64>() / n.len() as f64;
        let var = n.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n.len() as f64;
        assert!(var < 1e-10);
    }

    #[test]
    fn unitary_matrix_matches_vector_evolution() {
        let spec = HilbertSpec::magnon_spins(4, 1).unwrap();
        let h = tavis_cummings_hamiltonian(&spec, &SqueezedFrame::quoted(1.0, 0.3), 0.8).unwrap();
        let prop = UnitaryPropagator::new(&h).unwrap();
        let psi = QuantumState::basis(&spec, &[1, 0]).unwrap();
        let QuantumState::Pure { vector, .. } = psi else {
            unreachable!()
        };
        let u = prop.unitary(2.3);
        assert!((&u * &vector - prop.evolve(&vector, 2.3)).norm() < 1e-12);
        assert!(max_abs(&(u.adjoint() * &u - CMatrix::identity(8, 8))) < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn lindblad_preserves_trace_and_positivity(
            gamma in 0.0f64..2.0, kappa in 0.0f64..2.0, g in 0.0f64..1.0, det in -1.0f64..1.0,
        ) {
            let spec = HilbertSpec::magnon_spins(4, 1).unwrap();
            let ops = ModeOperators::new(&spec).unwrap();
            let h = tavis_cummings_hamiltonian(&spec, &SqueezedFrame::quoted(1.0 + det, g), 1.0).unwrap();
            let model = LindbladModel::new(h, vec![
                CollapseTerm::new("m", ops.magnon.clone(), kappa),
                CollapseTerm::new("s", ops.sigma_minus[0].clone(), gamma),
            ]).unwrap();
            let rho0 = QuantumState::basis(&spec, &[2, 1]).unwrap();
            let tr = evolve_lindblad(&model, &rho0, &uniform_grid(5.0, 10), &[], &StepOptions::default()).unwrap();
            prop_assert!(tr.diagnostics.max_trace_error < 1e-8);
            prop_assert!(tr.diagnostics.max_hermiticity_error < 1e-10);
            prop_assert!(tr.diagnostics.min_eigenvalue > -1e-8);
        }
    }

    #[test]
    fn step_map_matches_stepwise_rk4() {
        let spec = HilbertSpec::magnon_spins(3, 1).unwrap();
        let h = tavis_cummings_hamiltonian(&spec, &SqueezedFrame::quoted(1.1, 0.4), 0.9).unwrap();
        let ops = crate::hamiltonians::ModeOperators::new(&spec).unwrap();
        let model = LindbladModel::new(
            h,
            vec![
                CollapseTerm::new("m", ops.magnon.clone(), 0.2),
                CollapseTerm::new("s", ops.sigma_minus[0].clone(), 0.05),
            ],
        )
        .unwrap();
        let idx: Vec<usize> = (0..spec.dim()).collect();
        let g = Generator::new(&model, &idx);
        let mut rho = QuantumState::basis(&spec, &[1, 0]).unwrap().density_matrix();
        rho[(0, 2)] = c(0.1, 0.05);
        rho[(2, 0)] = c(0.1, -0.05);
        let (step, k) = (0.01, 37);
        let map = Generator::step_power(&g.superoperator(), step, k);
        let v = map * CVector::from_column_slice(rho.as_slice());
        let mut r = rho.clone();
        for _ in 0..k {
            r = g.rk4(&r, step);
        }
        let diff = max_abs(&(CMatrix::from_column_slice(spec.dim(), spec.dim(), v.as_slice()) - r));
        assert!(diff < 1e-13, "{diff}");
    }
}
