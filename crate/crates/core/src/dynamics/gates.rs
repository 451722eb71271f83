//! Two-qubit process reconstruction and iSWAP fidelities.
//!
//! Basis order is `s1 * 2 + s2` with `g = 0`, `e = 1`, i.e. gg, ge, eg, ee.

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use super::{propagate_lindblad, EvolutionDiagnostics, LindbladModel, StepOptions, UnitaryPropagator};
use crate::error::{Error, Result};
use crate::fock::{c, partial_trace, CMatrix, CVector, HilbertSpec, OperatorMatrix, QuantumState, C64};

const D: usize = 4;
/// Allowed deviation of tr E(|i><j|) from delta_ij.
pub const TRACE_PRESERVATION_TOL: f64 = 1e-6;

/// |gg> -> |gg>, |ge> -> -i|eg>, |eg> -> -i|ge>, |ee> -> |ee>.
pub fn iswap_matrix() -> CMatrix {
    let mut u = CMatrix::zeros(D, D);
    u[(0, 0)] = c(1.0, 0.0);
    u[(3, 3)] = c(1.0, 0.0);
    u[(1, 2)] = c(0.0, -1.0);
    u[(2, 1)] = c(0.0, -1.0);
    u
}

pub fn iswap_ideal_map(state: &QuantumState) -> Result<QuantumState> {
    let spec = state.spec();
    if *spec != HilbertSpec::qubits(2)? {
        return Err(Error::SpecMismatch(format!(
            "iSWAP acts on two qubits, got {:?}",
            spec.tags()
        )));
    }
    let u = iswap_matrix();
    Ok(match state {
        QuantumState::Pure { spec, vector } => QuantumState::Pure {
            spec: spec.clone(),
            vector: &u * vector,
        },
        QuantumState::Mixed { spec, matrix } => QuantumState::Mixed {
            spec: spec.clone(),
            matrix: &u * matrix * u.adjoint(),
        },
    })
}

fn pairs() -> impl Iterator<Item = (usize, usize)> {
    (0..D).flat_map(|i| (i + 1..D).map(move |j| (i, j)))
}

fn projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// The 16 two-qubit inputs: the 4 basis states, then (|i> + |j>)/sqrt2 for
/// each pair i < j, then (|i> + i|j>)/sqrt2 for each pair.
pub fn process_inputs() -> Vec<CMatrix> {
    let basis = |k: usize| {
        let mut v = CVector::zeros(D);
        v[k] = c(1.0, 0.0);
        v
    };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out: Vec<CMatrix> = (0..D).map(|k| projector(&basis(k))).collect();
    for phase in [c(1.0, 0.0), c(0.0, 1.0)] {
        for (i, j) in pairs() {
            out.push(projector(&((basis(i) + basis(j) * phase) * c(s, 0.0))));
        }
    }
    out
}

/// A linear map on 4x4 matrices stored by its action on |i><j|.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    images: Vec<CMatrix>,
}

impl Channel {
    /// Rebuild the map from its outputs on [`process_inputs`], in order.
    pub fn reconstruct(outputs: &[CMatrix]) -> Result<Self> {
        if outputs.len() != 16 || outputs.iter().any(|m| m.shape() != (D, D)) {
            return Err(Error::DimensionMismatch {
                expected: 16,
                found: outputs.len(),
            });
        }
        let mut images = vec![CMatrix::zeros(D, D); D * D];
        for k in 0..D {
            images[k * D + k] = outputs[k].clone();
        }
        let half = c(0.5, 0.5);
        for (p, (i, j)) in pairs().enumerate() {
            let plus = &outputs[D + p];
            let plus_i = &outputs[D + 6 + p];
            // |i><j| = P+ + i P+i - (1 + i)/2 (|i><i| + |j><j|)
            let e_ij = plus + plus_i * c(0.0, 1.0) - (&outputs[i] + &outputs[j]) * half;
            images[j * D + i] = e_ij.adjoint();
            images[i * D + j] = e_ij;
        }
        Ok(Self { images })
    }

    pub fn from_unitary(u: &CMatrix) -> Self {
        let mut images = Vec::with_capacity(D * D);
        for i in 0..D {
            for j in 0..D {
                let mut e = CMatrix::zeros(D, D);
                e[(i, j)] = c(1.0, 0.0);
                images.push(u * e * u.adjoint());
            }
        }
        Self { images }
    }

    pub fn identity() -> Self {
        Self::from_unitary(&CMatrix::identity(D, D))
    }

    /// E(|i><j|)
    pub fn image(&self, i: usize, j: usize) -> &CMatrix {
        &self.images[i * D + j]
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(D, D);
        for i in 0..D {
            for j in 0..D {
                if rho[(i, j)] != c(0.0, 0.0) {
                    out += self.image(i, j) * rho[(i, j)];
                }
            }
        }
        out
    }

    /// max |tr E(|i><j|) - delta_ij|
    pub fn trace_preservation_error(&self) -> f64 {
        let mut err = 0.0f64;
        for i in 0..D {
            for j in 0..D {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((self.image(i, j).trace() - c(target, 0.0)).norm());
            }
        }
        err
    }

    /// M_ab = sum_ij conj(U_ai) U_bj E(|i><j|)_ab, so that the process
    /// fidelity against Z^dag U with Z = diag(z) is Re sum_ab z_a conj(z_b) M_ab / d^2.
    fn overlap(&self, u: &CMatrix) -> CMatrix {
        let mut m = CMatrix::zeros(D, D);
        for i in 0..D {
            for j in 0..D {
                let e = self.image(i, j);
                for a in 0..D {
                    for b in 0..D {
                        m[(a, b)] += u[(a, i)].conj() * u[(b, j)] * e[(a, b)];
                    }
                }
            }
        }
        m
    }
}

/// F_pro = (1/d^2) sum_ij <i|U^dag E(|i><j|) U|j>.
pub fn process_fidelity(channel: &Channel, u: &CMatrix) -> f64 {
    let m = channel.overlap(u);
    m.iter().fold(c(0.0, 0.0), |acc, z| acc + z).re / (D * D) as f64
}

/// (d F_pro + 1) / (d + 1)
pub fn average_fidelity(process: f64) -> f64 {
    (D as f64 * process + 1.0) / (D as f64 + 1.0)
}

fn local_phases(phi1: f64, phi2: f64) -> [C64; D] {
    [
        c(1.0, 0.0),
        C64::from_polar(1.0, phi2),
        C64::from_polar(1.0, phi1),
        C64::from_polar(1.0, phi1 + phi2),
    ]
}

fn phased_process(m: &CMatrix, phi1: f64, phi2: f64) -> f64 {
    let z = local_phases(phi1, phi2);
    let mut acc = 0.0;
    for a in 0..D {
        for b in 0..D {
            acc += (z[a] * z[b].conj() * m[(a, b)]).re;
        }
    }
    acc / (D * D) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateFidelity {
    /// Average gate fidelity against the target as given.
    pub raw: f64,
    /// Average gate fidelity maximized over local z rotations on both qubits.
    pub phase_stripped: f64,
    /// Local phases (phi1, phi2) attaining `phase_stripped`.
    pub local_phases: [f64; 2],
}

const PHASE_GRID: usize = 64;

/// Average gate fidelity of `channel` against the unitary `target`, raw and
/// with the best pair of single-qubit z rotations applied after the channel.
pub fn gate_fidelity(channel: &Channel, target: &CMatrix) -> Result<GateFidelity> {
    let tp = channel.trace_preservation_error();
    if tp > TRACE_PRESERVATION_TOL {
        return Err(Error::Diagnostics(format!(
            "reconstructed process is not trace preserving (error {tp:e} > {TRACE_PRESERVATION_TOL:e})"
        )));
    }
    let m = channel.overlap(target);
    let raw = phased_process(&m, 0.0, 0.0);

    let step = 2.0 * PI / PHASE_GRID as f64;
    let mut best = (raw, 0.0, 0.0);
    for a in 0..PHASE_GRID {
        for b in 0..PHASE_GRID {
            let (p1, p2) = (a as f64 * step, b as f64 * step);
            let f = phased_process(&m, p1, p2);
            if f > best.0 {
                best = (f, p1, p2);
            }
        }
    }
    // compass search from the best grid point
    let mut h = step;
    while h > 1e-10 {
        let mut moved = false;
        for (d1, d2) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
            let f = phased_process(&m, best.1 + d1, best.2 + d2);
            if f > best.0 {
                best = (f, best.1 + d1, best.2 + d2);
                moved = true;
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    Ok(GateFidelity {
        raw: average_fidelity(raw),
        phase_stripped: average_fidelity(best.0),
        local_phases: [best.1.rem_euclid(2.0 * PI), best.2.rem_euclid(2.0 * PI)],
    })
}

/// Population of |ge> after the channel acts on |eg><eg|.
pub fn state_transfer_fidelity(channel: &Channel) -> f64 {
    channel.image(2, 2)[(1, 1)].re
}

/// Channels at each grid point for a model containing exactly two qubits.
/// Every other subsystem starts in its ground level and is traced out.
#[derive(Debug, Clone)]
pub struct ChannelSeries {
    pub times: Vec<f64>,
    pub channels: Vec<Channel>,
    pub diagnostics: EvolutionDiagnostics,
}

struct Embedding {
    spec: HilbertSpec,
    qubits: [usize; 2],
    index: [usize; D],
}

impl Embedding {
    fn new(spec: &HilbertSpec) -> Result<Self> {
        let q = spec.qubit_slots();
        if q.len() != 2 {
            return Err(Error::SpecMismatch(format!(
                "process reconstruction needs exactly two qubits, got {:?}",
                spec.tags()
            )));
        }
        let mut index = [0; D];
        for (k, slot) in index.iter_mut().enumerate() {
            let mut levels = vec![0; spec.len()];
            levels[q[0]] = k / 2;
            levels[q[1]] = k % 2;
            *slot = spec.encode(&levels)?;
        }
        Ok(Self {
            spec: spec.clone(),
            qubits: [q[0], q[1]],
            index,
        })
    }

    fn lift(&self, rho: &CMatrix) -> Result<QuantumState> {
        let n = self.spec.dim();
        let mut full = CMatrix::zeros(n, n);
        for a in 0..D {
            for b in 0..D {
                full[(self.index[a], self.index[b])] = rho[(a, b)];
            }
        }
        QuantumState::mixed(self.spec.clone(), full)
    }

    fn lower(&self, rho: &CMatrix) -> Result<CMatrix> {
        Ok(partial_trace(rho, &self.spec, &self.qubits)?.1)
    }
}

fn merge(into: &mut EvolutionDiagnostics, d: &EvolutionDiagnostics) {
    into.max_trace_error = into.max_trace_error.max(d.max_trace_error);
    into.max_hermiticity_error = into.max_hermiticity_error.max(d.max_hermiticity_error);
    into.min_eigenvalue = into.min_eigenvalue.min(d.min_eigenvalue);
    into.reduced_dim = into.reduced_dim.max(d.reduced_dim);
    into.total_steps += d.total_steps;
    into.max_step = into.max_step.max(d.max_step);
    into.step_rule_value = into.step_rule_value.max(d.step_rule_value);
}

fn assemble(times: &[f64], runs: Vec<(Vec<CMatrix>, EvolutionDiagnostics)>) -> Result<ChannelSeries> {
    let mut diagnostics = EvolutionDiagnostics {
        min_eigenvalue: f64::INFINITY,
        ..Default::default()
    };
    for (_, d) in &runs {
        merge(&mut diagnostics, d);
    }
    let channels = (0..times.len())
        .map(|n| {
            let outputs: Vec<CMatrix> = runs.iter().map(|(r, _)| r[n].clone()).collect();
            Channel::reconstruct(&outputs)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChannelSeries {
        times: times.to_vec(),
        channels,
        diagnostics,
    })
}

/// Evolve all 16 inputs under the master equation (in parallel).
pub fn lindblad_channels(model: &LindbladModel, times: &[f64], options: &StepOptions) -> Result<ChannelSeries> {
    let emb = Embedding::new(model.spec())?;
    let runs = process_inputs()
        .par_iter()
        .map(|input| {
            let rho0 = emb.lift(input)?;
            let mut reduced = Vec::with_capacity(times.len());
            let diag = propagate_lindblad(model, &rho0, times, options, |_, rho| {
                reduced.push(emb.lower(rho)?);
                Ok(())
            })?;
            Ok((reduced, diag))
        })
        .collect::<Result<Vec<_>>>()?;
    assemble(times, runs)
}

/// Closed-system version of [`lindblad_channels`] using the exact propagator.
///
/// Only the columns of exp(-iHt) on the embedded two-qubit block are formed.
pub fn unitary_channels(h: &OperatorMatrix, times: &[f64]) -> Result<ChannelSeries> {
    let emb = Embedding::new(h.spec())?;
    let prop = UnitaryPropagator::new(h)?;
    let n = emb.spec.dim();
    let mut block = CMatrix::zeros(n, D);
    for (k, &i) in emb.index.iter().enumerate() {
        block[(i, k)] = c(1.0, 0.0);
    }
    let columns: Vec<CMatrix> = times.par_iter().map(|&t| prop.columns(&block, t)).collect();
    let runs = process_inputs()
        .par_iter()
        .map(|input| {
            let mut diag = EvolutionDiagnostics {
                reduced_dim: n,
                ..Default::default()
            };
            let reduced = columns
                .iter()
                .map(|w| {
                    let rho = w * input * w.adjoint();
                    diag.max_trace_error = diag.max_trace_error.max((rho.trace() - c(1.0, 0.0)).norm());
                    emb.lower(&rho)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((reduced, diag))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut series = assemble(times, runs)?;
    series.diagnostics.min_eigenvalue = 0.0;
    Ok(series)
}
