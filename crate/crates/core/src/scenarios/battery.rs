//! Quantum battery: a single spin charged by a magnon Fock state |m>.
//!
//! Stored energy E(t) = Delta_q P_e(t) (hbar = 1) and average charging power
//! P(t) = E(t) / t, reported in units of Delta_q and Delta_q G respectively.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde_json::json;

use super::{first_peak, golden_max, resolve_frame, Check, Computed, Numerics, Provenance};
use crate::config::RunConfig;
use crate::dynamics::export::Table;
use crate::dynamics::{evolve_unitary, uniform_grid, Trajectory, UnitaryPropagator};
use crate::error::{Error, Result};
use crate::fock::{HilbertSpec, QuantumState};
use crate::hamiltonians::{tavis_cummings_hamiltonian, SqueezedFrame};

pub const DEFAULT_SAMPLES: usize = 600;
/// Default cutoff is m + this margin.
pub const CUTOFF_MARGIN: usize = 10;

/// Smallest admissible cutoff (Fock dimension) for initial excitation `m`.
pub fn minimum_cutoff(m: usize) -> usize {
    m + 2
}

struct Charge {
    m: usize,
    times: Vec<f64>,
    traj: Trajectory,
    /// P_e at exactly pi/(2G)
    at_quarter: f64,
    /// refined time of the first full charge
    peak_time: f64,
    /// E / Delta_q
    energy: Vec<f64>,
    /// P / (Delta_q G)
    power: Vec<f64>,
}

fn charge(cfg: &RunConfig, num: &Numerics, frame: &SqueezedFrame, delta_q: f64, m: usize) -> Result<Charge> {
    let cutoff = num.cutoff_or(m + CUTOFF_MARGIN);
    if cutoff < minimum_cutoff(m) {
        return Err(Error::config(
            "numerics.cutoff",
            format!(
                "cutoff {cutoff} cannot hold |{m}> plus one excitation; need at least {}",
                minimum_cutoff(m)
            ),
        ));
    }
    let spec = HilbertSpec::magnon_spins(cutoff, 1)?;
    let h = tavis_cummings_hamiltonian(&spec, frame, delta_q)?;
    let psi0 = QuantumState::basis(&spec, &[m, 0])?;
    let quarter = PI / (2.0 * frame.coupling);
    let times = uniform_grid(cfg.battery.duration * quarter, num.exact_samples(DEFAULT_SAMPLES));
    let traj = evolve_unitary(&h, &psi0, &times, &[])?;

    let prop = UnitaryPropagator::new(&h)?;
    let QuantumState::Pure { vector, .. } = &psi0 else {
        unreachable!()
    };
    let coeffs = prop.to_eigenbasis(vector);
    let excited: Vec<usize> = (0..spec.dim()).filter(|&i| spec.decode(i)[1] == 1).collect();
    let p_e = |t: f64| {
        let psi = prop.evolve_coeffs(&coeffs, t);
        excited.iter().map(|&i| psi[i].norm_sqr()).sum::<f64>()
    };

    let spin = traj.series("spin1").expect("spin population");
    let top = spin.iter().copied().fold(0.0, f64::max);
    let peak_time = match first_peak(spin, 0.5 * top) {
        Some(k) => golden_max(p_e, times[k - 1], times[k + 1], 1e-6 * (times[1] - times[0])),
        None => f64::NAN,
    };
    let energy = spin.to_vec();
    let power = energy
        .iter()
        .zip(&times)
        .map(|(e, &t)| if t > 0.0 { e / (frame.coupling * t) } else { 0.0 })
        .collect();
    Ok(Charge {
        m,
        at_quarter: p_e(quarter),
        peak_time,
        times,
        traj,
        energy,
        power,
    })
}

pub(crate) fn compute(cfg: &RunConfig, num: &Numerics) -> Result<Computed> {
    let b = &cfg.battery;
    let g = cfg.conventions.angular(b.coupling_hz);
    let delta = b.detuning_ratio * g;
    let resolved = resolve_frame(cfg, SqueezedFrame::quoted(delta, g), delta)?;
    let (frame, delta_q) = (resolved.frame, resolved.delta_q);
    let coupling = frame.coupling;
    let quarter = PI / (2.0 * coupling);

    let runs = b
        .excitations
        .par_iter()
        .map(|&m| charge(cfg, num, &frame, delta_q, m))
        .collect::<Result<Vec<_>>>()?;

    let mut table = Table::new();
    table.push("time_s", runs[0].times.clone());
    for r in &runs {
        table
            .push(
                format!("magnon_m{}", r.m),
                r.traj.series("magnon").expect("magnon").to_vec(),
            )
            .push(format!("spin_m{}", r.m), r.traj.series("spin1").expect("spin").to_vec())
            .push(format!("energy_m{}", r.m), r.energy.clone())
            .push(format!("power_m{}", r.m), r.power.clone());
    }

    let p_max = |r: &Charge| r.power.iter().copied().fold(0.0, f64::max);
    let mut checks = Vec::new();
    let single = runs.iter().find(|r| r.m == 1);
    if let Some(one) = single {
        checks.push(
            Check::at_least("P_e(pi/(2G)) for m = 1", Provenance::Quoted, 0.999, one.at_quarter)
                .note("battery fully charged at pi/(2G)"),
        );
    }
    for r in &runs {
        let mf = r.m as f64;
        checks.push(
            Check::relative(
                format!("first full-charge time for m = {} (s)", r.m),
                Provenance::Derived,
                quarter / mf.sqrt(),
                0.02,
                r.peak_time,
            )
            .note("|m,g> <-> |m-1,e> oscillates at sqrt(m) G"),
        );
        // sin^2 x <= x^2 gives E(t) <= Delta_q m G^2 t^2 for all t
        let k = 1;
        let bound = mf * coupling * r.times[k];
        checks.push(
            Check::at_most(
                format!(
                    "charging power at the first sample for m = {} (units of Delta_q G)",
                    r.m
                ),
                Provenance::Trivial,
                bound * (1.0 + 1e-9),
                r.power[k],
            )
            .note("P(t) <= Delta_q m G^2 t, so P -> 0 as t -> 0"),
        );
        if let (Some(one), true) = (single, r.m != 1) {
            checks.push(Check::relative(
                format!("t({})/t(1)", r.m),
                Provenance::Derived,
                1.0 / mf.sqrt(),
                0.02,
                r.peak_time / one.peak_time,
            ));
            checks.push(
                Check::at_least(
                    format!("P_max({})/P_max(1)", r.m),
                    Provenance::Derived,
                    0.9 * mf.sqrt(),
                    p_max(r) / p_max(one),
                )
                .note("sqrt(m) speed-up with 10% slack"),
            );
        }
    }

    let diagnostics: Vec<_> = runs
        .iter()
        .map(|r| {
            json!({
                "m": r.m,
                "cutoff": r.traj.spec.dims()[0],
                "p_e_at_quarter_period": r.at_quarter,
                "first_full_charge_time_s": r.peak_time,
                "max_power": p_max(r),
                "evolution": r.traj.diagnostics,
            })
        })
        .collect();
    let trace_error = runs
        .iter()
        .map(|r| r.traj.diagnostics.max_trace_error)
        .fold(0.0, f64::max);

    Ok(Computed {
        table,
        checks,
        parameters: json!({
            "coupling_rad_s": coupling,
            "delta_s_rad_s": frame.delta_s,
            "delta_q_rad_s": delta_q,
            "excitations": b.excitations,
            "duration_s": b.duration * quarter,
            "energy_unit_rad_s": delta_q,
            "power_unit_rad_s2": delta_q * coupling,
            "frame_origin": resolved.origin,
        }),
        diagnostics: json!({ "runs": diagnostics }),
        advisories: resolved.summary.advisories.clone(),
        frame: Some(resolved.summary),
        trace_error: Some(trace_error),
    })
}
