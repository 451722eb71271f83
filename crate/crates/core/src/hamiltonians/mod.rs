//! Hamiltonians of the driven Kerr-magnon / spin system.
//!
//! All builders take the target [`HilbertSpec`] and check its layout: the
//! magnon mode in slot 0 followed by one or more qubits. Frequencies are in
//! rad/s with hbar = 1.

mod frame;

pub use frame::{
    linearize, squeeze_frame, steady_amplitude, DetuningConvention, DriveConfig, LinearizedParams, MeanFieldRoot,
    RootSelection, SqueezedFrame, SteadyState,
};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fock::{annihilation, embed, qubit_ops, HilbertSpec, OperatorMatrix, Subsystem};

/// Embedded ladder operators for a magnon + spins layout.
pub struct ModeOperators {
    pub spec: HilbertSpec,
    pub magnon: OperatorMatrix,
    pub sigma_minus: Vec<OperatorMatrix>,
    pub sigma_z: Vec<OperatorMatrix>,
}

impl ModeOperators {
    pub fn new(spec: &HilbertSpec) -> Result<Self> {
        let cutoff = match spec.subsystems().first() {
            Some(Subsystem::Boson { cutoff }) => *cutoff,
            _ => return Err(Error::SpecMismatch("expected the magnon mode in slot 0".into())),
        };
        let spins = spec.qubit_slots();
        if spins.len() + 1 != spec.len() || spins.is_empty() {
            return Err(Error::SpecMismatch(format!(
                "expected one boson followed by qubits, got {:?}",
                spec.tags()
            )));
        }
        let q = qubit_ops();
        let magnon = embed(&annihilation(cutoff)?, 0, spec)?;
        let sigma_minus = spins
            .iter()
            .map(|&s| embed(&q.sigma_minus, s, spec))
            .collect::<Result<Vec<_>>>()?;
        let sigma_z = spins
            .iter()
            .map(|&s| embed(&q.sigma_z, s, spec))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spec: spec.clone(),
            magnon,
            sigma_minus,
            sigma_z,
        })
    }

    pub fn spins(&self) -> usize {
        self.sigma_minus.len()
    }

    pub fn number(&self) -> OperatorMatrix {
        &self.magnon.dagger() * &self.magnon
    }

    /// m^dag m + sum_i sigma_+^(i) sigma_-^(i)
    pub fn excitation_number(&self) -> OperatorMatrix {
        self.sigma_minus
            .iter()
            .fold(self.number(), |acc, s| &acc + &(&s.dagger() * s))
    }

    fn require_spins(&self, n: usize) -> Result<()> {
        if self.spins() != n {
            return Err(Error::SpecMismatch(format!(
                "expected {n} spin(s), layout has {}",
                self.spins()
            )));
        }
        Ok(())
    }

    /// sigma_+ m + m^dag sigma_- summed over spins
    fn exchange(&self) -> OperatorMatrix {
        let mut h = OperatorMatrix::zeros(&self.spec);
        for s in &self.sigma_minus {
            let t = &s.dagger() * &self.magnon;
            h = &h + &(&t + &t.dagger());
        }
        h
    }
}

/// H = (1/2) omega_q sigma_z + omega_m m^dag m - (K/2) m^dag m^dag m m + g (sigma_+ m + m^dag sigma_-).
pub fn kerr_hamiltonian(spec: &HilbertSpec, omega_q: f64, omega_m: f64, kerr: f64, g: f64) -> Result<OperatorMatrix> {
    let ops = ModeOperators::new(spec)?;
    ops.require_spins(1)?;
    let m = &ops.magnon;
    let md = m.dagger();
    let quartic = &(&(&md * &md) * m) * m;
    let h = &(&ops.sigma_z[0].scale(0.5 * omega_q) + &ops.number().scale(omega_m)) - &quartic.scale(0.5 * kerr);
    Ok(&h + &ops.exchange().scale(g))
}

/// Delta_m m^dag m - (1/2) K (m^2 + m^dag^2) on a single-boson space.
pub fn two_magnon_hamiltonian(cutoff: usize, lin: &LinearizedParams) -> Result<OperatorMatrix> {
    let m = annihilation(cutoff)?;
    let md = m.dagger();
    let n = &md * &m;
    let pair = &(&m * &m) + &(&md * &md);
    Ok(&n.scale(lin.delta_m) - &pair.scale(0.5 * lin.two_magnon))
}

#[derive(Debug, Clone)]
pub struct LinearizedHamiltonian {
    pub operator: OperatorMatrix,
    /// Delta_m > |K|
    pub stable: bool,
}

/// H = (1/2) Delta_q sigma_z + Delta_m m^dag m - (1/2) K (m^2 + m^dag^2) + g (sigma_+ m + m^dag sigma_-).
pub fn linearized_hamiltonian(spec: &HilbertSpec, lin: &LinearizedParams, g: f64) -> Result<LinearizedHamiltonian> {
    let ops = ModeOperators::new(spec)?;
    ops.require_spins(1)?;
    let m = &ops.magnon;
    let md = m.dagger();
    let pair = &(m * m) + &(&md * &md);
    let h = &(&ops.sigma_z[0].scale(0.5 * lin.delta_q) + &ops.number().scale(lin.delta_m))
        - &pair.scale(0.5 * lin.two_magnon);
    Ok(LinearizedHamiltonian {
        operator: &h + &ops.exchange().scale(g),
        stable: lin.is_stable(),
    })
}

/// H = (1/2) Delta_q sigma_z + Delta_s m_s^dag m_s + G (m_s^dag + m_s)(sigma_+ + sigma_-).
pub fn rabi_hamiltonian(spec: &HilbertSpec, frame: &SqueezedFrame, delta_q: f64) -> Result<OperatorMatrix> {
    let ops = ModeOperators::new(spec)?;
    ops.require_spins(1)?;
    let x_m = &ops.magnon + &ops.magnon.dagger();
    let x_q = &ops.sigma_minus[0] + &ops.sigma_minus[0].dagger();
    let h = &ops.sigma_z[0].scale(0.5 * delta_q) + &ops.number().scale(frame.delta_s);
    Ok(&h + &(&x_m * &x_q).scale(frame.coupling))
}

/// Coupling coefficients of the linearized model after the Bogoliubov transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BogoliubovCouplings {
    /// g cosh r_m, multiplying sigma_+ m_s + h.c.
    pub co_rotating: f64,
    /// g sinh r_m, multiplying sigma_+ m_s^dag + h.c.
    pub counter_rotating: f64,
}

impl BogoliubovCouplings {
    pub fn new(g: f64, squeezing: f64) -> Self {
        Self {
            co_rotating: g * squeezing.cosh(),
            counter_rotating: g * squeezing.sinh(),
        }
    }

    /// Magnitude of the terms dropped by the Rabi form: g e^{-r_m} / 2.
    pub fn residual(&self) -> f64 {
        0.5 * (self.co_rotating - self.counter_rotating)
    }
}

/// Linearized model in the squeezed frame with all coupling terms kept:
/// (1/2) Delta_q sigma_z + Delta_s m_s^dag m_s + g cosh r (sigma_+ m_s + h.c.) + g sinh r (sigma_+ m_s^dag + h.c.).
pub fn squeezed_exact_hamiltonian(
    spec: &HilbertSpec,
    lin: &LinearizedParams,
    g: f64,
    delta_q: f64,
) -> Result<OperatorMatrix> {
    let frame = squeeze_frame(lin, g)?;
    let r = frame.squeezing.unwrap_or(0.0);
    let coeffs = BogoliubovCouplings::new(g, r);
    let ops = ModeOperators::new(spec)?;
    ops.require_spins(1)?;
    let sp = ops.sigma_minus[0].dagger();
    let co = &sp * &ops.magnon;
    let counter = &sp * &ops.magnon.dagger();
    let h = &ops.sigma_z[0].scale(0.5 * delta_q) + &ops.number().scale(frame.delta_s);
    let h = &h + &(&co + &co.dagger()).scale(coeffs.co_rotating);
    Ok(&h + &(&counter + &counter.dagger()).scale(coeffs.counter_rotating))
}

/// H = Delta_s m_s^dag m_s + sum_i [(1/2) Delta_q sigma_z^(i) + G (m_s^dag sigma_-^(i) + h.c.)].
///
/// With one spin this is the Jaynes-Cummings model.
pub fn tavis_cummings_hamiltonian(spec: &HilbertSpec, frame: &SqueezedFrame, delta_q: f64) -> Result<OperatorMatrix> {
    let ops = ModeOperators::new(spec)?;
    let mut h = ops.number().scale(frame.delta_s);
    for z in &ops.sigma_z {
        h = &h + &z.scale(0.5 * delta_q);
    }
    Ok(&h + &ops.exchange().scale(frame.coupling))
}

/// Rotating-wave validity: G << Delta_+ = Delta_s + Delta_q.
pub fn rwa_advisory(frame: &SqueezedFrame, delta_q: f64) -> Option<String> {
    let delta_plus = frame.delta_s + delta_q;
    (frame.coupling >= delta_plus.abs() / 10.0).then(|| {
        format!(
            "rotating-wave approximation questionable: G = {:.4e} >= (Delta_s + Delta_q)/10 = {:.4e} rad/s",
            frame.coupling,
            delta_plus.abs() / 10.0
        )
    })
}

/// Dispersive validity: G << |Delta_- = Delta_s - Delta_q|.
pub fn dispersive_advisory(coupling: f64, delta_minus: f64) -> Option<String> {
    (coupling >= delta_minus.abs() / 10.0).then(|| {
        format!(
            "dispersive approximation questionable: G = {coupling:.4e} >= |Delta_-|/10 = {:.4e} rad/s",
            delta_minus.abs() / 10.0
        )
    })
}

/// Frame quantities as written to `frame.json` (frequencies in Hz).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSummary {
    pub source: String,
    pub squeezing: Option<f64>,
    pub delta_s_hz: f64,
    pub coupling_hz: f64,
    pub delta_q_hz: f64,
    pub stability_margin: Option<f64>,
    pub advisories: Vec<String>,
}

impl FrameSummary {
    pub fn new(source: impl Into<String>, frame: &SqueezedFrame, delta_q: f64) -> Self {
        Self {
            source: source.into(),
            squeezing: frame.squeezing,
            delta_s_hz: frame.delta_s / (2.0 * PI),
            coupling_hz: frame.coupling / (2.0 * PI),
            delta_q_hz: delta_q / (2.0 * PI),
            stability_margin: frame.stability_margin,
            advisories: rwa_advisory(frame, delta_q).into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveCoupling {
    /// omega_eff = (1 + 2 <m_s^dag m_s>) Delta_q^2 / Delta_-
    pub omega_eff: f64,
    /// G_eff = G^2 / Delta_-
    pub g_eff: f64,
}

impl EffectiveCoupling {
    pub fn new(delta_q: f64, delta_minus: f64, coupling: f64, magnon_occupation: f64) -> Result<Self> {
        if delta_minus == 0.0 || !delta_minus.is_finite() {
            return Err(Error::SingularDetuning(format!(
                "Delta_- = Delta_s - Delta_q must be non-zero, got {delta_minus}"
            )));
        }
        Ok(Self {
            omega_eff: (1.0 + 2.0 * magnon_occupation) * delta_q * delta_q / delta_minus,
            g_eff: coupling * coupling / delta_minus,
        })
    }
}

/// Two-qubit exchange Hamiltonian
/// (1/2) omega_eff (sigma_z^(1) + sigma_z^(2)) + G_eff (sigma_+^(1) sigma_-^(2) + h.c.).
pub fn effective_exchange_hamiltonian(
    delta_q: f64,
    delta_minus: f64,
    coupling: f64,
    magnon_occupation: f64,
) -> Result<OperatorMatrix> {
    let eff = EffectiveCoupling::new(delta_q, delta_minus, coupling, magnon_occupation)?;
    exchange_hamiltonian(&eff)
}

pub fn exchange_hamiltonian(eff: &EffectiveCoupling) -> Result<OperatorMatrix> {
    let spec = HilbertSpec::qubits(2)?;
    let q = qubit_ops();
    let z1 = embed(&q.sigma_z, 0, &spec)?;
    let z2 = embed(&q.sigma_z, 1, &spec)?;
    let flip = &embed(&q.sigma_plus, 0, &spec)? * &embed(&q.sigma_minus, 1, &spec)?;
    let h = (&z1 + &z2).scale(0.5 * eff.omega_eff);
    Ok(&h + &(&flip + &flip.dagger()).scale(eff.g_eff))
}
