//! Device-level coupling constants of a magnetic nanosphere.
//!
//! Everything returned here is an angular frequency in rad/s. The two
//! closed-form expressions used for the Kerr coefficient and the spin-magnon
//! coupling are not dimensionally consistent when evaluated in SI units with
//! tabulated material constants, so each of them comes in two flavours:
//!
//! * `Formula` evaluates the closed-form expression literally.
//! * `Anchored` keeps the parameter dependence of the expression but pins its
//!   overall scale to a reference point (128 Hz at R = 50 nm for
//!   the Kerr coefficient, 1.5 kHz at R = 30 nm, d = 6 nm for the coupling).
//!
//! `Anchored` is the default for both.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CODATA 2018 values.
pub mod constants {
    /// Vacuum permeability (N/A^2).
    pub const MU_0: f64 = 1.256_637_062_12e-6;
    /// Bohr magneton (J/T).
    pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
    /// Reduced Planck constant (J s).
    pub const HBAR: f64 = 1.054_571_817e-34;
}

/// Kerr coefficient reference: K/2pi = 128 Hz at R = 50 nm.
pub const KERR_REFERENCE_HZ: f64 = 128.0;
pub const KERR_REFERENCE_RADIUS: f64 = 50e-9;

/// Coupling reference: g/2pi = 1.5 kHz at R = 30 nm, d = 6 nm.
pub const COUPLING_REFERENCE_HZ: f64 = 1.5e3;
pub const COUPLING_REFERENCE_RADIUS: f64 = 30e-9;
pub const COUPLING_REFERENCE_DISTANCE: f64 = 6e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Calibration {
    /// Literal SI evaluation of the closed-form expression.
    Formula,
    /// Expression rescaled so the default material reproduces the reference point.
    #[default]
    Anchored,
}

/// Material constants of the magnet and the spin probe.
///
/// Defaults describe YIG: M = 1.4e5 A/m, |K_an| = 610 J/m^3 (positive sign
/// selects the [100] axis, K > 0), rho_s = 2.1e28 m^-3, g_e = 2, s = 5/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialParams {
    /// Saturation magnetization M (A/m).
    pub saturation_magnetization: f64,
    /// First-order anisotropy constant K_an (J/m^3).
    pub anisotropy_constant: f64,
    /// Spin density rho_s (m^-3).
    pub spin_density: f64,
    /// Electron g-factor.
    pub g_factor: f64,
    /// Gyromagnetic ratio (rad s^-1 T^-1); `g_factor * mu_B / hbar` when not set.
    pub gyromagnetic_ratio: Option<f64>,
    /// Spin quantum number s of the magnetic ions.
    pub spin: f64,
    pub mu_0: f64,
    pub bohr_magneton: f64,
    pub hbar: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self {
            saturation_magnetization: 1.4e5,
            anisotropy_constant: 610.0,
            spin_density: 2.1e28,
            g_factor: 2.0,
            gyromagnetic_ratio: None,
            spin: 2.5,
            mu_0: constants::MU_0,
            bohr_magneton: constants::BOHR_MAGNETON,
            hbar: constants::HBAR,
        }
    }
}

impl MaterialParams {
    pub fn gamma(&self) -> f64 {
        self.gyromagnetic_ratio
            .unwrap_or(self.g_factor * self.bohr_magneton / self.hbar)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.saturation_magnetization > 0.0) {
            return Err(Error::Domain("saturation magnetization must be > 0".into()));
        }
        if !(self.spin_density > 0.0) {
            return Err(Error::Domain("spin density must be > 0".into()));
        }
        if self.gamma() == 0.0 || !self.gamma().is_finite() {
            return Err(Error::Domain("gyromagnetic ratio must be finite and non-zero".into()));
        }
        for (name, v) in [
            ("mu_0", self.mu_0),
            ("bohr_magneton", self.bohr_magneton),
            ("hbar", self.hbar),
        ] {
            if !(v > 0.0) {
                return Err(Error::Domain(format!("{name} must be > 0")));
            }
        }
        Ok(())
    }

    /// The shared prefactor 2 mu0 K_an gamma^2 / M^2.
    fn anisotropy_prefactor(&self) -> f64 {
        let gamma = self.gamma();
        2.0 * self.mu_0 * self.anisotropy_constant * gamma * gamma
            / (self.saturation_magnetization * self.saturation_magnetization)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereGeometry {
    radius: f64,
}

impl SphereGeometry {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain(format!("sphere radius must be > 0, got {radius}")));
        }
        Ok(Self { radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn volume(&self) -> f64 {
        4.0 * PI * self.radius.powi(3) / 3.0
    }
}

/// Distance of the spin from the sphere surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinPlacement {
    distance: f64,
}

impl SpinPlacement {
    pub fn new(distance: f64) -> Result<Self> {
        if !(distance >= 0.0) || !distance.is_finite() {
            return Err(Error::Domain(format!("spin distance must be >= 0, got {distance}")));
        }
        Ok(Self { distance })
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }
}

/// Bias field B0 along z (T).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasField {
    b0: f64,
}

impl BiasField {
    pub fn new(b0: f64) -> Result<Self> {
        if !(b0 >= 0.0) || !b0.is_finite() {
            return Err(Error::Domain(format!("bias field must be >= 0, got {b0}")));
        }
        Ok(Self { b0 })
    }

    pub fn tesla(&self) -> f64 {
        self.b0
    }
}

fn kerr_formula(geometry: &SphereGeometry, material: &MaterialParams) -> f64 {
    let v = geometry.volume();
    material.anisotropy_prefactor() / (v * v)
}

/// Kerr coefficient K (rad/s).
///
/// In anchored mode K = C * K_an gamma^2 / (M^2 V_m), with C fixed so that
/// default YIG gives K/2pi = 128 Hz at R = 50 nm.
pub fn kerr_coefficient(geometry: &SphereGeometry, material: &MaterialParams, calibration: Calibration) -> Result<f64> {
    material.validate()?;
    let k = match calibration {
        Calibration::Formula => kerr_formula(geometry, material),
        Calibration::Anchored => {
            let reference = MaterialParams::default();
            let v_ref = SphereGeometry::new(KERR_REFERENCE_RADIUS)?.volume();
            2.0 * PI
                * KERR_REFERENCE_HZ
                * (v_ref / geometry.volume())
                * (material.anisotropy_prefactor() / reference.anisotropy_prefactor())
        }
    };
    Ok(k)
}

fn coupling_formula(geometry: &SphereGeometry, placement: &SpinPlacement, m: &MaterialParams) -> f64 {
    let r = geometry.radius();
    let sep = placement.distance() + r;
    let per_2pi = (m.gamma().abs() * m.saturation_magnetization * r.powi(3) / (24.0 * PI * m.hbar)).sqrt()
        * m.g_factor
        * m.mu_0
        * m.bohr_magneton
        / sep.powi(3);
    2.0 * PI * per_2pi
}

/// Bare spin-magnon coupling g (rad/s).
///
/// Scales as R^{3/2} / (d + R)^3: decreasing in d, maximal at R = d.
pub fn bare_coupling(
    geometry: &SphereGeometry,
    placement: &SpinPlacement,
    material: &MaterialParams,
    calibration: Calibration,
) -> Result<f64> {
    material.validate()?;
    let g = coupling_formula(geometry, placement, material);
    Ok(match calibration {
        Calibration::Formula => g,
        Calibration::Anchored => {
            let reference = coupling_formula(
                &SphereGeometry::new(COUPLING_REFERENCE_RADIUS)?,
                &SpinPlacement::new(COUPLING_REFERENCE_DISTANCE)?,
                &MaterialParams::default(),
            );
            g * (2.0 * PI * COUPLING_REFERENCE_HZ / reference)
        }
    })
}

/// Magnon frequency omega_m (rad/s).
///
/// omega_m = gamma B0 + P / V_m^2 - P rho_s s, with P = 2 mu0 K_an gamma^2 / M^2.
/// The second term is the Kerr coefficient itself, so the correction is
/// evaluated as K (1 - rho_s s V_m^2) using the selected calibration of K.
pub fn magnon_frequency(
    bias: &BiasField,
    geometry: &SphereGeometry,
    material: &MaterialParams,
    calibration: Calibration,
) -> Result<f64> {
    let k = kerr_coefficient(geometry, material, calibration)?;
    let v = geometry.volume();
    Ok(material.gamma() * bias.tesla() + anisotropy_shift(k, v, material))
}

fn anisotropy_shift(kerr: f64, volume: f64, material: &MaterialParams) -> f64 {
    kerr - kerr * material.spin_density * material.spin * volume * volume
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hz(w: f64) -> f64 {
        w / (2.0 * PI)
    }

    #[test]
    fn kerr_reference_point() {
        let k = kerr_coefficient(
            &SphereGeometry::new(50e-9).unwrap(),
            &MaterialParams::default(),
            Calibration::Anchored,
        )
        .unwrap();
        assert!((hz(k) - 128.0).abs() < 1e-9);
    }

    #[test]
    fn kerr_doubles_radius_eighth() {
        let k = kerr_coefficient(
            &SphereGeometry::new(100e-9).unwrap(),
            &MaterialParams::default(),
            Calibration::Anchored,
        )
        .unwrap();
        assert!((hz(k) - 16.0).abs() < 1e-9);
    }

    #[test]
    fn kerr_half_millimetre() {
        // (50 nm / 0.5 mm)^3 * 128 Hz
        let oracle = (50e-9f64 / 0.5e-3).powi(3) * 128.0;
        let k = kerr_coefficient(
            &SphereGeometry::new(0.5e-3).unwrap(),
            &MaterialParams::default(),
            Calibration::Anchored,
        )
        .unwrap();
        assert!((hz(k) / oracle - 1.0).abs() < 1e-12);
        assert!((hz(k) - 1.28e-10).abs() < 1e-22);
        // Quoted 0.05 nHz: same order of magnitude.
        let ratio = hz(k) / 0.05e-9;
        assert!(ratio > 0.1 && ratio < 10.0);
    }

    #[test]
    fn kerr_formula_is_positive_and_distinct() {
        let g = SphereGeometry::new(50e-9).unwrap();
        let m = MaterialParams::default();
        let f = kerr_coefficient(&g, &m, Calibration::Formula).unwrap();
        let a = kerr_coefficient(&g, &m, Calibration::Anchored).unwrap();
        assert!(f > 0.0 && f.is_finite());
        assert!((f / a).log10().abs() > 3.0);
    }

    #[test]
    fn non_positive_radius_is_rejected() {
        assert!(matches!(SphereGeometry::new(0.0), Err(Error::Domain(_))));
        assert!(matches!(SphereGeometry::new(-1e-9), Err(Error::Domain(_))));
        assert!(SpinPlacement::new(-1e-9).is_err());
        assert!(SpinPlacement::new(0.0).is_ok());
    }

    #[test]
    fn coupling_anchors() {
        let m = MaterialParams::default();
        let d = SpinPlacement::new(6e-9).unwrap();
        let g30 = bare_coupling(&SphereGeometry::new(30e-9).unwrap(), &d, &m, Calibration::Anchored).unwrap();
        let g50 = bare_coupling(&SphereGeometry::new(50e-9).unwrap(), &d, &m, Calibration::Anchored).unwrap();
        assert!((hz(g30) - 1.5e3).abs() < 1e-9);
        assert!((hz(g50) / 0.86e3 - 1.0).abs() < 0.2);
    }

    #[test]
    fn coupling_far_field_scaling() {
        let m = MaterialParams::default();
        let geo = SphereGeometry::new(30e-9).unwrap();
        let near = bare_coupling(&geo, &SpinPlacement::new(6e-9).unwrap(), &m, Calibration::Anchored).unwrap();
        // d + R grows tenfold
        let far = bare_coupling(
            &geo,
            &SpinPlacement::new(360e-9 - 30e-9).unwrap(),
            &m,
            Calibration::Anchored,
        )
        .unwrap();
        assert!((far / near - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn coupling_interior_maximum_at_r_equals_d() {
        let m = MaterialParams::default();
        let d = SpinPlacement::new(6e-9).unwrap();
        let g = |r: f64| bare_coupling(&SphereGeometry::new(r).unwrap(), &d, &m, Calibration::Anchored).unwrap();
        assert!(g(6e-9) > g(5.9e-9));
        assert!(g(6e-9) > g(6.1e-9));
        assert!(g(6e-9) > g(1e-9) && g(6e-9) > g(60e-9));
    }

    #[test]
    fn formula_coupling_literal_value() {
        // sqrt(|gamma| M R^3 / (24 pi hbar)) g_e mu0 mu_B / (d + R)^3 evaluated by hand
        let m = MaterialParams::default();
        let gamma = 2.0 * constants::BOHR_MAGNETON / constants::HBAR;
        let r: f64 = 30e-9;
        let expected = (gamma * 1.4e5 * r.powi(3) / (24.0 * PI * constants::HBAR)).sqrt()
            * 2.0
            * constants::MU_0
            * constants::BOHR_MAGNETON
            / (36e-9f64).powi(3);
        let g = bare_coupling(
            &SphereGeometry::new(r).unwrap(),
            &SpinPlacement::new(6e-9).unwrap(),
            &m,
            Calibration::Formula,
        )
        .unwrap();
        assert!((hz(g) / expected - 1.0).abs() < 1e-12);
        assert!((hz(g) - 4.568e6).abs() < 1e3);
    }

    #[test]
    fn magnon_frequency_without_anisotropy() {
        let m = MaterialParams {
            anisotropy_constant: 0.0,
            ..Default::default()
        };
        let geo = SphereGeometry::new(50e-9).unwrap();
        let b = BiasField::new(0.1).unwrap();
        let w = magnon_frequency(&b, &geo, &m, Calibration::Anchored).unwrap();
        assert!((w - m.gamma() * 0.1).abs() < 1e-6);
        let w0 = magnon_frequency(&BiasField::new(0.0).unwrap(), &geo, &m, Calibration::Anchored).unwrap();
        assert_eq!(w0, 0.0);
    }

    #[test]
    fn magnon_frequency_dominated_by_zeeman() {
        let m = MaterialParams::default();
        let geo = SphereGeometry::new(50e-9).unwrap();
        let b0 = 2.0 * PI * 5e9 / m.gamma();
        let w = magnon_frequency(&BiasField::new(b0).unwrap(), &geo, &m, Calibration::Anchored).unwrap();
        let zeeman = m.gamma() * b0;
        // corrections: K (1 - rho_s s V^2) ~ 2pi * 128 Hz
        let rel = ((w - zeeman) / zeeman).abs();
        assert!(rel < 1e-3);
        assert!((rel - 128.0 / 5e9).abs() < 1e-12);
    }
}
