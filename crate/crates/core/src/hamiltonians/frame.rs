//! Drive linearization and the Bogoliubov squeezed frame.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveConfig {
    /// omega_d (rad/s)
    pub frequency: f64,
    /// Omega_d (rad/s)
    pub amplitude: f64,
}

impl DriveConfig {
    pub fn new(frequency: f64, amplitude: f64) -> Result<Self> {
        if !(amplitude >= 0.0) {
            return Err(Error::Domain(format!("drive amplitude must be >= 0, got {amplitude}")));
        }
        Ok(Self { frequency, amplitude })
    }
}

/// Sign of the Kerr-induced shift in Delta_m.
///
/// `Printed` uses Delta_m = omega_m + 2 K N_m - omega_d. `Rederived` uses the
/// sign obtained by expanding -(K/2) m^dag m^dag m m around the mean field,
/// Delta_m = omega_m - 2 K N_m - omega_d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DetuningConvention {
    #[default]
    Printed,
    Rederived,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanFieldRoot {
    /// N_m = |<m>|^2
    pub occupation: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootSelection {
    LowestStable,
    Index(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    /// All real non-negative roots, ascending.
    pub roots: Vec<MeanFieldRoot>,
    pub selected: usize,
    pub amplitude: C64,
}

impl SteadyState {
    pub fn occupation(&self) -> f64 {
        self.roots[self.selected].occupation
    }
}

/// Mean-field steady state of the driven, damped Kerr mode.
///
/// In the frame of the drive the amplitude obeys
/// 0 = -i[(omega_m - omega_d - K N) alpha + Omega_d] - (kappa/2) alpha, so
/// N [(omega_m - omega_d - K N)^2 + kappa^2/4] = Omega_d^2.
/// A root is stable when the slope of the left-hand side in N is positive.
pub fn steady_amplitude(
    omega_m: f64,
    kerr: f64,
    kappa_m: f64,
    drive: &DriveConfig,
    selection: RootSelection,
) -> Result<SteadyState> {
    if !(kappa_m >= 0.0) {
        return Err(Error::Domain(format!("kappa_m must be >= 0, got {kappa_m}")));
    }
    let detuning = omega_m - drive.frequency;
    let omega = drive.amplitude;
    let occupations: Vec<f64> = if omega == 0.0 {
        vec![0.0]
    } else if kerr == 0.0 {
        vec![omega * omega / (detuning * detuning + kappa_m * kappa_m / 4.0)]
    } else {
        // x = K N: x^3 - 2 D x^2 + (D^2 + kappa^2/4) x - K Omega^2 = 0
        let b = -2.0 * detuning;
        let c = detuning * detuning + kappa_m * kappa_m / 4.0;
        let d = -kerr * omega * omega;
        solve_cubic(b, c, d)
            .into_iter()
            .map(|x| x / kerr)
            .filter(|n| *n >= 0.0)
            .collect()
    };
    if occupations.is_empty() {
        return Err(Error::Internal("mean-field cubic has no non-negative real root".into()));
    }
    let roots: Vec<MeanFieldRoot> = occupations
        .into_iter()
        .map(|n| {
            let x = kerr * n;
            let slope = 3.0 * x * x - 4.0 * detuning * x + detuning * detuning + kappa_m * kappa_m / 4.0;
            MeanFieldRoot {
                occupation: n,
                stable: slope > 0.0,
            }
        })
        .collect();
    let selected = match selection {
        RootSelection::LowestStable => roots
            .iter()
            .position(|r| r.stable)
            .ok_or_else(|| Error::Internal("no stable mean-field root".into()))?,
        RootSelection::Index(i) if i < roots.len() => i,
        RootSelection::Index(i) => {
            return Err(Error::Domain(format!(
                "root index {i} out of range ({} roots)",
                roots.len()
            )))
        }
    };
    let n = roots[selected].occupation;
    let denom = Complex::new(detuning - kerr * n, -kappa_m / 2.0);
    let amplitude = if omega == 0.0 {
        Complex::new(0.0, 0.0)
    } else {
        Complex::new(-omega, 0.0) / denom
    };
    Ok(SteadyState {
        roots,
        selected,
        amplitude,
    })
}

/// Real roots of x^3 + b x^2 + c x + d, ascending, Newton-polished.
pub(crate) fn solve_cubic(b: f64, c: f64, d: f64) -> Vec<f64> {
    // Rescale so the coefficients are O(1).
    let s = [b.abs(), c.abs().sqrt(), d.abs().cbrt()]
        .into_iter()
        .fold(0.0f64, f64::max);
    if s == 0.0 {
        return vec![0.0];
    }
    let (b1, c1, d1) = (b / s, c / (s * s), d / (s * s * s));
    let shift = b1 / 3.0;
    let p = c1 - b1 * b1 / 3.0;
    let q = 2.0 * b1.powi(3) / 27.0 - b1 * c1 / 3.0 + d1;
    let disc = -(4.0 * p.powi(3) + 27.0 * q * q);
    let mut ts: Vec<f64> = if disc > 0.0 && p < 0.0 {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
            .collect()
    } else {
        let sq = (q * q / 4.0 + p.powi(3) / 27.0).max(0.0).sqrt();
        vec![(-q / 2.0 + sq).cbrt() + (-q / 2.0 - sq).cbrt()]
    };
    let f = |y: f64| ((y + b1) * y + c1) * y + d1;
    let df = |y: f64| (3.0 * y + 2.0 * b1) * y + c1;
    for t in ts.iter_mut() {
        let mut y = *t - shift;
        for _ in 0..50 {
            let slope = df(y);
            if slope == 0.0 {
                break;
            }
            let step = f(y) / slope;
            y -= step;
            if step.abs() <= 1e-16 * y.abs().max(1e-300) {
                break;
            }
        }
        *t = y * s;
    }
    ts.sort_by(|a, b| a.total_cmp(b));
    ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(b.abs()).max(s * 1e-12));
    ts
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearizedParams {
    /// Delta_m (rad/s)
    pub delta_m: f64,
    /// Delta_q = omega_q - omega_d (rad/s)
    pub delta_q: f64,
    /// <m> as supplied (before the phase rotation).
    #[serde(skip)]
    pub mean_amplitude: C64,
    /// N_m = |<m>|^2
    pub occupation: f64,
    /// Two-magnon coefficient K |<m>|^2 (rad/s); real after rotating <m> onto the positive axis.
    pub two_magnon: f64,
}

impl LinearizedParams {
    /// Injects frame quantities directly, bypassing the mean-field model.
    pub fn direct(delta_m: f64, two_magnon: f64, delta_q: f64) -> Self {
        Self {
            delta_m,
            delta_q,
            mean_amplitude: Complex::new(0.0, 0.0),
            occupation: 0.0,
            two_magnon,
        }
    }

    /// (Delta_m - |K|) / Delta_m
    pub fn stability_margin(&self) -> f64 {
        (self.delta_m - self.two_magnon.abs()) / self.delta_m
    }

    pub fn is_stable(&self) -> bool {
        self.delta_m > self.two_magnon.abs()
    }
}

pub fn linearize(
    omega_m: f64,
    omega_q: f64,
    kerr: f64,
    mean_amplitude: C64,
    drive: &DriveConfig,
    convention: DetuningConvention,
) -> LinearizedParams {
    let occupation = mean_amplitude.norm_sqr();
    let sign = match convention {
        DetuningConvention::Printed => 1.0,
        DetuningConvention::Rederived => -1.0,
    };
    LinearizedParams {
        delta_m: omega_m + sign * 2.0 * kerr * occupation - drive.frequency,
        delta_q: omega_q - drive.frequency,
        mean_amplitude,
        occupation,
        two_magnon: kerr * occupation,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezedFrame {
    /// r_m; `None` when the frame was injected without a squeezing origin.
    pub squeezing: Option<f64>,
    /// Delta_s (rad/s)
    pub delta_s: f64,
    /// G (rad/s)
    pub coupling: f64,
    /// (Delta_m - |K|) / Delta_m of the underlying linearization.
    pub stability_margin: Option<f64>,
}

impl SqueezedFrame {
    /// A frame specified directly by (Delta_s, G).
    pub fn quoted(delta_s: f64, coupling: f64) -> Self {
        Self {
            squeezing: None,
            delta_s,
            coupling,
            stability_margin: None,
        }
    }
}

/// r_m = (1/4) ln[(Delta_m + K)/(Delta_m - K)], Delta_s = sqrt(Delta_m^2 - K^2), G = g e^{r_m} / 2.
pub fn squeeze_frame(lin: &LinearizedParams, g: f64) -> Result<SqueezedFrame> {
    if !lin.is_stable() {
        return Err(Error::Unstable {
            delta_m: lin.delta_m,
            two_magnon: lin.two_magnon,
            margin: lin.stability_margin(),
        });
    }
    let (dm, k) = (lin.delta_m, lin.two_magnon);
    let r = 0.25 * ((dm + k) / (dm - k)).ln();
    let delta_s = ((dm - k) * (dm + k)).sqrt();
    Ok(SqueezedFrame {
        squeezing: Some(r),
        delta_s,
        coupling: 0.5 * g * r.exp(),
        stability_margin: Some(lin.stability_margin()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const TWO_PI: f64 = 2.0 * PI;

    fn drive(wd: f64, amp: f64) -> DriveConfig {
        DriveConfig::new(wd, amp).unwrap()
    }

    #[test]
    fn undriven_mode_is_empty() {
        let s = steady_amplitude(5.0, 0.1, 1.0, &drive(4.0, 0.0), RootSelection::LowestStable).unwrap();
        assert_eq!(s.occupation(), 0.0);
        assert_eq!(s.amplitude, Complex::new(0.0, 0.0));
    }

    #[test]
    fn linear_response_without_kerr() {
        let (wm, wd, kappa, om) = (5.0, 4.2, 0.3, 0.7);
        let s = steady_amplitude(wm, 0.0, kappa, &drive(wd, om), RootSelection::LowestStable).unwrap();
        let oracle = Complex::new(-om, 0.0) / Complex::new(wm - wd, -kappa / 2.0);
        assert!((s.amplitude - oracle).norm() < 1e-14);
        assert!((s.occupation() - oracle.norm_sqr()).abs() < 1e-14);
    }

    fn cubic_residual(n: f64, det: f64, k: f64, kappa: f64, om: f64) -> f64 {
        n * ((det - k * n).powi(2) + kappa * kappa / 4.0) - om * om
    }

    #[test]
    fn bistable_regime_has_three_roots() {
        // K D > 0 with D^2 > 3 kappa^2 / 4 and a drive inside the hysteresis window.
        let (det, k, kappa) = (1.0f64, 0.01f64, 0.2f64);
        let om = 3.0f64;
        // discriminant oracle on K^2 N^3 - 2 K D N^2 + (D^2 + kappa^2/4) N - Om^2
        let (a3, a2, a1, a0) = (k * k, -2.0 * k * det, det * det + kappa * kappa / 4.0, -om * om);
        let disc = 18.0 * a3 * a2 * a1 * a0 - 4.0 * a2.powi(3) * a0 + a2 * a2 * a1 * a1
            - 4.0 * a3 * a1.powi(3)
            - 27.0 * a3 * a3 * a0 * a0;
        assert!(disc > 0.0, "oracle discriminant {disc}");
        // brute-force sign changes
        let mut brute = vec![];
        let n_max = 200.0;
        let steps = 200_000;
        let mut prev = cubic_residual(0.0, det, k, kappa, om);
        for i in 1..=steps {
            let n = n_max * i as f64 / steps as f64;
            let cur = cubic_residual(n, det, k, kappa, om);
            if prev.signum() != cur.signum() {
                brute.push(n);
            }
            prev = cur;
        }
        assert_eq!(brute.len(), 3);

        let s = steady_amplitude(det + 10.0, k, kappa, &drive(10.0, om), RootSelection::LowestStable).unwrap();
        assert_eq!(s.roots.len(), 3);
        for (r, b) in s.roots.iter().zip(&brute) {
            assert!((r.occupation - b).abs() < 2.0 * n_max / steps as f64);
        }
        assert!(s.roots[0].stable && !s.roots[1].stable && s.roots[2].stable);
        assert_eq!(s.selected, 0);
        let upper = steady_amplitude(det + 10.0, k, kappa, &drive(10.0, om), RootSelection::Index(2)).unwrap();
        assert!(upper.occupation() > s.occupation());
        assert!((upper.amplitude.norm_sqr() - upper.occupation()).abs() < 1e-9 * upper.occupation());
    }

    #[test]
    fn negative_damping_rejected() {
        assert!(steady_amplitude(1.0, 0.0, -1.0, &drive(0.0, 1.0), RootSelection::LowestStable).is_err());
        assert!(DriveConfig::new(1.0, -0.5).is_err());
    }

    #[test]
    fn cubic_solver_matches_known_roots() {
        // (x - 1)(x - 2)(x - 3)
        let r = solve_cubic(-6.0, 11.0, -6.0);
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-13);
        }
        // (x - 2)(x^2 + 1)
        let r = solve_cubic(-2.0, 1.0, -2.0);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 2.0).abs() < 1e-13);
    }

    #[test]
    fn linearize_without_amplitude() {
        let l = linearize(
            5.0,
            3.0,
            0.2,
            Complex::new(0.0, 0.0),
            &drive(4.0, 0.0),
            DetuningConvention::Printed,
        );
        assert_eq!(l.delta_m, 1.0);
        assert_eq!(l.delta_q, -1.0);
        assert_eq!(l.two_magnon, 0.0);
        let l = linearize(
            5.0,
            3.0,
            0.0,
            Complex::new(3.0, 4.0),
            &drive(4.0, 0.0),
            DetuningConvention::Printed,
        );
        assert_eq!(l.two_magnon, 0.0);
        assert_eq!(l.delta_m, 1.0);
        assert_eq!(l.occupation, 25.0);
    }

    #[test]
    fn linearize_kerr_arithmetic() {
        let k = TWO_PI * 128.0;
        let wm = TWO_PI * 5e9;
        let wd = TWO_PI * 4.99e9;
        // <m> = 10^3: K N_m / 2pi = 128 MHz, shift 2 K N_m / 2pi = 256 MHz
        let l = linearize(
            wm,
            wm,
            k,
            Complex::new(1e3, 0.0),
            &drive(wd, 1.0),
            DetuningConvention::Printed,
        );
        assert!((l.two_magnon / TWO_PI - 128e6).abs() < 1e-6);
        assert!(((l.delta_m - (wm - wd)) / TWO_PI - 256e6).abs() < 1e-3);
        // N_m = 10^3: K N_m / 2pi = 0.128 MHz, shift 0.256 MHz
        let l = linearize(
            wm,
            wm,
            k,
            Complex::new(1e3f64.sqrt(), 0.0),
            &drive(wd, 1.0),
            DetuningConvention::Printed,
        );
        assert!((l.two_magnon / TWO_PI - 0.128e6).abs() < 1e-6);
        assert!(((l.delta_m - (wm - wd)) / TWO_PI - 0.256e6).abs() < 1e-3);
        let r = linearize(
            wm,
            wm,
            k,
            Complex::new(1e3f64.sqrt(), 0.0),
            &drive(wd, 1.0),
            DetuningConvention::Rederived,
        );
        assert!(((r.delta_m - (wm - wd)) / TWO_PI + 0.256e6).abs() < 1e-3);
    }

    #[test]
    fn linearize_invariant_holds() {
        let l = linearize(
            7.0,
            1.0,
            0.3,
            Complex::new(0.5, -1.5),
            &drive(6.0, 1.0),
            DetuningConvention::Printed,
        );
        assert_eq!(l.delta_m, 7.0 + 2.0 * 0.3 * l.occupation - 6.0);
        assert_eq!(l.occupation, Complex::new(0.5f64, -1.5).norm_sqr());
    }

    #[test]
    fn frame_without_two_magnon_term() {
        let l = LinearizedParams::direct(3.0, 0.0, 1.0);
        let f = squeeze_frame(&l, 0.8).unwrap();
        assert_eq!(f.squeezing, Some(0.0));
        assert_eq!(f.delta_s, 3.0);
        assert_eq!(f.coupling, 0.4);
    }

    #[test]
    fn frame_arithmetic() {
        let l = LinearizedParams::direct(TWO_PI * 5e6, TWO_PI * 3e6, 0.0);
        let f = squeeze_frame(&l, 1.0).unwrap();
        assert!((f.squeezing.unwrap() - 0.25 * 4f64.ln()).abs() < 1e-15);
        assert!((f.squeezing.unwrap() - 0.346_573_590_279_972_6).abs() < 1e-15);
        assert!((f.delta_s - TWO_PI * 4e6).abs() < 1e-6);
    }

    #[test]
    fn large_squeezing_requires_threshold_proximity() {
        // K / Delta_m = tanh(2 r)
        let ratio = (20.0f64).tanh();
        assert_eq!(ratio, 1.0);
        let r = 3.0f64;
        let l = LinearizedParams::direct(1.0, (2.0 * r).tanh(), 0.0);
        let f = squeeze_frame(&l, 1.0).unwrap();
        assert!((f.squeezing.unwrap() - r).abs() < 1e-10);
    }

    #[test]
    fn instability_reports_margin() {
        let l = LinearizedParams::direct(1.0, 1.2, 0.0);
        match squeeze_frame(&l, 1.0) {
            Err(Error::Unstable { margin, .. }) => assert!((margin + 0.2).abs() < 1e-12),
            other => panic!("expected instability, got {other:?}"),
        }
        assert!(squeeze_frame(&LinearizedParams::direct(1.0, 1.0, 0.0), 1.0).is_err());
        assert!(squeeze_frame(&LinearizedParams::direct(1.0, -0.5, 0.0), 1.0).is_ok());
    }
}
