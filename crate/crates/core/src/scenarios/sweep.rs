//! Device-parameter sweep: g(R, d), K(R) and G = g e^r / 2.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde_json::json;

use super::{Check, Computed, Provenance};
use crate::config::RunConfig;
use crate::device::{
    bare_coupling, kerr_coefficient, Calibration, MaterialParams, SphereGeometry, SpinPlacement,
    COUPLING_REFERENCE_DISTANCE, COUPLING_REFERENCE_HZ, COUPLING_REFERENCE_RADIUS, KERR_REFERENCE_HZ,
    KERR_REFERENCE_RADIUS,
};
use crate::dynamics::export::Table;
use crate::error::Result;

const HZ: f64 = 1.0 / (2.0 * PI);

/// g/2pi quoted for R = 50 nm at d = 6 nm.
const COUPLING_50NM_HZ: f64 = 0.86e3;
/// K/2pi quoted for a 0.5 mm sphere.
const KERR_HALF_MM_HZ: f64 = 0.05e-9;
/// G/2pi quoted at d = 1 um with r = 10.
const ENHANCED_1UM_HZ: f64 = 4e6;

pub(crate) fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

fn g_hz(radius: f64, distance: f64, mat: &MaterialParams, cal: Calibration) -> Result<f64> {
    Ok(bare_coupling(&SphereGeometry::new(radius)?, &SpinPlacement::new(distance)?, mat, cal)? * HZ)
}

fn k_hz(radius: f64, mat: &MaterialParams, cal: Calibration) -> Result<f64> {
    Ok(kerr_coefficient(&SphereGeometry::new(radius)?, mat, cal)? * HZ)
}

/// Column label of G for squeezing `r`, e.g. `coupling_r10_hz`.
pub fn coupling_label(r: f64) -> String {
    if r.fract() == 0.0 {
        format!("coupling_r{}_hz", r as i64)
    } else {
        format!("coupling_r{r}_hz")
    }
}

pub(crate) fn compute(cfg: &RunConfig) -> Result<Computed> {
    let s = &cfg.sweep;
    let mat = &cfg.material;
    let cal = cfg.device.calibration;

    // (axis, R, d): radius sweep at the configured distance, then distance sweep at the configured radius
    let mut points: Vec<(f64, f64, f64)> = logspace(s.radius_min, s.radius_max, s.radius_points)
        .into_iter()
        .map(|r| (0.0, r, cfg.device.distance))
        .collect();
    points.extend(
        logspace(s.distance_min, s.distance_max, s.distance_points)
            .into_iter()
            .map(|d| (1.0, cfg.device.radius, d)),
    );
    let rows = points
        .par_iter()
        .map(|&(_, r, d)| {
            Ok((
                g_hz(r, d, mat, cal)?,
                g_hz(r, d, mat, Calibration::Formula)?,
                k_hz(r, mat, cal)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let g: Vec<f64> = rows.iter().map(|x| x.0).collect();
    let mut table = Table::new();
    table
        .push("axis", points.iter().map(|p| p.0).collect())
        .push("radius_m", points.iter().map(|p| p.1).collect())
        .push("distance_m", points.iter().map(|p| p.2).collect())
        .push("g_hz", g.clone())
        .push("g_formula_hz", rows.iter().map(|x| x.1).collect())
        .push("kerr_hz", rows.iter().map(|x| x.2).collect());
    for &r in &s.squeezing {
        table.push(coupling_label(r), g.iter().map(|g| 0.5 * g * r.exp()).collect());
    }

    let mut checks = vec![
        Check::relative(
            "g at R = 30 nm, d = 6 nm (Hz)",
            Provenance::Quoted,
            COUPLING_REFERENCE_HZ,
            0.2,
            g_hz(COUPLING_REFERENCE_RADIUS, COUPLING_REFERENCE_DISTANCE, mat, cal)?,
        ),
        Check::relative(
            "g at R = 50 nm, d = 6 nm (Hz)",
            Provenance::Quoted,
            COUPLING_50NM_HZ,
            0.2,
            g_hz(50e-9, COUPLING_REFERENCE_DISTANCE, mat, cal)?,
        ),
        Check::relative(
            "K at R = 50 nm (Hz)",
            Provenance::Quoted,
            KERR_REFERENCE_HZ,
            1e-9,
            k_hz(KERR_REFERENCE_RADIUS, mat, cal)?,
        ),
        Check::relative(
            "K(2R)/K(R) = 1/8",
            Provenance::Trivial,
            0.125,
            1e-12,
            k_hz(100e-9, mat, cal)? / k_hz(50e-9, mat, cal)?,
        ),
        Check::at_most(
            "K at R = 0.5 mm within an order of magnitude (|log10 ratio|)",
            Provenance::Quoted,
            1.0,
            (k_hz(0.5e-3, mat, cal)? / KERR_HALF_MM_HZ).log10().abs(),
        )
        .note(format!("K/2pi = {:e} Hz", k_hz(0.5e-3, mat, cal)?)),
    ];

    // interior maximum of g(R) along the radius axis; analytically at R = d
    let n_r = s.radius_points;
    let (k_max, _) = g[..n_r]
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty radius grid");
    let r_max = points[k_max].1;
    let ratio = if n_r > 1 {
        (s.radius_max / s.radius_min).powf(1.0 / (n_r - 1) as f64)
    } else {
        1.0
    };
    let d = cfg.device.distance;
    let mut interior = Check::within(
        "argmax of g(R) at fixed d (m)",
        Provenance::Derived,
        d,
        d * (ratio - 1.0),
        r_max,
    )
    .note("stationary point of R^{3/2}/(R + d)^3 is R = d; tolerance is one grid step");
    interior.passed &= k_max > 0 && k_max + 1 < n_r;
    checks.push(interior);

    let g_dist = &g[n_r..];
    let drops = g_dist.windows(2).filter(|w| w[1] >= w[0]).count();
    checks.push(Check::at_most(
        "g strictly decreasing in d (non-decreasing steps)",
        Provenance::Trivial,
        0.0,
        drops as f64,
    ));

    let enhanced_formula = 0.5 * g_hz(cfg.device.radius, 1e-6, mat, Calibration::Formula)? * 10f64.exp();
    let enhanced_configured = 0.5 * g_hz(cfg.device.radius, 1e-6, mat, cal)? * 10f64.exp();
    checks.push(
        Check::at_most(
            "G at d = 1 um, r = 10 of order 4 MHz (|log10 ratio|, formula calibration)",
            Provenance::Quoted,
            1.0,
            (enhanced_formula / ENHANCED_1UM_HZ).log10().abs(),
        )
        .note(format!(
            "G/2pi = {enhanced_formula:.4e} Hz from the closed-form g; {enhanced_configured:.4e} Hz with the configured calibration"
        )),
    );

    if let Some(k0) = s.squeezing.iter().position(|&r| r == 0.0) {
        let col = &table.columns[6 + k0];
        let worst = col.iter().zip(&g).map(|(a, b)| (a - 0.5 * b).abs()).fold(0.0, f64::max);
        checks.push(Check::at_most("G(r = 0) - g/2 (Hz)", Provenance::Trivial, 0.0, worst));
    }

    Ok(Computed {
        table,
        checks,
        parameters: json!({
            "calibration": cal,
            "material": mat,
            "fixed_distance_m": cfg.device.distance,
            "fixed_radius_m": cfg.device.radius,
            "squeezing": s.squeezing,
            "enhanced_coupling_1um_r10_hz": { "formula": enhanced_formula, "configured": enhanced_configured },
        }),
        diagnostics: json!({ "radius_at_max_coupling_m": r_max }),
        frame: None,
        advisories: Vec::new(),
        trace_error: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_and_labels() {
        let x = logspace(1.0, 100.0, 3);
        assert!((x[1] - 10.0).abs() < 1e-12);
        assert_eq!(coupling_label(10.0), "coupling_r10_hz");
        assert_eq!(coupling_label(0.5), "coupling_r0.5_hz");
    }

    #[test]
    fn default_sweep_passes() {
        let c = compute(&RunConfig::default()).unwrap();
        for check in &c.checks {
            assert!(check.passed, "{check:?}");
        }
        assert_eq!(c.table.rows(), 122);
    }
}
