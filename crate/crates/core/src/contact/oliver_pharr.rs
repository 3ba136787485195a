use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::curve::LdCurve;
use super::schedule::LoadSchedule;
use crate::error::{Error, Result};

/// Geometry constant for a conical indenter, `2 (pi - 2) / pi`.
pub const CONICAL_EPSILON: f64 = 2.0 * (PI - 2.0) / PI;
/// Geometry constant usually applied to Berkovich and paraboloid tips.
pub const BERKOVICH_EPSILON: f64 = 0.75;
/// Equivalent cone half-angle of a Berkovich pyramid, degrees.
pub const BERKOVICH_HALF_ANGLE: f64 = 70.3;
/// mN / nm^2 to GPa.
const MN_PER_NM2_TO_GPA: f64 = 1e6;

/// `A = c0 h^2 + c1 h + c2 h^0.5 + c3 h^0.25` (nm, nm^2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaFunction {
    pub c0: f64,
    #[serde(default)]
    pub c1: f64,
    #[serde(default)]
    pub c2: f64,
    #[serde(default)]
    pub c3: f64,
}

impl Default for AreaFunction {
    fn default() -> Self {
        Self { c0: 24.5, c1: 0.0, c2: 0.0, c3: 0.0 }
    }
}

impl AreaFunction {
    /// Perfect cone of the given half-angle: `c0 = pi tan^2(alpha)`.
    pub fn cone(half_angle_deg: f64) -> Self {
        let tan = half_angle_deg.to_radians().tan();
        Self { c0: PI * tan * tan, ..Self::default() }
    }
}

pub fn contact_depth(h_max: f64, p_max: f64, s: f64, eps_geom: f64) -> Result<f64> {
    if !(s > 0.0) || !(h_max > 0.0) {
        return Err(Error::InvalidGeometry(format!("need S > 0 and h_max > 0, got S = {s}, h_max = {h_max}")));
    }
    let h_c = h_max - eps_geom * p_max / s;
    if h_c <= 0.0 {
        return Err(Error::InvalidGeometry(format!(
            "contact depth {h_c} nm is not positive (h_max = {h_max}, P_max/S = {}); check the stiffness fit",
            p_max / s
        )));
    }
    Ok(h_c)
}

pub fn contact_area(af: &AreaFunction, h_c: f64) -> Result<f64> {
    if !(h_c > 0.0) {
        return Err(Error::InvalidGeometry(format!("contact depth must be positive, got {h_c}")));
    }
    Ok(af.c0 * h_c * h_c + af.c1 * h_c + af.c2 * h_c.sqrt() + af.c3 * h_c.powf(0.25))
}

/// Hardness in GPa from load (mN) and area (nm^2).
pub fn hardness(p_max: f64, area: f64) -> f64 {
    MN_PER_NM2_TO_GPA * p_max / area
}

/// Reduced modulus in GPa from stiffness (mN/nm) and area (nm^2).
pub fn reduced_modulus(s: f64, area: f64, beta: f64) -> f64 {
    MN_PER_NM2_TO_GPA * PI.sqrt() / 2.0 * s / (beta * area.sqrt())
}

/// Sample modulus from the reduced modulus and the indenter constants.
/// `e_i = f64::INFINITY` models a rigid tip.
pub fn sample_modulus(e_r: f64, e_i: f64, nu_i: f64, nu_s: f64) -> Result<f64> {
    let indenter_term = (1.0 - nu_i * nu_i) / e_i;
    let denom = 1.0 / e_r - indenter_term;
    if !(denom > 0.0) {
        return Err(Error::TipStifferThanMeasurement { e_r, indenter_term });
    }
    Ok((1.0 - nu_s * nu_s) / denom)
}

/// `1/S_e = 1/S + (dh/dt) / v_P`.
pub fn ngan_corrected_stiffness(s: f64, dh_dt: f64, unload_rate: f64) -> Result<f64> {
    if !(unload_rate > 0.0) {
        return Err(Error::InvalidInput(format!("unloading rate must be positive, got {unload_rate}")));
    }
    let inverse = 1.0 / s + dh_dt / unload_rate;
    if !(inverse > 0.0) {
        return Err(Error::CorrectionInvalid { inverse });
    }
    Ok(1.0 / inverse)
}

/// Fitted unloading law `P = k (h - h_f)^m` and its slope at peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnloadingFit {
    pub k: f64,
    pub h_f: f64,
    pub m: f64,
    /// dP/dh at the start of unloading, mN/nm.
    pub s: f64,
}

/// Least-squares line of `ln P` on `ln(h - h_f)`; returns `(sse, ln k, m)`.
fn log_profile(h: &[f64], p: &[f64], h_f: f64) -> (f64, f64, f64) {
    let xs: Vec<f64> = h.iter().map(|&v| (v - h_f).ln()).collect();
    let ys: Vec<f64> = p.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let m = sxy / sxx;
    let c = my - m * mx;
    let sse = xs.iter().zip(&ys).map(|(x, y)| (y - c - m * x).powi(2)).sum();
    (sse, c, m)
}

/// Contact stiffness from a power-law fit to the top `fit_fraction` of the
/// unloading branch (samples with `P >= (1 - fit_fraction) P_max`).
pub fn unloading_stiffness(curve: &LdCurve, fit_fraction: f64) -> Result<UnloadingFit> {
    if !(fit_fraction > 0.0 && fit_fraction <= 1.0) {
        return Err(Error::InvalidInput(format!("fit fraction must lie in (0, 1], got {fit_fraction}")));
    }
    let (_, peak) = curve.peak_span();
    if peak + 1 >= curve.len() {
        return Err(Error::InvalidInput("curve has no unloading segment".into()));
    }
    let p_max = curve.loads()[peak];
    let cutoff = (1.0 - fit_fraction) * p_max;
    let mut h = Vec::new();
    let mut p = Vec::new();
    for i in peak..curve.len() {
        let (pi, hi) = (curve.loads()[i], curve.depths()[i]);
        if pi < cutoff || pi <= 0.0 {
            break;
        }
        h.push(hi);
        p.push(pi);
    }
    if h.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "only {} unloading samples above {cutoff} mN; need at least 3",
            h.len()
        )));
    }
    let h_peak = h[0];
    if let Some(i) = h.iter().skip(1).position(|&v| v >= h_peak) {
        return Err(Error::NoseDetected(format!(
            "depth {} nm at unloading sample {} is not below the peak depth {h_peak} nm",
            h[i + 1],
            i + 1
        )));
    }
    let h_min = h.iter().copied().fold(f64::INFINITY, f64::min);
    let span = h_peak - h_min;

    // Search the gap d = h_min - h_f on a log scale: coarse scan, then golden section.
    let sse_at = |log_d: f64| log_profile(&h, &p, h_min - log_d.exp()).0;
    let (lo, hi) = ((span * 1e-9).ln(), (span * 1e3).ln());
    let n_scan = 400;
    let grid: Vec<f64> = (0..=n_scan).map(|i| lo + (hi - lo) * i as f64 / n_scan as f64).collect();
    let best = (0..=n_scan)
        .min_by(|&a, &b| sse_at(grid[a]).total_cmp(&sse_at(grid[b])))
        .expect("scan is nonempty");
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(n_scan)];
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (sse_at(x1), sse_at(x2));
    for _ in 0..200 {
        if (b - a).abs() < 1e-14 {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = sse_at(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = sse_at(x2);
        }
    }
    let h_f = h_min - (0.5 * (a + b)).exp();
    let (_, ln_k, m) = log_profile(&h, &p, h_f);
    let k = ln_k.exp();
    let s = m * k * (h_peak - h_f).powf(m - 1.0);
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::NoseDetected(format!("fitted unloading slope {s} is not positive")));
    }
    Ok(UnloadingFit { k, h_f, m, s })
}

/// Options of the Oliver-Pharr pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OliverPharrConfig {
    pub eps_geom: f64,
    pub beta: f64,
    pub fit_fraction: f64,
    /// Indenter modulus, GPa.
    pub e_i: f64,
    pub nu_i: f64,
    pub nu_s: f64,
    /// Apply the creep correction using the end-of-hold depth rate.
    pub ngan: bool,
    /// Fraction of the hold used to estimate the end-of-hold rate.
    pub hold_rate_fraction: f64,
}

impl Default for OliverPharrConfig {
    fn default() -> Self {
        Self {
            eps_geom: BERKOVICH_EPSILON,
            beta: 1.034,
            fit_fraction: 0.5,
            e_i: 1141.0,
            nu_i: 0.07,
            nu_s: 0.3,
            ngan: false,
            hold_rate_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OliverPharrResult {
    /// Stiffness fitted to the unloading branch, mN/nm.
    pub s: f64,
    /// Creep-corrected stiffness when requested.
    pub s_e: Option<f64>,
    /// End-of-hold depth rate used for the correction, nm/s.
    pub hold_rate: Option<f64>,
    pub h_max: f64,
    pub p_max: f64,
    pub h_c: f64,
    pub area: f64,
    pub hardness: f64,
    pub e_r: f64,
    pub e_s: f64,
    pub fit: UnloadingFit,
}

/// Full analysis of one curve. The unloading rate for the creep correction is
/// taken from the first unloading interval of the curve.
pub fn oliver_pharr(curve: &LdCurve, af: &AreaFunction, cfg: &OliverPharrConfig) -> Result<OliverPharrResult> {
    let fit = unloading_stiffness(curve, cfg.fit_fraction)?;
    let (_, peak) = curve.peak_span();
    let p_max = curve.loads()[peak];
    let h_max = curve.depths()[peak];
    let (s_used, s_e, hold_rate) = if cfg.ngan {
        let rate = curve.hold_creep_rate(cfg.hold_rate_fraction)?;
        let (t, p) = (curve.times(), curve.loads());
        let unload_rate = (p[peak] - p[peak + 1]) / (t[peak + 1] - t[peak]);
        let s_e = ngan_corrected_stiffness(fit.s, rate, unload_rate)?;
        (s_e, Some(s_e), Some(rate))
    } else {
        (fit.s, None, None)
    };
    let h_c = contact_depth(h_max, p_max, s_used, cfg.eps_geom)?;
    let area = contact_area(af, h_c)?;
    let e_r = reduced_modulus(s_used, area, cfg.beta);
    let e_s = sample_modulus(e_r, cfg.e_i, cfg.nu_i, cfg.nu_s)?;
    Ok(OliverPharrResult { s: fit.s, s_e, hold_rate, h_max, p_max, h_c, area, hardness: hardness(p_max, area), e_r, e_s, fit })
}

/// Elastic cone response `P = (2/pi) E_r tan(alpha) h^2` sampled on `schedule`,
/// with `E_r = E_s / (1 - nu_s^2)` for a rigid tip. Loading and unloading
/// follow the same law.
pub fn sneddon_conical_curve(e_s: f64, nu_s: f64, half_angle_deg: f64, schedule: &LoadSchedule) -> Result<LdCurve> {
    if !(half_angle_deg > 0.0 && half_angle_deg < 90.0) {
        return Err(Error::InvalidGeometry(format!("half-angle must lie in (0, 90) degrees, got {half_angle_deg}")));
    }
    schedule.validate()?;
    let e_r = e_s / (1.0 - nu_s * nu_s);
    let coeff = 2.0 / PI * e_r * half_angle_deg.to_radians().tan() / MN_PER_NM2_TO_GPA;
    let t = schedule.sample_times();
    let p: Vec<f64> = t.iter().map(|&ti| schedule.load_at(ti)).collect();
    let h = p.iter().map(|&pi| (pi / coeff).sqrt()).collect();
    LdCurve::new(t, p, h)
}

/// Depth (nm) of the elastic cone response at load `p` (mN).
pub fn sneddon_depth(e_r: f64, half_angle_deg: f64, p: f64) -> f64 {
    let coeff = 2.0 / PI * e_r * half_angle_deg.to_radians().tan() / MN_PER_NM2_TO_GPA;
    (p / coeff).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn contact_depth_cases() {
        assert!((contact_depth(1000.0, 10.0, 0.1, 0.75).unwrap() - 925.0).abs() < 1e-12);
        assert!((contact_depth(1000.0, 10.0, 1e12, 0.75).unwrap() - 1000.0).abs() < 1e-6);
        assert!(matches!(contact_depth(1000.0, 10.0, 0.01, 1.0), Err(Error::InvalidGeometry(_))));
    }

    #[test]
    fn area_cases() {
        let af = AreaFunction::default();
        assert_eq!(contact_area(&af, 10.0).unwrap(), 2450.0);
        let af1 = AreaFunction { c1: 100.0, ..af };
        assert_eq!(contact_area(&af1, 10.0).unwrap(), 3450.0);
        let af2 = AreaFunction { c0: 24.5, c2: 5.0, ..Default::default() };
        let tiny = contact_area(&af2, 1e-10).unwrap();
        assert!(tiny > 0.0 && (tiny - 5e-5).abs() < 1e-12);
        assert!((AreaFunction::cone(70.3).c0 - 24.5).abs() < 0.1);
    }

    #[test]
    fn hardness_and_moduli() {
        assert_eq!(hardness(0.0, 1.0), 0.0);
        assert!((hardness(4.9, 4.9e6) - 1.0).abs() < 1e-15);
        assert!((hardness(4.9, 9.8e6) - 0.5).abs() < 1e-15);
        let a = reduced_modulus(0.1, 1e6, 1.0);
        let b = reduced_modulus(0.1, 1e6, 1.034);
        assert!((b - a / 1.034).abs() < 1e-12);
        let es = sample_modulus(80.0, f64::INFINITY, 0.07, 0.345).unwrap();
        assert!((es - 80.0 * (1.0 - 0.345f64.powi(2))).abs() < 1e-12);
        assert!(matches!(sample_modulus(2000.0, 1141.0, 0.07, 0.3), Err(Error::TipStifferThanMeasurement { .. })));
    }

    #[test]
    fn ngan_cases() {
        assert_eq!(ngan_corrected_stiffness(0.1, 0.0, 0.0333).unwrap(), 0.1);
        let se = ngan_corrected_stiffness(0.1, 0.5, 0.0333).unwrap();
        assert!((1.0 / se - (10.0 + 0.5 / 0.0333)).abs() < 1e-12);
        assert!((se - 0.04).abs() < 1e-4);
        assert!(matches!(ngan_corrected_stiffness(0.1, -1.0, 0.05), Err(Error::CorrectionInvalid { .. })));
    }

    #[test]
    fn quadratic_unloading_slope() {
        // Oracle: P = a h^2 has slope 2 P_max / h_max at the peak.
        let s = LoadSchedule::triangular(10.0, 10.0, 10.0, 201).unwrap();
        let c = sneddon_conical_curve(70.4, 0.345, 70.3, &s).unwrap();
        let fit = unloading_stiffness(&c, 0.5).unwrap();
        let expected = 2.0 * c.max_load() / c.max_depth();
        assert!(((fit.s - expected) / expected).abs() < 0.005, "{} vs {expected}", fit.s);
        assert!((fit.m - 2.0).abs() < 1e-6);
    }

    #[test]
    fn linear_unloading_slope() {
        let t: Vec<f64> = (0..=20).map(|i| i as f64).collect();
        let p: Vec<f64> = t.iter().map(|&x| if x <= 10.0 { x } else { 20.0 - x }).collect();
        let h: Vec<f64> = t.iter().map(|&x| if x <= 10.0 { 10.0 * x } else { 100.0 - (x - 10.0) / 0.4 }).collect();
        let c = LdCurve::new(t, p, h).unwrap();
        let fit = unloading_stiffness(&c, 0.5).unwrap();
        assert!((fit.s - 0.4).abs() < 1e-9, "{}", fit.s);
    }

    #[test]
    fn nose_is_detected() {
        let t: Vec<f64> = (0..=20).map(|i| i as f64).collect();
        let p: Vec<f64> = t.iter().map(|&x| if x <= 10.0 { x } else { 20.0 - x }).collect();
        let h: Vec<f64> = t.iter().map(|&x| if x <= 10.0 { 10.0 * x } else { 100.0 + 2.0 * (x - 10.0) - 0.5 * (x - 10.0).powi(2) }).collect();
        let c = LdCurve::new(t, p, h).unwrap();
        assert!(matches!(unloading_stiffness(&c, 0.5), Err(Error::NoseDetected(_))));
    }

    #[test]
    fn sneddon_properties() {
        let s = LoadSchedule::triangular(1.0, 1.0, 1.0, 21).unwrap();
        let c = sneddon_conical_curve(3.0, 0.3, 70.3, &s).unwrap();
        assert_eq!(c.depths()[0], 0.0);
        let n = c.len();
        for i in 0..n {
            assert!((c.depths()[i] - c.depths()[n - 1 - i]).abs() <= 1e-12 * c.max_depth());
        }
        let e_r = 3.0 / (1.0 - 0.09);
        let d1 = sneddon_depth(e_r, 70.3, 0.25);
        let d2 = sneddon_depth(e_r, 70.3, 1.0);
        assert!((d2 / d1 - 2.0).abs() < 1e-14);
    }

    fn cone_config() -> OliverPharrConfig {
        OliverPharrConfig { eps_geom: CONICAL_EPSILON, beta: 1.0, e_i: f64::INFINITY, nu_s: 0.345, ..Default::default() }
    }

    #[test]
    fn recovers_sneddon_modulus() {
        let s = LoadSchedule::triangular(4.9, 15.0, 15.0, 101).unwrap();
        let c = sneddon_conical_curve(70.4, 0.345, 70.3, &s).unwrap();
        let r = oliver_pharr(&c, &AreaFunction::cone(70.3), &cone_config()).unwrap();
        assert!(((r.e_s - 70.4) / 70.4).abs() < 0.01, "{}", r.e_s);
    }

    proptest! {
        #[test]
        fn sneddon_recovery_over_half_angles(alpha in 60.0..80.0f64, e in 1.0..400.0f64, nu in 0.1..0.45f64) {
            let s = LoadSchedule::triangular(4.9, 15.0, 15.0, 101).unwrap();
            let c = sneddon_conical_curve(e, nu, alpha, &s).unwrap();
            let cfg = OliverPharrConfig { nu_s: nu, ..cone_config() };
            let r = oliver_pharr(&c, &AreaFunction::cone(alpha), &cfg).unwrap();
            prop_assert!(((r.e_s - e) / e).abs() < 0.01);
        }

        #[test]
        fn ngan_monotone(s in 0.01..10.0f64, rate in 0.0..1.0f64, extra in 0.01..1.0f64, vp in 0.5..5.0f64, dv in 0.1..5.0f64) {
            let a = ngan_corrected_stiffness(s, rate, vp).unwrap();
            let b = ngan_corrected_stiffness(s, rate + extra, vp).unwrap();
            let c = ngan_corrected_stiffness(s, rate + extra, vp + dv).unwrap();
            prop_assert!(b < a);
            prop_assert!(c > b);
        }

        #[test]
        fn area_monotone(c in proptest::array::uniform4(0.0..1000.0f64), h in 1e-3..1e4f64, dh in 1e-3..100.0f64) {
            let af = AreaFunction { c0: c[0] + 1e-3, c1: c[1], c2: c[2], c3: c[3] };
            prop_assert!(contact_area(&af, h + dh).unwrap() > contact_area(&af, h).unwrap());
        }
    }
}
