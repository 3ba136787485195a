use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::curve::LdCurve;
use super::oliver_pharr::{sneddon_depth, BERKOVICH_HALF_ANGLE};
use super::schedule::LoadSchedule;
use crate::constitutive::{uniaxial, MaterialParams, MaterialPoint};
use crate::error::Result;

/// Scales of the representative-point indentation model.
///
/// Load `P` (mN) becomes a uniaxial stress `1e6 P / a_rep` (GPa) and the axial
/// strain becomes a depth `l_rep * eps_xx` (nm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForwardConfig {
    /// nm^2
    pub a_rep: f64,
    /// nm
    pub l_rep: f64,
    /// Equivalent cone half-angle the scales were derived from, degrees.
    pub half_angle: f64,
    /// Largest integrator substep, s. The substep is further capped at a
    /// quarter of the shortest transient time constant.
    pub max_dt: f64,
}

impl ForwardConfig {
    /// Scales at which a purely elastic material `reference` reaches the cone
    /// depth at `p_max`, with the representative area equal to the cone's
    /// projected contact area at that depth.
    pub fn calibrated(reference: &MaterialParams, p_max: f64, half_angle: f64) -> Self {
        let e_r = reference.e / (1.0 - reference.nu * reference.nu);
        let h_ref = sneddon_depth(e_r, half_angle, p_max);
        let tan = half_angle.to_radians().tan();
        let a_rep = PI * tan * tan * h_ref * h_ref;
        let strain = 1e6 * p_max / a_rep / reference.e;
        Self { a_rep, l_rep: h_ref / strain, half_angle, max_dt: 0.05 }
    }

    pub fn stress(&self, p: f64) -> f64 {
        1e6 * p / self.a_rep
    }
}

impl Default for ForwardConfig {
    /// Calibrated against the epoxy reference constants at 1 mN and a
    /// Berkovich-equivalent cone.
    fn default() -> Self {
        Self::calibrated(&MaterialParams::epoxy_reference(), 1.0, BERKOVICH_HALF_ANGLE)
    }
}

/// Drive the material point through `schedule` and record depth at each sample.
pub fn forward_indentation(params: &MaterialParams, schedule: &LoadSchedule, cfg: &ForwardConfig) -> Result<LdCurve> {
    schedule.validate()?;
    let t_min = params.voigt.iter().map(|v| v.t_eps).fold(f64::INFINITY, f64::min);
    let dt_cap = cfg.max_dt.min(t_min / 4.0);
    let times = schedule.sample_times();
    let loads: Vec<f64> = times.iter().map(|&t| schedule.load_at(t)).collect();
    let mut point = MaterialPoint::at_rest(params.clone())?;
    let mut depths = Vec::with_capacity(times.len());
    depths.push(0.0);
    for i in 1..times.len() {
        let span = times[i] - times[i - 1];
        let n = (span / dt_cap).ceil().max(1.0) as usize;
        let dt = span / n as f64;
        let d_sigma = uniaxial(cfg.stress(loads[i] - loads[i - 1]) / n as f64);
        for _ in 0..n {
            point.advance(&d_sigma, dt)?;
        }
        depths.push(cfg.l_rep * point.state().total_strain()[0]);
    }
    LdCurve::new(times, loads, depths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibration_matches_cone_depth() {
        let p = MaterialParams::epoxy_reference();
        let cfg = ForwardConfig::default();
        let s = LoadSchedule::triangular(1.0, 1e-3, 1e-3, 3).unwrap();
        let c = forward_indentation(&p.elastic_only(), &s, &cfg).unwrap();
        let e_r = p.e / (1.0 - p.nu * p.nu);
        let expected = sneddon_depth(e_r, 70.3, 1.0);
        assert!(((c.max_depth() - expected) / expected).abs() < 1e-12);
        assert!((cfg.stress(1.0) - 0.2695).abs() < 1e-3);
    }

    #[test]
    fn elastic_branches_coincide() {
        let p = MaterialParams::epoxy_reference().elastic_only();
        let s = LoadSchedule::triangular(1.0, 15.0, 15.0, 101).unwrap();
        let c = forward_indentation(&p, &s, &ForwardConfig::default()).unwrap();
        let h = c.depths();
        for i in 0..h.len() {
            assert!((h[i] - h[h.len() - 1 - i]).abs() < 1e-9);
        }
        assert!(c.residual_depth().abs() < 1e-9);
    }

    #[test]
    fn slower_schedule_goes_deeper() {
        let p = MaterialParams::epoxy_reference();
        let cfg = ForwardConfig::default();
        let fast = forward_indentation(&p, &LoadSchedule::triangular(1.0, 15.0, 15.0, 100).unwrap(), &cfg).unwrap();
        let slow = forward_indentation(&p, &LoadSchedule::triangular(1.0, 120.0, 120.0, 100).unwrap(), &cfg).unwrap();
        assert!(slow.max_depth() > fast.max_depth());
    }

    #[test]
    fn reference_curve_has_hysteresis() {
        let p = MaterialParams::epoxy_reference();
        let c = forward_indentation(&p, &LoadSchedule::triangular(1.0, 15.0, 15.0, 100).unwrap(), &ForwardConfig::default())
            .unwrap();
        assert!(c.residual_depth() > 0.0);
        let again = forward_indentation(&p, &LoadSchedule::triangular(1.0, 15.0, 15.0, 100).unwrap(), &ForwardConfig::default())
            .unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn residual_depth_nondecreasing_in_cs() {
        let s = LoadSchedule::triangular(1.0, 15.0, 15.0, 60).unwrap();
        let cfg = ForwardConfig::default();
        for &m_s in &[0.15, 0.35] {
            for &c_t in &[0.1, 0.4] {
                for &m_t in &[0.3, 0.6] {
                    let mut last = f64::NEG_INFINITY;
                    for &c_s in &[0.0, 0.05, 0.1, 0.15, 0.2] {
                        let p = MaterialParams::new(3.28, 0.34, c_s, m_s, c_t, m_t, 0.25).unwrap();
                        let r = forward_indentation(&p, &s, &cfg).unwrap().residual_depth();
                        assert!(r >= last, "C_s {c_s}: {r} < {last}");
                        last = r;
                    }
                }
            }
        }
    }
}
