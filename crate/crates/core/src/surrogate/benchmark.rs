//! Synthetic elastic-plastic indentation benchmark for surrogate studies.
//!
//! A rigid cone indents a linearly hardening solid under a triangular load
//! history. Loading follows `P = H A(h)` with the expanding-cavity hardness
//! `H = (2/3) sigma_r (1 + ln(E tan(beta) / (3 sigma_r)))`, where `beta` is the
//! face inclination and `sigma_r` the flow stress at the representative strain
//! `0.2 tan(beta)`. Unloading is elastic, `P ~ (h - h_f)^2`, with the cone
//! stiffness `2 E_r sqrt(A / pi)`. Parameters are `(E [GPa], sigma_Y [GPa],
//! h [GPa])`, `h` being the slope of stress against plastic strain.

use nalgebra::DMatrix;

use super::snapshot::{build_snapshots, SnapshotSet};
use crate::contact::{LoadSchedule, BERKOVICH_HALF_ANGLE};
use crate::error::{Error, Result};

/// Training levels: 3 moduli, 4 yield strengths, 3 hardening coefficients.
pub const E_LEVELS: [f64; 3] = [60.0, 67.5, 75.0];
pub const YIELD_LEVELS: [f64; 4] = [0.05, 0.10, 0.15, 0.20];
pub const HARDENING_LEVELS: [f64; 3] = [0.40, 0.55, 0.70];

#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark {
    pub schedule: LoadSchedule,
    /// Cone half-angle, degrees.
    pub half_angle: f64,
    /// Sample Poisson ratio.
    pub nu: f64,
}

impl Default for Benchmark {
    fn default() -> Self {
        Self {
            schedule: LoadSchedule::triangular(4.9, 15.0, 15.0, 30).expect("valid schedule"),
            half_angle: BERKOVICH_HALF_ANGLE,
            nu: 0.345,
        }
    }
}

impl Benchmark {
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        vec![
            (E_LEVELS[0], E_LEVELS[2]),
            (YIELD_LEVELS[0], YIELD_LEVELS[3]),
            (HARDENING_LEVELS[0], HARDENING_LEVELS[2]),
        ]
    }

    /// Depth history (nm) at the schedule's sample times.
    pub fn response(&self, params: &[f64]) -> Result<Vec<f64>> {
        let [e, sigma_y, h] = <[f64; 3]>::try_from(params)
            .map_err(|_| Error::InvalidInput(format!("benchmark takes 3 parameters, got {}", params.len())))?;
        if !(e > 0.0 && sigma_y > 0.0 && h >= 0.0) {
            return Err(Error::InvalidParams(format!("benchmark needs positive E, sigma_Y and h >= 0; got {params:?}")));
        }
        let alpha = self.half_angle.to_radians();
        let tan_beta = (std::f64::consts::FRAC_PI_2 - alpha).tan();
        let eps_r = 0.2 * tan_beta;
        let sigma_r = sigma_y + h * (eps_r - sigma_y / e).max(0.0);
        let ratio = e * tan_beta / (3.0 * sigma_r);
        if ratio <= 1.0 {
            return Err(Error::InvalidParams(format!("cavity model needs E tan(beta) > 3 sigma_r, got ratio {ratio}")));
        }
        let hardness = 2.0 / 3.0 * sigma_r * (1.0 + ratio.ln());
        // P [mN] = 1e-6 H [GPa] A [nm^2], A = pi tan^2(alpha) h^2
        let area_coeff = std::f64::consts::PI * alpha.tan().powi(2);
        let load_coeff = 1e-6 * hardness * area_coeff;
        let p_max = self.schedule.p_max;
        let h_max = (p_max / load_coeff).sqrt();
        let e_r = e / (1.0 - self.nu * self.nu);
        let stiffness = 1e-6 * 2.0 * e_r * (area_coeff * h_max * h_max / std::f64::consts::PI).sqrt();
        let recovery = 2.0 * p_max / stiffness;
        let t_peak = self.schedule.t_load + self.schedule.t_hold;
        Ok(self
            .schedule
            .sample_times()
            .iter()
            .map(|&t| {
                let p = self.schedule.load_at(t);
                if t <= t_peak {
                    (p / load_coeff).sqrt()
                } else {
                    h_max - recovery + recovery * (p / p_max).sqrt()
                }
            })
            .collect())
    }

    /// The 36-point full-factorial training set.
    pub fn training_set(&self) -> Result<SnapshotSet> {
        let sets = grid(&E_LEVELS, &YIELD_LEVELS, &HARDENING_LEVELS);
        build_snapshots(&sets, &self.bounds(), |p| self.response(p))
    }

    /// Held-out points halfway between neighbouring training levels (12 cell
    /// centres), returned as `(inputs d x H, outputs N x H)`.
    pub fn validation_set(&self) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let sets = grid(&midpoints(&E_LEVELS), &midpoints(&YIELD_LEVELS), &midpoints(&HARDENING_LEVELS));
        let s = build_snapshots(&sets, &self.bounds(), |p| self.response(p))?;
        Ok((s.p, s.u))
    }
}

fn midpoints(levels: &[f64]) -> Vec<f64> {
    levels.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

fn grid(a: &[f64], b: &[f64], c: &[f64]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(a.len() * b.len() * c.len());
    for &x in a {
        for &y in b {
            for &z in c {
                out.push(vec![x, y, z]);
            }
        }
    }
    out
}
