//! Linear spring-dashpot models: Kelvin-Voigt creep, Maxwell relaxation and the
//! generalized Maxwell (Prony series) relaxation modulus.

use crate::error::{Error, Result};

/// One spring (modulus `e`) and one dashpot (viscosity `eta`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearViscoParams {
    pub e: f64,
    pub eta: f64,
}

impl LinearViscoParams {
    pub fn new(e: f64, eta: f64) -> Result<Self> {
        if !(e > 0.0 && e.is_finite()) || !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "spring-dashpot needs E > 0 and eta > 0, got E = {e}, eta = {eta}"
            )));
        }
        Ok(Self { e, eta })
    }

    /// Characteristic time eta / E.
    pub fn time_constant(&self) -> f64 {
        self.eta / self.e
    }
}

/// Kelvin-Voigt strain under a constant stress `sigma0` applied at t = 0.
pub fn kelvin_voigt_creep(params: &LinearViscoParams, sigma0: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    sigma0 / params.e * (1.0 - (-params.e * t / params.eta).exp())
}

/// Maxwell stress relaxation from `sigma0` at a held strain.
pub fn maxwell_relaxation(params: &LinearViscoParams, sigma0: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    sigma0 * (-params.e * t / params.eta).exp()
}

/// A single Prony term: weight `p` and relaxation time `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PronyTerm {
    pub p: f64,
    pub tau: f64,
}

/// Relaxation modulus `E0 (1 - sum p_i (1 - exp(-t / tau_i)))`.
#[derive(Debug, Clone, PartialEq)]
pub struct PronySeries {
    pub e0: f64,
    pub terms: Vec<PronyTerm>,
}

impl PronySeries {
    pub fn new(e0: f64, terms: Vec<PronyTerm>) -> Result<Self> {
        if !(e0 > 0.0 && e0.is_finite()) {
            return Err(Error::InvalidParams(format!("E0 must be positive, got {e0}")));
        }
        if let Some(bad) = terms.iter().find(|t| !(t.tau > 0.0) || !(t.p >= 0.0)) {
            return Err(Error::InvalidParams(format!(
                "Prony term needs p >= 0 and tau > 0, got p = {}, tau = {}",
                bad.p, bad.tau
            )));
        }
        let total: f64 = terms.iter().map(|t| t.p).sum();
        if total > 1.0 {
            return Err(Error::InvalidParams(format!(
                "Prony weights must sum to at most 1, got {total}"
            )));
        }
        Ok(Self { e0, terms })
    }

    /// Long-time modulus `E0 (1 - sum p_i)`.
    pub fn equilibrium_modulus(&self) -> f64 {
        self.e0 * (1.0 - self.terms.iter().map(|t| t.p).sum::<f64>())
    }
}

pub fn prony_relaxation(series: &PronySeries, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    let relaxed: f64 = series
        .terms
        .iter()
        .map(|term| term.p * (1.0 - (-t / term.tau).exp()))
        .sum();
    series.e0 * (1.0 - relaxed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kv() -> LinearViscoParams {
        LinearViscoParams::new(2.0, 6.0).unwrap()
    }

    #[test]
    fn kelvin_voigt_limits() {
        let p = kv();
        assert_eq!(kelvin_voigt_creep(&p, 4.0, 0.0), 0.0);
        assert!((kelvin_voigt_creep(&p, 4.0, 1e4) - 2.0).abs() < 1e-12);
        let at_tau = kelvin_voigt_creep(&p, 4.0, p.time_constant());
        assert!((at_tau - 2.0 * (1.0 - (-1.0f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn maxwell_limits() {
        let p = kv();
        assert_eq!(maxwell_relaxation(&p, 5.0, 0.0), 5.0);
        let at_tau = maxwell_relaxation(&p, 5.0, p.time_constant());
        assert!((at_tau - 5.0 / std::f64::consts::E).abs() < 1e-14);
        assert!(maxwell_relaxation(&p, 5.0, 1e4).abs() < 1e-300);
    }

    #[test]
    fn prony_single_term() {
        let s = PronySeries::new(2.0, vec![PronyTerm { p: 0.5, tau: 1.0 }]).unwrap();
        assert_eq!(prony_relaxation(&s, 0.0), 2.0);
        assert!((prony_relaxation(&s, 1.0) - 1.3679).abs() < 1e-4);
        assert!((prony_relaxation(&s, 1e6) - s.equilibrium_modulus()).abs() < 1e-12);
        assert_eq!(s.equilibrium_modulus(), 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(LinearViscoParams::new(0.0, 1.0).is_err());
        assert!(LinearViscoParams::new(1.0, -1.0).is_err());
        assert!(PronySeries::new(1.0, vec![PronyTerm { p: 0.7, tau: 1.0 }, PronyTerm { p: 0.4, tau: 2.0 }]).is_err());
        assert!(PronySeries::new(1.0, vec![PronyTerm { p: 0.2, tau: 0.0 }]).is_err());
    }
}
