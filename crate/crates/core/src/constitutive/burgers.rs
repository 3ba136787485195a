//! Nonlinear Burgers model: a Maxwell element in series with one or more Voigt
//! elements whose dashpots are driven by `J2^m s`.
//!
//! Voigt storage is `(xx, yy, zz, yz, zx, xy)` for both stress and strain.
//! Shear strains are *tensor* components (half the engineering shear strain),
//! which is what puts `(1 + nu) / E` on the shear diagonal of the elastic
//! compliance. Multiply shear strains by 2 when exchanging data with codes that
//! store engineering shear.
//!
//! Each increment is integrated with the central-difference operator, taking
//! `J2` at the start of the increment for both creep branches.

use nalgebra::{Matrix6, Vector6};

use crate::error::{Error, Result};

/// Six-component Voigt vector.
pub type Voigt = Vector6<f64>;
/// 6x6 Voigt operator.
pub type Voigt6 = Matrix6<f64>;

/// Strain components are aborted once they exceed this multiple of the run's
/// reference strain magnitude.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// Transient (Voigt) creep branch: coefficient, exponent and time constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoigtElement {
    pub c_t: f64,
    pub m_t: f64,
    pub t_eps: f64,
}

/// Elastic, steady creep and transient creep constants.
///
/// Stress is in GPa and time in seconds; `c_s` and `c_t` carry whatever units
/// make `C J2^m s` a strain rate in that system.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialParams {
    pub e: f64,
    pub nu: f64,
    pub c_s: f64,
    pub m_s: f64,
    pub voigt: Vec<VoigtElement>,
}

impl MaterialParams {
    pub const NAMES: [&'static str; 7] = ["E", "nu", "C_s", "m_s", "C_t", "m_t", "t_eps"];
    pub const DESIGN_NAMES: [&'static str; 6] = ["E", "C_s", "m_s", "C_t", "m_t", "t_eps"];

    /// Single-Voigt-element model from the seven constants.
    pub fn new(e: f64, nu: f64, c_s: f64, m_s: f64, c_t: f64, m_t: f64, t_eps: f64) -> Result<Self> {
        Self::with_voigt(e, nu, c_s, m_s, vec![VoigtElement { c_t, m_t, t_eps }])
    }

    pub fn with_voigt(e: f64, nu: f64, c_s: f64, m_s: f64, voigt: Vec<VoigtElement>) -> Result<Self> {
        let params = Self { e, nu, c_s, m_s, voigt };
        params.validate()?;
        Ok(params)
    }

    /// Constants identified for the epoxy in the reference study.
    pub fn epoxy_reference() -> Self {
        Self::new(3.28, 0.34, 0.09, 0.20, 0.24, 0.47, 0.25).expect("reference constants are valid")
    }

    pub fn from_array(values: [f64; 7]) -> Result<Self> {
        let [e, nu, c_s, m_s, c_t, m_t, t_eps] = values;
        Self::new(e, nu, c_s, m_s, c_t, m_t, t_eps)
    }

    /// The seven constants, using the first Voigt element.
    /// The six fitted constants `(E, C_s, m_s, C_t, m_t, t_eps)` with `nu` held
    /// fixed, the ordering used by designs, surrogates and calibration.
    pub fn from_design(values: &[f64], nu: f64) -> Result<Self> {
        let [e, c_s, m_s, c_t, m_t, t_eps] = <[f64; 6]>::try_from(values)
            .map_err(|_| Error::InvalidInput(format!("expected 6 design values, got {}", values.len())))?;
        Self::new(e, nu, c_s, m_s, c_t, m_t, t_eps)
    }

    pub fn to_design(&self) -> [f64; 6] {
        let v = self.voigt[0];
        [self.e, self.c_s, self.m_s, v.c_t, v.m_t, v.t_eps]
    }

    pub fn to_array(&self) -> [f64; 7] {
        let v = self.voigt[0];
        [self.e, self.nu, self.c_s, self.m_s, v.c_t, v.m_t, v.t_eps]
    }

    /// Same constants with all creep switched off.
    pub fn elastic_only(&self) -> Self {
        let mut p = self.clone();
        p.c_s = 0.0;
        for v in &mut p.voigt {
            v.c_t = 0.0;
        }
        p
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParams(msg));
        let all = [self.e, self.nu, self.c_s, self.m_s];
        if all.iter().any(|v| !v.is_finite()) {
            return fail(format!("non-finite constant in {all:?}"));
        }
        if self.e <= 0.0 {
            return fail(format!("E must be positive, got {}", self.e));
        }
        if !(self.nu > 0.0 && self.nu < 0.5) {
            return fail(format!("nu must lie in (0, 0.5), got {}", self.nu));
        }
        if self.c_s < 0.0 || self.m_s < 0.0 {
            return fail(format!("C_s and m_s must be >= 0, got {} and {}", self.c_s, self.m_s));
        }
        if self.voigt.is_empty() {
            return fail("at least one Voigt element is required".into());
        }
        for (i, v) in self.voigt.iter().enumerate() {
            if !(v.c_t.is_finite() && v.m_t.is_finite() && v.t_eps.is_finite()) {
                return fail(format!("non-finite constant in Voigt element {i}"));
            }
            if v.c_t < 0.0 || v.m_t < 0.0 || v.t_eps <= 0.0 {
                return fail(format!(
                    "Voigt element {i} needs C_t >= 0, m_t >= 0, t_eps > 0; got {}, {}, {}",
                    v.c_t, v.m_t, v.t_eps
                ));
            }
        }
        Ok(())
    }
}

/// Stress and partitioned strain at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialState {
    pub sigma: Voigt,
    pub eps_e: Voigt,
    pub eps_s: Voigt,
    /// One entry per Voigt element.
    pub eps_t: Vec<Voigt>,
    pub t: f64,
    /// Number of increments taken so far.
    pub step: usize,
}

impl MaterialState {
    /// Unstressed, unstrained state.
    pub fn at_rest(n_voigt: usize) -> Self {
        Self {
            sigma: Voigt::zeros(),
            eps_e: Voigt::zeros(),
            eps_s: Voigt::zeros(),
            eps_t: vec![Voigt::zeros(); n_voigt],
            t: 0.0,
            step: 0,
        }
    }

    /// Instantaneous elastic response to `sigma` with no creep history.
    pub fn loaded(params: &MaterialParams, sigma: Voigt) -> Self {
        let mut s = Self::at_rest(params.voigt.len());
        s.eps_e = elastic_compliance(params.e, params.nu) * sigma;
        s.sigma = sigma;
        s
    }

    pub fn eps_t_sum(&self) -> Voigt {
        self.eps_t.iter().fold(Voigt::zeros(), |acc, e| acc + e)
    }

    /// Total strain: elastic + steady + all transient partitions.
    pub fn total_strain(&self) -> Voigt {
        self.eps_e + self.eps_s + self.eps_t_sum()
    }
}

/// Deviatoric stress and its second invariant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressInvariants {
    pub s: Voigt,
    pub j2: f64,
}

/// `s = sigma - tr(sigma)/3 I`, `J2 = s:s / 2` with shear terms counted twice.
pub fn deviatoric_invariants(sigma: &Voigt) -> Result<StressInvariants> {
    if sigma.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite stress {:?}", sigma.as_slice())));
    }
    Ok(invariants_unchecked(sigma))
}

fn invariants_unchecked(sigma: &Voigt) -> StressInvariants {
    let mean = (sigma[0] + sigma[1] + sigma[2]) / 3.0;
    let mut s = *sigma;
    for i in 0..3 {
        s[i] -= mean;
    }
    let j2 = 0.5 * (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]) + s[3] * s[3] + s[4] * s[4] + s[5] * s[5];
    StressInvariants { s, j2 }
}

/// Deviatoric projector mapping a stress increment to its deviator.
fn deviatoric_projector() -> Voigt6 {
    let mut p = Voigt6::zeros();
    for i in 0..3 {
        for j in 0..3 {
            p[(i, j)] = if i == j { 2.0 / 3.0 } else { -1.0 / 3.0 };
        }
        p[(i + 3, i + 3)] = 1.0;
    }
    p
}

/// Isotropic elastic compliance with tensor shear strains.
pub fn elastic_compliance(e: f64, nu: f64) -> Voigt6 {
    let mut c = Voigt6::zeros();
    for i in 0..3 {
        for j in 0..3 {
            c[(i, j)] = if i == j { 1.0 / e } else { -nu / e };
        }
        c[(i + 3, i + 3)] = (1.0 + nu) / e;
    }
    c
}

/// Hooke stiffness, the inverse of [`elastic_compliance`].
pub fn elastic_stiffness(e: f64, nu: f64) -> Voigt6 {
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = e / (2.0 * (1.0 + nu));
    let mut k = Voigt6::zeros();
    for i in 0..3 {
        for j in 0..3 {
            k[(i, j)] = lambda + if i == j { 2.0 * mu } else { 0.0 };
        }
        // tensor shear strain: sigma_ij = 2 mu eps_ij
        k[(i + 3, i + 3)] = 2.0 * mu;
    }
    k
}

/// Creep strain over one increment, split into the part that develops under the
/// start-of-increment stress (`held`) and the part proportional to the stress
/// increment (`compliance * d_sigma`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CreepIncrement {
    pub held: Voigt,
    pub compliance: Voigt6,
}

impl CreepIncrement {
    pub fn strain(&self, d_sigma: &Voigt) -> Voigt {
        self.held + self.compliance * d_sigma
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("time increment must be positive, got {dt}")))
    }
}

/// `J2^m` with `0^0 = 1`.
fn j2_pow(j2: f64, m: f64) -> f64 {
    if m == 0.0 {
        1.0
    } else {
        j2.powf(m)
    }
}

fn steady_unchecked(inv: &StressInvariants, params: &MaterialParams, dt: f64) -> CreepIncrement {
    let rate = params.c_s * j2_pow(inv.j2, params.m_s);
    CreepIncrement {
        held: inv.s * (dt * rate),
        // diagonal factors 1/3 (normal) and 1/2 (shear) times dt C_s J2^m_s
        compliance: deviatoric_projector() * (0.5 * dt * rate),
    }
}

fn transient_unchecked(
    inv: &StressInvariants,
    element: &VoigtElement,
    eps_t: &Voigt,
    dt: f64,
) -> CreepIncrement {
    let drive = element.c_t * j2_pow(inv.j2, element.m_t);
    let denom = 2.0 * element.t_eps + dt;
    CreepIncrement {
        held: (inv.s * (2.0 * dt * drive) - eps_t * (2.0 * dt)) / denom,
        // diagonal factors 2/3 (normal) and 1 (shear) times dt/(2 t_eps + dt) C_t J2^m_t
        compliance: deviatoric_projector() * (dt * drive / denom),
    }
}

/// Steady-creep increment for a step of length `dt` starting at `state`.
pub fn steady_creep_increment(state: &MaterialState, params: &MaterialParams, dt: f64) -> Result<CreepIncrement> {
    check_dt(dt)?;
    let inv = deviatoric_invariants(&state.sigma)?;
    Ok(steady_unchecked(&inv, params, dt))
}

/// Transient-creep increments, one per Voigt element.
pub fn transient_creep_increment(
    state: &MaterialState,
    params: &MaterialParams,
    dt: f64,
) -> Result<Vec<CreepIncrement>> {
    check_dt(dt)?;
    check_partitions(state, params)?;
    let inv = deviatoric_invariants(&state.sigma)?;
    Ok(params
        .voigt
        .iter()
        .zip(&state.eps_t)
        .map(|(el, eps)| transient_unchecked(&inv, el, eps, dt))
        .collect())
}

fn check_partitions(state: &MaterialState, params: &MaterialParams) -> Result<()> {
    if state.eps_t.len() != params.voigt.len() {
        return Err(Error::InvalidInput(format!(
            "state carries {} transient partitions but the model has {} Voigt elements",
            state.eps_t.len(),
            params.voigt.len()
        )));
    }
    Ok(())
}

/// Consistent tangent of one increment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tangent {
    pub compliance: Voigt6,
    pub stiffness: Voigt6,
}

/// Sum of elastic, steady and transient compliances, and its inverse.
pub fn assemble_tangent(state: &MaterialState, params: &MaterialParams, dt: f64) -> Result<Tangent> {
    let steady = steady_creep_increment(state, params, dt)?;
    let transient = transient_creep_increment(state, params, dt)?;
    let compliance = transient
        .iter()
        .fold(elastic_compliance(params.e, params.nu) + steady.compliance, |acc, inc| acc + inc.compliance);
    let stiffness = compliance
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::Singular("total compliance is not positive definite".into()))?;
    Ok(Tangent { compliance, stiffness })
}

/// Creep strain that develops under the held stress during the increment:
/// `dt C_s J2^m_s s + sum_k (2 dt C_t J2^m_t s - 2 dt eps_t) / (2 t_eps + dt)`.
pub fn artificial_strain(state: &MaterialState, params: &MaterialParams, dt: f64) -> Result<Voigt> {
    let steady = steady_creep_increment(state, params, dt)?;
    let transient = transient_creep_increment(state, params, dt)?;
    Ok(transient.iter().fold(steady.held, |acc, inc| acc + inc.held))
}

/// Stress increment `K * d_eps'` that carries the held creep strain into the
/// system equation.
pub fn artificial_stress_increment(state: &MaterialState, params: &MaterialParams, dt: f64) -> Result<Voigt> {
    let tangent = assemble_tangent(state, params, dt)?;
    Ok(tangent.stiffness * artificial_strain(state, params, dt)?)
}

/// Advance `state` by a stress increment `d_sigma` over `dt`.
///
/// Every strain partition moves by its own increment formula, so the total
/// strain change equals `compliance * d_sigma + d_eps'`.
pub fn step_stress_driven(
    state: &MaterialState,
    params: &MaterialParams,
    d_sigma: &Voigt,
    dt: f64,
) -> Result<MaterialState> {
    check_dt(dt)?;
    check_partitions(state, params)?;
    if d_sigma.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite stress increment {:?}", d_sigma.as_slice())));
    }
    let inv = deviatoric_invariants(&state.sigma)?;
    let next = advance(state, params, &inv, d_sigma, dt);
    let finite = next.total_strain().iter().chain(next.sigma.iter()).all(|v| v.is_finite());
    if !finite {
        return Err(Error::Divergence { step: next.step, reason: "non-finite strain".into() });
    }
    Ok(next)
}

fn advance(
    state: &MaterialState,
    params: &MaterialParams,
    inv: &StressInvariants,
    d_sigma: &Voigt,
    dt: f64,
) -> MaterialState {
    let d_eps_e = elastic_compliance(params.e, params.nu) * d_sigma;
    let d_eps_s = steady_unchecked(inv, params, dt).strain(d_sigma);
    let eps_t = params
        .voigt
        .iter()
        .zip(&state.eps_t)
        .map(|(el, eps)| eps + transient_unchecked(inv, el, eps, dt).strain(d_sigma))
        .collect();
    MaterialState {
        sigma: state.sigma + d_sigma,
        eps_e: state.eps_e + d_eps_e,
        eps_s: state.eps_s + d_eps_s,
        eps_t,
        t: state.t + dt,
        step: state.step + 1,
    }
}

/// Stress-driven material point with a run-level divergence guard.
#[derive(Debug, Clone)]
pub struct MaterialPoint {
    params: MaterialParams,
    state: MaterialState,
    reference: f64,
}

impl MaterialPoint {
    pub fn new(params: MaterialParams, state: MaterialState) -> Result<Self> {
        params.validate()?;
        check_partitions(&state, &params)?;
        let reference = max_abs(&state.total_strain()).max(max_abs(&state.sigma) / params.e);
        Ok(Self { params, state, reference })
    }

    pub fn at_rest(params: MaterialParams) -> Result<Self> {
        let n = params.voigt.len();
        Self::new(params, MaterialState::at_rest(n))
    }

    pub fn state(&self) -> &MaterialState {
        &self.state
    }

    pub fn params(&self) -> &MaterialParams {
        &self.params
    }

    /// Apply `d_sigma` over `dt`. Strains beyond [`DIVERGENCE_FACTOR`] times
    /// the reference magnitude (largest of the starting strain and the
    /// elastic strain of any stress seen so far) abort the run.
    pub fn advance(&mut self, d_sigma: &Voigt, dt: f64) -> Result<&MaterialState> {
        let next = step_stress_driven(&self.state, &self.params, d_sigma, dt)?;
        self.reference = self.reference.max(max_abs(&next.sigma) / self.params.e);
        let magnitude = max_abs(&next.total_strain());
        if self.reference > 0.0 && magnitude > DIVERGENCE_FACTOR * self.reference {
            return Err(Error::Divergence {
                step: next.step,
                reason: format!("strain {magnitude:.3e} exceeds {DIVERGENCE_FACTOR:e} x reference {:.3e}", self.reference),
            });
        }
        self.state = next;
        Ok(&self.state)
    }

    /// Hold the current stress for `duration`, split into `steps` increments.
    pub fn hold(&mut self, duration: f64, steps: usize) -> Result<&MaterialState> {
        let dt = duration / steps.max(1) as f64;
        for _ in 0..steps.max(1) {
            self.advance(&Voigt::zeros(), dt)?;
        }
        Ok(&self.state)
    }
}

fn max_abs(v: &Voigt) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Uniaxial stress `(sigma, 0, 0, 0, 0, 0)`.
pub fn uniaxial(sigma: f64) -> Voigt {
    Voigt::new(sigma, 0.0, 0.0, 0.0, 0.0, 0.0)
}

/// Closed-form axial strain under a constant uniaxial stress held from t = 0.
pub fn constant_stress_axial_strain(params: &MaterialParams, sigma0: f64, t: f64) -> f64 {
    let j2 = sigma0 * sigma0 / 3.0;
    let s_xx = 2.0 * sigma0 / 3.0;
    let steady = params.c_s * j2_pow(j2, params.m_s) * s_xx * t;
    let transient: f64 = params
        .voigt
        .iter()
        .map(|v| v.c_t * j2_pow(j2, v.m_t) * s_xx * (1.0 - (-t / v.t_eps).exp()))
        .sum();
    sigma0 / params.e + steady + transient
}
