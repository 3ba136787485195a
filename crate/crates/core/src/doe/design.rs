use crate::contact::LdCurve;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub name: String,
    pub levels: Vec<f64>,
}

/// Named factors with at least two strictly increasing levels each.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorLevels {
    pub factors: Vec<Factor>,
}

impl FactorLevels {
    pub fn new<S: Into<String>>(factors: Vec<(S, Vec<f64>)>) -> Result<Self> {
        let factors: Vec<Factor> =
            factors.into_iter().map(|(name, levels)| Factor { name: name.into(), levels }).collect();
        for f in &factors {
            if f.levels.len() < 2 {
                return Err(Error::InvalidInput(format!("factor '{}' needs at least 2 levels", f.name)));
            }
            if f.levels.iter().any(|v| !v.is_finite()) || f.levels.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidInput(format!(
                    "levels of factor '{}' must be finite and strictly increasing: {:?}",
                    f.name, f.levels
                )));
            }
        }
        Ok(Self { factors })
    }

    /// Elastic-plastic screening levels for the modified L16 array
    /// (E, sigma_Y, hardening; GPa).
    pub fn elastic_plastic() -> Self {
        Self::new(vec![
            ("E", vec![60.0, 65.0, 70.0, 75.0]),
            ("sigma_Y", vec![0.05, 0.10, 0.15, 0.20]),
            ("h", vec![0.4, 0.5, 0.6, 0.7]),
        ])
        .expect("valid levels")
    }

    /// Burgers screening levels for the L27 array, ordered like
    /// [`crate::constitutive::MaterialParams::DESIGN_NAMES`].
    pub fn burgers() -> Self {
        Self::new(vec![
            ("E", vec![3.0, 3.25, 3.5]),
            ("C_s", vec![0.02, 0.06, 0.1]),
            ("m_s", vec![0.15, 0.25, 0.35]),
            ("C_t", vec![0.15, 0.25, 0.35]),
            ("m_t", vec![0.2, 0.5, 0.8]),
            ("t_eps", vec![0.1, 0.25, 0.4]),
        ])
        .expect("valid levels")
    }

    pub fn names(&self) -> Vec<&str> {
        self.factors.iter().map(|f| f.name.as_str()).collect()
    }

    /// `(lowest, highest)` level of each factor.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.factors.iter().map(|f| (f.levels[0], *f.levels.last().expect("non-empty"))).collect()
    }
}

/// Main-effect degrees of freedom `sum(k_i - 1)` plus `interactions`.
pub fn degrees_of_freedom(levels_per_factor: &[usize], interactions: usize) -> Result<usize> {
    if let Some(&k) = levels_per_factor.iter().find(|&&k| k < 2) {
        return Err(Error::InvalidInput(format!("every factor needs at least 2 levels, got {k}")));
    }
    Ok(levels_per_factor.iter().map(|k| k - 1).sum::<usize>() + interactions)
}

/// Cartesian product of the level lists, the last factor varying fastest.
///
/// Single-level lists are allowed so a parameter can be pinned.
pub fn full_factorial(levels: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::with_capacity(levels.len())];
    for list in levels {
        out = out
            .iter()
            .flat_map(|prefix| {
                list.iter().map(move |&v| {
                    let mut row = prefix.clone();
                    row.push(v);
                    row
                })
            })
            .collect();
    }
    out
}

/// A factorial grid in which single-level factors are pinned. Surrogates and
/// the optimiser only see the free factors.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorialSpace {
    pub names: Vec<String>,
    pub levels: Vec<Vec<f64>>,
}

impl FactorialSpace {
    pub fn new<S: Into<String>>(factors: Vec<(S, Vec<f64>)>) -> Result<Self> {
        let (names, levels): (Vec<String>, Vec<Vec<f64>>) = factors.into_iter().map(|(n, l)| (n.into(), l)).unzip();
        for (name, l) in names.iter().zip(&levels) {
            if l.is_empty() || l.iter().any(|v| !v.is_finite()) || l.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidInput(format!(
                    "levels of '{name}' must be non-empty, finite and strictly increasing: {l:?}"
                )));
            }
        }
        if levels.iter().all(|l| l.len() < 2) {
            return Err(Error::InvalidInput("every factor is pinned; nothing to vary".into()));
        }
        Ok(Self { names, levels })
    }

    pub fn free(&self) -> Vec<usize> {
        (0..self.levels.len()).filter(|&i| self.levels[i].len() > 1).collect()
    }

    pub fn free_names(&self) -> Vec<&str> {
        self.free().into_iter().map(|i| self.names[i].as_str()).collect()
    }

    /// Range of each free factor.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.free().into_iter().map(|i| (self.levels[i][0], *self.levels[i].last().expect("non-empty"))).collect()
    }

    /// Full factorial over the free factors.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let free: Vec<Vec<f64>> = self.free().into_iter().map(|i| self.levels[i].clone()).collect();
        full_factorial(&free)
    }

    /// Insert the pinned values around a vector of free values.
    pub fn expand(&self, free_values: &[f64]) -> Result<Vec<f64>> {
        let free = self.free();
        if free_values.len() != free.len() {
            return Err(Error::InvalidInput(format!("expected {} free values, got {}", free.len(), free_values.len())));
        }
        let mut it = free_values.iter();
        Ok(self.levels.iter().map(|l| if l.len() > 1 { *it.next().expect("counted") } else { l[0] }).collect())
    }

    /// Free values of a full vector.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free().into_iter().map(|i| full[i]).collect()
    }
}

fn check_paired(sim: &[f64], exp: &[f64]) -> Result<()> {
    if sim.len() != exp.len() {
        return Err(Error::InvalidInput(format!("{} simulated vs {} experimental samples", sim.len(), exp.len())));
    }
    if sim.is_empty() {
        return Err(Error::InvalidInput("no samples to compare".into()));
    }
    Ok(())
}

/// `sqrt(mean(((h_sim - h_exp) / h_exp)^2))` over paired depth samples.
pub fn error_rms_relative(sim: &[f64], exp: &[f64]) -> Result<f64> {
    check_paired(sim, exp)?;
    let mut acc = 0.0;
    for (i, (s, e)) in sim.iter().zip(exp).enumerate() {
        if *e == 0.0 {
            return Err(Error::ZeroDisplacement { index: i });
        }
        acc += ((s - e) / e).powi(2);
    }
    Ok((acc / sim.len() as f64).sqrt())
}

/// Mean squared depth difference (nm^2).
pub fn error_mse(sim: &[f64], exp: &[f64]) -> Result<f64> {
    check_paired(sim, exp)?;
    Ok(sim.iter().zip(exp).map(|(s, e)| (e - s).powi(2)).sum::<f64>() / sim.len() as f64)
}

/// Bring an experimental curve onto the simulation's load grid.
pub fn paired_depths(sim: &LdCurve, exp: &LdCurve) -> Result<(Vec<f64>, Vec<f64>)> {
    let exp = if exp.times() == sim.times() && exp.loads() == sim.loads() { exp.clone() } else { exp.resample_onto(sim)? };
    Ok((sim.depths().to_vec(), exp.depths().to_vec()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveFeatures {
    pub max_depth: f64,
    pub residual_depth: f64,
}

impl CurveFeatures {
    pub fn of(curve: &LdCurve) -> Self {
        Self { max_depth: curve.max_depth(), residual_depth: curve.residual_depth() }
    }
}

/// Features at the low and high end of one parameter's range.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremeDelta {
    pub index: usize,
    pub lo: CurveFeatures,
    pub hi: CurveFeatures,
}

impl ExtremeDelta {
    pub fn max_depth(&self) -> f64 {
        self.hi.max_depth - self.lo.max_depth
    }

    pub fn residual_depth(&self) -> f64 {
        self.hi.residual_depth - self.lo.residual_depth
    }
}

/// One-at-a-time sweep: parameter `i` at its lower then upper bound, the
/// others held at `baseline`.
pub fn extreme_sensitivity<F>(bounds: &[(f64, f64)], baseline: &[f64], forward: F) -> Result<Vec<ExtremeDelta>>
where
    F: Fn(&[f64]) -> Result<LdCurve>,
{
    if bounds.len() != baseline.len() {
        return Err(Error::InvalidInput(format!("{} bounds for {} baseline values", bounds.len(), baseline.len())));
    }
    if let Some(i) = (0..bounds.len()).find(|&i| !(bounds[i].0 <= baseline[i] && baseline[i] <= bounds[i].1)) {
        return Err(Error::InvalidInput(format!(
            "baseline value {} of parameter {i} lies outside {:?}",
            baseline[i], bounds[i]
        )));
    }
    let mut out = Vec::with_capacity(bounds.len());
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        let mut p = baseline.to_vec();
        p[i] = lo;
        let lo_curve = forward(&p)?;
        p[i] = hi;
        let hi_curve = forward(&p)?;
        out.push(ExtremeDelta { index: i, lo: CurveFeatures::of(&lo_curve), hi: CurveFeatures::of(&hi_curve) });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::MaterialParams;
    use crate::contact::{forward_indentation, sneddon_conical_curve, ForwardConfig, LoadSchedule};
    use proptest::prelude::*;

    #[test]
    fn dof_rule() {
        assert_eq!(degrees_of_freedom(&[4, 4, 4], 0).unwrap(), 9);
        assert_eq!(degrees_of_freedom(&[3; 6], 0).unwrap(), 12);
        assert_eq!(degrees_of_freedom(&[2], 0).unwrap(), 1);
        assert_eq!(degrees_of_freedom(&[3, 3], 4).unwrap(), 8);
        assert!(degrees_of_freedom(&[3, 1], 0).is_err());
    }

    #[test]
    fn factorial_counts_and_order() {
        let g = full_factorial(&[vec![1.0, 2.0, 3.0], vec![0.1, 0.2, 0.3, 0.4], vec![5.0, 6.0, 7.0]]);
        assert_eq!(g.len(), 36);
        assert_eq!(g[0], vec![1.0, 0.1, 5.0]);
        assert_eq!(g[1], vec![1.0, 0.1, 6.0]);
        assert_eq!(g[3], vec![1.0, 0.2, 5.0]);
        assert_eq!(g[35], vec![3.0, 0.4, 7.0]);
        let sizes = [3usize, 4, 4, 3, 2, 1];
        let lists: Vec<Vec<f64>> = sizes.iter().map(|&n| (0..n).map(|i| i as f64).collect()).collect();
        assert_eq!(full_factorial(&lists).len(), 288);
        assert_eq!(full_factorial(&[vec![2.5]]), vec![vec![2.5]]);
    }

    #[test]
    fn pinned_factors() {
        let space = FactorialSpace::new(vec![
            ("E", vec![3.0, 3.25, 3.5]),
            ("C_s", vec![0.02, 0.045, 0.07, 0.1]),
            ("m_s", vec![0.15, 0.2, 0.3, 0.35]),
            ("C_t", vec![0.15, 0.25, 0.35]),
            ("m_t", vec![0.2, 0.8]),
            ("t_eps", vec![0.25]),
        ])
        .unwrap();
        assert_eq!(space.points().len(), 288);
        assert_eq!(space.free_names(), vec!["E", "C_s", "m_s", "C_t", "m_t"]);
        let full = space.expand(&[3.1, 0.05, 0.2, 0.3, 0.5]).unwrap();
        assert_eq!(full, vec![3.1, 0.05, 0.2, 0.3, 0.5, 0.25]);
        assert_eq!(space.restrict(&full), vec![3.1, 0.05, 0.2, 0.3, 0.5]);
        assert!(space.expand(&[1.0]).is_err());
        assert!(FactorialSpace::new(vec![("a", vec![1.0])]).is_err());
        assert!(FactorialSpace::new(vec![("a", vec![1.0, 0.5])]).is_err());
    }

    #[test]
    fn factor_level_validation() {
        assert!(FactorLevels::new(vec![("a", vec![1.0])]).is_err());
        assert!(FactorLevels::new(vec![("a", vec![1.0, 1.0])]).is_err());
        assert!(FactorLevels::new(vec![("a", vec![2.0, 1.0])]).is_err());
        assert_eq!(FactorLevels::burgers().bounds()[1], (0.02, 0.1));
    }

    #[test]
    fn error_function_examples() {
        let exp = [100.0, 200.0, 300.0];
        assert_eq!(error_rms_relative(&exp, &exp).unwrap(), 0.0);
        let scaled: Vec<f64> = exp.iter().map(|h| 1.1 * h).collect();
        assert!((error_rms_relative(&scaled, &exp).unwrap() - 0.1).abs() < 1e-12);
        let r = error_rms_relative(&[1.3, 1.4], &[1.0, 1.0]).unwrap();
        assert!((r - 0.125f64.sqrt()).abs() < 1e-12);
        assert_eq!(error_rms_relative(&[1.0, 1.0], &[1.0, 0.0]), Err(Error::ZeroDisplacement { index: 1 }));
        let shifted: Vec<f64> = exp.iter().map(|h| h + 2.0).collect();
        assert!((error_mse(&shifted, &exp).unwrap() - 4.0).abs() < 1e-12);
        assert!(error_mse(&exp[..2], &exp).is_err());
    }

    proptest! {
        #[test]
        fn error_functions_symmetric_and_order_free(
            pairs in prop::collection::vec((1.0..1000.0f64, 1.0..1000.0f64), 1..40),
            rot in 0usize..40,
        ) {
            let (a, b): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
            let m = error_mse(&a, &b).unwrap();
            prop_assert_eq!(m, error_mse(&b, &a).unwrap());
            let k = rot % a.len();
            let (mut ar, mut br) = (a.clone(), b.clone());
            ar.rotate_left(k);
            br.rotate_left(k);
            prop_assert!((error_mse(&ar, &br).unwrap() - m).abs() <= 1e-9 * m.max(1.0));
            let r = error_rms_relative(&a, &b).unwrap();
            prop_assert!((error_rms_relative(&ar, &br).unwrap() - r).abs() <= 1e-12 * r.max(1.0));
            prop_assert!(m >= 0.0 && r >= 0.0);
            prop_assert_eq!(m == 0.0, a == b);
            prop_assert_eq!(r == 0.0, a == b);
        }
    }

    fn sneddon(params: &[f64]) -> Result<LdCurve> {
        let s = LoadSchedule::triangular(1.0, 10.0, 10.0, 40)?;
        sneddon_conical_curve(params[0], 0.3, 70.3, &s)
    }

    #[test]
    fn collapsed_bounds_give_zero_deltas() {
        let d = extreme_sensitivity(&[(3.0, 3.0)], &[3.0], sneddon).unwrap();
        assert_eq!(d[0].max_depth(), 0.0);
        assert_eq!(d[0].residual_depth(), 0.0);
        assert!(extreme_sensitivity(&[(3.0, 4.0)], &[5.0], sneddon).is_err());
    }

    #[test]
    fn elastic_depth_scales_inverse_sqrt_modulus() {
        // cone: h_max = sqrt(pi P / (2 E_r tan(alpha))), so h ~ E^-1/2
        let (lo, hi) = (2.0, 8.0);
        let d = extreme_sensitivity(&[(lo, hi)], &[4.0], sneddon).unwrap();
        let h_lo = d[0].lo.max_depth;
        let expected = h_lo * ((lo / hi).sqrt() - 1.0);
        assert!((d[0].max_depth() - expected).abs() < 1e-9 * h_lo);
        assert!(d[0].residual_depth().abs() < 1e-9 * h_lo);
    }

    #[test]
    fn burgers_extremes_follow_expected_trends() {
        let levels = FactorLevels::burgers();
        let baseline: Vec<f64> = levels.factors.iter().map(|f| f.levels[1]).collect();
        let schedule = LoadSchedule::triangular(1.0, 30.0, 30.0, 60).unwrap();
        let cfg = ForwardConfig::default();
        let nu = MaterialParams::epoxy_reference().nu;
        let forward = |p: &[f64]| forward_indentation(&MaterialParams::from_design(p, nu)?, &schedule, &cfg);
        let d = extreme_sensitivity(&levels.bounds(), &baseline, forward).unwrap();
        let cs = &d[1];
        let te = &d[5];
        assert!(cs.residual_depth() > 0.05 * cs.lo.max_depth, "{cs:?}");
        assert!(te.max_depth().abs() < 0.1 * cs.max_depth().abs(), "{te:?} vs {cs:?}");
        assert!(te.residual_depth().abs() < 0.1 * cs.residual_depth().abs());
    }
}
