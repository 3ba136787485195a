use std::sync::atomic::{AtomicUsize, Ordering};

use super::ga::{ga_run, GaConfig, GaOutcome};
use crate::doe::error_mse;
use crate::error::{Error, Result};
use crate::surrogate::SurrogateModel;

/// One experimental condition: target depths sampled on the surrogate's
/// output grid, and the surrogate trained for that condition.
#[derive(Debug, Clone)]
pub struct Condition {
    pub label: String,
    pub target: Vec<f64>,
    pub surrogate: SurrogateModel,
}

#[derive(Debug)]
pub struct CalibrationProblem {
    pub bounds: Vec<(f64, f64)>,
    pub conditions: Vec<Condition>,
    extrapolations: AtomicUsize,
}

impl CalibrationProblem {
    pub fn new(bounds: Vec<(f64, f64)>, conditions: Vec<Condition>) -> Result<Self> {
        if conditions.is_empty() {
            return Err(Error::InvalidInput("calibration needs at least one condition".into()));
        }
        for c in &conditions {
            if c.surrogate.n_params() != bounds.len() {
                return Err(Error::InvalidInput(format!(
                    "condition '{}': surrogate takes {} parameters, search space has {}",
                    c.label,
                    c.surrogate.n_params(),
                    bounds.len()
                )));
            }
            if c.surrogate.n_outputs() != c.target.len() {
                return Err(Error::InvalidInput(format!(
                    "condition '{}': surrogate predicts {} samples, target has {}",
                    c.label,
                    c.surrogate.n_outputs(),
                    c.target.len()
                )));
            }
            let outside = bounds.iter().zip(&c.surrogate.bounds).position(|(s, t)| s.0 < t.0 || s.1 > t.1);
            if let Some(i) = outside {
                return Err(Error::InvalidInput(format!(
                    "condition '{}': search bounds {:?} of parameter {i} exceed the training range {:?}",
                    c.label, bounds[i], c.surrogate.bounds[i]
                )));
            }
        }
        Ok(Self { bounds, conditions, extrapolations: AtomicUsize::new(0) })
    }

    /// Mean over conditions of the squared-depth error between surrogate
    /// prediction and target (nm^2).
    pub fn objective(&self, p: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        for c in &self.conditions {
            let pred = c.surrogate.predict(p)?;
            if pred.extrapolated {
                self.extrapolations.fetch_add(1, Ordering::Relaxed);
            }
            total += error_mse(pred.values.as_slice(), &c.target)?;
        }
        Ok(total / self.conditions.len() as f64)
    }

    /// Per-condition surrogate predictions at `p`.
    pub fn predictions(&self, p: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.conditions.iter().map(|c| Ok(c.surrogate.predict(p)?.values.as_slice().to_vec())).collect()
    }

    /// Objective evaluations so far that queried outside a surrogate's range.
    pub fn extrapolation_count(&self) -> usize {
        self.extrapolations.load(Ordering::Relaxed)
    }

    pub fn solve(&self, cfg: &GaConfig) -> Result<GaOutcome> {
        ga_run(|p| self.objective(p), &self.bounds, cfg)
    }
}

/// Agreement between a reference curve `a` and a fitted curve `b` on a
/// shared grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitMetrics {
    /// nm
    pub rmse: f64,
    pub r2: f64,
    /// Mean absolute difference, nm.
    pub avg_err: f64,
    /// Pointwise mean of `|b - a| / |a|` in percent, skipping `a = 0`.
    pub pct_err: f64,
}

pub fn fit_metrics(a: &[f64], b: &[f64]) -> Result<FitMetrics> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::InvalidInput(format!("cannot compare curves of {} and {} samples", a.len(), b.len())));
    }
    let n = a.len() as f64;
    let mean = a.iter().sum::<f64>() / n;
    let ss_res: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let ss_tot: f64 = a.iter().map(|x| (x - mean).powi(2)).sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        f64::NEG_INFINITY
    };
    let avg_err = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / n;
    let (pct_sum, pct_n) = a
        .iter()
        .zip(b)
        .filter(|(x, _)| **x != 0.0)
        .fold((0.0, 0usize), |(s, k), (x, y)| (s + (y - x).abs() / x.abs(), k + 1));
    let pct_err = if pct_n > 0 { 100.0 * pct_sum / pct_n as f64 } else { 0.0 };
    Ok(FitMetrics { rmse: (ss_res / n).sqrt(), r2, avg_err, pct_err })
}
