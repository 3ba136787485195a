use std::fmt;

use super::{FactorLevels, OrthogonalArray};
use crate::error::{Error, Result};
use crate::stats::f_sf;

#[derive(Debug, Clone, PartialEq)]
pub struct AnovaRow {
    pub name: String,
    pub df: usize,
    pub ss: f64,
    pub ms: f64,
    /// `None` when the design leaves no error degrees of freedom.
    pub f: Option<f64>,
    pub p: Option<f64>,
    pub pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnovaTable {
    pub factors: Vec<AnovaRow>,
    pub error_df: usize,
    pub error_ss: f64,
    pub error_ms: f64,
    pub total_df: usize,
    pub total_ss: f64,
}

impl AnovaTable {
    /// Fill in MS, F, P and percentage contribution from sums of squares.
    ///
    /// `total_ss` is taken as given; published tables are rounded, so it need
    /// not equal the sum of the other rows exactly.
    pub fn from_sums(factors: &[(&str, usize, f64)], error_df: usize, error_ss: f64, total_ss: f64) -> Self {
        let error_ms = if error_df > 0 { error_ss / error_df as f64 } else { f64::NAN };
        let rows = factors
            .iter()
            .map(|&(name, df, ss)| {
                let ms = if df > 0 { ss / df as f64 } else { 0.0 };
                let (f, p) = if error_df > 0 && error_ms > 0.0 {
                    let f = ms / error_ms;
                    (Some(f), Some(f_sf(f, df as f64, error_df as f64)))
                } else {
                    (None, None)
                };
                let pct = if total_ss > 0.0 { 100.0 * ss / total_ss } else { 0.0 };
                AnovaRow { name: name.to_string(), df, ss, ms, f, p, pct }
            })
            .collect();
        let total_df = factors.iter().map(|r| r.1).sum::<usize>() + error_df;
        Self { factors: rows, error_df, error_ss, error_ms, total_df, total_ss }
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        let mut s = String::from("source,df,ss,ms,f,p,pct\n");
        for r in &self.factors {
            s += &format!("{},{},{},{},{},{},{}\n", r.name, r.df, r.ss, r.ms, opt(r.f), opt(r.p), r.pct);
        }
        let ems = if self.error_df > 0 { self.error_ms.to_string() } else { String::new() };
        s += &format!("error,{},{},{},,,\n", self.error_df, self.error_ss, ems);
        s += &format!("total,{},{},,,,\n", self.total_df, self.total_ss);
        s
    }
}

impl fmt::Display for AnovaTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<f64>, prec: usize| v.map_or_else(|| "-".to_string(), |x| format!("{x:.prec$}"));
        let width = self.factors.iter().map(|r| r.name.len()).chain([6]).max().unwrap_or(6);
        writeln!(f, "{:<width$} {:>4} {:>14} {:>14} {:>10} {:>7} {:>8}", "Source", "DF", "SS", "MS", "F", "P", "%")?;
        for r in &self.factors {
            writeln!(
                f,
                "{:<width$} {:>4} {:>14.6e} {:>14.6e} {:>10} {:>7} {:>8.2}",
                r.name,
                r.df,
                r.ss,
                r.ms,
                opt(r.f, 2),
                opt(r.p, 3),
                r.pct
            )?;
        }
        let ems = if self.error_df > 0 { format!("{:.6e}", self.error_ms) } else { "-".into() };
        writeln!(f, "{:<width$} {:>4} {:>14.6e} {:>14}", "Error", self.error_df, self.error_ss, ems)?;
        write!(f, "{:<width$} {:>4} {:>14.6e}", "Total", self.total_df, self.total_ss)
    }
}

/// Main-effect ANOVA of `responses` (one per run) over an orthogonal design.
pub fn anova(design: &OrthogonalArray, levels: &FactorLevels, responses: &[f64]) -> Result<AnovaTable> {
    design.check_levels(levels)?;
    let n = design.runs();
    if responses.len() != n {
        return Err(Error::InvalidInput(format!("{} responses for {n} runs", responses.len())));
    }
    if responses.iter().any(|r| !r.is_finite()) {
        return Err(Error::InvalidInput("responses must be finite".into()));
    }
    // shifting by the first response keeps a constant response exactly zero
    let responses: Vec<f64> = responses.iter().map(|r| r - responses[0]).collect();
    let grand = responses.iter().sum::<f64>() / n as f64;
    let total_ss: f64 = responses.iter().map(|r| (r - grand).powi(2)).sum();
    let mut sums = Vec::with_capacity(design.factors());
    for (j, factor) in levels.factors.iter().enumerate() {
        let k = factor.levels.len();
        let mut acc = vec![0.0; k];
        let mut count = vec![0usize; k];
        for (row, r) in design.assignments.iter().zip(&responses) {
            acc[row[j] - 1] += r;
            count[row[j] - 1] += 1;
        }
        let ss: f64 =
            acc.iter().zip(&count).filter(|(_, &c)| c > 0).map(|(a, &c)| c as f64 * (a / c as f64 - grand).powi(2)).sum();
        sums.push((factor.name.as_str(), k - 1, ss));
    }
    let factor_df: usize = sums.iter().map(|s| s.1).sum();
    let error_df = (n - 1).saturating_sub(factor_df);
    let error_ss = total_ss - sums.iter().map(|s| s.2).sum::<f64>();
    Ok(AnovaTable::from_sums(&sums, error_df, error_ss, total_ss))
}
