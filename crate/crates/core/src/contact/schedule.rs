use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Triangular,
    Trapezoidal,
}

/// Which part of the load history a sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    Loading,
    Hold,
    Unloading,
}

/// Load-controlled indentation history: linear ramp to `p_max`, optional hold,
/// linear ramp back to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadSchedule {
    pub profile: Profile,
    /// mN
    pub p_max: f64,
    /// s
    pub t_load: f64,
    /// s
    #[serde(default)]
    pub t_hold: f64,
    /// s
    pub t_unload: f64,
    pub n_samples: usize,
}

impl LoadSchedule {
    pub fn triangular(p_max: f64, t_load: f64, t_unload: f64, n_samples: usize) -> Result<Self> {
        let s = Self { profile: Profile::Triangular, p_max, t_load, t_hold: 0.0, t_unload, n_samples };
        s.validate()?;
        Ok(s)
    }

    pub fn trapezoidal(p_max: f64, t_load: f64, t_hold: f64, t_unload: f64, n_samples: usize) -> Result<Self> {
        let s = Self { profile: Profile::Trapezoidal, p_max, t_load, t_hold, t_unload, n_samples };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let ok_pos = |v: f64| v > 0.0 && v.is_finite();
        if !ok_pos(self.p_max) || !ok_pos(self.t_load) || !ok_pos(self.t_unload) {
            return Err(Error::InvalidInput(format!(
                "schedule needs positive P_max, t_load, t_unload; got {}, {}, {}",
                self.p_max, self.t_load, self.t_unload
            )));
        }
        match self.profile {
            Profile::Triangular if self.t_hold != 0.0 => {
                return Err(Error::InvalidInput(format!("triangular schedule with hold {}", self.t_hold)))
            }
            Profile::Trapezoidal if !ok_pos(self.t_hold) => {
                return Err(Error::InvalidInput(format!("trapezoidal schedule needs a positive hold, got {}", self.t_hold)))
            }
            _ => {}
        }
        let min_samples = if self.profile == Profile::Trapezoidal { 4 } else { 3 };
        if self.n_samples < min_samples {
            return Err(Error::InvalidInput(format!(
                "schedule needs at least {min_samples} samples, got {}",
                self.n_samples
            )));
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.t_load + self.t_hold + self.t_unload
    }

    /// Load (mN) at time `t`; zero outside the schedule.
    pub fn load_at(&self, t: f64) -> f64 {
        let t_peak_end = self.t_load + self.t_hold;
        if t <= 0.0 || t >= self.duration() {
            0.0
        } else if t < self.t_load {
            self.p_max * t / self.t_load
        } else if t <= t_peak_end {
            self.p_max
        } else {
            self.p_max * (self.duration() - t) / self.t_unload
        }
    }

    /// Unloading rate magnitude (mN/s).
    pub fn unload_rate(&self) -> f64 {
        self.p_max / self.t_unload
    }

    fn segment_durations(&self) -> Vec<f64> {
        match self.profile {
            Profile::Triangular => vec![self.t_load, self.t_unload],
            Profile::Trapezoidal => vec![self.t_load, self.t_hold, self.t_unload],
        }
    }

    /// Sample times. Segment corners are always sampled; the remaining
    /// intervals are shared between segments in proportion to their duration
    /// (largest remainder) and spaced uniformly inside each segment.
    pub fn sample_times(&self) -> Vec<f64> {
        let durations = self.segment_durations();
        let intervals = self.n_samples - 1;
        let total: f64 = durations.iter().sum();
        let mut counts: Vec<usize> = vec![1; durations.len()];
        let spare = intervals - durations.len();
        let shares: Vec<f64> = durations.iter().map(|d| d / total * spare as f64).collect();
        for (c, s) in counts.iter_mut().zip(&shares) {
            *c += s.floor() as usize;
        }
        let mut left = intervals - counts.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..durations.len()).collect();
        order.sort_by(|&a, &b| {
            let fa = shares[a] - shares[a].floor();
            let fb = shares[b] - shares[b].floor();
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        for &i in order.iter().cycle() {
            if left == 0 {
                break;
            }
            counts[i] += 1;
            left -= 1;
        }

        let mut times = Vec::with_capacity(self.n_samples);
        times.push(0.0);
        let mut start = 0.0;
        for (d, n) in durations.iter().zip(&counts) {
            for k in 1..=*n {
                times.push(if k == *n { start + d } else { start + d * k as f64 / *n as f64 });
            }
            start += d;
        }
        times
    }

    pub fn segment_at(&self, t: f64) -> Segment {
        if t <= self.t_load {
            Segment::Loading
        } else if t < self.t_load + self.t_hold {
            Segment::Hold
        } else {
            Segment::Unloading
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangular_times_and_loads() {
        let s = LoadSchedule::triangular(1.0, 15.0, 15.0, 101).unwrap();
        let t = s.sample_times();
        assert_eq!(t.len(), 101);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[50], 15.0);
        assert_eq!(*t.last().unwrap(), 30.0);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(s.load_at(15.0), 1.0);
        assert_eq!(s.load_at(30.0), 0.0);
        assert!((s.load_at(7.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn trapezoidal_corners_sampled() {
        let s = LoadSchedule::trapezoidal(4.9, 10.0, 20.0, 5.0, 100).unwrap();
        let t = s.sample_times();
        assert_eq!(t.len(), 100);
        assert!(t.contains(&10.0) && t.contains(&30.0) && t.contains(&35.0));
        assert!(t.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(s.segment_at(20.0), Segment::Hold);
        assert_eq!(s.segment_at(33.0), Segment::Unloading);
        assert!((s.unload_rate() - 0.98).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid() {
        assert!(LoadSchedule::triangular(0.0, 1.0, 1.0, 10).is_err());
        assert!(LoadSchedule::triangular(1.0, 1.0, 1.0, 2).is_err());
        assert!(LoadSchedule::trapezoidal(1.0, 1.0, 0.0, 1.0, 10).is_err());
    }
}
