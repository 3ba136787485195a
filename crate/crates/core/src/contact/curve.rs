use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Ordered `(t [s], P [mN], h [nm])` samples of one indentation test.
#[derive(Debug, Clone, PartialEq)]
pub struct LdCurve {
    t: Vec<f64>,
    p: Vec<f64>,
    h: Vec<f64>,
}

const HEADER: [&str; 3] = ["t_s", "P_mN", "h_nm"];

impl LdCurve {
    /// Checks: equal lengths, at least two samples, strictly increasing time,
    /// nonnegative load, and a first sample at zero load and depth.
    pub fn new(t: Vec<f64>, p: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        if t.len() != p.len() || t.len() != h.len() {
            return Err(Error::InvalidInput(format!(
                "column lengths differ: t {}, P {}, h {}",
                t.len(),
                p.len(),
                h.len()
            )));
        }
        if t.len() < 2 {
            return Err(Error::InvalidInput("a curve needs at least two samples".into()));
        }
        if let Some(i) = (0..t.len()).find(|&i| !(t[i].is_finite() && p[i].is_finite() && h[i].is_finite())) {
            return Err(Error::InvalidInput(format!("non-finite value at sample {i}")));
        }
        if let Some(i) = (1..t.len()).find(|&i| t[i] <= t[i - 1]) {
            return Err(Error::InvalidInput(format!(
                "time is not strictly increasing at sample {i} ({} after {})",
                t[i],
                t[i - 1]
            )));
        }
        if let Some(i) = p.iter().position(|&v| v < 0.0) {
            return Err(Error::InvalidInput(format!("negative load {} at sample {i}", p[i])));
        }
        if p[0] != 0.0 || h[0] != 0.0 {
            return Err(Error::InvalidInput(format!(
                "first sample must be at zero load and depth, got P = {}, h = {}",
                p[0], h[0]
            )));
        }
        Ok(Self { t, p, h })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn loads(&self) -> &[f64] {
        &self.p
    }

    pub fn depths(&self) -> &[f64] {
        &self.h
    }

    /// Copy of the curve with depths replaced.
    pub fn with_depths(&self, h: Vec<f64>) -> Result<Self> {
        Self::new(self.t.clone(), self.p.clone(), h)
    }

    pub fn max_load(&self) -> f64 {
        self.p.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_depth(&self) -> f64 {
        self.h.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Depth at the last sample.
    pub fn residual_depth(&self) -> f64 {
        *self.h.last().expect("curve is nonempty")
    }

    /// First and last index at which the load equals its maximum. Samples
    /// between them form the hold segment.
    pub fn peak_span(&self) -> (usize, usize) {
        let pm = self.max_load();
        let first = self.p.iter().position(|&v| v == pm).expect("max is attained");
        let last = self.p.iter().rposition(|&v| v == pm).expect("max is attained");
        (first, last)
    }

    /// Depth rate (nm/s) at the end of the hold, from a least-squares line
    /// through the last `fraction` of the hold samples (at least two).
    pub fn hold_creep_rate(&self, fraction: f64) -> Result<f64> {
        let (first, last) = self.peak_span();
        if last == first {
            return Err(Error::InvalidInput("curve has no hold segment at peak load".into()));
        }
        let n_hold = last - first + 1;
        let n = ((n_hold as f64 * fraction).ceil() as usize).clamp(2, n_hold);
        let idx = last + 1 - n..=last;
        let ts: Vec<f64> = self.t[idx.clone()].to_vec();
        let hs: Vec<f64> = self.h[idx].to_vec();
        Ok(least_squares_slope(&ts, &hs))
    }

    /// Interpolate this curve onto the load grid of `grid`.
    ///
    /// Loading samples of `grid` are matched by load on this curve's loading
    /// branch, unloading samples by load on its unloading branch, and hold
    /// samples by time. Values outside a branch are clamped to its ends.
    pub fn resample_onto(&self, grid: &LdCurve) -> Result<LdCurve> {
        let (self_first, self_last) = self.peak_span();
        let (grid_first, grid_last) = grid.peak_span();
        let load_p = &self.p[..=self_first];
        let load_h = &self.h[..=self_first];
        let unload_p: Vec<f64> = self.p[self_last..].iter().rev().copied().collect();
        let unload_h: Vec<f64> = self.h[self_last..].iter().rev().copied().collect();
        let h = (0..grid.len())
            .map(|i| {
                let p = grid.p[i];
                if i <= grid_first {
                    interp_monotone(load_p, load_h, p)
                } else if i < grid_last {
                    interp_monotone(&self.t, &self.h, grid.t[i])
                } else {
                    interp_monotone(&unload_p, &unload_h, p)
                }
            })
            .collect();
        LdCurve::new(grid.t.clone(), grid.p.clone(), h)
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Format(e.to_string()))?.clone();
        if headers.iter().collect::<Vec<_>>() != HEADER {
            return Err(Error::Format(format!("expected header {}, got {}", HEADER.join(","), headers.iter().collect::<Vec<_>>().join(","))));
        }
        let (mut t, mut p, mut h) = (Vec::new(), Vec::new(), Vec::new());
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
            let field = |k: usize| -> Result<f64> {
                rec.get(k)
                    .ok_or_else(|| Error::Format(format!("row {}: missing column {}", row + 1, HEADER[k])))?
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("row {}: {}: {e}", row + 1, HEADER[k])))
            };
            t.push(field(0)?);
            p.push(field(1)?);
            h.push(field(2)?);
        }
        Self::new(t, p, h)
    }

    /// Write CSV with optional leading `# ` comment lines.
    pub fn write_csv<W: Write>(&self, mut writer: W, comments: &[String]) -> Result<()> {
        for c in comments {
            writeln!(writer, "# {c}").map_err(|e| Error::Format(e.to_string()))?;
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        let io = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(HEADER).map_err(io)?;
        for i in 0..self.len() {
            w.write_record([self.t[i].to_string(), self.p[i].to_string(), self.h[i].to_string()]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Format(e.to_string()))
    }
}

/// Linear interpolation on an `xs` sequence that is nondecreasing; `x` outside
/// the range is clamped. Repeated abscissae take the later ordinate.
fn interp_monotone(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let j = xs.partition_point(|&v| v <= x);
    let (x0, x1, y0, y1) = (xs[j - 1], xs[j], ys[j - 1], ys[j]);
    if x1 == x0 {
        y1
    } else {
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
