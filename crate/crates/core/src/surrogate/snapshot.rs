use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Parameter matrix `p` (d x M) and output matrix `u` (N x M), one column per run.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    pub p: DMatrix<f64>,
    pub u: DMatrix<f64>,
    /// Per-parameter `(lo, hi)` used for normalisation.
    pub bounds: Vec<(f64, f64)>,
}

impl SnapshotSet {
    pub fn new(p: DMatrix<f64>, u: DMatrix<f64>, bounds: Vec<(f64, f64)>) -> Result<Self> {
        if p.ncols() != u.ncols() {
            return Err(Error::InvalidInput(format!("{} parameter columns but {} output columns", p.ncols(), u.ncols())));
        }
        if p.ncols() < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 snapshots, got {}", p.ncols())));
        }
        if bounds.len() != p.nrows() {
            return Err(Error::InvalidInput(format!("{} bounds for {} parameters", bounds.len(), p.nrows())));
        }
        if let Some((i, b)) = bounds.iter().enumerate().find(|(_, b)| !(b.0 < b.1)) {
            return Err(Error::InvalidInput(format!("bounds of parameter {i} are not increasing: {b:?}")));
        }
        Ok(Self { p, u, bounds })
    }

    pub fn len(&self) -> usize {
        self.p.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.p.ncols() == 0
    }

    /// Parameters mapped to `[0, 1]` per dimension.
    pub fn normalized_params(&self) -> DMatrix<f64> {
        normalize(&self.p, &self.bounds)
    }

    /// SHA-256 over bounds, parameters and outputs (little-endian f64 bytes).
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for dims in [self.p.nrows(), self.u.nrows(), self.p.ncols()] {
            h.update((dims as u64).to_le_bytes());
        }
        for (lo, hi) in &self.bounds {
            h.update(lo.to_le_bytes());
            h.update(hi.to_le_bytes());
        }
        for v in self.p.iter().chain(self.u.iter()) {
            h.update(v.to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

pub(crate) fn normalize(p: &DMatrix<f64>, bounds: &[(f64, f64)]) -> DMatrix<f64> {
    DMatrix::from_fn(p.nrows(), p.ncols(), |i, j| (p[(i, j)] - bounds[i].0) / (bounds[i].1 - bounds[i].0))
}

/// Evaluate `forward` at every parameter set (in parallel) and stack the
/// results column by column in the given order.
pub fn build_snapshots<F>(param_sets: &[Vec<f64>], bounds: &[(f64, f64)], forward: F) -> Result<SnapshotSet>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    if param_sets.len() < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 parameter sets, got {}", param_sets.len())));
    }
    let d = bounds.len();
    for (j, ps) in param_sets.iter().enumerate() {
        if ps.len() != d {
            return Err(Error::InvalidInput(format!("parameter set {j} has {} entries, expected {d}", ps.len())));
        }
        if let Some(i) = (0..d).find(|&i| ps[i] < bounds[i].0 || ps[i] > bounds[i].1) {
            return Err(Error::InvalidInput(format!(
                "parameter set {j}: value {} of parameter {i} is outside {:?}",
                ps[i], bounds[i]
            )));
        }
    }
    let outputs: Vec<Result<Vec<f64>>> = param_sets.par_iter().map(|ps| forward(ps)).collect();
    let mut failed = Vec::new();
    let mut first_message = None;
    for (j, r) in outputs.iter().enumerate() {
        if let Err(e) = r {
            failed.push(j);
            first_message.get_or_insert_with(|| e.to_string());
        }
    }
    if !failed.is_empty() {
        return Err(Error::SnapshotFailure { columns: failed, message: first_message.unwrap_or_default() });
    }
    let outputs: Vec<Vec<f64>> = outputs.into_iter().map(|r| r.expect("checked")).collect();
    let n = outputs[0].len();
    if let Some(j) = outputs.iter().position(|o| o.len() != n) {
        return Err(Error::SnapshotFailure {
            columns: vec![j],
            message: format!("output length {} differs from {n}", outputs[j].len()),
        });
    }
    let m = param_sets.len();
    let p = DMatrix::from_fn(d, m, |i, j| param_sets[j][i]);
    let u = DMatrix::from_fn(n, m, |i, j| outputs[j][i]);
    SnapshotSet::new(p, u, bounds.to_vec())
}

/// `U' = U (1 + level xi)` with `xi` uniform on `[-1, 1]`, one draw per entry
/// in column-major order.
pub fn add_noise(snapshots: &SnapshotSet, level: f64, seed: u64) -> Result<SnapshotSet> {
    if !(level >= 0.0) {
        return Err(Error::InvalidInput(format!("noise level must be >= 0, got {level}")));
    }
    let mut out = snapshots.clone();
    if level == 0.0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in out.u.iter_mut() {
        let xi: f64 = rng.random_range(-1.0..=1.0);
        *v *= 1.0 + level * xi;
    }
    Ok(out)
}
