use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use super::kernel::Kernel;
use super::pod::{amplitudes, pod_reduce, PodBasis};
use super::snapshot::SnapshotSet;
use crate::error::{Error, Result};

/// Interpolation matrices with a condition estimate above this are rejected.
pub const MAX_CONDITION: f64 = 1e14;
/// Default shape parameter.
pub const DEFAULT_SHAPE: f64 = 0.5;

const FORMAT_TAG: &str = "indentfit-surrogate";
const FORMAT_VERSION: u32 = 1;

/// Trained POD-RBF surrogate. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateModel {
    pub basis: PodBasis,
    /// K x M coefficients with `B F = A`.
    pub b: DMatrix<f64>,
    pub kernel: Kernel,
    pub shape: f64,
    /// d x M training inputs normalised to `[0, 1]`.
    pub p_train: DMatrix<f64>,
    pub bounds: Vec<(f64, f64)>,
    pub energy_threshold: f64,
    /// Content hash of the training snapshots.
    pub training_hash: String,
    /// Condition estimate of the interpolation matrix.
    pub condition: f64,
}

/// Output of [`SurrogateModel::predict`].
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub values: DVector<f64>,
    /// The query lay outside the training bounds.
    pub extrapolated: bool,
}

fn interpolation_matrix(p: &DMatrix<f64>, kernel: Kernel, shape: f64) -> DMatrix<f64> {
    let m = p.ncols();
    DMatrix::from_fn(m, m, |i, j| kernel.eval((p.column(i) - p.column(j)).norm(), shape))
}

/// Ratio of extreme eigenvalue magnitudes of a symmetric matrix.
fn condition_estimate(f: &DMatrix<f64>) -> f64 {
    let eig = f.clone().symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &l| (lo.min(l.abs()), hi.max(l.abs())));
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

impl SurrogateModel {
    pub fn train(snapshots: &SnapshotSet, kernel: Kernel, shape: f64, energy_threshold: f64) -> Result<Self> {
        if kernel.uses_shape() && !(shape > 0.0 && shape.is_finite()) {
            return Err(Error::InvalidInput(format!("shape parameter must be positive for {kernel}, got {shape}")));
        }
        let basis = pod_reduce(&snapshots.u, energy_threshold)?;
        let a = amplitudes(&basis, &snapshots.u)?;
        let p_train = snapshots.normalized_params();
        let f = interpolation_matrix(&p_train, kernel, shape);
        let condition = condition_estimate(&f);
        if !(condition <= MAX_CONDITION) {
            return Err(Error::IllConditioned { condition });
        }
        // B F = A  <=>  F B^T = A^T, F symmetric
        let bt = f
            .lu()
            .solve(&a.transpose())
            .ok_or_else(|| Error::Singular("RBF interpolation matrix".into()))?;
        Ok(Self {
            basis,
            b: bt.transpose(),
            kernel,
            shape,
            p_train,
            bounds: snapshots.bounds.clone(),
            energy_threshold,
            training_hash: snapshots.content_hash(),
            condition,
        })
    }

    pub fn n_params(&self) -> usize {
        self.p_train.nrows()
    }

    pub fn n_outputs(&self) -> usize {
        self.basis.phi.nrows()
    }

    pub fn n_train(&self) -> usize {
        self.p_train.ncols()
    }

    /// `phi B f(p)` with `f(p)_i = kernel(|p - p_i|)` in normalised coordinates.
    pub fn predict(&self, p: &[f64]) -> Result<Prediction> {
        if p.len() != self.n_params() {
            return Err(Error::InvalidInput(format!("expected {} parameters, got {}", self.n_params(), p.len())));
        }
        let extrapolated = p.iter().zip(&self.bounds).any(|(v, (lo, hi))| v < lo || v > hi);
        let q = DVector::from_iterator(p.len(), p.iter().zip(&self.bounds).map(|(v, (lo, hi))| (v - lo) / (hi - lo)));
        let f = DVector::from_fn(self.n_train(), |i, _| self.kernel.eval((&q - self.p_train.column(i)).norm(), self.shape));
        let values = &self.basis.phi * (&self.b * f);
        Ok(Prediction { values, extrapolated })
    }

    /// Relative errors `|predicted - actual| / |actual|` at held-out points.
    pub fn validation_report(&self, inputs: &DMatrix<f64>, outputs: &DMatrix<f64>) -> Result<ValidationReport> {
        if inputs.ncols() != outputs.ncols() || outputs.nrows() != self.n_outputs() || inputs.nrows() != self.n_params() {
            return Err(Error::InvalidInput(format!(
                "holdout shapes {}x{} / {}x{} do not match model ({} params, {} outputs)",
                inputs.nrows(),
                inputs.ncols(),
                outputs.nrows(),
                outputs.ncols(),
                self.n_params(),
                self.n_outputs()
            )));
        }
        let mut per_point = Vec::with_capacity(inputs.ncols());
        for j in 0..inputs.ncols() {
            let p: Vec<f64> = inputs.column(j).iter().copied().collect();
            let pred = self.predict(&p)?;
            let actual = outputs.column(j);
            per_point.push((pred.values - actual).norm() / actual.norm());
        }
        Ok(ValidationReport::from_errors(per_point))
    }

    /// Serialise to the versioned text format. Floats are written in their
    /// shortest round-trip form, so reading back is bit-exact.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let d = self.n_params();
        let n = self.n_outputs();
        let m = self.n_train();
        let k = self.basis.rank();
        let _ = writeln!(s, "{FORMAT_TAG} {FORMAT_VERSION}");
        let _ = writeln!(s, "kernel {}", self.kernel);
        let _ = writeln!(s, "shape {}", self.shape);
        let _ = writeln!(s, "energy_threshold {}", self.energy_threshold);
        let _ = writeln!(s, "energy_retained {}", self.basis.energy_retained);
        let _ = writeln!(s, "condition {}", self.condition);
        let _ = writeln!(s, "training_hash {}", self.training_hash);
        let _ = writeln!(s, "dims {d} {n} {m} {k}");
        let _ = writeln!(s, "bounds");
        for (lo, hi) in &self.bounds {
            let _ = writeln!(s, "{lo} {hi}");
        }
        let _ = writeln!(s, "lambdas");
        let _ = writeln!(s, "{}", join(self.basis.lambdas.iter()));
        write_matrix(&mut s, "phi", &self.basis.phi);
        write_matrix(&mut s, "b", &self.b);
        write_matrix(&mut s, "p_train", &self.p_train);
        s
    }

    /// Parse [`Self::to_text`] output. Lines starting with `#` are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let body: String = text.lines().filter(|l| !l.trim_start().starts_with('#')).flat_map(|l| [l, "\n"]).collect();
        let mut tok = Tokens { it: body.split_whitespace() };
        let tag = tok.word()?;
        if tag != FORMAT_TAG {
            return Err(Error::Format(format!("not a surrogate file (starts with '{tag}')")));
        }
        let version: u32 = tok.parse()?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported surrogate format version {version}")));
        }
        tok.expect("kernel")?;
        let kernel: Kernel = tok.word()?.parse().map_err(|e: Error| Error::Format(e.to_string()))?;
        tok.expect("shape")?;
        let shape = tok.parse()?;
        tok.expect("energy_threshold")?;
        let energy_threshold = tok.parse()?;
        tok.expect("energy_retained")?;
        let energy_retained = tok.parse()?;
        tok.expect("condition")?;
        let condition = tok.parse()?;
        tok.expect("training_hash")?;
        let training_hash = tok.word()?.to_string();
        tok.expect("dims")?;
        let (d, n, m, k): (usize, usize, usize, usize) = (tok.parse()?, tok.parse()?, tok.parse()?, tok.parse()?);
        tok.expect("bounds")?;
        let mut bounds = Vec::with_capacity(d);
        for _ in 0..d {
            bounds.push((tok.parse()?, tok.parse()?));
        }
        tok.expect("lambdas")?;
        let lambdas = (0..m).map(|_| tok.parse()).collect::<Result<Vec<f64>>>()?;
        let phi = tok.matrix("phi", n, k)?;
        let b = tok.matrix("b", k, m)?;
        let p_train = tok.matrix("p_train", d, m)?;
        if tok.it.next().is_some() {
            return Err(Error::Format("trailing data after p_train".into()));
        }
        Ok(Self {
            basis: PodBasis { phi, lambdas, energy_retained },
            b,
            kernel,
            shape,
            p_train,
            bounds,
            energy_threshold,
            training_hash,
            condition,
        })
    }
}

fn join<'a>(it: impl Iterator<Item = &'a f64>) -> String {
    it.map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn write_matrix(s: &mut String, name: &str, m: &DMatrix<f64>) {
    let _ = writeln!(s, "{name} {} {}", m.nrows(), m.ncols());
    for r in 0..m.nrows() {
        let _ = writeln!(s, "{}", join(m.row(r).iter()));
    }
}

struct Tokens<'a> {
    it: std::str::SplitWhitespace<'a>,
}

impl<'a> Tokens<'a> {
    fn word(&mut self) -> Result<&'a str> {
        self.it.next().ok_or_else(|| Error::Format("unexpected end of file".into()))
    }

    fn expect(&mut self, key: &str) -> Result<()> {
        let w = self.word()?;
        if w == key {
            Ok(())
        } else {
            Err(Error::Format(format!("expected '{key}', found '{w}'")))
        }
    }

    fn parse<T: std::str::FromStr>(&mut self) -> Result<T> {
        let w = self.word()?;
        w.parse().map_err(|_| Error::Format(format!("cannot parse '{w}'")))
    }

    fn matrix(&mut self, name: &str, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
        self.expect(name)?;
        let (r, c): (usize, usize) = (self.parse()?, self.parse()?);
        if (r, c) != (rows, cols) {
            return Err(Error::Format(format!("{name} is {r}x{c}, expected {rows}x{cols}")));
        }
        let data = (0..r * c).map(|_| self.parse()).collect::<Result<Vec<f64>>>()?;
        Ok(DMatrix::from_row_slice(r, c, &data))
    }
}

/// Per-point and summary relative errors.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub per_point: Vec<f64>,
    pub mean: f64,
    pub worst: f64,
}

impl ValidationReport {
    pub fn from_errors(per_point: Vec<f64>) -> Self {
        let mean = per_point.iter().sum::<f64>() / per_point.len().max(1) as f64;
        let worst = per_point.iter().copied().fold(0.0, f64::max);
        Self { per_point, mean, worst }
    }
}

/// Mean validation error for each shape parameter in `shapes`. Shapes that
/// make the interpolation ill-conditioned report `None`.
pub fn shape_sweep(
    snapshots: &SnapshotSet,
    kernel: Kernel,
    energy_threshold: f64,
    shapes: &[f64],
    holdout_inputs: &DMatrix<f64>,
    holdout_outputs: &DMatrix<f64>,
) -> Result<Vec<(f64, Option<f64>)>> {
    shapes
        .iter()
        .map(|&c| match SurrogateModel::train(snapshots, kernel, c, energy_threshold) {
            Ok(model) => Ok((c, Some(model.validation_report(holdout_inputs, holdout_outputs)?.mean))),
            Err(Error::IllConditioned { .. }) => Ok((c, None)),
            Err(e) => Err(e),
        })
        .collect()
}
