use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Truncated proper orthogonal basis of a snapshot matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PodBasis {
    /// N x K, orthonormal columns.
    pub phi: DMatrix<f64>,
    /// All M eigenvalues of the snapshot correlation, descending.
    pub lambdas: Vec<f64>,
    /// Fraction of the eigenvalue sum carried by the kept modes.
    pub energy_retained: f64,
}

impl PodBasis {
    pub fn rank(&self) -> usize {
        self.phi.ncols()
    }
}

/// Smallest `K` whose leading eigenvalues reach `threshold` of the total,
/// limited to the `usable` leading modes. Returns `(K, retained fraction)`.
pub fn truncation_rank(lambdas: &[f64], threshold: f64, usable: usize) -> (usize, f64) {
    let total: f64 = lambdas.iter().sum();
    if total <= 0.0 || usable == 0 {
        return (0, 0.0);
    }
    let target = threshold * (1.0 - 1e-12);
    let mut cum = 0.0;
    for (k, &l) in lambdas.iter().take(usable).enumerate() {
        cum += l;
        if cum / total >= target {
            return (k + 1, cum / total);
        }
    }
    (usable, cum / total)
}

/// POD of the snapshot matrix `u` (N x M, columns are snapshots, not centred).
///
/// The eigenpairs `(lambda_i, v_i)` of the M x M correlation `U^T U` give
/// modes `phi_i = U v_i / sqrt(lambda_i)`, which are then re-orthonormalised.
pub fn pod_reduce(u: &DMatrix<f64>, energy_threshold: f64) -> Result<PodBasis> {
    if !(energy_threshold > 0.0 && energy_threshold <= 1.0) {
        return Err(Error::InvalidInput(format!("energy threshold must lie in (0, 1], got {energy_threshold}")));
    }
    if u.ncols() == 0 || u.nrows() == 0 {
        return Err(Error::InvalidInput("empty snapshot matrix".into()));
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("snapshot matrix contains non-finite values".into()));
    }
    let gram = u.transpose() * u;
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let lambdas: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let lambda1 = lambdas[0];
    let usable = lambdas.iter().take_while(|&&l| lambda1 > 0.0 && l > RANK_TOLERANCE * lambda1).count();
    let (k, energy) = truncation_rank(&lambdas, energy_threshold, usable);

    let mut phi = DMatrix::zeros(u.nrows(), k);
    for (j, &i) in order.iter().take(k).enumerate() {
        let v = eig.eigenvectors.column(i);
        let mut col = u * v / lambdas[j].sqrt();
        // fix the sign so the largest entry of the eigenvector is positive
        let pivot = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if pivot < 0.0 {
            col = -col;
        }
        phi.set_column(j, &col);
    }
    orthonormalize(&mut phi);
    Ok(PodBasis { phi, lambdas, energy_retained: energy })
}

/// Modified Gram-Schmidt, applied twice.
fn orthonormalize(phi: &mut DMatrix<f64>) {
    for _ in 0..2 {
        for j in 0..phi.ncols() {
            let mut v: DVector<f64> = phi.column(j).into_owned();
            for i in 0..j {
                let q = phi.column(i);
                let proj = q.dot(&v);
                v.axpy(-proj, &q, 1.0);
            }
            let n = v.norm();
            phi.set_column(j, &(v / n));
        }
    }
}

/// Amplitude matrix `A = phi^T U` (K x M).
pub fn amplitudes(basis: &PodBasis, u: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if basis.phi.nrows() != u.nrows() {
        return Err(Error::InvalidInput(format!(
            "basis has {} rows but snapshots have {}",
            basis.phi.nrows(),
            u.nrows()
        )));
    }
    Ok(basis.phi.transpose() * u)
}
