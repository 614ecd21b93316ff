//! Laplacian spectrum, commute times and the modified commute time matrix.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Eigenvalues at or below this fraction of the largest one count as zero.
pub const ZERO_EIGENVALUE_RTOL: f64 = 1e-9;

/// Commute times of a connected graph together with the Laplacian spectrum
/// they were derived from.
#[derive(Debug, Clone)]
pub struct CommuteTimeResult {
    /// `commute[(u, v)]`: expected steps of a random walk from `u` to `v` and back.
    pub commute: DMatrix<f64>,
    /// Laplacian eigenvalues, ascending.
    pub eigenvalues: DVector<f64>,
    /// Orthonormal eigenvectors as columns, matching `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
    /// Sum of weighted degrees.
    pub volume: f64,
}

/// Unnormalized Laplacian `D - A`.
pub fn laplacian(w: &DMatrix<f64>) -> DMatrix<f64> {
    let n = w.nrows();
    let mut l = -w.clone();
    for u in 0..n {
        l[(u, u)] = w.row(u).sum();
    }
    l
}

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted ascending.
pub fn sorted_symmetric_eigen(m: DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let n = eig.eigenvalues.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, idx.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
    (values, vectors)
}

/// Commute time matrix from the spectrum of the unnormalized Laplacian:
/// `C(u, v) = vol * sum_{j >= 2} (phi_j(u) - phi_j(v))^2 / lambda_j`.
pub fn commute_time_matrix(g: &WeightedGraph) -> Result<CommuteTimeResult> {
    let n = g.n();
    if n < 2 {
        return Err(Error::Degenerate(format!("commute time needs at least 2 vertices, got {n}")));
    }
    let comps = g.components();
    if comps.len() > 1 {
        return Err(Error::Disconnected { components: comps });
    }

    let w = g.weights();
    let volume = w.sum();
    let (eigenvalues, eigenvectors) = sorted_symmetric_eigen(laplacian(w));
    let lambda_max = eigenvalues[n - 1];
    let threshold = ZERO_EIGENVALUE_RTOL * lambda_max;
    let zeros = eigenvalues.iter().filter(|&&l| l <= threshold).count();
    if zeros != 1 {
        // Weights spanning many orders of magnitude can hide a near-split graph.
        return Err(Error::Disconnected { components: comps });
    }

    // Pseudo-inverse of L restricted to the nontrivial spectrum.
    let mut scaled = eigenvectors.columns(1, n - 1).into_owned();
    for j in 0..(n - 1) {
        let s = 1.0 / crate::numeric::sqrt(eigenvalues[j + 1]);
        scaled.column_mut(j).scale_mut(s);
    }
    let pinv = &scaled * scaled.transpose();

    let mut commute = DMatrix::zeros(n, n);
    for u in 0..n {
        for v in (u + 1)..n {
            let c = volume * (pinv[(u, u)] + pinv[(v, v)] - 2.0 * pinv[(u, v)]);
            let c = c.max(0.0);
            commute[(u, v)] = c;
            commute[(v, u)] = c;
        }
    }
    Ok(CommuteTimeResult { commute, eigenvalues, eigenvectors, volume })
}

/// `Q = C ⊙ A`: commute times masked and scaled by the original weights.
pub fn modified_commute_matrix(g: &WeightedGraph, ct: &CommuteTimeResult) -> Result<DMatrix<f64>> {
    let a = g.weights();
    if ct.commute.shape() != a.shape() {
        return Err(Error::integrity(format!(
            "commute matrix is {:?} but graph weights are {:?}",
            ct.commute.shape(),
            a.shape()
        )));
    }
    Ok(ct.commute.component_mul(a))
}
