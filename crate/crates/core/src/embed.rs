//! Kernel PCA embeddings, entropy time series and cluster quality.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernels::shannon_entropy;
use crate::labels::LabelDistribution;
use crate::numeric::sqrt;
use crate::spectral::sorted_symmetric_eigen;

/// Low-dimensional coordinates of a graph collection.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    /// One row per graph, one column per component.
    pub coordinates: DMatrix<f64>,
    /// Share of the positive centered spectrum carried by each component.
    pub explained: Vec<f64>,
    pub graph_ids: Vec<String>,
    /// Magnitude of the most negative centered eigenvalue, clamped to zero.
    pub clamped_magnitude: f64,
}

/// Kernel PCA of a Gram matrix into `d` dimensions.
///
/// The Gram matrix is double centered and its eigenvectors are scaled by the
/// square roots of their eigenvalues. Each component is oriented so that its
/// largest-magnitude coordinate is positive.
pub fn kpca(k: &DMatrix<f64>, graph_ids: &[String], d: usize) -> Result<Embedding> {
    let n = k.nrows();
    if k.ncols() != n || graph_ids.len() != n {
        return Err(Error::integrity(format!("gram is {:?} for {} ids", k.shape(), graph_ids.len())));
    }
    if d == 0 || d > n {
        return Err(Error::validation(format!("cannot embed {n} graphs into {d} dimensions")));
    }
    let row_means: Vec<f64> = (0..n).map(|i| k.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let centered = DMatrix::from_fn(n, n, |i, j| k[(i, j)] - row_means[i] - row_means[j] + grand);
    let centered = (&centered + centered.transpose()) * 0.5;

    let (values, vectors) = sorted_symmetric_eigen(centered);
    let min = values.iter().copied().fold(0.0, f64::min);
    let positive: f64 = values.iter().filter(|&&l| l > 0.0).sum();

    let mut coordinates = DMatrix::zeros(n, d);
    let mut explained = Vec::with_capacity(d);
    for c in 0..d {
        let idx = n - 1 - c;
        let lambda = values[idx].max(0.0);
        let col = vectors.column(idx);
        let pivot = (0..n).max_by(|&a, &b| col[a].abs().total_cmp(&col[b].abs()).then(b.cmp(&a))).unwrap_or(0);
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        let scale = sign * sqrt(lambda);
        for i in 0..n {
            coordinates[(i, c)] = col[i] * scale;
        }
        explained.push(if positive > 0.0 { lambda / positive } else { 0.0 });
    }
    if min < 0.0 {
        log::debug!("kernel PCA clamped eigenvalue {min}");
    }
    Ok(Embedding { coordinates, explained, graph_ids: graph_ids.to_vec(), clamped_magnitude: -min })
}

/// Shannon entropy of each distribution, in timestamp order. Timestamps must
/// be strictly increasing.
pub fn entropy_series<T: Ord + Clone>(points: &[(T, &LabelDistribution)]) -> Result<Vec<(T, f64)>> {
    if points.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::validation("timestamps are not strictly increasing"));
    }
    points.iter().map(|(t, p)| Ok((t.clone(), shannon_entropy(p)?))).collect()
}

/// Mean silhouette coefficient of the rows of `points` under Euclidean
/// distance. Singleton clusters score zero.
pub fn silhouette<L: Ord>(points: &DMatrix<f64>, labels: &[L]) -> Result<f64> {
    let n = points.nrows();
    if labels.len() != n {
        return Err(Error::integrity(format!("{} labels for {n} points", labels.len())));
    }
    let mut clusters: Vec<&L> = labels.iter().collect();
    clusters.sort_unstable();
    clusters.dedup();
    if clusters.len() < 2 {
        return Err(Error::validation("silhouette needs at least two clusters"));
    }
    let cluster_of: Vec<usize> = labels.iter().map(|l| clusters.binary_search(&l).expect("label present")).collect();
    let dist = |i: usize, j: usize| sqrt((points.row(i) - points.row(j)).norm_squared());
    let mut total = 0.0;
    for i in 0..n {
        let mut sums = alloc::vec![0.0; clusters.len()];
        let mut counts = alloc::vec![0usize; clusters.len()];
        for j in (0..n).filter(|&j| j != i) {
            sums[cluster_of[j]] += dist(i, j);
            counts[cluster_of[j]] += 1;
        }
        let own = cluster_of[i];
        if counts[own] == 0 {
            continue;
        }
        let a = sums[own] / counts[own] as f64;
        let b = (0..clusters.len())
            .filter(|&c| c != own && counts[c] > 0)
            .map(|c| sums[c] / counts[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    Ok(total / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::directed_edge_label;
    use alloc::string::ToString;
    use alloc::vec;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn linear_kernel_recovers_centered_distances() {
        let x = [[0.0, 0.0], [3.0, 0.0], [0.0, 1.0], [3.0, 1.0]];
        let k = DMatrix::from_fn(4, 4, |i, j| x[i][0] * x[j][0] + x[i][1] * x[j][1]);
        let e = kpca(&k, &ids(4), 2).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let orig = (x[i][0] - x[j][0]).powi(2) + (x[i][1] - x[j][1]).powi(2);
                let emb = (e.coordinates.row(i) - e.coordinates.row(j)).norm_squared();
                assert!((orig - emb).abs() < 1e-10);
            }
        }
        assert!((e.explained[0] - 0.9).abs() < 1e-12);
        assert!(e.clamped_magnitude < 1e-12);
    }

    #[test]
    fn sign_convention_is_applied() {
        let k = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.1, 0.5, 1.0, 0.3, 0.1, 0.3, 1.5]);
        let e = kpca(&k, &ids(3), 2).unwrap();
        for c in 0..2 {
            let col = e.coordinates.column(c);
            let big = col.iter().copied().max_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap();
            assert!(big > 0.0);
        }
    }

    #[test]
    fn too_many_dimensions_rejected() {
        let k = DMatrix::identity(2, 2);
        assert!(kpca(&k, &ids(2), 3).is_err());
    }

    #[test]
    fn entropy_series_requires_increasing_time() {
        let mut m = alloc::collections::BTreeMap::new();
        m.insert(directed_edge_label("a", "b", None), 0.5);
        m.insert(directed_edge_label("b", "a", None), 0.5);
        let p = LabelDistribution::from_masses(m, 0, "s");
        let s = entropy_series(&[(1, &p), (2, &p)]).unwrap();
        assert_eq!(s, vec![(1, 1.0), (2, 1.0)]);
        assert!(entropy_series(&[(2, &p), (2, &p)]).is_err());
    }

    #[test]
    fn silhouette_of_separated_clusters() {
        let p = DMatrix::from_row_slice(4, 1, &[0.0, 0.1, 10.0, 10.1]);
        let s = silhouette(&p, &[0, 0, 1, 1]).unwrap();
        assert!(s > 0.98);
        assert!(silhouette(&p, &[0, 0, 0, 0]).is_err());
    }
}
