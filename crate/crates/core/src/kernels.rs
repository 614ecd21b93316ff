//! Entropy, Jensen-Shannon divergence and the two label-distribution
//! kernels, plus Gram assembly and a nearest-neighbor smoke classifier.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::labels::{EdgeLabelKey, LabelDistribution};
use crate::numeric::{exp, log2, sqrt};
use crate::pipeline::GraphFeatures;
use crate::sparsify::SparsifyBranch;

/// Allowed deviation of a distribution's total mass from one.
pub const NORMALIZATION_TOL: f64 = 1e-8;

fn check_normalized(p: &LabelDistribution) -> Result<()> {
    let total = p.total();
    if (total - 1.0).abs() > NORMALIZATION_TOL || p.masses.values().any(|&x| !(x >= 0.0)) {
        return Err(Error::validation(format!("distribution is not normalized (total mass {total})")));
    }
    Ok(())
}

/// Shannon entropy in bits, `0 log 0 = 0`.
pub fn shannon_entropy(p: &LabelDistribution) -> Result<f64> {
    check_normalized(p)?;
    Ok(p.masses.values().filter(|&&x| x > 0.0).map(|&x| -x * log2(x)).sum::<f64>().max(0.0))
}

/// Walks the union of keys of two sparse distributions in key order.
fn merge<'a>(
    p: &'a BTreeMap<EdgeLabelKey, f64>,
    q: &'a BTreeMap<EdgeLabelKey, f64>,
) -> impl Iterator<Item = (f64, f64)> + 'a {
    let mut a = p.iter().peekable();
    let mut b = q.iter().peekable();
    core::iter::from_fn(move || match (a.peek(), b.peek()) {
        (Some((ka, _)), Some((kb, _))) => Some(match ka.cmp(kb) {
            core::cmp::Ordering::Less => (*a.next()?.1, 0.0),
            core::cmp::Ordering::Greater => (0.0, *b.next()?.1),
            core::cmp::Ordering::Equal => (*a.next()?.1, *b.next()?.1),
        }),
        (Some(_), None) => Some((*a.next()?.1, 0.0)),
        (None, Some(_)) => Some((0.0, *b.next()?.1)),
        (None, None) => None,
    })
}

/// Jensen-Shannon divergence in bits, `H((P + Q) / 2) - H(P) / 2 - H(Q) / 2`.
///
/// Evaluated as the mean of the two relative entropies to the midpoint, which
/// is the same quantity with every term nonnegative.
pub fn js_divergence(p: &LabelDistribution, q: &LabelDistribution) -> Result<f64> {
    check_normalized(p)?;
    check_normalized(q)?;
    let d: f64 = merge(&p.masses, &q.masses)
        .map(|(x, y)| {
            let m = 0.5 * (x + y);
            let mut t = 0.0;
            if x > 0.0 {
                t += x * log2(x / m);
            }
            if y > 0.0 {
                t += y * log2(y / m);
            }
            0.5 * t
        })
        .sum();
    Ok(d.clamp(0.0, 1.0))
}

/// Dot product of two label distributions.
pub fn k_dp(p: &LabelDistribution, q: &LabelDistribution) -> f64 {
    merge(&p.masses, &q.masses).map(|(x, y)| x * y).sum()
}

/// `exp(-D_JS(P, Q))`.
pub fn k_js(p: &LabelDistribution, q: &LabelDistribution) -> Result<f64> {
    Ok(exp(-js_divergence(p, q)?))
}

/// Which label-distribution kernel to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KernelKind {
    DotProduct,
    JensenShannon,
}

impl KernelKind {
    pub fn eval(self, p: &LabelDistribution, q: &LabelDistribution) -> Result<f64> {
        match self {
            KernelKind::DotProduct => Ok(k_dp(p, q)),
            KernelKind::JensenShannon => k_js(p, q),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::DotProduct => "dp",
            KernelKind::JensenShannon => "js",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dp" => Ok(KernelKind::DotProduct),
            "js" => Ok(KernelKind::JensenShannon),
            other => Err(Error::validation(format!("unknown kernel {other:?}, expected dp or js"))),
        }
    }
}

/// Kernel between two graphs: the mean of the per-round kernels over the
/// refinement rounds both feature sets carry.
pub fn pair_kernel(a: &GraphFeatures, b: &GraphFeatures, kind: KernelKind) -> Result<f64> {
    if a.distributions.len() != b.distributions.len() || a.distributions.is_empty() {
        return Err(Error::integrity(format!(
            "graphs {} and {} carry {} and {} label rounds",
            a.id,
            b.id,
            a.distributions.len(),
            b.distributions.len()
        )));
    }
    let mut total = 0.0;
    for (p, q) in a.distributions.iter().zip(&b.distributions) {
        if p.label_space_id != q.label_space_id || p.h != q.h {
            return Err(Error::integrity(format!("graphs {} and {} use different label spaces", a.id, b.id)));
        }
        total += kind.eval(p, q)?;
    }
    Ok(total / a.distributions.len() as f64)
}

/// How the graphs of a Gram matrix were sparsified.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PolicyRecord {
    pub spanning_tree: usize,
    pub commute_weighted: usize,
    /// `(graph id, original vertex count, kept vertex count)` for graphs
    /// reduced to their largest component.
    pub reduced: Vec<(String, usize, usize)>,
    /// Graphs whose canonical ordering search ran out of budget.
    pub non_canonical: Vec<String>,
}

impl PolicyRecord {
    pub fn from_features(features: &[GraphFeatures]) -> Self {
        let mut rec = PolicyRecord::default();
        for f in features {
            match f.branch {
                SparsifyBranch::SpanningTree => rec.spanning_tree += 1,
                SparsifyBranch::CommuteWeighted => rec.commute_weighted += 1,
            }
            if let Some(r) = &f.reduction {
                rec.reduced.push((f.id.clone(), r.original_n, r.kept_n));
            }
            if !f.canonical {
                rec.non_canonical.push(f.id.clone());
            }
        }
        rec
    }
}

/// Provenance carried alongside Gram values.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMeta {
    pub kernel: KernelKind,
    pub horizon: usize,
    pub h_min: usize,
    pub h_max: usize,
    pub policy: PolicyRecord,
}

/// Symmetric table of kernel values over a graph collection.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub values: DMatrix<f64>,
    pub graph_ids: Vec<String>,
    pub meta: GramMeta,
}

impl GramMatrix {
    pub fn len(&self) -> usize {
        self.graph_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph_ids.is_empty()
    }
}

/// Gram matrix over precomputed features, filled in row-major order.
pub fn gram(features: &[GraphFeatures], kind: KernelKind, horizon: usize, h_min: usize, h_max: usize) -> Result<GramMatrix> {
    let n = features.len();
    let mut values = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let k = pair_kernel(&features[i], &features[j], kind)?;
            values[(i, j)] = k;
            values[(j, i)] = k;
        }
    }
    Ok(GramMatrix {
        values,
        graph_ids: features.iter().map(|f| f.id.clone()).collect(),
        meta: GramMeta { kernel: kind, horizon, h_min, h_max, policy: PolicyRecord::from_features(features) },
    })
}

/// Per-fold and aggregate accuracy of a cross-validated classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
    pub std_error: f64,
}

/// Stratified k-fold assignment. Each class is shuffled with a seeded
/// generator and dealt round-robin across folds.
pub fn stratified_folds<L: Ord>(labels: &[L], folds: usize, seed: u64) -> Result<Vec<usize>> {
    let mut by_class: BTreeMap<&L, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let smallest = by_class.values().map(Vec::len).min().unwrap_or(0);
    if folds < 2 || folds > smallest {
        return Err(Error::validation(format!(
            "{folds} folds need at least {folds} members in every class; smallest class has {smallest}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = alloc::vec![0; labels.len()];
    let mut next = 0;
    for members in by_class.values_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    Ok(assignment)
}

/// Stratified k-fold accuracy of 1-nearest-neighbor under the kernel
/// distance `k(a, a) + k(b, b) - 2 k(a, b)`. Distance ties go to the lower
/// index.
pub fn kernel_1nn_cv<L: Ord + Clone>(gram: &DMatrix<f64>, labels: &[L], folds: usize, seed: u64) -> Result<CvReport> {
    let n = labels.len();
    if gram.shape() != (n, n) {
        return Err(Error::integrity(format!("gram is {:?} for {n} labels", gram.shape())));
    }
    let assignment = stratified_folds(labels, folds, seed)?;
    let mut fold_accuracies = Vec::with_capacity(folds);
    for fold in 0..folds {
        let test: Vec<usize> = (0..n).filter(|&i| assignment[i] == fold).collect();
        let train: Vec<usize> = (0..n).filter(|&i| assignment[i] != fold).collect();
        let correct = test
            .iter()
            .filter(|&&i| {
                let nearest = train
                    .iter()
                    .map(|&j| (gram[(i, i)] + gram[(j, j)] - 2.0 * gram[(i, j)], j))
                    .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                    .map(|(_, j)| j)
                    .expect("nonempty training fold");
                labels[nearest] == labels[i]
            })
            .count();
        fold_accuracies.push(correct as f64 / test.len() as f64);
    }
    let k = folds as f64;
    let mean = fold_accuracies.iter().sum::<f64>() / k;
    let var = fold_accuracies.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / (k - 1.0);
    Ok(CvReport { fold_accuracies, mean, std_error: sqrt(var / k) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::directed_edge_label;
    use alloc::string::ToString;
    use alloc::vec;

    fn dist(pairs: &[(&str, f64)]) -> LabelDistribution {
        let masses = pairs.iter().map(|&(k, p)| (directed_edge_label(k, k, None), p)).collect();
        LabelDistribution::from_masses(masses, 0, "t")
    }

    #[test]
    fn entropy_values() {
        assert_eq!(shannon_entropy(&dist(&[("a", 1.0)])).unwrap(), 0.0);
        let u4 = dist(&[("a", 0.25), ("b", 0.25), ("c", 0.25), ("d", 0.25)]);
        assert!((shannon_entropy(&u4).unwrap() - 2.0).abs() < 1e-15);
        let p = dist(&[("a", 0.5), ("b", 0.25), ("c", 0.25)]);
        assert!((shannon_entropy(&p).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn entropy_rejects_unnormalized() {
        assert!(matches!(shannon_entropy(&dist(&[("a", 0.5)])), Err(Error::Validation(_))));
    }

    #[test]
    fn divergence_identity_and_disjointness() {
        let p = dist(&[("a", 0.3), ("b", 0.7)]);
        let q = dist(&[("c", 0.6), ("d", 0.4)]);
        assert_eq!(js_divergence(&p, &p).unwrap(), 0.0);
        assert_eq!(k_js(&p, &p).unwrap(), 1.0);
        // Disjoint supports: H(M) = 1 + (H(P) + H(Q)) / 2 exactly.
        let direct = {
            let hm = shannon_entropy(&dist(&[("a", 0.15), ("b", 0.35), ("c", 0.3), ("d", 0.2)])).unwrap();
            hm - 0.5 * shannon_entropy(&p).unwrap() - 0.5 * shannon_entropy(&q).unwrap()
        };
        assert!((direct - 1.0).abs() < 1e-15);
        assert!((js_divergence(&p, &q).unwrap() - 1.0).abs() < 1e-15);
        assert!((k_js(&p, &q).unwrap() - 0.36787944117144233).abs() < 1e-15);
        assert_eq!(k_dp(&p, &q), 0.0);
    }

    #[test]
    fn divergence_matches_entropy_form() {
        let p = dist(&[("a", 0.1), ("b", 0.6), ("c", 0.3)]);
        let q = dist(&[("b", 0.2), ("c", 0.5), ("d", 0.3)]);
        let m = dist(&[("a", 0.05), ("b", 0.4), ("c", 0.4), ("d", 0.15)]);
        let want = shannon_entropy(&m).unwrap() - 0.5 * shannon_entropy(&p).unwrap() - 0.5 * shannon_entropy(&q).unwrap();
        let got = js_divergence(&p, &q).unwrap();
        assert!((got - want).abs() < 1e-14);
        assert_eq!(got, js_divergence(&q, &p).unwrap());
    }

    #[test]
    fn dot_product_values() {
        let p = dist(&[("a", 0.5), ("b", 0.5)]);
        assert_eq!(k_dp(&p, &p), 0.5);
        let m = 5;
        let names: Vec<String> = (0..m).map(|i| i.to_string()).collect();
        let u: Vec<(&str, f64)> = names.iter().map(|s| (s.as_str(), 1.0 / m as f64)).collect();
        assert!((k_dp(&dist(&u), &dist(&u)) - 1.0 / m as f64).abs() < 1e-15);
    }

    #[test]
    fn kernel_names_parse() {
        assert_eq!("js".parse::<KernelKind>().unwrap(), KernelKind::JensenShannon);
        assert_eq!("dp".parse::<KernelKind>().unwrap(), KernelKind::DotProduct);
        assert!("rbf".parse::<KernelKind>().is_err());
    }

    #[test]
    fn nearest_neighbor_on_separable_gram() {
        let labels: Vec<u8> = (0..20).map(|i| (i % 2) as u8).collect();
        let gram = DMatrix::from_fn(20, 20, |i, j| if i == j { 10.0 } else if i % 2 == j % 2 { 1.0 } else { 0.0 });
        let r = kernel_1nn_cv(&gram, &labels, 5, 3).unwrap();
        assert_eq!(r.mean, 1.0);
        assert_eq!(r.fold_accuracies.len(), 5);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn folds_are_stratified_and_seeded() {
        let labels: Vec<u8> = (0..30).map(|i| u8::from(i < 10)).collect();
        let a = stratified_folds(&labels, 5, 9).unwrap();
        assert_eq!(a, stratified_folds(&labels, 5, 9).unwrap());
        for f in 0..5 {
            let pos = (0..30).filter(|&i| a[i] == f && labels[i] == 1).count();
            assert_eq!(pos, 2);
        }
        assert!(stratified_folds(&labels, 11, 0).is_err());
        assert!(stratified_folds(&labels, 1, 0).is_err());
    }

    #[test]
    fn gram_of_single_graph() {
        let f = GraphFeatures::from_distributions("g", None, vec![dist(&[("a", 0.25), ("b", 0.75)])]);
        let g = gram(&[f], KernelKind::DotProduct, 25, 0, 0).unwrap();
        assert_eq!(g.values.shape(), (1, 1));
        assert_eq!(g.values[(0, 0)], 0.625);
    }
}
