//! Small floating point helpers shared by the pipeline stages.

use alloc::vec::Vec;

/// Sums `terms` after sorting them by IEEE total order.
///
/// The result depends only on the multiset of terms, never on the order they
/// arrive in. Stages that must be exactly equivariant under vertex relabeling
/// use this instead of a left fold.
pub fn ordered_sum(terms: &mut [f64]) -> f64 {
    terms.sort_unstable_by(f64::total_cmp);
    terms.iter().sum()
}

/// Collects an iterator and returns its [`ordered_sum`].
pub fn ordered_sum_iter<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut buf: Vec<f64> = terms.into_iter().collect();
    ordered_sum(&mut buf)
}

pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub(crate) fn log2(x: f64) -> f64 {
    libm::log2(x)
}

pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordered_sum_ignores_arrival_order() {
        let mut a = [1e16, 1.0, -1e16, 3.5, 1e-3];
        let mut b = [3.5, -1e16, 1e-3, 1.0, 1e16];
        assert_eq!(ordered_sum(&mut a).to_bits(), ordered_sum(&mut b).to_bits());
    }
}
