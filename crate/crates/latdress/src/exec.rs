//! Execution helpers: index-parallel maps and order-fixed reductions.
//!
//! With the `parallel` feature (default) the maps run on rayon; without it
//! they run sequentially. Both paths produce identical output: values are
//! collected by index and all floating-point reductions go through
//! [`tree_sum`], whose association order does not depend on the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, collecting results in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sequential twin of [`map_indexed`], available under every feature set.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Pairwise-tree sum with a fixed association order.
///
/// The tree splits at the midpoint at every level, so the result is a pure
/// function of the input slice. All action and residual sums use this.
pub fn tree_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            tree_sum(&values[..mid]) + tree_sum(&values[mid..])
        }
    }
}

/// Maximum of a slice, 0.0 when empty. NaN-poisoning: any NaN wins.
pub fn sup(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |acc, &v| {
        if v.is_nan() || acc.is_nan() {
            f64::NAN
        } else {
            acc.max(v)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_sum_matches_exact_integers() {
        let v: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(tree_sum(&v), 5050.0);
    }

    #[test]
    fn tree_sum_is_order_fixed() {
        let v: Vec<f64> = (0..37).map(|i| (i as f64).sin() * 1e-3 + 1.0).collect();
        let a = tree_sum(&v);
        let b = tree_sum(&v);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn map_indexed_is_index_ordered() {
        let v = map_indexed(64, |i| i * i);
        let w = map_indexed_seq(64, |i| i * i);
        assert_eq!(v, w);
    }

    #[test]
    fn sup_propagates_nan() {
        assert!(sup(&[1.0, f64::NAN, 3.0]).is_nan());
        assert_eq!(sup(&[]), 0.0);
    }
}
