//! Deterministic pairwise summation.
//!
//! The recursion splits at fixed indices, so the result depends only on the
//! order of the input slice and never on how the slice was produced (serial
//! or parallel). Round-off grows like O(ε log n) instead of O(ε n).

const BLOCK: usize = 16;

pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Column-wise pairwise sum of equally sized rows.
pub fn pairwise_sum_rows(rows: &[Vec<f64>], width: usize) -> Vec<f64> {
    let mut column = Vec::with_capacity(rows.len());
    (0..width)
        .map(|j| {
            column.clear();
            column.extend(rows.iter().map(|r| r[j]));
            pairwise_sum(&column)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_exact_small_integers() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
    }

    #[test]
    fn beats_naive_on_many_tenths() {
        let v = vec![0.1_f64; 1_000_000];
        let naive: f64 = v.iter().sum();
        let pw = pairwise_sum(&v);
        assert!((pw - 100_000.0).abs() < (naive - 100_000.0).abs());
        assert!((pw - 100_000.0).abs() < 1e-8);
    }

    #[test]
    fn rows_sum_per_column() {
        let rows = vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]];
        assert_eq!(pairwise_sum_rows(&rows, 2), vec![9.0, 12.0]);
    }
}
