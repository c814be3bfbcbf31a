use std::collections::HashMap;

/// Adjusted Rand index between two labelings of the same items.
///
/// Returns 1 when both labelings put everything in a single cluster (the
/// chance-corrected index is 0/0 there).
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must cover the same items");
    let n = a.len();
    if n < 2 {
        return 1.0;
    }
    let mut table: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let pairs = |m: u64| (m * m.saturating_sub(1)) as f64 / 2.0;
    let index: f64 = table.values().map(|&m| pairs(m)).sum();
    let sum_rows: f64 = rows.values().map(|&m| pairs(m)).sum();
    let sum_cols: f64 = cols.values().map(|&m| pairs(m)).sum();
    let expected = sum_rows * sum_cols / pairs(n as u64);
    let max = 0.5 * (sum_rows + sum_cols);
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_up_to_relabeling() {
        let a = [0, 0, 1, 1, 2, 2];
        let b = [5, 5, 3, 3, 9, 9];
        assert!((adjusted_rand_index(&a, &b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn known_value() {
        // Reference value from the standard contingency-table formula:
        // index = 2, sum_rows = 6, sum_cols = 3, C(6,2) = 15,
        // expected = 1.2, max = 4.5, ari = 0.8 / 3.3.
        let a = [0, 0, 0, 1, 1, 1];
        let b = [0, 0, 1, 1, 2, 2];
        assert!((adjusted_rand_index(&a, &b) - 0.8 / 3.3).abs() < 1e-12);
    }

    #[test]
    fn trivial_clusterings() {
        assert_eq!(adjusted_rand_index(&[0, 0, 0], &[1, 1, 1]), 1.0);
        assert_eq!(adjusted_rand_index(&[0], &[3]), 1.0);
    }
}
