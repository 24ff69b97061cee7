//! Integer compositions and binomial counts.

/// Binomial coefficient C(n, k) as an exact integer.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// All compositions of `total` into exactly `parts` positive integers,
/// in lexicographic order.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    if total < parts {
        return Vec::new();
    }
    weak_compositions(total - parts, parts)
        .into_iter()
        .map(|w| w.into_iter().map(|x| x + 1).collect())
        .collect()
}

/// All weak compositions of `total` into exactly `parts` non-negative integers,
/// in lexicographic order.
pub fn weak_compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(parts);
    fill_weak(total, parts, &mut current, &mut out);
    out
}

fn fill_weak(remaining: usize, slots: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if slots == 0 {
        if remaining == 0 {
            out.push(current.clone());
        }
        return;
    }
    if slots == 1 {
        current.push(remaining);
        out.push(current.clone());
        current.pop();
        return;
    }
    for first in 0..=remaining {
        current.push(first);
        fill_weak(remaining - first, slots - 1, current, out);
        current.pop();
    }
}

/// All compositions of `total` into any number of positive parts, grouped by
/// the number of parts (1, 2, ..., total).
pub fn all_compositions(total: usize) -> Vec<Vec<usize>> {
    (1..=total).flat_map(|parts| compositions(total, parts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_counts_match_binomials() {
        for total in 1..=9usize {
            for parts in 1..=total {
                let list = compositions(total, parts);
                assert_eq!(list.len() as u128, binomial(total as u64 - 1, parts as u64 - 1));
                assert!(list.iter().all(|c| c.iter().sum::<usize>() == total && c.iter().all(|&x| x >= 1)));
            }
        }
    }

    #[test]
    fn weak_composition_counts_match_binomials() {
        for nu in 2..=9usize {
            let list = weak_compositions(nu - 1, nu - 1);
            assert_eq!(list.len() as u128, binomial(2 * nu as u64 - 3, nu as u64 - 2));
        }
        assert_eq!(weak_compositions(0, 0), vec![Vec::<usize>::new()]);
        assert_eq!(weak_compositions(2, 3).len(), 6);
    }

    #[test]
    fn lexicographic_order() {
        let list = weak_compositions(2, 2);
        assert_eq!(list, vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        let mut sorted = compositions(6, 3);
        let original = sorted.clone();
        sorted.sort();
        assert_eq!(sorted, original);
    }

    #[test]
    fn all_compositions_count_powers_of_two() {
        for total in 1..=10 {
            assert_eq!(all_compositions(total).len(), 1 << (total - 1));
        }
    }
}
