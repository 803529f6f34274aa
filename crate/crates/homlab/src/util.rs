//! Small shared helpers: ranking/unranking of vertex tuples in [n]^len.

/// Row-major rank of a tuple over [0, n).
pub fn tuple_index(t: &[usize], n: usize) -> usize {
    let mut idx = 0usize;
    for &x in t {
        debug_assert!(x < n);
        idx = idx * n + x;
    }
    idx
}

/// Inverse of [`tuple_index`].
pub fn index_tuple(mut idx: usize, n: usize, len: usize) -> Vec<usize> {
    let mut t = vec![0usize; len];
    for i in (0..len).rev() {
        t[i] = idx % n;
        idx /= n;
    }
    t
}

/// n^len with overflow check (desk-scale sizes).
pub fn checked_pow(n: usize, len: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..len {
        acc = acc.checked_mul(n)?;
    }
    Some(acc)
}

/// Iterate all tuples in [0, n)^len in row-major order, calling `f` on each.
pub fn for_each_tuple(n: usize, len: usize, mut f: impl FnMut(&[usize])) {
    let total = checked_pow(n, len).expect("tuple space too large");
    let mut t = vec![0usize; len];
    for _ in 0..total {
        f(&t);
        for i in (0..len).rev() {
            t[i] += 1;
            if t[i] < n {
                break;
            }
            t[i] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_round_trip() {
        for idx in 0..27 {
            let t = index_tuple(idx, 3, 3);
            assert_eq!(tuple_index(&t, 3), idx);
        }
    }

    #[test]
    fn tuple_iteration_order() {
        let mut seen = Vec::new();
        for_each_tuple(2, 2, |t| seen.push(t.to_vec()));
        assert_eq!(seen, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }
}
