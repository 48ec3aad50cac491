//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use proptest::prelude::*;

/// Textbook quadratic edit distance on the unrotated grid.
pub fn dp_ed(x: &[u8], y: &[u8]) -> u64 {
    let mut d = vec![vec![0u64; y.len() + 1]; x.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i as u64;
    }
    for j in 0..=y.len() {
        d[0][j] = j as u64;
    }
    for i in 1..=x.len() {
        for j in 1..=y.len() {
            let sub = d[i - 1][j - 1] + u64::from(x[i - 1] != y[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[x.len()][y.len()]
}

/// Textbook quadratic LCS.
pub fn dp_lcs(x: &[u8], y: &[u8]) -> u64 {
    let mut d = vec![vec![0u64; y.len() + 1]; x.len() + 1];
    for i in 1..=x.len() {
        for j in 1..=y.len() {
            d[i][j] = if x[i - 1] == y[j - 1] { d[i - 1][j - 1] + 1 } else { d[i - 1][j].max(d[i][j - 1]) };
        }
    }
    d[x.len()][y.len()]
}

/// Exhaustive recursion without memo; exponential, small inputs only.
pub fn brute_ed(x: &[u8], y: &[u8]) -> u64 {
    match (x.split_first(), y.split_first()) {
        (None, _) => y.len() as u64,
        (_, None) => x.len() as u64,
        (Some((a, xs)), Some((b, ys))) => {
            let sub = brute_ed(xs, ys) + u64::from(a != b);
            sub.min(brute_ed(xs, y) + 1).min(brute_ed(x, ys) + 1)
        }
    }
}

/// Maximum over all subsequences of `x` that are subsequences of `y`.
pub fn brute_lcs(x: &[u8], y: &[u8]) -> u64 {
    assert!(x.len() <= 16);
    let is_sub = |mask: u32| {
        let mut j = 0;
        for (i, &c) in x.iter().enumerate() {
            if mask >> i & 1 == 1 {
                match y[j..].iter().position(|&d| d == c) {
                    Some(p) => j += p + 1,
                    None => return false,
                }
            }
        }
        true
    };
    (0u32..1 << x.len()).filter(|&m| is_sub(m)).map(|m| m.count_ones() as u64).max().unwrap_or(0)
}

/// Byte string over the first `k` lowercase letters.
pub fn word(k: u8, len: impl Into<proptest::collection::SizeRange>) -> impl Strategy<Value = Vec<u8>> {
    proptest::collection::vec(0..k, len).prop_map(|v| v.into_iter().map(|c| b'a' + c).collect())
}

pub fn alphabet() -> impl Strategy<Value = u8> {
    prop_oneof![Just(2u8), Just(4u8), Just(26u8)]
}

/// `y` derived from `x` by up to `k` random edits, so distances stay small.
pub fn near_pair(len: usize, k: usize) -> impl Strategy<Value = (Vec<u8>, Vec<u8>)> {
    (word(4, len), proptest::collection::vec((0usize..3, any::<prop::sample::Index>(), 0u8..4), 0..=k)).prop_map(
        |(x, edits)| {
            let mut y = x.clone();
            for (op, at, c) in edits {
                let c = b'a' + c;
                match op {
                    0 if !y.is_empty() => {
                        let i = at.index(y.len());
                        y[i] = c;
                    }
                    1 => {
                        let i = at.index(y.len() + 1);
                        y.insert(i, c);
                    }
                    _ if !y.is_empty() => {
                        let i = at.index(y.len());
                        y.remove(i);
                    }
                    _ => {}
                }
            }
            (x, y)
        },
    )
}
