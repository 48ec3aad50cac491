//! Exact and bounded reference algorithms.

use serde::{Deserialize, Serialize};

use crate::grids::{InputPair, RotatedGrid};

/// Byte written into padded tails. Padding is tracked by position, so the
/// value only matters for serialised output.
pub const DEFAULT_PAD_BYTE: u8 = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundedResult {
    pub within_bound: bool,
    /// Present iff `within_bound`; never exceeds the bound.
    pub value: Option<u64>,
}

impl BoundedResult {
    fn within(v: u64) -> Self {
        BoundedResult { within_bound: true, value: Some(v) }
    }

    fn outside() -> Self {
        BoundedResult { within_bound: false, value: None }
    }
}

/// `lambda = 2^floor(c * log2 n)`, at least 1.
pub fn padding_unit(n: usize, c: f64) -> usize {
    if n < 2 {
        return 1;
    }
    let e = (c * (n as f64).log2()).floor().max(0.0) as u32;
    1usize << e.min(usize::BITS - 2)
}

/// Pads both strings up to multiples of `padding_unit(n, c)`.
pub fn pad_inputs(pair: &InputPair, c: f64) -> InputPair {
    pad_to_multiple(pair, padding_unit(pair.n(), c), DEFAULT_PAD_BYTE)
}

pub fn pad_to_multiple(pair: &InputPair, lambda: usize, byte: u8) -> InputPair {
    let lambda = lambda.max(1);
    let up = |len: usize| len.div_ceil(lambda) * lambda;
    pad_to_lengths(pair, up(pair.n_x()), up(pair.n_y()), byte)
}

/// Pads the strings to exactly the given lengths (which must not shrink them).
pub fn pad_to_lengths(pair: &InputPair, n_x: usize, n_y: usize, byte: u8) -> InputPair {
    assert!(n_x >= pair.n_x() && n_y >= pair.n_y());
    let (xr, yr) = pair.real_lens();
    let mut x = pair.x.clone();
    let mut y = pair.y.clone();
    x.resize(n_x, byte);
    y.resize(n_y, byte);
    InputPair::with_padding(x, y, xr, yr)
}

/// Edit distance by the quadratic DP, linear memory.
pub fn ed_exact(pair: &InputPair) -> u64 {
    if pair.n_y() > pair.n_x() {
        return ed_exact(&pair.swapped());
    }
    let (nx, ny) = (pair.n_x(), pair.n_y());
    let mut row: Vec<u64> = (0..=ny as u64).collect();
    for u in 0..nx {
        let mut diag = row[0];
        row[0] = u as u64 + 1;
        for v in 0..ny {
            let sub = diag + u64::from(!pair.matches(u, v));
            diag = row[v + 1];
            row[v + 1] = sub.min(row[v] + 1).min(diag + 1);
        }
    }
    row[ny]
}

/// LCS length by the quadratic DP, linear memory.
pub fn lcs_exact(pair: &InputPair) -> u64 {
    if pair.n_y() > pair.n_x() {
        return lcs_exact(&pair.swapped());
    }
    let (nx, ny) = (pair.n_x(), pair.n_y());
    let mut row = vec![0u64; ny + 1];
    for u in 0..nx {
        let mut diag = 0;
        for v in 0..ny {
            let keep = row[v + 1];
            row[v + 1] = if pair.matches(u, v) { diag + 1 } else { keep.max(row[v]) };
            diag = keep;
        }
    }
    row[ny]
}

/// Band DP restricted to diagonals `|u - v| <= k`; `O(n k)` time.
pub fn ed_bounded(pair: &InputPair, k: u64) -> BoundedResult {
    let (nx, ny) = (pair.n_x(), pair.n_y());
    if nx.abs_diff(ny) as u64 > k {
        return BoundedResult::outside();
    }
    let k = (k as usize).min(nx.max(ny));
    let cap = k as u64 + 1;
    let width = 2 * k + 1;
    // band[d] holds column v = u + d - k
    let mut prev = vec![cap; width];
    let mut cur = vec![cap; width];
    for d in k..width {
        let v = d - k;
        if v <= ny {
            prev[d] = (v as u64).min(cap);
        }
    }
    for u in 1..=nx {
        let mut row_min = cap;
        for d in 0..width {
            let v = u as isize + d as isize - k as isize;
            if v < 0 || v as usize > ny {
                cur[d] = cap;
                continue;
            }
            let v = v as usize;
            let mut best = prev[d] + u64::from(v == 0 || !pair.matches(u - 1, v - 1));
            if v == 0 {
                best = u as u64;
            }
            if d + 1 < width {
                best = best.min(prev[d + 1] + 1);
            }
            if d > 0 && v > 0 {
                best = best.min(cur[d - 1] + 1);
            }
            cur[d] = best.min(cap);
            row_min = row_min.min(cur[d]);
        }
        if row_min >= cap {
            return BoundedResult::outside();
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let d = ny + k - nx;
    match prev[d] {
        v if v <= k as u64 => BoundedResult::within(v),
        _ => BoundedResult::outside(),
    }
}

/// Next-occurrence lookup over the unpadded part of a string.
enum NextOcc {
    Table { code: [u16; 256], stride: usize, next: Vec<u32> },
    Lists { pos: Vec<Vec<u32>> },
}

impl NextOcc {
    const TABLE_LIMIT: usize = 1 << 24;

    fn new(s: &[u8], real: usize) -> NextOcc {
        let s = &s[..real];
        let mut code = [u16::MAX; 256];
        let mut sigma = 0usize;
        for &b in s {
            if code[b as usize] == u16::MAX {
                code[b as usize] = sigma as u16;
                sigma += 1;
            }
        }
        let stride = s.len() + 1;
        if sigma * stride <= Self::TABLE_LIMIT {
            let mut next = vec![u32::MAX; sigma * stride];
            for j in (0..s.len()).rev() {
                for c in 0..sigma {
                    next[c * stride + j] = next[c * stride + j + 1];
                }
                next[code[s[j] as usize] as usize * stride + j] = j as u32;
            }
            NextOcc::Table { code, stride, next }
        } else {
            let mut pos = vec![Vec::new(); 256];
            for (j, &b) in s.iter().enumerate() {
                pos[b as usize].push(j as u32);
            }
            NextOcc::Lists { pos }
        }
    }

    /// Smallest position `>= from` holding `b`.
    #[inline]
    fn find(&self, b: u8, from: usize) -> Option<usize> {
        match self {
            NextOcc::Table { code, stride, next } => {
                let c = code[b as usize];
                if c == u16::MAX || from >= *stride {
                    return None;
                }
                let p = next[c as usize * stride + from];
                (p != u32::MAX).then_some(p as usize)
            }
            NextOcc::Lists { pos } => {
                let list = &pos[b as usize];
                let i = list.partition_point(|&p| (p as usize) < from);
                list.get(i).map(|&p| p as usize)
            }
        }
    }
}

/// Threshold algorithm: `ends[t]` is the shortest prefix of Y admitting a
/// common subsequence of length `t` with the current prefix of X. Stops as
/// soon as the length exceeds `k`.
pub fn lcs_bounded(pair: &InputPair, k: u64) -> BoundedResult {
    let (xr, yr) = pair.real_lens();
    let occ = NextOcc::new(&pair.y, yr);
    let mut ends: Vec<usize> = vec![0];
    for &b in &pair.x[..xr] {
        let len = ends.len() - 1;
        for t in (1..=len + 1).rev() {
            if let Some(p) = occ.find(b, ends[t - 1]) {
                if t == ends.len() {
                    ends.push(p + 1);
                } else if p + 1 < ends[t] {
                    ends[t] = p + 1;
                }
            }
        }
        if (ends.len() - 1) as u64 > k {
            return BoundedResult::outside();
        }
    }
    BoundedResult::within((ends.len() - 1) as u64)
}

/// Constant-factor edit distance approximation: `ed <= value <= 4 ed`.
pub trait ConstApprox: Send + Sync {
    fn approx(&self, pair: &InputPair) -> u64;

    /// The same contract on a grid window between two vertices.
    fn approx_window(&self, grid: &RotatedGrid<'_>, l: usize, y_l: usize, r: usize, y_r: usize) -> Option<u64>;
}

/// Exact values; a 1-approximation.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactApprox;

impl ConstApprox for ExactApprox {
    fn approx(&self, pair: &InputPair) -> u64 {
        ed_exact(pair)
    }

    fn approx_window(&self, grid: &RotatedGrid<'_>, l: usize, y_l: usize, r: usize, y_r: usize) -> Option<u64> {
        grid.optimal_weight(l, y_l, r, y_r).ok()
    }
}

/// Smallest power-of-two band that contains the distance; a 2-approximation.
#[derive(Clone, Copy, Debug, Default)]
pub struct BandDoubling;

impl BandDoubling {
    fn first_bound(pair: &InputPair) -> u64 {
        let mut k = 0u64;
        loop {
            if ed_bounded(pair, k).within_bound {
                return k;
            }
            k = if k == 0 { 1 } else { 2 * k };
        }
    }
}

impl ConstApprox for BandDoubling {
    fn approx(&self, pair: &InputPair) -> u64 {
        Self::first_bound(pair)
    }

    fn approx_window(&self, grid: &RotatedGrid<'_>, l: usize, y_l: usize, r: usize, y_r: usize) -> Option<u64> {
        match (grid.unrotate(l, y_l), grid.unrotate(r, y_r)) {
            (Some((u0, v0)), Some((u1, v1))) if u0 <= u1 && v0 <= v1 => {
                Some(Self::first_bound(&grid.pair().slice(u0, u1, v0, v1)))
            }
            // midpoint endpoints are not substring problems
            _ => grid.optimal_weight(l, y_l, r, y_r).ok(),
        }
    }
}

/// Default constant-factor approximation.
pub fn ed_approx_const(pair: &InputPair) -> u64 {
    ExactApprox.approx(pair)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: &str, b: &str) -> InputPair {
        InputPair::new(a, b)
    }

    #[test]
    fn exact_examples() {
        assert_eq!(ed_exact(&p("", "abc")), 3);
        assert_eq!(lcs_exact(&p("abc", "abc")), 3);
        assert_eq!(ed_exact(&p("kitten", "sitting")), 3);
        assert_eq!(lcs_exact(&p("ABCBDAB", "BDCABA")), 4);
    }

    #[test]
    fn bounded_examples() {
        assert_eq!(ed_bounded(&p("abc", "abc"), 0), BoundedResult::within(0));
        // ed("abcde", "vwxyz") = 5
        assert_eq!(ed_bounded(&p("abcde", "vwxyz"), 4), BoundedResult::outside());
        assert_eq!(ed_bounded(&p("abcde", "vwxyz"), 5), BoundedResult::within(5));
        assert_eq!(lcs_bounded(&p("abc", "xyz"), 0), BoundedResult::within(0));
        assert_eq!(lcs_bounded(&p("abcdef", "abcdef"), 5), BoundedResult::outside());
        assert_eq!(lcs_bounded(&p("abcdef", "abcdef"), 6), BoundedResult::within(6));
    }

    #[test]
    fn padding_to_multiples() {
        let q = pad_to_multiple(&p("abcde", "abcd"), 4, DEFAULT_PAD_BYTE);
        assert_eq!((q.n_x(), q.n_y()), (8, 4));
        assert_eq!(pad_to_multiple(&q, 4, DEFAULT_PAD_BYTE), q);
        assert_eq!(padding_unit(1024, 0.99), 512);
    }

    #[test]
    fn approx_sandwich() {
        let q = p("abcdefghij", "abXdeYghZjQ");
        let e = ed_exact(&q);
        for v in [ExactApprox.approx(&q), BandDoubling.approx(&q)] {
            assert!(e <= v && v <= 4 * e);
        }
        assert_eq!(ed_approx_const(&p("same", "same")), 0);
    }
}
