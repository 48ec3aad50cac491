//! Tree total deviation of a sequence over its `M`-ary recursive partition.
//!
//! Scale `s` (1-based) cuts the sequence into blocks of length `M^s`; each
//! block contributes the total deviation of its `M` sub-block sums from
//! their mean. Scale `S` is the whole sequence.
//!
//! Everything is generic over the number type so integer inputs can be
//! evaluated exactly with `Ratio<i128>`.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_traits::{FromPrimitive, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DeviationError {
    #[error("bad length: {0}")]
    BadLength(String),
    #[error("negative entry at index {0}")]
    NegativeEntry(usize),
    #[error("sequence is all zero")]
    AllZero,
    #[error("branching factor must be even and at least 2, got {0}")]
    OddBranching(usize),
}

/// Numbers the deviation measures run on.
pub trait Value: Clone + PartialOrd + Signed + FromPrimitive + ToPrimitive + Debug {}
impl<T: Clone + PartialOrd + Signed + FromPrimitive + ToPrimitive + Debug> Value for T {}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub per_scale: BTreeMap<usize, f64>,
    pub total: f64,
    /// `None` when the bound is undefined (all-zero or negative input).
    pub kl_bound: Option<f64>,
    pub naive_bound: f64,
    /// Scaled tree deviation against a weight sequence, when one was given.
    pub scaled_total: Option<f64>,
}

fn check_m(m: usize) -> Result<(), DeviationError> {
    if m < 2 || m % 2 == 1 {
        return Err(DeviationError::OddBranching(m));
    }
    Ok(())
}

fn sum<T: Value>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |acc, v| acc + v.clone())
}

fn from_usize<T: Value>(v: usize) -> T {
    T::from_usize(v).expect("small integers are representable")
}

/// Number of scales `S` with `m^S == n`.
pub fn scale_count(n: usize, m: usize) -> Result<usize, DeviationError> {
    check_m(m)?;
    let (mut len, mut s) = (1usize, 0usize);
    while len < n {
        len = len.checked_mul(m).ok_or_else(|| DeviationError::BadLength(format!("{n}")))?;
        s += 1;
    }
    if len != n {
        return Err(DeviationError::BadLength(format!("{n} is not a power of {m}")));
    }
    Ok(s)
}

/// Total deviation of the `m` sub-block sums of `block` from their mean.
pub fn md<T: Value>(block: &[T], m: usize) -> Result<T, DeviationError> {
    check_m(m)?;
    if block.is_empty() || block.len() % m != 0 {
        return Err(DeviationError::BadLength(format!("block of {} not divisible by {m}", block.len())));
    }
    let mean = sum(block) / from_usize(m);
    let w = block.len() / m;
    Ok(block.chunks(w).fold(T::zero(), |acc, c| acc + (sum(c) - mean.clone()).abs()))
}

fn scale_set(scales: Option<&[usize]>, s_max: usize) -> Result<Vec<usize>, DeviationError> {
    let mut out: Vec<usize> = match scales {
        Some(list) => list.to_vec(),
        None => (1..=s_max).collect(),
    };
    out.sort_unstable();
    out.dedup();
    if let Some(&bad) = out.iter().find(|&&s| s == 0 || s > s_max) {
        return Err(DeviationError::BadLength(format!("scale {bad} outside 1..={s_max}")));
    }
    Ok(out)
}

/// Per-scale deviation and total over the chosen scales (all when `None`).
pub fn treemd_by_scale<T: Value>(
    a: &[T],
    m: usize,
    scales: Option<&[usize]>,
) -> Result<(BTreeMap<usize, T>, T), DeviationError> {
    let s_max = scale_count(a.len(), m)?;
    let mut per = BTreeMap::new();
    let mut total = T::zero();
    for s in scale_set(scales, s_max)? {
        let w = m.pow(s as u32);
        let mut acc = T::zero();
        for block in a.chunks(w) {
            acc = acc + md(block, m)?;
        }
        total = total + acc.clone();
        per.insert(s, acc);
    }
    Ok((per, total))
}

/// Tree total deviation report for real-valued input.
pub fn treemd(a: &[f64], m: usize, scales: Option<&[usize]>) -> Result<DeviationReport, DeviationError> {
    let (per, total) = treemd_by_scale(a, m, scales)?;
    let s_max = scale_count(a.len(), m)?;
    let l1: f64 = a.iter().map(|v| v.abs()).sum();
    Ok(DeviationReport {
        per_scale: per,
        total,
        kl_bound: kl_bound(a, m, s_max).ok(),
        naive_bound: l1 * s_max as f64,
        scaled_total: None,
    })
}

/// Signs with exactly `M/2` entries `+1`, on the upper half of the stable
/// sort order, so that `2 * sum(b_i * g_i) >= md(b)`.
pub fn gamma_vector<T: Value>(b: &[T]) -> Result<Vec<i8>, DeviationError> {
    check_m(b.len())?;
    let mut idx: Vec<usize> = (0..b.len()).collect();
    idx.sort_by(|&i, &j| b[i].partial_cmp(&b[j]).unwrap_or(std::cmp::Ordering::Equal));
    let mut g = vec![-1i8; b.len()];
    for &i in &idx[b.len() / 2..] {
        g[i] = 1;
    }
    Ok(g)
}

fn check_non_negative<T: Value>(xs: &[T]) -> Result<(), DeviationError> {
    match xs.iter().position(|v| v.is_negative()) {
        Some(i) => Err(DeviationError::NegativeEntry(i)),
        None => Ok(()),
    }
}

/// `(sum B / sum A) * md(A)`; zero when `A` sums to zero.
pub fn rd<T: Value>(a: &[T], b: &[T], m: usize) -> Result<T, DeviationError> {
    if a.len() != b.len() {
        return Err(DeviationError::BadLength(format!("{} vs {}", a.len(), b.len())));
    }
    check_non_negative(a)?;
    check_non_negative(b)?;
    let sa = sum(a);
    if sa.is_zero() {
        md(a, m)?;
        return Ok(T::zero());
    }
    Ok(sum(b) / sa * md(a, m)?)
}

/// Scaled tree total deviation; linear in `b`.
pub fn treerd<T: Value>(a: &[T], b: &[T], m: usize, scales: Option<&[usize]>) -> Result<T, DeviationError> {
    if a.len() != b.len() {
        return Err(DeviationError::BadLength(format!("{} vs {}", a.len(), b.len())));
    }
    let s_max = scale_count(a.len(), m)?;
    let mut total = T::zero();
    for s in scale_set(scales, s_max)? {
        let w = m.pow(s as u32);
        for (ca, cb) in a.chunks(w).zip(b.chunks(w)) {
            total = total + rd(ca, cb, m)?;
        }
    }
    Ok(total)
}

/// `|A|_1 * sqrt(2 S ln(n |A|_inf / |A|_1))` for non-negative `A` of length `M^S`.
pub fn kl_bound<T: Value>(a: &[T], m: usize, s: usize) -> Result<f64, DeviationError> {
    if scale_count(a.len(), m)? != s {
        return Err(DeviationError::BadLength(format!("{} != {m}^{s}", a.len())));
    }
    check_non_negative(a)?;
    let vals: Vec<f64> = a.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
    let l1: f64 = vals.iter().sum();
    if l1 == 0.0 {
        return Err(DeviationError::AllZero);
    }
    let inf = vals.iter().cloned().fold(0.0, f64::max);
    let ratio = (a.len() as f64 * inf / l1).max(1.0);
    Ok(l1 * (2.0 * s as f64 * ratio.ln()).sqrt())
}

/// Lower-bound family: `A_i = 2^popcount(i - 1)`, `B` all ones, `n = 2^S`.
pub fn counterexample_pair(s: usize) -> (Vec<i64>, Vec<i64>) {
    assert!((1..=40).contains(&s), "S must be in 1..=40");
    let n = 1usize << s;
    let a = (0..n).map(|i| 1i64 << i.count_ones()).collect();
    (a, vec![1; n])
}
