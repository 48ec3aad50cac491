//! Scale schedules, sparsified grids and the pay-per-call edge oracle.
//!
//! Scale `s` intervals have width `I_s = n / M^(S-s)`; `B_x = I_0`. A sparse
//! vertex sits on a multiple of `B_x`, and its row is a multiple of
//! `I_s / phi_y` where `s` is the coarsest scale whose width divides the
//! column. When that ratio is fractional its numerator is used, so every
//! row whose multiple is integral qualifies. The two corner columns are
//! exempt: their only vertices are the source and the sink.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grids::{GridError, GridPath, Kind, RotatedGrid};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SparseError {
    #[error("infeasible schedule: {0}")]
    Infeasible(String),
    #[error("({0}, {1}) is not a sparse vertex")]
    InvalidVertex(usize, usize),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Per-field overrides on top of the formula defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub m: Option<usize>,
    pub s: Option<usize>,
    pub phi_y: Option<usize>,
    pub active_prob: Option<f64>,
    /// Fixed active set; skips the random draw.
    pub active_scales: Option<Vec<usize>>,
    /// Every eta vector all ones (subsampling off).
    pub eta_all_ones: bool,
}

impl Overrides {
    /// Small-input profile: `M = 4`, `phi_y = 16`, active probability 1/2.
    pub fn desk(s: usize) -> Overrides {
        Overrides { m: Some(4), s: Some(s), phi_y: Some(16), active_prob: Some(0.5), ..Default::default() }
    }
}

/// Splitmix64 finaliser; used to derive independent stream seeds.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(mix(seed), |acc, &p| mix(acc ^ p.wrapping_mul(0x2545_f491_4f6c_dd1d)))
}

const ACTIVE_STREAM: u64 = 0xac71;
const ETA_STREAM: u64 = 0xe7a;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleSchedule {
    pub n: usize,
    pub mode: Kind,
    pub m: usize,
    pub s: usize,
    /// `widths[s] = I_s` for `s` in `0..=S`.
    pub widths: Vec<usize>,
    pub b_x: usize,
    pub phi_y: usize,
    pub active_prob: f64,
    /// Sorted active scales.
    pub active_scales: Vec<usize>,
    pub eta_all_ones: bool,
    pub seed: u64,
    /// Row unit per scale.
    units: Vec<usize>,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Formula defaults `(M, S, phi_y)` for total length `n`.
pub fn formula_params(n: usize) -> (usize, usize, usize) {
    let lg = (n.max(2) as f64).log2();
    let m_exp = lg.powf(0.109).log2().floor().max(1.0) as u32;
    let m = 1usize << m_exp.min(6);
    let s = 3 * ((0.01 * lg) / (m as f64).log2()).floor() as usize;
    let phi = 1usize << (lg.powf(0.009).floor() as u32).min(30);
    (m, s, phi)
}

pub fn make_schedule(n: usize, mode: Kind, ov: &Overrides, seed: u64) -> Result<ScaleSchedule, SparseError> {
    let (fm, fs, fphi) = formula_params(n);
    let m = ov.m.unwrap_or(fm);
    let s = ov.s.unwrap_or(fs);
    let phi_y = ov.phi_y.unwrap_or(fphi);
    let bad = |msg: String| Err(SparseError::Infeasible(msg));
    if m < 2 || !m.is_power_of_two() || m > 64 {
        return bad(format!("M = {m} must be a power of two in 2..=64"));
    }
    if s % 3 != 0 {
        return bad(format!("S = {s} must be a multiple of 3"));
    }
    if phi_y == 0 || !phi_y.is_power_of_two() {
        return bad(format!("phi_y = {phi_y} must be a power of two"));
    }
    let top = match m.checked_pow(s as u32) {
        Some(t) if t <= n && n % t == 0 => t,
        _ => return bad(format!("M^S = {m}^{s} does not divide n = {n}")),
    };
    if n == 0 {
        return bad("n must be positive".into());
    }
    let b_x = n / top;
    let widths: Vec<usize> = (0..=s).map(|i| b_x * m.pow(i as u32)).collect();
    let active_prob = ov.active_prob.unwrap_or(if s == 0 { 0.0 } else { (s as f64).powf(-0.98) });
    if !(0.0..=1.0).contains(&active_prob) {
        return bad(format!("active probability {active_prob} outside [0, 1]"));
    }
    let eligible = |sc: usize| mode == Kind::Ed || sc % 3 == 0;
    let active_scales = match &ov.active_scales {
        Some(list) => {
            let mut list = list.clone();
            list.sort_unstable();
            list.dedup();
            if let Some(&sc) = list.iter().find(|&&sc| sc == 0 || sc > s || !eligible(sc)) {
                return bad(format!("scale {sc} cannot be active in {mode} mode with S = {s}"));
            }
            list
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[ACTIVE_STREAM]));
            (1..=s).filter(|&sc| eligible(sc) && rng.gen_bool(active_prob)).collect()
        }
    };
    Ok(ScaleSchedule {
        n,
        mode,
        m,
        s,
        b_x,
        phi_y,
        active_prob,
        active_scales,
        eta_all_ones: ov.eta_all_ones,
        seed,
        units: widths.iter().map(|&w| w / gcd(w, phi_y)).collect(),
        widths,
    })
}

impl ScaleSchedule {
    pub fn width(&self, s: usize) -> usize {
        self.widths[s]
    }

    pub fn is_active(&self, s: usize) -> bool {
        self.active_scales.binary_search(&s).is_ok()
    }

    /// Row spacing for a column of scale `s`.
    #[inline]
    pub fn row_unit(&self, s: usize) -> usize {
        self.units[s]
    }

    /// Coarsest scale whose width divides `x` (a multiple of `B_x`).
    /// Largest scale whose boundaries include column `x`.
    #[inline]
    pub fn column_scale(&self, x: usize) -> usize {
        if x % self.b_x != 0 {
            return 0;
        }
        let q = x / self.b_x;
        if q == 0 {
            return self.s;
        }
        // M is a power of two, so divisibility by M^s is a trailing-zero count.
        ((q.trailing_zeros() / self.m.trailing_zeros()) as usize).min(self.s)
    }

    #[inline]
    pub fn column_unit(&self, x: usize) -> usize {
        self.row_unit(self.column_scale(x))
    }

    /// Sub-interval mask with exactly `M/2` set bits, fixed by seed and `(l, r)`.
    pub fn eta(&self, l: usize, r: usize) -> u64 {
        if self.eta_all_ones {
            return if self.m == 64 { u64::MAX } else { (1u64 << self.m) - 1 };
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, &[ETA_STREAM, l as u64, r as u64]));
        let mut idx: Vec<usize> = (0..self.m).collect();
        let (chosen, _) = idx.partial_shuffle(&mut rng, self.m / 2);
        chosen.iter().fold(0u64, |acc, &i| acc | (1 << i))
    }

    pub fn is_sparse_vertex(&self, grid: &RotatedGrid<'_>, x: usize, y: usize) -> bool {
        if x % self.b_x != 0 || !grid.is_vertex(x, y) {
            return false;
        }
        if x == 0 {
            return y == grid.n_x();
        }
        if x == self.n {
            return y == grid.n_y();
        }
        y % self.column_unit(x) == 0
    }

    /// Sparse rows of column `x` (a multiple of `B_x`), ascending.
    pub fn sparse_rows(&self, grid: &RotatedGrid<'_>, x: usize) -> std::iter::StepBy<std::ops::RangeInclusive<usize>> {
        if x == 0 {
            return (grid.n_x()..=grid.n_x()).step_by(1);
        }
        if x == self.n {
            return (grid.n_y()..=grid.n_y()).step_by(1);
        }
        let (lo, hi) = grid.row_range(x);
        let u = self.column_unit(x);
        let first = lo.div_ceil(u) * u;
        if first > hi {
            #[allow(clippy::reversed_empty_ranges)]
            return (1..=0).step_by(1);
        }
        (first..=hi).step_by(u)
    }

    /// Sparse rows of column `x` lying in `[a, b]`.
    pub fn sparse_rows_in(&self, grid: &RotatedGrid<'_>, x: usize, a: usize, b: usize) -> std::iter::StepBy<std::ops::RangeInclusive<usize>> {
        if x == 0 || x == self.n {
            let y = if x == 0 { grid.n_x() } else { grid.n_y() };
            let y = if a <= y && y <= b { y } else { usize::MAX };
            #[allow(clippy::reversed_empty_ranges)]
            return if y == usize::MAX { (1..=0).step_by(1) } else { (y..=y).step_by(1) };
        }
        let (lo, hi) = grid.row_range(x);
        let u = self.column_unit(x);
        let first = lo.max(a).div_ceil(u) * u;
        let last = hi.min(b);
        if first > last {
            #[allow(clippy::reversed_empty_ranges)]
            return (1..=0).step_by(1);
        }
        (first..=last).step_by(u)
    }

    /// Number of sparse rows at column `x` lying in `[a, b]`.
    fn rows_between(&self, grid: &RotatedGrid<'_>, x: usize, a: isize, b: isize) -> usize {
        if x == 0 || x == self.n {
            let y = if x == 0 { grid.n_x() } else { grid.n_y() } as isize;
            return usize::from(a <= y && y <= b);
        }
        let (lo, hi) = grid.row_range(x);
        let a = a.max(lo as isize);
        let b = b.min(hi as isize);
        if a > b {
            return 0;
        }
        let u = self.column_unit(x) as isize;
        let first = (a + u - 1).div_euclid(u);
        let last = b.div_euclid(u);
        (last - first + 1).max(0) as usize
    }

    /// Every `(y, y')` pair between consecutive sparse columns with
    /// `|y' - y| <= B_x`, i.e. the edges of the sparsified grid.
    pub fn dense_edge_count(&self, grid: &RotatedGrid<'_>) -> u64 {
        let b = self.b_x;
        let mut total = 0u64;
        for x in (0..self.n).step_by(b) {
            for y in self.sparse_rows(grid, x) {
                let y = y as isize;
                total += self.rows_between(grid, x + b, y - b as isize, y + b as isize) as u64;
            }
        }
        total
    }

    /// Sparse edges inside columns `[l, r]`.
    pub fn edge_count_in(&self, grid: &RotatedGrid<'_>, l: usize, r: usize) -> u64 {
        let b = self.b_x;
        let mut total = 0u64;
        for x in (l..r).step_by(b) {
            for y in self.sparse_rows(grid, x) {
                let y = y as isize;
                total += self.rows_between(grid, x + b, y - b as isize, y + b as isize) as u64;
            }
        }
        total
    }
}

/// Computed window values, keyed by `(x / B_x, y, y' - y + B_x)`.
enum Values {
    /// Unit windows are single grid edges and are not stored.
    Direct,
    Dense(Vec<u16>),
    Sparse(FxHashMap<u64, u32>),
}

/// Which edges have been charged, same keys as [`Values`].
enum Seen {
    Dense(Vec<u64>),
    Sparse(FxHashSet<u64>),
}

const DENSE_LIMIT: u64 = 1 << 27;
const UNREACHABLE: u32 = 1;

/// Memoised edge oracle. Each distinct edge costs one query the first time
/// it is requested; values are filled a whole source row at a time.
pub struct SparseOracle<'a> {
    grid: RotatedGrid<'a>,
    schedule: &'a ScaleSchedule,
    values: Values,
    seen: Seen,
    rows: u64,
    fan: u64,
    query_count: u64,
    /// Whether any edge leaving column `x / B_x` has been charged.
    touched: Vec<bool>,
}

impl<'a> SparseOracle<'a> {
    pub fn new(grid: RotatedGrid<'a>, schedule: &'a ScaleSchedule) -> Self {
        assert_eq!(grid.n(), schedule.n, "schedule built for a different length");
        let b = schedule.b_x as u64;
        let rows = schedule.n as u64 + 1;
        let fan = 2 * b + 1;
        let cols = schedule.n as u64 / b;
        let size = cols.saturating_mul(rows).saturating_mul(fan);
        let dense = size <= DENSE_LIMIT;
        let values = if b == 1 {
            Values::Direct
        } else if dense && b < u16::MAX as u64 - 2 {
            Values::Dense(vec![0; size as usize])
        } else {
            Values::Sparse(FxHashMap::default())
        };
        let seen = if dense { Seen::Dense(vec![0; size.div_ceil(64) as usize]) } else { Seen::Sparse(FxHashSet::default()) };
        let touched = vec![false; cols as usize];
        SparseOracle { grid, schedule, values, seen, rows, fan, query_count: 0, touched }
    }

    pub fn grid(&self) -> &RotatedGrid<'a> {
        &self.grid
    }

    pub fn schedule(&self) -> &'a ScaleSchedule {
        self.schedule
    }

    pub fn query_count(&self) -> u64 {
        self.query_count
    }

    /// Fraction of `B_x`-wide column intervals with at least one charged edge.
    pub fn surviving_fraction(&self) -> f64 {
        let hit = self.touched.iter().filter(|&&t| t).count();
        hit as f64 / self.touched.len().max(1) as f64
    }

    #[inline]
    fn key(&self, x: usize, y: usize, y2: usize) -> u64 {
        let b = self.schedule.b_x;
        ((x / b) as u64 * self.rows + y as u64) * self.fan + (y2 + b - y) as u64
    }

    /// Raw stored entry: 0 unknown, 1 unreachable, `w + 2` otherwise.
    #[inline]
    fn stored(&self, k: u64) -> u32 {
        match &self.values {
            Values::Direct => 0,
            Values::Dense(vals) => vals[k as usize] as u32,
            Values::Sparse(vals) => vals.get(&k).copied().unwrap_or(0),
        }
    }

    fn fill_source(&mut self, x: usize, y: usize) -> Result<(), SparseError> {
        let b = self.schedule.b_x;
        let (lo, vals) = self.grid.reachable_weights(x, y, x + b)?;
        let code = |w: Option<u64>| w.map_or(UNREACHABLE, |w| w as u32 + 2);
        for t in self.schedule.sparse_rows_in(&self.grid, x + b, y.saturating_sub(b), y + b) {
            let v = if t >= lo && t < lo + vals.len() { code(vals[t - lo]) } else { UNREACHABLE };
            let k = self.key(x, y, t);
            match &mut self.values {
                Values::Direct => unreachable!("unit windows are not stored"),
                Values::Dense(vals) => vals[k as usize] = v as u16,
                Values::Sparse(vals) => {
                    vals.insert(k, v);
                }
            }
        }
        Ok(())
    }

    fn check(&self, x: usize, y: usize, y2: usize) -> Result<(), SparseError> {
        let sch = self.schedule;
        if x >= sch.n || !sch.is_sparse_vertex(&self.grid, x, y) {
            return Err(SparseError::InvalidVertex(x, y));
        }
        if y.abs_diff(y2) > sch.b_x || !sch.is_sparse_vertex(&self.grid, x + sch.b_x, y2) {
            return Err(SparseError::InvalidVertex(x + sch.b_x, y2));
        }
        Ok(())
    }

    /// Optimal window weight `(x, y) -> (x + B_x, y2)`; `None` if no path.
    pub fn edge_weight(&mut self, x: usize, y: usize, y2: usize) -> Result<Option<u64>, SparseError> {
        self.check(x, y, y2)?;
        Ok(self.lookup(x, y, y2, true))
    }

    /// Same value without charging a query; used for the uncounted
    /// constant-factor recursion.
    pub fn peek_weight(&mut self, x: usize, y: usize, y2: usize) -> Result<Option<u64>, SparseError> {
        self.check(x, y, y2)?;
        Ok(self.lookup(x, y, y2, false))
    }

    /// Lookup for callers that only form valid sparse edges.
    #[inline]
    pub(crate) fn lookup(&mut self, x: usize, y: usize, y2: usize, count: bool) -> Option<u64> {
        let k = self.key(x, y, y2);
        if count {
            self.charge(k, 1);
        }
        if let Values::Direct = self.values {
            return self.grid.fan(x, y)[y2 + 1 - y];
        }
        let mut raw = self.stored(k);
        if raw == 0 {
            // Cannot fail: the window's source is a valid vertex.
            let _ = self.fill_source(x, y);
            raw = self.stored(k);
        }
        (raw >= 2).then(|| (raw - 2) as u64)
    }

    /// Charges the unit edges `(x, y) -> (x + 1, y2)` for `y2` in `[a, b]`,
    /// all of which must be valid sparse edges.
    #[inline]
    pub(crate) fn charge_unit(&mut self, x: usize, y: usize, a: usize, b: usize) {
        debug_assert!(self.schedule.b_x == 1 && a <= b);
        self.charge(self.key(x, y, a), (b - a + 1) as u32);
    }

    /// Marks `len` consecutive keys from `k`, counting the fresh ones.
    #[inline]
    fn charge(&mut self, k: u64, len: u32) {
        self.touched[(k / (self.rows * self.fan)) as usize] = true;
        match &mut self.seen {
            Seen::Dense(seen) => {
                for k in k..k + len as u64 {
                    let (w, bit) = ((k / 64) as usize, 1u64 << (k % 64));
                    self.query_count += u64::from(seen[w] & bit == 0);
                    seen[w] |= bit;
                }
            }
            Seen::Sparse(seen) => {
                for k in k..k + len as u64 {
                    self.query_count += u64::from(seen.insert(k));
                }
            }
        }
    }
}

/// Optimum over the sparsified grid by a column DP; requests every edge.
pub fn sparsified_optimum(oracle: &mut SparseOracle<'_>) -> Result<Option<u64>, SparseError> {
    let sch = oracle.schedule();
    let grid = *oracle.grid();
    let b = sch.b_x;
    let better = |a: i64, c: i64| match grid.kind() {
        Kind::Ed => a < c,
        Kind::Lcs => a > c,
    };
    let mut prev: Vec<(usize, Option<i64>)> = vec![(grid.n_x(), Some(0))];
    for x in (0..sch.n).step_by(b) {
        let targets: Vec<usize> = sch.sparse_rows(&grid, x + b).collect();
        let mut cur: Vec<Option<i64>> = vec![None; targets.len()];
        for &(y, dist) in &prev {
            let first = targets.partition_point(|&t| t + b < y);
            for (j, &t) in targets.iter().enumerate().skip(first) {
                if t > y + b {
                    break;
                }
                let w = oracle.edge_weight(x, y, t)?;
                if let (Some(d), Some(w)) = (dist, w) {
                    let c = d + w as i64;
                    if cur[j].map_or(true, |old| better(c, old)) {
                        cur[j] = Some(c);
                    }
                }
            }
        }
        prev = targets.into_iter().zip(cur).collect();
    }
    Ok(prev.into_iter().find(|&(y, _)| y == grid.n_y()).and_then(|(_, d)| d).map(|d| d as u64))
}

/// Moves a path's endpoints to `(l, y_l2)` and `(r, y_r2)` by local
/// shifts of two rows each; a shift moves a run of indel steps and alters
/// the weight of at most two columns. Endpoints are expected on real vertices.
pub fn round_endpoints(
    grid: &RotatedGrid<'_>,
    path: &GridPath,
    y_l2: usize,
    y_r2: usize,
) -> Result<GridPath, SparseError> {
    path.validate()?;
    let infeasible = |m: &str| SparseError::Infeasible(m.to_string());
    let (y_l, y_r) = (path.rows[0], *path.rows.last().unwrap());
    if y_l.abs_diff(y_l2) % 2 != 0 || y_r.abs_diff(y_r2) % 2 != 0 {
        return Err(infeasible("endpoint moves must be even"));
    }
    let span = path.rows.len() - 1;
    if y_l2.abs_diff(y_r2) > span || !grid.is_vertex(path.l, y_l2) || !grid.is_vertex(path.r(), y_r2) {
        return Err(infeasible("target endpoints violate the span bound"));
    }
    let mut rows: Vec<i64> = path.rows.iter().map(|&v| v as i64).collect();
    let (tl, tr) = (y_l2 as i64, y_r2 as i64);
    while rows[0] != tl || *rows.last().unwrap() != tr {
        let mut moved = false;
        for left in [true, false] {
            let (cur, tgt) = if left { (rows[0], tl) } else { (*rows.last().unwrap(), tr) };
            if cur == tgt {
                continue;
            }
            let sigma = (tgt - cur).signum();
            if let Some(next) = shift_end(&rows, left, sigma) {
                if next.iter().all(|&v| v >= 0) {
                    let cand = GridPath { l: path.l, rows: next.iter().map(|&v| v as usize).collect(), weight: 0 };
                    if grid.path_weight(&cand).is_ok() {
                        rows = next;
                        moved = true;
                        break;
                    }
                }
            }
        }
        if !moved {
            return Err(infeasible("no admissible local shift"));
        }
    }
    let mut out = GridPath { l: path.l, rows: rows.into_iter().map(|v| v as usize).collect(), weight: 0 };
    out.weight = grid.path_weight(&out)?;
    Ok(out)
}

/// One shift of an endpoint by `2 * sigma`, or `None` if no step admits it.
fn shift_end(rows: &[i64], left: bool, sigma: i64) -> Option<Vec<i64>> {
    let mut p = rows.to_vec();
    let len = p.len();
    if left {
        // first step not moving against the shift direction
        let i = (0..len - 1).find(|&i| sigma * (p[i + 1] - p[i]) >= 0)?;
        if p[i + 1] - p[i] == sigma {
            for v in &mut p[..=i] {
                *v += 2 * sigma;
            }
        } else if p[i + 1] == p[i] {
            for v in &mut p[..=i] {
                *v += 2 * sigma;
            }
            p[i + 1] += sigma;
            if i + 2 >= len || p[i + 2] != rows[i + 1] {
                return None;
            }
        } else {
            return None;
        }
    } else {
        let i = (1..len).rev().find(|&i| sigma * (p[i] - p[i - 1]) <= 0)?;
        if p[i] - p[i - 1] == -sigma {
            for v in &mut p[i..] {
                *v += 2 * sigma;
            }
        } else if p[i] == p[i - 1] {
            for v in &mut p[i..] {
                *v += 2 * sigma;
            }
            p[i - 1] += sigma;
            if i < 2 || p[i - 2] != rows[i - 1] {
                return None;
            }
        } else {
            return None;
        }
    }
    Some(p)
}
