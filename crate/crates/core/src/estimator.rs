//! Subsampled divide-and-conquer estimators.
//!
//! `whest(s, l, y_l, y_r)` estimates the optimum from `(l, y_l)` to
//! `(l + I_s, y_r)`. On a passive scale it is the exact optimum over
//! anchor paths through the scale-`(s-1)` sparsified grid; on an active
//! scale the path is pinned to rounded straight-line anchor rows and only
//! the `eta`-selected sub-intervals are recursed into. ED additionally
//! keeps an unsampled constant-factor table `appr` for the give-up rule
//! and the clamp.

mod search;

pub use search::{
    default_gamma, estimate_to_search, is_common_subsequence, replay, script_cost, window_spacing, EditOp,
    SearchConfig, SearchResult, WindowBackend,
};

use std::rc::Rc;
use std::time::{Duration, Instant};

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    ed_bounded, ed_exact, lcs_bounded, lcs_exact, pad_inputs, pad_to_lengths, BandDoubling, ConstApprox,
    ExactApprox, DEFAULT_PAD_BYTE,
};
use crate::grids::{build_rotated_grid, InputPair, Kind, RotatedGrid};
use crate::sparse::{derive_seed, formula_params, make_schedule, Overrides, ScaleSchedule, SparseError, SparseOracle};

/// Which constant-factor backend feeds `appr` at scale 0.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApproxStrategy {
    #[default]
    Exact,
    BandDoubling,
}

impl ApproxStrategy {
    fn backend(self) -> &'static dyn ConstApprox {
        match self {
            ApproxStrategy::Exact => &ExactApprox,
            ApproxStrategy::BandDoubling => &BandDoubling,
        }
    }
}

/// Estimator knobs; `None` means the formula default for the input length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub overrides: Overrides,
    pub repeats: Option<usize>,
    pub dispatch_threshold: Option<u64>,
    pub clip_factor: Option<f64>,
    pub giveup_factor: Option<f64>,
    pub slack: f64,
    pub seed: u64,
    pub compute_exact: bool,
    pub approx: ApproxStrategy,
    pub pad_exponent: f64,
    pub pad_byte: u8,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            overrides: Overrides::default(),
            repeats: None,
            dispatch_threshold: None,
            clip_factor: None,
            giveup_factor: None,
            slack: 0.0,
            seed: 0,
            compute_exact: false,
            approx: ApproxStrategy::Exact,
            pad_exponent: 0.99,
            pad_byte: DEFAULT_PAD_BYTE,
        }
    }
}

fn log2n(n: usize) -> f64 {
    (n.max(2) as f64).log2()
}

/// `log log n`, at least 1.
pub fn default_giveup_factor(n: usize) -> f64 {
    log2n(n).log2().max(1.0)
}

/// `2 log^0.02 n`.
pub fn default_clip_factor(n: usize) -> f64 {
    2.0 * log2n(n).powf(0.02)
}

/// `max(3, ceil(log2 n))`, made odd.
pub fn default_repeats(n: usize) -> usize {
    let r = (log2n(n).ceil() as usize).max(3);
    r | 1
}

/// `n / 2^ceil(log^0.009 n)`, at least 16.
pub fn default_dispatch_threshold(n: usize) -> u64 {
    let e = log2n(n).powf(0.009).ceil() as u32;
    ((n >> e.min(63)) as u64).max(16)
}

/// Sum estimate from a sample of `|I|` entries out of `m`: entries above
/// `clip` times the sample mean are cut down, and the clipped sum is
/// scaled by `m / |I|`.
pub fn est_sum_scaled(sample: &[f64], m: usize, clip: f64) -> Option<f64> {
    if sample.is_empty() {
        return None;
    }
    let k = sample.len() as f64;
    let total: f64 = sample.iter().sum();
    let cap = if clip.is_infinite() { f64::INFINITY } else { clip * total / k };
    Some(m as f64 / k * sample.iter().map(|&a| a.min(cap)).sum::<f64>())
}

/// Half-sample form: the result doubles the clipped sum.
pub fn est_sum(sample: &[f64], clip: f64) -> Option<f64> {
    est_sum_scaled(sample, 2 * sample.len(), clip)
}

/// Round-to-nearest multiple of `unit` of `y_l + i (y_r - y_l) / m`, ties down.
pub fn regular_row(y_l: usize, y_r: usize, i: usize, m: usize, unit: usize) -> i64 {
    let t = y_l as i64 * m as i64 + i as i64 * (y_r as i64 - y_l as i64);
    let d = (m * unit) as i64;
    let q = -(d - 2 * t).div_euclid(2 * d);
    q * unit as i64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Table {
    Whest = 0,
    Appr = 1,
}

/// Values at one column for rows `lo, lo + step, ...`.
#[derive(Clone, Debug)]
struct Row {
    lo: usize,
    step: usize,
    vals: Vec<f64>,
}

impl Default for Row {
    fn default() -> Row {
        Row { lo: 0, step: 1, vals: Vec::new() }
    }
}

impl Row {
    fn single(y: usize) -> Row {
        Row { lo: y, step: 1, vals: vec![0.0] }
    }

    #[inline]
    fn get(&self, t: usize) -> Option<f64> {
        if t < self.lo || (t - self.lo) % self.step != 0 {
            return None;
        }
        self.vals.get((t - self.lo) / self.step).copied()
    }

    #[inline]
    fn row(&self, k: usize) -> usize {
        self.lo + k * self.step
    }
}

/// One active interval as seen by the ED recursion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActiveRecord {
    pub s: usize,
    pub l: usize,
    pub y_l: usize,
    pub y_r: usize,
    pub whest: f64,
    pub appr: f64,
    pub gave_up: bool,
}

type RowKey = (u8, u32, u32);
type PairKey = (u32, u32, u32);

/// Memo for one active scale. Dense tables index `(interval, y_l, y_r - y_l)`
/// in row units and hold NaN until computed.
enum PairMemo {
    Dense { unit: usize, width: usize, starts: Vec<usize>, lows: Vec<usize>, vals: Vec<f64> },
    Sparse(FxHashMap<PairKey, f64>),
}

/// Largest dense memo, in entries.
const PAIR_MEMO_LIMIT: usize = 1 << 25;

impl PairMemo {
    fn new(grid: &RotatedGrid<'_>, sch: &ScaleSchedule, s: usize) -> PairMemo {
        let (w, unit) = (sch.widths[s], sch.row_unit(s));
        let width = 2 * w / unit + 1;
        let mut starts = Vec::with_capacity(sch.n / w + 1);
        let mut lows = Vec::with_capacity(sch.n / w);
        let mut total = 0usize;
        for l in (0..sch.n).step_by(w) {
            let (lo, hi) = grid.row_range(l);
            let lo = lo / unit * unit;
            starts.push(total);
            lows.push(lo);
            total = total.saturating_add(((hi - lo) / unit + 1).saturating_mul(width));
        }
        if total > PAIR_MEMO_LIMIT {
            return PairMemo::Sparse(FxHashMap::default());
        }
        PairMemo::Dense { unit, width, starts, lows, vals: vec![f64::NAN; total] }
    }

    #[inline]
    fn slot(&mut self, w: usize, l: usize, y_l: usize, y_r: usize) -> Option<&mut f64> {
        match self {
            PairMemo::Dense { unit, width, starts, lows, vals } => {
                let b = l / w;
                let i = starts[b] + (y_l - lows[b]) / *unit * *width + (y_r + w - y_l) / *unit;
                Some(&mut vals[i])
            }
            PairMemo::Sparse(_) => None,
        }
    }

    fn get(&mut self, w: usize, l: usize, y_l: usize, y_r: usize) -> Option<f64> {
        match self.slot(w, l, y_l, y_r) {
            Some(v) => (!v.is_nan()).then_some(*v),
            None => match self {
                PairMemo::Sparse(m) => m.get(&(l as u32, y_l as u32, y_r as u32)).copied(),
                PairMemo::Dense { .. } => unreachable!(),
            },
        }
    }

    fn put(&mut self, w: usize, l: usize, y_l: usize, y_r: usize, v: f64) {
        if let Some(slot) = self.slot(w, l, y_l, y_r) {
            *slot = v;
        } else if let PairMemo::Sparse(m) = self {
            m.insert((l as u32, y_l as u32, y_r as u32), v);
        }
    }
}

/// One run of the recursion over a fixed schedule.
pub struct Estimator<'a> {
    oracle: SparseOracle<'a>,
    grid: RotatedGrid<'a>,
    sch: &'a ScaleSchedule,
    kind: Kind,
    giveup: f64,
    clip: f64,
    approx: &'static dyn ConstApprox,
    exact_appr: bool,
    rows: [FxHashMap<RowKey, Rc<Row>>; 2],
    /// Per table, per scale; built on first use.
    pairs: [Vec<Option<PairMemo>>; 2],
    appr_edges: FxHashMap<(u32, u32, u32), f64>,
    /// `eta` masks of active scales, one per interval.
    etas: Vec<Vec<u64>>,
    /// Highest scale whose intervals contain only unit windows between
    /// fully populated columns and no active scale.
    sweep_top: Option<usize>,
    log: Option<Vec<ActiveRecord>>,
}

impl<'a> Estimator<'a> {
    pub fn new(grid: RotatedGrid<'a>, sch: &'a ScaleSchedule, cfg: &EstimatorConfig) -> Self {
        let n = sch.n;
        Estimator {
            oracle: SparseOracle::new(grid, sch),
            grid,
            sch,
            kind: grid.kind(),
            giveup: cfg.giveup_factor.unwrap_or_else(|| default_giveup_factor(n)),
            clip: cfg.clip_factor.unwrap_or_else(|| default_clip_factor(n)),
            approx: cfg.approx.backend(),
            exact_appr: cfg.approx == ApproxStrategy::Exact,
            rows: Default::default(),
            pairs: [(); 2].map(|_| (0..=sch.s).map(|_| None).collect()),
            appr_edges: FxHashMap::default(),
            etas: (0..=sch.s)
                .map(|s| {
                    let w = sch.widths[s];
                    if s == 0 || !sch.is_active(s) {
                        return Vec::new();
                    }
                    (0..n / w).map(|b| sch.eta(b * w, (b + 1) * w)).collect()
                })
                .collect(),
            sweep_top: (sch.b_x == 1).then(|| {
                (1..=sch.s).take_while(|&c| !sch.is_active(c) && sch.row_unit(c - 1) == 1).last().unwrap_or(0)
            }),
            log: None,
        }
    }

    /// Keeps a record of every active ED interval evaluated from now on.
    pub fn record_active(&mut self) {
        self.log = Some(Vec::new());
    }

    pub fn active_log(&self) -> &[ActiveRecord] {
        self.log.as_deref().unwrap_or(&[])
    }

    pub fn query_count(&self) -> u64 {
        self.oracle.query_count()
    }

    pub fn oracle(&self) -> &SparseOracle<'a> {
        &self.oracle
    }

    fn worst(&self) -> f64 {
        match self.kind {
            Kind::Ed => f64::INFINITY,
            Kind::Lcs => f64::NEG_INFINITY,
        }
    }

    #[inline]
    fn better(&self, a: f64, b: f64) -> bool {
        match self.kind {
            Kind::Ed => a < b,
            Kind::Lcs => a > b,
        }
    }

    /// Top-level estimate over the whole grid.
    pub fn estimate(&mut self) -> Result<f64, SparseError> {
        let (s, e) = (self.grid.start(), self.grid.end());
        self.whest(self.sch.s, s.0, s.1, e.1)
    }

    /// `whest` on the scale-`s` interval starting at `l`.
    pub fn whest(&mut self, s: usize, l: usize, y_l: usize, y_r: usize) -> Result<f64, SparseError> {
        self.check_interval(s, l, y_l, y_r)?;
        self.value(Table::Whest, s, l, y_l, y_r)
    }

    /// `appr` on the scale-`s` interval starting at `l` (ED only).
    pub fn appr(&mut self, s: usize, l: usize, y_l: usize, y_r: usize) -> Result<f64, SparseError> {
        self.check_interval(s, l, y_l, y_r)?;
        self.value(Table::Appr, s, l, y_l, y_r)
    }

    fn check_interval(&self, s: usize, l: usize, y_l: usize, y_r: usize) -> Result<(), SparseError> {
        let w = *self.sch.widths.get(s).ok_or_else(|| SparseError::Infeasible(format!("no scale {s}")))?;
        if l % w != 0 || l + w > self.sch.n {
            return Err(SparseError::Infeasible(format!("({l}, {}] is not a scale-{s} interval", l + w)));
        }
        if !self.sch.is_sparse_vertex(&self.grid, l, y_l) {
            return Err(SparseError::InvalidVertex(l, y_l));
        }
        if !self.sch.is_sparse_vertex(&self.grid, l + w, y_r) || y_l.abs_diff(y_r) > w {
            return Err(SparseError::InvalidVertex(l + w, y_r));
        }
        Ok(())
    }

    /// Point value; active pairs are memoised because overlapping parents
    /// share rounded anchors and overlapping frontiers share intervals.
    fn value(&mut self, t: Table, s: usize, l: usize, y_l: usize, y_r: usize) -> Result<f64, SparseError> {
        if s == 0 {
            return self.base(t, l, y_l, y_r);
        }
        if !self.sch.is_active(s) {
            let row = self.row(t, s, l, y_l)?;
            return Ok(row.get(y_r).unwrap_or_else(|| self.worst()));
        }
        let w = self.sch.widths[s];
        let (grid, sch) = (self.grid, self.sch);
        let memo = self.pairs[t as usize][s].get_or_insert_with(|| PairMemo::new(&grid, sch, s));
        if let Some(v) = memo.get(w, l, y_l, y_r) {
            return Ok(v);
        }
        let v = self.active(t, s, l, y_l, y_r)?;
        if let Some(memo) = self.pairs[t as usize][s].as_mut() {
            memo.put(w, l, y_l, y_r, v);
        }
        Ok(v)
    }

    fn base(&mut self, t: Table, x: usize, y: usize, y2: usize) -> Result<f64, SparseError> {
        let w = match t {
            Table::Whest => self.oracle.lookup(x, y, y2, true),
            Table::Appr if self.exact_appr => self.oracle.lookup(x, y, y2, false),
            Table::Appr => {
                let key = (x as u32, y as u32, y2 as u32);
                if let Some(&v) = self.appr_edges.get(&key) {
                    return Ok(v);
                }
                let v = self
                    .approx
                    .approx_window(&self.grid, x, y, x + self.sch.b_x, y2)
                    .map_or(f64::INFINITY, |w| w as f64);
                self.appr_edges.insert(key, v);
                return Ok(v);
            }
        };
        Ok(w.map_or_else(|| self.worst(), |w| w as f64))
    }

    /// Passive scale from one source: every reachable row at `l + I_s`.
    fn row(&mut self, t: Table, s: usize, l: usize, y_l: usize) -> Result<Rc<Row>, SparseError> {
        let key = (s as u8, l as u32, y_l as u32);
        if let Some(r) = self.rows[t as usize].get(&key) {
            return Ok(Rc::clone(r));
        }
        let row = Rc::new(self.propagate(t, s, l, &Row::single(y_l))?);
        self.rows[t as usize].insert(key, Rc::clone(&row));
        Ok(row)
    }

    /// Pushes a frontier at column `x0` across one scale-`c` interval.
    /// Passive scales are flattened into their children, so a frontier
    /// costs one sweep rather than one sweep per source row.
    fn propagate(&mut self, t: Table, c: usize, x0: usize, src: &Row) -> Result<Row, SparseError> {
        if self.sweep_top.is_some_and(|top| c <= top) && (t == Table::Whest || self.exact_appr) {
            return Ok(self.sweep(t, x0, x0 + self.sch.widths[c], src));
        }
        if c > 0 && !self.sch.is_active(c) {
            let w = self.sch.widths[c - 1];
            let mut cur = self.propagate(t, c - 1, x0, src)?;
            for i in 1..self.sch.m {
                cur = self.propagate(t, c - 1, x0 + i * w, &cur)?;
            }
            return Ok(cur);
        }
        let worst = self.worst();
        let w = self.sch.widths[c];
        let x1 = x0 + w;
        let finite: Vec<usize> = (0..src.vals.len()).filter(|&k| src.vals[k] != worst).collect();
        let (Some(&first), Some(&last)) = (finite.first(), finite.last()) else {
            return Ok(Row::default());
        };
        let (a, b) = (src.row(first).saturating_sub(w), src.row(last) + w);
        let rows = self.sch.sparse_rows_in(&self.grid, x1, a, b);
        let count = rows.clone().count();
        let mut rows = rows;
        let Some(lo) = rows.next() else { return Ok(Row::default()) };
        let step = if count > 1 { rows.next().unwrap() - lo } else { 1 };
        let mut out = Row { lo, step, vals: vec![worst; count] };
        let mut buf = Vec::new();
        for k in finite {
            let (y, v) = (src.row(k), src.vals[k]);
            let from = y.saturating_sub(w).max(lo);
            let j0 = (from - lo).div_ceil(step);
            let j1 = ((y + w).saturating_sub(lo) / step).min(count - 1);
            if y + w < lo || j0 > j1 {
                continue;
            }
            buf.clear();
            for j in j0..=j1 {
                let tg = lo + j * step;
                let cv = if c == 0 { self.base(t, x0, y, tg)? } else { self.value(t, c, x0, y, tg)? };
                buf.push(cv);
            }
            for (slot, &cv) in out.vals[j0..=j1].iter_mut().zip(&buf) {
                let cand = v + cv;
                if self.better(cand, *slot) {
                    *slot = cand;
                }
            }
        }
        Ok(out)
    }

    /// Column-by-column DP over unit windows from `x0` to `x1`; every row
    /// strictly between is a sparse vertex. Charges exactly the edges the
    /// generic propagation would request.
    fn sweep(&mut self, t: Table, x0: usize, x1: usize, src: &Row) -> Row {
        let worst = self.worst();
        let count = t == Table::Whest;
        let finite = || (0..src.vals.len()).filter(|&k| src.vals[k] != worst);
        let (Some(first), Some(last)) = (finite().next(), finite().last()) else {
            return Row::default();
        };
        let mut lo = src.row(first);
        let mut cur = vec![worst; src.row(last) - lo + 1];
        for k in finite() {
            cur[src.row(k) - lo] = src.vals[k];
        }
        let mut next = Vec::with_capacity(cur.len() + 2 * (x1 - x0));
        let mut ends = Vec::new();
        for x in x0..x1 {
            let (rlo, rhi) = self.grid.row_range(x + 1);
            let nlo = lo.saturating_sub(1).max(rlo);
            let nhi = (lo + cur.len()).min(rhi);
            if nlo > nhi {
                return Row::default();
            }
            next.clear();
            next.resize(nhi - nlo + 1, worst);
            for (i, &v) in cur.iter().enumerate() {
                if v == worst {
                    continue;
                }
                let y = lo + i;
                let (a, b) = (y.saturating_sub(1).max(nlo), (y + 1).min(nhi));
                if a > b {
                    continue;
                }
                let fan = self.grid.fan(x, y);
                let end = x + 1 == x1;
                if count && !end {
                    self.oracle.charge_unit(x, y, a, b);
                }
                for tg in a..=b {
                    if end && !self.sch.is_sparse_vertex(&self.grid, x1, tg) {
                        continue;
                    }
                    if count && end {
                        self.oracle.charge_unit(x, y, tg, tg);
                    }
                    if let Some(w) = fan[tg + 1 - y] {
                        let slot = &mut next[tg - nlo];
                        if self.better(v + w as f64, *slot) {
                            *slot = v + w as f64;
                        }
                    }
                }
            }
            std::mem::swap(&mut cur, &mut next);
            lo = nlo;
            let Some(f) = cur.iter().position(|&v| v != worst) else { return Row::default() };
            let l = cur.iter().rposition(|&v| v != worst).unwrap_or(f);
            if f > 0 || l + 1 < cur.len() {
                cur.truncate(l + 1);
                cur.drain(..f);
                lo += f;
            }
        }
        ends.extend((0..cur.len()).filter(|&i| self.sch.is_sparse_vertex(&self.grid, x1, lo + i)));
        let step = if ends.len() > 1 { ends[1] - ends[0] } else { 1 };
        Row { lo: lo + ends[0], step, vals: ends.iter().map(|&i| cur[i]).collect() }
    }

    /// Active scale: regularised anchors, sampled recursion.
    fn active(&mut self, t: Table, s: usize, l: usize, y_l: usize, y_r: usize) -> Result<f64, SparseError> {
        let m = self.sch.m;
        let w = self.sch.widths[s - 1];
        let unit = self.sch.row_unit(s - 1);
        let mut anchors = [0i64; 65];
        anchors[0] = y_l as i64;
        anchors[m] = y_r as i64;
        for (i, a) in anchors.iter_mut().enumerate().take(m).skip(1) {
            *a = regular_row(y_l, y_r, i, m, unit);
        }
        let feasible = |i: usize| {
            let (a, b) = (anchors[i - 1], anchors[i]);
            a >= 0
                && b >= 0
                && a.abs_diff(b) as usize <= w
                && self.grid.is_vertex(l + (i - 1) * w, a as usize)
                && self.grid.is_vertex(l + i * w, b as usize)
        };
        let feasible: u64 = (1..=m).filter(|&i| feasible(i)).fold(0, |acc, i| acc | 1 << (i - 1));
        let fallback = match self.kind {
            Kind::Ed => w as f64,
            Kind::Lcs => 0.0,
        };
        let child = |me: &mut Self, tt: Table, i: usize| -> Result<f64, SparseError> {
            if feasible >> (i - 1) & 1 == 0 {
                return Ok(fallback);
            }
            let v = me.value(tt, s - 1, l + (i - 1) * w, anchors[i - 1] as usize, anchors[i] as usize)?;
            // Unit windows can make a rounded anchor pair unreachable; such a
            // child is charged like an infeasible one.
            Ok(if v.is_infinite() { fallback } else { v })
        };
        let eta = self.etas[s][l / self.sch.widths[s]];
        let picked = move || (1..=m).filter(move |i| eta >> (i - 1) & 1 == 1);
        match (self.kind, t) {
            (Kind::Ed, _) => {
                let (mut ap, mut worst_child) = (0.0, 0.0f64);
                for i in 1..=m {
                    let a = child(self, Table::Appr, i)?;
                    ap += a;
                    worst_child = worst_child.max(a);
                }
                if t == Table::Appr {
                    return Ok(ap);
                }
                let gave_up = worst_child > ap / m as f64 * self.giveup;
                let v = if gave_up {
                    ap
                } else {
                    let mut sum = 0.0;
                    for i in picked() {
                        sum += child(self, Table::Whest, i)?;
                    }
                    let est = m as f64 / eta.count_ones() as f64 * sum;
                    est.min(ap)
                };
                if let Some(log) = self.log.as_mut() {
                    log.push(ActiveRecord { s, l, y_l, y_r, whest: v, appr: ap, gave_up });
                }
                Ok(v)
            }
            (Kind::Lcs, _) => {
                let mut sample = Vec::with_capacity(m);
                for i in picked() {
                    sample.push(child(self, Table::Whest, i)?.max(0.0));
                }
                Ok(est_sum_scaled(&sample, m, self.clip).unwrap_or(0.0))
            }
        }
    }
}

/// One independent trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub active_scales: Vec<usize>,
    pub estimate: f64,
    pub queries: u64,
    /// Fraction of unit column intervals that received any query.
    pub surviving: f64,
}

/// Schedule parameters shared by every trial of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSummary {
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub b_x: usize,
    pub phi_y: usize,
    pub widths: Vec<usize>,
    pub active_prob: f64,
    pub eta_all_ones: bool,
    pub padded_lengths: (usize, usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub mode: Kind,
    pub estimate: f64,
    pub exact: Option<u64>,
    pub queries: u64,
    pub dense_edges: u64,
    pub repeats: usize,
    pub dispatched_small: bool,
    pub seed: u64,
    pub schedule: Option<ScheduleSummary>,
    pub trials: Vec<TrialRecord>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl EstimateReport {
    pub fn relative_error(&self) -> Option<f64> {
        let e = self.exact? as f64;
        Some(if e == 0.0 {
            if self.estimate == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.estimate - e).abs() / e
        })
    }
}

/// Pads `pair` so that the schedule's `M^S` divides the total length.
pub fn pad_for_schedule(pair: &InputPair, cfg: &EstimatorConfig) -> InputPair {
    let mut p = pad_inputs(pair, cfg.pad_exponent);
    if cfg.pad_byte != DEFAULT_PAD_BYTE {
        let (xr, yr) = pair.real_lens();
        let (mut x, mut y) = (p.x.clone(), p.y.clone());
        x[xr..].fill(cfg.pad_byte);
        y[yr..].fill(cfg.pad_byte);
        p = InputPair::with_padding(x, y, xr, yr);
    }
    for _ in 0..8 {
        let n = p.n().max(1);
        let (fm, fs, _) = formula_params(n);
        let m = cfg.overrides.m.unwrap_or(fm);
        let s = cfg.overrides.s.unwrap_or(fs);
        let top = m.saturating_pow(s as u32).max(1);
        let target = n.div_ceil(top) * top;
        if target == p.n() {
            break;
        }
        p = pad_to_lengths(&p, p.n_x(), target - p.n_x(), cfg.pad_byte);
    }
    p
}

pub fn exact_value(pair: &InputPair, mode: Kind) -> u64 {
    match mode {
        Kind::Ed => ed_exact(pair),
        Kind::Lcs => lcs_exact(pair),
    }
}

/// Runs one trial of the recursion on an already padded pair.
pub fn run_trial(padded: &InputPair, mode: Kind, cfg: &EstimatorConfig, seed: u64) -> Result<TrialRecord, SparseError> {
    let sch = make_schedule(padded.n(), mode, &cfg.overrides, seed)?;
    let grid = build_rotated_grid(padded, mode);
    let mut est = Estimator::new(grid, &sch, cfg);
    let v = est.estimate()?;
    Ok(TrialRecord { seed, active_scales: sch.active_scales.clone(), estimate: v, queries: est.query_count(), surviving: est.oracle().surviving_fraction() })
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    xs[xs.len() / 2]
}

/// Full pipeline: dispatch small answers exactly, otherwise take the median
/// of independent trials.
pub fn approximate(pair: &InputPair, mode: Kind, cfg: &EstimatorConfig) -> Result<EstimateReport, SparseError> {
    let start = Instant::now();
    let n = pair.n();
    let exact = cfg.compute_exact.then(|| exact_value(pair, mode));
    let k = cfg.dispatch_threshold.unwrap_or_else(|| default_dispatch_threshold(n));
    let bounded = match mode {
        Kind::Ed => ed_bounded(pair, k),
        Kind::Lcs => lcs_bounded(pair, k),
    };
    let mut report = EstimateReport {
        mode,
        estimate: 0.0,
        exact,
        queries: 0,
        dense_edges: 0,
        repeats: 0,
        dispatched_small: false,
        seed: cfg.seed,
        schedule: None,
        trials: Vec::new(),
        elapsed: Duration::ZERO,
    };
    if let Some(v) = bounded.value {
        report.estimate = v as f64;
        report.exact = Some(v);
        report.dispatched_small = true;
        report.elapsed = start.elapsed();
        return Ok(report);
    }
    let padded = pad_for_schedule(pair, cfg);
    let sch = make_schedule(padded.n(), mode, &cfg.overrides, cfg.seed)?;
    let repeats = cfg.repeats.unwrap_or_else(|| default_repeats(padded.n())).max(1) | 1;
    report.dense_edges = sch.dense_edge_count(&build_rotated_grid(&padded, mode));
    let mut ests = Vec::with_capacity(repeats);
    for r in 0..repeats {
        let trial = run_trial(&padded, mode, cfg, derive_seed(cfg.seed, &[r as u64]))?;
        report.queries += trial.queries;
        ests.push(trial.estimate);
        report.trials.push(trial);
    }
    let slack = match mode {
        Kind::Ed => 1.0 + cfg.slack,
        Kind::Lcs => 1.0 - cfg.slack,
    };
    report.estimate = median(ests) * slack;
    report.repeats = repeats;
    report.schedule = Some(ScheduleSummary {
        n: sch.n,
        m: sch.m,
        s: sch.s,
        b_x: sch.b_x,
        phi_y: sch.phi_y,
        widths: sch.widths.clone(),
        active_prob: sch.active_prob,
        eta_all_ones: sch.eta_all_ones,
        padded_lengths: (padded.n_x(), padded.n_y()),
    });
    report.elapsed = start.elapsed();
    Ok(report)
}
