//! Alignment grids in rotated coordinates.
//!
//! An original vertex `<u, v>` (prefix lengths of X and Y) sits at column
//! `u + v` and row `v - u + n_X`. Every source-sink path visits each column
//! exactly once and moves at most one row per column. Diagonal shortcuts are
//! split at an implicit midpoint: a weight-0 half followed by the shortcut
//! weight. Midpoints are never stored.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Objective family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// Minimise edits.
    Ed,
    /// Maximise matches.
    Lcs,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Ed => "ed",
            Kind::Lcs => "lcs",
        })
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ed" => Ok(Kind::Ed),
            "lcs" => Ok(Kind::Lcs),
            other => Err(format!("unknown mode `{other}` (expected ed or lcs)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("target vertex is unreachable from the source")]
    Unreachable,
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("({0}, {1}) is not a grid vertex")]
    InvalidVertex(usize, usize),
}

/// Two byte strings. Positions at or past `x_real` / `y_real` are padding and
/// never match anything, including other padding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputPair {
    pub x: Vec<u8>,
    pub y: Vec<u8>,
    x_real: usize,
    y_real: usize,
}

impl InputPair {
    pub fn new(x: impl Into<Vec<u8>>, y: impl Into<Vec<u8>>) -> Self {
        let (x, y) = (x.into(), y.into());
        let (x_real, y_real) = (x.len(), y.len());
        InputPair { x, y, x_real, y_real }
    }

    /// Builds a pair whose tails past the given lengths are padding.
    pub fn with_padding(x: Vec<u8>, y: Vec<u8>, x_real: usize, y_real: usize) -> Self {
        assert!(x_real <= x.len() && y_real <= y.len());
        InputPair { x, y, x_real, y_real }
    }

    pub fn n_x(&self) -> usize {
        self.x.len()
    }

    pub fn n_y(&self) -> usize {
        self.y.len()
    }

    pub fn n(&self) -> usize {
        self.x.len() + self.y.len()
    }

    /// Unpadded lengths.
    pub fn real_lens(&self) -> (usize, usize) {
        (self.x_real, self.y_real)
    }

    pub fn is_padded(&self) -> bool {
        self.x_real < self.x.len() || self.y_real < self.y.len()
    }

    #[inline]
    pub fn matches(&self, u: usize, v: usize) -> bool {
        u < self.x_real && v < self.y_real && self.x[u] == self.y[v]
    }

    /// The pair restricted to `x[u0..u1]`, `y[v0..v1]`, padding preserved.
    pub fn slice(&self, u0: usize, u1: usize, v0: usize, v1: usize) -> InputPair {
        InputPair {
            x: self.x[u0..u1].to_vec(),
            y: self.y[v0..v1].to_vec(),
            x_real: self.x_real.clamp(u0, u1) - u0,
            y_real: self.y_real.clamp(v0, v1) - v0,
        }
    }

    pub fn swapped(&self) -> InputPair {
        InputPair { x: self.y.clone(), y: self.x.clone(), x_real: self.y_real, y_real: self.x_real }
    }
}

/// A path given by its row at every column in `l..=r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridPath {
    pub l: usize,
    pub rows: Vec<usize>,
    pub weight: u64,
}

impl GridPath {
    pub fn r(&self) -> usize {
        self.l + self.rows.len() - 1
    }

    pub fn row(&self, x: usize) -> usize {
        self.rows[x - self.l]
    }

    /// Checks the per-column step bound. The span bound
    /// `|p(i) - p(j)| <= j - i` follows from it by the triangle inequality.
    pub fn validate(&self) -> Result<(), GridError> {
        if self.rows.is_empty() {
            return Err(GridError::InvalidPath("empty".into()));
        }
        for (i, w) in self.rows.windows(2).enumerate() {
            if w[0].abs_diff(w[1]) > 1 {
                return Err(GridError::InvalidPath(format!(
                    "step at column {} moves from row {} to {}",
                    self.l + i + 1,
                    w[0],
                    w[1]
                )));
            }
        }
        Ok(())
    }
}

const INF: i32 = i32::MAX / 4;

/// Lazily weighted rotated grid over a borrowed pair.
#[derive(Clone, Copy, Debug)]
pub struct RotatedGrid<'a> {
    pair: &'a InputPair,
    kind: Kind,
    n_x: usize,
    n_y: usize,
}

pub fn build_rotated_grid(pair: &InputPair, kind: Kind) -> RotatedGrid<'_> {
    RotatedGrid { pair, kind, n_x: pair.n_x(), n_y: pair.n_y() }
}

/// Traceback direction per cell: row delta from the predecessor.
type Trace = Vec<(usize, Vec<i8>)>;

impl<'a> RotatedGrid<'a> {
    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn pair(&self) -> &'a InputPair {
        self.pair
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn n(&self) -> usize {
        self.n_x + self.n_y
    }

    pub fn start(&self) -> (usize, usize) {
        (0, self.n_x)
    }

    pub fn end(&self) -> (usize, usize) {
        (self.n(), self.n_y)
    }

    pub fn rotate(&self, u: usize, v: usize) -> (usize, usize) {
        (u + v, v + self.n_x - u)
    }

    /// Inverse of [`rotate`](Self::rotate); `None` for midpoints and
    /// out-of-range coordinates.
    pub fn unrotate(&self, x: usize, y: usize) -> Option<(usize, usize)> {
        if !self.is_real(x, y) {
            return None;
        }
        Some(((x + self.n_x - y) / 2, (x + y - self.n_x) / 2))
    }

    /// Inclusive row range at column `x <= n`.
    #[inline]
    pub fn row_range(&self, x: usize) -> (usize, usize) {
        (x.abs_diff(self.n_x), self.n() - x.abs_diff(self.n_y))
    }

    #[inline]
    pub fn is_vertex(&self, x: usize, y: usize) -> bool {
        if x > self.n() {
            return false;
        }
        let (lo, hi) = self.row_range(x);
        lo <= y && y <= hi
    }

    #[inline]
    pub fn is_real(&self, x: usize, y: usize) -> bool {
        self.is_vertex(x, y) && (x + y + self.n_x) % 2 == 0
    }

    #[inline]
    fn parity_real(&self, x: usize, y: usize) -> bool {
        (x + y + self.n_x) % 2 == 0
    }

    /// Signed step weight used internally: ED weights as-is, LCS weights
    /// negated so both objectives minimise.
    #[inline]
    fn indel(&self) -> i32 {
        match self.kind {
            Kind::Ed => 1,
            Kind::Lcs => 0,
        }
    }

    /// Signed weight of the second half of the shortcut leaving real `(x, y)`.
    #[inline]
    fn shortcut(&self, x: usize, y: usize) -> i32 {
        let u = (x + self.n_x - y) / 2;
        let v = (x + y - self.n_x) / 2;
        let m = self.pair.matches(u, v);
        match self.kind {
            Kind::Ed => i32::from(!m),
            Kind::Lcs => -i32::from(m),
        }
    }

    #[inline]
    fn natural(&self, w: i32) -> u64 {
        match self.kind {
            Kind::Ed => w as u64,
            Kind::Lcs => (-w) as u64,
        }
    }

    /// Weight of the single edge `(x, y) -> (x + 1, y2)`, if it exists.
    pub fn edge_weight(&self, x: usize, y: usize, y2: usize) -> Option<u64> {
        if !self.is_vertex(x, y) || !self.is_vertex(x + 1, y2) || y.abs_diff(y2) > 1 {
            return None;
        }
        let w = if self.parity_real(x, y) {
            if y2 == y {
                0
            } else {
                self.indel()
            }
        } else if y2 == y {
            self.shortcut(x - 1, y)
        } else {
            return None;
        };
        Some(self.natural(w))
    }

    /// Weights of the edges from vertex `(x, y)` to rows `y - 1, y, y + 1`
    /// of column `x + 1`, ignoring whether those targets exist.
    #[inline]
    pub fn fan(&self, x: usize, y: usize) -> [Option<u64>; 3] {
        debug_assert!(self.is_vertex(x, y));
        if self.parity_real(x, y) {
            let d = Some(self.natural(self.indel()));
            [d, Some(0), d]
        } else {
            [None, Some(self.natural(self.shortcut(x - 1, y))), None]
        }
    }

    pub fn path_weight(&self, path: &GridPath) -> Result<u64, GridError> {
        path.validate()?;
        let mut total = 0;
        for (i, w) in path.rows.windows(2).enumerate() {
            let x = path.l + i;
            total += self.edge_weight(x, w[0], w[1]).ok_or_else(|| {
                GridError::InvalidPath(format!("no edge ({x}, {}) -> ({}, {})", w[0], x + 1, w[1]))
            })?;
        }
        Ok(total)
    }

    /// Column sweep from `(l, y_l)` to column `r`. With a target row the
    /// rows are clipped to the diamond between the endpoints. Returns the
    /// lowest row and signed values at column `r`.
    fn sweep(
        &self,
        l: usize,
        y_l: usize,
        r: usize,
        y_r: Option<usize>,
        mut trace: Option<&mut Trace>,
    ) -> Result<(usize, Vec<i32>), GridError> {
        if !self.is_vertex(l, y_l) {
            return Err(GridError::InvalidVertex(l, y_l));
        }
        if let Some(t) = y_r {
            if r < l || !self.is_vertex(r, t) {
                return Err(GridError::InvalidVertex(r, t));
            }
            if y_l.abs_diff(t) > r - l {
                return Err(GridError::Unreachable);
            }
        }
        let mut lo_prev = y_l;
        let mut prev = vec![0i32];
        let mut cur: Vec<i32> = Vec::new();
        let ind = self.indel();
        for x in l + 1..=r {
            let d = x - l;
            let (gl, gh) = self.row_range(x);
            let mut lo = gl.max(y_l.saturating_sub(d));
            let mut hi = gh.min(y_l + d);
            if let Some(t) = y_r {
                lo = lo.max(t.saturating_sub(r - x));
                hi = hi.min(t + (r - x));
            }
            if lo > hi {
                return Err(GridError::Unreachable);
            }
            cur.clear();
            cur.resize(hi - lo + 1, INF);
            let mut dirs = trace.as_ref().map(|_| vec![0i8; hi - lo + 1]);
            let phi = lo_prev + prev.len();
            let get = |yy: usize| -> i32 {
                if yy >= lo_prev && yy < phi {
                    prev[yy - lo_prev]
                } else {
                    INF
                }
            };
            for y in lo..=hi {
                let (mut best, mut dir) = (INF, 0i8);
                if self.parity_real(x, y) {
                    if y > 0 {
                        let c = get(y - 1);
                        if c < INF && c + ind < best {
                            best = c + ind;
                            dir = 1;
                        }
                    }
                    let c = get(y + 1);
                    if c < INF && c + ind < best {
                        best = c + ind;
                        dir = -1;
                    }
                    let c = get(y);
                    if c < INF {
                        let w = self.shortcut(x - 2, y);
                        if c + w < best {
                            best = c + w;
                            dir = 0;
                        }
                    }
                } else {
                    let c = get(y);
                    if c < INF {
                        best = c;
                        dir = 0;
                    }
                }
                cur[y - lo] = best;
                if let Some(ds) = dirs.as_mut() {
                    ds[y - lo] = dir;
                }
            }
            if let (Some(t), Some(ds)) = (trace.as_mut(), dirs) {
                t.push((lo, ds));
            }
            std::mem::swap(&mut prev, &mut cur);
            lo_prev = lo;
        }
        Ok((lo_prev, prev))
    }

    /// Exact optimum (min for ED, max for LCS) from `(l, y_l)` to `(r, y_r)`.
    pub fn optimal_weight(&self, l: usize, y_l: usize, r: usize, y_r: usize) -> Result<u64, GridError> {
        let (lo, vals) = self.sweep(l, y_l, r, Some(y_r), None)?;
        match vals.get(y_r.wrapping_sub(lo)) {
            Some(&v) if v < INF => Ok(self.natural(v)),
            _ => Err(GridError::Unreachable),
        }
    }

    /// Exact optimum together with a witness path.
    pub fn optimal_subpath(
        &self,
        l: usize,
        y_l: usize,
        r: usize,
        y_r: usize,
    ) -> Result<(u64, GridPath), GridError> {
        let mut trace = Trace::new();
        let (lo, vals) = self.sweep(l, y_l, r, Some(y_r), Some(&mut trace))?;
        let v = match vals.get(y_r.wrapping_sub(lo)) {
            Some(&v) if v < INF => v,
            _ => return Err(GridError::Unreachable),
        };
        let mut rows = vec![0usize; r - l + 1];
        let mut y = y_r;
        rows[r - l] = y;
        for x in (l + 1..=r).rev() {
            let (clo, ds) = &trace[x - l - 1];
            y = (y as isize - ds[y - clo] as isize) as usize;
            rows[x - l - 1] = y;
        }
        debug_assert_eq!(rows[0], y_l);
        let weight = self.natural(v);
        Ok((weight, GridPath { l, rows, weight }))
    }

    /// Optima from `(l, y_l)` to every row of column `r` within reach.
    /// Returns the lowest row of the cone and one entry per row.
    pub fn reachable_weights(
        &self,
        l: usize,
        y_l: usize,
        r: usize,
    ) -> Result<(usize, Vec<Option<u64>>), GridError> {
        let (lo, vals) = self.sweep(l, y_l, r, None, None)?;
        Ok((lo, vals.into_iter().map(|v| (v < INF).then(|| self.natural(v))).collect()))
    }

    /// Optimum over the whole grid.
    pub fn full_optimum(&self) -> u64 {
        let (s, e) = (self.start(), self.end());
        self.optimal_weight(s.0, s.1, e.0, e.1).expect("the corner vertices are always connected")
    }
}
