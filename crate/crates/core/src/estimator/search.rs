//! From window estimates to an explicit alignment.
//!
//! Columns are cut every `mu = 2^floor(log2(n) / 2)`. On cut columns the
//! path may only use rows `y` with `g | y - o`, where `g = max(1, mu / gamma)`
//! and `o` is the row parity of real vertices on that column. A DP over
//! these waypoints, weighted by window estimates, fixes the cut rows; each
//! window is then solved exactly and the pieces are concatenated.

use serde::{Deserialize, Serialize};

use super::{approximate, EstimatorConfig};
use crate::grids::{build_rotated_grid, GridPath, InputPair, Kind, RotatedGrid};
use crate::sparse::SparseError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", content = "byte", rename_all = "snake_case")]
pub enum EditOp {
    Keep,
    Substitute(u8),
    Insert(u8),
    Delete,
}

/// How window optima are estimated during the waypoint DP.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowBackend {
    #[default]
    Exact,
    /// The full estimator on each window's substrings.
    Estimator,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Rounding parameter; `None` means `2^floor(sqrt(log2 n))`.
    pub gamma: Option<usize>,
    pub backend: WindowBackend,
    pub estimator: EstimatorConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub mode: Kind,
    pub cost: u64,
    /// ED: operations turning X into Y.
    pub script: Option<Vec<EditOp>>,
    /// LCS: matched index pairs `(i, j)` with `X[i] == Y[j]`.
    pub witness: Option<Vec<(usize, usize)>>,
    pub path: GridPath,
}

pub fn window_spacing(n: usize) -> usize {
    if n < 2 {
        return 1;
    }
    1usize << ((n as f64).log2() / 2.0).floor() as u32
}

pub fn default_gamma(n: usize) -> usize {
    let lg = (n.max(2) as f64).log2();
    1usize << lg.sqrt().floor() as u32
}

fn cut_rows(grid: &RotatedGrid<'_>, x: usize, g: usize) -> Vec<usize> {
    if x == 0 {
        return vec![grid.n_x()];
    }
    if x == grid.n() {
        return vec![grid.n_y()];
    }
    // offset by the parity of real vertices so that waypoints are never midpoints
    let o = (x + grid.n_x()) % 2;
    let (lo, hi) = grid.row_range(x);
    let first = lo.saturating_sub(o).div_ceil(g) * g + o;
    (first..=hi).step_by(g).collect()
}

fn window_estimates(
    grid: &RotatedGrid<'_>,
    cfg: &SearchConfig,
    x0: usize,
    y: usize,
    x1: usize,
    targets: &[usize],
) -> Result<Vec<Option<f64>>, SparseError> {
    let (lo, vals) = grid.reachable_weights(x0, y, x1)?;
    let exact = |t: usize| -> Option<f64> {
        if t < lo {
            return None;
        }
        vals.get(t - lo).copied().flatten().map(|v| v as f64)
    };
    if cfg.backend == WindowBackend::Exact {
        return Ok(targets.iter().map(|&t| exact(t)).collect());
    }
    let mut out = Vec::with_capacity(targets.len());
    for &t in targets {
        let e = exact(t);
        match (e, grid.unrotate(x0, y), grid.unrotate(x1, t)) {
            (Some(_), Some((u0, v0)), Some((u1, v1))) => {
                let sub = grid.pair().slice(u0, u1, v0, v1);
                out.push(Some(approximate(&sub, grid.kind(), &cfg.estimator)?.estimate));
            }
            _ => out.push(e),
        }
    }
    Ok(out)
}

/// Finds an alignment whose cost is optimal among paths through the
/// estimated-best waypoint sequence.
pub fn estimate_to_search(pair: &InputPair, mode: Kind, cfg: &SearchConfig) -> Result<SearchResult, SparseError> {
    let grid = build_rotated_grid(pair, mode);
    let n = grid.n();
    let mu = window_spacing(n);
    let gamma = cfg.gamma.unwrap_or_else(|| default_gamma(n)).max(1);
    let g = (mu / gamma).max(1);
    let mut cuts: Vec<usize> = (0..n).step_by(mu).collect();
    cuts.push(n);
    let better = |a: f64, b: f64| match mode {
        Kind::Ed => a < b,
        Kind::Lcs => a > b,
    };

    // layers[k] = (rows, best value, parent index into layer k-1)
    let mut layers: Vec<(Vec<usize>, Vec<Option<f64>>, Vec<usize>)> =
        vec![(vec![grid.n_x()], vec![Some(0.0)], vec![0])];
    for win in cuts.windows(2) {
        let (x0, x1) = (win[0], win[1]);
        let targets = cut_rows(&grid, x1, g);
        let mut best: Vec<Option<f64>> = vec![None; targets.len()];
        let mut parent = vec![0usize; targets.len()];
        let (rows, vals, _) = layers.last().unwrap();
        for (pi, (&y, &v)) in rows.iter().zip(vals).enumerate() {
            let Some(v) = v else { continue };
            let span = x1 - x0;
            let a = targets.partition_point(|&t| t + span < y);
            let b = targets.partition_point(|&t| t <= y + span);
            if a >= b {
                continue;
            }
            let est = window_estimates(&grid, cfg, x0, y, x1, &targets[a..b])?;
            for (j, e) in (a..b).zip(est) {
                if let Some(e) = e {
                    let c = v + e;
                    if best[j].map_or(true, |old| better(c, old)) {
                        best[j] = Some(c);
                        parent[j] = pi;
                    }
                }
            }
        }
        layers.push((targets, best, parent));
    }

    // waypoint rows, last to first
    let mut idx = 0usize;
    let mut way = Vec::with_capacity(cuts.len());
    for k in (0..layers.len()).rev() {
        let (rows, vals, parent) = &layers[k];
        if k == layers.len() - 1 {
            idx = rows.iter().position(|&r| r == grid.n_y()).unwrap_or(0);
            if vals[idx].is_none() {
                return Err(SparseError::Grid(crate::grids::GridError::Unreachable));
            }
        }
        way.push(rows[idx]);
        idx = parent[idx];
    }
    way.reverse();

    let mut rows = vec![grid.n_x()];
    for (k, win) in cuts.windows(2).enumerate() {
        let (_, piece) = grid.optimal_subpath(win[0], way[k], win[1], way[k + 1])?;
        rows.extend_from_slice(&piece.rows[1..]);
    }
    let mut path = GridPath { l: 0, rows, weight: 0 };
    path.weight = grid.path_weight(&path)?;

    let (script, witness) = alignment(&grid, &path);
    Ok(SearchResult {
        mode,
        cost: path.weight,
        script: (mode == Kind::Ed).then_some(script),
        witness: (mode == Kind::Lcs).then_some(witness),
        path,
    })
}

/// Reads the edit script and the matched pairs off a full source-sink path.
fn alignment(grid: &RotatedGrid<'_>, path: &GridPath) -> (Vec<EditOp>, Vec<(usize, usize)>) {
    let pair = grid.pair();
    let mut script = Vec::new();
    let mut witness = Vec::new();
    let mut x = path.l;
    while x < path.r() {
        let (y, y2) = (path.row(x), path.row(x + 1));
        let (u, v) = grid.unrotate(x, y).expect("alignment walks real vertices");
        if y2 == y + 1 {
            script.push(EditOp::Insert(pair.y[v]));
            x += 1;
        } else if y2 + 1 == y {
            script.push(EditOp::Delete);
            x += 1;
        } else {
            if pair.matches(u, v) {
                script.push(EditOp::Keep);
                witness.push((u, v));
            } else {
                script.push(EditOp::Substitute(pair.y[v]));
            }
            x += 2;
        }
    }
    (script, witness)
}

/// Applies a script to `x`; `None` if it runs past the input.
pub fn replay(x: &[u8], script: &[EditOp]) -> Option<Vec<u8>> {
    let mut out = Vec::with_capacity(x.len());
    let mut i = 0usize;
    for op in script {
        match *op {
            EditOp::Keep => {
                out.push(*x.get(i)?);
                i += 1;
            }
            EditOp::Substitute(b) => {
                x.get(i)?;
                out.push(b);
                i += 1;
            }
            EditOp::Insert(b) => out.push(b),
            EditOp::Delete => {
                x.get(i)?;
                i += 1;
            }
        }
    }
    (i == x.len()).then_some(out)
}

pub fn script_cost(script: &[EditOp]) -> u64 {
    script.iter().filter(|op| **op != EditOp::Keep).count() as u64
}

/// Strictly increasing index pairs over equal bytes.
pub fn is_common_subsequence(x: &[u8], y: &[u8], witness: &[(usize, usize)]) -> bool {
    witness.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1)
        && witness.iter().all(|&(i, j)| i < x.len() && j < y.len() && x[i] == y[j])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_strings() {
        let p = InputPair::new("abracadabra", "abracadabra");
        let r = estimate_to_search(&p, Kind::Ed, &SearchConfig::default()).unwrap();
        assert_eq!(r.cost, 0);
        assert!(r.script.unwrap().iter().all(|op| *op == EditOp::Keep));
        let r = estimate_to_search(&p, Kind::Lcs, &SearchConfig::default()).unwrap();
        assert_eq!(r.cost, 11);
        assert_eq!(r.witness.unwrap(), (0..11).map(|i| (i, i)).collect::<Vec<_>>());
    }

    #[test]
    fn kitten_script_replays() {
        let p = InputPair::new("kitten", "sitting");
        let r = estimate_to_search(&p, Kind::Ed, &SearchConfig::default()).unwrap();
        let script = r.script.unwrap();
        assert_eq!(replay(b"kitten", &script).unwrap(), b"sitting");
        assert_eq!(script_cost(&script), r.cost);
        assert_eq!(r.cost, 3);
    }

    #[test]
    fn empty_inputs() {
        let p = InputPair::new("", "");
        let r = estimate_to_search(&p, Kind::Ed, &SearchConfig::default()).unwrap();
        assert_eq!(r.cost, 0);
        let p = InputPair::new("", "ab");
        let r = estimate_to_search(&p, Kind::Ed, &SearchConfig::default()).unwrap();
        assert_eq!(replay(b"", r.script.as_ref().unwrap()).unwrap(), b"ab");
    }
}
