mod common;

use common::*;
use edlcs_core::baselines::{ed_exact, lcs_exact};
use edlcs_core::grids::{build_rotated_grid, InputPair, Kind};
use edlcs_core::sparse::{make_schedule, round_endpoints, sparsified_optimum, Overrides, SparseOracle};
use proptest::prelude::*;

fn kind(lcs: bool) -> Kind {
    if lcs {
        Kind::Lcs
    } else {
        Kind::Ed
    }
}

/// Pairs with `n_x + n_y` a multiple of 64, the desk `M^S` for `S = 3`.
fn desk_pair() -> impl Strategy<Value = (Vec<u8>, Vec<u8>)> {
    prop_oneof![
        near_pair(64, 12).prop_filter("length", |(x, y)| (x.len() + y.len()) % 64 == 0),
        (word(2, 64), word(2, 64)),
        (word(4, 96), word(4, 160)),
        (word(4, 128), word(4, 128)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn sparsified_optimum_sandwich((x, y) in desk_pair(), lcs in any::<bool>(), seed in any::<u64>()) {
        let p = InputPair::new(x, y);
        let k = kind(lcs);
        let sch = make_schedule(p.n(), k, &Overrides::desk(3), seed).unwrap();
        let mut o = SparseOracle::new(build_rotated_grid(&p, k), &sch);
        let v = sparsified_optimum(&mut o).unwrap().unwrap();
        let budget = (sch.s * p.n() / sch.phi_y) as u64;
        match k {
            Kind::Ed => {
                let e = ed_exact(&p);
                prop_assert!(e <= v && v <= e + budget, "{} not in [{}, {}]", v, e, e + budget);
            }
            Kind::Lcs => {
                let e = lcs_exact(&p);
                prop_assert!(v <= e && v + budget >= e, "{} not in [{}, {}]", v, e.saturating_sub(budget), e);
            }
        }
    }

    #[test]
    fn full_sweep_charges_every_sparse_edge_once((x, y) in desk_pair(), lcs in any::<bool>()) {
        let s = 3;
        let p = InputPair::new(x, y);
        let k = kind(lcs);
        let sch = make_schedule(p.n(), k, &Overrides::desk(s), 1).unwrap();
        let g = build_rotated_grid(&p, k);
        let mut o = SparseOracle::new(g, &sch);
        sparsified_optimum(&mut o).unwrap();
        let first = o.query_count();
        sparsified_optimum(&mut o).unwrap();
        prop_assert_eq!(o.query_count(), first);
        // brute-force edge count over all vertex pairs of consecutive sparse columns
        let b = sch.b_x;
        let mut count = 0u64;
        for x in (0..sch.n).step_by(b) {
            for y in 0..=g.n() {
                if !sch.is_sparse_vertex(&g, x, y) {
                    continue;
                }
                count += (y.saturating_sub(b)..=y + b).filter(|&t| sch.is_sparse_vertex(&g, x + b, t)).count() as u64;
            }
        }
        prop_assert_eq!(first, count);
        prop_assert_eq!(sch.dense_edge_count(&g), count);
        prop_assert_eq!(o.surviving_fraction(), 1.0);
    }

    #[test]
    fn edge_weights_are_window_optima((x, y) in desk_pair(), lcs in any::<bool>(), pick in any::<[prop::sample::Index; 3]>()) {
        let p = InputPair::new(x, y);
        let k = kind(lcs);
        let sch = make_schedule(p.n(), k, &Overrides::desk(3), 0).unwrap();
        let g = build_rotated_grid(&p, k);
        let mut o = SparseOracle::new(g, &sch);
        let b = sch.b_x;
        let xc = pick[0].index(sch.n / b) * b;
        let src: Vec<usize> = sch.sparse_rows(&g, xc).collect();
        let y0 = src[pick[1].index(src.len())];
        let dst: Vec<usize> = sch.sparse_rows(&g, xc + b).filter(|t| t.abs_diff(y0) <= b).collect();
        prop_assume!(!dst.is_empty());
        let y1 = dst[pick[2].index(dst.len())];
        let before = o.query_count();
        let w = o.edge_weight(xc, y0, y1).unwrap();
        prop_assert_eq!(w, g.optimal_weight(xc, y0, xc + b, y1).ok());
        prop_assert_eq!(o.edge_weight(xc, y0, y1).unwrap(), w);
        prop_assert_eq!(o.query_count(), before + 1);
        // substring oracle when both ends are real vertices
        if let (Some((u0, v0)), Some((u1, v1))) = (g.unrotate(xc, y0), g.unrotate(xc + b, y1)) {
            if u0 <= u1 && v0 <= v1 {
                let (sx, sy) = (&p.x[u0..u1], &p.y[v0..v1]);
                prop_assert_eq!(w, Some(if lcs { dp_lcs(sx, sy) } else { dp_ed(sx, sy) }));
            }
        }
    }

    #[test]
    fn endpoint_rounding_bound((x, y) in (word(4, 4..=24), word(4, 4..=24)), lcs in any::<bool>(), pick in any::<[prop::sample::Index; 5]>()) {
        let p = InputPair::new(x, y);
        let g = build_rotated_grid(&p, kind(lcs));
        let n = g.n();
        let l = pick[0].index(n - 2);
        let r = l + 2 + pick[1].index(n - l - 1);
        let rows = |c: usize| { let (lo, hi) = g.row_range(c); (lo..=hi).collect::<Vec<_>>() };
        let (ls, rs) = (rows(l), rows(r));
        // endpoints on real vertices
        let ls: Vec<usize> = ls.into_iter().filter(|&y| g.is_real(l, y)).collect();
        let y_l = ls[pick[2].index(ls.len())];
        let reach: Vec<usize> = rs.iter().copied().filter(|&t| t.abs_diff(y_l) <= r - l && g.is_real(r, t)).collect();
        let y_r = reach[pick[3].index(reach.len())];
        let (w, path) = g.optimal_subpath(l, y_l, r, y_r).unwrap();
        // same-parity targets that keep the span bound
        let targets: Vec<(usize, usize)> = ls.iter().filter(|a| a.abs_diff(y_l) % 2 == 0)
            .flat_map(|&a| rs.iter().filter(move |b| b.abs_diff(y_r) % 2 == 0 && a.abs_diff(**b) <= r - l).map(move |&b| (a, b)))
            .collect();
        let (a, b) = targets[pick[4].index(targets.len())];
        let out = round_endpoints(&g, &path, a, b).unwrap();
        prop_assert!(out.validate().is_ok());
        prop_assert_eq!((out.l, out.r(), out.row(l), out.row(r)), (l, r, a, b));
        prop_assert_eq!(g.path_weight(&out).unwrap(), out.weight);
        prop_assert!(out.weight.abs_diff(w) as usize <= a.abs_diff(y_l) + b.abs_diff(y_r));
        if (a, b) == (y_l, y_r) {
            prop_assert_eq!(&out.rows, &path.rows);
        }
    }

    #[test]
    fn schedules_are_deterministic(seed in any::<u64>(), lcs in any::<bool>(), l in 0usize..16) {
        let k = kind(lcs);
        let a = make_schedule(4096, k, &Overrides::desk(6), seed).unwrap();
        let b = make_schedule(4096, k, &Overrides::desk(6), seed).unwrap();
        prop_assert_eq!(&a, &b);
        for s in 1..=a.s {
            let w = a.width(s);
            let lo = (l * w) % a.n;
            prop_assert_eq!(a.eta(lo, lo + w), b.eta(lo, lo + w));
            prop_assert_eq!(a.eta(lo, lo + w).count_ones() as usize, a.m / 2);
        }
        if lcs {
            prop_assert!(a.active_scales.iter().all(|s| s % 3 == 0));
        }
    }
}

#[test]
fn desk_widths() {
    let sch = make_schedule(4096, Kind::Ed, &Overrides { m: Some(4), s: Some(3), ..Default::default() }, 0).unwrap();
    assert_eq!(sch.widths, vec![64, 256, 1024, 4096]);
    assert_eq!(sch.b_x, 64);
}
