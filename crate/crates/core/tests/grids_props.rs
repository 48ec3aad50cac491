mod common;

use common::*;
use edlcs_core::grids::{build_rotated_grid, GridPath, InputPair, Kind};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn grid_optimum_matches_dp((k, x, y) in alphabet().prop_flat_map(|k| (Just(k), word(k, 0..=32), word(k, 0..=32)))) {
        let _ = k;
        let p = InputPair::new(x.clone(), y.clone());
        prop_assert_eq!(build_rotated_grid(&p, Kind::Ed).full_optimum(), dp_ed(&x, &y));
        prop_assert_eq!(build_rotated_grid(&p, Kind::Lcs).full_optimum(), dp_lcs(&x, &y));
    }

    #[test]
    fn dp_matches_exhaustive_recursion(x in word(3, 0..=6), y in word(3, 0..=6)) {
        prop_assert_eq!(dp_ed(&x, &y), brute_ed(&x, &y));
        prop_assert_eq!(dp_lcs(&x, &y), brute_lcs(&x, &y));
    }

    #[test]
    fn rotation_round_trips(x in word(2, 0..=12), y in word(2, 0..=12)) {
        let p = InputPair::new(x.clone(), y.clone());
        let g = build_rotated_grid(&p, Kind::Ed);
        let mut seen = std::collections::HashSet::new();
        for u in 0..=x.len() {
            for v in 0..=y.len() {
                let (a, b) = g.rotate(u, v);
                prop_assert!(g.is_real(a, b));
                prop_assert_eq!(g.unrotate(a, b), Some((u, v)));
                prop_assert!(seen.insert((a, b)));
            }
        }
        // every real vertex is the image of some cell
        for a in 0..=g.n() {
            let (lo, hi) = g.row_range(a);
            for b in lo..=hi {
                prop_assert_eq!(g.is_real(a, b), seen.contains(&(a, b)));
            }
        }
    }

    #[test]
    fn subpaths_are_valid_and_rescore((x, y) in (word(4, 1..=20), word(4, 1..=20)), pick in any::<[prop::sample::Index; 3]>(), lcs in any::<bool>()) {
        let p = InputPair::new(x, y);
        let kind = if lcs { Kind::Lcs } else { Kind::Ed };
        let g = build_rotated_grid(&p, kind);
        let n = g.n();
        let l = pick[0].index(n);
        let r = l + 1 + pick[1].index(n - l);
        let (lo, hi) = g.row_range(l);
        let y_l = lo + pick[2].index(hi - lo + 1);
        let (tlo, thi) = g.row_range(r);
        for y_r in tlo..=thi {
            match g.optimal_subpath(l, y_l, r, y_r) {
                Ok((w, path)) => {
                    prop_assert!(path.validate().is_ok());
                    prop_assert_eq!((path.l, path.r(), path.row(l), path.row(r)), (l, r, y_l, y_r));
                    for i in l..=r {
                        for j in i..=r {
                            prop_assert!(path.row(i).abs_diff(path.row(j)) <= j - i);
                        }
                    }
                    prop_assert_eq!(g.path_weight(&path).unwrap(), w);
                    prop_assert_eq!(g.optimal_weight(l, y_l, r, y_r).unwrap(), w);
                }
                Err(_) => prop_assert!(y_l.abs_diff(y_r) > r - l || g.optimal_weight(l, y_l, r, y_r).is_err()),
            }
        }
    }

    #[test]
    fn window_optimum_is_substring_distance((x, y) in (word(4, 1..=16), word(4, 1..=16)), a in any::<[prop::sample::Index; 4]>()) {
        // real endpoints (u0, v0) <= (u1, v1) bound a substring pair
        let (u0, u1) = { let s = a[0].index(x.len() + 1); (s, s + a[1].index(x.len() + 1 - s)) };
        let (v0, v1) = { let s = a[2].index(y.len() + 1); (s, s + a[3].index(y.len() + 1 - s)) };
        let p = InputPair::new(x.clone(), y.clone());
        let g = build_rotated_grid(&p, Kind::Ed);
        let (l, yl) = g.rotate(u0, v0);
        let (r, yr) = g.rotate(u1, v1);
        prop_assert_eq!(g.optimal_weight(l, yl, r, yr).unwrap(), dp_ed(&x[u0..u1], &y[v0..v1]));
        let g = build_rotated_grid(&p, Kind::Lcs);
        prop_assert_eq!(g.optimal_weight(l, yl, r, yr).unwrap(), dp_lcs(&x[u0..u1], &y[v0..v1]));
    }
}

#[test]
fn invalid_steps_are_rejected() {
    let p = InputPair::new(b"ab".to_vec(), b"ab".to_vec());
    let g = build_rotated_grid(&p, Kind::Ed);
    let bad = GridPath { l: 0, rows: vec![2, 4, 2, 2, 2], weight: 0 };
    assert!(bad.validate().is_err());
    assert!(g.path_weight(&bad).is_err());
    let diag = GridPath { l: 0, rows: vec![2; 5], weight: 0 };
    assert_eq!(g.path_weight(&diag).unwrap(), 0);
}
