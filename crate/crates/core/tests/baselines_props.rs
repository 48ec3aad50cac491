mod common;

use common::*;
use edlcs_core::baselines::{BandDoubling, ConstApprox, ed_approx_const, ed_bounded, ed_exact, lcs_bounded, lcs_exact, pad_inputs};
use edlcs_core::grids::InputPair;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bounded_ed_agrees_with_exact((x, y) in prop_oneof![near_pair(120, 20), (word(4, 0..=128), word(4, 0..=128))], k in 0u64..80) {
        let p = InputPair::new(x, y);
        let e = ed_exact(&p);
        let b = ed_bounded(&p, k);
        prop_assert_eq!(b.within_bound, e <= k);
        prop_assert_eq!(b.value, (e <= k).then_some(e));
    }

    #[test]
    fn bounded_lcs_agrees_with_exact((x, y) in prop_oneof![near_pair(120, 20), (word(2, 0..=128), word(2, 0..=128))], k in 0u64..140) {
        let p = InputPair::new(x, y);
        let e = lcs_exact(&p);
        let b = lcs_bounded(&p, k);
        prop_assert_eq!(b.within_bound, e <= k);
        prop_assert_eq!(b.value, (e <= k).then_some(e));
    }

    #[test]
    fn exact_values_are_symmetric_and_match_dp(x in word(4, 0..=64), y in word(4, 0..=64)) {
        let p = InputPair::new(x.clone(), y.clone());
        let q = p.swapped();
        prop_assert_eq!(ed_exact(&p), ed_exact(&q));
        prop_assert_eq!(lcs_exact(&p), lcs_exact(&q));
        prop_assert_eq!(ed_exact(&p), dp_ed(&x, &y));
        prop_assert_eq!(lcs_exact(&p), dp_lcs(&x, &y));
    }

    #[test]
    fn constant_factor_is_an_upper_bound(x in word(4, 0..=64), y in word(4, 0..=64)) {
        let p = InputPair::new(x, y);
        let e = ed_exact(&p);
        let a = ed_approx_const(&p);
        prop_assert!(a >= e);
        prop_assert!(a <= 4 * e);
        let band = BandDoubling.approx(&p);
        prop_assert!(e <= band && band <= 2 * e);
    }

    #[test]
    fn padding_keeps_real_prefix(x in word(4, 1..=100), y in word(4, 1..=100), c in 0.1f64..1.0) {
        let p = InputPair::new(x.clone(), y.clone());
        let q = pad_inputs(&p, c);
        prop_assert_eq!(&q.x[..x.len()], &x[..]);
        prop_assert_eq!(&q.y[..y.len()], &y[..]);
        prop_assert_eq!(q.real_lens(), (x.len(), y.len()));
    }
}
