use proptest::prelude::*;

use hmax::analysis::{level_set_volume, ExponentPair};
use hmax::covering::{cf_select, est_ratios, verify_selection};
use hmax::heisenberg::{group_inv, group_mul, shear_field, GroupParams, LatticePoint};
use hmax::lattice::{build_prefix_sum, overlap_volume, union_volume, Rect, ScalarField};
use hmax::maximal::{heisenberg_maximal, maximal_exact_at, maximal_fast, sandwich_constant, Alpha, Mode};

fn point(n: usize) -> impl Strategy<Value = LatticePoint> {
    let c = -1_000_000i64..1_000_000;
    (prop::collection::vec(c.clone(), n), prop::collection::vec(c.clone(), n), c)
        .prop_map(|(u, v, t)| LatticePoint::new(u, v, t).unwrap())
}

fn small_field() -> impl Strategy<Value = ScalarField> {
    (1i64..5, 1i64..5, 1i64..5, -2i64..2).prop_flat_map(|(a, b, c, o)| {
        let w = Rect::new(vec![o, 0, -o], vec![o + a, b, c - o]).unwrap();
        let n = (a * b * c) as usize;
        prop::collection::vec(prop_oneof![Just(0.0), -4.0f64..4.0], n)
            .prop_map(move |v| ScalarField::new(w.clone(), v).unwrap())
    })
}

fn rect3(side: i64) -> impl Strategy<Value = Rect> {
    prop::collection::vec((0..side, 1..side), 3).prop_map(move |s| {
        let lo: Vec<i64> = s.iter().map(|&(a, _)| a).collect();
        let hi: Vec<i64> = s.iter().map(|&(a, l)| (a + l).min(side).max(a + 1)).collect();
        Rect::new(lo, hi).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_law_axioms(a in point(2), b in point(2), c in point(2), mu in -3i64..4) {
        let p = GroupParams::new(2, mu).unwrap();
        let ab_c = group_mul(&group_mul(&a, &b, p).unwrap(), &c, p).unwrap();
        let a_bc = group_mul(&a, &group_mul(&b, &c, p).unwrap(), p).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        prop_assert_eq!(group_mul(&a, &group_inv(&a), p).unwrap(), LatticePoint::identity(2));
    }

    #[test]
    fn shear_conserves_mass(f in small_field(), u in -4i64..4, v in -4i64..4, mu in -2i64..3) {
        let g = shear_field(&f, &[u], &[v], GroupParams::new(1, mu).unwrap()).unwrap();
        prop_assert!((g.sum_abs() - f.sum_abs()).abs() <= 1e-12 * f.sum_abs().max(1.0));
    }

    #[test]
    fn box_sums_match_cell_sums(f in small_field(), r in rect3(6)) {
        let table = build_prefix_sum(&f, false);
        let naive: f64 = r.cells().map(|p| f.get(&p)).sum();
        prop_assert!((table.rect_sum(&r) - naive).abs() <= 1e-12 * (1.0 + naive.abs()));
    }

    #[test]
    fn union_volume_matches_marking(rects in prop::collection::vec(rect3(8), 1..8)) {
        let w = Rect::cube(3, 0, 8).unwrap();
        let dense = w.cells().filter(|p| rects.iter().any(|r| r.contains(p))).count() as u128;
        prop_assert_eq!(union_volume(&rects).unwrap(), dense);
        let first = &rects[0];
        let inside = first.cells().filter(|p| rects[1..].iter().any(|r| r.contains(p))).count() as u128;
        prop_assert_eq!(overlap_volume(first, &rects[1..]), inside);
    }

    #[test]
    fn maximal_is_homogeneous_monotone_and_dominates(
        f in small_field(), c in -3.0f64..3.0, a in 0.0f64..0.95, mu in -2i64..3, exact in any::<bool>()
    ) {
        let p = GroupParams::new(1, mu).unwrap();
        let alpha = Alpha::new(a).unwrap();
        let mode = if exact { Mode::Exact } else { Mode::Dyadic };
        let q = f.window().dilate(2);
        let m = heisenberg_maximal(&f, alpha, p, &q, mode).unwrap();
        let mc = heisenberg_maximal(&f.scaled(c), alpha, p, &q, mode).unwrap();
        let bigger = ScalarField::from_fn(f.window().clone(), |x| 2.0 * f.get(x).abs() + 0.5).unwrap();
        let mb = heisenberg_maximal(&bigger, alpha, p, &q, mode).unwrap();
        for ((x, y), z) in m.values().iter().zip(mc.values()).zip(mb.values()) {
            prop_assert!((c.abs() * x - y).abs() <= 1e-12 * y.abs().max(1e-300));
            prop_assert!(*x <= z * (1.0 + 1e-12));
            prop_assert!(*x >= 0.0);
        }
        for x in f.window().cells() {
            prop_assert!(m.field.get(&x) >= f.get(&x).abs() * (1.0 - 1e-12));
        }
    }

    #[test]
    fn sandwich_holds(f in small_field(), a in 0.0f64..0.95) {
        let alpha = Alpha::new(a).unwrap();
        let q = f.window().dilate(2);
        let fast = maximal_fast(&f, alpha, &q).unwrap();
        let c = sandwich_constant(3, alpha);
        for x in q.cells().step_by(7) {
            let e = maximal_exact_at(&f, alpha, &x);
            let lo = fast.field.get(&x);
            prop_assert!(lo <= e * (1.0 + 1e-12) && e <= c * lo * (1.0 + 1e-12));
        }
    }

    #[test]
    fn selection_invariants_and_prefix_stability(rects in prop::collection::vec(rect3(12), 1..24), cut in 1usize..24) {
        let s = cf_select(&rects).unwrap();
        prop_assert!(verify_selection(&rects, &s).unwrap().all_ok());
        let e = est_ratios(&rects, &s, &[1.5, 3.0]).unwrap();
        prop_assert!(e.est1_ratio >= 1.0);
        prop_assert!(e.est2_ratios.iter().all(|(_, r)| *r >= 1.0 - 1e-15));
        let cut = cut.min(rects.len());
        let head = cf_select(&rects[..cut]).unwrap();
        prop_assert_eq!(head.audit(), &s.audit()[..cut]);
    }

    #[test]
    fn level_sets_shrink(f in small_field(), l1 in 0.01f64..3.0, l2 in 0.01f64..3.0) {
        prop_assume!(!f.is_zero());
        let m = heisenberg_maximal(&f, Alpha::ZERO, GroupParams::new(1, 1).unwrap(), f.window(), Mode::Exact).unwrap();
        let (lo, hi) = (l1.min(l2), l1.max(l2));
        prop_assert!(level_set_volume(&m, hi).unwrap().volume <= level_set_volume(&m, lo).unwrap().volume);
    }

    #[test]
    fn exponent_identity(p in 1.01f64..6.0, extra in 0.0f64..6.0) {
        let e = ExponentPair::new(p, p + extra).unwrap();
        prop_assert!((1.0 - e.alpha().value() - (p - 1.0) / p - 1.0 / e.q()).abs() <= 1e-15);
    }
}
