use proptest::prelude::*;
use spbm::coverage::{
    count_witnesses, coverage_threshold, is_covered, read_witness_lines, witness_containment_check, write_witness_lines,
    FastCoverage,
};
use spbm::coverage::Decision;
use spbm::geom::{h_indicator, GeomTolerance, MarkedPoint};
use spbm::model::MarkedPointSet;
use spbm::region::Aabb;

fn planar_points() -> impl Strategy<Value = Vec<MarkedPoint<2>>> {
    prop::collection::vec(((-0.2f64..1.2, -0.2f64..1.2), 0.5f64..1.5), 1..30)
        .prop_map(|v| v.into_iter().map(|((x, y), a)| MarkedPoint::new([x, y], a)).collect())
}

fn set(points: Vec<MarkedPoint<2>>) -> MarkedPointSet<2> {
    MarkedPointSet::from_points(points).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coverage_grows_with_radius(pts in planar_points(), r in 0.05f64..0.5, k in 1usize..3) {
        let p = set(pts);
        let a = Aabb::unit();
        let v = is_covered(&p, r, &a, k).unwrap();
        if v.covered {
            prop_assert!(is_covered(&p, 1.1 * r, &a, k).unwrap().covered);
        }
    }

    #[test]
    fn coverage_shrinks_with_order(pts in planar_points(), r in 0.05f64..0.5, k in 2usize..4) {
        let p = set(pts);
        let a = Aabb::unit();
        if is_covered(&p, r, &a, k).unwrap().covered {
            prop_assert!(is_covered(&p, r, &a, k - 1).unwrap().covered);
        }
    }

    #[test]
    fn adding_balls_keeps_coverage(pts in planar_points(), extra in planar_points(), r in 0.05f64..0.5, k in 1usize..3) {
        let a = Aabb::unit();
        let p = set(pts.clone());
        if is_covered(&p, r, &a, k).unwrap().covered {
            let mut all = pts;
            all.extend(extra);
            prop_assert!(is_covered(&set(all), r, &a, k).unwrap().covered);
        }
    }

    #[test]
    fn witness_counts_add_over_split_boxes(pts in planar_points(), r in 0.05f64..0.5, k in 1usize..3, cut in 0.1f64..0.9) {
        let p = set(pts);
        let whole = Aabb::new([-0.5, -0.5], [1.5, 1.5]).unwrap();
        let left = Aabb::new([-0.5, -0.5], [cut, 1.5]).unwrap();
        let right = Aabb::new([cut, -0.5], [1.5, 1.5]).unwrap();
        let n = |b: &Aabb<2>| count_witnesses(&p, r, b, k).unwrap().count;
        prop_assert_eq!(n(&whole), n(&left) + n(&right));
    }

    #[test]
    fn threshold_brackets_coverage(pts in planar_points(), k in 1usize..3) {
        let p = set(pts);
        prop_assume!(p.len() >= k);
        let a = Aabb::unit();
        let tol = 1e-7;
        let r = coverage_threshold(&p, &a, k, tol).unwrap();
        prop_assert!(is_covered(&p, r * (1.0 + tol), &a, k).unwrap().covered);
        let below = is_covered(&p, r * (1.0 - tol), &a, k).unwrap();
        prop_assert!(!below.covered || !below.reliable);
    }

    #[test]
    fn cell_filter_matches_full_check(pts in planar_points(), r in 0.05f64..0.5, k in 1usize..3) {
        let p = set(pts);
        let a = Aabb::unit();
        let full = is_covered(&p, r, &a, k).unwrap();
        let fast = FastCoverage::new(p.points(), &a, r).unwrap();
        if full.reliable {
            prop_assert_eq!(fast.decide(r, k) == Decision::Covered, full.covered);
        }
        let (count, _) = fast.count_witnesses(r, k);
        prop_assert_eq!(count, count_witnesses(&p, r, &a, k).unwrap().count);
    }

    #[test]
    fn uncovered_regions_have_witnesses(pts in planar_points(), r in 0.05f64..0.5, k in 1usize..3) {
        prop_assert!(witness_containment_check(&set(pts), r, &Aabb::unit(), k).unwrap());
    }

    #[test]
    fn indicator_is_invariant(
        c in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 3),
        a in prop::collection::vec(0.8f64..1.6, 3),
        shift in (-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0),
        angle in 0.0f64..std::f64::consts::TAU,
        r in 0.1f64..3.0,
    ) {
        let tol = GeomTolerance::default();
        let tuple: Vec<MarkedPoint<3>> = c.iter().zip(&a).map(|(&(x, y, z), &m)| MarkedPoint::new([x, y, z], m)).collect();
        let h = h_indicator(&tuple, 1.0, tol).unwrap();
        prop_assume!(h.as_bool().is_some());
        let moved: Vec<MarkedPoint<3>> = tuple
            .iter()
            .map(|p| {
                let [x, y, z] = p.center.0;
                // rotation about the vertical axis, then a translation
                let (s, co) = angle.sin_cos();
                MarkedPoint::new([co * x - s * y + shift.0, s * x + co * y + shift.1, z + shift.2], p.mark)
            })
            .collect();
        let hm = h_indicator(&moved, 1.0, tol).unwrap();
        if hm.as_bool().is_some() {
            prop_assert_eq!(h, hm);
        }
        // radius scale r on centers r x equals scale 1 on centers x
        let scaled: Vec<MarkedPoint<3>> = tuple
            .iter()
            .map(|p| MarkedPoint::new(p.center.0.map(|v| v * r), p.mark))
            .collect();
        let hs = h_indicator(&scaled, r, tol).unwrap();
        if hs.as_bool().is_some() {
            prop_assert_eq!(h, hs);
        }
    }
}

#[test]
fn witness_lines_round_trip() {
    let p = set(vec![MarkedPoint::new([0.25, 0.5], 1.0), MarkedPoint::new([0.75, 0.5], 1.0)]);
    let v = is_covered(&p, 0.5, &Aabb::unit(), 1).unwrap();
    assert!(!v.witnesses.is_empty());
    let mut buf = Vec::new();
    write_witness_lines(&mut buf, &v.witnesses).unwrap();
    let back = read_witness_lines::<2, _>(buf.as_slice()).unwrap();
    assert_eq!(back, v.witnesses);
}

#[test]
fn cube_coverage_grows_with_radius() {
    use spbm::model::{sample_process, RadiusLaw, RngStream};
    let a = Aabb::<3>::unit();
    let law = RadiusLaw::UniformInterval(0.5, 1.5);
    for seed in 0..6 {
        let p = sample_process(&a, 300.0, &law, 0.3, RngStream::new(seed, 0), None).unwrap();
        let r = coverage_threshold(&p, &a, 1, 1e-6).unwrap();
        assert!(is_covered(&p, r * 1.1, &a, 1).unwrap().covered);
        assert!(!is_covered(&p, r * 0.9, &a, 1).unwrap().covered);
    }
}
