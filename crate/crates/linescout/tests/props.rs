//! Property tests for the version-space geometry against independent
//! oracles and invariants.

mod common;

use proptest::prelude::*;

use linescout::geometry::{
    certainty_label, closest_opposite_pairs, feasible_polygon, intercept_interval, is_separable,
    slope_set, AngleSet, LabeledPoint, ParamBox,
};
use linescout::oracle;

fn labeled_points(max: usize) -> impl Strategy<Value = Vec<LabeledPoint>> {
    prop::collection::vec((-9.0f64..9.0, -9.0f64..9.0, prop::bool::ANY), 0..=max).prop_map(|v| {
        v.into_iter()
            .map(|(x, z, pos)| LabeledPoint::new(x, z, if pos { 1 } else { -1 }).unwrap())
            .collect()
    })
}

fn wide_box() -> ParamBox {
    ParamBox::new(-1.2, 1.2, -10.0, 10.0).unwrap()
}

#[test]
fn anchor_fixture_projection_matches_grid_oracle() {
    // The classic four-anchor fixture over the default parameter box: both
    // projections agree with the sweep oracle at its resolution.
    let pts = [
        LabeledPoint::new(2.0, 2.0, -1).unwrap(),
        LabeledPoint::new(2.0, 10.0, 1).unwrap(),
        LabeledPoint::new(18.0, 16.0, 1).unwrap(),
        LabeledPoint::new(18.0, 4.0, -1).unwrap(),
    ];
    let poly = feasible_polygon(&pts, &wide_box()).unwrap();
    let theta_step = 0.25f64.to_radians();
    let c_step = 0.05;
    let gb = oracle::grid_project(&pts, -1.2, 1.2, -10.0, 10.0, theta_step, c_step).unwrap();
    let hull = slope_set(&poly).hull().unwrap();
    let ic = intercept_interval(&poly).unwrap();
    assert!((hull.lo - gb.theta_lo).abs() <= theta_step + 1e-9);
    assert!((hull.hi - gb.theta_hi).abs() <= theta_step + 1e-9);
    assert!((ic.lo - gb.c_lo).abs() <= c_step + 1e-9);
    assert!((ic.hi - gb.c_hi).abs() <= c_step + 1e-9);
    // Upper slope bound comes from the pairwise slope of the outer anchors;
    // the lower bound is clipped by the box intercept range.
    assert!((hull.hi - 0.875f64.atan()).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn separability_agrees_with_lp_oracle(points in labeled_points(12)) {
        let ours = is_separable(&points).unwrap();
        let lp = oracle::lp_separable(&points);
        prop_assert_eq!(ours, lp, "dataset {:?}", points);
    }

    #[test]
    fn polygon_nesting_under_new_points(
        points in labeled_points(8),
        extra in (-9.0f64..9.0, -9.0f64..9.0, prop::bool::ANY),
    ) {
        let bx = wide_box();
        let outer = feasible_polygon(&points, &bx).unwrap();
        let p = LabeledPoint::new(extra.0, extra.1, if extra.2 { 1 } else { -1 }).unwrap();
        let mut all = points.clone();
        all.push(p);
        let inner = feasible_polygon(&all, &bx).unwrap();
        for &(r, c) in inner.vertices() {
            prop_assert!(outer.contains(r, c, 1e-7), "vertex ({r}, {c}) escaped");
        }
    }

    #[test]
    fn projections_cover_every_vertex(points in labeled_points(10)) {
        let poly = feasible_polygon(&points, &wide_box()).unwrap();
        let slopes = slope_set(&poly);
        let intercepts = intercept_interval(&poly);
        for &(r, c) in poly.vertices() {
            prop_assert!(slopes.contains(r.atan()));
            prop_assert!(intercepts.unwrap().contains(c));
        }
    }

    #[test]
    fn certainty_is_sound_on_interior_samples(
        seed in 0u64..1_000_000,
        px in -9.0f64..9.0,
        pz in -9.0f64..9.0,
    ) {
        let points = common::banded_dataset(seed, 8, 0.5);
        let poly = feasible_polygon(&points, &wide_box()).unwrap();
        prop_assume!(!poly.is_empty());
        let label = certainty_label(&poly, (px, pz)).unwrap();
        prop_assume!(label != 0);
        // 100 random interior samples (convex combinations of vertices).
        let verts = poly.vertices();
        for k in 0..100u64 {
            let mut weights: Vec<f64> = (0..verts.len())
                .map(|i| common::rand_in(seed ^ 0xabcd, k * 64 + i as u64, 0.0, 1.0))
                .collect();
            let total: f64 = weights.iter().sum();
            for w in &mut weights {
                *w /= total;
            }
            let (mut r, mut c) = (0.0, 0.0);
            for (w, v) in weights.iter().zip(verts) {
                r += w * v.0;
                c += w * v.1;
            }
            let f = pz - r * px - c;
            prop_assert!(
                (label as f64) * f >= -1e-9,
                "sampled classifier ({r}, {c}) disagrees with certainty {label}: f = {f}"
            );
        }
    }

    #[test]
    fn anchor_bounds_match_four_line_construction(seed in 0u64..1_000_000) {
        // Two-column anchor layouts: slope bounds of the polygon equal the
        // interval hull of the pairwise-slope construction
        // [theta_24, theta_14] union [theta_23, theta_13].
        let xa = common::rand_in(seed, 0, -9.0, -2.0);
        let xb = common::rand_in(seed, 1, 2.0, 9.0);
        let za = common::rand_in(seed, 2, -4.0, 4.0);
        let zb = common::rand_in(seed, 3, -4.0, 4.0);
        let da = (common::rand_in(seed, 4, 0.3, 3.0), common::rand_in(seed, 5, 0.3, 3.0));
        let db = (common::rand_in(seed, 6, 0.3, 3.0), common::rand_in(seed, 7, 0.3, 3.0));
        let p1 = LabeledPoint::new(xa, za - da.0, -1).unwrap();
        let p2 = LabeledPoint::new(xa, za + da.1, 1).unwrap();
        let p3 = LabeledPoint::new(xb, zb + db.0, 1).unwrap();
        let p4 = LabeledPoint::new(xb, zb - db.1, -1).unwrap();
        let anchors = [p1, p2, p3, p4];

        let pair_slope = |a: &LabeledPoint, b: &LabeledPoint| (b.z - a.z) / (b.x - a.x);
        let t13 = pair_slope(&p1, &p3).atan();
        let t14 = pair_slope(&p1, &p4).atan();
        let t23 = pair_slope(&p2, &p3).atan();
        let t24 = pair_slope(&p2, &p4).atan();
        let hull_lo = t24.min(t14).min(t23).min(t13);
        let hull_hi = t24.max(t14).max(t23).max(t13);
        // Use a box that cannot clip the construction.
        let cap = 1.45f64;
        prop_assume!(hull_lo.abs() < cap && hull_hi.abs() < cap);
        let c_cap = 80.0;
        let bx = ParamBox::new(-cap, cap, -c_cap, c_cap).unwrap();
        let poly = feasible_polygon(&anchors, &bx).unwrap();
        prop_assert!(!poly.is_empty());
        let got = slope_set(&poly).hull().unwrap();
        prop_assert!((got.lo - hull_lo).abs() < 1e-7, "lo {} vs {}", got.lo, hull_lo);
        prop_assert!((got.hi - hull_hi).abs() < 1e-7, "hi {} vs {}", got.hi, hull_hi);
        // The two-interval union is recorded, not enforced: its hull must
        // still be what the polygon reports.
        let union = AngleSet::union_all([
            &AngleSet::from_interval(t24.min(t14), t24.max(t14)),
            &AngleSet::from_interval(t23.min(t13), t23.max(t13)),
        ]);
        let uh = union.hull().unwrap();
        prop_assert!((uh.lo - hull_lo).abs() < 1e-12);
        prop_assert!((uh.hi - hull_hi).abs() < 1e-12);
    }

    #[test]
    fn closest_pairs_match_exhaustive_enumeration(seed in 0u64..1_000_000) {
        // 12 points around the diagonal z = x.
        let mut points = Vec::new();
        for i in 0..12u64 {
            let x = common::rand_in(seed, 2 * i, -6.0, 6.0);
            let side = if common::rand_in(seed, 2 * i + 1, 0.0, 1.0) < 0.5 { -1.0 } else { 1.0 };
            let off = 0.2 + common::rand_in(seed, 100 + i, 0.0, 2.0);
            points.push(LabeledPoint::new(x, x + side * off, side as i8).unwrap());
        }
        let pos = points.iter().filter(|p| p.label == 1).count();
        prop_assume!(pos >= 2 && points.len() - pos >= 2);
        let min_sep = 1.0;
        match closest_opposite_pairs(&points, min_sep) {
            Err(_) => {}
            Ok((a, b)) => {
                // Brute force: pair A is the global minimum.
                let mut best = f64::INFINITY;
                for n in points.iter().filter(|p| p.label == -1) {
                    for p in points.iter().filter(|p| p.label == 1) {
                        best = best.min(n.distance(p));
                    }
                }
                prop_assert!((a.distance() - best).abs() < 1e-12);
                // Pair B: minimal among disjoint pairs far enough away.
                let (ax, az) = a.midpoint();
                let mut best_b = f64::INFINITY;
                for n in points.iter().filter(|p| p.label == -1) {
                    for p in points.iter().filter(|p| p.label == 1) {
                        let shares = (n.x == a.neg.x && n.z == a.neg.z)
                            || (p.x == a.pos.x && p.z == a.pos.z);
                        if shares {
                            continue;
                        }
                        let (mx, mz) = ((n.x + p.x) / 2.0, (n.z + p.z) / 2.0);
                        if (mx - ax).hypot(mz - az) < min_sep {
                            continue;
                        }
                        best_b = best_b.min(n.distance(p));
                    }
                }
                prop_assert!((b.distance() - best_b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn polygon_projection_tracks_grid_oracle(seed in 0u64..1_000_000) {
        let points = common::banded_dataset(seed, 12, 0.5);
        let bx = wide_box();
        let poly = feasible_polygon(&points, &bx).unwrap();
        let theta_step = 0.25f64.to_radians();
        let c_step = 0.05;
        let gb = oracle::grid_project(&points, -1.2, 1.2, -10.0, 10.0, theta_step, c_step);
        match (poly.is_empty(), gb) {
            (true, None) => {}
            (true, Some(_)) => prop_assert!(false, "oracle found points in an empty polygon"),
            (false, None) => {
                let hull = slope_set(&poly).hull().unwrap();
                let ic = intercept_interval(&poly).unwrap();
                prop_assert!(hull.width() <= theta_step + 1e-9 && ic.width() <= c_step + 1e-9);
            }
            (false, Some(gb)) => {
                let hull = slope_set(&poly).hull().unwrap();
                let ic = intercept_interval(&poly).unwrap();
                prop_assert!((hull.lo - gb.theta_lo).abs() <= theta_step + 1e-9);
                prop_assert!((hull.hi - gb.theta_hi).abs() <= theta_step + 1e-9);
                prop_assert!((ic.lo - gb.c_lo).abs() <= c_step + 1e-9);
                prop_assert!((ic.hi - gb.c_hi).abs() <= c_step + 1e-9);
            }
        }
    }
}
