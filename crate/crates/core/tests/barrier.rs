use std::f64::consts::PI;

use plateau::barrier::{
    classify_all, excise, excision_chart, mollify_at, target_curvature, BarrierState, ClassifyOptions, ExcisionOptions, FrozenSet,
    Mollifier, Tag,
};
use plateau::convex::ConvexBody;
use plateau::geom::{p2, p3, Point};
use proptest::prelude::*;

/// Circular segment of height `h` cut from a circle of radius `r`.
fn segment_area(r: f64, h: f64) -> f64 {
    r * r * ((r - h) / r).acos() - (r - h) * (2.0 * r * h - h * h).sqrt()
}

/// Spherical cap of height `h` cut from a ball of radius `r`.
fn cap_volume(r: f64, h: f64) -> f64 {
    PI * h * h * (3.0 * r - h) / 3.0
}

/// Height of the arc of radius `r` over a chord of half-length `a`.
fn sagitta(r: f64, a: f64) -> f64 {
    r - (r * r - a * a).sqrt()
}

fn boundary_point(body: &ConvexBody, dir: &Point) -> Point {
    body.distance_and_project(&(dir * 3.0)).1
}

#[test]
fn equatorial_excision_of_the_disk() {
    let disk = ConvexBody::disk(Point::zeros(), 1.0, 2048);
    let frozen = FrozenSet::half_space(p2(1.0, 0.0), -0.5, 1e-3).unwrap();
    let state = BarrierState::new(disk, frozen, 0.25).unwrap();
    let x = boundary_point(&state.body, &p2(1.0, 0.0));
    let chart = excision_chart(&state.body, &x, &p2(1.0, 0.0)).unwrap();
    let delta = 0.05;
    let ex = excise(&state, &chart, delta, &ExcisionOptions::default()).unwrap();
    let a = (1.0 - (1.0 - delta) * (1.0 - delta)).sqrt();
    let expected = segment_area(1.0, delta) - segment_area(2.0, sagitta(2.0, a));
    let drop = ex.record.volume_before - ex.record.volume_after;
    assert!((drop - expected).abs() < 0.02 * expected, "drop {drop} vs {expected}");
    assert!(ex.state.body.volume() < state.body.volume());
}

#[test]
fn equatorial_excision_of_the_ball() {
    let ball = ConvexBody::ball(Point::zeros(), 1.0, 5);
    let frozen = FrozenSet::half_space(p3(1.0, 0.0, 0.0), -0.5, 2e-3).unwrap();
    let state = BarrierState::new(ball, frozen, 0.25).unwrap();
    let x = boundary_point(&state.body, &p3(1.0, 0.0, 0.0));
    let chart = excision_chart(&state.body, &x, &p3(1.0, 0.0, 0.0)).unwrap();
    let delta = 0.05;
    let ex = excise(&state, &chart, delta, &ExcisionOptions::default()).unwrap();
    let a = (1.0 - (1.0 - delta) * (1.0 - delta)).sqrt();
    let expected = cap_volume(1.0, delta) - cap_volume(2.0, sagitta(2.0, a));
    let drop = ex.record.volume_before - ex.record.volume_after;
    assert!((drop - expected).abs() < 0.05 * expected, "drop {drop} vs {expected}");
    assert!(ex.record.hausdorff_increment > 0.0 && ex.record.hausdorff_increment < 2.0 * delta);
    // the frozen region is untouched
    for v in state.body.vertices().iter().filter(|v| v.x < -0.5) {
        assert!(ex.state.body.signed_distance(v).abs() < 1e-9);
    }
}

#[test]
fn untouched_round_ball_is_all_needs_excision_or_frozen() {
    let ball = ConvexBody::ball(Point::zeros(), 1.0, 3);
    let state = BarrierState::new(ball, FrozenSet::lower_half(3, 2e-3).unwrap(), 0.25).unwrap();
    let cls = classify_all(&state, &ClassifyOptions::default());
    let target = target_curvature(3, 0.25);
    for c in &cls {
        match c.tag {
            Tag::Frozen => assert!(c.point.z <= 3.0 * 2e-3 + 1e-12),
            // unit sphere curvature 1 exceeds the target 0.25
            Tag::NeedsExcision => assert!(c.curvature.is_some_and(|k| k > target)),
            other => panic!("unexpected {other:?} at {:?}", c.point),
        }
    }
}

#[test]
fn frozen_set_needs_boundary_contact() {
    let ball = ConvexBody::ball(Point::zeros(), 1.0, 2);
    let far = FrozenSet::half_space(p3(0.0, 0.0, 1.0), -5.0, 1e-3).unwrap();
    assert!(BarrierState::new(ball, far, 0.25).is_err());
}

#[test]
fn mollifier_has_unit_mass_and_reproduces_affine_functions() {
    for dim in [2, 3] {
        let m = Mollifier::new(dim, 0.1).unwrap();
        let affine = |x: &Point| 0.3 + 2.0 * x.x - x.y + if dim == 3 { 0.5 * x.z } else { 0.0 };
        let x = p3(0.2, -0.1, if dim == 3 { 0.4 } else { 0.0 });
        let v = mollify_at(&affine, &x, &m, 0.01).unwrap();
        assert!((v - affine(&x)).abs() < 1e-9, "dim {dim}: {v}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mollified_convex_function_stays_above(cx in -0.5f64..0.5, cy in -0.5f64..0.5) {
        // Jensen: mollifying a convex function can only raise it
        let m = Mollifier::new(2, 0.2).unwrap();
        let f = |x: &Point| x.x * x.x + 2.0 * x.y * x.y;
        let x = p2(cx, cy);
        prop_assert!(mollify_at(&f, &x, &m, 0.02).unwrap() >= f(&x) - 1e-12);
    }
}
