use plateau::convex::{hausdorff_distance, hausdorff_distance_with, intersection, unit_cube, ConvexBody, HausdorffConvention};
use plateau::geom::{p2, p3, Point};
use proptest::prelude::*;

fn pt3() -> impl Strategy<Value = Point> {
    (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0).prop_map(|(x, y, z)| p3(x, y, z))
}

fn cloud3() -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0).prop_map(|(x, y, z)| p3(x, y, z)), 8..40)
}

fn cloud2() -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(x, y)| p2(x, y)), 5..40)
}

/// Signed distance to the box `[0,1]³` written out by cases.
fn cube_distance(x: &Point) -> f64 {
    let q = x.map(|c| (c - 0.5).abs() - 0.5);
    let outside = q.map(|c| c.max(0.0)).norm();
    let inside = q.x.max(q.y).max(q.z).min(0.0);
    outside + inside
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cube_signed_distance_matches_closed_form(x in pt3()) {
        let d = unit_cube().signed_distance(&x);
        prop_assert!((d - cube_distance(&x)).abs() < 1e-12, "{d} vs {}", cube_distance(&x));
    }

    #[test]
    fn hull_contains_its_points_and_support_is_attained(pts in cloud3(), u in pt3()) {
        let body = ConvexBody::from_points(3, &pts).unwrap();
        for p in &pts {
            prop_assert!(body.signed_distance(p) <= 1e-10);
        }
        let brute = pts.iter().map(|p| p.dot(&u)).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((body.support(&u) - brute).abs() < 1e-10);
    }

    #[test]
    fn hull_of_hull_vertices_is_the_same_body(pts in cloud2()) {
        let a = ConvexBody::from_points(2, &pts).unwrap();
        let b = ConvexBody::from_points(2, a.vertices()).unwrap();
        prop_assert!((a.volume() - b.volume()).abs() < 1e-12);
        prop_assert!(hausdorff_distance(&a, &b).unwrap() < 1e-12);
    }

    #[test]
    fn projection_is_one_lipschitz_and_lands_on_the_body(pts in cloud3(), x in pt3(), y in pt3()) {
        let body = ConvexBody::from_points(3, &pts).unwrap();
        let (_, px) = body.distance_and_project(&x);
        let (_, py) = body.distance_and_project(&y);
        prop_assert!((px - py).norm() <= (x - y).norm() + 1e-10);
        prop_assert!(body.signed_distance(&px) <= 1e-10);
        // obtuse-angle characterisation of the nearest point
        if body.signed_distance(&x) > 1e-9 {
            for v in body.vertices() {
                prop_assert!((x - px).dot(&(v - px)) <= 1e-9);
            }
        }
    }

    #[test]
    fn hausdorff_is_symmetric_and_obeys_the_triangle_inequality(a in cloud2(), b in cloud2(), c in cloud2()) {
        let d = |x: &Vec<Point>, y: &Vec<Point>| hausdorff_distance_with(x, y, HausdorffConvention::Max).unwrap();
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() < 1e-15);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
        prop_assert!(d(&a, &a) == 0.0);
    }

    #[test]
    fn intersection_lies_inside_both(shift in 0.1f64..0.9) {
        let a = ConvexBody::unit_square();
        let b = ConvexBody::polygon(&[p2(shift, shift), p2(1.0 + shift, shift), p2(1.0 + shift, 1.0 + shift), p2(shift, 1.0 + shift)]).unwrap();
        let i = intersection(&a, &b).unwrap();
        let side = 1.0 - shift;
        prop_assert!((i.volume() - side * side).abs() < 1e-12);
    }
}

#[test]
fn concentric_disks_are_radius_apart() {
    let a = ConvexBody::disk(Point::zeros(), 1.0, 720);
    let b = ConvexBody::disk(Point::zeros(), 1.5, 720);
    // directed distances are 0 and 0.5; the default convention adds them
    let sum = hausdorff_distance(&a, &b).unwrap();
    let max = hausdorff_distance_with(&a, &b, HausdorffConvention::Max).unwrap();
    assert!((sum - 0.5).abs() < 1e-3, "{sum}");
    assert!((max - 0.5).abs() < 1e-3, "{max}");
}

#[test]
fn polygon_of_many_samples_approaches_the_disk_area() {
    let m = 4096;
    let disk = ConvexBody::disk(Point::zeros(), 1.0, m);
    let inscribed = 0.5 * m as f64 * (std::f64::consts::TAU / m as f64).sin();
    assert!((disk.volume() - inscribed).abs() < 1e-12);
}

#[test]
fn degenerate_inputs_are_rejected_or_flagged() {
    assert!(ConvexBody::from_points(3, &[]).is_err());
    let flat = ConvexBody::from_points(3, &[p3(0.0, 0.0, 0.0), p3(1.0, 0.0, 0.0), p3(0.0, 1.0, 0.0)]);
    assert!(flat.map_or(true, |b| !b.is_solid()));
}
