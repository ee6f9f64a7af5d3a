use plateau::convex::{supporting_normals, unit_cube, ConvexBody, DirectionKind};
use plateau::geom::{angular_hausdorff, deg, p2, p3, Point};
use plateau::spherical::{dual_set_with_margin, link, spherical_convex_hull, SphericalSet};
use proptest::prelude::*;

fn arc(from: f64, to: f64, step: f64) -> Vec<Point> {
    let n = ((to - from) / step).round() as usize;
    (0..=n).map(|i| from + i as f64 * step).map(|t| p2(t.cos(), t.sin())).collect()
}

#[test]
fn square_corner_normals_are_a_quarter_arc() {
    let res = deg(1.0);
    let sq = ConvexBody::unit_square();
    let normals = supporting_normals(&sq, &p2(1.0, 1.0), res).unwrap();
    let expected = arc(0.0, deg(90.0), res);
    assert!(angular_hausdorff(&normals.directions, &expected).to_degrees() <= 1.0);
}

#[test]
fn edge_midpoint_has_a_single_normal_direction() {
    let res = deg(1.0);
    let normals = supporting_normals(&ConvexBody::unit_square(), &p2(0.5, 0.0), res).unwrap();
    assert!(!normals.is_empty());
    for u in &normals.directions {
        assert!(u.dot(&p2(0.0, -1.0)) > deg(1.0).cos() - 1e-12);
    }
}

#[test]
fn cube_vertex_normals_lie_in_the_octant() {
    let normals = supporting_normals(&unit_cube(), &p3(1.0, 1.0, 1.0), deg(4.0)).unwrap();
    assert!(!normals.is_empty());
    for u in &normals.directions {
        assert!(u.x > -0.1 && u.y > -0.1 && u.z > -0.1);
    }
}

#[test]
fn square_corner_link_is_the_dual_of_its_normals() {
    let res = deg(1.0);
    let sq = ConvexBody::unit_square();
    let corner = p2(1.0, 1.0);
    let l = link(&sq, &corner, &[1e-3], res).unwrap();
    // the link at the corner is the open quarter from 180° to 270°
    let expected = arc(deg(181.0), deg(269.0), res);
    assert!(angular_hausdorff(l.directions(), &expected).to_degrees() <= 1.0);
    let normals = supporting_normals(&sq, &corner, res).unwrap();
    let dual = dual_set_with_margin(&l, res, 0.0).set.directions;
    assert!(angular_hausdorff(&dual, &normals.directions).to_degrees() <= 2.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dual_of_an_arc_is_the_opposite_arc(start in 0.0f64..360.0, width in 5.0f64..120.0) {
        // directions at negative inner product with every member of the arc
        // [a, a+w] form the open arc (a+w+90°, a+270°)
        let res = deg(1.0);
        let x = arc(deg(start), deg(start + width), deg(0.25));
        let set = SphericalSet::from_directions(2, x.clone(), DirectionKind::Generic);
        let dual = dual_set_with_margin(&set, res, 0.0).set.directions;
        let expected = arc(deg(start + width + 91.0), deg(start + 269.0), deg(0.25));
        prop_assert!(angular_hausdorff(&dual, &expected).to_degrees() <= 2.0);
        let hull = spherical_convex_hull(&set, res).unwrap().set.directions;
        let bidual = dual_set_with_margin(&SphericalSet::from_directions(2, dual, DirectionKind::Generic), res, 0.0).set.directions;
        prop_assert!(angular_hausdorff(&bidual, &hull).to_degrees() <= 2.0);
    }
}
