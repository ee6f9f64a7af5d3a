use plateau::convex::{hausdorff_distance, unit_cube, ConvexBody};
use plateau::field::ScalarGrid;
use plateau::geom::{p3, Point};
use plateau::io::{
    body_from_json, body_from_obj, body_from_polyline_csv, body_to_json, body_to_obj, read_grid, write_grid, write_polyline_csv,
};

#[test]
fn bodies_survive_every_text_format() {
    let ball = ConvexBody::ball(Point::zeros(), 1.0, 2);
    let obj = body_from_obj(&body_to_obj(&ball, &["comment".into()])).unwrap();
    assert_eq!(hausdorff_distance(&ball, &obj).unwrap(), 0.0);
    let json = body_from_json(&body_to_json(&unit_cube())).unwrap();
    assert!((json.volume() - 1.0).abs() < 1e-15);
    let disk = ConvexBody::disk(Point::zeros(), 1.0, 64);
    let csv = body_from_polyline_csv(&write_polyline_csv(disk.vertices())).unwrap();
    assert_eq!(csv.vertices(), disk.vertices());
}

#[test]
fn grids_round_trip_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let mut g = ScalarGrid::covering(3, p3(-1.0, -1.0, -1.0), p3(1.0, 1.0, 1.0), 0.25, 0.0);
    for (i, v) in g.values.iter_mut().enumerate() {
        *v = (i as f64).sin() / 3.0;
    }
    g.values[7] = f64::NAN;
    let path = dir.path().join("g.bin");
    write_grid(&g, &path).unwrap();
    let back = read_grid(&path).unwrap();
    assert_eq!(back.shape, g.shape);
    assert!(back.values.iter().zip(&g.values).all(|(a, b)| a.to_bits() == b.to_bits()));
}

#[test]
fn malformed_inputs_are_parse_errors() {
    assert!(body_from_json(r#"{"dim":4,"vertices":[]}"#).is_err());
    assert!(body_from_json(r#"{"dim":2,"vertices":[[0,0],[1]]}"#).is_err());
    assert!(body_from_obj("v 0 0\n").is_err());
}
