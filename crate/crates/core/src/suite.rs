//! Randomised property suites for the convex kernel and spherical duality.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::convex::{hausdorff_distance, supporting_normals, ConvexBody, DirectionKind};
use crate::geom::{self, deg, p2, Point};
use crate::spherical::{dual_set_with_margin, link, spherical_convex_hull, SphericalSet};

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct GroupResult {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Largest observed violation (or error) over the cases.
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

struct Group {
    name: &'static str,
    tolerance: f64,
    cases: usize,
    failures: usize,
    max_error: f64,
}

impl Group {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Group { name, tolerance, cases: 0, failures: 0, max_error: 0.0 }
    }

    /// Records one case whose violation is `err` (nonpositive when satisfied).
    fn record(&mut self, err: f64) {
        self.cases += 1;
        self.max_error = self.max_error.max(err);
        if !(err <= self.tolerance) {
            self.failures += 1;
        }
    }

    fn finish(self) -> GroupResult {
        GroupResult {
            name: self.name.into(),
            cases: self.cases,
            failures: self.failures,
            max_error: self.max_error,
            tolerance: self.tolerance,
            pass: self.failures == 0 && self.cases > 0,
        }
    }
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize, r: f64) -> Point {
    let mut p = Point::zeros();
    for a in 0..dim {
        p[a] = rng.random_range(-r..r);
    }
    p
}

fn random_body(rng: &mut ChaCha8Rng, dim: usize) -> ConvexBody {
    loop {
        let n = rng.random_range(dim + 2..24);
        let pts: Vec<Point> = (0..n).map(|_| random_point(rng, dim, 1.0)).collect();
        if let Ok(b) = ConvexBody::from_points(dim, &pts) {
            if b.is_solid() && b.volume() > 1e-3 {
                return b;
            }
        }
    }
}

fn same_vertex_set(a: &ConvexBody, b: &ConvexBody) -> f64 {
    let gap = |x: &ConvexBody, y: &ConvexBody| {
        x.vertices().iter().map(|p| y.vertices().iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    gap(a, b).max(gap(b, a))
}

/// Metric axioms of the Hausdorff distance, 1-Lipschitz projection,
/// convexity of the distance function, hull idempotence and the
/// variational characterisation of the closest point. `cases` per group,
/// alternating between the plane and space.
pub fn convex_suite(seed: u64, cases: usize) -> Vec<GroupResult> {
    let mut rng = geom::seeded_rng(seed);
    let mut metric = Group::new("hausdorff_metric_axioms", 1e-12);
    let mut lipschitz = Group::new("projection_1_lipschitz", 1e-12);
    let mut convexity = Group::new("distance_convexity", 1e-12);
    let mut idempotence = Group::new("hull_idempotence", 1e-12);
    let mut closest = Group::new("closest_point_normal", 1e-10);
    for case in 0..cases {
        let dim = 2 + case % 2;
        let (a, b, c) = (random_body(&mut rng, dim), random_body(&mut rng, dim), random_body(&mut rng, dim));
        let d = |x: &ConvexBody, y: &ConvexBody| hausdorff_distance(x, y).expect("nonempty bodies");
        let (ab, ba, bc, ac, aa) = (d(&a, &b), d(&b, &a), d(&b, &c), d(&a, &c), d(&a, &a));
        let positive = if ab > 0.0 { 0.0 } else { 1.0 };
        metric.record(aa.max((ab - ba).abs()).max(ac - ab - bc).max(positive));

        let (x, y) = (random_point(&mut rng, dim, 3.0), random_point(&mut rng, dim, 3.0));
        let (px, py) = (a.distance_and_project(&x).1, a.distance_and_project(&y).1);
        lipschitz.record((px - py).norm() - (x - y).norm());

        let t: f64 = rng.random_range(0.0..1.0);
        let dist = |p: &Point| a.distance_and_project(p).0;
        let mid = x * (1.0 - t) + y * t;
        convexity.record(dist(&mid) - (1.0 - t) * dist(&x) - t * dist(&y));

        let again = ConvexBody::from_points(dim, a.vertices()).expect("hull of hull vertices");
        let vol = (again.volume() - a.volume()).abs() / a.volume();
        let count = if again.vertices().len() == a.vertices().len() { 0.0 } else { 1.0 };
        idempotence.record(vol.max(same_vertex_set(&a, &again)).max(count));

        let (dx, p) = a.distance_and_project(&x);
        if dx > 1e-6 {
            let u = (x - p) / dx;
            let slack = a.vertices().iter().map(|q| (q - p).dot(&u)).fold(f64::NEG_INFINITY, f64::max);
            let support = a.support(&u) - p.dot(&u);
            let dist_gap = ((x - p).norm() - dx).abs();
            closest.record(slack.max(support).max(dist_gap));
        } else {
            closest.record(a.signed_distance(&x).max(0.0));
        }
    }
    vec![metric.finish(), lipschitz.finish(), convexity.finish(), idempotence.finish(), closest.finish()]
}

/// Largest turning angle between consecutive edges.
fn max_exterior_angle(body: &ConvexBody) -> f64 {
    let v = body.vertices();
    let m = v.len();
    (0..m).map(|i| geom::angle_between(&(v[(i + 1) % m] - v[i]), &(v[(i + 2) % m] - v[(i + 1) % m]))).fold(0.0, f64::max)
}

/// Random convex polygon inscribed in an ellipse, with every exterior angle
/// below 60° so that three consecutive normal cones fit in a hemisphere and
/// no edge shorter than 2% of the diameter.
fn random_polygon(rng: &mut ChaCha8Rng) -> ConvexBody {
    loop {
        let m = rng.random_range(8..17);
        let (ax, ay) = (rng.random_range(0.5..2.0), rng.random_range(0.5..2.0));
        let mut angles: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let pts: Vec<Point> = angles.iter().map(|t| p2(ax * t.cos(), ay * t.sin())).collect();
        if let Ok(b) = ConvexBody::polygon(&pts) {
            if b.is_solid() && b.vertices().len() == m && max_exterior_angle(&b) < deg(60.0) && min_edge(&b) > 0.02 * b.diameter() {
                return b;
            }
        }
    }
}

fn min_edge(b: &ConvexBody) -> f64 {
    let v = b.vertices();
    (0..v.len()).map(|i| (v[i] - v[(i + 1) % v.len()]).norm()).fold(f64::INFINITY, f64::min)
}

fn set(dirs: Vec<Point>) -> SphericalSet {
    SphericalSet::from_directions(2, dirs, DirectionKind::Generic)
}

/// Grid directions of the spherical arc spanned by the normal cones of
/// consecutive vertices `from..from+len`.
fn vertex_arc(body: &ConvexBody, from: usize, len: usize, res: f64) -> Vec<Point> {
    let v = body.vertices();
    let mut out = Vec::new();
    for i in from..from + len {
        out.extend(supporting_normals(body, &v[i % v.len()], res).expect("vertex on boundary").directions);
    }
    spherical_convex_hull(&set(out), res).expect("arc in a hemisphere").set.directions
}

fn intersect(a: &[Point], b: &[Point]) -> Vec<Point> {
    a.iter().filter(|u| b.iter().any(|v| (*u - v).norm() < 1e-12)).copied().collect()
}

/// Duality laws on the circle of directions for `polygons` random convex
/// polygons at resolution `res_deg`: biduality `X** = conv X`, the union law
/// `(X ∪ Y)* = X* ∩ Y*`, the intersection law `(X ∩ Y)* = conv(X* ∪ Y*)` and
/// link–normal duality `𝒩(x) = ℒ(x)*`. Errors are angular Hausdorff
/// distances in degrees.
pub fn duality_suite(seed: u64, polygons: usize, res_deg: f64) -> Vec<GroupResult> {
    let mut rng = geom::seeded_rng(seed);
    let res = deg(res_deg);
    let tol = 2.0;
    let mut bidual = Group::new("biduality", tol);
    let mut union = Group::new("union_law", tol);
    let mut inter = Group::new("intersection_law", tol);
    let mut link_normal = Group::new("link_normal_duality", tol);
    let err = |a: &[Point], b: &[Point]| geom::angular_hausdorff(a, b).to_degrees();
    let dual = |x: &[Point]| dual_set_with_margin(&set(x.to_vec()), res, 0.0).set.directions;
    for _ in 0..polygons {
        let poly = random_polygon(&mut rng);
        let m = poly.vertices().len();
        let i = rng.random_range(0..m);

        let x = vertex_arc(&poly, i, 1, res);
        let hull = spherical_convex_hull(&set(x.clone()), res).expect("cone in a hemisphere").set.directions;
        bidual.record(err(&dual(&dual(&x)), &hull));

        let y = vertex_arc(&poly, i + 1, 1, res);
        let mut xy = x.clone();
        xy.extend(y.iter().copied());
        union.record(err(&dual(&xy), &intersect(&dual(&x), &dual(&y))));

        let (a, b) = (vertex_arc(&poly, i, 3, res), vertex_arc(&poly, i + 1, 3, res));
        let common = intersect(&a, &b);
        if common.is_empty() {
            inter.record(f64::INFINITY);
            continue;
        }
        let mut duals = dual(&a);
        duals.extend(dual(&b));
        match spherical_convex_hull(&set(duals), res) {
            Ok(h) => inter.record(err(&dual(&common), &h.set.directions)),
            Err(_) => inter.record(f64::INFINITY),
        }

        let p = poly.vertices()[i];
        // the link is a small-radius limit: stay inside both incident edges
        let v = poly.vertices();
        let edge = (p - v[(i + 1) % m]).norm().min((p - v[(i + m - 1) % m]).norm());
        let r = (1e-3 * poly.diameter()).min(0.25 * edge);
        let normals = supporting_normals(&poly, &p, res).expect("vertex on boundary").directions;
        let l = link(&poly, &p, &[r], res).expect("link at a vertex");
        link_normal.record(err(&normals, &dual(l.directions())));
    }
    vec![bidual.finish(), union.finish(), inter.finish(), link_normal.finish()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        for g in convex_suite(1, 40).into_iter().chain(duality_suite(1, 5, 1.0)) {
            assert!(g.pass, "{g:?}");
        }
    }
}
