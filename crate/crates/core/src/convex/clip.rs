//! Intersections of convex bodies through polar duality of half-spaces.

use crate::convex::ConvexBody;
use crate::error::{Error, Result};
use crate::geom::Point;

/// Closed half-space `⟨normal, x⟩ ≤ offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub normal: Point,
    pub offset: f64,
}

/// Facet half-spaces of a solid body.
pub fn halfspaces(body: &ConvexBody) -> Vec<Plane> {
    body.facets().iter().map(|f| Plane { normal: f.normal, offset: f.offset }).collect()
}

/// Vertex representation of `{x : ⟨n_i, x⟩ ≤ b_i}` given a point `c` strictly
/// inside every half-space. Each half-space maps to the polar point
/// `n_i/(b_i − ⟨n_i, c⟩)`; facets of the polar hull map back to vertices.
pub fn intersect_halfspaces(dim: usize, planes: &[Plane], c: &Point) -> Result<ConvexBody> {
    let mut polar = Vec::with_capacity(planes.len() + 1);
    for p in planes {
        let gap = p.offset - p.normal.dot(c);
        if gap <= 0.0 {
            return Err(Error::domain("reference point is not interior to every half-space"));
        }
        polar.push(p.normal / gap);
    }
    let dual = ConvexBody::from_points(dim, &polar)?;
    if !dual.is_solid() || dual.signed_distance(&Point::zeros()) >= -1e-14 {
        return Err(Error::domain("half-space intersection is unbounded"));
    }
    let verts: Vec<Point> = dual.facets().iter().map(|f| c + f.normal / f.offset).collect();
    ConvexBody::from_points(dim, &verts)
}

/// Some point deep inside both bodies: the midpoint of a ray chord through
/// the segment joining their interior points, refined by alternating projection.
fn common_interior(a: &ConvexBody, b: &ConvexBody) -> Option<Point> {
    let mut best: Option<(f64, Point)> = None;
    let mut consider = |p: Point| {
        let depth = -(a.signed_distance(&p).max(b.signed_distance(&p)));
        if depth > 0.0 && best.is_none_or(|(d, _)| depth > d) {
            best = Some((depth, p));
        }
    };
    let (ca, cb) = (a.interior_point(), b.interior_point());
    for k in 0..=32 {
        consider(ca + (cb - ca) * (k as f64 / 32.0));
    }
    let mut p = (ca + cb) * 0.5;
    for _ in 0..200 {
        let (_, q) = a.distance_and_project(&p);
        let (_, q) = b.distance_and_project(&q);
        p = q;
    }
    for k in 0..=16 {
        let t = k as f64 / 16.0;
        consider(p + (ca - p) * t * 0.5);
        consider(p + (cb - p) * t * 0.5);
    }
    best.map(|(_, p)| p)
}

/// `K₁ ∩ K₂` for solid bodies with a common interior point.
pub fn intersection(a: &ConvexBody, b: &ConvexBody) -> Result<ConvexBody> {
    if a.dim() != b.dim() {
        return Err(Error::domain("dimension mismatch"));
    }
    if !a.is_solid() || !b.is_solid() {
        return Err(Error::domain("intersection needs bodies with nonempty interior"));
    }
    let c = common_interior(a, b).ok_or_else(|| Error::domain("intersection has empty interior"))?;
    let mut planes = halfspaces(a);
    planes.extend(halfspaces(b));
    let res = a.resolution().max(b.resolution());
    Ok(intersect_halfspaces(a.dim(), &planes, &c)?.with_resolution(res))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{p2, p3};

    #[test]
    fn overlapping_squares() {
        let a = ConvexBody::unit_square();
        let b = ConvexBody::polygon(&[p2(0.5, 0.5), p2(1.5, 0.5), p2(1.5, 1.5), p2(0.5, 1.5)]).unwrap();
        let i = intersection(&a, &b).unwrap();
        assert!((i.volume() - 0.25).abs() < 1e-12);
        assert_eq!(i.vertices().len(), 4);
    }

    #[test]
    fn cube_cut_by_plane() {
        let cube = crate::convex::unit_cube();
        let mut planes = halfspaces(&cube);
        planes.push(Plane { normal: p3(0.0, 0.0, 1.0), offset: 0.25 });
        let cut = intersect_halfspaces(3, &planes, &p3(0.5, 0.5, 0.1)).unwrap();
        assert!((cut.volume() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn disjoint_bodies_fail() {
        let a = ConvexBody::unit_square();
        let b = ConvexBody::polygon(&[p2(2.0, 2.0), p2(3.0, 2.0), p2(3.0, 3.0)]).unwrap();
        assert!(intersection(&a, &b).is_err());
    }
}
