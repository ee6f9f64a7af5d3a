//! Spherical convexity on direction grids: half-spaces, hemispheres, the
//! affine projection `P`, duals, spherical hulls, links and the supporting
//! normals of intersections.

use crate::convex::{supporting_normals, ConvexBody, DirectionKind, DirectionSet};
use crate::error::{Error, Result};
use crate::geom::{self, Point};

/// Margin below which a set is not considered strictly inside a hemisphere.
pub const HEMISPHERE_MARGIN: f64 = 1e-9;

/// Open half-space `{x : ⟨x, normal⟩ < height}`; `height = ∞` is all of space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSpace {
    pub normal: Point,
    pub height: f64,
}

impl HalfSpace {
    pub fn new(normal: Point, height: f64) -> Result<Self> {
        let n = normal.norm();
        if !(n > 0.0) || height.is_nan() {
            return Err(Error::domain("half-space needs a nonzero normal"));
        }
        Ok(HalfSpace { normal: normal / n, height })
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.dot(&self.normal) < self.height
    }
}

/// A direction set together with a hemisphere witness `w`: when present,
/// `⟨w, u⟩ < 0` for every member.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalSet {
    pub set: DirectionSet,
    pub strictly_in_hemisphere: bool,
    pub witness: Option<Point>,
}

impl SphericalSet {
    pub fn new(set: DirectionSet) -> Self {
        let witness = hemisphere_witness(set.dim, &set.directions);
        SphericalSet { set, strictly_in_hemisphere: witness.is_some(), witness }
    }

    pub fn from_directions(dim: usize, dirs: impl IntoIterator<Item = Point>, kind: DirectionKind) -> Self {
        Self::new(DirectionSet::new(dim, dirs, kind))
    }

    pub fn dim(&self) -> usize {
        self.set.dim
    }

    pub fn directions(&self) -> &[Point] {
        &self.set.directions
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    pub fn check_invariants(&self) -> Result<()> {
        self.set.check_invariants()?;
        if let Some(w) = self.witness {
            if self.set.iter().any(|u| w.dot(u) > -HEMISPHERE_MARGIN) {
                return Err(Error::domain("witness does not separate the set"));
            }
        }
        Ok(())
    }
}

/// Minimum-norm point of `conv(X)`. The set lies strictly inside the open
/// hemisphere `{⟨w,·⟩ < 0}` with `w = −m/‖m‖` iff `m ≠ 0`.
pub fn min_norm_point(dim: usize, dirs: &[Point]) -> Option<Point> {
    let hull = ConvexBody::from_points(dim, dirs).ok()?;
    let origin = Point::zeros();
    if hull.is_solid() && hull.signed_distance(&origin) <= 0.0 {
        return Some(origin);
    }
    Some(hull.distance_and_project(&origin).1)
}

/// Direction `w` with `⟨w, u⟩ ≤ −‖m‖ < 0` for all members, if one exists.
pub fn hemisphere_witness(dim: usize, dirs: &[Point]) -> Option<Point> {
    let m = min_norm_point(dim, dirs)?;
    let n = m.norm();
    (n > HEMISPHERE_MARGIN).then(|| -m / n)
}

/// `P(x′, t) = −x′/t` on the open southern hemisphere `t < 0`.
pub fn affine_projection(u: &Point, dim: usize) -> Result<Point> {
    let t = u[dim - 1];
    if !(t < 0.0) {
        return Err(Error::domain(format!("affine projection needs a negative last coordinate, got {t}")));
    }
    let mut x = Point::zeros();
    for a in 0..dim - 1 {
        x[a] = -u[a] / t;
    }
    Ok(x)
}

/// Inverse of [`affine_projection`]: `Q(x′) = (x′, −1)/√(1 + ‖x′‖²)`.
pub fn affine_lift(x: &Point, dim: usize) -> Point {
    let mut u = *x;
    for a in dim - 1..3 {
        u[a] = 0.0;
    }
    u[dim - 1] = -1.0;
    u / u.norm()
}

/// Strictness margin for duals at a given resolution.
pub fn default_dual_margin(angular_res: f64) -> f64 {
    angular_res.sin()
}

/// `X* = {M : ⟨N, M⟩ < −margin ∀ N ∈ X}` on the direction grid. A positive
/// margin gives the open dual shrunk into the interior; a negative margin
/// relaxes it towards the closed dual `⟨N, M⟩ ≤ 0`.
pub fn dual_set_with_margin(x: &SphericalSet, angular_res: f64, margin: f64) -> SphericalSet {
    let dim = x.dim();
    let grid = geom::direction_grid(dim, angular_res);
    let dirs: Vec<Point> = grid.iter().filter(|m| x.directions().iter().all(|n| n.dot(m) < -margin)).copied().collect();
    SphericalSet::new(DirectionSet::from_unit(dim, dirs, DirectionKind::Dual))
}

pub fn dual_set(x: &SphericalSet, angular_res: f64) -> Result<SphericalSet> {
    if x.is_empty() {
        return Err(Error::domain("dual of an empty set"));
    }
    Ok(dual_set_with_margin(x, angular_res, default_dual_margin(angular_res)))
}

/// Spherical convex hull computed by conjugating with `P`: rotate the
/// centre `−w` of the containing hemisphere to the south pole, project, take the Euclidean hull and pull the
/// grid back. Members of `X` are always kept.
pub fn spherical_convex_hull(x: &SphericalSet, angular_res: f64) -> Result<SphericalSet> {
    let dim = x.dim();
    if x.is_empty() {
        return Err(Error::domain("hull of an empty set"));
    }
    let w = hemisphere_witness(dim, x.directions()).ok_or(Error::AntipodalObstruction)?;
    let south = if dim == 2 { -Point::y() } else { -Point::z() };
    let rot = geom::rotation_between(&(-w), &south);
    let projected: Vec<Point> = x.directions().iter().map(|u| affine_projection(&(rot * u), dim)).collect::<Result<_>>()?;
    let scale = projected.iter().map(|p| p.norm()).fold(1.0, f64::max);
    let tol = 1e-12 * scale;
    let inside: Box<dyn Fn(&Point) -> bool> = if dim == 2 {
        let lo = projected.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        let hi = projected.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
        Box::new(move |p: &Point| p.x >= lo - tol && p.x <= hi + tol)
    } else {
        let hull = ConvexBody::from_points(2, &projected)?;
        Box::new(move |p: &Point| hull.signed_distance(p) <= tol)
    };
    let mut out: Vec<Point> = x.directions().to_vec();
    for u in geom::direction_grid(dim, angular_res).iter() {
        let r = rot * u;
        if r[dim - 1] < 0.0 {
            if let Ok(p) = affine_projection(&r, dim) {
                if inside(&p) {
                    out.push(*u);
                }
            }
        }
    }
    Ok(SphericalSet::new(DirectionSet::new(dim, out, x.set.kind)))
}

/// `ℒ_r(x; K) = {N : x + rN ∈ K°}` on the grid, united over the radii.
pub fn link(body: &ConvexBody, x: &Point, radii: &[f64], angular_res: f64) -> Result<SphericalSet> {
    if !body.is_solid() {
        return Err(Error::domain("link needs a body with nonempty interior"));
    }
    let tol = body.boundary_tol();
    if body.signed_distance(x).abs() > tol {
        return Err(Error::domain("link base point is not on the boundary"));
    }
    if radii.is_empty() {
        return Err(Error::domain("link needs at least one radius"));
    }
    let dim = body.dim();
    let grid = geom::direction_grid(dim, angular_res);
    let dirs: Vec<Point> = grid.iter().filter(|u| radii.iter().any(|&r| body.signed_distance(&(x + *u * r)) < -tol)).copied().collect();
    Ok(SphericalSet::new(DirectionSet::from_unit(dim, dirs, DirectionKind::Link)))
}

/// Supporting normals of `K₁ ∩ K₂` at `x`, dispatched on which boundary `x`
/// lies: `𝒩(x;K₁)` if `x` is interior to `K₂`, symmetrically, otherwise the
/// spherical hull of the union. `h` is the interior-test tolerance.
pub fn normals_of_intersection(k1: &ConvexBody, k2: &ConvexBody, x: &Point, angular_res: f64, h: f64) -> Result<SphericalSet> {
    if k1.dim() != k2.dim() {
        return Err(Error::domain("dimension mismatch"));
    }
    let (d1, d2) = (k1.signed_distance(x), k2.signed_distance(x));
    if d1.max(d2).abs() > h {
        return Err(Error::domain("point is not on the boundary of the intersection"));
    }
    let wrap = |set: DirectionSet| SphericalSet::new(DirectionSet::from_unit(set.dim, set.directions, DirectionKind::SupportingNormals));
    if d2 < -h && d1.abs() <= h {
        return Ok(wrap(supporting_normals(k1, &k1.distance_and_project(x).1, angular_res)?));
    }
    if d1 < -h && d2.abs() <= h {
        return Ok(wrap(supporting_normals(k2, &k2.distance_and_project(x).1, angular_res)?));
    }
    let on = |k: &ConvexBody| -> Result<Vec<Point>> {
        let y = if k.signed_distance(x) < 0.0 { nearest_boundary(k, x) } else { k.distance_and_project(x).1 };
        Ok(supporting_normals(k, &y, angular_res)?.directions)
    };
    let mut union = on(k1)?;
    union.extend(on(k2)?);
    let set = SphericalSet::from_directions(k1.dim(), union, DirectionKind::SupportingNormals);
    spherical_convex_hull(&set, angular_res)
}

/// Closest boundary point of a solid body from an interior point (nearest facet).
fn nearest_boundary(k: &ConvexBody, x: &Point) -> Point {
    k.facets()
        .iter()
        .map(|f| x - f.normal * (f.normal.dot(x) - f.offset))
        .min_by(|a, b| (a - x).norm_squared().total_cmp(&(b - x).norm_squared()))
        .unwrap_or(*x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{deg, p2, p3};

    #[test]
    fn projection_examples() {
        assert_eq!(affine_projection(&p3(0.0, 0.0, -1.0), 3).unwrap(), Point::zeros());
        let u = p3(1.0, 0.0, -1.0).normalize();
        assert!((affine_projection(&u, 3).unwrap() - p3(1.0, 0.0, 0.0)).norm() < 1e-15);
        assert!(affine_projection(&p3(0.0, 0.0, 1.0), 3).is_err());
        let back = affine_lift(&affine_projection(&u, 3).unwrap(), 3);
        assert!((back - u).norm() < 1e-12);
    }

    #[test]
    fn dual_of_south_pole_is_north_hemisphere() {
        let x = SphericalSet::from_directions(3, [p3(0.0, 0.0, -1.0)], DirectionKind::Generic);
        let d = dual_set(&x, deg(4.0)).unwrap();
        assert!(d.directions().iter().all(|u| u.z > 0.0));
        assert!(d.strictly_in_hemisphere);
    }

    #[test]
    fn hull_of_two_points_is_arc() {
        let x = SphericalSet::from_directions(2, [p2(1.0, 0.0), p2(0.0, 1.0)], DirectionKind::Generic);
        let h = spherical_convex_hull(&x, deg(1.0)).unwrap();
        assert_eq!(h.len(), 91);
        assert!(h.directions().iter().all(|u| u.x >= -1e-12 && u.y >= -1e-12));
    }

    #[test]
    fn antipodal_pair_has_no_hull() {
        let x = SphericalSet::from_directions(2, [p2(1.0, 0.0), p2(-1.0, 0.0)], DirectionKind::Generic);
        assert!(!x.strictly_in_hemisphere);
        assert!(matches!(spherical_convex_hull(&x, deg(1.0)), Err(Error::AntipodalObstruction)));
    }

    #[test]
    fn square_links() {
        let sq = ConvexBody::unit_square();
        let l = link(&sq, &p2(0.5, 0.0), &[0.1], deg(1.0)).unwrap();
        assert!(l.directions().iter().all(|u| u.y > 0.0));
        assert_eq!(l.len(), 179);
        let c = link(&sq, &p2(1.0, 1.0), &[0.1], deg(1.0)).unwrap();
        assert_eq!(c.len(), 89);
    }
}
