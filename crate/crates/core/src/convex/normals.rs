use serde::{Deserialize, Serialize};

use crate::convex::{ConvexBody, Degeneracy};
use crate::error::{Error, Result};
use crate::geom::{self, Point};

/// What a direction set represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionKind {
    SupportingNormals,
    Link,
    Dual,
    Generic,
}

/// Finite subset of the unit sphere of ℝ^dim.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    pub dim: usize,
    pub directions: Vec<Point>,
    pub kind: DirectionKind,
}

#[derive(Serialize, Deserialize)]
struct DirectionSetJson {
    dim: usize,
    directions: Vec<Vec<f64>>,
    kind: DirectionKind,
}

/// Angular tolerance below which two directions are the same entry.
pub const DUPLICATE_ANGLE: f64 = 1e-9;

impl DirectionSet {
    /// Normalises the inputs and drops zero vectors and duplicates.
    pub fn new(dim: usize, directions: impl IntoIterator<Item = Point>, kind: DirectionKind) -> Self {
        let cos_dup = DUPLICATE_ANGLE.cos();
        let mut out: Vec<Point> = Vec::new();
        for d in directions {
            let n = d.norm();
            if n < 1e-300 {
                continue;
            }
            let u = d / n;
            if !out.iter().any(|v| v.dot(&u) >= cos_dup) {
                out.push(u);
            }
        }
        DirectionSet { dim, directions: out, kind }
    }

    /// Builds from directions already known to be distinct unit vectors.
    pub fn from_unit(dim: usize, directions: Vec<Point>, kind: DirectionKind) -> Self {
        DirectionSet { dim, directions, kind }
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.directions.iter()
    }

    pub fn check_invariants(&self) -> Result<()> {
        for u in &self.directions {
            if (u.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::domain(format!("direction {u:?} is not unit")));
            }
        }
        let cos_dup = DUPLICATE_ANGLE.cos();
        for (i, u) in self.directions.iter().enumerate() {
            if self.directions[i + 1..].iter().any(|v| v.dot(u) >= cos_dup) {
                return Err(Error::domain("duplicate direction"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let j = DirectionSetJson {
            dim: self.dim,
            directions: self.directions.iter().map(|u| geom::to_vec(u, self.dim)).collect(),
            kind: self.kind,
        };
        serde_json::to_string(&j).expect("direction set serialises")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: DirectionSetJson = serde_json::from_str(s)?;
        let dirs = j
            .directions
            .iter()
            .map(|c| {
                if c.len() != j.dim {
                    return Err(Error::Parse(format!("direction of length {} in dim {}", c.len(), j.dim)));
                }
                geom::from_slice(c).ok_or_else(|| Error::Parse("bad direction".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DirectionSet::new(j.dim, dirs, j.kind))
    }
}

/// Angular tolerance used to decide grid membership of a normal cone: half
/// the grid spacing in the plane, slightly more than the icosphere
/// circumradius in space.
pub fn cone_tolerance(dim: usize, angular_res: f64) -> f64 {
    let spacing = geom::grid_spacing(dim, angular_res);
    if dim == 2 {
        0.5 * spacing * 0.999
    } else {
        0.62 * spacing
    }
}

/// All grid directions `u` that support `K` at the boundary point `x`,
/// i.e. `⟨v − x, u⟩ ≤ 0` for every vertex `v`, up to the angular resolution.
pub fn supporting_normals(body: &ConvexBody, x: &Point, angular_res: f64) -> Result<DirectionSet> {
    let tol = body.boundary_tol();
    let sd = body.signed_distance(x);
    if sd < -tol {
        return Err(Error::domain("no supporting normal at interior point"));
    }
    if sd > tol {
        return Err(Error::domain(format!("point is not in the body (distance {sd:.3e})")));
    }
    let dim = body.dim();
    let grid = geom::direction_grid(dim, angular_res);
    let sin_tol = cone_tolerance(dim, angular_res).sin();

    // edge directions from x that generate the tangent cone
    let (neighbours, centre): (Vec<Point>, Option<Point>) = if body.degeneracy() == Degeneracy::Solid {
        let active = body.active_facets(x, tol.max(1e-10));
        let mut idx: Vec<usize> = active.iter().flat_map(|&f| body.facets()[f].vertices.clone()).collect();
        idx.sort_unstable();
        idx.dedup();
        let centre: Point = active.iter().map(|&f| body.facets()[f].normal).sum();
        (idx.iter().map(|&i| body.vertices()[i]).collect(), Some(centre))
    } else {
        (body.vertices().to_vec(), None)
    };
    let dirs: Vec<(Point, f64)> = neighbours
        .iter()
        .filter_map(|v| {
            let w = v - x;
            let n = w.norm();
            (n > tol).then(|| (w / n, n))
        })
        .collect();
    let inward = body.interior_point() - x;
    let mut out: Vec<Point> = grid
        .iter()
        .filter(|u| {
            if centre.is_some() && u.dot(&inward) >= 0.0 {
                return false;
            }
            dirs.iter().all(|(w, _)| w.dot(u) <= sin_tol)
        })
        .copied()
        .collect();
    if out.is_empty() {
        // the exact cone lies between grid directions; report its nearest grid direction
        let c = centre.unwrap_or_else(|| -inward).normalize();
        let best = grid.iter().max_by(|a, b| a.dot(&c).total_cmp(&b.dot(&c))).copied();
        out.extend(best);
    }
    Ok(DirectionSet::from_unit(dim, out, DirectionKind::SupportingNormals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{deg, p2};

    #[test]
    fn smooth_disk_point_has_single_normal() {
        let disk = ConvexBody::disk(Point::zeros(), 1.0, 720);
        let n = supporting_normals(&disk, &p2(1.0, 0.0), deg(1.0)).unwrap();
        assert_eq!(n.len(), 1);
        assert!((n.directions[0] - p2(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn square_corner_matches_brute_force() {
        let sq = ConvexBody::unit_square();
        let x = p2(1.0, 1.0);
        let n = supporting_normals(&sq, &x, deg(1.0)).unwrap();
        // brute force: ⟨v − x, u⟩ ≤ 0 for all four vertices on the 1° grid
        let expected: Vec<Point> =
            geom::direction_grid(2, deg(1.0)).iter().filter(|u| sq.vertices().iter().all(|v| (v - x).dot(u) <= 1e-12)).copied().collect();
        assert_eq!(expected.len(), 91);
        assert_eq!(n.directions, expected);
    }

    #[test]
    fn segment_has_both_normals() {
        let s = ConvexBody::segment(p2(0.0, 0.0), p2(1.0, 0.0), 2).unwrap();
        let n = supporting_normals(&s, &p2(0.5, 0.0), deg(1.0)).unwrap();
        assert!(n.iter().any(|u| (u - p2(0.0, 1.0)).norm() < 1e-12));
        assert!(n.iter().any(|u| (u - p2(0.0, -1.0)).norm() < 1e-12));
    }

    #[test]
    fn interior_point_is_rejected() {
        let sq = ConvexBody::unit_square();
        let e = supporting_normals(&sq, &p2(0.5, 0.5), deg(1.0)).unwrap_err();
        assert!(e.to_string().contains("no supporting normal at interior point"));
    }

    #[test]
    fn json_round_trip() {
        let s = DirectionSet::new(2, vec![p2(1.0, 0.0), p2(0.0, 2.0)], DirectionKind::Link);
        let back = DirectionSet::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        s.check_invariants().unwrap();
    }
}
