use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::convex::hull::{closest_on_segment, closest_on_triangle, hull_2d, hull_3d, Hull};
use crate::error::{Error, Result};
use crate::field::ScalarGrid;
use crate::geom::{self, p2, p3, Point};

/// Supporting hyperplane `⟨normal, x⟩ = offset` of a solid body; `vertices`
/// index the body's vertex list (2 in the plane, 3 in space).
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub normal: Point,
    pub offset: f64,
    pub vertices: Vec<usize>,
}

/// Which flat a degenerate body spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    /// Nonempty interior in the ambient space.
    Solid,
    Point,
    Segment,
    /// Planar polygon in ℝ³.
    Planar,
}

/// Compact convex body of ℝ² or ℝ³, stored as the convex hull of its vertex
/// cloud. Facets, support samples and the signed-distance grid are caches
/// derived from the vertices.
#[derive(Debug, Clone)]
pub struct ConvexBody {
    dim: usize,
    hull: Hull,
    vertices: Vec<Point>,
    facets: Vec<Facet>,
    degeneracy: Degeneracy,
    interior: Point,
    resolution: f64,
    diameter: OnceLock<f64>,
    support: OnceLock<Vec<f64>>,
    sdf: Option<ScalarGrid>,
}

/// Angular resolution of the cached support samples.
pub const SUPPORT_SAMPLE_RES_DEG: [f64; 2] = [1.0, 4.0];

impl ConvexBody {
    /// Convex hull of a nonempty finite point set in ℝ^dim.
    pub fn from_points(dim: usize, points: &[Point]) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::domain(format!("unsupported dimension {dim}")));
        }
        if points.is_empty() {
            return Err(Error::domain("empty point set"));
        }
        if points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::domain("non-finite coordinate"));
        }
        let hull = if dim == 2 { hull_2d(points) } else { hull_3d(points) };
        Ok(Self::from_hull(dim, hull))
    }

    fn from_hull(dim: usize, hull: Hull) -> Self {
        let vertices = hull.vertices();
        let interior = vertices.iter().sum::<Point>() / vertices.len() as f64;
        let (degeneracy, facets) = match (&hull, dim) {
            (Hull::Point(_), _) => (Degeneracy::Point, Vec::new()),
            (Hull::Segment(..), _) => (Degeneracy::Segment, Vec::new()),
            (Hull::Polygon { .. }, 3) => (Degeneracy::Planar, Vec::new()),
            (Hull::Polygon { vertices, .. }, _) => {
                let n = vertices.len();
                let facets = (0..n)
                    .map(|i| {
                        let a = vertices[i];
                        let b = vertices[(i + 1) % n];
                        let normal = p2(b.y - a.y, a.x - b.x).normalize();
                        Facet { normal, offset: normal.dot(&a), vertices: vec![i, (i + 1) % n] }
                    })
                    .collect();
                (Degeneracy::Solid, facets)
            }
            (Hull::Polytope { vertices, faces }, _) => {
                let facets = faces
                    .iter()
                    .map(|f| {
                        let n = (vertices[f[1]] - vertices[f[0]]).cross(&(vertices[f[2]] - vertices[f[0]]));
                        let normal = n.normalize();
                        Facet { normal, offset: normal.dot(&vertices[f[0]]), vertices: f.to_vec() }
                    })
                    .collect();
                (Degeneracy::Solid, facets)
            }
        };
        ConvexBody {
            dim,
            hull,
            vertices,
            facets,
            degeneracy,
            interior,
            resolution: 0.0,
            diameter: OnceLock::new(),
            support: OnceLock::new(),
            sdf: None,
        }
    }

    /// Declares the sampling resolution of a body approximating a smooth one.
    /// Exact polytopes keep resolution 0.
    pub fn with_resolution(mut self, resolution: f64) -> Self {
        self.resolution = resolution;
        self
    }

    /// Attaches a signed-distance grid with spacing `h` over the bounding box
    /// grown by `margin`.
    pub fn with_sdf(mut self, h: f64, margin: f64) -> Self {
        self.sdf = Some(self.sdf_grid(h, margin));
        self
    }

    pub fn unit_square() -> Self {
        Self::polygon(&[p2(0.0, 0.0), p2(1.0, 0.0), p2(1.0, 1.0), p2(0.0, 1.0)]).unwrap()
    }

    pub fn polygon(vertices: &[Point]) -> Result<Self> {
        Self::from_points(2, vertices)
    }

    pub fn segment(a: Point, b: Point, dim: usize) -> Result<Self> {
        Self::from_points(dim, &[a, b])
    }

    /// Disk sampled by `samples` equally spaced boundary points.
    pub fn disk(center: Point, radius: f64, samples: usize) -> Self {
        let pts: Vec<Point> = (0..samples)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / samples as f64;
                center + p2(radius * a.cos(), radius * a.sin())
            })
            .collect();
        Self::from_points(2, &pts).unwrap().with_resolution(2.0 * PI * radius / samples as f64)
    }

    /// Ball sampled by an icosphere with the given subdivision level.
    pub fn ball(center: Point, radius: f64, subdivisions: u32) -> Self {
        let (v, _) = geom::icosphere(subdivisions);
        let pts: Vec<Point> = v.iter().map(|u| center + u * radius).collect();
        let res = radius * 2f64.atan() / 2f64.powi(subdivisions as i32);
        Self::from_points(3, &pts).unwrap().with_resolution(res)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn hull(&self) -> &Hull {
        &self.hull
    }

    pub fn degeneracy(&self) -> Degeneracy {
        self.degeneracy
    }

    pub fn is_solid(&self) -> bool {
        self.degeneracy == Degeneracy::Solid
    }

    /// Sampling resolution (0 for exact polytopes).
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// A point in the relative interior (vertex centroid).
    pub fn interior_point(&self) -> Point {
        self.interior
    }

    pub fn sdf(&self) -> Option<&ScalarGrid> {
        self.sdf.as_ref()
    }

    pub fn diameter(&self) -> f64 {
        *self.diameter.get_or_init(|| {
            let v = &self.vertices;
            let mut best: f64 = 0.0;
            for i in 0..v.len() {
                for j in i + 1..v.len() {
                    best = best.max((v[i] - v[j]).norm_squared());
                }
            }
            best.sqrt()
        })
    }

    /// Support function `h(u) = max_v ⟨v, u⟩`.
    pub fn support(&self, u: &Point) -> f64 {
        self.vertices.iter().map(|v| v.dot(u)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Support values on the shared direction grid (1° in the plane, 4° in space).
    pub fn support_samples(&self) -> &[f64] {
        self.support.get_or_init(|| geom::direction_grid(self.dim, Self::support_res(self.dim)).iter().map(|u| self.support(u)).collect())
    }

    pub fn support_res(dim: usize) -> f64 {
        SUPPORT_SAMPLE_RES_DEG[dim - 2].to_radians()
    }

    /// Signed distance: negative inside, exact for polytopes. Degenerate
    /// bodies have no interior, so the result is the plain distance.
    pub fn signed_distance(&self, x: &Point) -> f64 {
        if !self.is_solid() {
            return self.distance_and_project(x).0;
        }
        let mut worst = f64::NEG_INFINITY;
        for f in &self.facets {
            worst = worst.max(f.normal.dot(x) - f.offset);
        }
        if worst <= 0.0 {
            worst
        } else {
            self.distance_and_project(x).0
        }
    }

    pub fn contains(&self, x: &Point, tol: f64) -> bool {
        self.signed_distance(x) <= tol
    }

    /// Distance to the body and the unique closest point.
    pub fn distance_and_project(&self, x: &Point) -> (f64, Point) {
        // facets the point is (numerically) on also compete, so a far facet that
        // round-off puts the point outside of cannot win alone
        let near = self.boundary_tol();
        let y = match &self.hull {
            Hull::Point(p) => *p,
            Hull::Segment(a, b) => closest_on_segment(x, a, b),
            Hull::Polygon { vertices, normal } if self.dim == 3 => project_planar(x, vertices, normal),
            Hull::Polygon { vertices, .. } => {
                let n = vertices.len();
                let mut best = *x;
                let mut best_d = f64::INFINITY;
                let mut outside = false;
                for (i, f) in self.facets.iter().enumerate() {
                    let d = f.normal.dot(x) - f.offset;
                    outside |= d > 0.0;
                    if d > -near {
                        let q = closest_on_segment(x, &vertices[i], &vertices[(i + 1) % n]);
                        let d = (q - x).norm_squared();
                        if d < best_d {
                            best_d = d;
                            best = q;
                        }
                    }
                }
                if outside {
                    best
                } else {
                    *x
                }
            }
            Hull::Polytope { vertices, faces } => {
                let mut best = *x;
                let mut best_d = f64::INFINITY;
                let mut outside = false;
                for (f, tri) in self.facets.iter().zip(faces) {
                    let d = f.normal.dot(x) - f.offset;
                    outside |= d > 0.0;
                    if d > -near {
                        let q = closest_on_triangle(x, &vertices[tri[0]], &vertices[tri[1]], &vertices[tri[2]]);
                        let d = (q - x).norm_squared();
                        if d < best_d {
                            best_d = d;
                            best = q;
                        }
                    }
                }
                if outside {
                    best
                } else {
                    *x
                }
            }
        };
        ((x - y).norm(), y)
    }

    /// Parameter interval `[t0, t1]` of `{origin + t·dir} ∩ K` for solid bodies.
    pub fn ray_interval(&self, origin: &Point, dir: &Point) -> Option<(f64, f64)> {
        if !self.is_solid() {
            return None;
        }
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for f in &self.facets {
            let a = f.normal.dot(dir);
            let b = f.offset - f.normal.dot(origin);
            if a.abs() < 1e-300 {
                if b < 0.0 {
                    return None;
                }
            } else if a > 0.0 {
                hi = hi.min(b / a);
            } else {
                lo = lo.max(b / a);
            }
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// Lebesgue measure (area in the plane, volume in space).
    pub fn volume(&self) -> f64 {
        match &self.hull {
            Hull::Polygon { vertices, .. } if self.dim == 2 => {
                let n = vertices.len();
                0.5 * (0..n)
                    .map(|i| {
                        let a = vertices[i];
                        let b = vertices[(i + 1) % n];
                        a.x * b.y - a.y * b.x
                    })
                    .sum::<f64>()
            }
            Hull::Polytope { vertices, faces } => {
                let c = self.interior;
                faces.iter().map(|f| (vertices[f[0]] - c).dot(&(vertices[f[1]] - c).cross(&(vertices[f[2]] - c))) / 6.0).sum()
            }
            _ => 0.0,
        }
    }

    /// Signed-distance samples over the bounding box grown by `margin`.
    pub fn sdf_grid(&self, h: f64, margin: f64) -> ScalarGrid {
        let (lo, hi) = geom::bounding_box(&self.vertices);
        let m = Point::from_element(margin);
        let (mut lo, mut hi) = (lo - m, hi + m);
        if self.dim == 2 {
            lo.z = 0.0;
            hi.z = 0.0;
        }
        let mut g = ScalarGrid::covering(self.dim, lo, hi, h, 0.0);
        for i in 0..g.len() {
            g.values[i] = self.signed_distance(&g.node(i));
        }
        g
    }

    /// Indices of the facets containing `x` within `tol`.
    pub fn active_facets(&self, x: &Point, tol: f64) -> Vec<usize> {
        self.facets.iter().enumerate().filter(|(_, f)| (f.normal.dot(x) - f.offset).abs() <= tol).map(|(i, _)| i).collect()
    }

    /// Boundary tolerance used for "x lies on ∂K" tests.
    pub fn boundary_tol(&self) -> f64 {
        (1e-9 * self.diameter().max(1e-12)).max(1e-12) + self.resolution * 1e-6
    }

    /// Boundary triangulation (space) or closed polyline (plane) for export.
    pub fn boundary_triangles(&self) -> Vec<[usize; 3]> {
        match &self.hull {
            Hull::Polytope { faces, .. } => faces.clone(),
            _ => Vec::new(),
        }
    }
}

fn project_planar(x: &Point, poly: &[Point], normal: &Point) -> Point {
    let on_plane = x - normal * (x - poly[0]).dot(normal);
    let n = poly.len();
    let inside = (0..n).all(|i| {
        let e = poly[(i + 1) % n] - poly[i];
        e.cross(&(on_plane - poly[i])).dot(normal) >= 0.0
    });
    if inside {
        return on_plane;
    }
    (0..n)
        .map(|i| closest_on_segment(x, &poly[i], &poly[(i + 1) % n]))
        .min_by(|a, b| (a - x).norm_squared().total_cmp(&(b - x).norm_squared()))
        .unwrap()
}

/// Convex hull of a finite point set (the convex-kernel `convex_hull` operation).
pub fn convex_hull(dim: usize, points: &[Point]) -> Result<ConvexBody> {
    ConvexBody::from_points(dim, points)
}

/// Unit cube `[0,1]³`.
pub fn unit_cube() -> ConvexBody {
    let pts: Vec<Point> = (0..8).map(|i| p3((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64)).collect();
    ConvexBody::from_points(3, &pts).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn square_distance_examples() {
        let sq = ConvexBody::unit_square();
        let (d, y) = sq.distance_and_project(&p2(2.0, 2.0));
        assert_relative_eq!(d, 2f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!((y - p2(1.0, 1.0)).norm(), 0.0, epsilon = 1e-14);
        let x = p2(0.3, 0.6);
        assert_eq!(sq.distance_and_project(&x), (0.0, x));
        assert_relative_eq!(sq.signed_distance(&x), -0.3, epsilon = 1e-14);
        assert_relative_eq!(sq.volume(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn disk_distance_example() {
        let disk = ConvexBody::disk(Point::zeros(), 1.0, 720);
        let (d, y) = disk.distance_and_project(&p2(2.0, 0.0));
        assert_relative_eq!(d, 1.0, epsilon = 1e-12);
        assert_relative_eq!((y - p2(1.0, 0.0)).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn ball_volume_within_one_percent() {
        let b = ConvexBody::ball(Point::zeros(), 1.0, 4);
        let exact = 4.0 * PI / 3.0;
        assert!((b.volume() - exact).abs() / exact < 0.01);
    }

    #[test]
    fn cube_ray_and_support() {
        let c = unit_cube();
        let (t0, t1) = c.ray_interval(&p3(0.5, 0.5, -1.0), &Point::z()).unwrap();
        assert_relative_eq!(t0, 1.0, epsilon = 1e-12);
        assert_relative_eq!(t1, 2.0, epsilon = 1e-12);
        assert_relative_eq!(c.support(&p3(1.0, 1.0, 1.0).normalize()), 3f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(c.volume(), 1.0, epsilon = 1e-12);
        let (d, y) = c.distance_and_project(&p3(2.0, 0.5, 0.5));
        assert_relative_eq!(d, 1.0, epsilon = 1e-12);
        assert_relative_eq!((y - p3(1.0, 0.5, 0.5)).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn support_samples_match_vertices() {
        let b = ConvexBody::disk(p2(0.2, -0.1), 0.7, 64);
        let grid = geom::direction_grid(2, ConvexBody::support_res(2));
        for (u, s) in grid.iter().zip(b.support_samples()) {
            let direct = b.vertices().iter().map(|v| v.dot(u)).fold(f64::NEG_INFINITY, f64::max);
            assert!((direct - s).abs() <= 1e-12);
        }
    }

    #[test]
    fn sdf_sign_matches_membership() {
        let b = ConvexBody::disk(Point::zeros(), 1.0, 90).with_sdf(0.1, 0.3);
        let g = b.sdf().unwrap();
        for i in 0..g.len() {
            let x = g.node(i);
            assert_eq!(g.values[i] <= 0.0, b.contains(&x, 0.0));
        }
    }

    #[test]
    fn segment_is_degenerate() {
        let s = ConvexBody::segment(p2(0.0, 0.0), p2(1.0, 0.0), 2).unwrap();
        assert_eq!(s.degeneracy(), Degeneracy::Segment);
        assert_relative_eq!(s.signed_distance(&p2(0.5, 0.5)), 0.5, epsilon = 1e-14);
        assert_eq!(s.volume(), 0.0);
    }
}
