//! Smoothed intersections: the sublevel set `{d_s ≤ r}` of the mollified
//! distance to `K₁ ∩ K₂`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::barrier::curvature::level_set_curvature;
use crate::barrier::mollify::{mollify, Mollifier};
use crate::convex::{hausdorff_distance, intersection, ConvexBody, Hull};
use crate::error::{Error, Result};
use crate::field::ScalarGrid;
use crate::geom::{self, Point};

#[derive(Debug, Clone)]
pub struct SmoothOptions {
    /// Offset level `r`; defaults to the automatic window.
    pub r: Option<f64>,
    /// Mollification scale; defaults to `r/8`.
    pub s: Option<f64>,
    /// Distance grid spacing; defaults to `s/4`.
    pub spacing: Option<f64>,
    /// Iteration index `m` of the window bound `r < 2/(3m)`.
    pub iteration: usize,
    /// Rays used to sample the level set (plane) or icosphere level (space).
    pub rays: usize,
    pub max_nodes: usize,
}

impl Default for SmoothOptions {
    fn default() -> Self {
        SmoothOptions { r: None, s: None, spacing: None, iteration: 1, rays: 2880, max_nodes: 8_000_000 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SmoothReport {
    pub r: f64,
    pub s: f64,
    pub spacing: f64,
    pub min_curvature: f64,
    pub max_curvature: f64,
    pub contains_intersection: bool,
    pub hausdorff: f64,
    pub samples: usize,
}

#[derive(Debug, Clone)]
pub struct SmoothedIntersection {
    pub body: ConvexBody,
    pub intersection: ConvexBody,
    /// Level-set samples and their Gauss curvatures.
    pub points: Vec<Point>,
    pub curvature: Vec<f64>,
    pub report: SmoothReport,
}

/// Exact signed distance to a convex polygon, scanning only the edges that
/// can be closer than the edge hit by the ray from the centre.
struct PolygonDistance {
    v: Vec<Point>,
    c: Point,
    /// Unwrapped vertex angles about `c`, increasing.
    angles: Vec<f64>,
}

fn seg_dist(x: &Point, a: &Point, b: &Point) -> f64 {
    let ab = b - a;
    let t = ((x - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (x - (a + ab * t)).norm()
}

impl PolygonDistance {
    fn new(vertices: &[Point], c: Point) -> Self {
        let base = (vertices[0].y - c.y).atan2(vertices[0].x - c.x);
        let mut angles = Vec::with_capacity(vertices.len());
        for v in vertices {
            let mut a = (v.y - c.y).atan2(v.x - c.x) - base;
            while a < 0.0 {
                a += 2.0 * PI;
            }
            angles.push(a);
        }
        PolygonDistance { v: vertices.to_vec(), c, angles }
    }

    fn angle(&self, x: &Point) -> f64 {
        let base = (self.v[0].y - self.c.y).atan2(self.v[0].x - self.c.x);
        let mut a = (x.y - self.c.y).atan2(x.x - self.c.x) - base;
        while a < 0.0 {
            a += 2.0 * PI;
        }
        while a >= 2.0 * PI {
            a -= 2.0 * PI;
        }
        a
    }

    fn edge(&self, i: usize) -> (Point, Point) {
        let n = self.v.len();
        (self.v[i % n], self.v[(i + 1) % n])
    }

    fn span(&self, i: usize) -> (f64, f64) {
        let n = self.v.len();
        let a = self.angles[i % n];
        let b = if (i + 1).is_multiple_of(n) { 2.0 * PI } else { self.angles[(i + 1) % n] };
        (a, b)
    }

    /// Signed distance and the cheap upper bound `D₀` on its magnitude.
    fn eval(&self, x: &Point, exact_below: f64) -> f64 {
        let n = self.v.len();
        let th = self.angle(x);
        let i = self.angles.partition_point(|a| *a <= th).saturating_sub(1);
        let (a, b) = self.edge(i);
        let inside = (b - a).xy().perp(&(x - a).xy()) >= 0.0;
        let sign = if inside { -1.0 } else { 1.0 };
        let d0 = seg_dist(x, &a, &b);
        if d0 > exact_below {
            return sign * d0;
        }
        let rx = (x - self.c).xy().norm();
        let mut best = d0;
        if rx <= d0 {
            for j in 0..n {
                let (a, b) = self.edge(j);
                best = best.min(seg_dist(x, &a, &b));
            }
            return sign * best;
        }
        let delta = (d0 / rx).min(1.0).asin() + 1e-12;
        let hit = |j: usize| {
            let (lo, hi) = self.span(j);
            let dist = |t: f64| {
                let d = (t - th).abs();
                d.min(2.0 * PI - d)
            };
            (lo..=hi).contains(&th) || dist(lo) <= delta || dist(hi) <= delta
        };
        for step in 1..n {
            let j = (i + step) % n;
            if !hit(j) {
                break;
            }
            let (a, b) = self.edge(j);
            best = best.min(seg_dist(x, &a, &b));
        }
        for step in 1..n {
            let j = (i + n - step) % n;
            if !hit(j) {
                break;
            }
            let (a, b) = self.edge(j);
            best = best.min(seg_dist(x, &a, &b));
        }
        sign * best
    }
}

/// Inradius about the interior point and the largest vertex distance.
fn radii(body: &ConvexBody) -> (Point, f64, f64) {
    let c = body.interior_point();
    let rin = body.facets().iter().map(|f| f.offset - f.normal.dot(&c)).fold(f64::INFINITY, f64::min);
    let rout = body.vertices().iter().map(|v| (v - c).norm()).fold(0.0, f64::max);
    (c, rin, rout)
}

/// `(r, s)` from the window `r ≤ min(ρ/4, 2/(3m), (1/(k−ε) − 1/k)/2)`, `s = r/8`.
pub fn smoothing_window(inter: &ConvexBody, k: f64, eps: f64, opts: &SmoothOptions) -> Result<(f64, f64)> {
    let (_, rho, _) = radii(inter);
    let m = opts.iteration.max(1) as f64;
    let curvature_room = if k > eps { 0.5 * (1.0 / (k - eps) - 1.0 / k) } else { f64::INFINITY };
    let r = opts.r.unwrap_or_else(|| (rho / 4.0).min(2.0 / (3.0 * m)).min(curvature_room));
    let s = opts.s.unwrap_or(r / 8.0);
    if !(r > 0.0 && r.is_finite() && s > 0.0 && s < r) {
        return Err(Error::SmoothingWindow(format!("r = {r:.3e}, s = {s:.3e}")));
    }
    Ok((r, s))
}

/// Smooths `K₁ ∩ K₂` at curvature level `k − ε`.
pub fn smooth_intersection(k1: &ConvexBody, k2: &ConvexBody, k: f64, eps: f64, opts: &SmoothOptions) -> Result<SmoothedIntersection> {
    if !(k > 0.0 && eps >= 0.0) {
        return Err(Error::domain("curvature bound must be positive"));
    }
    let inter = intersection(k1, k2)?;
    if !inter.is_solid() {
        return Err(Error::domain("intersection is degenerate"));
    }
    let dim = inter.dim();
    let (r, s) = smoothing_window(&inter, k, eps, opts)?;
    let h = opts.spacing.unwrap_or(s / 4.0);
    let moll = Mollifier::new(dim, s)?;
    let (c, rin, rout) = radii(&inter);
    let band = 4.0 * (r + 3.0 * s) * (rout / rin).max(1.0);

    let (lo, hi) = geom::bounding_box(inter.vertices());
    let grow = Point::from_element(r + 4.0 * s);
    let (mut lo, mut hi) = (lo - grow, hi + grow);
    if dim == 2 {
        lo.z = 0.0;
        hi.z = 0.0;
    }
    let est: f64 = (0..dim).map(|a| (hi[a] - lo[a]) / h + 1.0).product();
    if est > opts.max_nodes as f64 {
        return Err(Error::SmoothingWindow(format!("distance grid would need {est:.0} nodes")));
    }
    let mut grid = ScalarGrid::covering(dim, lo, hi, h, 0.0);
    let values: Vec<f64> = match inter.hull() {
        Hull::Polygon { vertices, .. } if dim == 2 => {
            let pd = PolygonDistance::new(vertices, c);
            (0..grid.len()).into_par_iter().map(|i| pd.eval(&grid.node(i), band)).collect()
        }
        _ => (0..grid.len()).into_par_iter().map(|i| inter.signed_distance(&grid.node(i))).collect(),
    };
    grid.values = values;
    let ds = mollify(&grid, &moll)?;

    let dirs: Vec<Point> = if dim == 2 {
        (0..opts.rays)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / opts.rays as f64;
                geom::p2(a.cos(), a.sin())
            })
            .collect()
    } else {
        geom::icosphere((opts.rays as f64).log(4.0).round().clamp(2.0, 6.0) as u32).0
    };
    let samples: Vec<Result<(Point, f64)>> = dirs
        .par_iter()
        .map(|u| {
            let (_, t1) = inter.ray_interval(&c, u).ok_or_else(|| Error::domain("ray misses the intersection"))?;
            let at = |t: f64| ds.interpolate(&(c + u * t)).unwrap_or(f64::INFINITY) - r;
            let (mut a, mut b) = (t1, t1 + 2.0 * (r + s) * (rout / rin).max(1.0));
            if !(at(a) < 0.0 && at(b) > 0.0) {
                return Err(Error::SmoothingWindow("level set not bracketed along a ray".into()));
            }
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if at(m) < 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            let p = c + u * (0.5 * (a + b));
            let (p, shape) = level_set_curvature(&ds, r, &p)?;
            Ok((p, shape.gauss_curvature()))
        })
        .collect();
    let samples = samples.into_iter().collect::<Result<Vec<_>>>()?;
    let points: Vec<Point> = samples.iter().map(|s| s.0).collect();
    let curvature: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let body = ConvexBody::from_points(dim, &points)?.with_resolution(inter.resolution().max(h));
    let tol = 1e-9 * inter.diameter();
    let contains_intersection = inter.vertices().iter().all(|v| body.signed_distance(v) <= tol);
    let hausdorff = hausdorff_distance(&body, &inter)?;
    let report = SmoothReport {
        r,
        s,
        spacing: h,
        min_curvature: curvature.iter().copied().fold(f64::INFINITY, f64::min),
        max_curvature: curvature.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        contains_intersection,
        hausdorff,
        samples: points.len(),
    };
    Ok(SmoothedIntersection { body, intersection: inter, points, curvature, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::p2;

    #[test]
    fn polygon_distance_matches_brute_force() {
        let body = ConvexBody::disk(p2(0.1, -0.2), 1.0, 300);
        let Hull::Polygon { vertices, .. } = body.hull() else { panic!() };
        let pd = PolygonDistance::new(vertices, body.interior_point());
        let mut rng = geom::seeded_rng(3);
        use rand::Rng;
        for _ in 0..2000 {
            let x = p2(rng.random_range(-1.6..1.6), rng.random_range(-1.6..1.6));
            let exact = body.signed_distance(&x);
            assert!((pd.eval(&x, f64::INFINITY) - exact).abs() < 1e-12, "{x:?}");
        }
    }
}
