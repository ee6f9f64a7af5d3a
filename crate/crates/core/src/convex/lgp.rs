//! Local geodesic property: some open segment through `x` stays in `K`.
//! Tested through `0 ∈ conv(D_r)` for the sampled directions
//! `D_r = {(y − x)/r : y ∈ K ∩ ∂B_r(x)}`.

use crate::convex::ConvexBody;
use crate::error::{Error, Result};
use crate::geom::{self, Point};

/// Feasibility margin of the origin-in-hull test.
pub const LGP_MARGIN: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct LgpOptions {
    pub radii: Option<Vec<f64>>,
    pub angular_res: f64,
}

impl Default for LgpOptions {
    fn default() -> Self {
        LgpOptions { radii: None, angular_res: 1f64.to_radians() }
    }
}

/// Outcome of the test at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LgpRadius {
    pub r: f64,
    /// Signed distance of the origin to `conv(D_r)` (≤ margin means inside).
    pub origin_distance: f64,
    pub directions: usize,
    /// Radii below the body's sampling resolution only see facets and are skipped.
    pub skipped: bool,
}

#[derive(Debug, Clone)]
pub struct LgpReport {
    pub interior: bool,
    pub radii: Vec<LgpRadius>,
    pub holds: bool,
}

/// Default radii `diam(K)·2^{-j}`, `j = 3..=8`.
pub fn default_radii(body: &ConvexBody) -> Vec<f64> {
    let d = body.diameter();
    (3..=8).map(|j| d * 2f64.powi(-j)).collect()
}

fn inside(body: &ConvexBody, p: &Point, tol: f64) -> bool {
    body.signed_distance(p) <= tol
}

/// Sampled `D_r`, with each sign change between neighbouring grid directions
/// refined by bisection so that the extreme directions are resolved.
pub fn sample_link_directions(body: &ConvexBody, x: &Point, r: f64, angular_res: f64) -> Vec<Point> {
    let dim = body.dim();
    let tol = body.boundary_tol();
    let grid = geom::direction_grid(dim, angular_res);
    let member: Vec<bool> = grid.iter().map(|u| inside(body, &(x + u * r), tol)).collect();
    let mut out: Vec<Point> = grid.iter().zip(&member).filter(|(_, m)| **m).map(|(u, _)| *u).collect();
    let refine = |a: &Point, b: &Point| -> Point {
        // a inside, b outside; bisect on the great-circle arc
        let (mut lo, mut hi) = (*a, *b);
        for _ in 0..40 {
            let mid = (lo + hi).normalize();
            if inside(body, &(x + mid * r), tol) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let edge = |i: usize, j: usize, out: &mut Vec<Point>| {
        if member[i] != member[j] && grid[i].dot(&grid[j]) > -0.5 {
            let (a, b) = if member[i] { (i, j) } else { (j, i) };
            out.push(refine(&grid[a], &grid[b]));
        }
    };
    if dim == 2 {
        let n = grid.len();
        for i in 0..n {
            edge(i, (i + 1) % n, &mut out);
        }
    } else {
        let (_, faces) = geom::icosphere(geom::icosphere_level(angular_res));
        let mut seen = std::collections::HashSet::new();
        for f in &faces {
            for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                if seen.insert((a.min(b), a.max(b))) {
                    edge(a, b, &mut out);
                }
            }
        }
    }
    out
}

/// Signed distance from the origin to the convex hull of `dirs`.
fn origin_to_hull(dim: usize, dirs: &[Point]) -> f64 {
    match ConvexBody::from_points(dim, dirs) {
        Ok(h) => h.signed_distance(&Point::zeros()),
        Err(_) => f64::INFINITY,
    }
}

pub fn local_geodesic_report(body: &ConvexBody, x: &Point, opts: &LgpOptions) -> Result<LgpReport> {
    let tol = body.boundary_tol();
    let sd = body.signed_distance(x);
    if sd > tol {
        return Err(Error::domain(format!("point is not in the body (distance {sd:.3e})")));
    }
    if !body.is_solid() || sd < -tol {
        // degenerate bodies contain a segment through every relative interior point
        // only if they are not points; the origin test below covers them
        if body.is_solid() {
            return Ok(LgpReport { interior: true, radii: Vec::new(), holds: true });
        }
    }
    let radii = opts.radii.clone().unwrap_or_else(|| default_radii(body));
    let floor = 2.0 * body.resolution();
    let mut out = Vec::with_capacity(radii.len());
    for &r in &radii {
        let dirs = if body.is_solid() {
            sample_link_directions(body, x, r, opts.angular_res)
        } else {
            body.vertices()
                .iter()
                .filter_map(|v| {
                    let w = v - x;
                    (w.norm() >= r).then(|| w.normalize())
                })
                .collect()
        };
        let origin_distance = if dirs.is_empty() { f64::INFINITY } else { origin_to_hull(body.dim(), &dirs) };
        out.push(LgpRadius { r, origin_distance, directions: dirs.len(), skipped: r < floor });
    }
    if out.iter().all(|l| l.skipped) {
        if let Some(last) = out.iter_mut().max_by(|a, b| a.r.total_cmp(&b.r)) {
            last.skipped = false;
        }
    }
    let holds = out.iter().filter(|l| !l.skipped).all(|l| l.origin_distance <= LGP_MARGIN);
    Ok(LgpReport { interior: false, radii: out, holds })
}

pub fn has_local_geodesic_property(body: &ConvexBody, x: &Point, radii: &[f64]) -> Result<bool> {
    let opts = LgpOptions { radii: (!radii.is_empty()).then(|| radii.to_vec()), ..Default::default() };
    Ok(local_geodesic_report(body, x, &opts)?.holds)
}
