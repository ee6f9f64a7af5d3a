//! Local graph charts of convex boundaries: near a boundary point whose
//! nearby normals lie in a cone of half-angle θ, `∂K` is the graph of a
//! convex `tan θ`-Lipschitz function over a ball of radius `r/√(1+4 tan²θ)`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::Matrix3;

use crate::convex::hull::{closest_on_segment, closest_on_triangle};
use crate::convex::ConvexBody;
use crate::error::{Error, Result};
use crate::geom::{self, Point};

#[derive(Debug, Clone)]
pub struct ChartOptions {
    /// Grid nodes per side of the sampling square (odd, so that 0 is a node).
    pub samples: usize,
    /// Largest radius tried; defaults to the body diameter.
    pub r_max: Option<f64>,
    /// Shrink factor between successive radii.
    pub shrink: f64,
    /// Forces this outward axis instead of fitting one.
    pub axis: Option<Point>,
}

impl Default for ChartOptions {
    fn default() -> Self {
        ChartOptions { samples: 33, r_max: None, shrink: 0.9, axis: None }
    }
}

/// Graph chart `t = f(x′)` of `∂K` near `base_point`, in the frame whose last
/// axis points into the body (`-N′`).
#[derive(Debug, Clone)]
pub struct GraphChart {
    /// Ambient dimension; the chart is over ℝ^(dim-1).
    pub dim: usize,
    pub base_point: Point,
    /// Columns: tangent axes, then the inward axis `-N′` in column `dim - 1`.
    pub frame: Matrix3<f64>,
    pub theta: f64,
    /// Radius of the ball on which the normal-cone condition was verified.
    pub r: f64,
    /// Chart radius `ρ = r/√(1+4C²)`.
    pub rho: f64,
    /// Lipschitz constant `C = tan θ`.
    pub lipschitz: f64,
    pub samples: usize,
    pub spacing: f64,
    /// Graph values on the sampling grid; `NaN` outside `B′_ρ`.
    pub values: Vec<f64>,
}

/// Invariant residuals of a sampled chart.
#[derive(Debug, Clone, Copy)]
pub struct ChartReport {
    pub f_at_origin: f64,
    /// `max (|f(x′) − f(y′)| − C‖x′ − y′‖)` over node pairs.
    pub lipschitz_excess: f64,
    /// `max (f(mid) − (f(a)+f(b))/2)` over grid-aligned triples.
    pub convexity_excess: f64,
}

impl GraphChart {
    pub fn n(&self) -> usize {
        self.dim - 1
    }

    pub fn inward(&self) -> Point {
        self.frame.column(self.dim - 1).into()
    }

    pub fn outward(&self) -> Point {
        -self.inward()
    }

    fn tangent(&self, a: usize) -> Point {
        self.frame.column(a).into()
    }

    /// World point with chart coordinates `(x′, t)`.
    pub fn to_world(&self, xp: &[f64], t: f64) -> Point {
        let mut p = self.base_point + self.inward() * t;
        for (a, c) in xp.iter().enumerate().take(self.n()) {
            p += self.tangent(a) * *c;
        }
        p
    }

    /// Chart coordinates `(x′, t)` of a world point.
    pub fn to_chart(&self, p: &Point) -> (Vec<f64>, f64) {
        let w = p - self.base_point;
        let xp = (0..self.n()).map(|a| w.dot(&self.tangent(a))).collect();
        (xp, w.dot(&self.inward()))
    }

    fn side(&self) -> usize {
        self.samples
    }

    /// Coordinates of grid node `idx` (row-major over the sampling square).
    pub fn node(&self, idx: usize) -> Vec<f64> {
        let m = self.side();
        let c = |k: usize| -self.rho + k as f64 * self.spacing;
        if self.n() == 1 {
            vec![c(idx)]
        } else {
            vec![c(idx / m), c(idx % m)]
        }
    }

    pub fn node_count(&self) -> usize {
        self.samples.pow(self.n() as u32)
    }

    /// Graph value at an arbitrary point of `B′_ρ` by (bi)linear interpolation.
    pub fn value_at(&self, xp: &[f64]) -> Option<f64> {
        let m = self.side();
        let u: Vec<f64> = xp.iter().map(|c| (c + self.rho) / self.spacing).collect();
        if u.iter().any(|&v| v < 0.0 || v > (m - 1) as f64) {
            return None;
        }
        let b: Vec<usize> = u.iter().map(|&v| (v.floor() as usize).min(m - 2)).collect();
        let fr: Vec<f64> = u.iter().zip(&b).map(|(v, b)| v - *b as f64).collect();
        let at = |i: usize, j: usize| -> f64 {
            if self.n() == 1 {
                self.values[i]
            } else {
                self.values[i * m + j]
            }
        };
        let v = if self.n() == 1 {
            at(b[0], 0) * (1.0 - fr[0]) + at(b[0] + 1, 0) * fr[0]
        } else {
            let (i, j, s, t) = (b[0], b[1], fr[0], fr[1]);
            at(i, j) * (1.0 - s) * (1.0 - t) + at(i + 1, j) * s * (1.0 - t) + at(i, j + 1) * (1.0 - s) * t + at(i + 1, j + 1) * s * t
        };
        v.is_finite().then_some(v)
    }

    pub fn check_invariants(&self) -> ChartReport {
        let nodes: Vec<(Vec<f64>, f64)> =
            (0..self.node_count()).filter(|&i| self.values[i].is_finite()).map(|i| (self.node(i), self.values[i])).collect();
        let mut lip: f64 = f64::NEG_INFINITY;
        for (i, (a, fa)) in nodes.iter().enumerate() {
            for (b, fb) in &nodes[i + 1..] {
                let d = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
                lip = lip.max((fa - fb).abs() - self.lipschitz * d);
            }
        }
        let m = self.side();
        let mut conv: f64 = f64::NEG_INFINITY;
        let get = |i: isize, j: isize| -> Option<f64> {
            if i < 0 || j < 0 || i >= m as isize || j >= m as isize {
                return None;
            }
            let v = if self.n() == 1 { self.values[i as usize] } else { self.values[i as usize * m + j as usize] };
            v.is_finite().then_some(v)
        };
        let steps: &[(isize, isize)] = if self.n() == 1 { &[(1, 0)] } else { &[(1, 0), (0, 1), (1, 1), (1, -1)] };
        let jmax = if self.n() == 1 { 1 } else { m as isize };
        for i in 0..m as isize {
            for j in 0..jmax {
                for &(di, dj) in steps {
                    if let (Some(a), Some(c), Some(b)) = (get(i - di, j - dj), get(i, j), get(i + di, j + dj)) {
                        conv = conv.max(c - 0.5 * (a + b));
                    }
                }
            }
        }
        let centre = vec![0.0; self.n()];
        ChartReport {
            f_at_origin: self.value_at(&centre).unwrap_or(f64::NAN),
            lipschitz_excess: lip.max(0.0),
            convexity_excess: conv.max(0.0),
        }
    }
}

/// Distance from `x` to each facet, paired with the facet normal.
fn facet_distances(body: &ConvexBody, x: &Point) -> Vec<(f64, Point, f64)> {
    let v = body.vertices();
    body.facets()
        .iter()
        .map(|f| {
            let (q, area) = match f.vertices.len() {
                2 => (closest_on_segment(x, &v[f.vertices[0]], &v[f.vertices[1]]), (v[f.vertices[1]] - v[f.vertices[0]]).norm()),
                _ => {
                    let (a, b, c) = (v[f.vertices[0]], v[f.vertices[1]], v[f.vertices[2]]);
                    (closest_on_triangle(x, &a, &b, &c), 0.5 * (b - a).cross(&(c - a)).norm())
                }
            };
            ((q - x).norm(), f.normal, area)
        })
        .collect()
}

/// Outward axis that best centres a set of normals: the normalised area-weighted mean.
fn centre_axis(normals: &[(Point, f64)]) -> Option<Point> {
    let s: Point = normals.iter().map(|(n, w)| n * *w).sum();
    (s.norm() > 1e-12).then(|| s.normalize())
}

/// Extracts the graph chart at a boundary point with cone half-angle `theta`.
pub fn extract_graph_chart(body: &ConvexBody, x: &Point, theta: f64, opts: &ChartOptions) -> Result<GraphChart> {
    if !body.is_solid() {
        return Err(Error::domain("graph charts need a body with nonempty interior"));
    }
    if !(0.0..FRAC_PI_2).contains(&theta) {
        return Err(Error::domain(format!("cone angle {theta} outside [0, π/2)")));
    }
    let tol = body.boundary_tol();
    if body.signed_distance(x).abs() > tol.max(body.resolution() * 1e-3) {
        return Err(Error::domain(format!("chart base point is {:e} off the boundary", body.signed_distance(x))));
    }
    let dim = body.dim();
    let dists = facet_distances(body, x);
    let cos_theta = theta.cos();
    let r_max = opts.r_max.unwrap_or_else(|| body.diameter());
    let r_min = (2.0 * body.resolution()).max(1e-9 * body.diameter());

    let mut r = r_max;
    let mut found = None;
    while r >= r_min {
        let near: Vec<(Point, f64)> = dists.iter().filter(|(d, _, _)| *d <= r).map(|(_, n, a)| (*n, a.max(1e-300))).collect();
        if !near.is_empty() {
            let axis = opts.axis.map(|a| a.normalize()).or_else(|| centre_axis(&near));
            if let Some(axis) = axis {
                if near.iter().all(|(n, _)| n.dot(&axis) >= cos_theta - 1e-12) {
                    found = Some((r, axis));
                    break;
                }
            }
        }
        r *= opts.shrink;
    }
    let (r, outward) = found.ok_or(Error::NoChartRadius { r_max })?;

    let c = theta.tan();
    let rho = r / (1.0 + 4.0 * c * c).sqrt();
    let samples = if opts.samples.is_multiple_of(2) { opts.samples + 1 } else { opts.samples }.max(3);
    let spacing = 2.0 * rho / (samples - 1) as f64;
    let frame = geom::frame_with_axis(&(-outward), dim);
    let mut chart = GraphChart { dim, base_point: *x, frame, theta, r, rho, lipschitz: c, samples, spacing, values: Vec::new() };
    let inward = chart.inward();
    let box_height = 2.0 * c * rho;
    chart.values = (0..chart.node_count())
        .map(|i| {
            let xp = chart.node(i);
            if xp.iter().map(|v| v * v).sum::<f64>().sqrt() > rho * (1.0 + 1e-12) {
                return f64::NAN;
            }
            let origin = chart.to_world(&xp, 0.0);
            match body.ray_interval(&origin, &inward) {
                Some((t0, _)) if t0.abs() < box_height + tol => t0,
                _ => f64::NAN,
            }
        })
        .collect();
    Ok(chart)
}

/// Hull shape check used by the chart-based excision: every chart node
/// inside `B′_ρ` has a finite value.
pub fn chart_is_complete(chart: &GraphChart) -> bool {
    (0..chart.node_count()).all(|i| {
        let xp = chart.node(i);
        xp.iter().map(|v| v * v).sum::<f64>().sqrt() > chart.rho * (1.0 - 1e-9) || chart.values[i].is_finite()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::Hull;
    use crate::geom::{deg, p3};
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn sphere_south_pole_chart() {
        let ball = ConvexBody::ball(Point::zeros(), 1.0, 5);
        let x = p3(0.0, 0.0, -1.0);
        let chart = extract_graph_chart(&ball, &x, FRAC_PI_4, &ChartOptions::default()).unwrap();
        assert!(matches!(ball.hull(), Hull::Polytope { .. }));
        assert!((chart.lipschitz - 1.0).abs() < 1e-12);
        assert!((chart.rho - chart.r / 5f64.sqrt()).abs() < 1e-15);
        assert!((chart.outward() - p3(0.0, 0.0, -1.0)).norm() < 1e-6);
        // closed-form sphere graph, up to the polyhedral approximation error
        let sag = ball.resolution().powi(2);
        for i in 0..chart.node_count() {
            let v = chart.values[i];
            if v.is_finite() {
                let xp = chart.node(i);
                let r2 = xp[0] * xp[0] + xp[1] * xp[1];
                let exact = 1.0 - (1.0 - r2).sqrt();
                assert!((v - exact).abs() < sag, "{v} vs {exact}");
            }
        }
        assert!(chart_is_complete(&chart));
        let rep = chart.check_invariants();
        assert!(rep.f_at_origin.abs() < 1e-9);
        assert!(rep.lipschitz_excess < 1e-9);
        assert!(rep.convexity_excess < sag);
    }

    #[test]
    fn flat_face_chart_is_zero() {
        let slab = crate::convex::body::unit_cube();
        let x = p3(0.5, 0.5, 1.0);
        let chart = extract_graph_chart(&slab, &x, deg(10.0), &ChartOptions { r_max: Some(0.4), ..Default::default() }).unwrap();
        for v in chart.values.iter().filter(|v| v.is_finite()) {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn corner_has_no_narrow_chart() {
        let sq = ConvexBody::unit_square();
        let err = extract_graph_chart(&sq, &crate::geom::p2(1.0, 1.0), deg(10.0), &ChartOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NoChartRadius { .. }));
    }
}
