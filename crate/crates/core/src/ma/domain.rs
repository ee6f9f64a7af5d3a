//! Convex domains `Ω ⊂ ℝⁿ` (`n = 1, 2`) with exact boundary crossings along
//! grid lines.

use std::fmt;
use std::sync::Arc;

use crate::convex::ConvexBody;
use crate::error::{Error, Result};
use crate::geom::{p2, Point};

/// Level-set function `g` with `Ω = {g < 0}`.
pub type LevelSet = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Domain {
    Interval {
        a: f64,
        b: f64,
    },
    Disk {
        center: Point,
        radius: f64,
    },
    Polygon(Box<ConvexBody>),
    /// Convex sublevel set `{g < 0}` inside the box `[lo, hi]`.
    Implicit {
        g: LevelSet,
        lo: Point,
        hi: Point,
    },
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Interval { a, b } => write!(f, "Interval({a}, {b})"),
            Domain::Disk { center, radius } => write!(f, "Disk(({}, {}), r = {radius})", center.x, center.y),
            Domain::Polygon(b) => write!(f, "Polygon({} vertices)", b.vertices().len()),
            Domain::Implicit { lo, hi, .. } => write!(f, "Implicit([{}, {}] × [{}, {}])", lo.x, hi.x, lo.y, hi.y),
        }
    }
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::domain("interval needs a < b"));
        }
        Ok(Domain::Interval { a, b })
    }

    pub fn disk(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::domain("disk radius must be positive"));
        }
        Ok(Domain::Disk { center, radius })
    }

    pub fn polygon(vertices: &[Point]) -> Result<Self> {
        let body = ConvexBody::polygon(vertices)?;
        if !body.is_solid() {
            return Err(Error::domain("polygon domain has empty interior"));
        }
        Ok(Domain::Polygon(Box::new(body)))
    }

    pub fn n(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// Bounding box `(lo, hi)`.
    pub fn bounds(&self) -> (Point, Point) {
        match self {
            Domain::Interval { a, b } => (p2(*a, 0.0), p2(*b, 0.0)),
            Domain::Disk { center, radius } => (center - p2(*radius, *radius), center + p2(*radius, *radius)),
            Domain::Polygon(body) => crate::geom::bounding_box(body.vertices()),
            Domain::Implicit { lo, hi, .. } => (*lo, *hi),
        }
    }

    /// Signed level value, negative inside. Exact signed distance except for
    /// implicit domains.
    pub fn level(&self, x: &Point) -> f64 {
        match self {
            Domain::Interval { a, b } => (a - x.x).max(x.x - b),
            Domain::Disk { center, radius } => (x - center).xy().norm() - radius,
            Domain::Polygon(body) => body.signed_distance(&p2(x.x, x.y)),
            Domain::Implicit { g, lo, hi } => {
                let out = (lo.x - x.x).max(x.x - hi.x).max(lo.y - x.y).max(x.y - hi.y);
                if out > 0.0 {
                    out.max(g(x))
                } else {
                    g(x)
                }
            }
        }
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.level(x) < 0.0
    }

    /// Distance `s ∈ (0, max]` from an interior point `x` along the unit
    /// direction `d` to `∂Ω`, or `None` if the segment stays inside.
    pub fn crossing(&self, x: &Point, d: &Point, max: f64) -> Option<f64> {
        if self.contains(&(x + d * max)) {
            return None;
        }
        let s = match self {
            Domain::Interval { a, b } => {
                if d.x > 0.0 {
                    (b - x.x) / d.x
                } else {
                    (a - x.x) / d.x
                }
            }
            Domain::Disk { center, radius } => {
                let w = (x - center).xy();
                let dd = d.xy();
                let bq = w.dot(&dd);
                let c = w.norm_squared() - radius * radius;
                -bq + (bq * bq - c).max(0.0).sqrt()
            }
            Domain::Polygon(body) => body.ray_interval(&p2(x.x, x.y), &p2(d.x, d.y)).map(|(_, t1)| t1).unwrap_or(0.0),
            Domain::Implicit { .. } => {
                let (mut lo, mut hi) = (0.0, max);
                let (mut glo, mut ghi) = (self.level(x), self.level(&(x + d * max)));
                for _ in 0..100 {
                    // regula falsi with bisection safeguard
                    let mut m = lo + (hi - lo) * glo / (glo - ghi);
                    if !(m > lo && m < hi) || (hi - lo) > 0.5 * max {
                        m = 0.5 * (lo + hi);
                    }
                    let gm = self.level(&(x + d * m));
                    if gm < 0.0 {
                        lo = m;
                        glo = gm;
                    } else {
                        hi = m;
                        ghi = gm;
                    }
                    if hi - lo <= 1e-15 * max.max(1.0) {
                        break;
                    }
                }
                0.5 * (lo + hi)
            }
        };
        Some(s.clamp(0.0, max))
    }

    /// Centre used to anchor the grid.
    pub fn anchor(&self) -> Point {
        match self {
            Domain::Interval { a, b } => p2(0.5 * (a + b), 0.0),
            Domain::Disk { center, .. } => *center,
            Domain::Polygon(body) => body.interior_point(),
            Domain::Implicit { lo, hi, .. } => (lo + hi) * 0.5,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_crossing_is_exact() {
        let d = Domain::disk(Point::zeros(), 1.0).unwrap();
        let s = d.crossing(&p2(0.5, 0.0), &p2(1.0, 0.0), 1.0).unwrap();
        assert!((s - 0.5).abs() < 1e-15);
        assert!(d.crossing(&p2(0.0, 0.0), &p2(1.0, 0.0), 0.5).is_none());
    }

    #[test]
    fn implicit_matches_disk() {
        let g: LevelSet = Arc::new(|x: &Point| x.x * x.x + x.y * x.y - 1.0);
        let d = Domain::Implicit { g, lo: p2(-2.0, -2.0), hi: p2(2.0, 2.0) };
        let dir = p2(1.0, 1.0).normalize();
        let s = d.crossing(&p2(0.2, 0.1), &dir, 2.0).unwrap();
        let exact = Domain::disk(Point::zeros(), 1.0).unwrap().crossing(&p2(0.2, 0.1), &dir, 2.0).unwrap();
        assert!((s - exact).abs() < 1e-12);
    }
}
