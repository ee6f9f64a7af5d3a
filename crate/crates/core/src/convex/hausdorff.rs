use crate::convex::ConvexBody;
use crate::error::{Error, Result};
use crate::geom::Point;

/// Which combination of the two directed distances is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HausdorffConvention {
    /// `sup_x d_Y(x) + sup_y d_X(y)`.
    #[default]
    Sum,
    /// `max(sup_x d_Y(x), sup_y d_X(y))`.
    Max,
}

/// A compact set given either as a convex body (solid) or as a finite sample.
#[derive(Debug, Clone, Copy)]
pub enum CompactSet<'a> {
    Body(&'a ConvexBody),
    Points(&'a [Point]),
}

impl<'a> From<&'a ConvexBody> for CompactSet<'a> {
    fn from(b: &'a ConvexBody) -> Self {
        CompactSet::Body(b)
    }
}

impl<'a> From<&'a [Point]> for CompactSet<'a> {
    fn from(p: &'a [Point]) -> Self {
        CompactSet::Points(p)
    }
}

impl<'a> From<&'a Vec<Point>> for CompactSet<'a> {
    fn from(p: &'a Vec<Point>) -> Self {
        CompactSet::Points(p)
    }
}

impl CompactSet<'_> {
    /// Points where `sup` of a convex function over the set is attained.
    fn extreme_points(&self) -> &[Point] {
        match self {
            CompactSet::Body(b) => b.vertices(),
            CompactSet::Points(p) => p,
        }
    }

    pub fn distance(&self, x: &Point) -> f64 {
        match self {
            CompactSet::Body(b) => b.distance_and_project(x).0,
            CompactSet::Points(p) => p.iter().map(|q| (q - x).norm_squared()).fold(f64::INFINITY, f64::min).sqrt(),
        }
    }

    fn is_empty(&self) -> bool {
        self.extreme_points().is_empty()
    }

    fn dim(&self) -> Option<usize> {
        match self {
            CompactSet::Body(b) => Some(b.dim()),
            CompactSet::Points(_) => None,
        }
    }
}

/// `sup_{x∈X} inf_{y∈Y} ‖x − y‖`. For a body `X` the supremum of the convex
/// function `d_Y` is attained at a vertex, so only vertices are visited.
pub fn directed_hausdorff(x: CompactSet<'_>, y: CompactSet<'_>) -> f64 {
    x.extreme_points().iter().map(|p| y.distance(p)).fold(0.0, f64::max)
}

/// Hausdorff distance with the summed convention.
pub fn hausdorff_distance<'a, 'b>(x: impl Into<CompactSet<'a>>, y: impl Into<CompactSet<'b>>) -> Result<f64> {
    hausdorff_distance_with(x, y, HausdorffConvention::Sum)
}

pub fn hausdorff_distance_with<'a, 'b>(
    x: impl Into<CompactSet<'a>>,
    y: impl Into<CompactSet<'b>>,
    convention: HausdorffConvention,
) -> Result<f64> {
    let (x, y) = (x.into(), y.into());
    if x.is_empty() || y.is_empty() {
        return Err(Error::domain("Hausdorff distance of an empty set"));
    }
    if let (Some(a), Some(b)) = (x.dim(), y.dim()) {
        if a != b {
            return Err(Error::domain(format!("dimension mismatch: {a} vs {b}")));
        }
    }
    let xy = directed_hausdorff(x, y);
    let yx = directed_hausdorff(y, x);
    Ok(match convention {
        HausdorffConvention::Sum => xy + yx,
        HausdorffConvention::Max => xy.max(yx),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::p2;

    #[test]
    fn spec_examples() {
        let sq = ConvexBody::unit_square();
        assert_eq!(hausdorff_distance(&sq, &sq).unwrap(), 0.0);
        let a = vec![p2(0.0, 0.0)];
        let b = vec![p2(3.0, 4.0)];
        assert!((hausdorff_distance(&a, &b).unwrap() - 10.0).abs() < 1e-14);
        assert!((hausdorff_distance_with(&a, &b, HausdorffConvention::Max).unwrap() - 5.0).abs() < 1e-14);
        let disk = ConvexBody::disk(Point::zeros(), 1.0, 360);
        let origin = vec![Point::zeros()];
        assert!((hausdorff_distance(&disk, &origin).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_is_error() {
        let a: Vec<Point> = vec![];
        let b = vec![p2(0.0, 0.0)];
        assert!(matches!(hausdorff_distance(&a, &b), Err(Error::Domain(_))));
    }
}
