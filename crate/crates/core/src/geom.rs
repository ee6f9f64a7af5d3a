//! Small vector helpers shared by every module: points, frames, rotations and
//! the sphere discretisations used for every direction-set computation.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Points and vectors of ℝ² and ℝ³. Planar data keeps `z = 0`.
pub type Point = Vector3<f64>;

pub fn p2(x: f64, y: f64) -> Point {
    Point::new(x, y, 0.0)
}

pub fn p3(x: f64, y: f64, z: f64) -> Point {
    Point::new(x, y, z)
}

/// Builds a point from a coordinate slice of length 2 or 3.
pub fn from_slice(c: &[f64]) -> Option<Point> {
    match c.len() {
        2 => Some(p2(c[0], c[1])),
        3 => Some(p3(c[0], c[1], c[2])),
        _ => None,
    }
}

pub fn to_vec(p: &Point, dim: usize) -> Vec<f64> {
    p.as_slice()[..dim].to_vec()
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Angle in `[0, π]` between two nonzero vectors.
pub fn angle_between(a: &Point, b: &Point) -> f64 {
    let c = a.dot(b) / (a.norm() * b.norm());
    c.clamp(-1.0, 1.0).acos()
}

/// Some unit vector orthogonal to `v` (planar data stays planar).
pub fn any_orthogonal(v: &Point, dim: usize) -> Point {
    if dim == 2 {
        return p2(-v.y, v.x).normalize();
    }
    let trial = if v.x.abs() < 0.6 { Point::x() } else { Point::y() };
    (trial - v * v.dot(&trial)).normalize()
}

/// Orthonormal frame whose last column is `axis`. In the plane the frame is
/// `(tangent, axis)` stored in the first two columns.
pub fn frame_with_axis(axis: &Point, dim: usize) -> Matrix3<f64> {
    let a = axis.normalize();
    if dim == 2 {
        let t = p2(a.y, -a.x);
        let mut m = Matrix3::zeros();
        m.set_column(0, &t);
        m.set_column(1, &a);
        m.set_column(2, &Point::z());
        return m;
    }
    let e1 = any_orthogonal(&a, 3);
    let e2 = a.cross(&e1);
    Matrix3::from_columns(&[e1, e2, a])
}

/// Rotation taking unit vector `from` to unit vector `to`.
pub fn rotation_between(from: &Point, to: &Point) -> Rotation3<f64> {
    match Rotation3::rotation_between(from, to) {
        Some(r) => r,
        None => {
            // antiparallel: half turn about any orthogonal axis
            let axis = any_orthogonal(from, if from.z == 0.0 && to.z == 0.0 { 2 } else { 3 });
            let axis = if from.z == 0.0 && to.z == 0.0 { Point::z() } else { axis };
            Rotation3::from_axis_angle(&Unit::new_normalize(axis), PI)
        }
    }
}

/// Icosahedral sphere mesh: `(unit vertices, triangles)`. Subdivision `s`
/// has `10·4^s + 2` vertices.
pub fn icosphere(subdivisions: u32) -> (Vec<Point>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Point> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| p3(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Point>| -> usize {
            let key = (a.min(b), a.max(b));
            *mid.entry(key).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                verts.len() - 1
            })
        };
        for f in &faces {
            let ab = midpoint(f[0], f[1], &mut verts);
            let bc = midpoint(f[1], f[2], &mut verts);
            let ca = midpoint(f[2], f[0], &mut verts);
            next.push([f[0], ab, ca]);
            next.push([f[1], bc, ab]);
            next.push([f[2], ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    (verts, faces)
}

/// Smallest icosphere subdivision whose mean edge angle is at most `res`.
pub fn icosphere_level(res: f64) -> u32 {
    // edge angle of the icosahedron is atan(2) ≈ 63.43°; each subdivision halves it
    let mut angle = 2f64.atan();
    let mut s = 0;
    while angle > res * 1.0001 && s < 8 {
        angle *= 0.5;
        s += 1;
    }
    s
}

type GridKey = (usize, u64);

fn grid_cache() -> &'static Mutex<HashMap<GridKey, Arc<Vec<Point>>>> {
    static CACHE: OnceLock<Mutex<HashMap<GridKey, Arc<Vec<Point>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shared direction grid on the unit sphere of ℝ^dim: a uniform angular grid
/// on the circle, an icosphere in space. Grids are cached per resolution.
pub fn direction_grid(dim: usize, angular_res: f64) -> Arc<Vec<Point>> {
    assert!(dim == 2 || dim == 3, "dimension must be 2 or 3");
    assert!(angular_res > 0.0);
    let key = if dim == 2 { (2, (2.0 * PI / angular_res).round().max(8.0) as u64) } else { (3, icosphere_level(angular_res) as u64) };
    let mut cache = grid_cache().lock().expect("direction grid cache poisoned");
    cache
        .entry(key)
        .or_insert_with(|| {
            let dirs = if dim == 2 {
                let n = key.1 as usize;
                (0..n)
                    .map(|k| {
                        let a = 2.0 * PI * k as f64 / n as f64;
                        p2(a.cos(), a.sin())
                    })
                    .collect()
            } else {
                icosphere(key.1 as u32).0
            };
            Arc::new(dirs)
        })
        .clone()
}

/// Effective angular spacing of the grid returned by [`direction_grid`].
pub fn grid_spacing(dim: usize, angular_res: f64) -> f64 {
    if dim == 2 {
        2.0 * PI / (2.0 * PI / angular_res).round().max(8.0)
    } else {
        2f64.atan() / 2f64.powi(icosphere_level(angular_res) as i32)
    }
}

/// Directed angular Hausdorff distance `sup_{a∈A} inf_{b∈B} ∠(a,b)`; `∞` if
/// exactly one side is empty.
pub fn directed_angular_hausdorff(a: &[Point], b: &[Point]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    if b.is_empty() {
        return f64::INFINITY;
    }
    a.iter()
        .map(|u| {
            let best = b.iter().map(|v| u.dot(v)).fold(f64::NEG_INFINITY, f64::max);
            best.clamp(-1.0, 1.0).acos()
        })
        .fold(0.0, f64::max)
}

/// Symmetric angular Hausdorff distance (max convention).
pub fn angular_hausdorff(a: &[Point], b: &[Point]) -> f64 {
    directed_angular_hausdorff(a, b).max(directed_angular_hausdorff(b, a))
}

/// Axis-aligned bounding box `(min, max)` of a nonempty point list.
pub fn bounding_box(points: &[Point]) -> (Point, Point) {
    let mut lo = points[0];
    let mut hi = points[0];
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (lo, hi)
}

pub fn diameter_bound(points: &[Point]) -> f64 {
    let (lo, hi) = bounding_box(points);
    (hi - lo).norm()
}

pub fn deg(x: f64) -> f64 {
    x.to_radians()
}
