//! Convex hulls of finite point sets in the plane (monotone chain) and in
//! space (quickhull with conflict lists).

use std::collections::{HashMap, VecDeque};

use crate::geom::{p2, Point};

/// Shape of a hull, from a single point up to a full-dimensional polytope.
#[derive(Debug, Clone, PartialEq)]
pub enum Hull {
    Point(Point),
    Segment(Point, Point),
    /// Planar convex polygon (counter-clockwise about `normal`); in the plane
    /// this is the generic case and `normal = e₃`.
    Polygon {
        vertices: Vec<Point>,
        normal: Point,
    },
    /// Closed triangulated polytope in ℝ³ with outward-oriented triangles.
    Polytope {
        vertices: Vec<Point>,
        faces: Vec<[usize; 3]>,
    },
}

impl Hull {
    pub fn vertices(&self) -> Vec<Point> {
        match self {
            Hull::Point(p) => vec![*p],
            Hull::Segment(a, b) => vec![*a, *b],
            Hull::Polygon { vertices, .. } | Hull::Polytope { vertices, .. } => vertices.clone(),
        }
    }
}

fn cross2(o: &Point, a: &Point, b: &Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn scale_of(points: &[Point]) -> f64 {
    points.iter().map(|p| p.amax()).fold(0.0, f64::max).max(1e-300)
}

/// Hull of planar points (the `z` coordinate is ignored).
pub fn hull_2d(points: &[Point]) -> Hull {
    assert!(!points.is_empty());
    let eps = 1e-12 * scale_of(points);
    let mut pts: Vec<Point> = points.iter().map(|p| p2(p.x, p.y)).collect();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| (*a - *b).norm() <= eps);
    if pts.len() == 1 {
        return Hull::Point(pts[0]);
    }
    let chain = |iter: &mut dyn Iterator<Item = &Point>| -> Vec<Point> {
        let mut h: Vec<Point> = Vec::new();
        for p in iter {
            while h.len() >= 2 {
                let n = h.len();
                let c = cross2(&h[n - 2], &h[n - 1], p);
                // drop right turns and collinear points, scaled by edge length
                if c <= eps * (h[n - 1] - h[n - 2]).norm().max(eps) {
                    h.pop();
                } else {
                    break;
                }
            }
            h.push(*p);
        }
        h
    };
    let mut lower = chain(&mut pts.iter());
    let mut upper = chain(&mut pts.iter().rev());
    lower.pop();
    upper.pop();
    lower.extend(upper);
    match lower.len() {
        0 | 1 => Hull::Point(pts[0]),
        2 => Hull::Segment(lower[0], lower[1]),
        _ => Hull::Polygon { vertices: lower, normal: Point::z() },
    }
}

struct Face {
    v: [usize; 3],
    normal: Point,
    offset: f64,
    outside: Vec<usize>,
    alive: bool,
}

fn make_face(pts: &[Point], v: [usize; 3]) -> Face {
    let n = (pts[v[1]] - pts[v[0]]).cross(&(pts[v[2]] - pts[v[0]]));
    let normal = n / n.norm().max(1e-300);
    Face { v, normal, offset: normal.dot(&pts[v[0]]), outside: Vec::new(), alive: true }
}

/// Hull of points in ℝ³. Lower-dimensional inputs are detected and returned
/// as points, segments or planar polygons.
pub fn hull_3d(points: &[Point]) -> Hull {
    assert!(!points.is_empty());
    let scale = scale_of(points);
    let eps = 1e-11 * scale;
    let pts = points;

    // initial simplex from axis extremes
    let mut ext = [0usize; 6];
    for (i, p) in pts.iter().enumerate() {
        for a in 0..3 {
            if p[a] < pts[ext[2 * a]][a] {
                ext[2 * a] = i;
            }
            if p[a] > pts[ext[2 * a + 1]][a] {
                ext[2 * a + 1] = i;
            }
        }
    }
    let (mut i0, mut i1, mut best) = (0, 0, -1.0);
    for &a in &ext {
        for &b in &ext {
            let d = (pts[a] - pts[b]).norm();
            if d > best {
                best = d;
                i0 = a;
                i1 = b;
            }
        }
    }
    if best <= eps {
        return Hull::Point(pts[0]);
    }
    let dir = (pts[i1] - pts[i0]) / best;
    let line_dist = |p: &Point| {
        let w = p - pts[i0];
        (w - dir * w.dot(&dir)).norm()
    };
    let i2 = (0..pts.len()).max_by(|&a, &b| line_dist(&pts[a]).total_cmp(&line_dist(&pts[b]))).unwrap();
    if line_dist(&pts[i2]) <= eps {
        let t = |p: &Point| (p - pts[i0]).dot(&dir);
        let lo = (0..pts.len()).min_by(|&a, &b| t(&pts[a]).total_cmp(&t(&pts[b]))).unwrap();
        let hi = (0..pts.len()).max_by(|&a, &b| t(&pts[a]).total_cmp(&t(&pts[b]))).unwrap();
        return Hull::Segment(pts[lo], pts[hi]);
    }
    let pn = (pts[i1] - pts[i0]).cross(&(pts[i2] - pts[i0])).normalize();
    let plane_dist = |p: &Point| (p - pts[i0]).dot(&pn);
    let i3 = (0..pts.len()).max_by(|&a, &b| plane_dist(&pts[a]).abs().total_cmp(&plane_dist(&pts[b]).abs())).unwrap();
    if plane_dist(&pts[i3]).abs() <= eps {
        return planar_hull(pts, pts[i0], pn);
    }

    let mut faces: Vec<Face> = Vec::new();
    let base = if plane_dist(&pts[i3]) > 0.0 { [i0, i2, i1] } else { [i0, i1, i2] };
    let tet = [base, [base[0], base[1], i3], [base[1], base[2], i3], [base[2], base[0], i3]];
    let centroid = (pts[i0] + pts[i1] + pts[i2] + pts[i3]) / 4.0;
    for mut v in tet {
        let f = make_face(pts, v);
        if f.normal.dot(&centroid) - f.offset > 0.0 {
            v.swap(1, 2);
        }
        faces.push(make_face(pts, v));
    }
    let mut edge_face: HashMap<(usize, usize), usize> = HashMap::new();
    for (fi, f) in faces.iter().enumerate() {
        for k in 0..3 {
            edge_face.insert((f.v[k], f.v[(k + 1) % 3]), fi);
        }
    }
    for (i, p) in pts.iter().enumerate() {
        if [i0, i1, i2, i3].contains(&i) {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for (fi, f) in faces.iter().enumerate() {
            let d = f.normal.dot(p) - f.offset;
            if d > eps && best.is_none_or(|(_, bd)| d > bd) {
                best = Some((fi, d));
            }
        }
        if let Some((fi, _)) = best {
            faces[fi].outside.push(i);
        }
    }

    let mut stack: Vec<usize> = (0..faces.len()).collect();
    while let Some(fi) = stack.pop() {
        if !faces[fi].alive || faces[fi].outside.is_empty() {
            continue;
        }
        let f = &faces[fi];
        let apex =
            *f.outside.iter().max_by(|&&a, &&b| (f.normal.dot(&pts[a]) - f.offset).total_cmp(&(f.normal.dot(&pts[b]) - f.offset))).unwrap();
        let ap = pts[apex];

        // visible region by breadth-first search across edges
        let mut visible = vec![fi];
        let mut seen: HashMap<usize, bool> = HashMap::new();
        seen.insert(fi, true);
        let mut queue = VecDeque::from([fi]);
        let mut horizon: Vec<(usize, usize)> = Vec::new();
        while let Some(cur) = queue.pop_front() {
            for k in 0..3 {
                let a = faces[cur].v[k];
                let b = faces[cur].v[(k + 1) % 3];
                let Some(&nb) = edge_face.get(&(b, a)) else { continue };
                match seen.get(&nb) {
                    Some(true) => continue,
                    Some(false) => {
                        horizon.push((a, b));
                        continue;
                    }
                    None => {}
                }
                let vis = faces[nb].normal.dot(&ap) - faces[nb].offset > eps;
                seen.insert(nb, vis);
                if vis {
                    visible.push(nb);
                    queue.push_back(nb);
                } else {
                    horizon.push((a, b));
                }
            }
        }
        // horizon edges may have been recorded before a neighbour was later
        // discovered visible; keep only edges whose twin face is not visible
        horizon.retain(|&(a, b)| edge_face.get(&(b, a)).is_some_and(|nb| seen.get(nb) == Some(&false)));

        let mut orphans: Vec<usize> = Vec::new();
        for &vf in &visible {
            faces[vf].alive = false;
            orphans.append(&mut faces[vf].outside);
            let v = faces[vf].v;
            for k in 0..3 {
                edge_face.remove(&(v[k], v[(k + 1) % 3]));
            }
        }
        let first_new = faces.len();
        for &(a, b) in &horizon {
            let nf = make_face(pts, [a, b, apex]);
            let id = faces.len();
            edge_face.insert((a, b), id);
            edge_face.insert((b, apex), id);
            edge_face.insert((apex, a), id);
            faces.push(nf);
        }
        for o in orphans {
            if o == apex {
                continue;
            }
            let p = pts[o];
            let mut best: Option<(usize, f64)> = None;
            for (id, nf) in faces.iter().enumerate().skip(first_new) {
                let d = nf.normal.dot(&p) - nf.offset;
                if d > eps && best.is_none_or(|(_, bd)| d > bd) {
                    best = Some((id, d));
                }
            }
            if let Some((id, _)) = best {
                faces[id].outside.push(o);
            }
        }
        stack.extend(first_new..faces.len());
    }

    let mut remap: HashMap<usize, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut out_faces = Vec::new();
    for f in faces.iter().filter(|f| f.alive) {
        let mut tri = [0usize; 3];
        for k in 0..3 {
            tri[k] = *remap.entry(f.v[k]).or_insert_with(|| {
                vertices.push(pts[f.v[k]]);
                vertices.len() - 1
            });
        }
        out_faces.push(tri);
    }
    Hull::Polytope { vertices, faces: out_faces }
}

fn planar_hull(pts: &[Point], origin: Point, normal: Point) -> Hull {
    let e1 = crate::geom::any_orthogonal(&normal, 3);
    let e2 = normal.cross(&e1);
    let local: Vec<Point> = pts.iter().map(|p| p2((p - origin).dot(&e1), (p - origin).dot(&e2))).collect();
    let lift = |q: &Point| origin + e1 * q.x + e2 * q.y;
    match hull_2d(&local) {
        Hull::Point(q) => Hull::Point(lift(&q)),
        Hull::Segment(a, b) => Hull::Segment(lift(&a), lift(&b)),
        Hull::Polygon { vertices, .. } => Hull::Polygon { vertices: vertices.iter().map(lift).collect(), normal },
        Hull::Polytope { .. } => unreachable!("planar input"),
    }
}

/// Closest point to `x` on the segment `[a, b]`.
pub fn closest_on_segment(x: &Point, a: &Point, b: &Point) -> Point {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return *a;
    }
    let t = ((x - a).dot(&ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

/// Closest point to `p` on triangle `abc` (Ericson, Real-Time Collision Detection §5.1.5).
pub fn closest_on_triangle(p: &Point, a: &Point, b: &Point, c: &Point) -> Point {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}
