//! Barrier states, excision of graph patches and the Plateau loop.

use std::collections::{BTreeSet, HashMap};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::convex::{extract_graph_chart, ChartOptions, ConvexBody, GraphChart};
use crate::error::{Error, Result};
use crate::geom::{self, p2, Point};
use crate::ma::{solve_dirichlet, Domain, GraphProblem, GraphSolution, Phi, SolveOptions};

/// Lebesgue measure of a body.
pub fn volume(body: &ConvexBody) -> f64 {
    body.volume()
}

#[derive(Debug, Clone, PartialEq)]
pub enum FrozenKind {
    /// `X = ∂K ∩ {⟨p, normal⟩ ≤ offset}`.
    HalfSpace { normal: Point, offset: f64 },
    /// A dense sample of `X`.
    Samples(Vec<Point>),
}

/// The frozen boundary piece `X`, with membership tolerance `tol`. Excisions
/// keep clear of `X` widened by `2·tol`; points within `3·tol` form the collar,
/// which is frozen as well, so the rim of an excision touching the clearance
/// plane is never fitted.
#[derive(Debug, Clone, PartialEq)]
pub struct FrozenSet {
    pub kind: FrozenKind,
    pub tol: f64,
}

impl FrozenSet {
    pub fn half_space(normal: Point, offset: f64, tol: f64) -> Result<Self> {
        let n = normal.norm();
        if !(n > 0.0) || !(tol > 0.0) {
            return Err(Error::domain("frozen half-space needs a nonzero normal and positive tolerance"));
        }
        Ok(FrozenSet { kind: FrozenKind::HalfSpace { normal: normal / n, offset: offset / n }, tol })
    }

    /// Lower half (last coordinate `≤ 0`) of the boundary.
    pub fn lower_half(dim: usize, tol: f64) -> Result<Self> {
        let mut a = Point::zeros();
        a[dim - 1] = 1.0;
        Self::half_space(a, 0.0, tol)
    }

    pub fn from_samples(points: Vec<Point>, tol: f64) -> Result<Self> {
        if points.is_empty() || !(tol > 0.0) {
            return Err(Error::domain("frozen sample set is empty"));
        }
        Ok(FrozenSet { kind: FrozenKind::Samples(points), tol })
    }

    /// Distance-like depth of `x` outside `X` (nonpositive inside).
    pub fn level(&self, x: &Point) -> f64 {
        match &self.kind {
            FrozenKind::HalfSpace { normal, offset } => normal.dot(x) - offset,
            FrozenKind::Samples(s) => s.iter().map(|q| (q - x).norm()).fold(f64::INFINITY, f64::min),
        }
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.level(x) <= self.tol * (1.0 + 1e-9)
    }

    pub fn in_collar(&self, x: &Point) -> bool {
        self.level(x) <= 3.0 * self.tol * (1.0 + 1e-9)
    }

    /// `max ⟨p, ν⟩` over `X` widened by `widen`.
    pub fn max_along(&self, body: &ConvexBody, nu: &Point, widen: f64) -> f64 {
        let pts = self.widened(body, &edges(body), widen);
        pts.iter().map(|p| nu.dot(p)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Points whose convex hull contains `X` widened by `widen`.
    fn widened(&self, body: &ConvexBody, edges: &[(usize, usize)], widen: f64) -> Vec<Point> {
        match &self.kind {
            FrozenKind::HalfSpace { normal, offset } => {
                let v = body.vertices();
                let lim = offset + widen;
                let mut out: Vec<Point> = v.iter().filter(|p| normal.dot(p) <= lim).copied().collect();
                for &(a, b) in edges {
                    let (sa, sb) = (normal.dot(&v[a]) - lim, normal.dot(&v[b]) - lim);
                    if (sa < 0.0) != (sb < 0.0) {
                        out.push(v[a] + (v[b] - v[a]) * (sa / (sa - sb)));
                    }
                }
                out
            }
            FrozenKind::Samples(s) => {
                // a ball of radius `widen` around each sample, bounded by its cube
                let dim = body.dim();
                let mut out = Vec::with_capacity(s.len() * 2 * dim);
                for p in s {
                    for a in 0..dim {
                        for sign in [-1.0, 1.0] {
                            let mut q = *p;
                            q[a] += sign * widen * (dim as f64).sqrt();
                            out.push(q);
                        }
                    }
                }
                out
            }
        }
    }

    /// Frozen points of the body boundary: vertices within the tolerance.
    pub fn boundary_sample(&self, body: &ConvexBody) -> Vec<Point> {
        match &self.kind {
            FrozenKind::Samples(s) => s.clone(),
            FrozenKind::HalfSpace { .. } => body.vertices().iter().filter(|p| self.contains(p)).copied().collect(),
        }
    }
}

/// Hull edges as sorted vertex index pairs.
pub fn edges(body: &ConvexBody) -> Vec<(usize, usize)> {
    let mut set = BTreeSet::new();
    for f in body.facets() {
        let m = f.vertices.len();
        for i in 0..m {
            let (a, b) = (f.vertices[i], f.vertices[(i + 1) % m]);
            if a != b {
                set.insert((a.min(b), a.max(b)));
            }
        }
    }
    set.into_iter().collect()
}

/// Area-weighted vertex normals.
pub fn vertex_normals(body: &ConvexBody) -> Vec<Point> {
    let v = body.vertices();
    let mut acc = vec![Point::zeros(); v.len()];
    for f in body.facets() {
        let w = if f.vertices.len() == 2 {
            (v[f.vertices[1]] - v[f.vertices[0]]).norm()
        } else {
            0.5 * (v[f.vertices[1]] - v[f.vertices[0]]).cross(&(v[f.vertices[2]] - v[f.vertices[0]])).norm()
        };
        for &i in &f.vertices {
            acc[i] += f.normal * w;
        }
    }
    acc.into_iter().map(|n| if n.norm() > 0.0 { n.normalize() } else { n }).collect()
}

/// Uniform-cell index for nearest-neighbour queries.
struct SpatialIndex<'a> {
    pts: &'a [Point],
    cell: f64,
    cells: HashMap<[i64; 3], Vec<usize>>,
}

impl<'a> SpatialIndex<'a> {
    fn new(pts: &'a [Point], ids: &[usize], cell: f64) -> Self {
        let mut cells: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for &i in ids {
            cells.entry(Self::key(&pts[i], cell)).or_default().push(i);
        }
        SpatialIndex { pts, cell, cells }
    }

    fn key(p: &Point, cell: f64) -> [i64; 3] {
        [(p.x / cell).floor() as i64, (p.y / cell).floor() as i64, (p.z / cell).floor() as i64]
    }

    /// The `k` nearest indexed points to `x`, nearest first (ties by index).
    fn nearest(&self, x: &Point, k: usize, total: usize) -> Vec<usize> {
        let c = Self::key(x, self.cell);
        let mut found: Vec<(f64, usize)> = Vec::new();
        let mut ring = 0i64;
        loop {
            for i in -ring..=ring {
                for j in -ring..=ring {
                    for l in -ring..=ring {
                        if i.abs().max(j.abs()).max(l.abs()) != ring {
                            continue;
                        }
                        if let Some(v) = self.cells.get(&[c[0] + i, c[1] + j, c[2] + l]) {
                            found.extend(v.iter().map(|&q| ((self.pts[q] - x).norm(), q)));
                        }
                    }
                }
            }
            found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let enough = found.len() >= k.min(total);
            if (enough && found[k.min(total) - 1].0 <= ring as f64 * self.cell) || found.len() >= total || ring > 4096 {
                found.truncate(k);
                return found.into_iter().map(|f| f.1).collect();
            }
            ring += 1;
        }
    }
}

/// Gauss curvature of a least-squares quadric graph fitted over the tangent
/// plane of `normal`, with the refined outward normal and the smallest
/// principal curvature.
pub fn fit_curvature(dim: usize, x: &Point, normal: &Point, neighbours: &[Point]) -> Option<(f64, Point, f64)> {
    let first = fit_quadric(dim, x, normal, neighbours)?;
    fit_quadric(dim, x, &first.1, neighbours).or(Some(first))
}

fn fit_quadric(dim: usize, x: &Point, normal: &Point, neighbours: &[Point]) -> Option<(f64, Point, f64)> {
    let frame = geom::frame_with_axis(normal, dim);
    let n = dim - 1;
    let cols = if n == 1 { 3 } else { 6 };
    if neighbours.len() < cols + 1 {
        return None;
    }
    let mut a = DMatrix::zeros(neighbours.len(), cols);
    let mut rhs = DMatrix::zeros(neighbours.len(), 1);
    let mut scale: f64 = 0.0;
    for (r, p) in neighbours.iter().enumerate() {
        let w = p - x;
        scale = scale.max(w.norm());
        let u: Vec<f64> = (0..n).map(|c| w.dot(&Point::from(frame.column(c)))).collect();
        let t = -w.dot(normal);
        let row: Vec<f64> = if n == 1 {
            vec![1.0, u[0], 0.5 * u[0] * u[0]]
        } else {
            vec![1.0, u[0], u[1], 0.5 * u[0] * u[0], u[0] * u[1], 0.5 * u[1] * u[1]]
        };
        for (c, v) in row.into_iter().enumerate() {
            a[(r, c)] = v;
        }
        rhs[(r, 0)] = t;
    }
    if !(scale > 0.0) {
        return None;
    }
    // columns scaled to unit norm keep the normal equations well conditioned
    let norms: Vec<f64> = (0..cols).map(|c| a.column(c).norm().max(1e-300)).collect();
    for (c, nrm) in norms.iter().enumerate() {
        a.column_mut(c).scale_mut(1.0 / nrm);
    }
    let ata = a.transpose() * &a;
    let atb = a.transpose() * &rhs;
    let mut sol = ata.cholesky()?.solve(&atb);
    for (c, nrm) in norms.iter().enumerate() {
        sol[c] /= nrm;
    }
    let tangent = |c: usize| -> Point { frame.column(c).into() };
    if n == 1 {
        let (b, aa) = (sol[1], sol[2]);
        let s = 1.0 + b * b;
        let refined = (normal + tangent(0) * b).normalize();
        let k = aa / s.powf(1.5);
        Some((k, refined, k))
    } else {
        let (b1, b2, a11, a12, a22) = (sol[1], sol[2], sol[3], sol[4], sol[5]);
        let s = 1.0 + b1 * b1 + b2 * b2;
        let refined = (normal + tangent(0) * b1 + tangent(1) * b2).normalize();
        let det = a11 * a22 - a12 * a12;
        let tr = a11 + a22;
        let min_eig = 0.5 * (tr - ((a11 - a22).powi(2) + 4.0 * a12 * a12).sqrt());
        Some((det / (s * s), refined, min_eig / s.sqrt()))
    }
}

/// Curvature a free boundary point must have for target `k`: the Gauss
/// curvature in space, and `√k` for curves, matching `Phi::sphere`.
pub fn target_curvature(dim: usize, k: f64) -> f64 {
    if dim == 2 {
        k.sqrt()
    } else {
        k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Frozen,
    SmoothConstantK,
    NeedsExcision,
    LgpSingular,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub point: Point,
    pub tag: Tag,
    /// In the collar `tol < level ≤ 3·tol`.
    pub collar: bool,
    pub curvature: Option<f64>,
    pub normal: Point,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TagCounts {
    pub frozen: usize,
    pub collar: usize,
    pub smooth_constant_k: usize,
    pub needs_excision: usize,
    pub lgp_singular: usize,
}

impl TagCounts {
    pub fn of(cls: &[Classification]) -> Self {
        let mut c = TagCounts::default();
        for x in cls {
            match x.tag {
                Tag::Frozen => {
                    c.frozen += 1;
                    c.collar += x.collar as usize;
                }
                Tag::SmoothConstantK => c.smooth_constant_k += 1,
                Tag::NeedsExcision => c.needs_excision += 1,
                Tag::LgpSingular => c.lgp_singular += 1,
            }
        }
        c
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExcisionRecord {
    pub base_point: Vec<f64>,
    pub normal: Vec<f64>,
    pub delta: f64,
    pub chart_rho: f64,
    pub domain_center: Vec<f64>,
    pub domain_radius: f64,
    pub solver_h: f64,
    pub nodes: usize,
    pub residual: f64,
    /// `min (f − ĝ)` against the old boundary graph over the section.
    pub comparison: f64,
    pub removed_vertices: usize,
    pub volume_before: f64,
    pub volume_after: f64,
    pub hausdorff_increment: f64,
}

/// A weak barrier: body, frozen set, target curvature and excision history.
#[derive(Debug, Clone)]
pub struct BarrierState {
    pub body: ConvexBody,
    pub frozen: FrozenSet,
    pub k: f64,
    pub history: Vec<ExcisionRecord>,
    pub hausdorff_increments: Vec<f64>,
}

impl BarrierState {
    pub fn new(body: ConvexBody, frozen: FrozenSet, k: f64) -> Result<Self> {
        if !body.is_solid() {
            return Err(Error::domain("barrier body must have nonempty interior"));
        }
        if !(k > 0.0) {
            return Err(Error::domain("target curvature must be positive"));
        }
        let sample = frozen.boundary_sample(&body);
        if sample.is_empty() {
            return Err(Error::domain("frozen set does not meet the boundary"));
        }
        if let Some(p) = sample.iter().find(|p| body.signed_distance(p).abs() > frozen.tol) {
            return Err(Error::domain(format!("frozen sample {:?} is not on the boundary", p.as_slice())));
        }
        Ok(BarrierState { body, frozen, k, history: Vec::new(), hausdorff_increments: Vec::new() })
    }

    pub fn volume(&self) -> f64 {
        self.body.volume()
    }

    /// Volumes before the first and after every excision.
    pub fn volumes(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.history.len() + 1);
        v.push(self.history.first().map_or_else(|| self.volume(), |r| r.volume_before));
        v.extend(self.history.iter().map(|r| r.volume_after));
        v
    }

    /// Largest admissible excision depth along `nu`, clearing `X` widened by `2·tol`.
    pub fn max_depth(&self, nu: &Point) -> f64 {
        self.max_depth_within(&self.clearance(&edges(&self.body)), nu)
    }

    fn clearance(&self, edges: &[(usize, usize)]) -> Vec<Point> {
        self.frozen.widened(&self.body, edges, 2.0 * self.frozen.tol)
    }

    fn max_depth_within(&self, clearance: &[Point], nu: &Point) -> f64 {
        let top = self.body.support(nu);
        let margin = 1e-9 * self.body.diameter();
        top - clearance.iter().map(|p| nu.dot(p)).fold(f64::NEG_INFINITY, f64::max) - margin
    }
}

#[derive(Debug, Clone)]
pub struct ExcisionOptions {
    /// Solver spacing; defaults to the domain radius over `nodes_per_radius`.
    pub solver_h: Option<f64>,
    pub nodes_per_radius: f64,
    pub solve: SolveOptions,
}

impl Default for ExcisionOptions {
    fn default() -> Self {
        ExcisionOptions { solver_h: None, nodes_per_radius: 48.0, solve: SolveOptions::default() }
    }
}

/// Chart at `x` with the given outward axis.
pub fn excision_chart(body: &ConvexBody, x: &Point, outward: &Point) -> Result<GraphChart> {
    let opts = ChartOptions { samples: 9, axis: Some(outward.normalize()), ..ChartOptions::default() };
    match extract_graph_chart(body, x, std::f64::consts::FRAC_PI_4, &opts) {
        Ok(c) => Ok(c),
        Err(Error::NoChartRadius { .. }) => {
            let dim = body.dim();
            Ok(GraphChart {
                dim,
                base_point: *x,
                frame: geom::frame_with_axis(&(-outward.normalize()), dim),
                theta: std::f64::consts::FRAC_PI_4,
                r: 0.0,
                rho: 0.0,
                lipschitz: 1.0,
                samples: 1,
                spacing: 0.0,
                values: vec![0.0],
            })
        }
        Err(e) => Err(e),
    }
}

/// Crossing points of `∂K` with the plane `⟨p, ν⟩ = level`.
fn section(body: &ConvexBody, nu: &Point, level: f64) -> Vec<Point> {
    section_on(body, &edges(body), nu, level)
}

fn section_on(body: &ConvexBody, edges: &[(usize, usize)], nu: &Point, level: f64) -> Vec<Point> {
    let v = body.vertices();
    let mut out = Vec::new();
    for &(a, b) in edges {
        let (sa, sb) = (nu.dot(&v[a]) - level, nu.dot(&v[b]) - level);
        if (sa < 0.0) != (sb < 0.0) {
            out.push(v[a] + (v[b] - v[a]) * (sa / (sa - sb)));
        }
    }
    out
}

/// Measure (length or area) of the section at depth `delta` below the
/// support plane of `nu`.
pub fn section_measure(body: &ConvexBody, nu: &Point, delta: f64) -> f64 {
    measure_on(body, &edges(body), nu, delta)
}

fn measure_on(body: &ConvexBody, edges: &[(usize, usize)], nu: &Point, delta: f64) -> f64 {
    if !(delta > 0.0) {
        return 0.0;
    }
    let pts = section_on(body, edges, nu, body.support(nu) - delta);
    if pts.len() < body.dim() {
        return 0.0;
    }
    let frame = geom::frame_with_axis(nu, body.dim());
    let t: Vec<Point> = pts.iter().map(|p| p2(p.dot(&Point::from(frame.column(0))), p.dot(&Point::from(frame.column(1))))).collect();
    if body.dim() == 2 {
        let lo = t.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        let hi = t.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
        return hi - lo;
    }
    ConvexBody::from_points(2, &t).map_or(0.0, |b| b.volume())
}

/// Outcome of one excision.
#[derive(Debug, Clone)]
pub struct Excision {
    pub state: BarrierState,
    pub solution: GraphSolution,
    pub record: ExcisionRecord,
}

struct ChartCoords {
    x0: Point,
    nu: Point,
    top: f64,
    tangents: Vec<Point>,
}

impl ChartCoords {
    fn to_chart(&self, p: &Point) -> (Point, f64) {
        let w = p - self.x0;
        let mut xp = Point::zeros();
        for (a, t) in self.tangents.iter().enumerate() {
            xp[a] = w.dot(t);
        }
        (xp, self.top - self.nu.dot(p))
    }

    fn to_world(&self, xp: &Point, t: f64) -> Point {
        let mut p = self.x0;
        for (a, tan) in self.tangents.iter().enumerate() {
            p += tan * xp[a];
        }
        p + self.nu * ((self.top - t) - self.nu.dot(&p))
    }
}

/// Interpolated solution value, falling back to the tangent plane at the
/// nearest node near `∂Ω`.
fn solution_value(sol: &GraphSolution, xp: &Point) -> f64 {
    let g = &sol.grid;
    let h = g.h;
    let (fi, fj) = ((xp.x - g.anchor.x) / h, if g.n == 2 { (xp.y - g.anchor.y) / h } else { 0.0 });
    let (i, j) = (fi.floor() as i64, fj.floor() as i64);
    let (s, t) = (fi - i as f64, fj - j as f64);
    if g.n == 1 {
        if let (Some(a), Some(b)) = (g.find(i, 0), g.find(i + 1, 0)) {
            return sol.values[a] * (1.0 - s) + sol.values[b] * s;
        }
    } else if let (Some(a), Some(b), Some(c), Some(d)) = (g.find(i, j), g.find(i + 1, j), g.find(i, j + 1), g.find(i + 1, j + 1)) {
        return sol.values[a] * (1.0 - s) * (1.0 - t)
            + sol.values[b] * s * (1.0 - t)
            + sol.values[c] * (1.0 - s) * t
            + sol.values[d] * s * t;
    }
    let q =
        (0..g.len()).min_by(|&a, &b| (g.nodes[a] - xp).norm_squared().total_cmp(&(g.nodes[b] - xp).norm_squared())).expect("nonempty grid");
    let d = xp - g.nodes[q];
    let v = sol.values[q] + sol.gradient[q][0] * d.x + if g.n == 2 { sol.gradient[q][1] * d.y } else { 0.0 };
    v.min(sol.boundary_value)
}

/// Replaces the part of the body above the curvature-`k` graph solving the
/// Dirichlet problem on the section at depth `delta` of the chart.
pub fn excise(state: &BarrierState, chart: &GraphChart, delta: f64, opts: &ExcisionOptions) -> Result<Excision> {
    excise_with_curvature(state, chart, delta, state.k, opts)
}

fn excise_with_curvature(state: &BarrierState, chart: &GraphChart, delta: f64, k: f64, opts: &ExcisionOptions) -> Result<Excision> {
    let body = &state.body;
    let dim = body.dim();
    let n = dim - 1;
    let x0 = chart.base_point;
    if state.frozen.in_collar(&x0) {
        return Err(Error::ExcisionRejected("chart base point lies in the frozen set".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::domain("excision depth must be positive"));
    }
    let nu = chart.outward();
    if delta > state.max_depth(&nu) {
        return Err(Error::ExcisionRejected(format!(
            "section at depth {delta:.6e} meets the frozen set (admissible depth {:.6e})",
            state.max_depth(&nu)
        )));
    }
    let top = body.support(&nu);
    let cc = ChartCoords { x0, nu, top, tangents: (0..n).map(|a| chart.frame.column(a).into()).collect() };

    let sec = section(body, &nu, top - delta);
    if sec.len() < dim {
        return Err(Error::domain("empty section: depth exceeds the body width"));
    }
    let sec_chart: Vec<Point> = sec.iter().map(|p| cc.to_chart(p).0).collect();
    let (domain, centre, radius) = if n == 1 {
        let lo = sec_chart.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        let hi = sec_chart.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
        (Domain::interval(lo, hi)?, p2(0.5 * (lo + hi), 0.0), 0.5 * (hi - lo))
    } else {
        let c: Point = sec_chart.iter().sum::<Point>() / sec_chart.len() as f64;
        let a = sec_chart.iter().map(|p| (p - c).norm()).fold(0.0, f64::max);
        (Domain::disk(c, a)?, c, a)
    };
    let h = opts.solver_h.unwrap_or(radius / opts.nodes_per_radius);
    let mut prob = GraphProblem::new(domain, h, Phi::sphere(k));
    prob.boundary_value = delta;
    let sol = solve_dirichlet(&prob, &opts.solve)?;

    let eps_t = 1e-12 * body.diameter();
    let verts = body.vertices();
    let keep: Vec<bool> = verts
        .par_iter()
        .map(|p| {
            let (xp, t) = cc.to_chart(p);
            t >= delta - eps_t || t >= solution_value(&sol, &xp) - eps_t
        })
        .collect();
    let mut pts: Vec<Point> = verts.iter().zip(&keep).filter(|(_, k)| **k).map(|(p, _)| *p).collect();
    let removed: Vec<Point> = verts.iter().zip(&keep).filter(|(_, k)| !**k).map(|(p, _)| *p).collect();
    let inside_tol = body.boundary_tol() + 1e-9 * body.diameter();
    let graph: Vec<Point> = sol
        .grid
        .nodes
        .par_iter()
        .zip(&sol.values)
        .map(|(xp, f)| cc.to_world(xp, *f))
        .filter(|p| body.signed_distance(p) <= inside_tol)
        .collect();
    let comparison = sol
        .grid
        .nodes
        .iter()
        .zip(&sol.values)
        .filter_map(|(xp, f)| {
            let origin = cc.to_world(xp, 0.0);
            body.ray_interval(&origin, &(-nu)).filter(|(t0, _)| *t0 <= delta).map(|(t0, _)| f - t0)
        })
        .fold(f64::INFINITY, f64::min);
    pts.extend(graph.iter().copied());
    pts.extend(sec.iter().copied());
    let new_body = ConvexBody::from_points(dim, &pts)?.with_resolution(body.resolution().max(h));

    let conv_tol = 1e-6 * body.diameter();
    let buried = graph.par_iter().filter(|p| new_body.signed_distance(p) < -conv_tol).count();
    if buried > 0 {
        return Err(Error::ExcisionRejected(format!("{buried} graph point(s) fall inside the new hull")));
    }
    let (v0, v1) = (body.volume(), new_body.volume());
    if v1 > v0 * (1.0 + 1e-12) {
        return Err(Error::MonotonicityViolated { before: v0, after: v1 });
    }
    let increment = removed.par_iter().map(|p| new_body.distance_and_project(p).0).reduce(|| 0.0, f64::max);
    let record = ExcisionRecord {
        base_point: geom::to_vec(&x0, dim),
        normal: geom::to_vec(&nu, dim),
        delta,
        chart_rho: chart.rho,
        domain_center: geom::to_vec(&centre, n),
        domain_radius: radius,
        solver_h: h,
        nodes: sol.grid.len(),
        residual: sol.diagnostics.residual,
        comparison,
        removed_vertices: removed.len(),
        volume_before: v0,
        volume_after: v1,
        hausdorff_increment: increment,
    };
    let mut next = state.clone();
    next.body = new_body;
    next.history.push(record.clone());
    next.hausdorff_increments.push(increment);
    Ok(Excision { state: next, solution: sol, record })
}

#[derive(Debug, Clone)]
pub struct ClassifyOptions {
    pub tol_kappa: f64,
    /// Neighbours used by the quadric fit.
    pub neighbours: Option<usize>,
    /// Tangent directions tried by the segment test of the local geodesic property.
    pub lgp_directions: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { tol_kappa: 0.1, neighbours: None, lgp_directions: 36 }
    }
}

/// Segment test: some tangent chord of half-length `r` through `x` stays in `K`.
fn tangent_segment(body: &ConvexBody, x: &Point, normal: &Point, r: f64, dirs: usize) -> bool {
    let dim = body.dim();
    let frame = geom::frame_with_axis(normal, dim);
    let tol = body.boundary_tol();
    let count = if dim == 2 { 1 } else { dirs.max(1) };
    (0..count).any(|i| {
        let u: Point = if dim == 2 {
            frame.column(0).into()
        } else {
            let a = std::f64::consts::PI * i as f64 / count as f64;
            Point::from(frame.column(0)) * a.cos() + Point::from(frame.column(1)) * a.sin()
        };
        body.signed_distance(&(x + u * r)) <= tol && body.signed_distance(&(x - u * r)) <= tol
    })
}

fn classify_points(state: &BarrierState, opts: &ClassifyOptions) -> Vec<Classification> {
    let body = &state.body;
    let dim = body.dim();
    let verts = body.vertices();
    let normals = vertex_normals(body);
    let free: Vec<usize> = (0..verts.len()).filter(|&i| !state.frozen.in_collar(&verts[i])).collect();
    let k_nn = opts.neighbours.unwrap_or(if dim == 2 { 7 } else { 16 });
    let cell = (body.diameter() / (verts.len() as f64).powf(1.0 / (dim - 1) as f64)).max(1e-9);
    let index = SpatialIndex::new(verts, &free, cell);
    let lgp_r = 2.5 * body.resolution();
    let k = target_curvature(dim, state.k);
    (0..verts.len())
        .into_par_iter()
        .map(|i| {
            let x = verts[i];
            if state.frozen.in_collar(&x) {
                return Classification {
                    point: x,
                    tag: Tag::Frozen,
                    collar: !state.frozen.contains(&x),
                    curvature: None,
                    normal: normals[i],
                };
            }
            let nb: Vec<Point> = index.nearest(&x, k_nn, free.len()).into_iter().map(|q| verts[q]).collect();
            let fit = fit_curvature(dim, &x, &normals[i], &nb);
            let (curv, normal, min_principal) = match fit {
                Some((c, nrm, m)) => (Some(c), nrm, m),
                None => (None, normals[i], 0.0),
            };
            let tag = match curv {
                Some(c) if (c - k).abs() <= opts.tol_kappa * k => Tag::SmoothConstantK,
                _ if min_principal < opts.tol_kappa * k.powf(1.0 / (dim - 1) as f64)
                    && tangent_segment(body, &x, &normal, lgp_r, opts.lgp_directions) =>
                {
                    Tag::LgpSingular
                }
                _ => Tag::NeedsExcision,
            };
            Classification { point: x, tag, collar: false, curvature: curv, normal }
        })
        .collect()
}

/// Tag of one boundary point.
pub fn classify_boundary_point(state: &BarrierState, x: &Point, opts: &ClassifyOptions) -> Result<Classification> {
    let body = &state.body;
    if body.signed_distance(x).abs() > state.frozen.tol.max(body.boundary_tol()) {
        return Err(Error::domain("point is not on the boundary"));
    }
    let verts = body.vertices();
    let nearest =
        (0..verts.len()).min_by(|&a, &b| (verts[a] - x).norm_squared().total_cmp(&(verts[b] - x).norm_squared())).expect("nonempty body");
    let mut c = classify_points(state, opts).swap_remove(nearest);
    c.point = *x;
    if state.frozen.in_collar(x) {
        c.tag = Tag::Frozen;
        c.collar = !state.frozen.contains(x);
    }
    Ok(c)
}

pub fn classify_all(state: &BarrierState, opts: &ClassifyOptions) -> Vec<Classification> {
    classify_points(state, opts)
}

#[derive(Debug, Clone)]
pub struct PlateauOptions {
    pub tol_h: f64,
    pub classify: ClassifyOptions,
    pub max_iters: usize,
    pub excision: ExcisionOptions,
    /// Candidate sites examined per iteration.
    pub max_candidates: usize,
    /// Smallest section radius worth excising, relative to the diameter.
    pub min_section: f64,
}

impl Default for PlateauOptions {
    fn default() -> Self {
        PlateauOptions {
            tol_h: 1e-3,
            classify: ClassifyOptions::default(),
            max_iters: 8,
            excision: ExcisionOptions::default(),
            max_candidates: 1 << 16,
            min_section: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// Every free sample has curvature `k` within tolerance.
    Converged,
    /// The last excision moved the body by less than `tol_H`.
    HausdorffStalled,
    /// Violators remain but no admissible excision site exists.
    NoAdmissibleSite,
    MaxIterations,
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationLog {
    pub iteration: usize,
    pub volume: f64,
    pub vertices: usize,
    pub counts: TagCounts,
    pub min_free_curvature: Option<f64>,
    pub max_free_curvature: Option<f64>,
    /// Points reclassified from `lgp_singular` by the sub-curvature check.
    pub lgp_remedied: usize,
    pub site: Option<Vec<f64>>,
    pub delta: Option<f64>,
    pub hausdorff_increment: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PlateauRun {
    pub state: BarrierState,
    pub log: Vec<IterationLog>,
    pub classification: Vec<Classification>,
    pub status: RunStatus,
}

impl PlateauRun {
    pub fn counts(&self) -> TagCounts {
        TagCounts::of(&self.classification)
    }

    /// Boundary vertices outside the frozen set.
    pub fn free_surface(&self) -> Vec<Point> {
        let f = &self.state.frozen;
        self.state.body.vertices().iter().filter(|p| !f.contains(p)).copied().collect()
    }
}

/// A local geodesic point off `X` is not on a volume minimiser when a
/// sub-curvature (`k/2`) excision through a transverse chart still removes
/// volume.
fn lgp_remedy(state: &BarrierState, c: &Classification, opts: &ExcisionOptions) -> bool {
    let depth = state.max_depth(&c.normal);
    if !(depth > 0.0) {
        return false;
    }
    let Ok(chart) = excision_chart(&state.body, &c.point, &c.normal) else { return false };
    match excise_with_curvature(state, &chart, depth, 0.5 * state.k, opts) {
        Ok(e) => e.record.volume_after < e.record.volume_before,
        Err(_) => false,
    }
}

fn free_curvature_range(cls: &[Classification]) -> (Option<f64>, Option<f64>) {
    let v: Vec<f64> = cls.iter().filter(|c| c.tag != Tag::Frozen).filter_map(|c| c.curvature).collect();
    if v.is_empty() {
        (None, None)
    } else {
        (Some(v.iter().copied().fold(f64::INFINITY, f64::min)), Some(v.iter().copied().fold(f64::NEG_INFINITY, f64::max)))
    }
}

fn lex(a: &Point, b: &Point) -> std::cmp::Ordering {
    a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)).then(a.z.total_cmp(&b.z))
}

/// Volume-minimising iteration over excisions until the free boundary has
/// constant curvature `k`.
pub fn solve_plateau(body: ConvexBody, frozen: FrozenSet, k: f64, opts: &PlateauOptions) -> Result<PlateauRun> {
    let mut state = BarrierState::new(body, frozen, k)?;
    let mut log = Vec::new();
    let mut status = RunStatus::MaxIterations;
    let mut cls = classify_all(&state, &opts.classify);
    for iteration in 0..opts.max_iters {
        let mut remedied = 0;
        for c in cls.iter_mut().filter(|c| c.tag == Tag::LgpSingular) {
            if lgp_remedy(&state, c, &opts.excision) {
                c.tag = Tag::NeedsExcision;
                remedied += 1;
            }
        }
        let counts = TagCounts::of(&cls);
        let (lo, hi) = free_curvature_range(&cls);
        let mut entry = IterationLog {
            iteration,
            volume: state.volume(),
            vertices: state.body.vertices().len(),
            counts,
            min_free_curvature: lo,
            max_free_curvature: hi,
            lgp_remedied: remedied,
            site: None,
            delta: None,
            hausdorff_increment: None,
        };
        if counts.needs_excision == 0 && counts.lgp_singular == 0 {
            log.push(entry);
            status = RunStatus::Converged;
            break;
        }
        let target = target_curvature(state.body.dim(), k);
        let mut cand: Vec<&Classification> =
            cls.iter().filter(|c| c.tag == Tag::NeedsExcision && c.curvature.is_some_and(|v| v > target)).collect();
        if cand.is_empty() {
            log.push(entry);
            status = RunStatus::NoAdmissibleSite;
            break;
        }
        cand.sort_by(|a, b| lex(&a.point, &b.point));
        let stride = cand.len().div_ceil(opts.max_candidates.max(1));
        let cand: Vec<&Classification> = cand.into_iter().step_by(stride.max(1)).collect();
        let body_edges = edges(&state.body);
        let clearance = state.clearance(&body_edges);
        let scored: Vec<(f64, f64, &Classification)> = cand
            .par_iter()
            .map(|c| {
                let depth = state.max_depth_within(&clearance, &c.normal);
                (measure_on(&state.body, &body_edges, &c.normal, depth), depth, *c)
            })
            .collect();
        let mut best: Option<(f64, f64, &Classification)> = None;
        for s in scored {
            if best.is_none_or(|b| s.0 > b.0) {
                best = Some(s);
            }
        }
        let (measure, depth, site) = best.expect("nonempty candidates");
        if !(measure >= (opts.min_section * state.body.diameter()).powi(state.body.dim() as i32 - 1)) {
            log.push(entry);
            status = RunStatus::NoAdmissibleSite;
            break;
        }
        let chart = excision_chart(&state.body, &site.point, &site.normal)?;
        let ex = excise(&state, &chart, depth, &opts.excision)?;
        entry.site = Some(geom::to_vec(&site.point, state.body.dim()));
        entry.delta = Some(depth);
        entry.hausdorff_increment = Some(ex.record.hausdorff_increment);
        let inc = ex.record.hausdorff_increment;
        let shrunk = ex.record.volume_after < ex.record.volume_before;
        log.push(entry);
        if shrunk {
            state = ex.state;
        }
        cls = classify_all(&state, &opts.classify);
        if !shrunk || inc < opts.tol_h {
            status = RunStatus::HausdorffStalled;
            let counts = TagCounts::of(&cls);
            if counts.needs_excision == 0 && counts.lgp_singular == 0 {
                status = RunStatus::Converged;
            }
            break;
        }
    }
    Ok(PlateauRun { state, log, classification: cls, status })
}

/// Hausdorff distance (sum convention) between the free boundary of a body
/// whose frozen set is its lower half and the round cap of Gauss curvature
/// `k` spanning the equator of radius `radius` centred at the origin. Both
/// directed parts are exact against the analytic sphere: free vertices are
/// measured radially, and a dense cap sample against the body boundary.
pub fn hausdorff_to_cap(state: &BarrierState, radius: f64) -> f64 {
    let body = &state.body;
    let dim = body.dim();
    let r = 1.0 / state.k.sqrt();
    let up = dim - 1;
    let mut c = Point::zeros();
    c[up] = -(r * r - radius * radius).sqrt();
    let free = body.vertices().iter().filter(|p| !state.frozen.contains(p));
    let to_cap = free.map(|p| ((p - c).norm() - r).abs()).fold(0.0, f64::max);
    let height = |rho: f64| (r * r - rho * rho).sqrt() + c[up];
    let mut sample = Vec::new();
    let rings = 120;
    for i in 0..=rings {
        let rho = radius * i as f64 / rings as f64;
        if dim == 2 {
            sample.push(p2(rho, height(rho)));
            sample.push(p2(-rho, height(rho)));
        } else {
            let m = 1 + 6 * i;
            for j in 0..m {
                let a = std::f64::consts::TAU * j as f64 / m as f64;
                sample.push(crate::geom::p3(rho * a.cos(), rho * a.sin(), height(rho)));
            }
        }
    }
    let from_cap = sample.par_iter().map(|y| body.signed_distance(y).abs()).reduce(|| 0.0, f64::max);
    to_cap + from_cap
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::p3;

    #[test]
    fn quadric_fit_recovers_sphere_curvature() {
        let r: f64 = 2.0;
        let x = p3(0.0, 0.0, r);
        let mut nb = Vec::new();
        for i in -3..=3 {
            for j in -3..=3 {
                let (u, v) = (0.05 * i as f64, 0.05 * j as f64);
                nb.push(p3(u, v, (r * r - u * u - v * v).sqrt()));
            }
        }
        let (k, n, m) = fit_curvature(3, &x, &p3(0.05, 0.0, 1.0).normalize(), &nb).unwrap();
        assert!((k - 0.25).abs() < 5e-3, "{k}");
        assert!((m - 0.5).abs() < 5e-3, "{m}");
        assert!((n - p3(0.0, 0.0, 1.0)).norm() < 1e-3);
    }

    #[test]
    fn nearest_matches_brute_force() {
        use rand::Rng;
        let mut rng = geom::seeded_rng(3);
        let pts: Vec<Point> =
            (0..2000).map(|_| p3(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-0.1..0.1))).collect();
        let ids: Vec<usize> = (0..pts.len()).filter(|i| i % 7 != 0).collect();
        let index = SpatialIndex::new(&pts, &ids, 0.045);
        for q in pts.iter().take(50) {
            let got = index.nearest(q, 16, ids.len());
            let mut all: Vec<(f64, usize)> = ids.iter().map(|&i| ((pts[i] - q).norm(), i)).collect();
            all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            assert_eq!(got, all.iter().take(16).map(|x| x.1).collect::<Vec<_>>());
        }
    }

    #[test]
    fn frozen_half_space_depths() {
        let ball = ConvexBody::ball(Point::zeros(), 1.0, 3);
        let f = FrozenSet::lower_half(3, 1e-3).unwrap();
        let st = BarrierState::new(ball, f, 0.25).unwrap();
        let d = st.max_depth(&p3(0.0, 0.0, 1.0));
        assert!((d - (1.0 - 2e-3)).abs() < 1e-6, "{d}");
        let area = section_measure(&st.body, &p3(0.0, 0.0, 1.0), d);
        assert!((area - std::f64::consts::PI).abs() < 0.05, "{area}");
    }
}
