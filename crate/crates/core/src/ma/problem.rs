//! Dirichlet problems `F(D²f)/G(Df) = φ` in `Ω`, `f = b` on `∂Ω`, their
//! lower barriers and the TOML problem format.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::field::{GridHeader, ScalarGrid};
use crate::geom::{p2, Point};
use crate::ma::domain::Domain;
use crate::ma::grid::Grid;
use crate::ma::operator::{f_small, GradientWeight};

pub type ScalarFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// Right-hand side `φ > 0`.
#[derive(Clone)]
pub enum Phi {
    Constant(f64),
    Field(ScalarFn),
}

impl Phi {
    pub fn at(&self, x: &Point) -> f64 {
        match self {
            Phi::Constant(c) => *c,
            Phi::Field(f) => f(x),
        }
    }

    /// `φ` for a graph of Gauss curvature `k` (a sphere of radius `1/√k`):
    /// `√k` in both dimensions.
    pub fn sphere(k: f64) -> Self {
        Phi::Constant(k.sqrt())
    }
}

impl fmt::Debug for Phi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phi::Constant(c) => write!(f, "Constant({c})"),
            Phi::Field(_) => write!(f, "Field(..)"),
        }
    }
}

/// Strictly convex lower barrier `f̂` with `f̂ = b` on `∂Ω`.
#[derive(Clone)]
pub enum BarrierSpec {
    /// `scale ×` a cap of a sphere through `∂Ω` whose curvature exceeds the
    /// target; disks and intervals only.
    AutoCap {
        scale: f64,
    },
    /// Samples interpolated at the nodes (values relative to the boundary data).
    Grid(ScalarGrid),
    Function(ScalarFn),
}

impl fmt::Debug for BarrierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BarrierSpec::AutoCap { scale } => write!(f, "AutoCap(scale = {scale})"),
            BarrierSpec::Grid(g) => write!(f, "Grid({:?})", g.shape),
            BarrierSpec::Function(_) => write!(f, "Function(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GraphProblem {
    pub domain: Domain,
    pub h: f64,
    pub phi: Phi,
    pub weight: GradientWeight,
    pub barrier: BarrierSpec,
    /// Constant Dirichlet value.
    pub boundary_value: f64,
    pub tol: f64,
}

/// Residual tolerances used when a problem does not set one.
pub fn default_tol(n: usize) -> f64 {
    if n == 1 {
        1e-8
    } else {
        1e-6
    }
}

/// A problem sampled on its grid.
#[derive(Debug, Clone)]
pub struct Discrete {
    pub grid: Arc<Grid>,
    pub phi: Vec<f64>,
    /// Barrier values at the nodes (including the boundary value).
    pub barrier: Vec<f64>,
    /// `min (F(D²f̂) − φ·G(Df̂))` over the nodes.
    pub margin: f64,
}

impl GraphProblem {
    pub fn new(domain: Domain, h: f64, phi: Phi) -> Self {
        let n = domain.n();
        GraphProblem {
            domain,
            h,
            phi,
            weight: GradientWeight::G0,
            barrier: BarrierSpec::AutoCap { scale: 1.0 },
            boundary_value: 0.0,
            tol: default_tol(n),
        }
    }

    pub fn with_weight(mut self, w: GradientWeight) -> Self {
        self.weight = w;
        self
    }

    pub fn with_barrier(mut self, b: BarrierSpec) -> Self {
        self.barrier = b;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn n(&self) -> usize {
        self.domain.n()
    }

    /// Cap `c(x) = √(R² − a²) − √(R² − ‖x − m‖²)` through the round boundary
    /// of radius `a`. `R` is the larger of three quarters of the target
    /// radius `1/φ` and the midpoint between `a` and `1/φ` (just above `a`
    /// when the target sphere does not reach the boundary). Under the unit
    /// weight the Hessian of the cap is only bounded below by `1/R`, so the
    /// scale is raised until it clears `φ` by half.
    fn auto_cap(&self, scale: f64) -> Result<ScalarFn> {
        let (m, a) = match &self.domain {
            Domain::Interval { a, b } => (p2(0.5 * (a + b), 0.0), 0.5 * (b - a)),
            Domain::Disk { center, radius } => (*center, *radius),
            _ => return Err(Error::domain("auto-cap barrier needs a disk or interval domain; supply a barrier grid")),
        };
        let phi_max = match &self.phi {
            Phi::Constant(c) => *c,
            Phi::Field(f) => {
                let g = Grid::new(&self.domain, self.h);
                g.nodes.iter().map(|x| f(x)).fold(0.0, f64::max)
            }
        };
        let target = 1.0 / phi_max;
        let r = if a < target { (0.75 * target).max(0.5 * (a + target)) } else { 1.02 * a };
        let scale = match self.weight {
            GradientWeight::One => scale.max(1.5 * phi_max * r),
            GradientWeight::G0 => scale,
        };
        let top = (r * r - a * a).sqrt();
        let n = self.n();
        Ok(Arc::new(move |x: &Point| {
            let d2 = if n == 1 { (x.x - m.x).powi(2) } else { (x - m).xy().norm_squared() };
            scale * (top - (r * r - d2).max(0.0).sqrt())
        }))
    }

    /// Samples `φ` and the barrier on the grid and checks the invariants.
    pub fn discretize(&self) -> Result<Discrete> {
        if !(self.h > 0.0) {
            return Err(Error::domain("grid spacing must be positive"));
        }
        let grid = Arc::new(Grid::new(&self.domain, self.h));
        if grid.is_empty() {
            return Err(Error::domain("no interior grid nodes: domain not resolved at this spacing"));
        }
        let phi: Vec<f64> = grid.nodes.iter().map(|x| self.phi.at(x)).collect();
        if let Some(bad) = phi.iter().find(|v| !(**v > 0.0)) {
            return Err(Error::domain(format!("φ must be positive, found {bad}")));
        }
        let bv = self.boundary_value;
        let barrier: Vec<f64> = match &self.barrier {
            BarrierSpec::AutoCap { scale } => {
                let c = self.auto_cap(*scale)?;
                grid.nodes.iter().map(|x| bv + c(x)).collect()
            }
            BarrierSpec::Function(f) => grid.nodes.iter().map(|x| bv + f(x)).collect(),
            BarrierSpec::Grid(g) => grid
                .nodes
                .iter()
                .map(|x| g.interpolate(x).map(|v| bv + v).ok_or_else(|| Error::domain("barrier grid does not cover the domain")))
                .collect::<Result<_>>()?,
        };
        let n = self.n();
        let mut margin = f64::INFINITY;
        for k in 0..grid.len() {
            let (g, hs) = grid.derivatives(&barrier, bv, k);
            let f = f_small(&hs, n).map(|(f, _)| f).unwrap_or(f64::NEG_INFINITY);
            margin = margin.min(f - phi[k] * self.weight.eval(g, n).0);
        }
        Ok(Discrete { grid, phi, barrier, margin })
    }
}

/// TOML problem file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub domain: DomainSpec,
    pub h: f64,
    pub phi: PhiSpec,
    #[serde(rename = "G", alias = "g", default)]
    pub weight: GradientWeight,
    #[serde(default = "default_barrier")]
    pub barrier: String,
    pub tol: Option<f64>,
}

fn default_barrier() -> String {
    "auto-cap scale=1".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum DomainSpec {
    /// `"disk r=…"` or `"interval a=… b=…"`.
    Named(String),
    /// Polygon vertices, or the two endpoints of an interval.
    Vertices(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PhiSpec {
    Value(f64),
    /// `"sphere k=…"` or `"constant …"`.
    Named(String),
}

/// `key=value` pairs after a leading keyword.
fn keyed(s: &str) -> Result<(String, Vec<(String, f64)>)> {
    let mut parts = s.split_whitespace();
    let head = parts.next().ok_or_else(|| Error::Parse("empty specification".into()))?.to_string();
    let mut kv = Vec::new();
    for p in parts {
        let (k, v) = p.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=value, got {p:?}")))?;
        let v: f64 = v.parse().map_err(|_| Error::Parse(format!("bad number {v:?}")))?;
        kv.push((k.to_string(), v));
    }
    Ok((head, kv))
}

fn get(kv: &[(String, f64)], key: &str) -> Result<f64> {
    kv.iter().find(|(k, _)| k == key).map(|(_, v)| *v).ok_or_else(|| Error::Parse(format!("missing {key}=")))
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Builds the problem; relative barrier files resolve against `base`.
    pub fn build(&self, base: &Path) -> Result<GraphProblem> {
        let domain = match (&self.domain, self.n) {
            (DomainSpec::Named(s), _) => {
                let (head, kv) = keyed(s)?;
                match head.as_str() {
                    "disk" if self.n == 2 => Domain::disk(Point::zeros(), get(&kv, "r")?)?,
                    "interval" if self.n == 1 => Domain::interval(get(&kv, "a")?, get(&kv, "b")?)?,
                    _ => return Err(Error::Parse(format!("unknown domain {s:?} for n = {}", self.n))),
                }
            }
            (DomainSpec::Vertices(v), 1) => {
                let xs: Vec<f64> = v.iter().map(|c| c.first().copied().unwrap_or(f64::NAN)).collect();
                if xs.len() != 2 {
                    return Err(Error::Parse("an interval needs two endpoints".into()));
                }
                Domain::interval(xs[0].min(xs[1]), xs[0].max(xs[1]))?
            }
            (DomainSpec::Vertices(v), 2) => {
                let pts = v
                    .iter()
                    .map(|c| if c.len() == 2 { Ok(p2(c[0], c[1])) } else { Err(Error::Parse("polygon vertex needs 2 coordinates".into())) })
                    .collect::<Result<Vec<_>>>()?;
                Domain::polygon(&pts)?
            }
            _ => return Err(Error::Parse(format!("unsupported n = {}", self.n))),
        };
        let phi = match &self.phi {
            PhiSpec::Value(v) => Phi::Constant(*v),
            PhiSpec::Named(s) => {
                let (head, kv) = keyed(s)?;
                match head.as_str() {
                    "sphere" => Phi::sphere(get(&kv, "k")?),
                    "constant" => Phi::Constant(get(&kv, "value")?),
                    _ => return Err(Error::Parse(format!("unknown phi {s:?}"))),
                }
            }
        };
        let barrier = parse_barrier(&self.barrier, base)?;
        let mut p = GraphProblem::new(domain, self.h, phi).with_weight(self.weight).with_barrier(barrier);
        if let Some(t) = self.tol {
            p.tol = t;
        }
        Ok(p)
    }
}

/// `"auto-cap scale=…"` or `"grid <file>"` (binary samples with a JSON
/// header next to it at `<file>.json`).
pub fn parse_barrier(s: &str, base: &Path) -> Result<BarrierSpec> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("grid") {
        let path: PathBuf = base.join(rest.trim());
        let header_path = PathBuf::from(format!("{}.json", path.display()));
        let header: GridHeader = serde_json::from_str(&std::fs::read_to_string(&header_path)?)?;
        let bytes = std::fs::read(&path)?;
        return Ok(BarrierSpec::Grid(ScalarGrid::from_parts(&header, &bytes)?));
    }
    let (head, kv) = keyed(s)?;
    if head != "auto-cap" {
        return Err(Error::Parse(format!("unknown barrier {s:?}")));
    }
    let scale = if kv.is_empty() { 1.0 } else { get(&kv, "scale")? };
    if !(scale >= 1.0) {
        return Err(Error::Parse("auto-cap scale must be at least 1".into()));
    }
    Ok(BarrierSpec::AutoCap { scale })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_cap_problem() {
        let text = r#"
            n = 2
            domain = "disk r=1"
            h = 0.0625
            phi = "sphere k=0.25"
            G = "g0"
            barrier = "auto-cap scale=1.2"
            tol = 1e-6
        "#;
        let p = ProblemFile::parse(text).unwrap().build(Path::new(".")).unwrap();
        assert_eq!(p.n(), 2);
        assert!(matches!(p.phi, Phi::Constant(v) if (v - 0.5).abs() < 1e-15));
        let d = p.discretize().unwrap();
        assert!(d.margin > 0.0);
    }

    #[test]
    fn polygon_needs_barrier_grid() {
        let text = r#"
            n = 2
            domain = [[0, 0], [1, 0], [0, 1]]
            h = 0.1
            phi = 0.5
        "#;
        let p = ProblemFile::parse(text).unwrap().build(Path::new(".")).unwrap();
        assert!(p.discretize().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ProblemFile::parse("n = 1\ndomain = \"interval a=-1 b=1\"\nh = 0.1\nphi = 0.5\nfoo = 1").is_err());
    }
}
