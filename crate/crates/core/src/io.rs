//! File formats: body JSON, OBJ meshes, polyline CSV, binary grids with JSON
//! headers, solution tables and artifact metadata.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::convex::ConvexBody;
use crate::error::{Error, Result};
use crate::field::{GridHeader, ScalarGrid};
use crate::geom::{from_slice, Point};
use crate::ma::GraphSolution;

/// Floats in every text artifact carry 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0.0000000000000000e0".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// JSON formatter writing every finite float with 17 significant digits.
struct Digits17;

impl serde_json::ser::Formatter for Digits17 {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact JSON with 17-digit floats; non-finite floats become `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Digits17);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

/// Provenance embedded in artifacts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub version: String,
    pub seed: u64,
    pub scenario_hash: String,
}

impl Meta {
    pub fn new(seed: u64, scenario: &str) -> Self {
        Meta { version: version_string(), seed, scenario_hash: scenario_hash(scenario) }
    }
}

pub fn version_string() -> String {
    format!("plateau {}", crate::VERSION)
}

/// Hex SHA-256 of the scenario text.
pub fn scenario_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyJson {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
}

fn parse_points(dim: usize, rows: &[Vec<f64>]) -> Result<Vec<Point>> {
    if !(dim == 2 || dim == 3) {
        return Err(Error::Parse(format!("dimension must be 2 or 3, got {dim}")));
    }
    rows.iter()
        .map(|r| {
            if r.len() != dim || r.iter().any(|v| !v.is_finite()) {
                Err(Error::Parse(format!("vertex {r:?} does not have {dim} finite coordinates")))
            } else {
                Ok(from_slice(r).expect("length checked"))
            }
        })
        .collect()
}

pub fn body_from_json(text: &str) -> Result<ConvexBody> {
    let b: BodyJson = serde_json::from_str(text)?;
    ConvexBody::from_points(b.dim, &parse_points(b.dim, &b.vertices)?)
}

pub fn body_to_json(body: &ConvexBody) -> String {
    let dim = body.dim();
    let vertices = body.vertices().iter().map(|v| v.as_slice()[..dim].to_vec()).collect();
    serde_json::to_string(&BodyJson { dim, vertices }).expect("body serialises")
}

/// Vertices and triangles of an ASCII OBJ file (polygons are fanned).
pub fn parse_obj(text: &str) -> Result<(Vec<Point>, Vec<[usize; 3]>)> {
    let mut verts = Vec::new();
    let mut faces = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it
                    .take(3)
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", ln + 1)))?;
                if c.len() != 3 {
                    return Err(Error::Parse(format!("line {}: vertex needs 3 coordinates", ln + 1)));
                }
                verts.push(Point::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let idx: Vec<usize> = it
                    .map(|t| {
                        let first = t.split('/').next().unwrap_or("");
                        let i: i64 = first.parse().map_err(|_| Error::Parse(format!("line {}: bad face index {t}", ln + 1)))?;
                        let k = if i < 0 { verts.len() as i64 + i } else { i - 1 };
                        usize::try_from(k).map_err(|_| Error::Parse(format!("line {}: face index {i} out of range", ln + 1)))
                    })
                    .collect::<Result<_>>()?;
                if idx.len() < 3 {
                    return Err(Error::Parse(format!("line {}: face needs 3 indices", ln + 1)));
                }
                for w in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[w], idx[w + 1]]);
                }
            }
            _ => {}
        }
    }
    if faces.iter().flatten().any(|&i| i >= verts.len()) {
        return Err(Error::Parse("face index out of range".into()));
    }
    Ok((verts, faces))
}

pub fn body_from_obj(text: &str) -> Result<ConvexBody> {
    let (v, _) = parse_obj(text)?;
    ConvexBody::from_points(3, &v)
}

/// OBJ text; `comments` become leading `#` lines.
pub fn write_obj(vertices: &[Point], faces: &[[usize; 3]], comments: &[String]) -> String {
    let mut s = String::new();
    for c in comments {
        let _ = writeln!(s, "# {c}");
    }
    for v in vertices {
        let _ = writeln!(s, "v {} {} {}", fmt_f64(v.x), fmt_f64(v.y), fmt_f64(v.z));
    }
    for f in faces {
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    s
}

pub fn body_to_obj(body: &ConvexBody, comments: &[String]) -> String {
    write_obj(body.vertices(), &body.boundary_triangles(), comments)
}

/// Planar points from CSV rows `x,y`; a non-numeric first row is a header.
pub fn parse_polyline_csv(text: &str) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> = cells.iter().map(|c| c.parse::<f64>()).collect();
        match parsed {
            Ok(v) if v.len() == 2 => out.push(Point::new(v[0], v[1], 0.0)),
            Ok(_) => return Err(Error::Parse(format!("line {}: expected two columns", ln + 1))),
            Err(_) if out.is_empty() && ln == 0 => continue,
            Err(e) => return Err(Error::Parse(format!("line {}: {e}", ln + 1))),
        }
    }
    Ok(out)
}

pub fn body_from_polyline_csv(text: &str) -> Result<ConvexBody> {
    ConvexBody::from_points(2, &parse_polyline_csv(text)?)
}

pub fn write_polyline_csv(points: &[Point]) -> String {
    let mut s = String::from("x,y\r\n");
    for p in points {
        let _ = write!(s, "{},{}\r\n", fmt_f64(p.x), fmt_f64(p.y));
    }
    s
}

/// Reads a body by extension: `.json`, `.obj`, `.csv`.
pub fn read_body(path: &Path) -> Result<ConvexBody> {
    let text = fs::read_to_string(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => body_from_json(&text),
        Some("obj") => body_from_obj(&text),
        Some("csv") => body_from_polyline_csv(&text),
        _ => Err(Error::Parse(format!("unknown body format: {}", path.display()))),
    }
}

/// Path of the JSON header belonging to a binary grid file.
pub fn header_path(bin: &Path) -> PathBuf {
    let mut s = bin.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_grid(grid: &ScalarGrid, bin: &Path) -> Result<()> {
    fs::write(bin, grid.to_bytes())?;
    fs::write(header_path(bin), to_json(&grid.header())?)?;
    Ok(())
}

pub fn read_grid(bin: &Path) -> Result<ScalarGrid> {
    let header: GridHeader = serde_json::from_str(&fs::read_to_string(header_path(bin))?)?;
    ScalarGrid::from_parts(&header, &fs::read(bin)?)
}

/// RFC-4180 table `x,y,f,kappa,residual` (`y = 0` for intervals).
pub fn solution_csv(sol: &GraphSolution) -> String {
    let mut s = String::from("x,y,f,kappa,residual\r\n");
    for k in 0..sol.grid.len() {
        let x = sol.grid.nodes[k];
        let _ = write!(
            s,
            "{},{},{},{},{}\r\n",
            fmt_f64(x.x),
            fmt_f64(x.y),
            fmt_f64(sol.values[k]),
            fmt_f64(sol.curvature[k]),
            fmt_f64(sol.residual[k])
        );
    }
    s
}

/// Solution values on the full lattice; nodes outside `Ω` hold NaN.
pub fn solution_grid(sol: &GraphSolution) -> ScalarGrid {
    let g = &sol.grid;
    let [i0, i1, j0, j1] = g.lattice_range();
    let origin = g.anchor + Point::new(i0 as f64 * g.h, j0 as f64 * g.h, 0.0);
    let shape = [(i1 - i0 + 1) as usize, (j1 - j0 + 1) as usize, 1];
    let mut values = vec![f64::NAN; shape[0] * shape[1]];
    for (k, l) in g.lattice.iter().enumerate() {
        let (i, j) = ((l[0] - i0) as usize, (l[1] - j0) as usize);
        values[i + shape[0] * j] = sol.values[k];
    }
    ScalarGrid { dim: 2, origin, spacing: g.h, shape, values }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let x = 0.1 + 0.2;
        let s = fmt_f64(x);
        assert_eq!(s.parse::<f64>().unwrap(), x);
        assert_eq!(s.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).count(), 17);
    }

    #[test]
    fn json_floats_keep_seventeen_digits() {
        let s = to_json(&serde_json::json!({"a": 0.1, "b": [1.0, f64::NAN], "c": 3})).unwrap();
        assert_eq!(s, r#"{"a":1.0000000000000001e-1,"b":[1.0000000000000000e0,null],"c":3}"#);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["a"].as_f64(), Some(0.1));
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(scenario_hash("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn obj_faces_are_fanned_and_one_based() {
        let (v, f) = parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n").unwrap();
        assert_eq!(v.len(), 4);
        assert_eq!(f, vec![[0, 1, 2], [0, 2, 3]]);
        assert!(parse_obj("v 0 0 0\nf 1 2 3\n").is_err());
    }

    #[test]
    fn polyline_header_is_skipped() {
        let p = parse_polyline_csv("x,y\n0,0\n1,0\n0,1\n").unwrap();
        assert_eq!(p.len(), 3);
        assert!(parse_polyline_csv("0,0\n1,a\n").is_err());
    }
}
