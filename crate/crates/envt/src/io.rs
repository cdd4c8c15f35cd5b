//! OBJ / OFF meshes and per-vertex scalar fields (CSV, PLY).
//!
//! OBJ indices are 1-based (negative indices count back from the last vertex),
//! OFF indices 0-based. Only triangles are accepted. Coordinates are written
//! in Rust's shortest round-trip form, so a save/load cycle is lossless.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use envt_core::{CurvatureField, MeshError, TriMesh, Vec3};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}:{line}: {msg}", path.display())]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{}: {source}", path.display())]
    Mesh { path: PathBuf, source: MeshError },
    #[error("{}: unsupported file extension (expected {expected})", path.display())]
    Format { path: PathBuf, expected: &'static str },
}

/// A syntax error at a 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

fn parse_err(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError { line, msg: msg.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Off,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<Self, IoError> {
        match extension(path).as_deref() {
            Some("obj") => Ok(MeshFormat::Obj),
            Some("off") => Ok(MeshFormat::Off),
            _ => Err(IoError::Format {
                path: path.to_path_buf(),
                expected: ".obj or .off",
            }),
        }
    }
}

fn extension(path: &Path) -> Option<String> {
    path.extension().map(|e| e.to_string_lossy().to_ascii_lowercase())
}

type Soup = (Vec<Vec3>, Vec<[usize; 3]>);

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64, ParseError> {
    let tok = tok.ok_or_else(|| parse_err(line, "expected a coordinate"))?;
    tok.parse().map_err(|_| parse_err(line, format!("invalid number `{tok}`")))
}

pub fn parse_obj(text: &str) -> Result<Soup, ParseError> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut skipped: Vec<(String, usize)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut toks = content.split_whitespace();
        let Some(tag) = toks.next() else { continue };
        match tag {
            "v" => {
                let x = parse_f64(toks.next(), line)?;
                let y = parse_f64(toks.next(), line)?;
                let z = parse_f64(toks.next(), line)?;
                vertices.push(Vec3::new(x, y, z));
            }
            "f" => {
                let idx: Vec<&str> = toks.collect();
                if idx.len() != 3 {
                    return Err(parse_err(line, format!("only triangles are supported, face has {} vertices", idx.len())));
                }
                let mut tri = [0usize; 3];
                for (slot, tok) in tri.iter_mut().zip(idx) {
                    let head = tok.split('/').next().unwrap_or("");
                    let i: i64 = head
                        .parse()
                        .map_err(|_| parse_err(line, format!("invalid face index `{tok}`")))?;
                    let resolved = match i {
                        0 => None,
                        i if i > 0 => Some(i as usize - 1),
                        i => vertices.len().checked_sub(i.unsigned_abs() as usize),
                    };
                    *slot = match resolved {
                        Some(r) if r < vertices.len() => r,
                        _ => {
                            return Err(parse_err(
                                line,
                                format!("face index {i} out of range ({} vertices so far)", vertices.len()),
                            ))
                        }
                    };
                }
                faces.push(tri);
            }
            other => match skipped.iter_mut().find(|(t, _)| t == other) {
                Some((_, count)) => *count += 1,
                None => skipped.push((other.to_string(), 1)),
            },
        }
    }
    for (tag, count) in skipped {
        log::warn!("skipped {count} unsupported OBJ `{tag}` line(s)");
    }
    Ok((vertices, faces))
}

pub fn parse_off(text: &str) -> Result<Soup, ParseError> {
    let mut lines = text.lines().enumerate().filter_map(|(n, l)| {
        let toks: Vec<&str> = l.split('#').next().unwrap_or("").split_whitespace().collect();
        (!toks.is_empty()).then_some((n + 1, toks))
    });
    let (line, mut header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    if header[0] != "OFF" {
        return Err(parse_err(line, format!("expected `OFF` header, found `{}`", header[0])));
    }
    header.remove(0);
    let (line, counts) = if header.is_empty() {
        lines.next().ok_or_else(|| parse_err(line, "missing element counts"))?
    } else {
        (line, header)
    };
    if counts.len() < 2 {
        return Err(parse_err(line, "expected vertex and face counts"));
    }
    let count = |t: &str| t.parse::<usize>().map_err(|_| parse_err(line, format!("invalid count `{t}`")));
    let (nv, nf) = (count(counts[0])?, count(counts[1])?);
    let mut last = line;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, toks) = lines.next().ok_or_else(|| parse_err(last, "unexpected end of file in vertices"))?;
        let mut it = toks.into_iter();
        let x = parse_f64(it.next(), line)?;
        let y = parse_f64(it.next(), line)?;
        let z = parse_f64(it.next(), line)?;
        vertices.push(Vec3::new(x, y, z));
        last = line;
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (line, toks) = lines.next().ok_or_else(|| parse_err(last, "unexpected end of file in faces"))?;
        if toks[0] != "3" {
            return Err(parse_err(line, format!("only triangles are supported, face has `{}` vertices", toks[0])));
        }
        if toks.len() < 4 {
            return Err(parse_err(line, "truncated face"));
        }
        // Anything after the three indices (e.g. a face color) is ignored.
        let mut tri = [0usize; 3];
        for (slot, t) in tri.iter_mut().zip(&toks[1..4]) {
            let i: usize = t.parse().map_err(|_| parse_err(line, format!("invalid face index `{t}`")))?;
            if i >= nv {
                return Err(parse_err(line, format!("face index {i} out of range ({nv} vertices)")));
            }
            *slot = i;
        }
        faces.push(tri);
        last = line;
    }
    Ok((vertices, faces))
}

pub fn write_obj<W: Write>(mut w: W, mesh: &TriMesh) -> io::Result<()> {
    for v in mesh.vertices() {
        writeln!(w, "v {} {} {}", v.x, v.y, v.z)?;
    }
    for [a, b, c] in mesh.faces() {
        writeln!(w, "f {} {} {}", a + 1, b + 1, c + 1)?;
    }
    w.flush()
}

pub fn write_off<W: Write>(mut w: W, mesh: &TriMesh) -> io::Result<()> {
    writeln!(w, "OFF")?;
    writeln!(w, "{} {} 0", mesh.vertex_count(), mesh.face_count())?;
    for v in mesh.vertices() {
        writeln!(w, "{} {} {}", v.x, v.y, v.z)?;
    }
    for [a, b, c] in mesh.faces() {
        writeln!(w, "3 {a} {b} {c}")?;
    }
    w.flush()
}

fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_mesh(path: &Path) -> Result<TriMesh, IoError> {
    let format = MeshFormat::from_path(path)?;
    let text = read_text(path)?;
    let parsed = match format {
        MeshFormat::Obj => parse_obj(&text),
        MeshFormat::Off => parse_off(&text),
    };
    let (vertices, faces) = parsed.map_err(|e| IoError::Parse {
        path: path.to_path_buf(),
        line: e.line,
        msg: e.msg,
    })?;
    TriMesh::new(vertices, faces).map_err(|source| IoError::Mesh {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, IoError> {
    File::create(path).map(BufWriter::new).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn wrap(path: &Path) -> impl FnOnce(io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn save_mesh(path: &Path, mesh: &TriMesh) -> Result<(), IoError> {
    let format = MeshFormat::from_path(path)?;
    let w = create(path)?;
    match format {
        MeshFormat::Obj => write_obj(w, mesh),
        MeshFormat::Off => write_off(w, mesh),
    }
    .map_err(wrap(path))
}

/// `vertex_index,value` rows with a header line.
pub fn write_field_csv<W: Write>(mut w: W, values: &[f64]) -> io::Result<()> {
    writeln!(w, "vertex_index,value")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(w, "{i},{v}")?;
    }
    w.flush()
}

/// Gray level in `0..=255` for `value` mapped linearly from `[0, max]`, saturating above `max`.
pub fn gray_level(value: f64, max: f64) -> u8 {
    if !(max > 0.0) || !value.is_finite() {
        return 0;
    }
    ((value / max).clamp(0.0, 1.0) * 255.0).round() as u8
}

/// ASCII PLY with per-vertex gray colors mapped from `[0, 99th percentile]`.
pub fn write_field_ply<W: Write>(mut w: W, mesh: &TriMesh, field: &CurvatureField) -> io::Result<()> {
    let max = field.field.percentile(99.0);
    writeln!(w, "ply")?;
    writeln!(w, "format ascii 1.0")?;
    writeln!(w, "comment {} mapped from [0, {}]", field.field.name, max)?;
    writeln!(w, "element vertex {}", mesh.vertex_count())?;
    for p in ["x", "y", "z"] {
        writeln!(w, "property double {p}")?;
    }
    for c in ["red", "green", "blue"] {
        writeln!(w, "property uchar {c}")?;
    }
    writeln!(w, "element face {}", mesh.face_count())?;
    writeln!(w, "property list uchar int vertex_indices")?;
    writeln!(w, "end_header")?;
    for (v, &h) in mesh.vertices().iter().zip(&field.field.values) {
        let g = gray_level(h, max);
        writeln!(w, "{} {} {} {g} {g} {g}", v.x, v.y, v.z)?;
    }
    for [a, b, c] in mesh.faces() {
        writeln!(w, "3 {a} {b} {c}")?;
    }
    w.flush()
}

/// Writes `field` as CSV or PLY depending on the extension of `path`.
pub fn save_field(path: &Path, mesh: &TriMesh, field: &CurvatureField) -> Result<(), IoError> {
    let ext = extension(path);
    if !matches!(ext.as_deref(), Some("csv") | Some("ply")) {
        return Err(IoError::Format {
            path: path.to_path_buf(),
            expected: ".csv or .ply",
        });
    }
    let w = create(path)?;
    match ext.as_deref() {
        Some("csv") => write_field_csv(w, &field.field.values),
        _ => write_field_ply(w, mesh, field),
    }
    .map_err(wrap(path))
}
