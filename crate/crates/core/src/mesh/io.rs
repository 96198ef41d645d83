//! Plain-text mesh format:
//!
//! ```text
//! pseudovem-mesh v1
//! vertices <N>
//! <index> <x> <y>
//! cells <M>
//! <index> <k> <v1> ... <vk>
//! boundary <B>
//! edge <va> <vb> <marker>
//! ```
//!
//! Coordinates are written with 18 significant digits so that a load/save
//! cycle reproduces the file byte for byte. Blank lines and lines starting
//! with `#` are ignored on input.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::geom::Vec2;

use super::{MeshError, PolyMesh, Result};

pub const MESH_FORMAT_HEADER: &str = "pseudovem-mesh v1";

pub fn write_mesh<W: Write>(mesh: &PolyMesh, mut w: W) -> Result<()> {
    writeln!(w, "{MESH_FORMAT_HEADER}")?;
    writeln!(w, "vertices {}", mesh.n_vertices())?;
    for (i, v) in mesh.vertices().iter().enumerate() {
        writeln!(w, "{i} {:.17e} {:.17e}", v.x, v.y)?;
    }
    writeln!(w, "cells {}", mesh.n_cells())?;
    for (i, c) in mesh.cells().iter().enumerate() {
        write!(w, "{i} {}", c.len())?;
        for v in c {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    let boundary: Vec<_> = mesh.edges().iter().filter(|e| e.is_boundary()).collect();
    writeln!(w, "boundary {}", boundary.len())?;
    for e in boundary {
        writeln!(w, "edge {} {} {}", e.vertices[0], e.vertices[1], e.marker)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_mesh(mesh: &PolyMesh, path: impl AsRef<Path>) -> Result<()> {
    write_mesh(mesh, BufWriter::new(File::create(path)?))
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<PolyMesh> {
    read_mesh(File::open(path)?)
}

struct Lines<B> {
    inner: std::iter::Enumerate<std::io::Lines<B>>,
}

impl<B: BufRead> Lines<B> {
    /// Next meaningful line with its 1-based number.
    fn next(&mut self) -> Result<Option<(usize, String)>> {
        for (i, line) in self.inner.by_ref() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            return Ok(Some((i + 1, t.to_string())));
        }
        Ok(None)
    }

    fn expect(&mut self, what: &str, last_line: usize) -> Result<(usize, String)> {
        self.next()?.ok_or_else(|| parse_err(last_line + 1, what, "unexpected end of file"))
    }
}

fn parse_err(line: usize, field: &str, message: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, name: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, name, "missing value"))?;
    tok.parse()
        .map_err(|_| parse_err(line, name, format!("cannot parse `{tok}`")))
}

fn block_header<B: BufRead>(lines: &mut Lines<B>, keyword: &str, last: usize) -> Result<(usize, usize)> {
    let (ln, text) = lines.expect(keyword, last)?;
    let mut tok = text.split_whitespace();
    if tok.next() != Some(keyword) {
        return Err(parse_err(ln, keyword, format!("expected `{keyword} <count>`, found `{text}`")));
    }
    let count = field(tok.next(), ln, "count")?;
    Ok((ln, count))
}

pub fn read_mesh<R: Read>(r: R) -> Result<PolyMesh> {
    let mut lines = Lines {
        inner: BufReader::new(r).lines().enumerate(),
    };
    let (ln, header) = lines.expect("header", 0)?;
    if header != MESH_FORMAT_HEADER {
        return Err(parse_err(ln, "header", format!("expected `{MESH_FORMAT_HEADER}`, found `{header}`")));
    }

    let (mut ln, nv) = block_header(&mut lines, "vertices", ln)?;
    let mut vertices = Vec::with_capacity(nv);
    for i in 0..nv {
        let (l, text) = lines.expect("vertex", ln)?;
        ln = l;
        let mut tok = text.split_whitespace();
        let idx: usize = field(tok.next(), ln, "index")?;
        if idx != i {
            return Err(parse_err(ln, "index", format!("expected vertex {i}, found {idx}")));
        }
        let x: f64 = field(tok.next(), ln, "x")?;
        let y: f64 = field(tok.next(), ln, "y")?;
        if !(x.is_finite() && y.is_finite()) {
            return Err(parse_err(ln, "x/y", "non-finite coordinate"));
        }
        vertices.push(Vec2::new(x, y));
    }

    let (l, nc) = block_header(&mut lines, "cells", ln)?;
    ln = l;
    let mut cells = Vec::with_capacity(nc);
    for i in 0..nc {
        let (l, text) = lines.expect("cell", ln)?;
        ln = l;
        let mut tok = text.split_whitespace();
        let idx: usize = field(tok.next(), ln, "index")?;
        if idx != i {
            return Err(parse_err(ln, "index", format!("expected cell {i}, found {idx}")));
        }
        let k: usize = field(tok.next(), ln, "k")?;
        let mut cell = Vec::with_capacity(k);
        for j in 0..k {
            let v: usize = field(tok.next(), ln, &format!("v{}", j + 1))?;
            if v >= nv {
                return Err(parse_err(
                    ln,
                    &format!("v{}", j + 1),
                    format!("vertex index {v} out of range (mesh has {nv} vertices)"),
                ));
            }
            cell.push(v);
        }
        if tok.next().is_some() {
            return Err(parse_err(ln, "k", format!("more than {k} vertex indices")));
        }
        cells.push(cell);
    }

    let (l, nb) = block_header(&mut lines, "boundary", ln)?;
    ln = l;
    let mut markers = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (l, text) = lines.expect("edge", ln)?;
        ln = l;
        let mut tok = text.split_whitespace();
        if tok.next() != Some("edge") {
            return Err(parse_err(ln, "edge", format!("expected `edge va vb marker`, found `{text}`")));
        }
        let a: usize = field(tok.next(), ln, "v_a")?;
        let b: usize = field(tok.next(), ln, "v_b")?;
        let marker: u32 = field(tok.next(), ln, "marker")?;
        markers.push((a, b, marker));
    }
    if let Some((l, text)) = lines.next()? {
        return Err(parse_err(l, "trailing", format!("unexpected content `{text}`")));
    }
    PolyMesh::with_boundary_markers(vertices, cells, &markers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rect;
    use crate::mesh::{generate_mesh, MeshFamily};

    fn to_string(m: &PolyMesh) -> String {
        let mut buf = Vec::new();
        write_mesh(m, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn save_load_is_byte_identical() {
        for fam in MeshFamily::ALL {
            let m = generate_mesh(fam, 5, Rect::new(-1.0, 1.0, -1.0, 1.0)).unwrap();
            let text = to_string(&m);
            let back = read_mesh(text.as_bytes()).unwrap();
            assert_eq!(back, m, "{fam}");
            assert_eq!(to_string(&back), text, "{fam}");
        }
    }

    #[test]
    fn out_of_range_vertex_reports_line() {
        let text = "pseudovem-mesh v1\nvertices 3\n0 0 0\n1 1 0\n2 0 1\ncells 1\n0 3 0 1 5\nboundary 0\n";
        match read_mesh(text.as_bytes()) {
            Err(MeshError::Parse { line, field, .. }) => {
                assert_eq!(line, 7);
                assert_eq!(field, "v3");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn clockwise_cell_is_orientation_error() {
        let text = "pseudovem-mesh v1\nvertices 3\n0 0 0\n1 1 0\n2 0 1\ncells 1\n0 3 0 2 1\nboundary 0\n";
        assert!(matches!(read_mesh(text.as_bytes()), Err(MeshError::Orientation { cell: 0, .. })));
    }

    #[test]
    fn bad_number_and_header() {
        let text = "pseudovem-mesh v1\nvertices 1\n0 zero 0\n";
        assert!(matches!(read_mesh(text.as_bytes()), Err(MeshError::Parse { line: 3, .. })));
        assert!(matches!(read_mesh("mesh v2\n".as_bytes()), Err(MeshError::Parse { line: 1, .. })));
    }

    #[test]
    fn markers_survive_round_trip() {
        let text = "pseudovem-mesh v1\nvertices 4\n0 0 0\n1 1 0\n2 1 1\n3 0 1\ncells 1\n0 4 0 1 2 3\nboundary 1\nedge 1 2 7\n";
        let m = read_mesh(text.as_bytes()).unwrap();
        let e = m.edges().iter().find(|e| e.vertices == [1, 2]).unwrap();
        assert_eq!(e.marker, 7);
        let again = read_mesh(to_string(&m).as_bytes()).unwrap();
        assert_eq!(again, m);
    }
}
