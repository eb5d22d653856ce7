//! Plain-text mesh format:
//!
//! ```text
//! pbemesh 1
//! vertices N
//! x y z                      (N lines)
//! cells M
//! v0 v1 v2 v3 region         (M lines, region = molecular | solvent)
//! interface_facets K
//! cell face                  (K lines)
//! outer_facets L
//! cell face                  (L lines)
//! ```
//!
//! Reals are written in shortest round-trip form, so write-then-read is exact.

use std::fmt::Write as _;
use std::path::Path;

use super::{FacetRef, MeshError, Point3, Region, SimplicialMesh};

pub fn write_mesh(mesh: &SimplicialMesh) -> String {
    let mut s = String::with_capacity(64 * (mesh.num_vertices() + mesh.num_cells()));
    s.push_str("pbemesh 1\n");
    let _ = writeln!(s, "vertices {}", mesh.num_vertices());
    for p in mesh.vertices() {
        let _ = writeln!(s, "{:?} {:?} {:?}", p.x, p.y, p.z);
    }
    let _ = writeln!(s, "cells {}", mesh.num_cells());
    for (c, cell) in mesh.cells().iter().enumerate() {
        let _ = writeln!(
            s,
            "{} {} {} {} {}",
            cell[0],
            cell[1],
            cell[2],
            cell[3],
            mesh.region(c).as_str()
        );
    }
    for (name, list) in [
        ("interface_facets", mesh.interface_facets()),
        ("outer_facets", mesh.outer_facets()),
    ] {
        let _ = writeln!(s, "{name} {}", list.len());
        for f in list {
            let _ = writeln!(s, "{} {}", f.cell, f.face);
        }
    }
    s
}

pub fn write_mesh_file(mesh: &SimplicialMesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    std::fs::write(path, write_mesh(mesh))?;
    Ok(())
}

pub fn read_mesh_file(path: impl AsRef<Path>) -> Result<SimplicialMesh, MeshError> {
    let text = std::fs::read_to_string(path)?;
    read_mesh(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, Vec<&'a str>), MeshError> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let t = line.trim();
            if !t.is_empty() {
                return Ok((i + 1, t.split_whitespace().collect()));
            }
        }
        Err(MeshError::Parse { line: self.last + 1, message: format!("unexpected end of file, expected {what}") })
    }

    fn header(&mut self, key: &str) -> Result<usize, MeshError> {
        let (line, tok) = self.next(key)?;
        if tok.len() != 2 || tok[0] != key {
            return Err(MeshError::Parse { line, message: format!("expected '{key} <count>'") });
        }
        parse(tok[1], line)
    }
}

fn parse<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T, MeshError> {
    tok.parse()
        .map_err(|_| MeshError::Parse { line, message: format!("cannot parse '{tok}'") })
}

pub fn read_mesh(text: &str) -> Result<SimplicialMesh, MeshError> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };
    let (line, tok) = lines.next("header")?;
    if tok != ["pbemesh", "1"] {
        return Err(MeshError::Parse { line, message: "expected header 'pbemesh 1'".into() });
    }
    let nv = lines.header("vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, tok) = lines.next("vertex")?;
        if tok.len() != 3 {
            return Err(MeshError::Parse { line, message: "expected three coordinates".into() });
        }
        let p = Point3::new(parse(tok[0], line)?, parse(tok[1], line)?, parse(tok[2], line)?);
        if !p.is_finite() {
            return Err(MeshError::Parse { line, message: "non-finite coordinate".into() });
        }
        vertices.push(p);
    }
    let nc = lines.header("cells")?;
    let mut cells = Vec::with_capacity(nc);
    let mut regions = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (line, tok) = lines.next("cell")?;
        if tok.len() != 5 {
            return Err(MeshError::Parse { line, message: "expected four vertex indices and a region".into() });
        }
        let mut cell = [0usize; 4];
        for k in 0..4 {
            cell[k] = parse(tok[k], line)?;
            if cell[k] >= nv {
                return Err(MeshError::Parse { line, message: format!("vertex index {} out of range", cell[k]) });
            }
        }
        let region = match tok[4] {
            "molecular" => Region::Molecular,
            "solvent" => Region::Solvent,
            other => return Err(MeshError::Parse { line, message: format!("unknown region '{other}'") }),
        };
        cells.push(cell);
        regions.push(region);
    }
    let mut lists = [Vec::new(), Vec::new()];
    for (k, key) in ["interface_facets", "outer_facets"].iter().enumerate() {
        let n = lines.header(key)?;
        for _ in 0..n {
            let (line, tok) = lines.next("facet")?;
            if tok.len() != 2 {
                return Err(MeshError::Parse { line, message: "expected 'cell face'".into() });
            }
            let cell: usize = parse(tok[0], line)?;
            let face: u8 = parse(tok[1], line)?;
            if cell >= nc || face > 3 {
                return Err(MeshError::Parse { line, message: "facet out of range".into() });
            }
            lists[k].push(FacetRef { cell, face });
        }
    }
    if let Ok((line, _)) = lines.next("end") {
        return Err(MeshError::Parse { line, message: "trailing content".into() });
    }
    let [interface, outer] = lists;
    let mesh = SimplicialMesh::from_parts_unchecked(vertices, cells, regions, interface, outer);
    mesh.validate()?;
    Ok(mesh)
}
