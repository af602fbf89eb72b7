//! Plain-text mesh format.
//!
//! ```text
//! robinmesh v1
//! <node count>
//! <index> <x> <y>                  one line per node
//! <triangle count>
//! <index> <n1> <n2> <n3> <region>  region is 1 (inner) or 2 (outer)
//! <interface edge count>
//! <index> <n1> <n2>
//! <boundary edge count>
//! <index> <n1> <n2>
//! ```
//!
//! Coordinates are written with the shortest representation that reads
//! back to the same `f64`, so a write/read cycle is lossless.

use std::io::{BufRead, Write};

use super::{Mesh, Region, Triangle};
use crate::error::{Error, Result};

const HEADER: &str = "robinmesh v1";

pub fn write_mesh<W: Write>(mesh: &Mesh, mut out: W) -> Result<()> {
    writeln!(out, "{HEADER}")?;
    writeln!(out, "{}", mesh.node_count())?;
    for (i, [x, y]) in mesh.nodes().iter().enumerate() {
        writeln!(out, "{i} {x:?} {y:?}")?;
    }
    writeln!(out, "{}", mesh.triangles().len())?;
    for (i, t) in mesh.triangles().iter().enumerate() {
        let [a, b, c] = t.nodes;
        writeln!(out, "{i} {a} {b} {c} {}", t.region.tag())?;
    }
    for edges in [mesh.interface_edges(), mesh.boundary_edges()] {
        writeln!(out, "{}", edges.len())?;
        for (i, [a, b]) in edges.iter().enumerate() {
            writeln!(out, "{i} {a} {b}")?;
        }
    }
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_record(&mut self) -> Result<(usize, Vec<String>)> {
        loop {
            let line = self
                .inner
                .next()
                .ok_or_else(|| Error::MeshFormat(format!("unexpected end of file after line {}", self.line_no)))??;
            self.line_no += 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            return Ok((self.line_no, trimmed.split_whitespace().map(str::to_owned).collect()));
        }
    }

    fn count(&mut self, what: &str) -> Result<usize> {
        let (line, fields) = self.next_record()?;
        match fields.as_slice() {
            [n] => n.parse().map_err(|_| bad(line, &format!("expected {what} count"))),
            _ => Err(bad(line, &format!("expected {what} count"))),
        }
    }

    fn record<const N: usize>(&mut self, expect_index: usize) -> Result<(usize, [String; N])> {
        let (line, fields) = self.next_record()?;
        if fields.len() != N + 1 {
            return Err(bad(line, &format!("expected {} fields", N + 1)));
        }
        let index: usize = fields[0].parse().map_err(|_| bad(line, "bad record index"))?;
        if index != expect_index {
            return Err(bad(line, &format!("expected record index {expect_index}")));
        }
        let rest: [String; N] = fields[1..].to_vec().try_into().expect("length checked");
        Ok((line, rest))
    }
}

fn bad(line: usize, msg: &str) -> Error {
    Error::MeshFormat(format!("line {line}: {msg}"))
}

fn parse<T: std::str::FromStr>(line: usize, s: &str) -> Result<T> {
    s.parse().map_err(|_| bad(line, &format!("cannot parse '{s}'")))
}

pub fn read_mesh<R: BufRead>(input: R) -> Result<Mesh> {
    let mut lines = Lines {
        inner: input.lines(),
        line_no: 0,
    };
    let (line, header) = lines.next_record()?;
    if header.join(" ") != HEADER {
        return Err(bad(line, "missing 'robinmesh v1' header"));
    }

    let n_nodes = lines.count("node")?;
    let mut nodes = Vec::with_capacity(n_nodes);
    for i in 0..n_nodes {
        let (line, [x, y]) = lines.record::<2>(i)?;
        nodes.push([parse(line, &x)?, parse(line, &y)?]);
    }

    let n_tri = lines.count("triangle")?;
    let mut triangles = Vec::with_capacity(n_tri);
    for i in 0..n_tri {
        let (line, [a, b, c, r]) = lines.record::<4>(i)?;
        let region = Region::from_tag(parse(line, &r)?).ok_or_else(|| bad(line, "region must be 1 or 2"))?;
        triangles.push(Triangle {
            nodes: [parse(line, &a)?, parse(line, &b)?, parse(line, &c)?],
            region,
        });
    }

    let mut edge_lists = Vec::with_capacity(2);
    for what in ["interface edge", "boundary edge"] {
        let n = lines.count(what)?;
        let mut edges = Vec::with_capacity(n);
        for i in 0..n {
            let (line, [a, b]) = lines.record::<2>(i)?;
            edges.push([parse(line, &a)?, parse(line, &b)?]);
        }
        edge_lists.push(edges);
    }

    Mesh::from_parts(nodes, triangles, &edge_lists[0], &edge_lists[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_disk_mesh;

    #[test]
    fn roundtrip_preserves_geometry() {
        let mesh = generate_disk_mesh(2, 3, 16).unwrap();
        let mut buf = Vec::new();
        write_mesh(&mesh, &mut buf).unwrap();
        let back = read_mesh(buf.as_slice()).unwrap();
        assert_eq!(back.nodes(), mesh.nodes());
        assert_eq!(back.triangles(), mesh.triangles());
        assert_eq!(back.interface_edges(), mesh.interface_edges());
        assert_eq!(back.boundary_edges(), mesh.boundary_edges());
        assert_eq!(back.h(), mesh.h());
        for (a, b) in back.interface().angles().iter().zip(mesh.interface().angles()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_missing_header() {
        let err = read_mesh("robinmesh v2\n0\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("header"));
    }

    #[test]
    fn rejects_broken_cycle() {
        let mesh = generate_disk_mesh(1, 1, 8).unwrap();
        let mut buf = Vec::new();
        write_mesh(&mesh, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        // swap the endpoints of the first interface edge
        let broken = text.replacen("\n8\n0 1 2\n", "\n8\n0 2 1\n", 1);
        assert_ne!(broken, text);
        assert!(matches!(read_mesh(broken.as_bytes()), Err(Error::MeshFormat(_))));
    }
}
