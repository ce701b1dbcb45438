//! Text mesh format:
//!
//! ```text
//! composite-mesh v1 <nv> <nt> <ndom>
//! x y z                      (nv lines)
//! v1 v2 v3 dplus dminus      (nt lines, 0-based)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use super::{GeometryError, Result, SkeletonMesh};
use crate::Point;
use std::fmt::Write as _;
use std::path::Path;

pub fn load_mesh(path: impl AsRef<Path>) -> Result<SkeletonMesh> {
    let text = std::fs::read_to_string(path)?;
    parse_mesh(&text)
}

fn perr(line: usize, msg: impl Into<String>) -> GeometryError {
    GeometryError::Parse { line, msg: msg.into() }
}

pub fn parse_mesh(text: &str) -> Result<SkeletonMesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (ln, header) = lines.next().ok_or_else(|| perr(1, "missing header"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 5 || h[0] != "composite-mesh" || h[1] != "v1" {
        return Err(perr(ln, "expected `composite-mesh v1 <nv> <nt> <ndom>`"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| perr(ln, format!("bad count `{s}`")));
    let (nv, nt, ndom) = (num(h[2])?, num(h[3])?, num(h[4])?);

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| perr(ln, "unexpected end of file in vertex block"))?;
        let xs: Vec<f64> = l
            .split_whitespace()
            .map(|s| s.parse::<f64>().map_err(|_| perr(ln, format!("bad coordinate `{s}`"))))
            .collect::<Result<_>>()?;
        if xs.len() != 3 || xs.iter().any(|x| !x.is_finite()) {
            return Err(perr(ln, "expected three finite coordinates"));
        }
        vertices.push(Point::new(xs[0], xs[1], xs[2]));
    }

    let mut triangles = Vec::with_capacity(nt);
    let mut adjacency = Vec::with_capacity(nt);
    for t in 0..nt {
        let (ln, l) = lines.next().ok_or_else(|| perr(ln, "unexpected end of file in triangle block"))?;
        let xs: Vec<usize> = l
            .split_whitespace()
            .map(|s| s.parse::<usize>().map_err(|_| perr(ln, format!("bad index `{s}`"))))
            .collect::<Result<_>>()?;
        if xs.len() != 5 {
            return Err(perr(ln, "expected `v1 v2 v3 dplus dminus`"));
        }
        for &i in &xs[..3] {
            if i >= nv {
                return Err(GeometryError::VertexIndex { triangle: t, index: i, count: nv });
            }
        }
        triangles.push([xs[0], xs[1], xs[2]]);
        adjacency.push([xs[3], xs[4]]);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(perr(ln, "trailing content after triangle block"));
    }
    let mesh = SkeletonMesh::new(vertices, triangles, adjacency)?;
    if mesh.domain_count != ndom {
        return Err(perr(1, format!("header declares {ndom} domains, tags imply {}", mesh.domain_count)));
    }
    Ok(mesh)
}

pub fn write_mesh_string(mesh: &SkeletonMesh) -> String {
    let mut s = String::new();
    let v = mesh.vertices();
    let t = mesh.triangles();
    writeln!(s, "composite-mesh v1 {} {} {}", v.len(), t.len(), mesh.domain_count).unwrap();
    for p in v {
        writeln!(s, "{:.16e} {:.16e} {:.16e}", p.x, p.y, p.z).unwrap();
    }
    for (tri, adj) in t.iter().zip(&mesh.adjacency) {
        writeln!(s, "{} {} {} {} {}", tri[0], tri[1], tri[2], adj[0], adj[1]).unwrap();
    }
    s
}

pub fn write_mesh(mesh: &SkeletonMesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_mesh_string(mesh))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_split_sphere, make_tetrahedron, make_two_cubes, SplitKind};

    const TETRA: &str = "composite-mesh v1 4 4 2
0 0 0
1 0 0
0 1 0
0 0 1
0 2 1 0 1
0 1 3 0 1
0 3 2 0 1
1 2 3 0 1
";

    #[test]
    fn tetra_file_parses() {
        let m = parse_mesh(TETRA).unwrap();
        assert_eq!(m.domain_count, 2);
        assert_eq!(m.edge_count(), 6);
        assert!(m.junction_edges().is_empty());
    }

    #[test]
    fn bad_vertex_index_names_triangle() {
        let bad = TETRA.replace("1 2 3 0 1", "1 2 99 0 1");
        match parse_mesh(&bad) {
            Err(GeometryError::VertexIndex { triangle: 3, index: 99, count: 4 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_error_reports_line() {
        let bad = TETRA.replace("0 1 0\n", "0 x 0\n");
        match parse_mesh(&bad) {
            Err(GeometryError::Parse { line: 4, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn open_domain_rejected() {
        let bad = TETRA.replace("composite-mesh v1 4 4", "composite-mesh v1 4 3").replace("1 2 3 0 1\n", "");
        assert!(matches!(parse_mesh(&bad), Err(GeometryError::NotWatertight { .. })));
    }

    #[test]
    fn two_tetrahedra_share_a_face() {
        let text = "composite-mesh v1 5 7 3
0 0 0
1 0 0
0 1 0
0 0 1
0 0 -1
0 1 2 1 2
0 1 3 0 1
1 2 3 0 1
2 0 3 0 1
0 2 4 0 2
2 1 4 0 2
1 0 4 0 2
";
        let m = parse_mesh(text).unwrap();
        assert_eq!(m.domain_count, 3);
        assert_eq!(m.triangles().len(), 7);
        assert_eq!(m.junction_edges(), vec![[0, 1], [0, 2], [1, 2]]);
    }

    #[test]
    fn round_trip_is_bit_identical() {
        for m in [
            make_tetrahedron(),
            make_two_cubes(0.3).unwrap(),
            make_split_sphere(0.45, SplitKind::Quadrant).unwrap(),
        ] {
            let s = write_mesh_string(&m);
            let back = parse_mesh(&s).unwrap();
            assert_eq!(write_mesh_string(&back), s);
            for (a, b) in m.vertices().iter().zip(back.vertices()) {
                assert_eq!(a.to_array().map(f64::to_bits), b.to_array().map(f64::to_bits));
            }
            assert_eq!(m.triangles(), back.triangles());
            assert_eq!(m.adjacency, back.adjacency);
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cubes.mesh");
        let m = make_two_cubes(0.5).unwrap();
        write_mesh(&m, &p).unwrap();
        let back = load_mesh(&p).unwrap();
        assert_eq!(back.triangles(), m.triangles());
    }
}
