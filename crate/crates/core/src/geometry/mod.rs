//! Skeleton meshes, oriented per-domain surfaces, edges, refinement and the
//! single-sided reduction.

mod edges;
mod generators;
mod io;
mod reduce;
mod refine;

pub use edges::{edge_enumeration, EdgeSet};
pub use generators::{make_sphere, make_split_sphere, make_tetrahedron, make_two_cubes, SplitKind};
pub use io::{load_mesh, parse_mesh, write_mesh, write_mesh_string};
pub use reduce::{reduce_geometry, reduce_geometry_with, ReducedGeometry};
pub use refine::{barycentric_refine, refine_level, RefinedLevel};

use crate::Point;
use std::collections::HashMap;
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("triangle {triangle} references vertex {index} but only {count} vertices exist")]
    VertexIndex { triangle: usize, index: usize, count: usize },
    #[error("triangle {0} is degenerate")]
    Degenerate(usize),
    #[error("triangle {0} has the same domain on both sides")]
    SameDomain(usize),
    #[error("domain {domain} boundary is not watertight: {detail}")]
    NotWatertight { domain: usize, detail: String },
    #[error("domain {domain} out of range (domain count {count})")]
    DomainOutOfRange { domain: usize, count: usize },
    #[error("edge ({0}, {1}) is shared by {2} triangles")]
    NonManifold(usize, usize, usize),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("edge ({0}, {1}) is interior to {2} reduced surfaces")]
    Reduction(usize, usize, usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GeometryError>;

/// Vertices plus triangles in a reference orientation. Surfaces refer to
/// triangles of a level by index, so quantities computed per level triangle
/// are shared bit-for-bit between every surface that uses it.
#[derive(Debug, Clone)]
pub struct LevelMesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
}

impl LevelMesh {
    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let v = &self.vertices;
        0.5 * (v[b] - v[a]).cross(v[c] - v[a]).length()
    }

    /// Unit normal of the reference orientation.
    pub fn normal(&self, t: usize) -> Point {
        let [a, b, c] = self.triangles[t];
        let v = &self.vertices;
        (v[b] - v[a]).cross(v[c] - v[a]).normalize()
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangles[t];
        (self.vertices[a] + self.vertices[b] + self.vertices[c]) / 3.0
    }
}

#[derive(Debug, Clone)]
pub struct SkeletonMesh {
    pub mesh: Arc<LevelMesh>,
    /// (dplus, dminus): the right-hand normal points into dplus.
    pub adjacency: Vec<[usize; 2]>,
    pub domain_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalRole {
    /// Outward normal of the given domain.
    Outward(usize),
    /// Orientation inherited from the owning domain of a reduced surface.
    Reduced(usize),
    Intrinsic,
}

#[derive(Debug, Clone)]
pub struct OrientedSurfaceMesh {
    pub level: Arc<LevelMesh>,
    pub tri_ids: Vec<usize>,
    pub flipped: Vec<bool>,
    pub role: NormalRole,
}

impl SkeletonMesh {
    pub fn new(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        adjacency: Vec<[usize; 2]>,
    ) -> Result<Self> {
        let domain_count = adjacency.iter().flat_map(|a| a.iter()).max().map_or(0, |m| m + 1);
        let mesh = SkeletonMesh {
            mesh: Arc::new(LevelMesh { vertices, triangles }),
            adjacency,
            domain_count,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.mesh.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.mesh.triangles
    }

    pub fn validate(&self) -> Result<()> {
        let nv = self.mesh.vertices.len();
        for (t, tri) in self.mesh.triangles.iter().enumerate() {
            for &i in tri {
                if i >= nv {
                    return Err(GeometryError::VertexIndex { triangle: t, index: i, count: nv });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(GeometryError::Degenerate(t));
            }
            let [a, b, c] = *tri;
            let v = &self.mesh.vertices;
            let cross = (v[b] - v[a]).cross(v[c] - v[a]).length();
            let scale = (v[b] - v[a]).length_squared().max((v[c] - v[a]).length_squared());
            if !(cross > 1e-14 * scale) {
                return Err(GeometryError::Degenerate(t));
            }
            if self.adjacency[t][0] == self.adjacency[t][1] {
                return Err(GeometryError::SameDomain(t));
            }
        }
        for d in 0..self.domain_count {
            let s = self.domain_boundary_unchecked(d);
            check_closed(&s).map_err(|detail| GeometryError::NotWatertight { domain: d, detail })?;
        }
        Ok(())
    }

    fn domain_boundary_unchecked(&self, i: usize) -> OrientedSurfaceMesh {
        let mut tri_ids = Vec::new();
        let mut flipped = Vec::new();
        for (t, adj) in self.adjacency.iter().enumerate() {
            if adj[1] == i {
                tri_ids.push(t);
                flipped.push(false);
            } else if adj[0] == i {
                tri_ids.push(t);
                flipped.push(true);
            }
        }
        OrientedSurfaceMesh { level: self.mesh.clone(), tri_ids, flipped, role: NormalRole::Outward(i) }
    }

    /// Triangles adjacent to domain `i`, oriented so normals point out of it.
    pub fn build_domain_boundary(&self, i: usize) -> Result<OrientedSurfaceMesh> {
        if i >= self.domain_count {
            return Err(GeometryError::DomainOutOfRange { domain: i, count: self.domain_count });
        }
        let s = self.domain_boundary_unchecked(i);
        check_closed(&s).map_err(|detail| GeometryError::NotWatertight { domain: i, detail })?;
        Ok(s)
    }

    /// Sorted unique skeleton edges (low, high) with the domains of their
    /// adjacent triangles.
    pub fn edge_domains(&self) -> Vec<([usize; 2], Vec<usize>)> {
        let mut map: HashMap<[usize; 2], Vec<usize>> = HashMap::new();
        for (t, tri) in self.mesh.triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = [a.min(b), a.max(b)];
                let e = map.entry(key).or_default();
                for &d in &self.adjacency[t] {
                    if !e.contains(&d) {
                        e.push(d);
                    }
                }
            }
        }
        let mut out: Vec<_> = map
            .into_iter()
            .map(|(k, mut v)| {
                v.sort_unstable();
                (k, v)
            })
            .collect();
        out.sort_unstable_by_key(|e| e.0);
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edge_domains().len()
    }

    /// Edges where three or more interfaces meet.
    pub fn junction_edges(&self) -> Vec<[usize; 2]> {
        let mut map: HashMap<[usize; 2], Vec<[usize; 2]>> = HashMap::new();
        for (t, tri) in self.mesh.triangles.iter().enumerate() {
            let mut pair = self.adjacency[t];
            pair.sort_unstable();
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let e = map.entry([a.min(b), a.max(b)]).or_default();
                if !e.contains(&pair) {
                    e.push(pair);
                }
            }
        }
        let mut out: Vec<_> = map.into_iter().filter(|(_, v)| v.len() >= 3).map(|(k, _)| k).collect();
        out.sort_unstable();
        out
    }

    /// Largest edge length.
    pub fn max_edge_length(&self) -> f64 {
        self.edge_domains()
            .iter()
            .map(|(e, _)| (self.mesh.vertices[e[0]] - self.mesh.vertices[e[1]]).length())
            .fold(0.0, f64::max)
    }

    pub fn mean_edge_length(&self) -> f64 {
        let e = self.edge_domains();
        e.iter().map(|(e, _)| (self.mesh.vertices[e[0]] - self.mesh.vertices[e[1]]).length()).sum::<f64>()
            / e.len() as f64
    }
}

/// Every directed edge must be matched by exactly one reversed copy.
fn check_closed(s: &OrientedSurfaceMesh) -> std::result::Result<(), String> {
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for k in 0..s.len() {
        let t = s.triangle(k);
        for j in 0..3 {
            *directed.entry((t[j], t[(j + 1) % 3])).or_default() += 1;
        }
    }
    let mut bad: Vec<_> = directed
        .iter()
        .filter(|(&(a, b), &n)| n != 1 || directed.get(&(b, a)).copied() != Some(1))
        .map(|(&(a, b), _)| (a.min(b), a.max(b)))
        .collect();
    bad.sort_unstable();
    bad.dedup();
    if let Some(&(a, b)) = bad.first() {
        return Err(format!("{} bad edges, first ({a}, {b})", bad.len()));
    }
    Ok(())
}

impl OrientedSurfaceMesh {
    /// Standalone surface whose triangles define their own level.
    pub fn from_triangles(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Self {
        let n = triangles.len();
        OrientedSurfaceMesh {
            level: Arc::new(LevelMesh { vertices, triangles }),
            tri_ids: (0..n).collect(),
            flipped: vec![false; n],
            role: NormalRole::Intrinsic,
        }
    }

    pub fn len(&self) -> usize {
        self.tri_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tri_ids.is_empty()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.level.vertices
    }

    /// Vertex triple in surface orientation.
    pub fn triangle(&self, k: usize) -> [usize; 3] {
        let t = self.level.triangles[self.tri_ids[k]];
        if self.flipped[k] {
            [t[0], t[2], t[1]]
        } else {
            t
        }
    }

    pub fn orientation(&self, k: usize) -> f64 {
        if self.flipped[k] {
            -1.0
        } else {
            1.0
        }
    }

    pub fn normal(&self, k: usize) -> Point {
        self.level.normal(self.tri_ids[k]) * self.orientation(k)
    }

    pub fn area(&self) -> f64 {
        self.tri_ids.iter().map(|&t| self.level.area(t)).sum()
    }

    pub fn signed_volume(&self) -> f64 {
        let v = self.vertices();
        (0..self.len())
            .map(|k| {
                let [a, b, c] = self.triangle(k);
                v[a].dot(v[b].cross(v[c])) / 6.0
            })
            .sum()
    }

    /// Index of a level triangle within this surface.
    pub fn local_index(&self) -> HashMap<usize, usize> {
        self.tri_ids.iter().enumerate().map(|(k, &t)| (t, k)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tetra_boundaries_have_opposite_orientation() {
        let m = make_tetrahedron();
        let s1 = m.build_domain_boundary(1).unwrap();
        let s0 = m.build_domain_boundary(0).unwrap();
        assert_eq!(s1.len(), 4);
        assert!(s1.signed_volume() > 0.0);
        assert!(s0.signed_volume() < 0.0);
        for k in 0..4 {
            assert!((s1.normal(k) + s0.normal(k)).length() < 1e-15);
        }
    }

    #[test]
    fn domain_index_checked() {
        let m = make_tetrahedron();
        assert!(matches!(m.build_domain_boundary(2), Err(GeometryError::DomainOutOfRange { .. })));
    }

    #[test]
    fn interface_copies_reverse_cyclic_order() {
        let m = make_two_cubes(0.5).unwrap();
        let s1 = m.build_domain_boundary(1).unwrap();
        let s2 = m.build_domain_boundary(2).unwrap();
        let idx2 = s2.local_index();
        let mut shared = 0;
        for k in 0..s1.len() {
            if let Some(&j) = idx2.get(&s1.tri_ids[k]) {
                let a = s1.triangle(k);
                let b = s2.triangle(j);
                // reversed cycle: b is a rotation of (a0, a2, a1)
                let rev = [a[0], a[2], a[1]];
                assert!((0..3).any(|r| (0..3).all(|i| b[i] == rev[(i + r) % 3])));
                shared += 1;
            }
        }
        assert!(shared > 0);
    }

    #[test]
    fn two_cube_domain_one_is_watertight() {
        let m = make_two_cubes(0.25).unwrap();
        let s1 = m.build_domain_boundary(1).unwrap();
        let counts = s1.tri_ids.iter().fold([0usize; 3], |mut c, &t| {
            let other = if m.adjacency[t][0] == 1 { m.adjacency[t][1] } else { m.adjacency[t][0] };
            c[other] += 1;
            c
        });
        assert_eq!(counts[1], 0);
        assert!(counts[0] > 0 && counts[2] > 0);
        assert!((s1.signed_volume() - 1.0).abs() < 1e-12);
    }
}
