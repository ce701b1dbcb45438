use super::{LevelMesh, OrientedSurfaceMesh};
use std::collections::HashMap;
use std::sync::Arc;

/// Barycentric refinement of a whole level. Fine vertex numbering: coarse
/// vertices, then one midpoint per coarse edge (sorted edge order), then one
/// centroid per coarse triangle. Children of triangle t are 6t..6t+6.
#[derive(Debug, Clone)]
pub struct RefinedLevel {
    pub fine: Arc<LevelMesh>,
    /// child -> (parent triangle, position 0..6)
    pub parent: Vec<(usize, u8)>,
    pub coarse_vertex_count: usize,
    pub coarse_edges: Vec<[usize; 2]>,
    edge_index: HashMap<[usize; 2], usize>,
}

impl RefinedLevel {
    pub fn midpoint(&self, a: usize, b: usize) -> usize {
        self.coarse_vertex_count + self.edge_index[&[a.min(b), a.max(b)]]
    }

    pub fn centroid(&self, t: usize) -> usize {
        self.coarse_vertex_count + self.coarse_edges.len() + t
    }

    pub fn children(&self, t: usize) -> std::ops::Range<usize> {
        6 * t..6 * t + 6
    }

    /// The refined counterpart of a surface living on the coarse level.
    pub fn fine_surface(&self, coarse: &OrientedSurfaceMesh) -> OrientedSurfaceMesh {
        let mut tri_ids = Vec::with_capacity(6 * coarse.len());
        let mut flipped = Vec::with_capacity(6 * coarse.len());
        for (&t, &f) in coarse.tri_ids.iter().zip(&coarse.flipped) {
            for c in self.children(t) {
                tri_ids.push(c);
                flipped.push(f);
            }
        }
        OrientedSurfaceMesh { level: self.fine.clone(), tri_ids, flipped, role: coarse.role }
    }
}

pub fn refine_level(level: &LevelMesh) -> RefinedLevel {
    let mut edges: Vec<[usize; 2]> = level
        .triangles
        .iter()
        .flat_map(|t| (0..3).map(move |k| [t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3])]))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    let edge_index: HashMap<[usize; 2], usize> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let nv = level.vertices.len();
    let mut vertices = level.vertices.clone();
    vertices.extend(edges.iter().map(|e| 0.5 * (level.vertices[e[0]] + level.vertices[e[1]])));
    vertices.extend(
        level
            .triangles
            .iter()
            .map(|t| (level.vertices[t[0]] + level.vertices[t[1]] + level.vertices[t[2]]) / 3.0),
    );
    let mid = |a: usize, b: usize| nv + edge_index[&[a.min(b), a.max(b)]];
    let mut triangles = Vec::with_capacity(6 * level.triangles.len());
    let mut parent = Vec::with_capacity(6 * level.triangles.len());
    for (t, &[a, b, c]) in level.triangles.iter().enumerate() {
        let g = nv + edges.len() + t;
        let (mab, mbc, mca) = (mid(a, b), mid(b, c), mid(c, a));
        let kids = [[a, mab, g], [mab, b, g], [b, mbc, g], [mbc, c, g], [c, mca, g], [mca, a, g]];
        for (p, k) in kids.into_iter().enumerate() {
            triangles.push(k);
            parent.push((t, p as u8));
        }
    }
    RefinedLevel {
        fine: Arc::new(LevelMesh { vertices, triangles }),
        parent,
        coarse_vertex_count: nv,
        coarse_edges: edges,
        edge_index,
    }
}

/// Refine a standalone surface. The returned parent map indexes the input
/// surface's triangles.
pub fn barycentric_refine(surface: &OrientedSurfaceMesh) -> (OrientedSurfaceMesh, Vec<(usize, u8)>) {
    let mut used: Vec<usize> = (0..surface.len()).flat_map(|k| surface.triangle(k)).collect();
    used.sort_unstable();
    used.dedup();
    let local: HashMap<usize, usize> = used.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let level = LevelMesh {
        vertices: used.iter().map(|&v| surface.vertices()[v]).collect(),
        triangles: (0..surface.len()).map(|k| surface.triangle(k).map(|v| local[&v])).collect(),
    };
    let r = refine_level(&level);
    let n = r.fine.triangles.len();
    let fine = OrientedSurfaceMesh {
        level: r.fine.clone(),
        tri_ids: (0..n).collect(),
        flipped: vec![false; n],
        role: surface.role,
    };
    (fine, r.parent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{edge_enumeration, make_split_sphere, make_tetrahedron, SplitKind};

    #[test]
    fn counts_and_area() {
        let m = make_split_sphere(0.5, SplitKind::Half).unwrap();
        let s = m.build_domain_boundary(1).unwrap();
        let (f, parent) = barycentric_refine(&s);
        assert_eq!(f.len(), 6 * s.len());
        let e = edge_enumeration(&s).unwrap();
        let nv = {
            let mut v: Vec<usize> = (0..s.len()).flat_map(|k| s.triangle(k)).collect();
            v.sort_unstable();
            v.dedup();
            v.len()
        };
        assert_eq!(f.vertices().len(), nv + e.len() + s.len());
        let mut sums = vec![0.0; s.len()];
        for (c, &(p, _)) in parent.iter().enumerate() {
            sums[p] += f.level.area(f.tri_ids[c]);
        }
        for (k, sum) in sums.iter().enumerate() {
            let a = s.level.area(s.tri_ids[k]);
            assert!((sum - a).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn orientation_inherited() {
        let m = make_tetrahedron();
        let s = m.build_domain_boundary(0).unwrap();
        let (f, parent) = barycentric_refine(&s);
        for (c, &(p, _)) in parent.iter().enumerate() {
            assert!((f.normal(c) - s.normal(p)).length() < 1e-12);
        }
        assert!((f.signed_volume() - s.signed_volume()).abs() < 1e-14);
    }

    #[test]
    fn level_refinement_matches_surface_view() {
        let m = make_tetrahedron();
        let r = refine_level(&m.mesh);
        let s0 = m.build_domain_boundary(0).unwrap();
        let f0 = r.fine_surface(&s0);
        assert_eq!(f0.len(), 24);
        assert!(f0.signed_volume() < 0.0);
        assert!(edge_enumeration(&f0).unwrap().interior.iter().all(|&b| b));
    }
}
