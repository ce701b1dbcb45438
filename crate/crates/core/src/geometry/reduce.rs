use super::{edge_enumeration, GeometryError, NormalRole, OrientedSurfaceMesh, Result, SkeletonMesh};
use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone)]
pub struct ReducedGeometry {
    /// Skeleton edge (low, high) -> owning domain.
    pub owner: HashMap<[usize; 2], usize>,
    /// Interface {i, j} (i < j) -> owning domain.
    pub interface_owner: BTreeMap<[usize; 2], usize>,
    /// Γ̃_i for every domain, oriented with the owner's outward normal.
    pub surfaces: Vec<OrientedSurfaceMesh>,
}

pub fn reduce_geometry(mesh: &SkeletonMesh) -> Result<ReducedGeometry> {
    reduce_geometry_with(mesh, &[])
}

/// Greedy reduction by ascending domain index. `overrides` pins interfaces
/// ({i, j}, owner) before the greedy pass runs.
pub fn reduce_geometry_with(mesh: &SkeletonMesh, overrides: &[([usize; 2], usize)]) -> Result<ReducedGeometry> {
    let mut interface_owner: BTreeMap<[usize; 2], usize> = BTreeMap::new();
    let key = |a: [usize; 2]| [a[0].min(a[1]), a[0].max(a[1])];
    let mut interfaces: Vec<[usize; 2]> = mesh.adjacency.iter().map(|&a| key(a)).collect();
    interfaces.sort_unstable();
    interfaces.dedup();
    for &(pair, owner) in overrides {
        let pair = key(pair);
        if !interfaces.contains(&pair) || !pair.contains(&owner) {
            return Err(GeometryError::Parameter(format!(
                "override assigns interface {pair:?} to domain {owner}"
            )));
        }
        interface_owner.insert(pair, owner);
    }
    for i in 0..mesh.domain_count {
        for &pair in &interfaces {
            if pair.contains(&i) {
                interface_owner.entry(pair).or_insert(i);
            }
        }
    }

    let mut surfaces: Vec<OrientedSurfaceMesh> = (0..mesh.domain_count)
        .map(|i| OrientedSurfaceMesh {
            level: mesh.mesh.clone(),
            tri_ids: Vec::new(),
            flipped: Vec::new(),
            role: NormalRole::Reduced(i),
        })
        .collect();
    for (t, &adj) in mesh.adjacency.iter().enumerate() {
        let o = interface_owner[&key(adj)];
        surfaces[o].tri_ids.push(t);
        surfaces[o].flipped.push(adj[0] == o);
    }

    let mut count: HashMap<[usize; 2], (usize, usize)> = HashMap::new();
    for (i, s) in surfaces.iter().enumerate() {
        let e = edge_enumeration(s)?;
        for (k, edge) in e.edges.iter().enumerate() {
            if e.interior[k] {
                let c = count.entry(*edge).or_insert((0, i));
                c.0 += 1;
                c.1 = i;
            }
        }
    }
    let mut owner = HashMap::new();
    for (edge, _) in mesh.edge_domains() {
        match count.get(&edge) {
            Some(&(1, i)) => {
                owner.insert(edge, i);
            }
            Some(&(n, _)) => return Err(GeometryError::Reduction(edge[0], edge[1], n)),
            None => return Err(GeometryError::Reduction(edge[0], edge[1], 0)),
        }
    }
    Ok(ReducedGeometry { owner, interface_owner, surfaces })
}
