use super::{GeometryError, OrientedSurfaceMesh, Result};
use std::collections::HashMap;

/// Edges of one oriented surface, oriented from the lower to the higher
/// vertex index and sorted lexicographically.
#[derive(Debug, Clone)]
pub struct EdgeSet {
    pub edges: Vec<[usize; 2]>,
    pub interior: Vec<bool>,
    /// Surface-local triangle traversing the edge high -> low. RWG flux
    /// leaves this triangle.
    pub plus: Vec<Option<usize>>,
    /// Surface-local triangle traversing the edge low -> high.
    pub minus: Vec<Option<usize>>,
    lookup: HashMap<[usize; 2], usize>,
}

impl EdgeSet {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Index of the edge joining `a` and `b`, with +1 when (a, b) already
    /// follows the storage orientation and -1 when it was flipped.
    pub fn find(&self, a: usize, b: usize) -> Option<(usize, i8)> {
        let key = [a.min(b), a.max(b)];
        self.lookup.get(&key).map(|&i| (i, if a < b { 1 } else { -1 }))
    }

    pub fn interior_edges(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.interior[i]).collect()
    }
}

pub fn edge_enumeration(surface: &OrientedSurfaceMesh) -> Result<EdgeSet> {
    let mut map: HashMap<[usize; 2], (Vec<usize>, Vec<usize>)> = HashMap::new();
    for k in 0..surface.len() {
        let t = surface.triangle(k);
        for j in 0..3 {
            let (a, b) = (t[j], t[(j + 1) % 3]);
            let e = map.entry([a.min(b), a.max(b)]).or_default();
            if a < b {
                e.1.push(k);
            } else {
                e.0.push(k);
            }
        }
    }
    let mut keys: Vec<[usize; 2]> = map.keys().copied().collect();
    keys.sort_unstable();
    let mut set = EdgeSet {
        edges: Vec::with_capacity(keys.len()),
        interior: Vec::with_capacity(keys.len()),
        plus: Vec::with_capacity(keys.len()),
        minus: Vec::with_capacity(keys.len()),
        lookup: HashMap::with_capacity(keys.len()),
    };
    for key in keys {
        let (p, m) = &map[&key];
        let n = p.len() + m.len();
        if n > 2 {
            return Err(GeometryError::NonManifold(key[0], key[1], n));
        }
        if n == 2 && (p.len() != 1 || m.len() != 1) {
            return Err(GeometryError::NotWatertight {
                domain: usize::MAX,
                detail: format!("inconsistent orientation across edge ({}, {})", key[0], key[1]),
            });
        }
        set.lookup.insert(key, set.edges.len());
        set.edges.push(key);
        set.interior.push(n == 2);
        set.plus.push(p.first().copied());
        set.minus.push(m.first().copied());
    }
    Ok(set)
}
