use super::{MultiTraceSpace, Result, SpaceError};
use crate::geometry::SkeletonMesh;
use crate::linalg::CsrMatrix;
use std::collections::HashMap;

/// Scalar embedding: rows index the per-domain dofs of `full`, columns the
/// dofs of `reduced` (both counted once per domain, without components).
/// A reduced dof maps to every domain whose boundary contains its edge. All
/// edges share the low-to-high orientation and every RWG on a surface with
/// flipped normal is the negated field, so each entry is +1.
pub fn build_r(mesh: &SkeletonMesh, full: &MultiTraceSpace, reduced: &MultiTraceSpace) -> Result<CsrMatrix> {
    let domains: HashMap<[usize; 2], Vec<usize>> = mesh.edge_domains().into_iter().collect();
    let mut row0 = vec![0];
    for s in &full.spaces {
        row0.push(row0.last().unwrap() + s.dim());
    }
    let mut col0 = vec![0];
    for s in &reduced.spaces {
        col0.push(col0.last().unwrap() + s.dim());
    }
    let mut triplets = Vec::new();
    for (i, rs) in reduced.spaces.iter().enumerate() {
        for (a, &e) in rs.dof_edges.iter().enumerate() {
            let [p, q] = rs.edges.edges[e];
            let touching = domains
                .get(&[p, q])
                .ok_or_else(|| SpaceError::Topology(format!("reduced edge ({p}, {q}) not in the skeleton")))?;
            for &j in touching {
                let Some(b) = full.spaces[j].dof_of_edge(p, q) else {
                    return Err(SpaceError::Topology(format!(
                        "edge ({p}, {q}) of reduced surface {i} has no dof on the boundary of domain {j}"
                    )));
                };
                let sign = full.spaces[j].edges.find(p, q).unwrap().1 * rs.edges.find(p, q).unwrap().1;
                triplets.push((row0[j] + b, col0[i] + a, sign as f64));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(*row0.last().unwrap(), *col0.last().unwrap(), triplets))
}

/// Lift a scalar per-domain map to the component layout of the two spaces:
/// rows follow `rows`, columns follow `cols`, electric to electric and
/// magnetic to magnetic.
pub fn expand_components(scalar: &CsrMatrix, rows: &MultiTraceSpace, cols: &MultiTraceSpace) -> CsrMatrix {
    let locate = |m: &MultiTraceSpace, k: usize| -> (usize, usize) {
        let mut start = 0;
        for i in 0..m.domain_count() {
            let n = m.spaces[i].dim();
            if k < start + n {
                return (m.electric(i).start + k - start, m.magnetic(i).start + k - start);
            }
            start += n;
        }
        unreachable!("scalar index out of range")
    };
    let mut t = Vec::with_capacity(2 * scalar.nnz());
    for (i, j, v) in scalar.triplets() {
        let (re, rm) = locate(rows, i);
        let (ce, cm) = locate(cols, j);
        t.push((re, ce, v));
        t.push((rm, cm, v));
    }
    CsrMatrix::from_triplets(rows.dim(), cols.dim(), t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_sphere, make_two_cubes, reduce_geometry};
    use crate::spaces::{gram_multi, rwg_space};

    fn spaces(mesh: &SkeletonMesh) -> (MultiTraceSpace, MultiTraceSpace) {
        let full = MultiTraceSpace::new(
            (0..mesh.domain_count).map(|i| rwg_space(&mesh.build_domain_boundary(i).unwrap()).unwrap()).collect(),
        );
        let red = reduce_geometry(mesh).unwrap();
        let reduced = MultiTraceSpace::new(red.surfaces.iter().map(|s| rwg_space(s).unwrap()).collect());
        (full, reduced)
    }

    #[test]
    fn single_sphere_blocks_are_identities() {
        let m = make_sphere(0.5).unwrap();
        let (full, reduced) = spaces(&m);
        let r = build_r(&m, &full, &reduced).unwrap();
        let n = full.spaces[0].dim();
        assert_eq!(reduced.spaces[0].dim(), n);
        assert_eq!(r.nnz(), 2 * n);
        for k in 0..n {
            assert_eq!(r.get(k, k), 1.0);
            assert_eq!(r.get(n + k, k), 1.0);
        }
    }

    #[test]
    fn two_cube_columns_and_self_polarity() {
        let m = make_two_cubes(0.5).unwrap();
        let (full, reduced) = spaces(&m);
        let r = build_r(&m, &full, &reduced).unwrap();
        assert_eq!(r.ncols, m.edge_count());
        let junction = m.junction_edges();
        let counts = r.column_counts();
        let n0 = full.spaces[0].dim();
        let n1 = full.spaces[1].dim();
        for (i, rs) in reduced.spaces.iter().enumerate() {
            for (a, &e) in rs.dof_edges.iter().enumerate() {
                let col = if i == 0 { a } else { reduced.spaces[0].dim() + a };
                let edge = rs.edges.edges[e];
                let expect = if junction.contains(&edge) { 3 } else { 2 };
                assert_eq!(counts[col], expect, "edge {edge:?}");
                if i == 1 {
                    // interior of the shared face: domains 1 and 2 only
                    let rows: Vec<usize> = (0..r.nrows).filter(|&k| r.get(k, col) != 0.0).collect();
                    assert!(rows.iter().all(|&k| k >= n0) && rows.iter().any(|&k| k >= n0 + n1));
                }
            }
        }
        assert!(r.data.iter().all(|&v| v == 1.0 || v == -1.0));

        let rr = expand_components(&r, &full, &reduced);
        for swapped in [false, true] {
            let g = gram_multi(&full, &full, swapped).unwrap();
            let p = rr.transpose().matmul(&g).matmul(&rr);
            assert!(p.max_abs() < 1e-12 * g.max_abs(), "swapped={swapped}: {}", p.max_abs());
        }
    }
}
