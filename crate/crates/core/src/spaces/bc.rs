//! Buffa–Christiansen functions on the barycentric refinement.
//!
//! For the coarse edge e = (a, b), a < b, the function carries unit flux
//! across the dual edge from the cell of b into the cell of a (half through
//! each coarse triangle next to e). Inside the cell of a vertex the flux is
//! redistributed over the radial fine edges so that each fine triangle
//! absorbs the same share of the vertex charge (−1 at a, +1 at b). Cells of
//! vertices on the boundary of an open surface carry no charge; the flux
//! leaves through the two boundary radial edges instead, and the free
//! constant is fixed by minimising the radial fluxes in the 2-norm.

use super::{Flavour, Result, SpaceError, Term, TraceSpace};
use crate::geometry::{edge_enumeration, LevelMesh, OrientedSurfaceMesh, RefinedLevel};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryRecipe {
    /// Closed surfaces only; any boundary vertex is an error.
    ClosedOnly,
    /// Zero-charge cells with outflow through the surface boundary.
    #[default]
    Adapted,
}

struct Fan {
    /// Fine triangles around the vertex, in angular order.
    tris: Vec<usize>,
    open: bool,
}

fn child_with(fine: &LevelMesh, refined: &RefinedLevel, t: usize, v: usize, m: usize) -> usize {
    refined
        .children(t)
        .find(|&c| {
            let tri = fine.triangles[c];
            tri.contains(&v) && tri.contains(&m)
        })
        .expect("child containing vertex and midpoint")
}

fn opposites(fine: &LevelMesh, t: usize, u: usize) -> (usize, usize) {
    let a = fine.triangles[t];
    let b = fine.triangles[u];
    let oa = a.into_iter().find(|x| !b.contains(x)).unwrap();
    let ob = b.into_iter().find(|x| !a.contains(x)).unwrap();
    (oa, ob)
}

fn build_fans(surface: &OrientedSurfaceMesh, refined: &RefinedLevel) -> Result<HashMap<usize, Fan>> {
    // vertex -> list of (surface triangle, p, q) with the triangle read as (v, p, q)
    let mut around: HashMap<usize, Vec<(usize, usize, usize)>> = HashMap::new();
    for k in 0..surface.len() {
        let t = surface.triangle(k);
        for j in 0..3 {
            around.entry(t[j]).or_default().push((k, t[(j + 1) % 3], t[(j + 2) % 3]));
        }
    }
    let fine = &refined.fine;
    let mut fans = HashMap::with_capacity(around.len());
    for (&v, list) in &around {
        let by_p: HashMap<usize, usize> = list.iter().enumerate().map(|(i, &(_, p, _))| (p, i)).collect();
        if by_p.len() != list.len() {
            return Err(SpaceError::NonManifoldVertex(v));
        }
        let qs: std::collections::HashSet<usize> = list.iter().map(|&(_, _, q)| q).collect();
        let starts: Vec<usize> = (0..list.len()).filter(|&i| !qs.contains(&list[i].1)).collect();
        let (start, open) = match starts.len() {
            0 => ((0..list.len()).min_by_key(|&i| surface.tri_ids[list[i].0]).unwrap(), false),
            1 => (starts[0], true),
            _ => return Err(SpaceError::NonManifoldVertex(v)),
        };
        let mut order = vec![start];
        while order.len() < list.len() {
            let q = list[*order.last().unwrap()].2;
            match by_p.get(&q) {
                Some(&n) if n != start => order.push(n),
                _ => break,
            }
        }
        if order.len() != list.len() {
            return Err(SpaceError::NonManifoldVertex(v));
        }
        let mut tris = Vec::with_capacity(2 * order.len());
        for &i in &order {
            let (k, p, q) = list[i];
            let t = surface.tri_ids[k];
            tris.push(child_with(fine, refined, t, v, refined.midpoint(v, p)));
            tris.push(child_with(fine, refined, t, v, refined.midpoint(v, q)));
        }
        fans.insert(v, Fan { tris, open });
    }
    Ok(fans)
}

/// Radial fluxes for one cell given the external inflow per fine triangle
/// and the total charge. Returns the terms of the redistribution.
fn cell_terms(fine: &LevelMesh, v: usize, fan: &Fan, inflow: &HashMap<usize, f64>, charge: f64, out: &mut Vec<Term>) {
    let n = fan.tris.len();
    let c = if fan.open { 0.0 } else { charge / n as f64 };
    // phi[j] = flux from tris[j] to tris[j+1]; for open fans phi_in enters tris[0]
    let mut phi = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &t in &fan.tris {
        acc += inflow.get(&t).copied().unwrap_or(0.0) + c;
        phi.push(acc);
    }
    let shift = if fan.open {
        // minimise phi_in² + Σ (phi_j + phi_in)²
        -phi.iter().sum::<f64>() / (n + 1) as f64
    } else {
        -phi.iter().sum::<f64>() / n as f64
    };
    let phi: Vec<f64> = phi.iter().map(|p| p + shift).collect();
    let radial = if fan.open { n - 1 } else { n };
    for j in 0..radial {
        let (t, u) = (fan.tris[j], fan.tris[(j + 1) % n]);
        let (ot, ou) = opposites(fine, t, u);
        if phi[j] != 0.0 {
            out.push(Term { tri: t, vertex: ot, coeff: phi[j] });
            out.push(Term { tri: u, vertex: ou, coeff: -phi[j] });
        }
    }
    if fan.open {
        // boundary radial edges: the one of tris[0] not shared with tris[1]
        // and the one of tris[n-1] not shared with tris[n-2]
        let first = fan.tris[0];
        let last = fan.tris[n - 1];
        let opp_first = boundary_opposite(fine, first, v, fan.tris[1]);
        let opp_last = boundary_opposite(fine, last, v, fan.tris[n - 2]);
        if shift != 0.0 {
            out.push(Term { tri: first, vertex: opp_first, coeff: -shift });
        }
        if phi[n - 1] != 0.0 {
            out.push(Term { tri: last, vertex: opp_last, coeff: phi[n - 1] });
        }
    }
}

/// Vertex of `t` opposite its radial edge through `v` that is not shared
/// with `neighbour`; that vertex is the other end of the shared radial edge.
fn boundary_opposite(fine: &LevelMesh, t: usize, v: usize, neighbour: usize) -> usize {
    let nb = fine.triangles[neighbour];
    fine.triangles[t].into_iter().find(|&x| x != v && nb.contains(&x)).unwrap()
}

/// BC space on `surface`, whose level must be the coarse level of `refined`.
pub fn bc_space(surface: &OrientedSurfaceMesh, refined: &RefinedLevel, recipe: BoundaryRecipe) -> Result<TraceSpace> {
    let edges = edge_enumeration(surface)?;
    let dof_edges = edges.interior_edges();
    let fine = &refined.fine;
    let fans = build_fans(surface, refined)?;
    if recipe == BoundaryRecipe::ClosedOnly {
        if let Some((&v, _)) = fans.iter().filter(|(_, f)| f.open).min_by_key(|(&v, _)| v) {
            return Err(SpaceError::OpenSurface(v));
        }
    }
    let mut functions = Vec::with_capacity(dof_edges.len());
    for &e in &dof_edges {
        let [a, b] = edges.edges[e];
        let me = refined.midpoint(a, b);
        let mut terms = Vec::new();
        let mut in_a = HashMap::new();
        let mut in_b = HashMap::new();
        for k in [edges.plus[e].unwrap(), edges.minus[e].unwrap()] {
            let t = surface.tri_ids[k];
            let ta = child_with(fine, refined, t, a, me);
            let tb = child_with(fine, refined, t, b, me);
            terms.push(Term { tri: tb, vertex: b, coeff: 0.5 });
            terms.push(Term { tri: ta, vertex: a, coeff: -0.5 });
            in_a.insert(ta, 0.5);
            in_b.insert(tb, -0.5);
        }
        cell_terms(fine, a, &fans[&a], &in_a, -1.0, &mut terms);
        cell_terms(fine, b, &fans[&b], &in_b, 1.0, &mut terms);
        functions.push(terms);
    }
    let mut orientation = HashMap::new();
    for k in 0..surface.len() {
        for c in refined.children(surface.tri_ids[k]) {
            orientation.insert(c, surface.orientation(k));
        }
    }
    Ok(TraceSpace {
        flavour: Flavour::Bc,
        surface: surface.clone(),
        edges,
        dof_edges,
        level: fine.clone(),
        functions,
        orientation,
    })
}
