//! Div-conforming trace spaces as term lists over level triangles, the
//! single-trace embedding R and the twisted-pairing Grams.
//!
//! A basis function is Σ c·ψ over terms (τ, w, c) where τ is a triangle of
//! some level mesh and ψ(r) = (r − w)/(2|τ|) is the unit-flux shape function
//! pointing away from vertex w. Shape functions do not depend on the
//! orientation of τ; the surface normal only enters through the pairing.

mod bc;
mod embedding;
mod gram;

pub use bc::{bc_space, BoundaryRecipe};
pub use embedding::{build_r, expand_components};
pub use gram::{gram_cross, gram_multi, local_gram};

use crate::geometry::{edge_enumeration, EdgeSet, GeometryError, LevelMesh, OrientedSurfaceMesh, RefinedLevel};
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum SpaceError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("open surface at vertex {0}: boundary-adapted BC construction not enabled")]
    OpenSurface(usize),
    #[error("vertex {0} has a non-manifold neighbourhood")]
    NonManifoldVertex(usize),
    #[error("surface mismatch: {0}")]
    SurfaceMismatch(String),
    #[error("topology error: {0}")]
    Topology(String),
}

pub type Result<T> = std::result::Result<T, SpaceError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavour {
    Rwg,
    Bc,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub tri: usize,
    pub vertex: usize,
    pub coeff: f64,
}

/// Contribution of one dof on one level triangle: coefficients of the three
/// shape functions in the triangle's reference vertex order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalTerm {
    pub dof: usize,
    pub coeffs: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct TraceSpace {
    pub flavour: Flavour,
    /// Coarse surface whose interior edges index the dofs.
    pub surface: OrientedSurfaceMesh,
    pub edges: EdgeSet,
    pub dof_edges: Vec<usize>,
    /// Level on which the terms live (coarse for RWG, refined for BC).
    pub level: Arc<LevelMesh>,
    pub functions: Vec<Vec<Term>>,
    /// Orientation (±1) of every level triangle in the support.
    pub orientation: HashMap<usize, f64>,
}

impl TraceSpace {
    pub fn dim(&self) -> usize {
        self.functions.len()
    }

    /// Dof attached to the skeleton edge {a, b}, if it is interior here.
    pub fn dof_of_edge(&self, a: usize, b: usize) -> Option<usize> {
        let (e, _) = self.edges.find(a, b)?;
        self.dof_edges.binary_search(&e).ok()
    }

    /// Terms regrouped by level triangle, in ascending triangle order.
    pub fn by_triangle(&self) -> BTreeMap<usize, Vec<LocalTerm>> {
        let mut out: BTreeMap<usize, Vec<LocalTerm>> = BTreeMap::new();
        for (dof, f) in self.functions.iter().enumerate() {
            for t in f {
                let pos = self.level.triangles[t.tri]
                    .iter()
                    .position(|&v| v == t.vertex)
                    .expect("term vertex belongs to its triangle");
                let list = out.entry(t.tri).or_default();
                match list.iter_mut().find(|l| l.dof == dof) {
                    Some(l) => l.coeffs[pos] += t.coeff,
                    None => {
                        let mut coeffs = [0.0; 3];
                        coeffs[pos] = t.coeff;
                        list.push(LocalTerm { dof, coeffs });
                    }
                }
            }
        }
        out
    }

    /// The same functions written on the barycentric refinement of the
    /// level. A coarse shape function restricted to a child τ is
    /// Σ_k (|τ|/|T|)·λ_k(w)·ψ^τ_k where λ are the barycentric coordinates of
    /// the coarse anchor w with respect to τ.
    pub fn on_refinement(&self, refined: &RefinedLevel) -> TraceSpace {
        if self.flavour == Flavour::Bc || Arc::ptr_eq(&self.level, &refined.fine) {
            return self.clone();
        }
        let coarse = &self.level;
        let fine = &refined.fine;
        let mut functions = Vec::with_capacity(self.functions.len());
        for f in &self.functions {
            let mut out = Vec::new();
            for t in f {
                let w = coarse.vertices[t.vertex];
                let at = coarse.area(t.tri);
                for c in refined.children(t.tri) {
                    let tri = fine.triangles[c];
                    let lam = barycentric(fine, c, w);
                    let s = fine.area(c) / at;
                    for k in 0..3 {
                        if lam[k].abs() > 1e-13 {
                            out.push(Term { tri: c, vertex: tri[k], coeff: t.coeff * s * lam[k] });
                        }
                    }
                }
            }
            functions.push(out);
        }
        let mut orientation = HashMap::new();
        for (&t, &o) in &self.orientation {
            for c in refined.children(t) {
                orientation.insert(c, o);
            }
        }
        TraceSpace {
            flavour: self.flavour,
            surface: self.surface.clone(),
            edges: self.edges.clone(),
            dof_edges: self.dof_edges.clone(),
            level: fine.clone(),
            functions,
            orientation,
        }
    }

    /// Surface divergence of dof `a` on level triangle `tri` (constant there).
    pub fn divergence(&self, a: usize, tri: usize) -> f64 {
        let s: f64 = self.functions[a].iter().filter(|t| t.tri == tri).map(|t| t.coeff).sum();
        s / self.level.area(tri)
    }

    /// Evaluate dof `a` at point `x` inside level triangle `tri`.
    pub fn eval(&self, a: usize, tri: usize, x: crate::Point) -> crate::Point {
        let two_a = 2.0 * self.level.area(tri);
        self.functions[a]
            .iter()
            .filter(|t| t.tri == tri)
            .map(|t| (x - self.level.vertices[t.vertex]) * (t.coeff / two_a))
            .sum()
    }
}

/// Barycentric coordinates of a point in the plane of a level triangle.
pub fn barycentric(level: &LevelMesh, t: usize, p: crate::Point) -> [f64; 3] {
    let [a, b, c] = level.triangles[t];
    let v = &level.vertices;
    let n = (v[b] - v[a]).cross(v[c] - v[a]);
    let nn = n.length_squared();
    let l0 = (v[b] - p).cross(v[c] - p).dot(n) / nn;
    let l1 = (v[c] - p).cross(v[a] - p).dot(n) / nn;
    [l0, l1, 1.0 - l0 - l1]
}

fn orientation_map(surface: &OrientedSurfaceMesh) -> HashMap<usize, f64> {
    (0..surface.len()).map(|k| (surface.tri_ids[k], surface.orientation(k))).collect()
}

/// One RWG per interior edge: flux crosses the edge from the plus to the
/// minus triangle with unit total flux.
pub fn rwg_space(surface: &OrientedSurfaceMesh) -> Result<TraceSpace> {
    let edges = edge_enumeration(surface)?;
    let dof_edges = edges.interior_edges();
    let opposite = |k: usize, e: [usize; 2]| -> usize {
        surface.triangle(k).into_iter().find(|v| !e.contains(v)).unwrap()
    };
    let functions = dof_edges
        .iter()
        .map(|&e| {
            let (p, m) = (edges.plus[e].unwrap(), edges.minus[e].unwrap());
            let ed = edges.edges[e];
            vec![
                Term { tri: surface.tri_ids[p], vertex: opposite(p, ed), coeff: 1.0 },
                Term { tri: surface.tri_ids[m], vertex: opposite(m, ed), coeff: -1.0 },
            ]
        })
        .collect();
    Ok(TraceSpace {
        flavour: Flavour::Rwg,
        surface: surface.clone(),
        orientation: orientation_map(surface),
        level: surface.level.clone(),
        edges,
        dof_edges,
        functions,
    })
}

/// Per-domain scalar spaces; electric and magnetic components share them.
/// Layout: domains ascending, electric block then magnetic block.
#[derive(Debug, Clone)]
pub struct MultiTraceSpace {
    pub spaces: Vec<TraceSpace>,
    offsets: Vec<usize>,
}

impl MultiTraceSpace {
    pub fn new(spaces: Vec<TraceSpace>) -> Self {
        let mut offsets = vec![0];
        for s in &spaces {
            offsets.push(offsets.last().unwrap() + 2 * s.dim());
        }
        MultiTraceSpace { spaces, offsets }
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn domain_count(&self) -> usize {
        self.spaces.len()
    }

    pub fn electric(&self, i: usize) -> std::ops::Range<usize> {
        let n = self.spaces[i].dim();
        self.offsets[i]..self.offsets[i] + n
    }

    pub fn magnetic(&self, i: usize) -> std::ops::Range<usize> {
        let n = self.spaces[i].dim();
        self.offsets[i] + n..self.offsets[i] + 2 * n
    }

    pub fn offset(&self, i: usize) -> usize {
        self.offsets[i]
    }

    /// Scalar dimension summed over domains.
    pub fn scalar_dim(&self) -> usize {
        self.dim() / 2
    }

    pub fn on_refinement(&self, refined: &RefinedLevel) -> MultiTraceSpace {
        MultiTraceSpace::new(self.spaces.iter().map(|s| s.on_refinement(refined)).collect())
    }
}
