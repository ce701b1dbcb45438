use super::pairs::{coplanar, pair_rule, tri_geometry, PairRule, TriGeom};
use super::{OperatorError, Result};
use crate::quadrature::QuadratureOrders;
use crate::spaces::{LocalTerm, TraceSpace};
use crate::C64;
use faer::Mat;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DenseKernel {
    /// Outputs [T] or [T, K] with T = −iκV + (i/κ)D.
    Helmholtz { kappa: C64, double_layer: bool },
    /// Outputs [V, D], the raw vector and divergence parts of T.
    Split { kappa: C64 },
    /// Output [κ₀V + D/κ₀] with kernel e^{−κ₀r}/(4πr).
    Energy { kappa0: f64 },
}

impl DenseKernel {
    fn outputs(&self) -> usize {
        match self {
            DenseKernel::Helmholtz { double_layer: true, .. } | DenseKernel::Split { .. } => 2,
            _ => 1,
        }
    }

    fn length_scale(&self) -> f64 {
        match *self {
            DenseKernel::Helmholtz { kappa, .. } | DenseKernel::Split { kappa } => 1.0 / kappa.norm(),
            DenseKernel::Energy { kappa0 } => 1.0 / kappa0,
        }
    }
}

type Local = [[C64; 3]; 3];

struct Raw {
    v: Local,
    d: C64,
    k: Local,
}

fn raw_pair(kernel: DenseKernel, a: &TriGeom, b: &TriGeom, orders: QuadratureOrders, rule: &mut PairRule) -> Raw {
    pair_rule(a, b, orders, kernel.length_scale(), rule);
    let zero = C64::new(0.0, 0.0);
    let mut v = [[zero; 3]; 3];
    let mut k = [[zero; 3]; 3];
    let mut d = zero;
    let (kappa, want_k) = match kernel {
        DenseKernel::Helmholtz { kappa, double_layer } => (kappa, double_layer && !coplanar(a, b)),
        DenseKernel::Split { kappa } => (kappa, false),
        DenseKernel::Energy { kappa0 } => (C64::new(0.0, -kappa0), false),
    };
    let ik = C64::i() * kappa;
    for q in 0..rule.w.len() {
        let (x, y, w) = (rule.x[q], rule.y[q], rule.w[q]);
        let dv = x - y;
        let r = dv.length();
        let e = (-ik * r).exp();
        let g = e * (w / (4.0 * PI * r));
        let ax = [x - a.p[0], x - a.p[1], x - a.p[2]];
        let by = [y - b.p[0], y - b.p[1], y - b.p[2]];
        for i in 0..3 {
            for j in 0..3 {
                v[i][j] += g * ax[i].dot(by[j]);
            }
        }
        d += g;
        if want_k {
            // ∇G = (x − y)·G'(r)/r, G'(r)/r = −e^{−iκr}(1 + iκr)/(4πr³)
            let gk = -e * (1.0 + ik * r) * (w / (4.0 * PI * r * r * r));
            let rb = [dv.cross(by[0]), dv.cross(by[1]), dv.cross(by[2])];
            for i in 0..3 {
                for j in 0..3 {
                    k[i][j] += gk * ax[i].dot(rb[j]);
                }
            }
        }
    }
    let s = 1.0 / (4.0 * a.area * b.area);
    for i in 0..3 {
        for j in 0..3 {
            v[i][j] *= s;
            k[i][j] *= s;
        }
    }
    Raw { v, d: d / (a.area * b.area), k }
}

fn combine(kernel: DenseKernel, raw: &Raw) -> Vec<Local> {
    let map = |f: &dyn Fn(usize, usize) -> C64| -> Local { std::array::from_fn(|i| std::array::from_fn(|j| f(i, j))) };
    match kernel {
        DenseKernel::Helmholtz { kappa, double_layer } => {
            let (pv, pd) = (-C64::i() * kappa, C64::i() / kappa);
            let t = map(&|i, j| pv * raw.v[i][j] + pd * raw.d);
            if double_layer {
                vec![t, raw.k]
            } else {
                vec![t]
            }
        }
        DenseKernel::Split { .. } => vec![raw.v, map(&|_, _| raw.d)],
        DenseKernel::Energy { kappa0 } => vec![map(&|i, j| kappa0 * raw.v[i][j] + raw.d / kappa0)],
    }
}

fn transpose(m: &Local) -> Local {
    std::array::from_fn(|i| std::array::from_fn(|j| m[j][i]))
}

/// Dense Galerkin matrices of `kernel` between two spaces on one level.
/// Each unordered triangle pair is integrated in a canonical order, so the
/// assembled matrices are exactly symmetric when test = trial.
pub fn assemble_dense(test: &TraceSpace, trial: &TraceSpace, kernel: DenseKernel, orders: QuadratureOrders) -> Result<Vec<Mat<C64>>> {
    if !Arc::ptr_eq(&test.level, &trial.level) {
        return Err(OperatorError::LevelMismatch);
    }
    match kernel {
        DenseKernel::Helmholtz { kappa, .. } | DenseKernel::Split { kappa } if kappa.norm() == 0.0 => {
            return Err(OperatorError::ZeroWavenumber)
        }
        _ => {}
    }
    let geom = tri_geometry(&test.level);
    let tg: Vec<(usize, Vec<LocalTerm>)> = test.by_triangle().into_iter().collect();
    let ug: Vec<(usize, Vec<LocalTerm>)> = trial.by_triangle().into_iter().collect();
    let (nr, nc, no) = (test.dim(), trial.dim(), kernel.outputs());

    // with identical spaces every unordered pair is integrated once and
    // its contribution mirrored
    let same = std::ptr::eq(test, trial) || test.functions == trial.functions;

    let partials: Vec<(Vec<usize>, Vec<Vec<C64>>, Vec<Vec<C64>>)> = tg
        .par_chunks(16)
        .map(|chunk| {
            let mut rows: Vec<usize> = chunk.iter().flat_map(|(_, l)| l.iter().map(|t| t.dof)).collect();
            rows.sort_unstable();
            rows.dedup();
            let mut buf = vec![vec![C64::new(0.0, 0.0); rows.len() * nc]; no];
            let mut mirror = vec![vec![C64::new(0.0, 0.0); if same { rows.len() * nc } else { 0 }]; no];
            let mut rule = PairRule::default();
            for (t1, terms1) in chunk {
                let rix: Vec<usize> = terms1.iter().map(|t| rows.binary_search(&t.dof).unwrap()).collect();
                let start = if same { ug.partition_point(|(t, _)| t < t1) } else { 0 };
                for (t2, terms2) in &ug[start..] {
                    let locals = if t1 <= t2 {
                        combine(kernel, &raw_pair(kernel, &geom[*t1], &geom[*t2], orders, &mut rule))
                    } else {
                        combine(kernel, &raw_pair(kernel, &geom[*t2], &geom[*t1], orders, &mut rule))
                            .iter()
                            .map(transpose)
                            .collect()
                    };
                    let mirrored = same && t1 != t2;
                    for (o, m) in locals.iter().enumerate() {
                        for (a, &ri) in terms1.iter().zip(&rix) {
                            let u: [C64; 3] = std::array::from_fn(|l| (0..3).map(|k| m[k][l] * a.coeffs[k]).sum());
                            let row = &mut buf[o][ri * nc..(ri + 1) * nc];
                            for b in terms2 {
                                row[b.dof] += u[0] * b.coeffs[0] + u[1] * b.coeffs[1] + u[2] * b.coeffs[2];
                            }
                            if mirrored {
                                let row = &mut mirror[o][ri * nc..(ri + 1) * nc];
                                for b in terms2 {
                                    row[b.dof] += u[0] * b.coeffs[0] + u[1] * b.coeffs[1] + u[2] * b.coeffs[2];
                                }
                            }
                        }
                    }
                }
            }
            (rows, buf, mirror)
        })
        .collect();

    let mut out: Vec<Mat<C64>> = (0..no).map(|_| Mat::zeros(nr, nc)).collect();
    for (rows, buf, mirror) in partials {
        for o in 0..no {
            for (ri, &r) in rows.iter().enumerate() {
                for c in 0..nc {
                    out[o][(r, c)] += buf[o][ri * nc + c];
                }
            }
            if same {
                for (ri, &r) in rows.iter().enumerate() {
                    for c in 0..nc {
                        out[o][(c, r)] += mirror[o][ri * nc + c];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// uᴴEu for each u, E the energy form of `space`, without forming E.
pub fn energy_quadratic(space: &TraceSpace, us: &[&[C64]], kappa0: f64, orders: QuadratureOrders) -> Result<Vec<f64>> {
    if !(kappa0 > 0.0) {
        return Err(OperatorError::Parameter(format!("κ₀ must be positive, got {kappa0}")));
    }
    if let Some(u) = us.iter().find(|u| u.len() != space.dim()) {
        return Err(OperatorError::Parameter(format!("vector of length {} for {} dofs", u.len(), space.dim())));
    }
    let kernel = DenseKernel::Energy { kappa0 };
    let geom = tri_geometry(&space.level);
    let nv = us.len();
    // per triangle: coefficients of the three shape functions, per vector
    let local: Vec<(usize, Vec<[C64; 3]>)> = space
        .by_triangle()
        .into_iter()
        .map(|(t, terms)| {
            let c = us
                .iter()
                .map(|u| std::array::from_fn(|k| terms.iter().map(|l| u[l.dof] * l.coeffs[k]).sum()))
                .collect();
            (t, c)
        })
        .collect();
    let idx: Vec<usize> = (0..local.len()).collect();
    let sums = idx
        .par_chunks(16)
        .map(|chunk| {
            let mut acc = vec![0.0; nv];
            let mut rule = PairRule::default();
            for &i in chunk {
                let (t1, c1) = &local[i];
                for (t2, c2) in &local[i..] {
                    let m = &combine(kernel, &raw_pair(kernel, &geom[*t1], &geom[*t2], orders, &mut rule))[0];
                    let f = if t1 == t2 { 1.0 } else { 2.0 };
                    for v in 0..nv {
                        let mut s = C64::new(0.0, 0.0);
                        for k in 0..3 {
                            for l in 0..3 {
                                s += c1[v][k].conj() * m[k][l].re * c2[v][l];
                            }
                        }
                        acc[v] += f * s.re;
                    }
                }
            }
            acc
        })
        .collect::<Vec<_>>();
    // summed in chunk order so the result does not depend on scheduling
    Ok((0..nv).map(|v| sums.iter().map(|a| a[v]).sum()).collect())
}

pub struct HelmholtzBlocks {
    pub t: Mat<C64>,
    pub k: Mat<C64>,
}

/// Single layer T and principal-value double layer K for wavenumber κ.
pub fn assemble_helmholtz(space: &TraceSpace, kappa: C64, orders: QuadratureOrders) -> Result<HelmholtzBlocks> {
    let mut m = assemble_dense(space, space, DenseKernel::Helmholtz { kappa, double_layer: true }, orders)?;
    let k = m.pop().unwrap();
    let t = m.pop().unwrap();
    Ok(HelmholtzBlocks { t, k })
}

pub fn assemble_single_layer(test: &TraceSpace, trial: &TraceSpace, kappa: C64, orders: QuadratureOrders) -> Result<Mat<C64>> {
    Ok(assemble_dense(test, trial, DenseKernel::Helmholtz { kappa, double_layer: false }, orders)?.remove(0))
}

pub fn assemble_double_layer_pv(test: &TraceSpace, trial: &TraceSpace, kappa: C64, orders: QuadratureOrders) -> Result<Mat<C64>> {
    Ok(assemble_dense(test, trial, DenseKernel::Helmholtz { kappa, double_layer: true }, orders)?.remove(1))
}

/// The two parts of T with their prefactors: T = vector_prefactor·V +
/// scalar_prefactor·D.
pub struct SingleLayerSplit {
    pub vector_prefactor: C64,
    pub scalar_prefactor: C64,
    pub vector: Mat<C64>,
    pub scalar: Mat<C64>,
}

pub fn single_layer_split(space: &TraceSpace, kappa: C64, orders: QuadratureOrders) -> Result<SingleLayerSplit> {
    let mut m = assemble_dense(space, space, DenseKernel::Split { kappa }, orders)?;
    let scalar = m.pop().unwrap();
    let vector = m.pop().unwrap();
    Ok(SingleLayerSplit { vector_prefactor: -C64::i() * kappa, scalar_prefactor: C64::i() / kappa, vector, scalar })
}

/// κ₀V + D/κ₀ with the decaying kernel; real symmetric positive definite.
pub fn assemble_energy(space: &TraceSpace, kappa0: f64, orders: QuadratureOrders) -> Result<Mat<f64>> {
    if !(kappa0 > 0.0) {
        return Err(OperatorError::Parameter(format!("κ₀ must be positive, got {kappa0}")));
    }
    let m = assemble_dense(space, space, DenseKernel::Energy { kappa0 }, orders)?.remove(0);
    Ok(Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re))
}
