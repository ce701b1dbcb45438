use super::pairs::{pair_rule, tri_geometry, PairRule, TriGeom};
use super::{KernelSpec, OperatorError, Result, Screening};
use crate::linalg::CsrMatrix;
use crate::quadrature::QuadratureOrders;
use crate::spaces::TraceSpace;
use crate::Point;
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::sync::Arc;

/// w(r)/(4πr), zero beyond cutoff_factor·δ.
pub fn screened_kernel(r: f64, delta: f64, cutoff_factor: f64, screening: Screening) -> f64 {
    if r > cutoff_factor * delta {
        return 0.0;
    }
    let w = match screening {
        Screening::Gaussian => (-(r * r) / (delta * delta)).exp(),
        Screening::Literal => (-r / (delta * delta)).exp(),
    };
    w / (4.0 * PI * r)
}

type Grouped = BTreeMap<usize, Vec<(usize, [f64; 3])>>;

/// Terms of several spaces merged per level triangle, with dofs shifted to
/// the concatenated numbering.
fn group(spaces: &[&TraceSpace]) -> Grouped {
    let mut out: Grouped = BTreeMap::new();
    let mut offset = 0;
    for s in spaces {
        for (tri, list) in s.by_triangle() {
            out.entry(tri).or_default().extend(list.iter().map(|l| (offset + l.dof, l.coeffs)));
        }
        offset += s.dim();
    }
    out
}

/// δ⁻¹·V + δ·D for one pair in the given order.
fn local(a: &TriGeom, b: &TriGeom, delta: f64, c: f64, scr: Screening, orders: QuadratureOrders, rule: &mut PairRule) -> [[f64; 3]; 3] {
    pair_rule(a, b, orders, delta, rule);
    let mut v = [[0.0; 3]; 3];
    let mut d = 0.0;
    for q in 0..rule.w.len() {
        let (x, y) = (rule.x[q], rule.y[q]);
        let g = rule.w[q] * screened_kernel((x - y).length(), delta, c, scr);
        if g == 0.0 {
            continue;
        }
        let ax = [x - a.p[0], x - a.p[1], x - a.p[2]];
        let by = [y - b.p[0], y - b.p[1], y - b.p[2]];
        for i in 0..3 {
            for j in 0..3 {
                v[i][j] += g * ax[i].dot(by[j]);
            }
        }
        d += g;
    }
    let sv = 1.0 / (4.0 * a.area * b.area * delta);
    let sd = delta / (a.area * b.area);
    std::array::from_fn(|i| std::array::from_fn(|j| v[i][j] * sv + d * sd))
}

struct Grid {
    cell: f64,
    cells: HashMap<[i64; 3], Vec<usize>>,
}

impl Grid {
    fn key(&self, p: Point) -> [i64; 3] {
        [(p.x / self.cell).floor() as i64, (p.y / self.cell).floor() as i64, (p.z / self.cell).floor() as i64]
    }

    fn new(cell: f64, items: impl Iterator<Item = (usize, Point)>) -> Self {
        let mut g = Grid { cell, cells: HashMap::new() };
        for (i, p) in items {
            let k = g.key(p);
            g.cells.entry(k).or_default().push(i);
        }
        g
    }

    /// Items whose cell intersects the box of half-width `reach` around p,
    /// in ascending order.
    fn query(&self, p: Point, reach: f64) -> Vec<usize> {
        let lo = self.key(p - Point::splat(reach));
        let hi = self.key(p + Point::splat(reach));
        let mut out = Vec::new();
        for i in lo[0]..=hi[0] {
            for j in lo[1]..=hi[1] {
                for k in lo[2]..=hi[2] {
                    if let Some(v) = self.cells.get(&[i, j, k]) {
                        out.extend_from_slice(v);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Sparse matrix of the screened form between the concatenated test and
/// trial spaces, all living on one level. Triangle pairs whose centroid
/// distance minus both circumradii exceeds the cutoff are skipped; inside
/// the kept pairs the kernel itself is truncated pointwise.
pub fn assemble_screened(tests: &[&TraceSpace], trials: &[&TraceSpace], spec: KernelSpec, orders: QuadratureOrders) -> Result<CsrMatrix> {
    spec.validate()?;
    let KernelSpec::Screened { delta, cutoff_factor, screening } = spec else {
        return Err(OperatorError::Parameter("assemble_screened needs a screened kernel".into()));
    };
    let nr: usize = tests.iter().map(|s| s.dim()).sum();
    let nc: usize = trials.iter().map(|s| s.dim()).sum();
    let Some(first) = tests.first().or(trials.first()) else {
        return Ok(CsrMatrix::zeros(nr, nc));
    };
    let level = &first.level;
    if tests.iter().chain(trials).any(|s| !Arc::ptr_eq(&s.level, level)) {
        return Err(OperatorError::LevelMismatch);
    }
    let geom = tri_geometry(level);
    let tg: Vec<(usize, Vec<(usize, [f64; 3])>)> = group(tests).into_iter().collect();
    let ug = group(trials);
    let cut = cutoff_factor * delta;
    let rmax = ug.keys().map(|&t| geom[t].radius).fold(0.0, f64::max);
    let grid = Grid::new(cut.max(2.0 * rmax), ug.keys().map(|&t| (t, geom[t].centroid)));

    let parts: Vec<Vec<(usize, usize, f64)>> = tg
        .par_chunks(64)
        .map(|chunk| {
            let mut rows: Vec<usize> = chunk.iter().flat_map(|(_, l)| l.iter().map(|t| t.0)).collect();
            rows.sort_unstable();
            rows.dedup();
            let mut buf = vec![0.0; rows.len() * nc];
            let mut touched = vec![false; nc];
            let mut cols = Vec::new();
            let mut rule = PairRule::default();
            for (t1, terms1) in chunk {
                let a = &geom[*t1];
                let rix: Vec<usize> = terms1.iter().map(|t| rows.binary_search(&t.0).unwrap()).collect();
                for t2 in grid.query(a.centroid, cut + a.radius + rmax) {
                    let b = &geom[t2];
                    if (a.centroid - b.centroid).length() - a.radius - b.radius > cut {
                        continue;
                    }
                    let m = if *t1 <= t2 {
                        local(a, b, delta, cutoff_factor, screening, orders, &mut rule)
                    } else {
                        let m = local(b, a, delta, cutoff_factor, screening, orders, &mut rule);
                        std::array::from_fn(|i| std::array::from_fn(|j| m[j][i]))
                    };
                    let terms2 = &ug[&t2];
                    for ((_, ca), &ri) in terms1.iter().zip(&rix) {
                        let u: [f64; 3] = std::array::from_fn(|l| m[0][l] * ca[0] + m[1][l] * ca[1] + m[2][l] * ca[2]);
                        let row = &mut buf[ri * nc..(ri + 1) * nc];
                        for (col, cb) in terms2 {
                            row[*col] += u[0] * cb[0] + u[1] * cb[1] + u[2] * cb[2];
                            if !touched[*col] {
                                touched[*col] = true;
                                cols.push(*col);
                            }
                        }
                    }
                }
            }
            cols.sort_unstable();
            let mut out = Vec::new();
            for (ri, &r) in rows.iter().enumerate() {
                for &c in &cols {
                    let v = buf[ri * nc + c];
                    if v != 0.0 {
                        out.push((r, c, v));
                    }
                }
            }
            out
        })
        .collect();
    Ok(CsrMatrix::from_triplets(nr, nc, parts.concat()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_sphere, make_two_cubes, refine_level};
    use crate::spaces::{bc_space, BoundaryRecipe};

    fn sphere_bc(h: f64) -> TraceSpace {
        let m = make_sphere(h).unwrap();
        let r = refine_level(&m.mesh);
        bc_space(&m.build_domain_boundary(0).unwrap(), &r, BoundaryRecipe::ClosedOnly).unwrap()
    }

    #[test]
    fn truncation_is_exact() {
        let (d, c) = (0.1, 3.5);
        assert!(screened_kernel(c * d, d, c, Screening::Gaussian) > 0.0);
        assert_eq!(screened_kernel(c * d * (1.0 + 1e-15), d, c, Screening::Gaussian), 0.0);
        assert_eq!(screened_kernel(c * d * (1.0 + 1e-15), d, c, Screening::Literal), 0.0);
        let lit = screened_kernel(0.05, d, c, Screening::Literal);
        assert!((lit - (-0.05f64 / 0.01).exp() / (4.0 * PI * 0.05)).abs() < 1e-15);
    }

    #[test]
    fn symmetric_and_sparser_with_shorter_range() {
        let s = sphere_bc(0.4);
        let h = 0.4;
        let mut last = usize::MAX;
        for f in [1.0, 0.5, 0.25] {
            let m = assemble_screened(&[&s], &[&s], KernelSpec::screened(f * h), QuadratureOrders::default()).unwrap();
            let mt = m.transpose();
            for (i, j, v) in m.triplets() {
                assert!((v - mt.get(i, j)).abs() <= 1e-14 * m.max_abs());
            }
            assert!(m.nnz() < last, "nnz {} at δ = {}h", m.nnz(), f);
            last = m.nnz();
        }
    }

    #[test]
    fn far_supports_give_zero_matrix() {
        let m = make_two_cubes(0.25).unwrap();
        let r = refine_level(&m.mesh);
        let a = bc_space(&m.build_domain_boundary(1).unwrap(), &r, BoundaryRecipe::ClosedOnly).unwrap();
        // keep only functions near x = 0 or near x = 1
        let xs = |s: &TraceSpace, keep: &dyn Fn(f64) -> bool| {
            let mut s = s.clone();
            for f in s.functions.iter_mut() {
                if f.iter().any(|t| !keep(r.fine.centroid(t.tri).x)) {
                    f.clear();
                }
            }
            s
        };
        let left = xs(&a, &|x| x < 0.3);
        let right = xs(&a, &|x| x > 0.7);
        let mat = assemble_screened(&[&left], &[&right], KernelSpec::screened(0.05), QuadratureOrders::default()).unwrap();
        assert_eq!(mat.nnz(), 0);
        let near = assemble_screened(&[&left], &[&left], KernelSpec::screened(0.05), QuadratureOrders::default()).unwrap();
        assert!(near.nnz() > 0);
    }

    #[test]
    fn rejects_nonpositive_range() {
        let s = sphere_bc(0.5);
        assert!(assemble_screened(&[&s], &[&s], KernelSpec::screened(0.0), QuadratureOrders::default()).is_err());
        assert!(assemble_screened(&[&s], &[&s], KernelSpec::Decaying(1.0), QuadratureOrders::default()).is_err());
    }
}
