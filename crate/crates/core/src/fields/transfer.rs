use super::{expansion_at, FieldError, Result};
use crate::linalg::CVec3;
use crate::operators::interpolate_cauchy;
use crate::spaces::{LocalTerm, TraceSpace};
use crate::{Point, C64};
use std::collections::{BTreeMap, HashMap};

/// Closest point to p on triangle (a, b, c).
fn closest_on_triangle(p: Point, a: Point, b: Point, c: Point) -> Point {
    let (ab, ac, ap) = (b - a, c - a, p - a);
    let (d1, d2) = (ab.dot(ap), ac.dot(ap));
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let (d3, d4) = (ab.dot(bp), ac.dot(bp));
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let (d5, d6) = (ab.dot(cp), ac.dot(cp));
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// Uniform hash of the level triangles of a space.
struct Locator<'a> {
    space: &'a TraceSpace,
    terms: BTreeMap<usize, Vec<LocalTerm>>,
    cell: f64,
    grid: HashMap<[i64; 3], Vec<usize>>,
}

impl<'a> Locator<'a> {
    fn new(space: &'a TraceSpace) -> Self {
        let terms = space.by_triangle();
        let level = &space.level;
        let mut size = 0.0;
        for &t in terms.keys() {
            let p = level.triangles[t].map(|i| level.vertices[i]);
            size += (p[1] - p[0]).length().max((p[2] - p[0]).length());
        }
        let cell = (size / terms.len().max(1) as f64).max(1e-9);
        let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for &t in terms.keys() {
            let p = level.triangles[t].map(|i| level.vertices[i]);
            let lo = p[0].min(p[1]).min(p[2]) - Point::splat(1e-9);
            let hi = p[0].max(p[1]).max(p[2]) + Point::splat(1e-9);
            let (a, b) = (Self::key(lo, cell), Self::key(hi, cell));
            for i in a[0]..=b[0] {
                for j in a[1]..=b[1] {
                    for k in a[2]..=b[2] {
                        grid.entry([i, j, k]).or_default().push(t);
                    }
                }
            }
        }
        Locator { space, terms, cell, grid }
    }

    fn key(p: Point, cell: f64) -> [i64; 3] {
        [(p.x / cell).floor() as i64, (p.y / cell).floor() as i64, (p.z / cell).floor() as i64]
    }

    /// Triangle nearest to x and the closest point on it.
    fn locate(&self, x: Point) -> (usize, Point) {
        let level = &self.space.level;
        let visit = |best: &mut (usize, Point, f64), t: usize| {
            let p = level.triangles[t].map(|i| level.vertices[i]);
            let q = closest_on_triangle(x, p[0], p[1], p[2]);
            let d = (q - x).length();
            if d < best.2 {
                *best = (t, q, d);
            }
        };
        let mut best = (usize::MAX, x, f64::INFINITY);
        let k = Self::key(x, self.cell);
        for i in -1..=1 {
            for j in -1..=1 {
                for l in -1..=1 {
                    if let Some(list) = self.grid.get(&[k[0] + i, k[1] + j, k[2] + l]) {
                        list.iter().for_each(|&t| visit(&mut best, t));
                    }
                }
            }
        }
        if best.0 == usize::MAX {
            self.terms.keys().for_each(|&t| visit(&mut best, t));
        }
        (best.0, best.1)
    }

    /// Tangential fields e_t = n × m and h_t = j × n at the point nearest x.
    fn fields(&self, m: &[C64], j: &[C64], x: Point) -> (CVec3, CVec3) {
        let (t, q) = self.locate(x);
        let n = self.space.level.normal(t) * self.space.orientation[&t];
        let terms = &self.terms[&t];
        let mv = expansion_at(self.space, t, terms, m, q);
        let jv = expansion_at(self.space, t, terms, j, q);
        (CVec3::real_cross(n, &mv), jv.cross_real(n))
    }
}

/// Σ c_a f_a at the surface points nearest to the given points.
pub fn sample_trace(space: &TraceSpace, coeffs: &[C64], points: &[Point]) -> Result<Vec<CVec3>> {
    if coeffs.len() != space.dim() {
        return Err(FieldError::Dimension("coefficients do not match the space".into()));
    }
    let loc = Locator::new(space);
    Ok(points
        .iter()
        .map(|&x| {
            let (t, q) = loc.locate(x);
            expansion_at(space, t, &loc.terms[&t], coeffs, q)
        })
        .collect())
}

/// Rewrite the RWG traces (m, j) of `from` in the RWG space `to` by edge
/// interpolation; both must discretise the same oriented surface.
pub fn transfer_rwg(from: &TraceSpace, m: &[C64], j: &[C64], to: &TraceSpace) -> Result<(Vec<C64>, Vec<C64>)> {
    if m.len() != from.dim() || j.len() != from.dim() {
        return Err(FieldError::Dimension("trace coefficients do not match the source space".into()));
    }
    let loc = Locator::new(from);
    Ok(interpolate_cauchy(to, &|x| loc.fields(m, j, x).0, &|x| loc.fields(m, j, x).1, 3)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_two_cubes;
    use crate::operators::{Material, PlaneWave};
    use crate::spaces::rwg_space;

    #[test]
    fn closest_point_cases() {
        let (a, b, c) = (Point::ZERO, Point::X, Point::Y);
        assert!((closest_on_triangle(Point::new(0.2, 0.2, 1.0), a, b, c) - Point::new(0.2, 0.2, 0.0)).length() < 1e-15);
        assert_eq!(closest_on_triangle(Point::new(-1.0, -1.0, 0.0), a, b, c), a);
        assert_eq!(closest_on_triangle(Point::new(0.5, -1.0, 0.0), a, b, c), Point::new(0.5, 0.0, 0.0));
        let q = closest_on_triangle(Point::new(1.0, 1.0, 0.0), a, b, c);
        assert!((q - Point::new(0.5, 0.5, 0.0)).length() < 1e-15);
    }

    #[test]
    fn identity_transfer_and_constant_fields() {
        let coarse = rwg_space(&make_two_cubes(0.5).unwrap().build_domain_boundary(1).unwrap()).unwrap();
        let fine = rwg_space(&make_two_cubes(0.25).unwrap().build_domain_boundary(1).unwrap()).unwrap();
        let n = coarse.dim();
        let m: Vec<C64> = (0..n).map(|k| C64::new((k as f64).sin(), 0.2)).collect();
        let j: Vec<C64> = (0..n).map(|k| C64::new(0.1, (k as f64).cos())).collect();
        let (m2, j2) = transfer_rwg(&coarse, &m, &j, &coarse).unwrap();
        for k in 0..n {
            assert!((m2[k] - m[k]).norm() < 1e-12 && (j2[k] - j[k]).norm() < 1e-12);
        }
        let c = coarse.level.centroid(coarse.surface.tri_ids[0]);
        let n0 = coarse.surface.normal(0);
        let v = sample_trace(&coarse, &m, &[c + n0 * 0.01]).unwrap()[0];
        let terms = &coarse.by_triangle()[&coarse.surface.tri_ids[0]];
        assert!((v - expansion_at(&coarse, coarse.surface.tri_ids[0], terms, &m, c)).norm() < 1e-14);

        // constant tangential fields are reproduced exactly on every mesh
        let e0 = CVec3::new(C64::new(1.0, 0.5), C64::new(-0.3, 0.0), C64::new(0.2, 1.0));
        let h0 = CVec3::new(C64::new(0.0, 1.0), C64::new(0.7, 0.0), C64::new(-1.0, 0.0));
        let (mc, jc) = interpolate_cauchy(&coarse, &|_| e0, &|_| h0, 2).unwrap();
        let (mf, jf) = interpolate_cauchy(&fine, &|_| e0, &|_| h0, 2).unwrap();
        let (mt, jt) = transfer_rwg(&coarse, &mc, &jc, &fine).unwrap();
        for k in 0..fine.dim() {
            assert!((mt[k] - mf[k]).norm() < 1e-12, "{k}: {} vs {}", mt[k], mf[k]);
            assert!((jt[k] - jf[k]).norm() < 1e-12);
        }

        // smooth data converge under transfer
        let w = PlaneWave::standard(2.0, Material::vacuum());
        let (mc, jc) = interpolate_cauchy(&coarse, &|x| w.e(x), &|x| w.h(x), 4).unwrap();
        let (mf, _) = interpolate_cauchy(&fine, &|x| w.e(x), &|x| w.h(x), 4).unwrap();
        let (mt, _) = transfer_rwg(&coarse, &mc, &jc, &fine).unwrap();
        let err: f64 = mt.iter().zip(&mf).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let size: f64 = mf.iter().map(|a| a.norm()).fold(0.0, f64::max);
        assert!(err < 0.5 * size, "{err} vs {size}");
    }
}
