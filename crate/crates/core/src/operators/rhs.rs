use super::{Material, OperatorError, Result};
use crate::linalg::CVec3;
use crate::quadrature::{gauss_legendre, triangle_rule};
use crate::spaces::{Flavour, MultiTraceSpace, TraceSpace};
use crate::{Point, C64};

/// e(x) = a·p·e^{−iκ d·x}, h = (1/η)·d × e.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    pub polarization: Point,
    pub direction: Point,
    pub amplitude: C64,
    pub kappa: C64,
    pub eta: C64,
}

impl PlaneWave {
    pub fn new(polarization: Point, direction: Point, amplitude: C64, kappa0: f64, material: Material) -> Result<Self> {
        let tol = 1e-12;
        if (polarization.length() - 1.0).abs() > tol || (direction.length() - 1.0).abs() > tol {
            return Err(OperatorError::Parameter("polarization and direction must be unit vectors".into()));
        }
        if polarization.dot(direction).abs() > tol {
            return Err(OperatorError::Parameter("polarization must be orthogonal to the direction".into()));
        }
        if !(kappa0 > 0.0) {
            return Err(OperatorError::Parameter(format!("κ₀ must be positive, got {kappa0}")));
        }
        Ok(PlaneWave { polarization, direction, amplitude, kappa: material.kappa(kappa0), eta: material.eta() })
    }

    /// x-polarised, travelling along +z, unit amplitude.
    pub fn standard(kappa0: f64, material: Material) -> Self {
        PlaneWave::new(Point::X, Point::Z, C64::new(1.0, 0.0), kappa0, material).unwrap()
    }

    pub fn e(&self, x: Point) -> CVec3 {
        let phase = (-C64::i() * self.kappa * self.direction.dot(x)).exp();
        CVec3::from_real(self.polarization) * (self.amplitude * phase)
    }

    pub fn h(&self, x: Point) -> CVec3 {
        CVec3::real_cross(self.direction, &self.e(x)) * (1.0 / self.eta)
    }
}

fn check_rwg(s: &TraceSpace) -> Result<()> {
    if s.flavour != Flavour::Rwg {
        return Err(OperatorError::Parameter("Cauchy data are tested and interpolated on RWG spaces".into()));
    }
    Ok(())
}

/// ×-pairing of the traces m = e × n, j = n × h of the given fields with
/// the RWG functions of domain `domain`; all other blocks are zero.
pub fn test_cauchy(
    spaces: &MultiTraceSpace,
    domain: usize,
    e: &dyn Fn(Point) -> CVec3,
    h: &dyn Fn(Point) -> CVec3,
    degree: usize,
) -> Result<Vec<C64>> {
    let s = &spaces.spaces[domain];
    check_rwg(s)?;
    let mut out = vec![C64::new(0.0, 0.0); spaces.dim()];
    let (oe, om) = (spaces.electric(domain).start, spaces.magnetic(domain).start);
    let rule = triangle_rule(degree);
    let level = &s.level;
    for (tri, terms) in s.by_triangle() {
        let p = level.triangles[tri].map(|i| level.vertices[i]);
        let area = level.area(tri);
        let n = level.normal(tri) * s.orientation[&tri];
        for (bary, w) in rule.points.iter().zip(&rule.weights) {
            let x = p[0] * bary[0] + p[1] * bary[1] + p[2] * bary[2];
            let m = e(x).cross_real(n);
            let j = CVec3::real_cross(n, &h(x));
            for t in &terms {
                let f = (0..3).map(|k| (x - p[k]) * t.coeffs[k]).sum::<Point>() / (2.0 * area);
                let nf = n.cross(f);
                out[oe + t.dof] += m.dot_real(nf) * (w * area);
                out[om + t.dof] += j.dot_real(nf) * (w * area);
            }
        }
    }
    Ok(out)
}

/// e_f for a plane wave incident from the exterior domain 0.
pub fn planewave_rhs(spaces: &MultiTraceSpace, wave: &PlaneWave) -> Result<Vec<C64>> {
    let hmax = spaces.spaces[0].level.triangles.iter().enumerate().map(|(t, _)| spaces.spaces[0].level.area(t).sqrt()).fold(0.0, f64::max);
    let degree = 4 + (wave.kappa.norm() * hmax * 2.0).ceil() as usize;
    test_cauchy(spaces, 0, &|x| wave.e(x), &|x| wave.h(x), degree.min(20))
}

/// RWG interpolants of m = e × n and j = n × h on one domain boundary.
/// With the unit flux across each edge, the coefficient is the flux of
/// the trace across the edge, i.e. −∫ e·t for m and ∫ h·t for j, t running
/// from the lower to the higher vertex index. Both sides of an interface
/// therefore get identical coefficients.
pub fn interpolate_cauchy(
    space: &TraceSpace,
    e: &dyn Fn(Point) -> CVec3,
    h: &dyn Fn(Point) -> CVec3,
    points: usize,
) -> Result<(Vec<C64>, Vec<C64>)> {
    check_rwg(space)?;
    let (gx, gw) = gauss_legendre(points);
    let verts = &space.level.vertices;
    let mut m = Vec::with_capacity(space.dim());
    let mut j = Vec::with_capacity(space.dim());
    for &ei in &space.dof_edges {
        let [a, b] = space.edges.edges[ei];
        let (pa, pb) = (verts[a.min(b)], verts[a.max(b)]);
        let t = pb - pa;
        let (mut se, mut sh) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for (x, w) in gx.iter().zip(&gw) {
            let p = pa + t * *x;
            se += e(p).dot_real(t) * *w;
            sh += h(p).dot_real(t) * *w;
        }
        m.push(-se);
        j.push(sh);
    }
    Ok((m, j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_two_cubes, OrientedSurfaceMesh};
    use crate::spaces::rwg_space;

    #[test]
    fn standard_wave_at_origin() {
        let w = PlaneWave::standard(2.0, Material::vacuum());
        let e = w.e(Point::ZERO);
        assert_eq!(e.to_array(), [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        // h = z × x = y
        assert!((w.h(Point::ZERO).y - 1.0).norm() < 1e-15);
        assert!(PlaneWave::new(Point::X, Point::X, C64::new(1.0, 0.0), 1.0, Material::vacuum()).is_err());
        assert!(PlaneWave::new(Point::X * 2.0, Point::Z, C64::new(1.0, 0.0), 1.0, Material::vacuum()).is_err());
    }

    fn flat_patch() -> OrientedSurfaceMesh {
        let mut v = Vec::new();
        for j in 0..5 {
            for i in 0..5 {
                v.push(Point::new(i as f64 * 0.25, j as f64 * 0.25, 0.0));
            }
        }
        let mut t = Vec::new();
        for j in 0..4 {
            for i in 0..4 {
                let a = j * 5 + i;
                t.push([a, a + 1, a + 6]);
                t.push([a, a + 6, a + 5]);
            }
        }
        OrientedSurfaceMesh::from_triangles(v, t)
    }

    #[test]
    fn interpolation_reproduces_constant_traces() {
        let surf = flat_patch();
        let s = rwg_space(&surf).unwrap();
        let e = |_: Point| CVec3::from_real(Point::new(0.3, -0.7, 0.2));
        let h = |_: Point| CVec3::from_real(Point::new(-1.1, 0.4, 0.9));
        let (m, j) = interpolate_cauchy(&s, &e, &h, 2).unwrap();
        let n = Point::Z;
        let m_exact = Point::new(0.3, -0.7, 0.2).cross(n);
        let j_exact = n.cross(Point::new(-1.1, 0.4, 0.9));
        let groups = s.by_triangle();
        let mut checked = 0;
        for (tri, terms) in &groups {
            if terms.len() < 3 {
                continue;
            }
            let c = s.level.centroid(*tri);
            let (mut fm, mut fj) = (Point::ZERO, Point::ZERO);
            for t in terms {
                let f = s.eval(t.dof, *tri, c);
                fm += f * m[t.dof].re;
                fj += f * j[t.dof].re;
            }
            assert!((fm - m_exact).length() < 1e-12, "{fm} vs {m_exact}");
            assert!((fj - j_exact).length() < 1e-12);
            checked += 1;
        }
        assert!(checked > 10);
    }

    #[test]
    fn rhs_blocks_and_linearity() {
        let mesh = make_two_cubes(0.5).unwrap();
        let spaces = MultiTraceSpace::new((0..3).map(|i| rwg_space(&mesh.build_domain_boundary(i).unwrap()).unwrap()).collect());
        let w = PlaneWave::standard(6.0, Material::vacuum());
        let b = planewave_rhs(&spaces, &w).unwrap();
        let mut w2 = w;
        w2.amplitude = C64::new(0.0, 3.0);
        let b2 = planewave_rhs(&spaces, &w2).unwrap();
        let n0 = spaces.electric(0).len();
        for (k, (x, y)) in b.iter().zip(&b2).enumerate() {
            if spaces.electric(0).contains(&k) || spaces.magnetic(0).contains(&k) {
                assert!((y - x * C64::new(0.0, 3.0)).norm() <= 1e-12 * (1.0 + x.norm()));
            } else {
                assert_eq!(*x, C64::new(0.0, 0.0));
            }
        }
        assert!(b[..n0].iter().any(|v| v.norm() > 1e-3));
    }
}
