use super::{divergence_on, expansion_at, FieldError, Result};
use crate::linalg::CVec3;
use crate::operators::{Material, PlaneWave};
use crate::quadrature::triangle_rule;
use crate::spaces::{Flavour, TraceSpace};
use crate::{Point, C64};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Equivalent currents J = −j, M = −m of the traces (m, j) of one domain,
/// sampled at the quadrature points of its boundary.
pub struct SurfaceCurrents {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub j: Vec<CVec3>,
    pub m: Vec<CVec3>,
    pub div_j: Vec<C64>,
    pub div_m: Vec<C64>,
}

impl SurfaceCurrents {
    pub fn new(space: &TraceSpace, m: &[C64], j: &[C64], degree: usize) -> Result<Self> {
        if space.flavour != Flavour::Rwg {
            return Err(FieldError::Parameter("surface currents are expanded in RWG functions".into()));
        }
        if m.len() != space.dim() || j.len() != space.dim() {
            return Err(FieldError::Dimension(format!("{} and {} coefficients for {} dofs", m.len(), j.len(), space.dim())));
        }
        let rule = triangle_rule(degree);
        let level = &space.level;
        let mut s = SurfaceCurrents { points: vec![], weights: vec![], j: vec![], m: vec![], div_j: vec![], div_m: vec![] };
        for (tri, terms) in space.by_triangle() {
            let p = level.triangles[tri].map(|i| level.vertices[i]);
            let area = level.area(tri);
            let (dj, dm) = (-divergence_on(space, tri, &terms, j), -divergence_on(space, tri, &terms, m));
            for (b, w) in rule.points.iter().zip(&rule.weights) {
                let x = p[0] * b[0] + p[1] * b[1] + p[2] * b[2];
                s.points.push(x);
                s.weights.push(w * area);
                s.j.push(-expansion_at(space, tri, &terms, j, x));
                s.m.push(-expansion_at(space, tri, &terms, m, x));
                s.div_j.push(dj);
                s.div_m.push(dm);
            }
        }
        Ok(s)
    }

    /// Fields radiated into a homogeneous medium (κ, η).
    pub fn radiate(&self, x: Point, kappa: C64, eta: C64) -> (CVec3, CVec3) {
        let i = C64::i();
        let (mut e, mut h) = (CVec3::ZERO, CVec3::ZERO);
        for q in 0..self.points.len() {
            let d = x - self.points[q];
            let r = d.length();
            let g = (-i * kappa * r).exp() / (4.0 * PI * r) * self.weights[q];
            let dg = CVec3::from_real(d) * (-(1.0 + i * kappa * r) / (r * r) * g);
            e += self.j[q] * (-i * kappa * eta * g) + dg * (eta / (i * kappa) * self.div_j[q]) - dg.cross(&self.m[q]);
            h += self.m[q] * (-i * kappa / eta * g) + dg * (self.div_m[q] / (i * kappa * eta)) + dg.cross(&self.j[q]);
        }
        (e, h)
    }
}

#[derive(Debug, Clone)]
pub struct FarFieldPattern {
    /// (θ, φ) with θ measured from +z.
    pub directions: Vec<(f64, f64)>,
    /// F with E_s ≈ F e^{−iκr}/r.
    pub amplitudes: Vec<CVec3>,
}

impl FarFieldPattern {
    /// σ = 4π|F|² for a unit incident amplitude.
    pub fn rcs(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|f| 4.0 * PI * f.norm().powi(2)).collect()
    }

    pub fn rcs_db(&self) -> Vec<f64> {
        self.rcs().iter().map(|s| 10.0 * s.max(1e-300).log10()).collect()
    }
}

pub fn direction(theta: f64, phi: f64) -> Point {
    Point::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

/// n equally spaced angles in [0, π] in the xz-plane.
pub fn e_plane_directions(n: usize) -> Vec<(f64, f64)> {
    let n = n.max(2);
    (0..n).map(|k| (PI * k as f64 / (n - 1) as f64, 0.0)).collect()
}

/// Far field of the exterior traces (m_0, j_0); κ and η are those of the
/// background.
pub fn far_field(space: &TraceSpace, m: &[C64], j: &[C64], kappa0: f64, background: Material, directions: &[(f64, f64)]) -> Result<FarFieldPattern> {
    let kappa = background.kappa(kappa0);
    let eta = background.eta();
    let degree = 4 + (kappa.norm() * space.surface_hmax()).ceil() as usize;
    let cur = SurfaceCurrents::new(space, m, j, degree.min(12))?;
    let amplitudes = directions
        .par_iter()
        .map(|&(t, p)| {
            let rh = direction(t, p);
            let (mut n, mut l) = (CVec3::ZERO, CVec3::ZERO);
            for q in 0..cur.points.len() {
                let ph = (C64::i() * kappa * rh.dot(cur.points[q])).exp() * cur.weights[q];
                n += cur.j[q] * ph;
                l += cur.m[q] * ph;
            }
            let n_perp = n - CVec3::from_real(rh) * n.dot_real(rh);
            (n_perp * eta - CVec3::real_cross(rh, &l)) * (-C64::i() * kappa / (4.0 * PI))
        })
        .collect();
    Ok(FarFieldPattern { directions: directions.to_vec(), amplitudes })
}

#[derive(Debug, Clone)]
pub struct NearFieldSample {
    pub points: Vec<Point>,
    pub e: Vec<CVec3>,
    pub h: Vec<CVec3>,
    /// Whether each point lies in the domain whose traces were used.
    pub inside: Vec<bool>,
}

/// Incident field of the exterior domain, or zero.
pub fn incident_field(wave: Option<&PlaneWave>, x: Point) -> (CVec3, CVec3) {
    wave.map_or((CVec3::ZERO, CVec3::ZERO), |w| (w.e(x), w.h(x)))
}

/// Stratton–Chu representation in domain `domain` from its traces. For the
/// exterior domain pass the incident wave, which is added to the scattered
/// part.
#[allow(clippy::too_many_arguments)]
pub fn stratton_chu(
    space: &TraceSpace,
    domain: usize,
    m: &[C64],
    j: &[C64],
    material: Material,
    kappa0: f64,
    incident: Option<&PlaneWave>,
    points: &[Point],
) -> Result<NearFieldSample> {
    let cur = SurfaceCurrents::new(space, m, j, 6)?;
    let (kappa, eta) = (material.kappa(kappa0), material.eta());
    let (e, h): (Vec<_>, Vec<_>) = points
        .par_iter()
        .map(|&x| {
            let (es, hs) = cur.radiate(x, kappa, eta);
            let (ei, hi) = incident_field(incident, x);
            (es + ei, hs + hi)
        })
        .unzip();
    let inside = points.iter().map(|&x| (winding_number(space, x).abs() > 0.5) != (domain == 0)).collect();
    Ok(NearFieldSample { points: points.to_vec(), e, h, inside })
}

/// Solid angle of the oriented boundary seen from x, over 4π.
fn winding_number(space: &TraceSpace, x: Point) -> f64 {
    let s = &space.surface;
    let v = s.vertices();
    let mut total = 0.0;
    for k in 0..s.len() {
        let [a, b, c] = s.triangle(k).map(|i| v[i] - x);
        let (la, lb, lc) = (a.length(), b.length(), c.length());
        let num = a.dot(b.cross(c));
        let den = la * lb * lc + a.dot(b) * lc + a.dot(c) * lb + b.dot(c) * la;
        total += 2.0 * num.atan2(den);
    }
    total / (4.0 * PI)
}

trait SurfaceSize {
    fn surface_hmax(&self) -> f64;
}

impl SurfaceSize for TraceSpace {
    fn surface_hmax(&self) -> f64 {
        let v = self.surface.vertices();
        (0..self.surface.len())
            .map(|k| self.surface.triangle(k))
            .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .map(|(a, b)| (v[a] - v[b]).length())
            .fold(0.0, f64::max)
    }
}
