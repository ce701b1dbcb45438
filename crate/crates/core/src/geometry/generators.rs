//! Structured mesh generators for the study geometries.
//!
//! Spheres are built from latitude rows θ_k = kπ/K joined by a two-pointer
//! merge walk; cut walls reuse the row vertices on the junction curves so
//! the skeleton is conforming by construction (no coordinate welding).

use super::{GeometryError, Result, SkeletonMesh};
use crate::Point;
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitKind {
    /// Upper half is Ω_1, lower half Ω_2, cut by the equatorial disk.
    Half,
    /// Ω_2 is the quadrant x > 0, y > 0; Ω_1 the remaining three quarters.
    Quadrant,
}

#[derive(Default)]
struct Builder {
    v: Vec<Point>,
    t: Vec<[usize; 3]>,
    adj: Vec<[usize; 2]>,
}

impl Builder {
    fn add(&mut self, p: Point) -> usize {
        self.v.push(p);
        self.v.len() - 1
    }

    /// Push with the normal turned towards `dir`; `adj` = (domain the normal
    /// points into, domain behind).
    fn push(&mut self, tri: [usize; 3], dir: Point, adj: [usize; 2]) {
        let [a, b, c] = tri;
        let n = (self.v[b] - self.v[a]).cross(self.v[c] - self.v[a]);
        self.t.push(if n.dot(dir) >= 0.0 { tri } else { [a, c, b] });
        self.adj.push(adj);
    }

    fn centroid(&self, tri: [usize; 3]) -> Point {
        (self.v[tri[0]] + self.v[tri[1]] + self.v[tri[2]]) / 3.0
    }

    fn finish(self) -> Result<SkeletonMesh> {
        SkeletonMesh::new(self.v, self.t, self.adj)
    }
}

fn check_h(h: f64) -> Result<()> {
    if !(h > 0.0 && h <= 0.5) {
        return Err(GeometryError::Parameter(format!("mesh size h = {h} outside (0, 0.5]")));
    }
    Ok(())
}

/// Triangulate the band between two closed rings whose points sit at
/// angular fractions (i + off) / n.
fn merge_closed(a: &[usize], oa: f64, b: &[usize], ob: f64) -> Vec<[usize; 3]> {
    let (p, q) = (a.len(), b.len());
    if p == 1 {
        return (0..q).map(|j| [a[0], b[j], b[(j + 1) % q]]).collect();
    }
    if q == 1 {
        return (0..p).map(|i| [a[i], a[(i + 1) % p], b[0]]).collect();
    }
    let mut out = Vec::with_capacity(p + q);
    let (mut i, mut j) = (0, 0);
    while i < p || j < q {
        let na = (i as f64 + 1.0 + oa) / p as f64;
        let nb = (j as f64 + 1.0 + ob) / q as f64;
        if j == q || (i < p && na <= nb) {
            out.push([a[i % p], a[(i + 1) % p], b[j % q]]);
            i += 1;
        } else {
            out.push([a[i % p], b[(j + 1) % q], b[j % q]]);
            j += 1;
        }
    }
    out
}

/// Triangulate the strip between two open polylines spanning the same
/// parameter interval. A single-point polyline gives a fan.
fn merge_open(a: &[usize], b: &[usize]) -> Vec<[usize; 3]> {
    let (p, q) = (a.len() - 1, b.len() - 1);
    let mut out = Vec::with_capacity(p + q);
    let (mut i, mut j) = (0, 0);
    while i < p || j < q {
        let na = if p == 0 { f64::INFINITY } else { (i + 1) as f64 / p as f64 };
        let nb = if q == 0 { f64::INFINITY } else { (j + 1) as f64 / q as f64 };
        if j == q || (i < p && na <= nb) {
            out.push([a[i], a[i + 1], b[j]]);
            i += 1;
        } else {
            out.push([a[i], b[j + 1], b[j]]);
            j += 1;
        }
    }
    out
}

/// cos/sin of 2π·f, exact at multiples of a quarter turn.
fn unit_circle(f: f64) -> (f64, f64) {
    let q = 4.0 * f;
    if q == q.round() {
        match (q as i64).rem_euclid(4) {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        }
    } else {
        let phi = 2.0 * PI * f;
        (phi.cos(), phi.sin())
    }
}

/// (sin θ_k, cos θ_k) with θ_k = kπ/K, exact at the equator.
fn row_angle(k: usize, kk: usize) -> (f64, f64) {
    if 2 * k == kk {
        (1.0, 0.0)
    } else {
        let th = k as f64 * PI / kk as f64;
        (th.sin(), th.cos())
    }
}

fn ring_count(radius: f64, h: f64) -> usize {
    ((2.0 * PI * radius / h).round() as usize).max(3)
}

struct Rows {
    /// North pole, rows 1..K-1, south pole.
    rings: Vec<Vec<usize>>,
    offsets: Vec<f64>,
}

fn sphere_rows(b: &mut Builder, h: f64, equator: Option<usize>) -> Rows {
    let kk = 2 * ((FRAC_PI_2 / h).round() as usize).max(1);
    let mut rings = vec![vec![b.add(Point::Z)]];
    let mut offsets = vec![0.0];
    for k in 1..kk {
        let (s, c) = row_angle(k, kk);
        let n = if 2 * k == kk { equator.unwrap_or_else(|| ring_count(s, h)) } else { ring_count(s, h) };
        let off = if k % 2 == 1 && 2 * k != kk { 0.5 } else { 0.0 };
        let ring = (0..n)
            .map(|i| {
                let (cp, sp) = unit_circle((i as f64 + off) / n as f64);
                b.add(Point::new(s * cp, s * sp, c))
            })
            .collect();
        rings.push(ring);
        offsets.push(off);
    }
    rings.push(vec![b.add(Point::NEG_Z)]);
    offsets.push(0.0);
    Rows { rings, offsets }
}

fn sphere_bands(rows: &Rows) -> Vec<[usize; 3]> {
    (0..rows.rings.len() - 1)
        .flat_map(|k| merge_closed(&rows.rings[k], rows.offsets[k], &rows.rings[k + 1], rows.offsets[k + 1]))
        .collect()
}

/// Unit sphere, tagged (0|1).
pub fn make_sphere(h: f64) -> Result<SkeletonMesh> {
    check_h(h)?;
    let mut b = Builder::default();
    let rows = sphere_rows(&mut b, h, None);
    for tri in sphere_bands(&rows) {
        let c = b.centroid(tri);
        b.push(tri, c, [0, 1]);
    }
    b.finish()
}

/// Unit ball split into two domains by internal walls.
pub fn make_split_sphere(h: f64, split: SplitKind) -> Result<SkeletonMesh> {
    check_h(h)?;
    match split {
        SplitKind::Half => half_sphere(h),
        SplitKind::Quadrant => quadrant_sphere(h),
    }
}

fn half_sphere(h: f64) -> Result<SkeletonMesh> {
    let mut b = Builder::default();
    let n_eq = ring_count(1.0, h);
    let rows = sphere_rows(&mut b, h, Some(n_eq));
    for tri in sphere_bands(&rows) {
        let c = b.centroid(tri);
        b.push(tri, c, [0, if c.z > 0.0 { 1 } else { 2 }]);
    }
    let equator = rows.rings[rows.rings.len() / 2].clone();
    let jj = ((1.0 / h).round() as usize).max(1);
    let mut rings = vec![vec![b.add(Point::ZERO)]];
    let mut offsets = vec![0.0];
    for j in 1..jj {
        let r = j as f64 / jj as f64;
        let n = ring_count(r, h);
        let off = if (jj - j) % 2 == 1 { 0.5 } else { 0.0 };
        rings.push(
            (0..n)
                .map(|i| {
                    let (cp, sp) = unit_circle((i as f64 + off) / n as f64);
                    b.add(Point::new(r * cp, r * sp, 0.0))
                })
                .collect(),
        );
        offsets.push(off);
    }
    rings.push(equator);
    offsets.push(0.0);
    for k in 0..rings.len() - 1 {
        for tri in merge_closed(&rings[k], offsets[k], &rings[k + 1], offsets[k + 1]) {
            b.push(tri, Point::Z, [1, 2]);
        }
    }
    b.finish()
}

fn quadrant_sphere(h: f64) -> Result<SkeletonMesh> {
    let mut b = Builder::default();
    let kk = 2 * ((FRAC_PI_2 / h).round() as usize).max(1);
    let north = b.add(Point::Z);
    let south = b.add(Point::NEG_Z);
    // rows[k]: closed ring of 4·m_k points with quarter-turn points at q·m_k
    let mut rows: Vec<Vec<usize>> = vec![vec![north]];
    for k in 1..kk {
        let (s, c) = row_angle(k, kk);
        let m = ((FRAC_PI_2 * s / h).round() as usize).max(1);
        rows.push(
            (0..4 * m)
                .map(|i| {
                    let (cp, sp) = unit_circle(i as f64 / (4 * m) as f64);
                    b.add(Point::new(s * cp, s * sp, c))
                })
                .collect(),
        );
    }
    rows.push(vec![south]);
    let arc = |row: &Vec<usize>, q: usize| -> Vec<usize> {
        if row.len() == 1 {
            return row.clone();
        }
        let m = row.len() / 4;
        (0..=m).map(|i| row[(q * m + i) % row.len()]).collect()
    };
    for k in 0..kk {
        for q in 0..4 {
            for tri in merge_open(&arc(&rows[k], q), &arc(&rows[k + 1], q)) {
                let c = b.centroid(tri);
                b.push(tri, c, [0, if q == 0 { 2 } else { 1 }]);
            }
        }
    }
    // Walls: half-disks in the planes y = 0 (x > 0) and x = 0 (y > 0),
    // sharing their z-axis points. Arc j has radius j/J.
    let meridian = |q: usize| -> Vec<usize> { rows.iter().map(|r| r[if r.len() == 1 { 0 } else { q * r.len() / 4 }]).collect() };
    let jj = ((1.0 / h).round() as usize).max(1);
    let origin = b.add(Point::ZERO);
    let mut axis: Vec<(usize, usize)> = Vec::new();
    let mut arc_counts = Vec::new();
    for j in 1..jj {
        let r = j as f64 / jj as f64;
        let n = ((PI * r / h).round() as usize).max(2);
        axis.push((b.add(Point::new(0.0, 0.0, r)), b.add(Point::new(0.0, 0.0, -r))));
        arc_counts.push(n);
    }
    for (q, dir) in [(0usize, Point::Y), (1usize, Point::X)] {
        let mut arcs: Vec<Vec<usize>> = vec![vec![origin]];
        for j in 1..jj {
            let r = j as f64 / jj as f64;
            let n = arc_counts[j - 1];
            let mut a = vec![axis[j - 1].0];
            for i in 1..n {
                let (s, c) = row_angle(i, n);
                let p = if q == 0 { Point::new(r * s, 0.0, r * c) } else { Point::new(0.0, r * s, r * c) };
                a.push(b.add(p));
            }
            a.push(axis[j - 1].1);
            arcs.push(a);
        }
        arcs.push(meridian(q));
        for j in 0..arcs.len() - 1 {
            for tri in merge_open(&arcs[j], &arcs[j + 1]) {
                b.push(tri, dir, [2, 1]);
            }
        }
    }
    b.finish()
}

fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 }).collect()
}

/// Cube Ω_1 = [0,1]³ with Ω_2 = [1,1.5]×[0.25,0.75]² attached flush on the
/// face x = 1. The shared square is meshed once, tagged (1|2). Faces are
/// structured grids except the frame around the shared square on x = 1,
/// which is filled by layered strips between the two square outlines.
pub fn make_two_cubes(h: f64) -> Result<SkeletonMesh> {
    check_h(h)?;
    let n1 = (1.0 / h - 1e-9).ceil() as usize;
    let m = (0.5 / h - 1e-9).ceil() as usize;
    let u1 = uniform(0.0, 1.0, n1);
    let u2 = uniform(0.25, 0.75, m);
    let x2 = uniform(1.0, 1.5, m);

    let mut b = Builder::default();
    let mut index = std::collections::HashMap::new();
    let mut vid = |b: &mut Builder, p: Point| -> usize {
        *index.entry(p.to_array().map(f64::to_bits)).or_insert_with(|| b.add(p))
    };
    let point = |axis: usize, c: f64, u: f64, v: f64| {
        let mut p = [0.0; 3];
        p[axis] = c;
        p[(axis + 1) % 3] = u;
        p[(axis + 2) % 3] = v;
        Point::from_array(p)
    };
    let axis_dir = |axis: usize, s: f64| {
        let mut d = [0.0; 3];
        d[axis] = s;
        Point::from_array(d)
    };
    // Structured face with constant coordinate `axis` = c; (u, v) are the
    // next two axes in cyclic order.
    let mut face = |b: &mut Builder, axis: usize, c: f64, us: &[f64], vs: &[f64], dir: f64, adj: [usize; 2]| {
        for i in 0..us.len() - 1 {
            for j in 0..vs.len() - 1 {
                let p00 = vid(b, point(axis, c, us[i], vs[j]));
                let p10 = vid(b, point(axis, c, us[i + 1], vs[j]));
                let p11 = vid(b, point(axis, c, us[i + 1], vs[j + 1]));
                let p01 = vid(b, point(axis, c, us[i], vs[j + 1]));
                let tris = if (i + j) % 2 == 0 { [[p00, p10, p11], [p00, p11, p01]] } else { [[p00, p10, p01], [p10, p11, p01]] };
                for t in tris {
                    b.push(t, axis_dir(axis, dir), adj);
                }
            }
        }
        };
    // axis 0: (u, v) = (y, z); axis 1: (z, x); axis 2: (x, y)
    face(&mut b, 0, 0.0, &u1, &u1, -1.0, [0, 1]);
    face(&mut b, 1, 0.0, &u1, &u1, -1.0, [0, 1]);
    face(&mut b, 1, 1.0, &u1, &u1, 1.0, [0, 1]);
    face(&mut b, 2, 0.0, &u1, &u1, -1.0, [0, 1]);
    face(&mut b, 2, 1.0, &u1, &u1, 1.0, [0, 1]);
    face(&mut b, 0, 1.0, &u2, &u2, -1.0, [1, 2]);
    face(&mut b, 0, 1.5, &u2, &u2, 1.0, [0, 2]);
    face(&mut b, 1, 0.25, &u2, &x2, -1.0, [0, 2]);
    face(&mut b, 1, 0.75, &u2, &x2, 1.0, [0, 2]);
    face(&mut b, 2, 0.25, &x2, &u2, -1.0, [0, 2]);
    face(&mut b, 2, 0.75, &x2, &u2, 1.0, [0, 2]);

    // Frame on x = 1 between the unit square and the shared square, in
    // (y, z). Side s runs from corner s to corner s + 1.
    let layers = ((0.25 / h).round() as usize).max(1);
    let outer = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
    let inner = [(0.25, 0.25), (0.75, 0.25), (0.75, 0.75), (0.25, 0.75)];
    let side = |l: usize, s: usize| -> Vec<(f64, f64)> {
        let exact = |nodes: &[f64], lo: f64| -> Vec<(f64, f64)> {
            let r: Vec<f64> = nodes.iter().rev().copied().collect();
            match s {
                0 => nodes.iter().map(|&y| (y, lo)).collect(),
                1 => nodes.iter().map(|&z| (1.0 - lo, z)).collect(),
                2 => r.iter().map(|&y| (y, 1.0 - lo)).collect(),
                _ => r.iter().map(|&z| (lo, z)).collect(),
            }
        };
        if l == 0 {
            return exact(&u1, 0.0);
        }
        if l == layers {
            return exact(&u2, 0.25);
        }
        let t = l as f64 / layers as f64;
        let corner = |k: usize| {
            let (o, i) = (outer[k % 4], inner[k % 4]);
            (o.0 + (i.0 - o.0) * t, o.1 + (i.1 - o.1) * t)
        };
        let (a, c) = (corner(s), corner(s + 1));
        let n = (n1 as f64 + (m as f64 - n1 as f64) * t).round().max(1.0) as usize;
        (0..=n)
            .map(|i| {
                let f = i as f64 / n as f64;
                if i == 0 {
                    a
                } else if i == n {
                    c
                } else {
                    (a.0 + (c.0 - a.0) * f, a.1 + (c.1 - a.1) * f)
                }
            })
            .collect()
    };
    for s in 0..4 {
        for l in 0..layers {
            let mut ids = |b: &mut Builder, pts: Vec<(f64, f64)>| -> Vec<usize> {
                pts.into_iter().map(|(y, z)| vid(b, Point::new(1.0, y, z))).collect()
            };
            let a = ids(&mut b, side(l, s));
            let c = ids(&mut b, side(l + 1, s));
            for t in merge_open(&a, &c) {
                b.push(t, Point::X, [0, 1]);
            }
        }
    }
    b.finish()
}

/// Unit right tetrahedron tagged (0|1).
pub fn make_tetrahedron() -> SkeletonMesh {
    SkeletonMesh::new(
        vec![Point::ZERO, Point::X, Point::Y, Point::Z],
        vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
        vec![[0, 1]; 4],
    )
    .expect("tetrahedron fixture is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn area_of(m: &SkeletonMesh, pred: impl Fn([usize; 2]) -> bool) -> f64 {
        (0..m.triangles().len()).filter(|&t| pred(m.adjacency[t])).map(|t| m.mesh.area(t)).sum()
    }

    fn domains_at_edge(m: &SkeletonMesh, e: [usize; 2]) -> Vec<usize> {
        m.edge_domains().into_iter().find(|x| x.0 == e).unwrap().1
    }

    #[test]
    fn two_cubes_coarsest() {
        let m = make_two_cubes(0.5).unwrap();
        assert_eq!(m.domain_count, 3);
        let shared = area_of(&m, |a| a == [1, 2]);
        assert!((shared - 0.25).abs() < 1e-14);
        // every boundary edge of the shared face touches all three domains
        let mut boundary: std::collections::HashMap<[usize; 2], usize> = Default::default();
        for t in 0..m.triangles().len() {
            if m.adjacency[t] == [1, 2] {
                let tri = m.triangles()[t];
                for k in 0..3 {
                    let (a, b) = (tri[k], tri[(k + 1) % 3]);
                    *boundary.entry([a.min(b), a.max(b)]).or_default() += 1;
                }
            }
        }
        let rim: Vec<_> = boundary.into_iter().filter(|(_, c)| *c == 1).map(|(e, _)| e).collect();
        assert!(!rim.is_empty());
        for e in &rim {
            assert_eq!(domains_at_edge(&m, *e), vec![0, 1, 2]);
        }
        let mut junction = m.junction_edges();
        let mut rim_sorted = rim.clone();
        rim_sorted.sort_unstable();
        junction.sort_unstable();
        assert_eq!(junction, rim_sorted);
    }

    #[test]
    fn two_cubes_scaling() {
        let c = make_two_cubes(0.5).unwrap().triangles().len() as f64;
        let f = make_two_cubes(0.25).unwrap().triangles().len() as f64;
        assert!((f / c - 4.0).abs() <= 0.3 * 4.0, "ratio {}", f / c);
        let m = make_two_cubes(0.12).unwrap();
        let total = area_of(&m, |a| a[0] == 0);
        assert!((total - (6.0 - 0.25 + 4.0 * 0.25 + 0.25)).abs() < 1e-12);
    }

    #[test]
    fn parameter_guard() {
        assert!(make_two_cubes(0.0).is_err());
        assert!(make_two_cubes(0.6).is_err());
        assert!(make_split_sphere(-1.0, SplitKind::Half).is_err());
    }

    #[test]
    fn half_split_sphere() {
        let m = make_split_sphere(0.4, SplitKind::Half).unwrap();
        assert_eq!(m.domain_count, 3);
        let disk = area_of(&m, |a| a == [1, 2]);
        assert!((disk - PI).abs() < 0.05 * PI);
        let outer = area_of(&m, |a| a[0] == 0);
        assert!((outer - 4.0 * PI).abs() < 0.05 * 4.0 * PI, "area {outer}");
        let junction = m.junction_edges();
        assert!(!junction.is_empty());
        for e in &junction {
            assert!(m.vertices()[e[0]].z.abs() < 1e-15 && m.vertices()[e[1]].z.abs() < 1e-15);
            assert!((m.vertices()[e[0]].length() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quadrant_split_sphere() {
        let m = make_split_sphere(0.4, SplitKind::Quadrant).unwrap();
        assert_eq!(m.domain_count, 3);
        let walls = area_of(&m, |a| a == [2, 1]);
        assert!((walls - PI).abs() < 0.08 * PI, "wall area {walls}");
        let outer = area_of(&m, |a| a[0] == 0);
        assert!((outer - 4.0 * PI).abs() < 0.05 * 4.0 * PI);
        let q = area_of(&m, |a| a == [0, 2]);
        assert!((q - PI).abs() < 0.05 * PI);
        // the junction curves are the two meridian arcs on the sphere
        for e in m.junction_edges() {
            let (p, r) = (m.vertices()[e[0]], m.vertices()[e[1]]);
            assert!((p.length() - 1.0).abs() < 1e-12 && (r.length() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_sphere_area() {
        let m = make_sphere(0.4).unwrap();
        let outer = area_of(&m, |_| true);
        assert!((outer - 4.0 * PI).abs() < 0.05 * 4.0 * PI);
        assert_eq!(m.domain_count, 2);
    }

    #[test]
    fn two_cube_frame_is_conforming_at_every_study_size() {
        for h in [0.5, 0.25, 0.2, 0.15, 0.12, 0.1] {
            let m = make_two_cubes(h).unwrap();
            let s1 = m.build_domain_boundary(1).unwrap();
            assert!((s1.signed_volume() - 1.0).abs() < 1e-12);
            let s2 = m.build_domain_boundary(2).unwrap();
            assert!((s2.signed_volume() - 0.125).abs() < 1e-12);
            assert!(m.max_edge_length() < 2.5 * h, "h = {h}: {}", m.max_edge_length());
        }
    }
}
