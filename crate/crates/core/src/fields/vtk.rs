use super::{expansion_at, Result};
use crate::geometry::LevelMesh;
use crate::linalg::CVec3;
use crate::spaces::TraceSpace;
use crate::{Point, C64};
use std::io::Write;

/// Point cloud with complex vector data, split into real and imaginary
/// parts plus the magnitude.
pub fn write_vtk_points(out: &mut impl Write, title: &str, points: &[Point], fields: &[(&str, &[CVec3])]) -> Result<()> {
    writeln!(out, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET POLYDATA")?;
    writeln!(out, "POINTS {} double", points.len())?;
    for p in points {
        writeln!(out, "{:.12e} {:.12e} {:.12e}", p.x, p.y, p.z)?;
    }
    writeln!(out, "VERTICES {} {}", points.len(), 2 * points.len())?;
    for k in 0..points.len() {
        writeln!(out, "1 {k}")?;
    }
    writeln!(out, "POINT_DATA {}", points.len())?;
    for (name, v) in fields {
        for (suffix, part) in [("re", (|c: C64| c.re) as fn(C64) -> f64), ("im", |c: C64| c.im)] {
            writeln!(out, "VECTORS {name}_{suffix} double")?;
            for f in v.iter() {
                let a = f.to_array().map(part);
                writeln!(out, "{:.12e} {:.12e} {:.12e}", a[0], a[1], a[2])?;
            }
        }
        writeln!(out, "SCALARS {name}_abs double 1\nLOOKUP_TABLE default")?;
        for f in v.iter() {
            writeln!(out, "{:.12e}", f.norm())?;
        }
    }
    Ok(())
}

/// Triangles of a level mesh with per-cell scalars.
pub fn write_vtk_surface(out: &mut impl Write, title: &str, level: &LevelMesh, tris: &[usize], cells: &[(&str, &[f64])]) -> Result<()> {
    writeln!(out, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET POLYDATA")?;
    writeln!(out, "POINTS {} double", level.vertices.len())?;
    for p in &level.vertices {
        writeln!(out, "{:.12e} {:.12e} {:.12e}", p.x, p.y, p.z)?;
    }
    writeln!(out, "POLYGONS {} {}", tris.len(), 4 * tris.len())?;
    for &t in tris {
        let [a, b, c] = level.triangles[t];
        writeln!(out, "3 {a} {b} {c}")?;
    }
    writeln!(out, "CELL_DATA {}", tris.len())?;
    for (name, v) in cells {
        writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default")?;
        for x in v.iter() {
            writeln!(out, "{x:.12e}")?;
        }
    }
    Ok(())
}

/// |Σ c_a f_a| at the centroid of every triangle in the support, in the
/// order of `by_triangle`.
pub fn trace_magnitudes(space: &TraceSpace, coeffs: &[C64]) -> (Vec<usize>, Vec<f64>) {
    space
        .by_triangle()
        .into_iter()
        .map(|(t, terms)| (t, expansion_at(space, t, &terms, coeffs, space.level.centroid(t)).norm()))
        .unzip()
}
