//! Post-processing: Mie oracle, far field and RCS, Stratton–Chu near
//! fields, energy norms, mesh-to-mesh transfer and VTK output.

mod energy;
mod mie;
mod radiation;
mod transfer;
mod vtk;

pub use energy::{energy_norm, EnergyForm};
pub use mie::{default_truncation, mie_rcs, MieSeries};
pub use radiation::{direction, e_plane_directions, far_field, incident_field, stratton_chu, FarFieldPattern, NearFieldSample, SurfaceCurrents};
pub use transfer::{sample_trace, transfer_rwg};
pub use vtk::{trace_magnitudes, write_vtk_points, write_vtk_surface};

use crate::linalg::CVec3;
use crate::spaces::TraceSpace;
use crate::{Point, C64};

#[derive(Debug, thiserror::Error)]
pub enum FieldError {
    #[error(transparent)]
    Operator(#[from] crate::operators::OperatorError),
    #[error("series: {0}")]
    Series(String),
    #[error("energy form is indefinite: uᴴEu = {0:e}")]
    Indefinite(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("{0}")]
    Parameter(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FieldError>;

/// Σ c_a f_a on one level triangle, given the local terms of that triangle.
fn expansion_at(space: &TraceSpace, tri: usize, terms: &[crate::spaces::LocalTerm], coeffs: &[C64], x: Point) -> CVec3 {
    let level = &space.level;
    let p = level.triangles[tri].map(|i| level.vertices[i]);
    let two_a = 2.0 * level.area(tri);
    let mut out = CVec3::ZERO;
    for t in terms {
        let f = (0..3).map(|k| (x - p[k]) * t.coeffs[k]).sum::<Point>() / two_a;
        out += CVec3::from_real(f) * coeffs[t.dof];
    }
    out
}

/// Surface divergence of Σ c_a f_a on one level triangle.
fn divergence_on(space: &TraceSpace, tri: usize, terms: &[crate::spaces::LocalTerm], coeffs: &[C64]) -> C64 {
    let a = space.level.area(tri);
    terms.iter().map(|t| coeffs[t.dof] * (t.coeffs.iter().sum::<f64>() / a)).sum()
}
