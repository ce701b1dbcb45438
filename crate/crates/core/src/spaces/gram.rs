use super::{MultiTraceSpace, Result, SpaceError, TraceSpace};
use crate::linalg::CsrMatrix;
use std::sync::Arc;

/// ∫_τ (n × ψ_k)·ψ_l for the three shape functions of a triangle in its
/// reference vertex order, with n the reference normal times `o`. With the
/// centroid as origin the integrand is n·(w_k × w_l)/(4|τ|) and the value
/// reduces to ±1/6 for cyclic/anticyclic pairs.
pub fn local_gram(o: f64) -> [[f64; 3]; 3] {
    let s = o / 6.0;
    [[0.0, s, -s], [-s, 0.0, s], [s, -s, 0.0]]
}

/// Twisted pairing ∫ (n × t_a)·u_b on a single surface.
pub fn gram_cross(test: &TraceSpace, trial: &TraceSpace) -> Result<CsrMatrix> {
    if !Arc::ptr_eq(&test.level, &trial.level) {
        return Err(SpaceError::SurfaceMismatch("test and trial terms live on different levels".into()));
    }
    let tg = test.by_triangle();
    let ug = trial.by_triangle();
    let mut triplets = Vec::new();
    for (tri, tl) in &tg {
        let Some(ul) = ug.get(tri) else { continue };
        let o = test.orientation[tri];
        if trial.orientation.get(tri) != Some(&o) {
            return Err(SpaceError::SurfaceMismatch(format!("triangle {tri} oriented differently")));
        }
        let m = local_gram(o);
        for a in tl {
            for b in ul {
                let mut v = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        v += a.coeffs[k] * m[k][l] * b.coeffs[l];
                    }
                }
                triplets.push((a.dof, b.dof, v));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(test.dim(), trial.dim(), triplets))
}

/// Block-diagonal pairing over domains. Plain: electric-electric and
/// magnetic-magnetic; swapped: electric test against magnetic trial and
/// vice versa.
pub fn gram_multi(test: &MultiTraceSpace, trial: &MultiTraceSpace, swapped: bool) -> Result<CsrMatrix> {
    if test.domain_count() != trial.domain_count() {
        return Err(SpaceError::SurfaceMismatch("different domain counts".into()));
    }
    let mut triplets = Vec::new();
    for i in 0..test.domain_count() {
        let g = gram_cross(&test.spaces[i], &trial.spaces[i])?;
        let (re, rm) = (test.electric(i).start, test.magnetic(i).start);
        let (ce, cm) = if swapped {
            (trial.magnetic(i).start, trial.electric(i).start)
        } else {
            (trial.electric(i).start, trial.magnetic(i).start)
        };
        for (r, c, v) in g.triplets() {
            triplets.push((re + r, ce + c, v));
            triplets.push((rm + r, cm + c, v));
        }
    }
    Ok(CsrMatrix::from_triplets(test.dim(), trial.dim(), triplets))
}
