//! Discrete systems: the block Calderón operator, the classic single-trace
//! PMCHWT and the quasi-local PMCHWT.
//!
//! Sign conventions. With m = e × n and j = n × h on the boundary of Ω_i
//! (n outward), Cauchy data of a field solving Maxwell's equations in Ω_i
//! satisfy (−½G − A_i)u = 0. For the exterior domain the total field
//! satisfies (−½G − A_0)u_0 = −e_f, e_f being the ×-tested incident
//! traces. Both systems below are written as (½G + A)R w = e_f so that the
//! no-junction collapse of the quasi-local system holds entrywise.

mod ql;

pub use ql::{QlChain, QlOptions, QlSystem};

use crate::geometry::{refine_level, reduce_geometry, GeometryError, ReducedGeometry, RefinedLevel, SkeletonMesh};
use crate::krylov::{KrylovError, Operator};
use crate::linalg::CsrMatrix;
use crate::operators::{assemble_helmholtz, Material, OperatorError};
use crate::quadrature::QuadratureOrders;
use crate::spaces::{bc_space, build_r, expand_components, gram_multi, rwg_space, BoundaryRecipe, MultiTraceSpace, SpaceError};
use crate::C64;
use faer::Mat;

#[derive(Debug, thiserror::Error)]
pub enum FormulationError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Krylov(#[from] KrylovError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("{0}")]
    Parameter(String),
}

pub type Result<T> = std::result::Result<T, FormulationError>;

/// Sign of e_f on the right of (−½G − A)u = σ·e_f for the exterior total
/// field. The Mie comparison fixes it to −1.
pub const RHS_SIGN: f64 = -1.0;

/// All spaces of one mesh: RWG and BC, per domain and on the reduced
/// surfaces, plus the embedding R (in component layout).
pub struct Discretisation {
    pub mesh: SkeletonMesh,
    pub reduced: ReducedGeometry,
    pub refined: RefinedLevel,
    pub rwg: MultiTraceSpace,
    pub rwg_reduced: MultiTraceSpace,
    pub bc: MultiTraceSpace,
    pub bc_reduced: MultiTraceSpace,
    /// The RWG spaces rewritten on the refined level, for the mixed Grams.
    pub rwg_fine: MultiTraceSpace,
    pub rwg_reduced_fine: MultiTraceSpace,
    pub r: CsrMatrix,
}

impl Discretisation {
    pub fn new(mesh: SkeletonMesh) -> Result<Self> {
        let reduced = reduce_geometry(&mesh)?;
        Self::with_reduction(mesh, reduced)
    }

    pub fn with_reduction(mesh: SkeletonMesh, reduced: ReducedGeometry) -> Result<Self> {
        let refined = refine_level(&mesh.mesh);
        let boundaries = (0..mesh.domain_count).map(|i| mesh.build_domain_boundary(i)).collect::<std::result::Result<Vec<_>, _>>()?;
        let rwg = MultiTraceSpace::new(boundaries.iter().map(rwg_space).collect::<std::result::Result<_, _>>()?);
        let bc = MultiTraceSpace::new(
            boundaries.iter().map(|s| bc_space(s, &refined, BoundaryRecipe::ClosedOnly)).collect::<std::result::Result<_, _>>()?,
        );
        let rwg_reduced = MultiTraceSpace::new(reduced.surfaces.iter().map(rwg_space).collect::<std::result::Result<_, _>>()?);
        let bc_reduced = MultiTraceSpace::new(
            reduced
                .surfaces
                .iter()
                .map(|s| bc_space(s, &refined, BoundaryRecipe::Adapted))
                .collect::<std::result::Result<_, _>>()?,
        );
        let scalar = build_r(&mesh, &rwg, &rwg_reduced)?;
        let r = expand_components(&scalar, &rwg, &rwg_reduced);
        let rwg_fine = rwg.on_refinement(&refined);
        let rwg_reduced_fine = rwg_reduced.on_refinement(&refined);
        Ok(Discretisation { mesh, reduced, refined, rwg, rwg_reduced, bc, bc_reduced, rwg_fine, rwg_reduced_fine, r })
    }

    /// Number of unknowns of both single-trace systems.
    pub fn unknowns(&self) -> usize {
        self.rwg_reduced.dim()
    }

    /// Full multi-trace vector R w.
    pub fn expand(&self, w: &[C64]) -> Vec<C64> {
        self.r.mul(w)
    }
}

pub struct DomainBlock {
    pub kappa: C64,
    pub eta: C64,
    pub t: Mat<C64>,
    pub k: Mat<C64>,
}

/// Block-diagonal A = diag(A_i) with A_i = [[K, −ηT], [η⁻¹T, K]] on the
/// per-domain RWG spaces, and the plain ×-pairing Gram G.
pub struct BlockCalderon {
    pub spaces: MultiTraceSpace,
    pub blocks: Vec<DomainBlock>,
    pub gram: CsrMatrix,
}

impl BlockCalderon {
    /// κ_i = kappa0·√(ε_i μ_i); a complex `kappa0` gives the damped variants.
    pub fn assemble(spaces: &MultiTraceSpace, materials: &[Material], kappa0: C64, orders: QuadratureOrders) -> Result<Self> {
        if materials.len() != spaces.domain_count() {
            return Err(FormulationError::Dimension(format!(
                "{} materials for {} domains",
                materials.len(),
                spaces.domain_count()
            )));
        }
        let mut blocks = Vec::with_capacity(materials.len());
        for (s, m) in spaces.spaces.iter().zip(materials) {
            let kappa = kappa0 * (m.eps_r * m.mu_r).sqrt();
            let hb = assemble_helmholtz(s, kappa, orders)?;
            blocks.push(DomainBlock { kappa, eta: m.eta(), t: hb.t, k: hb.k });
        }
        let gram = gram_multi(spaces, spaces, false)?;
        Ok(BlockCalderon { spaces: spaces.clone(), blocks, gram })
    }

    pub fn dim(&self) -> usize {
        self.spaces.dim()
    }

    /// y = (½G + A)x, or y = A x without the identity part.
    pub fn apply(&self, x: &[C64], y: &mut [C64], identity: bool) {
        let zero = C64::new(0.0, 0.0);
        for (i, b) in self.blocks.iter().enumerate() {
            let (re, rm) = (self.spaces.electric(i), self.spaces.magnetic(i));
            let n = re.len();
            let u = Mat::from_fn(n, 2, |r, c| if c == 0 { x[re.start + r] } else { x[rm.start + r] });
            let mut tu = Mat::<C64>::zeros(n, 2);
            let mut ku = Mat::<C64>::zeros(n, 2);
            for (out, m) in [(&mut tu, &b.t), (&mut ku, &b.k)] {
                faer::linalg::matmul::matmul(out.as_mut(), faer::Accum::Replace, m.as_ref(), u.as_ref(), C64::new(1.0, 0.0), faer::Par::Seq);
            }
            let inv_eta = 1.0 / b.eta;
            for r in 0..n {
                y[re.start + r] = ku[(r, 0)] - b.eta * tu[(r, 1)];
                y[rm.start + r] = inv_eta * tu[(r, 0)] + ku[(r, 1)];
            }
        }
        if identity {
            let mut g = vec![zero; x.len()];
            self.gram.matvec(x, &mut g);
            for (yi, gi) in y.iter_mut().zip(&g) {
                *yi += 0.5 * gi;
            }
        }
    }

    /// (−½G − A)u − σ·e_f: zero for exact Cauchy data of the scattering
    /// problem. With `rhs = None` it is the plain Calderón defect.
    pub fn defect(&self, u: &[C64], rhs: Option<&[C64]>) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); u.len()];
        self.apply(u, &mut y, true);
        for v in y.iter_mut() {
            *v = -*v;
        }
        if let Some(e) = rhs {
            for (v, b) in y.iter_mut().zip(e) {
                *v -= RHS_SIGN * b;
            }
        }
        y
    }
}

/// Classic single-trace PMCHWT: Rᵀ A R w = Rᵀ e_f. The identity part is
/// left out since RᵀGR = 0.
pub struct ClassicSystem<'a> {
    pub calderon: &'a BlockCalderon,
    pub r: &'a CsrMatrix,
    rt: CsrMatrix,
    pub rhs: Vec<C64>,
}

impl<'a> ClassicSystem<'a> {
    pub fn new(calderon: &'a BlockCalderon, r: &'a CsrMatrix, e_f: &[C64]) -> Result<Self> {
        if r.nrows != calderon.dim() || e_f.len() != calderon.dim() {
            return Err(FormulationError::Dimension(format!(
                "R is {}×{}, A has size {}, e_f has length {}",
                r.nrows,
                r.ncols,
                calderon.dim(),
                e_f.len()
            )));
        }
        let rt = r.transpose();
        let rhs = rt.mul(&e_f.iter().map(|v| -RHS_SIGN * v).collect::<Vec<_>>());
        Ok(ClassicSystem { calderon, r, rt, rhs })
    }
}

impl Operator for ClassicSystem<'_> {
    fn dim(&self) -> usize {
        self.r.ncols
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let u = self.r.mul(x);
        let mut au = vec![C64::new(0.0, 0.0); u.len()];
        self.calderon.apply(&u, &mut au, false);
        self.rt.matvec(&au, y);
    }
}

/// Left preconditioning by a dense matrix: y = P·(M x).
pub struct DensePreconditioned<'a> {
    pub p: Mat<C64>,
    pub op: &'a dyn Operator,
}

impl Operator for DensePreconditioned<'_> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let mut t = vec![C64::new(0.0, 0.0); x.len()];
        self.op.apply(x, &mut t);
        crate::linalg::dense_matvec(&self.p, &t, y);
    }
}

/// Classic system at the damped wavenumbers −iκ_i, inverted densely; the
/// preconditioner used in the resonance study.
pub fn imaginary_wavenumber_inverse(disc: &Discretisation, materials: &[Material], kappa0: f64, orders: QuadratureOrders) -> Result<Mat<C64>> {
    let damped = BlockCalderon::assemble(&disc.rwg, materials, C64::new(0.0, -kappa0), orders)?;
    let zero_rhs = vec![C64::new(0.0, 0.0); damped.dim()];
    let sys = ClassicSystem::new(&damped, &disc.r, &zero_rhs)?;
    let m = crate::krylov::materialize(&sys)?;
    let n = m.nrows();
    let lu = m.partial_piv_lu();
    use faer::linalg::solvers::Solve;
    Ok(lu.solve(Mat::<C64>::identity(n, n)))
}

/// Complementary-trace residual of a single-trace solution w:
/// v_f = (−½G − A)R w − σ·e_f, tested with RWG, and its BC expansion
/// v^g = I⁻¹ v_f.
pub fn extinction_residual(calderon: &BlockCalderon, disc: &Discretisation, w: &[C64], e_f: &[C64]) -> Result<(Vec<C64>, Vec<C64>)> {
    if w.len() != disc.unknowns() || e_f.len() != calderon.dim() {
        return Err(FormulationError::Dimension("solution or e_f has the wrong length".into()));
    }
    let v_f = calderon.defect(&disc.expand(w), Some(e_f));
    let mut v_g = v_f.clone();
    ql::BlockGramInverse::new(&disc.rwg_fine, &disc.bc)?.solve_in_place(&mut v_g);
    Ok((v_f, v_g))
}

#[cfg(test)]
mod tests;
