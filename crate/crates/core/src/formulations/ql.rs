use super::{BlockCalderon, Discretisation, FormulationError, Result};
use crate::krylov::{factorize_sparse, Operator, SparseLu};
use crate::linalg::CsrMatrix;
use crate::operators::{assemble_screened, KernelSpec, Screening};
use crate::quadrature::QuadratureOrders;
use crate::spaces::{gram_cross, MultiTraceSpace, TraceSpace};
use crate::C64;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QlOptions {
    pub delta: f64,
    pub cutoff_factor: f64,
    pub screening: Screening,
    /// Keep ½G inside the chain. Off only for the identity-term study.
    pub identity_term: bool,
    /// Global sign of the screened form; the solution does not depend on it.
    pub s_sign: f64,
    pub orders: QuadratureOrders,
}

impl QlOptions {
    pub fn new(delta: f64) -> Self {
        QlOptions {
            delta,
            cutoff_factor: 3.5,
            screening: Screening::Gaussian,
            identity_term: true,
            s_sign: 1.0,
            orders: QuadratureOrders::default(),
        }
    }

    pub fn kernel(&self) -> KernelSpec {
        KernelSpec::Screened { delta: self.delta, cutoff_factor: self.cutoff_factor, screening: self.screening }
    }
}

/// Per-domain LUs of a block-diagonal mixed Gram, applied to both
/// components.
pub(crate) struct BlockGramInverse {
    layout: MultiTraceSpace,
    lus: Vec<SparseLu>,
}

impl BlockGramInverse {
    pub(crate) fn new(tests: &MultiTraceSpace, trials: &MultiTraceSpace) -> Result<Self> {
        let mut lus = Vec::with_capacity(tests.domain_count());
        for (t, u) in tests.spaces.iter().zip(&trials.spaces) {
            lus.push(factorize_sparse(&gram_cross(t, u)?)?);
        }
        Ok(BlockGramInverse { layout: tests.clone(), lus })
    }

    pub(crate) fn solve_in_place(&self, x: &mut [C64]) {
        for (i, lu) in self.lus.iter().enumerate() {
            lu.solve_in_place(&mut x[self.layout.electric(i)]);
            lu.solve_in_place(&mut x[self.layout.magnetic(i)]);
        }
    }
}

/// Indices of the electric and magnetic entries of a multi-trace vector in
/// the order of the concatenated scalar spaces.
fn component_index(m: &MultiTraceSpace) -> (Vec<usize>, Vec<usize>) {
    let mut e = Vec::with_capacity(m.scalar_dim());
    let mut h = Vec::with_capacity(m.scalar_dim());
    for i in 0..m.domain_count() {
        e.extend(m.electric(i));
        h.extend(m.magnetic(i));
    }
    (e, h)
}

/// The κ-independent part Ĩ⁻¹ S̃ I⁻¹ of the quasi-local system. I is the
/// per-domain RWG × BC Gram, S̃ the screened form from the full BC
/// multi-trace space to the dual of the reduced BC space, Ĩ the reduced
/// BC × RWG Gram.
pub struct QlChain {
    pub opts: QlOptions,
    /// Scalar screened matrix: reduced BC rows, full BC columns.
    pub s_hat: CsrMatrix,
    i_inv: BlockGramInverse,
    it_inv: BlockGramInverse,
    full_idx: (Vec<usize>, Vec<usize>),
    red_idx: (Vec<usize>, Vec<usize>),
    reduced_dim: usize,
}

impl QlChain {
    pub fn new(disc: &Discretisation, opts: QlOptions) -> Result<Self> {
        if !(opts.s_sign == 1.0 || opts.s_sign == -1.0) {
            return Err(FormulationError::Parameter(format!("s_sign must be ±1, got {}", opts.s_sign)));
        }
        let tests: Vec<&TraceSpace> = disc.bc_reduced.spaces.iter().collect();
        let trials: Vec<&TraceSpace> = disc.bc.spaces.iter().collect();
        let s_hat = assemble_screened(&tests, &trials, opts.kernel(), opts.orders)?.scale(opts.s_sign);
        Ok(QlChain {
            opts,
            s_hat,
            i_inv: BlockGramInverse::new(&disc.rwg_fine, &disc.bc)?,
            it_inv: BlockGramInverse::new(&disc.bc_reduced, &disc.rwg_reduced_fine)?,
            full_idx: component_index(&disc.bc),
            red_idx: component_index(&disc.bc_reduced),
            reduced_dim: disc.bc_reduced.dim(),
        })
    }

    /// Ĩ⁻¹ S̃ I⁻¹ applied to a vector tested with the full RWG space.
    pub fn precondition(&self, mut v: Vec<C64>) -> Vec<C64> {
        self.i_inv.solve_in_place(&mut v);
        let mut out = self.apply_s(&v);
        self.it_inv.solve_in_place(&mut out);
        out
    }

    /// S̃ z: electric test rows meet magnetic trial columns with +Ŝ,
    /// magnetic test rows meet electric trial columns with −Ŝ.
    pub fn apply_s(&self, z: &[C64]) -> Vec<C64> {
        let (fe, fh) = &self.full_idx;
        let (re, rh) = &self.red_idx;
        let ze: Vec<C64> = fe.iter().map(|&k| z[k]).collect();
        let zh: Vec<C64> = fh.iter().map(|&k| z[k]).collect();
        let se = self.s_hat.mul(&zh);
        let sh = self.s_hat.mul(&ze);
        let mut out = vec![C64::new(0.0, 0.0); self.reduced_dim];
        for (k, &i) in re.iter().enumerate() {
            out[i] = se[k];
        }
        for (k, &i) in rh.iter().enumerate() {
            out[i] = -sh[k];
        }
        out
    }

    /// Mean number of stored entries per column of Ŝ.
    pub fn nnz_per_column(&self) -> f64 {
        self.s_hat.nnz() as f64 / self.s_hat.ncols.max(1) as f64
    }
}

/// M = Ĩ⁻¹ S̃ I⁻¹ (½G + A) R with right-hand side Ĩ⁻¹ S̃ I⁻¹ e_f.
pub struct QlSystem<'a> {
    pub calderon: &'a BlockCalderon,
    pub disc: &'a Discretisation,
    pub chain: Arc<QlChain>,
    /// Keep ½G inside the chain; initialised from the chain options.
    pub identity_term: bool,
    pub rhs: Vec<C64>,
}

impl<'a> QlSystem<'a> {
    pub fn new(calderon: &'a BlockCalderon, disc: &'a Discretisation, e_f: &[C64], opts: QlOptions) -> Result<Self> {
        Self::with_chain(calderon, disc, Arc::new(QlChain::new(disc, opts)?), e_f)
    }

    pub fn with_chain(calderon: &'a BlockCalderon, disc: &'a Discretisation, chain: Arc<QlChain>, e_f: &[C64]) -> Result<Self> {
        if calderon.dim() != disc.rwg.dim() || e_f.len() != disc.rwg.dim() || chain.reduced_dim != disc.unknowns() {
            return Err(FormulationError::Dimension("operator, spaces and e_f disagree".into()));
        }
        let rhs = chain.precondition(e_f.iter().map(|v| -super::RHS_SIGN * v).collect());
        Ok(QlSystem { calderon, disc, identity_term: chain.opts.identity_term, chain, rhs })
    }

    pub fn precondition(&self, v: Vec<C64>) -> Vec<C64> {
        self.chain.precondition(v)
    }

    pub fn nnz_per_column(&self) -> f64 {
        self.chain.nnz_per_column()
    }
}

impl Operator for QlSystem<'_> {
    fn dim(&self) -> usize {
        self.disc.unknowns()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let u = self.disc.expand(x);
        let mut au = vec![C64::new(0.0, 0.0); u.len()];
        self.calderon.apply(&u, &mut au, self.identity_term);
        y.copy_from_slice(&self.precondition(au));
    }
}
