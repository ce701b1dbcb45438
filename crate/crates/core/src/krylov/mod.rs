//! GMRES, sparse factorisations for the Gram solves and dense condition
//! numbers.

use crate::linalg::{norm2, CsrMatrix};
use crate::C64;
use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use std::time::{Duration, Instant};

#[derive(Debug, thiserror::Error)]
pub enum KrylovError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("Krylov basis of {vectors} vectors × {dim} would need {bytes} bytes, over the budget of {budget}")]
    Memory { vectors: usize, dim: usize, bytes: usize, budget: usize },
    #[error("matrix is singular: {0}")]
    Singular(String),
    #[error("dimension {0} exceeds the dense limit {1}")]
    TooLarge(usize, usize),
}

pub type Result<T> = std::result::Result<T, KrylovError>;

/// Linear operator given by its action y = M x.
pub trait Operator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[C64], y: &mut [C64]);
}

impl Operator for Mat<C64> {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        crate::linalg::dense_matvec(self, x, y);
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    pub tol: f64,
    pub maxit: usize,
    /// Upper bound on the bytes held by the Krylov basis.
    pub memory_budget: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions { tol: 2e-5, maxit: 2000, memory_budget: 2 << 30 }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub iterations: usize,
    /// Relative residual estimates, starting with 1 for the zero guess.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub tolerance: f64,
    /// ‖b − Mx‖/‖b‖ recomputed from the returned solution.
    pub final_residual: f64,
    pub wall_time: Duration,
}

fn givens(a: C64, b: C64) -> (f64, C64, C64) {
    let na = a.norm();
    let t = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if t == 0.0 {
        return (1.0, C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    }
    if na == 0.0 {
        return (0.0, b.conj() / b.norm(), C64::new(b.norm(), 0.0));
    }
    let phase = a / na;
    (na / t, phase * b.conj() / t, phase * t)
}

/// Unrestarted GMRES from the zero initial guess. Arnoldi uses modified
/// Gram–Schmidt with a second pass.
pub fn gmres(op: &dyn Operator, b: &[C64], opts: GmresOptions) -> Result<(Vec<C64>, SolveReport)> {
    let start = Instant::now();
    let n = op.dim();
    if b.len() != n {
        return Err(KrylovError::Parameter(format!("rhs length {} for operator of size {n}", b.len())));
    }
    if !(opts.tol > 0.0) {
        return Err(KrylovError::Parameter(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let vectors = opts.maxit.min(n) + 1;
    let bytes = vectors * n * std::mem::size_of::<C64>();
    if bytes > opts.memory_budget {
        return Err(KrylovError::Memory { vectors, dim: n, bytes, budget: opts.memory_budget });
    }
    let zero = C64::new(0.0, 0.0);
    let bnorm = norm2(b);
    let mut report = SolveReport {
        iterations: 0,
        residual_history: vec![1.0],
        converged: false,
        tolerance: opts.tol,
        final_residual: 1.0,
        wall_time: Duration::ZERO,
    };
    if bnorm == 0.0 {
        report.residual_history = vec![0.0];
        report.converged = true;
        report.final_residual = 0.0;
        report.wall_time = start.elapsed();
        return Ok((vec![zero; n], report));
    }

    let mut basis: Vec<Vec<C64>> = vec![b.iter().map(|v| v / bnorm).collect()];
    let mut hcols: Vec<Vec<C64>> = Vec::new();
    let mut rot: Vec<(f64, C64)> = Vec::new();
    let mut g = vec![C64::new(bnorm, 0.0)];
    let mut w = vec![zero; n];
    let limit = opts.maxit.min(n);
    for j in 0..limit {
        op.apply(&basis[j], &mut w);
        let wnorm0 = norm2(&w);
        let mut h = vec![zero; j + 2];
        for _pass in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let c: C64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                h[i] += c;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= c * vk;
                }
            }
        }
        let hn = norm2(&w);
        h[j + 1] = C64::new(hn, 0.0);
        for (i, &(c, s)) in rot.iter().enumerate() {
            let (x, y) = (h[i], h[i + 1]);
            h[i] = c * x + s * y;
            h[i + 1] = -s.conj() * x + c * y;
        }
        let (c, s, r) = givens(h[j], h[j + 1]);
        h[j] = r;
        h[j + 1] = zero;
        rot.push((c, s));
        let gj = g[j];
        g[j] = c * gj;
        g.push(-s.conj() * gj);
        hcols.push(h);
        let rel = g[j + 1].norm() / bnorm;
        report.residual_history.push(rel);
        report.iterations = j + 1;
        let breakdown = hn <= 1e-14 * wnorm0.max(f64::MIN_POSITIVE);
        if rel <= opts.tol || breakdown {
            report.converged = rel <= opts.tol || breakdown;
            break;
        }
        basis.push(w.iter().map(|v| v / hn).collect());
    }

    // back substitution on the triangular factor
    let k = report.iterations;
    let mut y = vec![zero; k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for l in i + 1..k {
            s -= hcols[l][i] * y[l];
        }
        y[i] = s / hcols[i][i];
    }
    let mut x = vec![zero; n];
    for (v, yi) in basis.iter().zip(&y) {
        for (xk, vk) in x.iter_mut().zip(v) {
            *xk += yi * vk;
        }
    }
    op.apply(&x, &mut w);
    report.final_residual = norm2(&w.iter().zip(b).map(|(a, c)| c - a).collect::<Vec<_>>()) / bnorm;
    report.wall_time = start.elapsed();
    Ok((x, report))
}

/// Sparse LU of a real square matrix, reused for complex right-hand sides
/// by solving real and imaginary parts together.
pub struct SparseLu {
    n: usize,
    lu: Option<faer::sparse::linalg::solvers::Lu<usize, f64>>,
}

impl SparseLu {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let Some(lu) = &self.lu else { return Vec::new() };
        let mut rhs = Mat::from_fn(self.n, 2, |i, j| if j == 0 { b[i].re } else { b[i].im });
        lu.solve_in_place(rhs.as_mut());
        (0..self.n).map(|i| C64::new(rhs[(i, 0)], rhs[(i, 1)])).collect()
    }

    pub fn solve_in_place(&self, b: &mut [C64]) {
        let x = self.solve(b);
        b.copy_from_slice(&x);
    }
}

pub fn factorize_sparse(m: &CsrMatrix) -> Result<SparseLu> {
    let n = m.nrows;
    if m.ncols != n {
        return Err(KrylovError::Parameter(format!("matrix is {}×{}, not square", n, m.ncols)));
    }
    if n == 0 {
        return Ok(SparseLu { n, lu: None });
    }
    let mut colnnz = vec![0usize; n];
    for i in 0..n {
        let mut any = false;
        for (j, v) in m.row(i) {
            if v != 0.0 {
                any = true;
                colnnz[j] += 1;
            }
        }
        if !any {
            return Err(KrylovError::Singular(format!("row {i} is empty")));
        }
    }
    if let Some(j) = colnnz.iter().position(|&c| c == 0) {
        return Err(KrylovError::Singular(format!("column {j} is empty")));
    }
    let trip: Vec<Triplet<usize, usize, f64>> = m.triplets().into_iter().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip)
        .map_err(|e| KrylovError::Parameter(format!("{e:?}")))?;
    let lu = a.sp_lu().map_err(|e| KrylovError::Singular(format!("{e:?}")))?;
    let f = SparseLu { n, lu: Some(lu) };
    // pivots are not exposed, so probe the factorisation with a round trip
    let probe: Vec<C64> = (0..n).map(|i| C64::new(1.0 + (i % 7) as f64 * 0.1, 0.0)).collect();
    let mut b = vec![C64::new(0.0, 0.0); n];
    m.matvec(&probe, &mut b);
    let x = f.solve(&b);
    let err = norm2(&x.iter().zip(&probe).map(|(a, b)| a - b).collect::<Vec<_>>()) / norm2(&probe);
    if !err.is_finite() || err > 1e-6 {
        return Err(KrylovError::Singular(format!("round-trip error {err:.3e} on a probe vector")));
    }
    Ok(f)
}

pub const DENSE_LIMIT: usize = 4000;

/// Materialise the operator column by column.
pub fn materialize(op: &dyn Operator) -> Result<Mat<C64>> {
    let n = op.dim();
    if n > DENSE_LIMIT {
        return Err(KrylovError::TooLarge(n, DENSE_LIMIT));
    }
    let mut m = Mat::zeros(n, n);
    let mut e = vec![C64::new(0.0, 0.0); n];
    let mut y = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        e[j] = C64::new(1.0, 0.0);
        op.apply(&e, &mut y);
        e[j] = C64::new(0.0, 0.0);
        for i in 0..n {
            m[(i, j)] = y[i];
        }
    }
    Ok(m)
}

/// σ_max/σ_min of a dense matrix; +∞ when numerically rank deficient.
pub fn dense_condition(m: &Mat<C64>) -> Result<f64> {
    let s = m.singular_values().map_err(|e| KrylovError::Singular(format!("{e:?}")))?;
    let max = s.iter().cloned().fold(0.0, f64::max);
    let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 || min <= max * f64::EPSILON * s.len() as f64 {
        return Ok(f64::INFINITY);
    }
    Ok(max / min)
}

pub fn condition_number(op: &dyn Operator) -> Result<f64> {
    dense_condition(&materialize(op)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Diag(Vec<C64>);
    impl Operator for Diag {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn apply(&self, x: &[C64], y: &mut [C64]) {
            for i in 0..x.len() {
                y[i] = self.0[i] * x[i];
            }
        }
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_converges_in_one_step() {
        let op = Diag(vec![c(1.0, 0.0); 20]);
        let b: Vec<C64> = (0..20).map(|i| c(i as f64, 1.0)).collect();
        let (x, r) = gmres(&op, &b, GmresOptions::default()).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
        assert!(norm2(&x.iter().zip(&b).map(|(a, b)| a - b).collect::<Vec<_>>()) < 1e-12);
    }

    #[test]
    fn two_eigenvalues_need_two_steps() {
        let op = Diag((0..30).map(|i| if i % 2 == 0 { c(2.0, 1.0) } else { c(-0.5, 0.0) }).collect());
        let b: Vec<C64> = (0..30).map(|i| c(1.0, i as f64 * 0.1)).collect();
        let (_, r) = gmres(&op, &b, GmresOptions::default()).unwrap();
        assert!(r.iterations <= 2 && r.converged);
    }

    #[test]
    fn tolerance_honoured_and_history_monotone() {
        let n = 60;
        let m = Mat::<C64>::from_fn(n, n, |i, j| {
            if i == j {
                c(3.0 + (i as f64).sin(), 0.2)
            } else {
                c(1.0 / (1.0 + (i as f64 - j as f64).powi(2)), 0.0)
            }
        });
        let b: Vec<C64> = (0..n).map(|i| c((i as f64).cos(), 0.5)).collect();
        let (_, r) = gmres(&m, &b, GmresOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.final_residual <= 2e-5 * 1.01, "{}", r.final_residual);
        assert!(r.residual_history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
        assert_eq!(r.residual_history.len(), r.iterations + 1);
    }

    #[test]
    fn non_convergence_is_reported() {
        let n = 50;
        let m = Mat::<C64>::from_fn(n, n, |i, j| if (i + 1) % n == j { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let mut b = vec![c(0.0, 0.0); n];
        b[0] = c(1.0, 0.0);
        let (_, r) = gmres(&m, &b, GmresOptions { maxit: 10, ..Default::default() }).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 10);
        let err = gmres(&m, &b, GmresOptions { memory_budget: 1000, ..Default::default() });
        assert!(matches!(err, Err(KrylovError::Memory { .. })));
    }

    #[test]
    fn sparse_lu_round_trip_and_singularity() {
        let id = factorize_sparse(&CsrMatrix::identity(5)).unwrap();
        let b: Vec<C64> = (0..5).map(|i| c(i as f64, -1.0)).collect();
        assert_eq!(id.solve(&b), b);

        let t = vec![(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0), (2, 2, 2.0), (1, 2, -1.0)];
        let m = CsrMatrix::from_triplets(3, 3, t);
        let f = factorize_sparse(&m).unwrap();
        let x = f.solve(&b[..3]);
        let mut y = vec![c(0.0, 0.0); 3];
        m.matvec(&x, &mut y);
        assert!(y.iter().zip(&b).all(|(a, b)| (a - b).norm() < 1e-12));

        let dup = CsrMatrix::from_triplets(3, 3, vec![(0, 0, 1.0), (0, 1, 2.0), (1, 0, 1.0), (1, 1, 2.0), (2, 2, 1.0)]);
        assert!(matches!(factorize_sparse(&dup), Err(KrylovError::Singular(_))));
    }

    #[test]
    fn condition_numbers() {
        let id = Mat::<C64>::identity(4, 4);
        assert!((condition_number(&id).unwrap() - 1.0).abs() < 1e-12);
        let d = Diag(vec![c(10.0, 0.0), c(1.0, 0.0)]);
        assert!((condition_number(&d).unwrap() - 10.0).abs() < 1e-12);
        let z = Diag(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(condition_number(&z).unwrap(), f64::INFINITY);
        let big = Diag(vec![c(1.0, 0.0); DENSE_LIMIT + 1]);
        assert!(matches!(condition_number(&big), Err(KrylovError::TooLarge(..))));
    }
}
