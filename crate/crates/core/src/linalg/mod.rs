mod cvec;
mod sparse;

pub use cvec::CVec3;
pub use sparse::CsrMatrix;

use crate::C64;
use faer::Mat;

pub fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn dot_conj(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// y = A x for a dense complex matrix.
pub fn dense_matvec(a: &Mat<C64>, x: &[C64], y: &mut [C64]) {
    assert_eq!(a.ncols(), x.len());
    assert_eq!(a.nrows(), y.len());
    let xv = faer::ColRef::from_slice(x);
    let yv = faer::ColMut::from_slice_mut(y);
    faer::linalg::matmul::matmul(
        yv.as_mat_mut(),
        faer::Accum::Replace,
        a.as_ref(),
        xv.as_mat(),
        C64::new(1.0, 0.0),
        faer::Par::Seq,
    );
}

pub fn max_abs(a: &Mat<C64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

pub fn frobenius(a: &Mat<C64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}
