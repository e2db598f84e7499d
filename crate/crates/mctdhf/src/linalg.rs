//! Small dense helpers on complex matrices shared by every module.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    let sym = (a + a.adjoint()) * c(0.5, 0.0);
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_fn(a: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = eigh(a);
    let d = CMatrix::from_diagonal(&CVector::from_iterator(vals.len(), vals.iter().map(|&x| c(f(x), 0.0))));
    &vecs * d * vecs.adjoint()
}

/// `exp(-i t A)` for Hermitian `A`.
pub fn expm_herm(a: &CMatrix, t: f64) -> CMatrix {
    let (vals, vecs) = eigh(a);
    propagator_from_eig(&vals, &vecs, t)
}

pub fn propagator_from_eig(vals: &[f64], vecs: &CMatrix, t: f64) -> CMatrix {
    let d = CVector::from_iterator(vals.len(), vals.iter().map(|&x| Complex64::from_polar(1.0, -x * t)));
    let mut scaled = vecs.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= d[j];
    }
    scaled * vecs.adjoint()
}

pub fn det(a: &CMatrix) -> Complex64 {
    match a.nrows() {
        0 => c(1.0, 0.0),
        1 => a[(0, 0)],
        2 => a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)],
        _ => a.clone().lu().determinant(),
    }
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn hermitian_defect(a: &CMatrix) -> f64 {
    frobenius(&(a - a.adjoint()))
}

pub fn unitary_defect(u: &CMatrix) -> f64 {
    frobenius(&(u.adjoint() * u - CMatrix::identity(u.ncols(), u.ncols())))
}

/// Nearest unitary in Frobenius norm, `U (U*U)^{-1/2}`.
pub fn polar_unitary(u: &CMatrix) -> CMatrix {
    let s = u.adjoint() * u;
    u * hermitian_fn(&s, |x| 1.0 / x.sqrt())
}

pub fn vec_norm(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}
