//! Dense complex-matrix helpers shared by every module.
//!
//! The one nontrivial primitive here is [`eigh`]: every norm, entropy and
//! PSD projection in the crate reduces to a Hermitian eigendecomposition,
//! so it is wrapped exactly once (backed by `faer`) and checked against
//! characteristic-polynomial roots at small dimension in the tests below.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// (x + x†)/2.
pub fn hermitize(x: &CMat) -> CMat {
    (x + x.adjoint()).map(|z| z * 0.5)
}

/// max_{ij} |x_ij - conj(x_ji)|.
pub fn herm_residual(x: &CMat) -> f64 {
    let mut r: f64 = 0.0;
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            r = r.max((x[(i, j)] - x[(j, i)].conj()).norm());
        }
    }
    r
}

pub fn max_abs_entry(x: &CMat) -> f64 {
    x.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

pub fn frobenius_norm(x: &CMat) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace_re(x: &CMat) -> f64 {
    (0..x.nrows()).map(|i| x[(i, i)].re).sum()
}

/// Real inner product tr(AB) for Hermitian A, B.
pub fn herm_inner(a: &CMat, b: &CMat) -> f64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc.re
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as columns. The input is symmetrized first so callers can
/// pass matrices that are Hermitian only up to roundoff.
pub fn eigh(x: &CMat) -> (Vec<f64>, CMat) {
    let n = x.nrows();
    assert_eq!(n, x.ncols(), "eigh needs a square matrix");
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let m = faer::Mat::<faer::c64>::from_fn(n, n, |i, j| {
        let z = (x[(i, j)] + x[(j, i)].conj()) * 0.5;
        faer::c64::new(z.re, z.im)
    });
    let e = m
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("hermitian eigendecomposition failed to converge");
    let s = e.S().column_vector();
    let u = e.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].re.partial_cmp(&s[b].re).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| s[i].re).collect();
    let vecs = CMat::from_fn(n, n, |i, j| {
        let z = u[(i, order[j])];
        C64::new(z.re, z.im)
    });
    (vals, vecs)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eig(x: &CMat) -> f64 {
    let (vals, _) = eigh(x);
    vals.first().copied().unwrap_or(0.0)
}

/// Projection onto the PSD cone: clip negative eigenvalues.
pub fn psd_clip(x: &CMat) -> CMat {
    let (vals, vecs) = eigh(x);
    rebuild(&vals.iter().map(|&v| v.max(0.0)).collect::<Vec<_>>(), &vecs)
}

/// V diag(vals) V†.
pub fn rebuild(vals: &[f64], vecs: &CMat) -> CMat {
    let n = vecs.nrows();
    let mut scaled = vecs.clone();
    for j in 0..n {
        for i in 0..n {
            scaled[(i, j)] *= vals[j];
        }
    }
    &scaled * vecs.adjoint()
}

/// Sum of absolute eigenvalues of a Hermitian matrix (its trace norm).
pub fn trace_norm_hermitian(x: &CMat) -> f64 {
    eigh(x).0.iter().map(|v| v.abs()).sum()
}

/// Orthonormal basis of the real space of d x d Hermitian matrices
/// under <A,B> = tr(AB): diagonal units, then symmetric and antisymmetric
/// off-diagonal pairs scaled by 1/sqrt(2).
pub fn hermitian_basis(d: usize) -> Vec<CMat> {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(d * d);
    for i in 0..d {
        let mut m = CMat::zeros(d, d);
        m[(i, i)] = C64::new(1.0, 0.0);
        basis.push(m);
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let mut s = CMat::zeros(d, d);
            s[(i, j)] = C64::new(inv_sqrt2, 0.0);
            s[(j, i)] = C64::new(inv_sqrt2, 0.0);
            basis.push(s);
            let mut a = CMat::zeros(d, d);
            a[(i, j)] = C64::new(0.0, inv_sqrt2);
            a[(j, i)] = C64::new(0.0, -inv_sqrt2);
            basis.push(a);
        }
    }
    basis
}

/// Eigendecomposition of a real symmetric matrix (used for Gram systems).
pub fn eigh_real(g: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = g.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let m = faer::Mat::<f64>::from_fn(n, n, |i, j| (g[(i, j)] + g[(j, i)]) * 0.5);
    let e = m
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("symmetric eigendecomposition failed to converge");
    let s = e.S().column_vector();
    let u = e.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].partial_cmp(&s[b]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| s[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |i, j| u[(i, order[j])]);
    (vals, vecs)
}

/// Moore-Penrose pseudoinverse of a real symmetric PSD matrix.
pub fn pinv_sym(g: &DMatrix<f64>, cutoff: f64) -> DMatrix<f64> {
    let (vals, vecs) = eigh_real(g);
    let vmax = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let thresh = cutoff * vmax.max(1.0);
    let n = g.nrows();
    let mut out = DMatrix::zeros(n, n);
    for k in 0..n {
        if vals[k].abs() > thresh {
            let inv = 1.0 / vals[k];
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += inv * vecs[(i, k)] * vecs[(j, k)];
                }
            }
        }
    }
    out
}
