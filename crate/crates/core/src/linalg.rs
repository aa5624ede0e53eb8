//! Dense complex linear algebra shared by every module.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Vectorization is column
//! stacking, which matches nalgebra's storage order: `vec(X)[j*n + i] = X[(i, j)]`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// The matrix unit `E_ij` (zero-based).
pub fn unit(n: usize, i: usize, j: usize) -> CMat {
    let mut e = CMat::zeros(n, n);
    e[(i, j)] = ONE;
    e
}

/// Matrix unit for a column-stacked index `p = j*n + i`.
pub fn unit_vec_index(n: usize, p: usize) -> CMat {
    unit(n, p % n, p / n)
}

/// Column-stacked index of `E_ij`.
#[inline]
pub fn vidx(n: usize, i: usize, j: usize) -> usize {
    j * n + i
}

/// Index of `E_ji` given the index of `E_ij`.
#[inline]
pub fn vidx_transpose(n: usize, p: usize) -> usize {
    (p % n) * n + p / n
}

pub fn vec(x: &CMat) -> CVec {
    CVec::from_column_slice(x.as_slice())
}

pub fn devec(v: &[C64], n: usize) -> CMat {
    CMat::from_column_slice(n, n, v)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn frob(m: &CMat) -> f64 {
    m.norm()
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn trace(m: &CMat) -> C64 {
    m.trace()
}

/// `‖m − m^H‖_F`.
pub fn hermiticity_residual(m: &CMat) -> f64 {
    frob(&(m - m.adjoint()))
}

/// `‖m + m^H‖_F`.
pub fn skewness_residual(m: &CMat) -> f64 {
    frob(&(m + m.adjoint()))
}

pub fn unitarity_residual(u: &CMat) -> f64 {
    frob(&(u.adjoint() * u - identity(u.nrows())))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
/// The input is symmetrized first so round-off asymmetry is ignored.
pub fn herm_eig(m: &CMat) -> (Vec<f64>, CMat) {
    let sym = (m + m.adjoint()) * c(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = CMat::zeros(m.nrows(), m.ncols());
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

pub fn herm_eigvals(m: &CMat) -> Vec<f64> {
    herm_eig(m).0
}

/// Smallest and largest-magnitude eigenvalue of a Hermitian matrix.
pub fn herm_extremes(m: &CMat) -> (f64, f64) {
    if m.nrows() == 0 {
        return (0.0, 0.0);
    }
    let vals = herm_eigvals(m);
    let min = *vals.last().unwrap();
    let max_abs = vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    (min, max_abs)
}

/// Orthonormal basis (as columns) of the null space of `a`.
///
/// Singular values at or below `rel_tol * max(σ_max, floor)` count as zero.
pub fn null_space(a: &CMat, rel_tol: f64, floor: f64) -> CMat {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return CMat::zeros(0, 0);
    }
    let padded = if rows < cols {
        let mut p = CMat::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let cut = rel_tol * smax.max(floor);
    let idx: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= cut)
        .collect();
    let mut out = CMat::zeros(cols, idx.len());
    for (dst, &k) in idx.iter().enumerate() {
        let row = vt.row(k).adjoint();
        out.set_column(dst, &row);
    }
    out
}

/// Orthonormal basis (columns) of the column space of `a`.
pub fn range_basis(a: &CMat, rel_tol: f64, floor: f64) -> CMat {
    let (rows, cols) = a.shape();
    if cols == 0 || rows == 0 {
        return CMat::zeros(rows, 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let cut = rel_tol * smax.max(floor);
    let idx: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > cut)
        .collect();
    let mut out = CMat::zeros(rows, idx.len());
    for (dst, &k) in idx.iter().enumerate() {
        out.set_column(dst, &u.column(k));
    }
    out
}

/// Minimum-norm least-squares solution of `a x = b`, with the residual norm.
pub fn lstsq(a: &CMat, b: &CVec) -> (CVec, f64) {
    if a.ncols() == 0 {
        return (CVec::zeros(0), b.norm());
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let eps = (smax * 1e-12).max(f64::MIN_POSITIVE);
    let x = svd
        .solve(b, eps)
        .unwrap_or_else(|_| CVec::zeros(a.ncols()));
    let r = (a * &x - b).norm();
    (x, r)
}

/// Same as [`lstsq`] over the reals.
pub fn lstsq_real(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    if a.ncols() == 0 {
        return (DVector::zeros(0), b.norm());
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let eps = (smax * 1e-12).max(f64::MIN_POSITIVE);
    let x = svd
        .solve(b, eps)
        .unwrap_or_else(|_| DVector::zeros(a.ncols()));
    let r = (a * &x - b).norm();
    (x, r)
}

/// Rank of a real matrix at relative cut `rel_tol`.
pub fn rank_real(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let svd = a.clone().svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    if smax == 0.0 {
        return 0;
    }
    svd.singular_values
        .iter()
        .filter(|&&s| s > rel_tol * smax)
        .count()
}

/// Orthonormal basis (columns) of the null space of a real matrix.
pub fn null_space_real(a: &DMatrix<f64>, rel_tol: f64, floor: f64) -> DMatrix<f64> {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let cut = rel_tol * smax.max(floor);
    let idx: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= cut)
        .collect();
    let mut out = DMatrix::zeros(cols, idx.len());
    for (dst, &k) in idx.iter().enumerate() {
        out.set_column(dst, &vt.row(k).transpose());
    }
    out
}

/// Flatten a complex matrix into real coordinates `[re..., im...]`.
pub fn realify(m: &CMat) -> DVector<f64> {
    let n = m.len();
    let mut out = DVector::zeros(2 * n);
    for (k, z) in m.iter().enumerate() {
        out[k] = z.re;
        out[n + k] = z.im;
    }
    out
}

/// Orthogonal projector onto the complex span of the given columns.
pub fn span_projector(cols: &CMat, rel_tol: f64) -> CMat {
    let q = range_basis(cols, rel_tol, 0.0);
    &q * q.adjoint()
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let g = random_complex(rng, n, n);
    (&g + g.adjoint()) * c(0.5)
}

pub fn random_skew<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    random_hermitian(rng, n) * I
}

/// Haar-distributed unitary via QR of a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let g = random_complex(rng, n, n);
    let qr = g.qr();
    let (q, r) = qr.unpack();
    let mut q = q;
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        let col = q.column(k) * phase;
        q.set_column(k, &col);
    }
    q
}

/// `‖a − b‖_F / max(‖b‖_F, floor)`.
pub fn rel_diff(a: &CMat, b: &CMat, floor: f64) -> f64 {
    frob(&(a - b)) / frob(b).max(floor)
}
