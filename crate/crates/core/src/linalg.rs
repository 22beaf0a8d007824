//! Dense complex linear algebra helpers shared by every module.
//!
//! All rank and membership decisions go through [`Tolerances`]: a singular
//! value counts as zero when it is below `rank * sigma_max`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Singular values below this are zero regardless of scale.
pub const ABS_ZERO: f64 = 1e-13;

/// Numerical tolerances for rank decisions and identity checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative singular-value threshold for rank, span and membership tests.
    pub rank: f64,
    /// Absolute threshold for identities that hold exactly in exact arithmetic.
    pub identity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: 1e-9,
            identity: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn with_rank(rank: f64) -> Self {
        Tolerances {
            rank,
            ..Tolerances::default()
        }
    }
}

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Singular values sorted in decreasing order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Operator norm (largest singular value); zero for empty matrices.
pub fn op_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Frobenius norm of the difference, used for identity checks.
pub fn diff_norm(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in diff_norm");
    (a - b).norm()
}

fn threshold(sigma_max: f64, tol: f64) -> f64 {
    (tol * sigma_max).max(ABS_ZERO)
}

pub fn rank(m: &CMat, tol: f64) -> usize {
    let sv = singular_values(m);
    match sv.first() {
        None => 0,
        Some(&smax) => {
            let thr = threshold(smax, tol);
            sv.iter().filter(|&&s| s > thr).count()
        }
    }
}

/// SVD with singular triplets sorted by decreasing singular value.
/// Returns (U, sigma, V) with full V when `full_v` is requested.
fn sorted_svd(m: &CMat, full_v: bool) -> (CMat, Vec<f64>, CMat) {
    let (rows, cols) = m.shape();
    let work = if full_v && rows < cols {
        let mut p = zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = work.svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let sv = svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let k = order.len();
    let mut us = zeros(u.nrows(), k);
    let mut vs = zeros(vt.ncols(), k);
    let mut s = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        us.set_column(dst, &u.column(src));
        vs.set_column(dst, &vt.row(src).adjoint());
        s.push(sv[src]);
    }
    if full_v && rows < cols {
        us = us.rows(0, rows).into_owned();
    }
    (us, s, vs)
}

/// Orthonormal basis (columns) of the column space.
pub fn orth(m: &CMat, tol: f64) -> CMat {
    if m.nrows() == 0 || m.ncols() == 0 {
        return zeros(m.nrows(), 0);
    }
    let (u, s, _) = sorted_svd(m, false);
    let thr = threshold(s[0], tol);
    let r = s.iter().filter(|&&x| x > thr).count();
    u.columns(0, r).into_owned()
}

/// Orthonormal basis (columns) of the null space.
pub fn null_space(m: &CMat, tol: f64) -> CMat {
    let n = m.ncols();
    if n == 0 {
        return zeros(0, 0);
    }
    if m.nrows() == 0 {
        return identity(n);
    }
    let (_, s, v) = sorted_svd(m, true);
    let thr = threshold(s.first().copied().unwrap_or(0.0), tol);
    let r = s.iter().filter(|&&x| x > thr).count();
    v.columns(r, n - r).into_owned()
}

/// Horizontal concatenation of matrices with equal row counts.
pub fn hstack(rows: usize, parts: &[&CMat]) -> CMat {
    let cols: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut at = 0;
    for p in parts {
        assert_eq!(p.nrows(), rows, "hstack row mismatch");
        out.view_mut((0, at), (rows, p.ncols())).copy_from(*p);
        at += p.ncols();
    }
    out
}

/// Vertical concatenation of matrices with equal column counts.
pub fn vstack(cols: usize, parts: &[&CMat]) -> CMat {
    let rows: usize = parts.iter().map(|p| p.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut at = 0;
    for p in parts {
        assert_eq!(p.ncols(), cols, "vstack column mismatch");
        out.view_mut((at, 0), (p.nrows(), cols)).copy_from(*p);
        at += p.nrows();
    }
    out
}

/// Distance of `v` from the span of the orthonormal columns of `q`.
pub fn residual(q: &CMat, v: &CVec) -> f64 {
    if q.ncols() == 0 {
        return v.norm();
    }
    let proj = q * (q.adjoint() * v);
    (v - proj).norm()
}

/// Whether `v` lies in the span of orthonormal `q`, relative to the scale of `v`.
pub fn in_span(q: &CMat, v: &CVec, tol: f64) -> bool {
    residual(q, v) <= tol * v.norm().max(1.0)
}

/// Whether every column of `m` lies in the span of orthonormal `q`.
pub fn columns_in_span(q: &CMat, m: &CMat, tol: f64) -> bool {
    (0..m.ncols()).all(|j| in_span(q, &m.column(j).into_owned(), tol))
}

/// Least-squares solution of `a x = b`.
pub fn lstsq(a: &CMat, b: &CMat, tol: f64) -> CMat {
    if a.ncols() == 0 {
        return zeros(0, b.ncols());
    }
    if a.nrows() == 0 {
        return zeros(a.ncols(), b.ncols());
    }
    let (u, s, v) = sorted_svd(a, false);
    let thr = threshold(s[0], tol);
    let mut out = zeros(a.ncols(), b.ncols());
    let utb = u.adjoint() * b;
    for (i, &si) in s.iter().enumerate() {
        if si > thr {
            let row = utb.row(i) / re(si);
            out += v.column(i) * row;
        }
    }
    out
}

/// Eigen-decomposition of a Hermitian matrix (hermitized first), eigenvalues ascending.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let h = (m + m.adjoint()) * re(0.5);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut vals = Vec::with_capacity(n);
    let mut vecs = zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vals.push(eig.eigenvalues[src]);
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Orthogonal projection onto the range of a positive semidefinite matrix.
pub fn range_projection(h: &CMat, tol: f64) -> CMat {
    let n = h.nrows();
    let (vals, vecs) = hermitian_eigen(h);
    let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let thr = threshold(top, tol);
    let mut p = zeros(n, n);
    for (i, &l) in vals.iter().enumerate() {
        if l > thr {
            let v = vecs.column(i);
            p += v * v.adjoint();
        }
    }
    p
}

/// Lower Cholesky factor `L` with `g = L L^H`, or `None` when `g` is not positive definite.
pub fn cholesky_factor(g: &CMat) -> Option<CMat> {
    if g.nrows() == 0 {
        return Some(zeros(0, 0));
    }
    let h = (g + g.adjoint()) * re(0.5);
    h.cholesky().map(|ch| ch.l())
}

/// Column-major flattening of a matrix.
pub fn vec_of(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

/// Inverse of [`vec_of`].
pub fn unvec(v: &[C64], rows: usize, cols: usize) -> CMat {
    CMat::from_column_slice(rows, cols, v)
}

/// Kronecker product of coordinate vectors, index `i * b.len() + j`.
pub fn kron(a: &CVec, b: &CVec) -> CVec {
    let mut out = CVec::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i * b.len() + j] = a[i] * b[j];
        }
    }
    out
}

/// An orthonormal basis of the span of orthonormal `q`, canonicalised by
/// Gram-Schmidt on the projections of the standard basis vectors in order.
pub fn canonical_basis(q: &CMat, tol: f64) -> CMat {
    let d = q.nrows();
    let k = q.ncols();
    let mut cols: Vec<CVec> = Vec::with_capacity(k);
    for i in 0..d {
        if cols.len() == k {
            break;
        }
        let mut v = q * q.row(i).adjoint();
        for c in &cols {
            let p = c.dotc(&v);
            v -= c * p;
        }
        let n = v.norm();
        if n > tol.max(1e-6) {
            cols.push(v / re(n));
        }
    }
    if cols.len() < k {
        return q.clone();
    }
    let refs: Vec<CMat> = cols
        .iter()
        .map(|c| CMat::from_column_slice(d, 1, c.as_slice()))
        .collect();
    let r: Vec<&CMat> = refs.iter().collect();
    hstack(d, &r)
}

/// Uniform sample with real and imaginary parts in `[-1, 1]`.
pub fn random_cvec<R: rand::Rng>(rng: &mut R, d: usize) -> CVec {
    CVec::from_fn(d, |_, _| c(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)))
}

/// Whether two orthonormal bases span the same subspace.
pub fn same_span(a: &CMat, b: &CMat, tol: f64) -> bool {
    a.ncols() == b.ncols() && columns_in_span(a, b, tol) && columns_in_span(b, a, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_null_space_of_wide_matrix() {
        let m = CMat::from_row_slice(1, 3, &[re(1.0), re(1.0), re(0.0)]);
        assert_eq!(rank(&m, 1e-9), 1);
        let n = null_space(&m, 1e-9);
        assert_eq!(n.ncols(), 2);
        assert!((m * n).norm() < 1e-12);
    }

    #[test]
    fn orth_drops_dependent_columns() {
        let m = CMat::from_row_slice(2, 3, &[re(1.0), re(2.0), re(0.0), re(0.0), re(0.0), re(1.0)]);
        let q = orth(&m, 1e-9);
        assert_eq!(q.ncols(), 2);
        assert!((q.adjoint() * &q - identity(2)).norm() < 1e-12);
    }

    #[test]
    fn empty_shapes_are_harmless() {
        let e = zeros(0, 0);
        assert_eq!(op_norm(&e), 0.0);
        assert_eq!(rank(&e, 1e-9), 0);
        assert_eq!(orth(&zeros(3, 0), 1e-9).ncols(), 0);
        assert_eq!(null_space(&zeros(0, 2), 1e-9).ncols(), 2);
    }

    #[test]
    fn range_projection_is_idempotent() {
        let h = CMat::from_row_slice(2, 2, &[re(2.0), re(2.0), re(2.0), re(2.0)]);
        let p = range_projection(&h, 1e-9);
        assert!((&p * &p - &p).norm() < 1e-12);
        assert!((p.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lstsq_recovers_solution() {
        let a = CMat::from_row_slice(3, 2, &[re(1.0), re(0.0), re(0.0), c(0.0, 1.0), re(1.0), re(1.0)]);
        let x = CMat::from_row_slice(2, 1, &[re(2.0), re(-1.0)]);
        let b = &a * &x;
        assert!((lstsq(&a, &b, 1e-12) - x).norm() < 1e-12);
    }

    #[test]
    fn canonical_basis_prefers_coordinate_axes() {
        let q = orth(&identity(2), 1e-9);
        let b = canonical_basis(&q, 1e-9);
        assert!((b - identity(2)).norm() < 1e-12);
    }
}
