//! Finite-dimensional C*-algebras given by structure constants.
//!
//! The algebra is represented faithfully by left multiplication on itself,
//! made a Hilbert space through the trace form `phi(a) = tr(L_a)` and the
//! scalar product `<a, b> = phi(b* a)`. A positive definite Gram matrix of
//! that form is exactly what separates C*-algebras from other *-algebras.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    self, c, cholesky_factor, hermitian_eigen, in_span, lstsq, op_norm, orth, range_projection, re, zeros, CMat, CVec,
    Tolerances, C64,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FdError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("not associative: (e{i} e{j}) e{k} != e{i} (e{j} e{k}) (deviation {deviation:.3e})")]
    NotAssociative {
        i: usize,
        j: usize,
        k: usize,
        deviation: f64,
    },
    #[error("bad involution ({law}) at basis ({i},{j}), deviation {deviation:.3e}")]
    BadInvolution {
        law: &'static str,
        i: usize,
        j: usize,
        deviation: f64,
    },
    #[error("no unit: best candidate leaves residual {residual:.3e}")]
    NoUnit { residual: f64 },
    #[error("not a C*-algebra: trace form has eigenvalue {min_eigenvalue:.3e} on {witness:?}")]
    NotCStar { min_eigenvalue: f64, witness: Vec<C64> },
}

/// A finite-dimensional C*-algebra with its trace-form Hilbert structure.
#[derive(Clone, Debug)]
pub struct FdCStar {
    dim: usize,
    /// `lmul[i]` is left multiplication by `e_i`; column `j` holds `e_i e_j`.
    lmul: Vec<CMat>,
    /// `a* = star * conj(a)`.
    star: CMat,
    unit: CVec,
    trace: CVec,
    gram: CMat,
    /// Lower factor `L` of `gram = L L^H`; ONB coordinates are `L^H a`.
    chol: CMat,
    chol_inv_h: CMat,
    tol: Tolerances,
}

impl FdCStar {
    /// Builds and validates an algebra from the flat tensor `mul[(i*d + j)*d + k]`
    /// (coordinate `k` of `e_i e_j`) and the involution matrix.
    pub fn build(dim: usize, mul: &[C64], star: CMat, tol: Tolerances) -> Result<Self, FdError> {
        if mul.len() != dim * dim * dim {
            return Err(FdError::DimensionMismatch(format!(
                "mul has {} entries, expected {}",
                mul.len(),
                dim * dim * dim
            )));
        }
        if star.shape() != (dim, dim) {
            return Err(FdError::DimensionMismatch(format!(
                "star is {:?}, expected ({dim}, {dim})",
                star.shape()
            )));
        }
        let lmul: Vec<CMat> = (0..dim)
            .map(|i| CMat::from_fn(dim, dim, |k, j| mul[(i * dim + j) * dim + k]))
            .collect();
        let mut alg = FdCStar {
            dim,
            lmul,
            star,
            unit: CVec::zeros(dim),
            trace: CVec::zeros(dim),
            gram: zeros(dim, dim),
            chol: zeros(dim, dim),
            chol_inv_h: zeros(dim, dim),
            tol,
        };
        alg.check_associative()?;
        alg.check_involution()?;
        alg.unit = alg.solve_unit()?;
        alg.trace = CVec::from_fn(dim, |i, _| alg.lmul[i].trace());
        alg.gram = CMat::from_fn(dim, dim, |i, j| {
            let ei_star = alg.star.column(i).into_owned();
            let p = alg.mul(&ei_star, &basis(dim, j));
            alg.trace.dot(&p)
        });
        alg.certify_gram()?;
        Ok(alg)
    }

    /// Builds from a closure giving the coordinates of `e_i e_j`.
    pub fn from_fn(
        dim: usize,
        product: impl Fn(usize, usize) -> CVec,
        star: CMat,
        tol: Tolerances,
    ) -> Result<Self, FdError> {
        let mut mul = vec![C64::default(); dim * dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let p = product(i, j);
                for k in 0..dim {
                    mul[(i * dim + j) * dim + k] = p[k];
                }
            }
        }
        FdCStar::build(dim, &mul, star, tol)
    }

    /// `C^n` with pointwise operations.
    pub fn commutative(n: usize) -> Self {
        FdCStar::from_fn(
            n,
            |i, j| {
                let mut v = CVec::zeros(n);
                if i == j {
                    v[i] = re(1.0);
                }
                v
            },
            linalg::identity(n),
            Tolerances::default(),
        )
        .expect("C^n is a C*-algebra")
    }

    /// `M_n(C)` in the matrix-unit basis `E_{ab}` at index `a*n + b`.
    pub fn matrix_algebra(n: usize) -> Self {
        let d = n * n;
        let star = CMat::from_fn(d, d, |k, i| {
            let (a, b) = (i / n, i % n);
            if k == b * n + a {
                re(1.0)
            } else {
                re(0.0)
            }
        });
        FdCStar::from_fn(
            d,
            |i, j| {
                let (a, b) = (i / n, i % n);
                let (c2, d2) = (j / n, j % n);
                let mut v = CVec::zeros(d);
                if b == c2 {
                    v[a * n + d2] = re(1.0);
                }
                v
            },
            star,
            Tolerances::default(),
        )
        .expect("M_n is a C*-algebra")
    }

    /// The zero algebra.
    pub fn zero() -> Self {
        FdCStar::build(0, &[], zeros(0, 0), Tolerances::default()).expect("zero algebra")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tol(&self) -> Tolerances {
        self.tol
    }

    pub fn unit(&self) -> &CVec {
        &self.unit
    }

    pub fn gram(&self) -> &CMat {
        &self.gram
    }

    pub fn star_matrix(&self) -> &CMat {
        &self.star
    }

    /// Flat structure tensor in the file layout.
    pub fn mul_tensor(&self) -> Vec<C64> {
        let d = self.dim;
        let mut out = vec![C64::default(); d * d * d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    out[(i * d + j) * d + k] = self.lmul[i][(k, j)];
                }
            }
        }
        out
    }

    pub fn basis(&self, i: usize) -> CVec {
        basis(self.dim, i)
    }

    /// Matrix of left multiplication by `a` in the structure basis.
    pub fn left_matrix(&self, a: &CVec) -> CMat {
        let mut m = zeros(self.dim, self.dim);
        for (i, l) in self.lmul.iter().enumerate() {
            if a[i] != C64::default() {
                m += l * a[i];
            }
        }
        m
    }

    pub fn mul(&self, a: &CVec, b: &CVec) -> CVec {
        self.left_matrix(a) * b
    }

    pub fn star(&self, a: &CVec) -> CVec {
        &self.star * a.conjugate()
    }

    pub fn is_commutative(&self) -> bool {
        (0..self.dim).all(|i| {
            (0..i).all(|j| {
                let d = (self.lmul[i].column(j) - self.lmul[j].column(i)).norm();
                d <= self.tol.identity
            })
        })
    }

    /// The trace form `phi(a) = tr(L_a)`.
    pub fn trace_form(&self, a: &CVec) -> C64 {
        self.trace.dot(a)
    }

    /// `<a, b> = phi(b* a)`, linear in `a`.
    pub fn inner(&self, a: &CVec, b: &CVec) -> C64 {
        (b.adjoint() * &self.gram * a)[(0, 0)]
    }

    /// Orthonormal coordinates `L^H a` of `a`.
    pub fn to_onb(&self, a: &CVec) -> CVec {
        self.chol.adjoint() * a
    }

    pub fn from_onb(&self, y: &CVec) -> CVec {
        &self.chol_inv_h * y
    }

    /// Left multiplication by `a` as a matrix in an orthonormal basis:
    /// the faithful representation used for norms and spectra.
    pub fn onb_matrix(&self, a: &CVec) -> CMat {
        self.chol.adjoint() * self.left_matrix(a) * &self.chol_inv_h
    }

    /// Element whose left multiplication is `m` (given in orthonormal coordinates).
    pub fn element_of_onb_matrix(&self, m: &CMat) -> CVec {
        &self.chol_inv_h * m * self.chol.adjoint() * &self.unit
    }

    /// The C*-norm.
    pub fn norm(&self, a: &CVec) -> f64 {
        op_norm(&self.onb_matrix(a))
    }

    pub fn is_self_adjoint(&self, a: &CVec) -> bool {
        (self.star(a) - a).norm() <= self.tol.identity * a.norm().max(1.0)
    }

    /// Self-adjoint with spectrum in `[-tol, inf)`.
    pub fn is_positive(&self, a: &CVec) -> bool {
        if !self.is_self_adjoint(a) {
            return false;
        }
        let (vals, _) = hermitian_eigen(&self.onb_matrix(a));
        let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        vals.iter().all(|&v| v >= -self.tol.identity * scale)
    }

    /// Smallest *-closed two-sided ideal containing `gens`.
    pub fn ideal_generated(&self, gens: &[CVec]) -> AlgIdeal {
        let d = self.dim;
        let cols: Vec<CMat> = gens
            .iter()
            .map(|g| CMat::from_column_slice(d, 1, g.as_slice()))
            .collect();
        let refs: Vec<&CMat> = cols.iter().collect();
        let mut q = orth(&linalg::hstack(d, &refs), self.tol.rank);
        loop {
            let mut parts = vec![q.clone()];
            for k in 0..q.ncols() {
                let v = q.column(k).into_owned();
                // columns v e_i, then e_i v
                parts.push(self.left_matrix(&v));
                let mut left = zeros(d, d);
                for i in 0..d {
                    left.set_column(i, &(&self.lmul[i] * &v));
                }
                parts.push(left);
                parts.push(CMat::from_column_slice(d, 1, self.star(&v).as_slice()));
            }
            let refs: Vec<&CMat> = parts.iter().collect();
            let next = orth(&linalg::hstack(d, &refs), self.tol.rank);
            if next.ncols() == q.ncols() {
                break;
            }
            q = next;
        }
        let q = linalg::canonical_basis(&q, self.tol.rank);
        let support = self.support_projection(&q);
        AlgIdeal { basis: q, support }
    }

    /// Range projection of `h = sum b_i* b_i` over the columns of `basis`.
    fn support_projection(&self, basis: &CMat) -> CVec {
        let mut h = CVec::zeros(self.dim);
        for k in 0..basis.ncols() {
            let b = basis.column(k).into_owned();
            h += self.mul(&self.star(&b), &b);
        }
        if basis.ncols() == 0 {
            return h;
        }
        let p = range_projection(&self.onb_matrix(&h), self.tol.rank);
        self.element_of_onb_matrix(&p)
    }

    /// Norm of the image of `a` in `A / I`, as `||a (1 - q)||`.
    pub fn quotient_norm(&self, a: &CVec, ideal: &AlgIdeal) -> f64 {
        self.norm(&(a - self.mul(a, &ideal.support)))
    }

    pub fn contains(&self, ideal: &AlgIdeal, a: &CVec) -> bool {
        in_span(&ideal.basis, a, self.tol.rank)
    }

    fn check_associative(&self) -> Result<(), FdError> {
        let d = self.dim;
        for i in 0..d {
            for j in 0..d {
                let eij = self.lmul[i].column(j).into_owned();
                let lhs = self.left_matrix(&eij);
                let rhs = &self.lmul[i] * &self.lmul[j];
                let scale = lhs.norm().max(rhs.norm()).max(1.0);
                let diff = &lhs - &rhs;
                if diff.norm() > self.tol.identity * scale {
                    let k = (0..d)
                        .max_by(|&x, &y| diff.column(x).norm().total_cmp(&diff.column(y).norm()))
                        .unwrap_or(0);
                    return Err(FdError::NotAssociative {
                        i,
                        j,
                        k,
                        deviation: diff.norm(),
                    });
                }
            }
        }
        Ok(())
    }

    fn check_involution(&self) -> Result<(), FdError> {
        let d = self.dim;
        for i in 0..d {
            let e = basis(d, i);
            let back = self.star(&self.star(&e));
            let dev = (&back - &e).norm();
            if dev > self.tol.identity {
                return Err(FdError::BadInvolution {
                    law: "a** = a",
                    i,
                    j: i,
                    deviation: dev,
                });
            }
        }
        for i in 0..d {
            for j in 0..d {
                let (ei, ej) = (basis(d, i), basis(d, j));
                let lhs = self.star(&self.mul(&ei, &ej));
                let rhs = self.mul(&self.star(&ej), &self.star(&ei));
                let dev = (&lhs - &rhs).norm();
                if dev > self.tol.identity * lhs.norm().max(1.0) {
                    return Err(FdError::BadInvolution {
                        law: "(ab)* = b* a*",
                        i,
                        j,
                        deviation: dev,
                    });
                }
            }
        }
        Ok(())
    }

    fn solve_unit(&self) -> Result<CVec, FdError> {
        let d = self.dim;
        if d == 0 {
            return Ok(CVec::zeros(0));
        }
        // u e_j = e_j and e_j u = e_j, linear in u
        let mut a = zeros(2 * d * d, d);
        let mut b = zeros(2 * d * d, 1);
        for j in 0..d {
            for k in 0..d {
                let r = j * d + k;
                for i in 0..d {
                    a[(r, i)] = self.lmul[i][(k, j)];
                    a[(d * d + r, i)] = self.lmul[j][(k, i)];
                }
                if j == k {
                    b[(r, 0)] = re(1.0);
                    b[(d * d + r, 0)] = re(1.0);
                }
            }
        }
        let u = lstsq(&a, &b, self.tol.rank);
        let residual = (&a * &u - &b).norm();
        if residual > self.tol.identity * (d as f64).sqrt().max(1.0) * 10.0 {
            return Err(FdError::NoUnit { residual });
        }
        Ok(u.column(0).into_owned())
    }

    fn certify_gram(&mut self) -> Result<(), FdError> {
        let d = self.dim;
        if d == 0 {
            return Ok(());
        }
        let (vals, vecs) = hermitian_eigen(&self.gram);
        let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if vals[0] <= self.tol.rank * top.max(1.0) {
            return Err(FdError::NotCStar {
                min_eigenvalue: vals[0],
                witness: vecs.column(0).iter().copied().collect(),
            });
        }
        let l = cholesky_factor(&self.gram).ok_or(FdError::NotCStar {
            min_eigenvalue: vals[0],
            witness: vecs.column(0).iter().copied().collect(),
        })?;
        let lh_inv = l
            .adjoint()
            .try_inverse()
            .expect("triangular factor of a positive definite matrix is invertible");
        self.chol = l;
        self.chol_inv_h = lh_inv;
        Ok(())
    }
}

/// A self-adjoint two-sided ideal with its central support projection.
#[derive(Clone, Debug)]
pub struct AlgIdeal {
    /// Orthonormal (Euclidean) columns spanning the ideal.
    pub basis: CMat,
    /// Coordinates of the unit of the ideal.
    pub support: CVec,
}

impl AlgIdeal {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

/// An element bound to its algebra.
#[derive(Clone, Debug)]
pub struct AlgElement<'a> {
    pub parent: &'a FdCStar,
    pub coords: CVec,
}

impl<'a> AlgElement<'a> {
    pub fn new(parent: &'a FdCStar, coords: CVec) -> Self {
        assert_eq!(
            coords.len(),
            parent.dim(),
            "coordinate length differs from algebra dimension"
        );
        AlgElement { parent, coords }
    }

    pub fn mul(&self, other: &AlgElement<'a>) -> AlgElement<'a> {
        AlgElement::new(self.parent, self.parent.mul(&self.coords, &other.coords))
    }

    pub fn star(&self) -> AlgElement<'a> {
        AlgElement::new(self.parent, self.parent.star(&self.coords))
    }

    pub fn norm(&self) -> f64 {
        self.parent.norm(&self.coords)
    }

    pub fn is_positive(&self) -> bool {
        self.parent.is_positive(&self.coords)
    }
}

pub(crate) fn basis(d: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(d);
    v[i] = re(1.0);
    v
}

/// JSON form of an algebra.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FdCStarFile {
    pub dim: usize,
    /// Entry `i*d + j` lists the coordinates of `e_i e_j` as `[re, im]` pairs.
    pub mul: Vec<Vec<[f64; 2]>>,
    /// Row-major `d x d`; entry `k*d + i` is coordinate `k` of `e_i*`.
    pub star: Vec<[f64; 2]>,
}

impl FdCStarFile {
    pub fn from_algebra(a: &FdCStar) -> Self {
        let d = a.dim();
        let t = a.mul_tensor();
        FdCStarFile {
            dim: d,
            mul: (0..d * d)
                .map(|ij| (0..d).map(|k| pair(t[ij * d + k])).collect())
                .collect(),
            star: (0..d * d).map(|r| pair(a.star[(r / d, r % d)])).collect(),
        }
    }

    pub fn build(&self, tol: Tolerances) -> Result<FdCStar, FdError> {
        let d = self.dim;
        if self.mul.len() != d * d || self.mul.iter().any(|v| v.len() != d) {
            return Err(FdError::DimensionMismatch(
                "mul must have d*d entries of length d".into(),
            ));
        }
        if self.star.len() != d * d {
            return Err(FdError::DimensionMismatch("star must have d*d entries".into()));
        }
        let flat: Vec<C64> = self.mul.iter().flatten().map(|p| c(p[0], p[1])).collect();
        let star = CMat::from_fn(d, d, |r, col| {
            let p = self.star[r * d + col];
            c(p[0], p[1])
        });
        FdCStar::build(d, &flat, star, tol)
    }
}

pub(crate) fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> CVec {
        CVec::from_iterator(xs.len(), xs.iter().map(|&x| re(x)))
    }

    #[test]
    fn c2_unit_and_norm() {
        let a = FdCStar::commutative(2);
        assert!((a.unit() - v(&[1.0, 1.0])).norm() < 1e-12);
        assert!((a.norm(&v(&[3.0, -1.0])) - 3.0).abs() < 1e-12);
        assert!(!a.is_positive(&v(&[1.0, -1.0])));
    }

    #[test]
    fn m2_norm_and_positivity() {
        let m = FdCStar::matrix_algebra(2);
        assert_eq!(m.dim(), 4);
        // [[0,2],[0,0]] = 2 E_01
        assert!((m.norm(&v(&[0.0, 2.0, 0.0, 0.0])) - 2.0).abs() < 1e-12);
        assert!(m.is_positive(&v(&[1.0, 0.0, 0.0, 0.0])));
        assert!(!m.is_positive(&v(&[0.0, 1.0, 0.0, 0.0])));
    }

    #[test]
    fn dual_numbers_are_not_cstar() {
        // C[x]/(x^2), basis {1, x}, x* = x
        let r = FdCStar::from_fn(
            2,
            |i, j| {
                let mut p = CVec::zeros(2);
                if i + j < 2 {
                    p[i + j] = re(1.0);
                }
                p
            },
            linalg::identity(2),
            Tolerances::default(),
        );
        let Err(FdError::NotCStar { witness, .. }) = r else {
            panic!("expected NotCStar, got {r:?}")
        };
        assert!(witness[0].norm() < 1e-9 && (witness[1].norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ideals_and_quotients() {
        let a = FdCStar::commutative(2);
        let i = a.ideal_generated(&[v(&[1.0, 0.0])]);
        assert_eq!(i.dim(), 1);
        assert!((&i.support - v(&[1.0, 0.0])).norm() < 1e-10);
        assert!((a.quotient_norm(&v(&[3.0, 1.0]), &i) - 1.0).abs() < 1e-10);

        let zero = a.ideal_generated(&[v(&[0.0, 0.0])]);
        assert_eq!(zero.dim(), 0);
        assert!((a.quotient_norm(&v(&[3.0, 1.0]), &zero) - 3.0).abs() < 1e-10);

        let full = a.ideal_generated(&[v(&[1.0, 1.0])]);
        assert!(a.quotient_norm(&v(&[3.0, 1.0]), &full) < 1e-10);
    }

    #[test]
    fn simple_algebra_ideal_is_everything() {
        let m = FdCStar::matrix_algebra(2);
        let i = m.ideal_generated(&[v(&[0.0, 0.0, 1.0, 0.0])]);
        assert_eq!(i.dim(), 4);
        assert!((&i.support - m.unit()).norm() < 1e-10);
    }

    #[test]
    fn corrupted_structure_constant_is_caught() {
        let m = FdCStar::matrix_algebra(2);
        let mut t = m.mul_tensor();
        t[5] += re(0.1);
        assert!(FdCStar::build(4, &t, m.star_matrix().clone(), Tolerances::default()).is_err());
    }

    #[test]
    fn file_round_trip() {
        let m = FdCStar::matrix_algebra(2);
        let f = FdCStarFile::from_algebra(&m);
        let json = serde_json::to_string(&f).unwrap();
        let back: FdCStarFile = serde_json::from_str(&json).unwrap();
        let m2 = back.build(Tolerances::default()).unwrap();
        assert_eq!(m2.mul_tensor(), m.mul_tensor());
    }

    #[test]
    fn zero_algebra() {
        let z = FdCStar::zero();
        assert_eq!(z.dim(), 0);
        assert_eq!(z.norm(&CVec::zeros(0)), 0.0);
        assert_eq!(z.ideal_generated(&[]).dim(), 0);
    }
}
