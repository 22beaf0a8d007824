//! Left regular representation of a Fell bundle.
//!
//! For each idempotent `e` the module `X_e = (+)_{s*s = e} A_s` is turned
//! into a Hilbert space `K_e` with the scalar product
//! `<<xi, eta>> = phi_e(sum_s eta(s)* xi(s))`, linear in `xi`, where `phi_e`
//! is the trace form of `A_e`. All operator matrices returned here are in an
//! orthonormal basis of `K_e`, so adjoints are conjugate transposes and
//! operator norms are largest singular values.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bundle::{BundleError, FellBundle};
use crate::conv::Section;
use crate::fdalg::basis;
use crate::linalg::{self, c, cholesky_factor, op_norm, rank, vec_of, zeros, CMat, CVec, C64};

/// `K_e` with its block structure and orthonormalising factor.
#[derive(Clone, Debug)]
pub struct HilbertizedModule {
    pub e: usize,
    /// `S_e` in index order.
    pub elements: Vec<usize>,
    /// Start of each element's block; one extra entry holds the total.
    pub offsets: Vec<usize>,
    /// Gram matrix of the scalar product on the coordinate basis.
    pub gram: CMat,
    chol: CMat,
    chol_inv_h: CMat,
}

impl HilbertizedModule {
    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    /// `(element, fiber index)` for each coordinate of `K_e`.
    pub fn basis_labels(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.dim());
        for (k, &s) in self.elements.iter().enumerate() {
            for i in 0..self.offsets[k + 1] - self.offsets[k] {
                out.push((s, i));
            }
        }
        out
    }

    /// Coordinate range of `A_s` inside `K_e`.
    pub fn block(&self, s: usize) -> Option<(usize, usize)> {
        let k = self.elements.iter().position(|&x| x == s)?;
        Some((self.offsets[k], self.offsets[k + 1] - self.offsets[k]))
    }

    /// Coordinate-basis operator to orthonormal basis.
    pub fn to_onb(&self, m: &CMat) -> CMat {
        self.chol.adjoint() * m * &self.chol_inv_h
    }
}

/// Assembles `K_e` for an idempotent `e`.
pub fn build_ke(b: &FellBundle, e: usize) -> Result<HilbertizedModule, BundleError> {
    let s = b.base();
    let elements = s.s_fiber(e)?;
    let mut offsets = vec![0];
    for &x in &elements {
        offsets.push(offsets.last().unwrap() + b.dim(x));
    }
    let dim = *offsets.last().unwrap();
    let mut gram = zeros(dim, dim);
    for (k, &x) in elements.iter().enumerate() {
        let d = b.dim(x);
        if d == 0 {
            continue;
        }
        let alg = b.unit_fiber(e)?;
        let o = offsets[k];
        for i in 0..d {
            let bi_star = b.star(x, &basis(d, i));
            for j in 0..d {
                let sq = b.mul(s.inv(x), &bi_star, x, &basis(d, j));
                gram[(o + i, o + j)] = alg.trace_form(&sq);
            }
        }
    }
    let chol = cholesky_factor(&gram).ok_or(BundleError::DegenerateGram { e })?;
    let chol_inv_h = chol.adjoint().try_inverse().ok_or(BundleError::DegenerateGram { e })?;
    Ok(HilbertizedModule {
        e,
        elements,
        offsets,
        gram,
        chol,
        chol_inv_h,
    })
}

/// A family of operators indexed by the idempotents (in index order).
#[derive(Clone, Debug, PartialEq)]
pub struct BlockOperator {
    pub blocks: Vec<CMat>,
}

impl BlockOperator {
    pub fn zeros(sizes: &[usize]) -> Self {
        BlockOperator {
            blocks: sizes.iter().map(|&d| zeros(d, d)).collect(),
        }
    }

    pub fn identity(sizes: &[usize]) -> Self {
        BlockOperator {
            blocks: sizes.iter().map(|&d| linalg::identity(d)).collect(),
        }
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|m| m.nrows()).collect()
    }

    fn zip(&self, other: &BlockOperator, f: impl Fn(&CMat, &CMat) -> CMat) -> BlockOperator {
        assert_eq!(self.blocks.len(), other.blocks.len(), "block count mismatch");
        BlockOperator {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn mul(&self, other: &BlockOperator) -> BlockOperator {
        self.zip(other, |a, b| a * b)
    }

    pub fn add(&self, other: &BlockOperator) -> BlockOperator {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &BlockOperator) -> BlockOperator {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, z: C64) -> BlockOperator {
        BlockOperator {
            blocks: self.blocks.iter().map(|a| a * z).collect(),
        }
    }

    pub fn adjoint(&self) -> BlockOperator {
        BlockOperator {
            blocks: self.blocks.iter().map(|a| a.adjoint()).collect(),
        }
    }

    /// Largest block operator norm; zero-dimensional blocks count as 0.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(op_norm).fold(0.0, f64::max)
    }

    /// Sum of the block traces.
    pub fn trace(&self) -> C64 {
        self.blocks.iter().map(|b| b.trace()).sum()
    }

    /// Frobenius norm of the whole family.
    pub fn frobenius(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
    }

    /// All blocks flattened column-major and stacked.
    pub fn to_vec(&self) -> CVec {
        let len: usize = self.blocks.iter().map(|b| b.len()).sum();
        let mut v = CVec::zeros(len);
        let mut at = 0;
        for b in &self.blocks {
            v.rows_mut(at, b.len()).copy_from(&vec_of(b));
            at += b.len();
        }
        v
    }

    /// Inverse of [`BlockOperator::to_vec`].
    pub fn from_vec(v: &CVec, sizes: &[usize]) -> BlockOperator {
        let mut at = 0;
        let mut blocks = Vec::with_capacity(sizes.len());
        for &d in sizes {
            blocks.push(linalg::unvec(&v.as_slice()[at..at + d * d], d, d));
            at += d * d;
        }
        BlockOperator { blocks }
    }
}

/// JSON form: `{"blocks": {"<idempotent>": [[[re, im], ...], ...]}}`, rows first.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BlockOperatorFile {
    pub blocks: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
}

impl BlockOperatorFile {
    pub fn new(op: &BlockOperator, idempotents: &[usize]) -> Self {
        let blocks = op
            .blocks
            .iter()
            .zip(idempotents)
            .map(|(m, e)| {
                let rows = (0..m.nrows())
                    .map(|r| (0..m.ncols()).map(|k| [m[(r, k)].re, m[(r, k)].im]).collect())
                    .collect();
                (e.to_string(), rows)
            })
            .collect();
        BlockOperatorFile { blocks }
    }

    pub fn to_operator(&self, idempotents: &[usize]) -> Result<BlockOperator, BundleError> {
        let mut blocks = Vec::with_capacity(idempotents.len());
        for e in idempotents {
            let rows = self
                .blocks
                .get(&e.to_string())
                .ok_or_else(|| BundleError::Dimension(format!("missing block {e}")))?;
            let d = rows.len();
            if rows.iter().any(|r| r.len() != d) {
                return Err(BundleError::Dimension(format!("block {e} is not square")));
            }
            blocks.push(CMat::from_fn(d, d, |r, k| c(rows[r][k][0], rows[r][k][1])));
        }
        Ok(BlockOperator { blocks })
    }
}

/// The representation `Phi_Lambda` with all modules `K_e` precomputed.
#[derive(Clone, Debug)]
pub struct RegularRepresentation {
    bundle: FellBundle,
    modules: Vec<HilbertizedModule>,
    /// Module index of each idempotent element.
    position: Vec<Option<usize>>,
}

impl RegularRepresentation {
    pub fn new(b: &FellBundle) -> Result<Self, BundleError> {
        let s = b.base();
        let modules = s
            .idempotents()
            .iter()
            .map(|&e| build_ke(b, e))
            .collect::<Result<Vec<_>, _>>()?;
        let mut position = vec![None; s.size()];
        for (k, &e) in s.idempotents().iter().enumerate() {
            position[e] = Some(k);
        }
        Ok(RegularRepresentation {
            bundle: b.clone(),
            modules,
            position,
        })
    }

    pub fn bundle(&self) -> &FellBundle {
        &self.bundle
    }

    pub fn modules(&self) -> &[HilbertizedModule] {
        &self.modules
    }

    pub fn module(&self, e: usize) -> &HilbertizedModule {
        &self.modules[self.position[e].expect("idempotent")]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.modules.iter().map(|m| m.dim()).collect()
    }

    /// Coordinate-basis matrix of `lambda_{e,u}(a)`: `(xi)(v) -> a . xi(u* v)`
    /// for `v` in `S_e` with `v v* <= u u*`.
    fn lambda_coords(&self, m: &HilbertizedModule, u: usize, a: &CVec) -> CMat {
        let b = &self.bundle;
        let s = b.base();
        let us = s.inv(u);
        let mut out = zeros(m.dim(), m.dim());
        if b.dim(u) == 0 {
            return out;
        }
        for (k, &v) in m.elements.iter().enumerate() {
            if !s.in_domain(us, v) {
                continue;
            }
            let w = s.mul(us, v);
            debug_assert_eq!(s.mul(u, w), v, "u u* v = v on D(u*)");
            let (dv, dw) = (b.dim(v), b.dim(w));
            if dv == 0 || dw == 0 {
                continue;
            }
            let (ow, _) = m.block(w).expect("u* v lies in S_e");
            // kron(a, I_dw)
            let mut ka = zeros(b.dim(u) * dw, dw);
            for i in 0..b.dim(u) {
                for j in 0..dw {
                    ka[(i * dw + j, j)] = a[i];
                }
            }
            let blk = b.mu_matrix(u, w) * ka;
            out.view_mut((m.offsets[k], ow), (dv, dw)).copy_from(&blk);
        }
        out
    }

    /// `lambda_{e,u}(a)` on `K_e`, orthonormal basis.
    pub fn lambda_op(&self, e: usize, u: usize, a: &CVec) -> CMat {
        let m = self.module(e);
        m.to_onb(&self.lambda_coords(m, u, a))
    }

    fn check_section(&self, f: &Section<'_>) -> Result<(), BundleError> {
        let fb = f.bundle();
        if fb.dims() != self.bundle.dims() || fb.base().size() != self.bundle.base().size() {
            return Err(BundleError::BundleMismatch);
        }
        Ok(())
    }

    /// `Phi_Lambda` on stacked coordinates.
    pub fn phi_coords(&self, coords: &CVec) -> BlockOperator {
        let b = &self.bundle;
        let blocks = self
            .modules
            .iter()
            .map(|m| {
                let mut t = zeros(m.dim(), m.dim());
                for u in 0..b.base().size() {
                    let a = coords.rows(b.offset(u), b.dim(u)).into_owned();
                    if b.dim(u) > 0 && a.iter().any(|z| *z != C64::default()) {
                        t += self.lambda_coords(m, u, &a);
                    }
                }
                m.to_onb(&t)
            })
            .collect();
        BlockOperator { blocks }
    }

    /// `Phi_Lambda(g) = (sum_u lambda_{e,u}(a_u))_e`.
    pub fn phi(&self, f: &Section<'_>) -> Result<BlockOperator, BundleError> {
        self.check_section(f)?;
        Ok(self.phi_coords(f.coords()))
    }

    /// Images of the standard basis sections.
    pub fn phi_basis(&self) -> Vec<BlockOperator> {
        (0..self.bundle.total_dim())
            .map(|k| self.phi_coords(&basis(self.bundle.total_dim(), k)))
            .collect()
    }

    /// `||Phi_Lambda(g)||`.
    pub fn reduced_norm(&self, f: &Section<'_>) -> Result<f64, BundleError> {
        Ok(self.phi(f)?.norm())
    }

    /// Isometry `gamma_s: K(A_s) -> K_{s*s}` in orthonormal bases.
    pub fn gamma(&self, s: usize) -> CMat {
        let b = &self.bundle;
        let e = b.base().source_idem(s);
        let m = self.module(e);
        let (o, d) = m.block(s).expect("s lies in S_{s*s}");
        let mut incl = zeros(m.dim(), d);
        incl.view_mut((o, 0), (d, d)).copy_from(&linalg::identity(d));
        let gs = m.gram.view((o, o), (d, d)).into_owned();
        let ls = cholesky_factor(&gs).expect("diagonal block of a positive definite Gram");
        let ls_inv_h = ls.adjoint().try_inverse().expect("invertible factor");
        m.chol.adjoint() * incl * ls_inv_h
    }

    /// Matrix of `b -> a . b` from `K(A_t)` to `K(A_{ut})` in orthonormal bases.
    pub fn left_action(&self, u: usize, a: &CVec, t: usize) -> CMat {
        let b = &self.bundle;
        let ut = b.base().mul(u, t);
        let onb = |x: usize| {
            let e = b.base().source_idem(x);
            let m = self.module(e);
            let (o, d) = m.block(x).expect("block");
            cholesky_factor(&m.gram.view((o, o), (d, d)).into_owned()).expect("positive block")
        };
        let (lt, lut) = (onb(t), onb(ut));
        let dt = b.dim(t);
        let mut coords = zeros(b.dim(ut), dt);
        for j in 0..dt {
            coords.set_column(j, &b.mul(u, a, t, &basis(dt, j)));
        }
        lut.adjoint() * coords * lt.adjoint().try_inverse().expect("invertible factor")
    }

    /// `(gamma_e* T_e gamma_e)_e`, a block operator for the restriction to `E`.
    pub fn eks(&self, t: &BlockOperator) -> BlockOperator {
        let s = self.bundle.base();
        let blocks = s
            .idempotents()
            .iter()
            .zip(&t.blocks)
            .map(|(&e, te)| {
                let g = self.gamma(e);
                g.adjoint() * te * g
            })
            .collect();
        BlockOperator { blocks }
    }

    /// Injectivity of `Phi_Lambda` by the rank of its stacked matrix.
    pub fn wordingham_check(&self) -> WordinghamReport {
        let imgs = self.phi_basis();
        let n = self.bundle.total_dim();
        let len: usize = self.sizes().iter().map(|d| d * d).sum();
        let mut m = zeros(len, n);
        for (k, t) in imgs.iter().enumerate() {
            m.set_column(k, &t.to_vec());
        }
        let r = rank(&m, self.bundle.tol().rank);
        WordinghamReport {
            rank: r,
            dim: n,
            injective: r == n,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordinghamReport {
    pub rank: usize,
    pub dim: usize,
    pub injective: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{trivial_line_bundle, ZeroFiber};
    use crate::corpus;
    use crate::linalg::re;

    fn one() -> CVec {
        CVec::from_element(1, re(1.0))
    }

    #[test]
    fn z2_translation_is_a_swap() {
        let b = trivial_line_bundle(&corpus::z2(), ZeroFiber::Full);
        let rep = RegularRepresentation::new(&b).unwrap();
        let m = rep.module(0);
        assert_eq!(m.basis_labels(), vec![(0, 0), (1, 0)]);
        let l = rep.lambda_op(0, 1, &one());
        let swap = CMat::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)]);
        assert!((l - swap).norm() < 1e-12);
    }

    #[test]
    fn i2_module_dimensions() {
        let b = trivial_line_bundle(&corpus::i2(), ZeroFiber::Full);
        let rep = RegularRepresentation::new(&b).unwrap();
        assert_eq!(
            rep.module(corpus::I2_ID1).elements,
            vec![corpus::I2_ID1, corpus::I2_1TO2]
        );
        assert_eq!(rep.module(corpus::I2_ID1).dim(), 2);
        let w = rep.wordingham_check();
        assert_eq!((w.rank, w.dim, w.injective), (7, 7, true));
    }

    #[test]
    fn zero_fiber_gives_empty_module() {
        let b = corpus::i2_action();
        let rep = RegularRepresentation::new(&b).unwrap();
        assert_eq!(rep.module(corpus::I2_ZERO).dim(), 0);
        assert_eq!(
            rep.lambda_op(corpus::I2_ZERO, corpus::I2_SWAP, &CVec::zeros(2)).shape(),
            (0, 0)
        );
    }

    #[test]
    fn lambda_vanishes_off_domain() {
        let b = trivial_line_bundle(&corpus::i2(), ZeroFiber::Full);
        let rep = RegularRepresentation::new(&b).unwrap();
        // S_{id1} = {id1, 1>2}; only 1>2 has range inside id{2}
        let l = rep.lambda_op(corpus::I2_ID1, corpus::I2_ID2, &one());
        let expected = CMat::from_row_slice(2, 2, &[re(0.0), re(0.0), re(0.0), re(1.0)]);
        assert!((l - expected).norm() < 1e-14);
    }

    #[test]
    fn gammas_are_isometries_and_complete() {
        for b in [trivial_line_bundle(&corpus::i2(), ZeroFiber::Full), corpus::i2_action()] {
            let rep = RegularRepresentation::new(&b).unwrap();
            let s = b.base();
            for &e in s.idempotents() {
                let m = rep.module(e);
                let mut sum = zeros(m.dim(), m.dim());
                for &x in &m.elements {
                    let g = rep.gamma(x);
                    assert!((g.adjoint() * &g - linalg::identity(b.dim(x))).norm() < 1e-12);
                    sum += &g * g.adjoint();
                }
                assert!((sum - linalg::identity(m.dim())).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn block_operator_file_round_trip() {
        let b = trivial_line_bundle(&corpus::z2(), ZeroFiber::Full);
        let rep = RegularRepresentation::new(&b).unwrap();
        let t = rep.phi_coords(&CVec::from_vec(vec![c(1.0, 0.5), re(2.0)]));
        let f = BlockOperatorFile::new(&t, b.base().idempotents());
        let back = f.to_operator(b.base().idempotents()).unwrap();
        assert!(back.sub(&t).frobenius() < 1e-15);
    }
}
