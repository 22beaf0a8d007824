//! The convolution *-algebra of sections and its ideal generated by the
//! order relations.
//!
//! A section is a dense coordinate vector over `(+)_s A_s`, stacked in
//! element order (see [`FellBundle::offset`]).

use std::collections::BTreeMap;
use std::ptr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bundle::{BundleError, FellBundle};
use crate::fdalg::basis;
use crate::linalg::{self, c, in_span, orth, random_cvec, zeros, CMat, CVec, C64};

/// An element `sum_s a_s delta_s` of the convolution algebra.
#[derive(Clone, Debug)]
pub struct Section<'a> {
    bundle: &'a FellBundle,
    coords: CVec,
}

impl<'a> Section<'a> {
    pub fn zero(bundle: &'a FellBundle) -> Self {
        Section {
            bundle,
            coords: CVec::zeros(bundle.total_dim()),
        }
    }

    pub fn from_coords(bundle: &'a FellBundle, coords: CVec) -> Result<Self, BundleError> {
        if coords.len() != bundle.total_dim() {
            return Err(BundleError::Dimension(format!(
                "section has {} coordinates, bundle has {}",
                coords.len(),
                bundle.total_dim()
            )));
        }
        Ok(Section { bundle, coords })
    }

    /// `a delta_s`.
    pub fn delta(bundle: &'a FellBundle, s: usize, a: &CVec) -> Self {
        assert_eq!(a.len(), bundle.dim(s), "fiber coordinate length");
        let mut f = Section::zero(bundle);
        f.coords.rows_mut(bundle.offset(s), a.len()).copy_from(a);
        f
    }

    /// The `k`-th standard basis section.
    pub fn basis(bundle: &'a FellBundle, k: usize) -> Self {
        Section {
            bundle,
            coords: basis(bundle.total_dim(), k),
        }
    }

    pub fn random<R: Rng>(bundle: &'a FellBundle, rng: &mut R) -> Self {
        Section {
            bundle,
            coords: random_cvec(rng, bundle.total_dim()),
        }
    }

    pub fn bundle(&self) -> &'a FellBundle {
        self.bundle
    }

    pub fn coords(&self) -> &CVec {
        &self.coords
    }

    /// Coefficient `a_s`.
    pub fn coeff(&self, s: usize) -> CVec {
        self.coords.rows(self.bundle.offset(s), self.bundle.dim(s)).into_owned()
    }

    fn same_bundle(&self, other: &Section<'_>) -> Result<(), BundleError> {
        if ptr::eq(self.bundle, other.bundle) {
            Ok(())
        } else {
            Err(BundleError::BundleMismatch)
        }
    }

    pub fn add(&self, other: &Section<'a>) -> Result<Section<'a>, BundleError> {
        self.same_bundle(other)?;
        Ok(Section {
            bundle: self.bundle,
            coords: &self.coords + &other.coords,
        })
    }

    pub fn sub(&self, other: &Section<'a>) -> Result<Section<'a>, BundleError> {
        self.same_bundle(other)?;
        Ok(Section {
            bundle: self.bundle,
            coords: &self.coords - &other.coords,
        })
    }

    pub fn scale(&self, z: C64) -> Section<'a> {
        Section {
            bundle: self.bundle,
            coords: &self.coords * z,
        }
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.coords.norm() <= tol
    }
}

/// `(f * g)(r) = sum_{st = r} a_s . b_t`.
pub fn convolve<'a>(f: &Section<'a>, g: &Section<'a>) -> Result<Section<'a>, BundleError> {
    f.same_bundle(g)?;
    let b = f.bundle;
    let s = b.base();
    let mut out = Section::zero(b);
    for x in 0..s.size() {
        let fx = f.coeff(x);
        if b.dim(x) == 0 || fx.iter().all(|z| *z == C64::default()) {
            continue;
        }
        for y in 0..s.size() {
            let xy = s.mul(x, y);
            if b.dim(y) == 0 || b.dim(xy) == 0 {
                continue;
            }
            let p = b.mul(x, &fx, y, &g.coeff(y));
            let mut slot = out.coords.rows_mut(b.offset(xy), b.dim(xy));
            slot += p;
        }
    }
    Ok(out)
}

/// `f*(r) = f(r*)*`.
pub fn involute<'a>(f: &Section<'a>) -> Section<'a> {
    let b = f.bundle;
    let s = b.base();
    let mut out = Section::zero(b);
    for x in 0..s.size() {
        let xs = s.inv(x);
        if b.dim(x) == 0 {
            continue;
        }
        let v = b.star(x, &f.coeff(x));
        out.coords.rows_mut(b.offset(xs), b.dim(xs)).copy_from(&v);
    }
    out
}

/// `sum_s ||a_s||`.
pub fn ell1_norm(f: &Section<'_>) -> f64 {
    let b = f.bundle;
    (0..b.base().size()).map(|x| b.fiber_norm(x, &f.coeff(x))).sum()
}

/// Matrix of `g -> f * g` on stacked coordinates.
pub fn left_convolution_matrix(f: &Section<'_>) -> CMat {
    let b = f.bundle;
    let n = b.total_dim();
    let mut m = zeros(n, n);
    for k in 0..n {
        let col = convolve(f, &Section::basis(b, k)).expect("same bundle");
        m.set_column(k, &col.coords);
    }
    m
}

/// A subspace of sections, given by orthonormal columns over stacked coordinates.
#[derive(Clone, Debug)]
pub struct SectionSubspace {
    pub basis: CMat,
    /// The generators the span was computed from.
    pub generators: CMat,
}

impl SectionSubspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn contains(&self, f: &Section<'_>, tol: f64) -> bool {
        in_span(&self.basis, f.coords(), tol)
    }

    /// Two-sided and self-adjoint: every generator convolved on either side
    /// with every basis section, and every involuted generator, stays inside.
    pub fn is_selfadjoint_ideal(&self, b: &FellBundle) -> bool {
        let tol = b.tol().rank.max(1e-9) * 10.0;
        for k in 0..self.basis.ncols() {
            let g = Section::from_coords(b, self.basis.column(k).into_owned()).expect("shape");
            if !self.contains(&involute(&g), tol) {
                return false;
            }
            for i in 0..b.total_dim() {
                let d = Section::basis(b, i);
                let l = convolve(&d, &g).expect("same bundle");
                let r = convolve(&g, &d).expect("same bundle");
                if !self.contains(&l, tol) || !self.contains(&r, tol) {
                    return false;
                }
            }
        }
        true
    }
}

/// Generators `a delta_s - j_{t,s}(a) delta_t` over strict pairs `s < t` and
/// fiber basis vectors `a`, as columns.
pub fn na_generators(b: &FellBundle) -> CMat {
    let s = b.base();
    let n = b.total_dim();
    let mut cols: Vec<CVec> = Vec::new();
    for (x, t) in s.strict_pairs() {
        let jm = b.j_matrix(t, x).expect("strict pair is ordered");
        for i in 0..b.dim(x) {
            let mut v = CVec::zeros(n);
            v[b.offset(x) + i] = c(1.0, 0.0);
            let image = jm.column(i);
            let mut slot = v.rows_mut(b.offset(t), b.dim(t));
            slot -= image;
            cols.push(v);
        }
    }
    let mats: Vec<CMat> = cols
        .iter()
        .map(|v| CMat::from_column_slice(n, 1, v.as_slice()))
        .collect();
    let refs: Vec<&CMat> = mats.iter().collect();
    linalg::hstack(n, &refs)
}

/// The ideal generated by the order relations, as a rank-certified basis.
pub fn na_spanning_set(b: &FellBundle) -> SectionSubspace {
    let generators = na_generators(b);
    let basis = linalg::canonical_basis(&orth(&generators, b.tol().rank), b.tol().rank);
    SectionSubspace { basis, generators }
}

/// Restriction of coefficients to the idempotents, as a section of the
/// restricted bundle `restricted` whose element `i` is `emb[i]`.
pub fn diagonal_part<'e>(
    f: &Section<'_>,
    restricted: &'e FellBundle,
    emb: &[usize],
) -> Result<Section<'e>, BundleError> {
    if emb.len() != restricted.base().size()
        || emb
            .iter()
            .enumerate()
            .any(|(i, &x)| restricted.dim(i) != f.bundle.dim(x))
    {
        return Err(BundleError::BundleMismatch);
    }
    let mut out = Section::zero(restricted);
    for (i, &x) in emb.iter().enumerate() {
        out.coords
            .rows_mut(restricted.offset(i), restricted.dim(i))
            .copy_from(&f.coeff(x));
    }
    Ok(out)
}

/// Re-homes a section of the restricted bundle as a section supported on `E`.
pub fn extend_from_diagonal<'a>(
    f: &Section<'_>,
    full: &'a FellBundle,
    emb: &[usize],
) -> Result<Section<'a>, BundleError> {
    if emb.len() != f.bundle.base().size() {
        return Err(BundleError::BundleMismatch);
    }
    let mut out = Section::zero(full);
    for (i, &x) in emb.iter().enumerate() {
        if full.dim(x) != f.bundle.dim(i) {
            return Err(BundleError::BundleMismatch);
        }
        out.coords.rows_mut(full.offset(x), full.dim(x)).copy_from(&f.coeff(i));
    }
    Ok(out)
}

/// JSON form: `{"coeffs": {"<index>": [[re, im], ...]}}`; missing elements are zero.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct SectionFile {
    pub coeffs: BTreeMap<String, Vec<[f64; 2]>>,
}

impl SectionFile {
    pub fn from_section(f: &Section<'_>) -> Self {
        let b = f.bundle;
        let mut coeffs = BTreeMap::new();
        for x in 0..b.base().size() {
            let v = f.coeff(x);
            if b.dim(x) > 0 && v.iter().any(|z| *z != C64::default()) {
                coeffs.insert(x.to_string(), v.iter().map(|z| [z.re, z.im]).collect());
            }
        }
        SectionFile { coeffs }
    }

    pub fn to_section<'a>(&self, b: &'a FellBundle) -> Result<Section<'a>, BundleError> {
        let mut f = Section::zero(b);
        for (k, v) in &self.coeffs {
            let x: usize = k
                .parse()
                .ok()
                .filter(|&x| x < b.base().size())
                .ok_or_else(|| BundleError::Dimension(format!("unknown element {k:?}")))?;
            if v.len() != b.dim(x) {
                return Err(BundleError::Dimension(format!(
                    "coefficient of {x} has length {}, fiber has dimension {}",
                    v.len(),
                    b.dim(x)
                )));
            }
            let a = CVec::from_iterator(v.len(), v.iter().map(|p| c(p[0], p[1])));
            f.coords.rows_mut(b.offset(x), b.dim(x)).copy_from(&a);
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{restrict_to_idempotents, trivial_line_bundle, ZeroFiber};
    use crate::corpus;
    use crate::linalg::re;

    fn one() -> CVec {
        CVec::from_element(1, re(1.0))
    }

    #[test]
    fn group_algebra_square() {
        let b = trivial_line_bundle(&corpus::z2(), ZeroFiber::Full);
        let f = Section::delta(&b, 0, &one())
            .add(&Section::delta(&b, 1, &one()))
            .unwrap();
        let sq = convolve(&f, &f).unwrap();
        assert!((sq.coords() - CVec::from_element(2, re(2.0))).norm() < 1e-12);
        assert!((ell1_norm(&f) - 2.0).abs() < 1e-12);
        assert!(convolve(&f, &Section::zero(&b)).unwrap().is_zero(0.0));
    }

    #[test]
    fn mismatched_bundles_are_rejected() {
        let b1 = trivial_line_bundle(&corpus::z2(), ZeroFiber::Full);
        let b2 = trivial_line_bundle(&corpus::z2(), ZeroFiber::Full);
        let f = Section::zero(&b1);
        let g = Section::zero(&b2);
        assert_eq!(convolve(&f, &g).unwrap_err(), BundleError::BundleMismatch);
    }

    #[test]
    fn na_dimensions() {
        let z2 = trivial_line_bundle(&corpus::z2(), ZeroFiber::Full);
        assert_eq!(na_spanning_set(&z2).dim(), 0);
        let e3 = trivial_line_bundle(&corpus::e3(), ZeroFiber::Full);
        let n = na_spanning_set(&e3);
        assert_eq!(n.dim(), 2);
        assert!(n.is_selfadjoint_ideal(&e3));
        let i2 = trivial_line_bundle(&corpus::i2(), ZeroFiber::Full);
        let n = na_spanning_set(&i2);
        assert!(n.is_selfadjoint_ideal(&i2));
    }

    #[test]
    fn diagonal_part_is_idempotent() {
        let b = trivial_line_bundle(&corpus::i2(), ZeroFiber::Full);
        let (e, emb) = restrict_to_idempotents(&b);
        let f = Section::from_coords(&b, CVec::from_fn(7, |i, _| re(i as f64 + 1.0))).unwrap();
        let d = diagonal_part(&f, &e, &emb).unwrap();
        assert_eq!(d.coords().len(), 4);
        let back = extend_from_diagonal(&d, &b, &emb).unwrap();
        let again = diagonal_part(&back, &e, &emb).unwrap();
        assert_eq!(again.coords(), d.coords());
    }

    #[test]
    fn section_file_round_trip() {
        let b = trivial_line_bundle(&corpus::e3(), ZeroFiber::Zero);
        let f = Section::delta(&b, 1, &CVec::from_element(1, c(2.0, -1.0)));
        let file = SectionFile::from_section(&f);
        let json = serde_json::to_string(&file).unwrap();
        assert_eq!(json, r#"{"coeffs":{"1":[[2.0,-1.0]]}}"#);
        let back: SectionFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_section(&b).unwrap().coords(), f.coords());
    }
}
