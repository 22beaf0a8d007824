//! Concrete cross sectional algebras: the image of the regular
//! representation, its ideals, quotients by support projections, and two
//! independent norm oracles.
//!
//! Operators are block families on `(K_e)_e`; subspaces are tracked both in
//! section coordinates (the regular representation is injective) and as
//! orthonormal spans of vectorised operators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bundle::{restrict_to_idempotents, BundleError, FellBundle};
use crate::conv::{convolve, ell1_norm, involute, left_convolution_matrix, na_generators, Section};
use crate::isg::{Grading, Group};
use crate::linalg::{
    self, c, columns_in_span, hermitian_eigen, in_span, lstsq, null_space, op_norm, orth, random_cvec,
    range_projection, rank, re, same_span, zeros, CMat, CVec, C64,
};
use crate::regrep::{BlockOperator, RegularRepresentation, WordinghamReport};

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("subspace is not an ideal of the generated algebra")]
    NotAnIdeal,
    #[error("oracle not applicable: {0}")]
    OracleNotApplicable(String),
    #[error("not an idempotent pure grading: {0}")]
    NotAGrading(String),
}

/// A subspace of the generated algebra.
#[derive(Clone, Debug)]
pub struct OperatorSubspace {
    /// Orthonormal columns in section coordinates.
    pub coords: CMat,
    /// Orthonormal columns spanning the vectorised operators.
    pub ops: CMat,
}

impl OperatorSubspace {
    pub fn dim(&self) -> usize {
        self.coords.ncols()
    }

    pub fn contains(&self, t: &BlockOperator, tol: f64) -> bool {
        in_span(&self.ops, &t.to_vec(), tol)
    }

    pub fn contains_subspace(&self, other: &OperatorSubspace, tol: f64) -> bool {
        columns_in_span(&self.ops, &other.ops, tol)
    }

    pub fn same_as(&self, other: &OperatorSubspace, tol: f64) -> bool {
        same_span(&self.ops, &other.ops, tol)
    }
}

/// Norms in a quotient `C / I`, computed as `||T (1 - q)||` with `q` the
/// support projection of `I`.
#[derive(Clone, Debug)]
pub struct Quotient {
    complement: BlockOperator,
    dim: usize,
}

impl Quotient {
    /// `1 - q` for the ideal spanned by `ideal_ops` (block operators).
    pub fn from_ideal(ideal_ops: &[BlockOperator], sizes: &[usize], ambient_dim: usize, tol: f64) -> Self {
        let blocks = sizes
            .iter()
            .enumerate()
            .map(|(k, &d)| {
                let mut h = zeros(d, d);
                for x in ideal_ops {
                    h += &x.blocks[k] * x.blocks[k].adjoint();
                }
                linalg::identity(d) - range_projection(&h, tol)
            })
            .collect();
        Quotient {
            complement: BlockOperator { blocks },
            dim: ambient_dim - ideal_ops.len(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `1 - q`.
    pub fn complement(&self) -> &BlockOperator {
        &self.complement
    }

    pub fn norm(&self, t: &BlockOperator) -> f64 {
        t.mul(&self.complement).norm()
    }
}

fn ops_of(basis: &[BlockOperator], coords: &CMat) -> Vec<BlockOperator> {
    (0..coords.ncols())
        .map(|k| {
            let mut t = BlockOperator::zeros(&basis.first().map(|b| b.sizes()).unwrap_or_default());
            for (i, b) in basis.iter().enumerate() {
                let z = coords[(i, k)];
                if z != C64::default() {
                    t = t.add(&b.scale(z));
                }
            }
            t
        })
        .collect()
}

fn stack_ops(ops: &[BlockOperator], len: usize) -> CMat {
    let mut m = zeros(len, ops.len());
    for (k, t) in ops.iter().enumerate() {
        m.set_column(k, &t.to_vec());
    }
    m
}

/// The generated algebra `C*_r,KS(A) = span Phi_Lambda(C_c(A))` together with
/// the diagonal copy of the restriction to the idempotents.
#[derive(Clone, Debug)]
pub struct CrossSectional {
    rep: RegularRepresentation,
    diag_rep: RegularRepresentation,
    emb: Vec<usize>,
    basis: Vec<BlockOperator>,
    basis_mat: CMat,
    diag_basis: Vec<BlockOperator>,
    diag_mat: CMat,
    e_star_unitary: bool,
    a0_zero: bool,
}

impl CrossSectional {
    pub fn new(b: &FellBundle) -> Result<Self, AlgebraError> {
        let rep = RegularRepresentation::new(b)?;
        let (restricted, emb) = restrict_to_idempotents(b);
        debug_assert_eq!(emb, b.base().idempotents());
        let diag_rep = RegularRepresentation::new(&restricted)?;
        let basis = rep.phi_basis();
        let len: usize = rep.sizes().iter().map(|d| d * d).sum();
        let basis_mat = stack_ops(&basis, len);
        let diag_basis = diag_rep.phi_basis();
        let dlen: usize = diag_rep.sizes().iter().map(|d| d * d).sum();
        let diag_mat = stack_ops(&diag_basis, dlen);
        Ok(CrossSectional {
            e_star_unitary: b.base().is_e_star_unitary(),
            a0_zero: b.zero_fiber_is_zero(),
            rep,
            diag_rep,
            emb,
            basis,
            basis_mat,
            diag_basis,
            diag_mat,
        })
    }

    pub fn bundle(&self) -> &FellBundle {
        self.rep.bundle()
    }

    pub fn restricted(&self) -> &FellBundle {
        self.diag_rep.bundle()
    }

    pub fn embedding(&self) -> &[usize] {
        &self.emb
    }

    pub fn rep(&self) -> &RegularRepresentation {
        &self.rep
    }

    pub fn diagonal_rep(&self) -> &RegularRepresentation {
        &self.diag_rep
    }

    fn tol(&self) -> f64 {
        self.bundle().tol().rank
    }

    fn member_tol(&self) -> f64 {
        (self.tol() * 100.0).max(1e-8)
    }

    pub fn e_star_unitary(&self) -> bool {
        self.e_star_unitary
    }

    pub fn a0_zero(&self) -> bool {
        self.a0_zero
    }

    /// E*-unitary base and `A_0 = {0}`.
    pub fn require_hypotheses(&self) -> Result<(), AlgebraError> {
        if !self.e_star_unitary {
            let w = self.bundle().base().e_star_unitary_witness();
            return Err(AlgebraError::HypothesisViolated(match w {
                Some((e, s)) => format!("base is not E*-unitary: {s} dominates the nonzero idempotent {e}"),
                None => "base is not E*-unitary".into(),
            }));
        }
        if !self.a0_zero {
            return Err(AlgebraError::HypothesisViolated(
                "the fiber over the zero element is nonzero".into(),
            ));
        }
        Ok(())
    }

    /// Basis `Phi_Lambda(delta-basis)` of the generated algebra.
    pub fn generate_crks(&self) -> &[BlockOperator] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn wordingham(&self) -> WordinghamReport {
        let r = rank(&self.basis_mat, self.tol());
        WordinghamReport {
            rank: r,
            dim: self.dim(),
            injective: r == self.dim(),
        }
    }

    pub fn operator(&self, coords: &CVec) -> BlockOperator {
        self.rep.phi_coords(coords)
    }

    /// Section coordinates of an operator in the generated algebra.
    pub fn coords_of(&self, t: &BlockOperator) -> CVec {
        let v = CMat::from_column_slice(t.to_vec().len(), 1, t.to_vec().as_slice());
        lstsq(&self.basis_mat, &v, self.tol()).column(0).into_owned()
    }

    /// Span of the sections given as columns.
    pub fn subspace(&self, gens: &CMat) -> OperatorSubspace {
        let coords = orth(gens, self.tol());
        let ops = orth(&(&self.basis_mat * &coords), self.tol());
        OperatorSubspace { coords, ops }
    }

    fn diag_subspace(&self, gens: &CMat) -> OperatorSubspace {
        let coords = orth(gens, self.tol());
        let ops = orth(&(&self.diag_mat * &coords), self.tol());
        OperatorSubspace { coords, ops }
    }

    pub fn subspace_ops(&self, sub: &OperatorSubspace) -> Vec<BlockOperator> {
        ops_of(&self.basis, &sub.coords)
    }

    /// Two-sided and adjoint closed, by membership tests against the ambient basis.
    pub fn is_ideal(&self, sub: &OperatorSubspace) -> bool {
        let tol = self.member_tol();
        self.subspace_ops(sub).iter().all(|t| {
            sub.contains(&t.adjoint(), tol)
                && self
                    .basis
                    .iter()
                    .all(|b| sub.contains(&b.mul(t), tol) && sub.contains(&t.mul(b), tol))
        })
    }

    /// `I_A`, the closure of the image of the order-relation ideal.
    pub fn ideal_ia(&self) -> OperatorSubspace {
        self.subspace(&na_generators(self.bundle()))
    }

    /// `I_E` inside the diagonal algebra, in the restricted bundle's picture.
    pub fn ideal_ie_diagonal(&self) -> OperatorSubspace {
        self.diag_subspace(&na_generators(self.restricted()))
    }

    /// `I_E` embedded into the generated algebra.
    pub fn ideal_ie(&self) -> OperatorSubspace {
        let g = na_generators(self.restricted());
        self.subspace(&self.extend_coords(&g))
    }

    /// Re-homes restricted-bundle coordinates (columns) onto the idempotents.
    fn extend_coords(&self, m: &CMat) -> CMat {
        let (b, r) = (self.bundle(), self.restricted());
        let mut out = zeros(b.total_dim(), m.ncols());
        for (i, &x) in self.emb.iter().enumerate() {
            let d = r.dim(i);
            out.view_mut((b.offset(x), 0), (d, m.ncols()))
                .copy_from(&m.view((r.offset(i), 0), (d, m.ncols())));
        }
        out
    }

    /// `E_KS(T) = (gamma_e* T_e gamma_e)_e`.
    pub fn eks(&self, t: &BlockOperator) -> BlockOperator {
        self.rep.eks(t)
    }

    /// Diagonal embedding of an operator in the restricted bundle's generated algebra.
    pub fn iota(&self, x: &BlockOperator) -> BlockOperator {
        let v = x.to_vec();
        let rhs = CMat::from_column_slice(v.len(), 1, v.as_slice());
        let coords = lstsq(&self.diag_mat, &rhs, self.tol());
        let full = self.extend_coords(&coords);
        self.operator(&full.column(0).into_owned())
    }

    /// Whether a restricted-bundle operator lies in the diagonal algebra.
    pub fn in_diagonal(&self, x: &BlockOperator) -> bool {
        let q = orth(&self.diag_mat, self.tol());
        in_span(&q, &x.to_vec(), self.member_tol())
    }

    pub fn quotient(&self, ideal: &OperatorSubspace) -> Result<Quotient, AlgebraError> {
        if !self.is_ideal(ideal) {
            return Err(AlgebraError::NotAnIdeal);
        }
        Ok(Quotient::from_ideal(
            &self.subspace_ops(ideal),
            &self.rep.sizes(),
            self.dim(),
            self.tol(),
        ))
    }

    /// Support complement of `I_E` in the diagonal picture.
    pub fn diagonal_quotient(&self) -> Quotient {
        let ie = self.ideal_ie_diagonal();
        let ops = ops_of(&self.diag_basis, &ie.coords);
        Quotient::from_ideal(&ops, &self.diag_rep.sizes(), self.diag_basis.len(), self.tol())
    }

    /// `J_A` from the linear characterisation: all `T` with
    /// `E_KS(Q T R)` in `I_E` for basis operators `Q`, `R`.
    pub fn ideal_ja(&self) -> Result<OperatorSubspace, AlgebraError> {
        self.require_hypotheses()?;
        let ie = self.ideal_ie_diagonal();
        let n = self.dim();
        let dlen = self.diag_mat.nrows();
        let mut rows: Vec<CMat> = Vec::new();
        for q in &self.basis {
            for r in &self.basis {
                let mut block = zeros(dlen, n);
                for (k, t) in self.basis.iter().enumerate() {
                    let v = self.eks(&q.mul(t).mul(r)).to_vec();
                    let proj = if ie.ops.ncols() > 0 {
                        &ie.ops * (ie.ops.adjoint() * &v)
                    } else {
                        CVec::zeros(dlen)
                    };
                    block.set_column(k, &(v - proj));
                }
                rows.push(block);
            }
        }
        let refs: Vec<&CMat> = rows.iter().collect();
        let system = linalg::vstack(n, &refs);
        Ok(self.subspace(&null_space(&system, self.tol())))
    }

    /// Gram matrix of `B(S, T) = tau(E_KS(S* T) (1 - q_E))` on the basis.
    pub fn defect_form(&self) -> Result<CMat, AlgebraError> {
        self.require_hypotheses()?;
        let comp = self.diagonal_quotient();
        let n = self.dim();
        let mut g = zeros(n, n);
        for i in 0..n {
            let bi = self.basis[i].adjoint();
            for j in 0..n {
                let x = self.eks(&bi.mul(&self.basis[j])).mul(comp.complement());
                g[(i, j)] = x.trace();
            }
        }
        Ok(g)
    }

    /// `J_A` from the defining condition `E_KS(T* T) in I_E`, as the null
    /// space of the positive form [`CrossSectional::defect_form`].
    pub fn ideal_ja_quadratic(&self) -> Result<OperatorSubspace, AlgebraError> {
        let g = self.defect_form()?;
        Ok(self.subspace(&null_space(&g, self.tol())))
    }

    /// Faithfulness of the induced expectation on `C*_r,alt`: the defect form
    /// is positive definite on the complement of `I_A`.
    pub fn condition_iii(&self) -> Result<bool, AlgebraError> {
        let g = self.defect_form()?;
        let ia = self.ideal_ia();
        let n = self.dim();
        let w = if ia.dim() == 0 {
            linalg::identity(n)
        } else {
            null_space(&ia.coords.adjoint(), self.tol())
        };
        if w.ncols() == 0 {
            return Ok(true);
        }
        let (vals, _) = hermitian_eigen(&(w.adjoint() * &g * &w));
        let top = g.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(1.0);
        Ok(vals[0] > self.tol() * top)
    }

    /// Full analysis with norms of the given sections.
    pub fn report(
        &self,
        sections: &[(String, CVec)],
        opts: ReportOptions,
    ) -> Result<CrossSectionalReport, AlgebraError> {
        let b = self.bundle();
        let w = self.wordingham();
        let ia = self.ideal_ia();
        let ie = self.ideal_ie();
        let mut notes = Vec::new();
        let q_ia = self.quotient(&ia)?;
        let (ja, q_ja, routes) = match self.ideal_ja() {
            Ok(ja) => {
                let quad = self.ideal_ja_quadratic()?;
                let agree = ja.same_as(&quad, self.member_tol());
                let q = self.quotient(&ja)?;
                (Some(ja), Some(q), Some(agree))
            }
            Err(AlgebraError::HypothesisViolated(msg)) => {
                notes.push(format!("reduced algebra skipped: {msg}"));
                (None, None, None)
            }
            Err(e) => return Err(e),
        };
        let ia_equals_ja = ja.as_ref().map(|j| j.same_as(&ia, self.member_tol()));
        let ia_in_ja = ja.as_ref().map(|j| j.contains_subspace(&ia, self.member_tol()));
        let condition_iii = if ja.is_some() {
            Some(self.condition_iii()?)
        } else {
            None
        };
        let oracle = if opts.oracle && ja.is_some() {
            match ExelOracle::new(self, opts.seed) {
                Ok(o) => Some(o),
                Err(AlgebraError::OracleNotApplicable(msg)) => {
                    notes.push(format!("oracle skipped: {msg}"));
                    None
                }
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        let mut norms = Vec::with_capacity(sections.len());
        for (label, coords) in sections {
            let f = Section::from_coords(b, coords.clone())?;
            let t = self.operator(coords);
            norms.push(NormRow {
                label: label.clone(),
                ell1: ell1_norm(&f),
                reduced: t.norm(),
                ia_quotient: q_ia.norm(&t),
                ja_quotient: q_ja.as_ref().map(|q| q.norm(&t)),
                oracle: oracle.as_ref().map(|o| o.norm(coords)),
            });
        }
        Ok(CrossSectionalReport {
            dims: Dims {
                cc: b.total_dim(),
                crks: w.rank,
                ia: ia.dim(),
                ie: ie.dim(),
                ja: ja.as_ref().map(|j| j.dim()),
                alt: q_ia.dim(),
                reduced: q_ja.as_ref().map(|q| q.dim()),
            },
            injective: w.injective,
            e_star_unitary: self.e_star_unitary,
            a0_zero: self.a0_zero,
            ia_in_ja,
            ia_equals_ja,
            ja_routes_agree: routes,
            condition_iii,
            norms,
            notes,
            seed: opts.seed,
            tol: self.tol(),
        })
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ReportOptions {
    pub seed: u64,
    pub oracle: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Dims {
    pub cc: usize,
    pub crks: usize,
    pub ia: usize,
    pub ie: usize,
    pub ja: Option<usize>,
    /// `C*_r,KS / I_A`.
    pub alt: usize,
    /// `C*_r,KS / J_A`.
    pub reduced: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct NormRow {
    pub label: String,
    pub ell1: f64,
    pub reduced: f64,
    pub ia_quotient: f64,
    pub ja_quotient: Option<f64>,
    pub oracle: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CrossSectionalReport {
    pub dims: Dims,
    pub injective: bool,
    pub e_star_unitary: bool,
    pub a0_zero: bool,
    pub ia_in_ja: Option<bool>,
    pub ia_equals_ja: Option<bool>,
    pub ja_routes_agree: Option<bool>,
    pub condition_iii: Option<bool>,
    pub norms: Vec<NormRow>,
    pub notes: Vec<String>,
    pub seed: u64,
    pub tol: f64,
}

/// Largest deviations found while checking that `E_KS` is a conditional
/// expectation onto the diagonal.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ExpectationReport {
    pub formula: f64,
    pub covariance: f64,
    pub idempotent: f64,
    pub bimodule: f64,
    /// `max ||E_KS(T)|| - ||T||` over samples; nonpositive when contractive.
    pub contraction_excess: f64,
    pub samples: usize,
}

impl CrossSectional {
    /// Conditional-expectation identities on the full basis and on seeded samples.
    pub fn expectation_checks(&self, seed: u64, samples: usize) -> Result<ExpectationReport, AlgebraError> {
        self.require_hypotheses()?;
        let b = self.bundle();
        let n = self.dim();
        let mut formula = 0.0f64;
        for k in 0..n {
            let (s, i) = b.locate(k);
            let expected = match self.emb.iter().position(|&x| x == s) {
                Some(p) => self.diag_basis[self.restricted().offset(p) + i].clone(),
                None => BlockOperator::zeros(&self.diag_rep.sizes()),
            };
            formula = formula.max(self.eks(&self.basis[k]).sub(&expected).norm());
        }
        let diag_in_a: Vec<BlockOperator> = self.diag_basis.iter().map(|x| self.iota(x)).collect();
        let mut covariance = 0.0f64;
        for l in &self.basis {
            let la = l.adjoint();
            for t in &self.basis {
                let lhs = self.iota(&self.eks(&la.mul(t).mul(l)));
                let rhs = la.mul(&self.iota(&self.eks(t))).mul(l);
                covariance = covariance.max(lhs.sub(&rhs).norm());
            }
        }
        let mut bimodule = 0.0f64;
        for (x, xa) in self.diag_basis.iter().zip(&diag_in_a) {
            for t in &self.basis {
                for (y, ya) in self.diag_basis.iter().zip(&diag_in_a) {
                    let lhs = self.eks(&xa.mul(t).mul(ya));
                    let rhs = x.mul(&self.eks(t)).mul(y);
                    bimodule = bimodule.max(lhs.sub(&rhs).norm());
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idempotent = 0.0f64;
        let mut contraction_excess = f64::NEG_INFINITY;
        for _ in 0..samples {
            let t = self.operator(&random_cvec(&mut rng, b.total_dim()));
            let e = self.eks(&t);
            idempotent = idempotent.max(self.eks(&self.iota(&e)).sub(&e).norm());
            contraction_excess = contraction_excess.max(e.norm() - t.norm());
        }
        Ok(ExpectationReport {
            formula,
            covariance,
            idempotent,
            bimodule,
            contraction_excess: if samples == 0 { 0.0 } else { contraction_excess },
            samples,
        })
    }
}

/// Evidence that `T -> E_KS(T* T)` has trivial kernel on the generated algebra.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FaithfulnessReport {
    pub samples: usize,
    /// Smallest `||E_KS(T* T)|| / ||T||^2` among samples with `||T|| > 1e-8`.
    pub min_ratio: f64,
    /// Smallest eigenvalue of `tau(E_KS(B_i* B_j))` relative to its largest.
    pub gram_min_relative: f64,
    pub exact: bool,
}

/// Faithfulness of the diagonal compression; needs no hypothesis on the base.
pub fn faithfulness(rep: &RegularRepresentation, seed: u64, samples: usize) -> FaithfulnessReport {
    let b = rep.bundle();
    let basis = rep.phi_basis();
    let n = basis.len();
    let mut q = zeros(n, n);
    for i in 0..n {
        let bi = basis[i].adjoint();
        for j in i..n {
            let v = rep.eks(&bi.mul(&basis[j])).trace();
            q[(i, j)] = v;
            q[(j, i)] = v.conj();
        }
    }
    let (vals, _) = hermitian_eigen(&q);
    let top = vals.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let gram_min_relative = vals.first().map(|v| v / top).unwrap_or(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_ratio = f64::INFINITY;
    let mut taken = 0;
    while taken < samples {
        let t = rep.phi_coords(&random_cvec(&mut rng, b.total_dim()));
        let nt = t.norm();
        if nt <= 1e-8 {
            if b.total_dim() == 0 {
                break;
            }
            continue;
        }
        taken += 1;
        min_ratio = min_ratio.min(rep.eks(&t.adjoint().mul(&t)).norm() / (nt * nt));
    }
    FaithfulnessReport {
        samples: taken,
        min_ratio,
        gram_min_relative,
        exact: gram_min_relative > b.tol().rank,
    }
}

#[derive(Clone, Debug)]
struct StateData {
    /// `phi~` on the section basis.
    values: CVec,
}

/// Exel's seminorm `sup_phi ||Upsilon_phi~(g)||` over the characters of the
/// commutative algebra `C*(E)`, realised as GNS representations on `C_c(A)`.
#[derive(Clone, Debug)]
pub struct ExelOracle {
    bundle: FellBundle,
    states: Vec<StateData>,
    /// `b_i* * b_j` as coordinate vectors, row-major over `(i, j)`.
    products: Vec<CVec>,
    tol: f64,
}

impl ExelOracle {
    pub fn new(cs: &CrossSectional, seed: u64) -> Result<Self, AlgebraError> {
        cs.require_hypotheses()
            .map_err(|e| AlgebraError::OracleNotApplicable(e.to_string()))?;
        let b = cs.bundle();
        let r = cs.restricted();
        for e in 0..r.base().size() {
            if r.dim(e) > 0 && !r.unit_fiber(e)?.is_commutative() {
                return Err(AlgebraError::OracleNotApplicable(format!(
                    "unit fiber over {} is not commutative",
                    cs.emb[e]
                )));
            }
        }
        let characters = diagonal_characters(cs, seed)?;
        let n = b.total_dim();
        let states = characters
            .iter()
            .map(|chi| {
                let mut values = CVec::zeros(n);
                for (p, &x) in cs.emb.iter().enumerate() {
                    for i in 0..r.dim(p) {
                        values[b.offset(x) + i] = chi[r.offset(p) + i];
                    }
                }
                StateData { values }
            })
            .collect();
        let mut products = Vec::with_capacity(n * n);
        for i in 0..n {
            let bi = involute(&Section::basis(b, i));
            for j in 0..n {
                products.push(convolve(&bi, &Section::basis(b, j))?.coords().clone());
            }
        }
        Ok(ExelOracle {
            bundle: b.clone(),
            states,
            products,
            tol: b.tol().rank,
        })
    }

    pub fn character_count(&self) -> usize {
        self.states.len()
    }

    /// GNS norm of left convolution by `coords` for one character.
    fn gns_norm(&self, state: &StateData, lmat: &CMat) -> f64 {
        let n = self.bundle.total_dim();
        let mut m = zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = state.values.dot(&self.products[i * n + j]);
            }
        }
        let (vals, vecs) = hermitian_eigen(&m);
        let top = vals.last().copied().unwrap_or(0.0);
        if top <= 0.0 {
            return 0.0;
        }
        let keep: Vec<usize> = (0..n).filter(|&k| vals[k] > self.tol * top).collect();
        let mut r = zeros(keep.len(), n);
        let mut rp = zeros(n, keep.len());
        for (row, &k) in keep.iter().enumerate() {
            let v = vecs.column(k);
            r.set_row(row, &(v.adjoint() * re(vals[k].sqrt())));
            rp.set_column(row, &(v * re(1.0 / vals[k].sqrt())));
        }
        op_norm(&(r * lmat * rp))
    }

    pub fn norm(&self, coords: &CVec) -> f64 {
        let f = Section::from_coords(&self.bundle, coords.clone()).expect("section shape");
        let l = left_convolution_matrix(&f);
        self.states.iter().map(|s| self.gns_norm(s, &l)).fold(0.0, f64::max)
    }
}

/// Characters of `C*_r,KS(E) / I_E`, as values on the restricted bundle's
/// section basis, by simultaneous diagonalisation of the compressed blocks.
fn diagonal_characters(cs: &CrossSectional, seed: u64) -> Result<Vec<CVec>, AlgebraError> {
    let comp = cs.diagonal_quotient();
    let m = cs.diag_basis.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chars: Vec<CVec> = Vec::new();
    for (k, p) in comp.complement().blocks.iter().enumerate() {
        let d = p.nrows();
        if d == 0 {
            continue;
        }
        let (pv, pvecs) = hermitian_eigen(p);
        let cols: Vec<usize> = (0..d).filter(|&i| pv[i] > 0.5).collect();
        if cols.is_empty() {
            continue;
        }
        let mut u = zeros(d, cols.len());
        for (dst, &src) in cols.iter().enumerate() {
            u.set_column(dst, &pvecs.column(src));
        }
        let ys: Vec<CMat> = cs.diag_basis.iter().map(|x| u.adjoint() * &x.blocks[k] * &u).collect();
        let mut h = zeros(cols.len(), cols.len());
        for y in &ys {
            let (a, b): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            h += (y + y.adjoint()) * re(a) + (y - y.adjoint()) * c(0.0, b);
        }
        let (hv, hvecs) = hermitian_eigen(&h);
        let scale = hv.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        let mut start = 0;
        while start < hv.len() {
            let mut end = start + 1;
            while end < hv.len() && hv[end] - hv[end - 1] < 1e-7 * scale {
                end += 1;
            }
            let w = hvecs.column(start).into_owned();
            let mut chi = CVec::zeros(m);
            for (i, y) in ys.iter().enumerate() {
                let val = w.dotc(&(y * &w));
                let dev = (y * &w - &w * val).norm();
                if dev > 1e-7 * op_norm(y).max(1.0) {
                    return Err(AlgebraError::OracleNotApplicable(
                        "quotient of the diagonal is not commutative".into(),
                    ));
                }
                chi[i] = val;
            }
            if chi.norm() > 1e-9 && !chars.iter().any(|x| (x - &chi).norm() < 1e-7) {
                chars.push(chi);
            }
            start = end;
        }
    }
    Ok(chars)
}

/// Characters of `C*(E)` for a trivial line bundle over a semilattice, one
/// per filter on which the order relations vanish.
#[derive(Clone, Debug)]
pub struct SemilatticeCharacters {
    bundle: FellBundle,
    filters: Vec<Vec<usize>>,
}

impl SemilatticeCharacters {
    pub fn new(b: &FellBundle) -> Result<Self, AlgebraError> {
        let s = b.base();
        if !s.is_semilattice() {
            return Err(AlgebraError::OracleNotApplicable("base is not a semilattice".into()));
        }
        let one = |m: &CMat| m.shape() != (1, 1) || (m[(0, 0)] - re(1.0)).norm() < 1e-12;
        let n = s.size();
        for x in 0..n {
            if b.dim(x) > 1 || !one(b.star_matrix(x)) {
                return Err(AlgebraError::OracleNotApplicable("not a trivial line bundle".into()));
            }
            for y in 0..n {
                let jm = b.j_matrix(y, x);
                if !one(b.mu_matrix(x, y)) || jm.is_some_and(|m| !one(m)) {
                    return Err(AlgebraError::OracleNotApplicable("not a trivial line bundle".into()));
                }
            }
        }
        let gens = na_generators(b);
        let filters = s
            .filters()
            .into_iter()
            .map(|f| f.elements)
            .filter(|f| f.iter().all(|&x| b.dim(x) == 1))
            .filter(|f| {
                (0..gens.ncols()).all(|k| {
                    let v: C64 = f.iter().map(|&x| gens[(b.offset(x), k)]).sum();
                    v.norm() < 1e-12
                })
            })
            .collect();
        Ok(SemilatticeCharacters {
            bundle: b.clone(),
            filters,
        })
    }

    pub fn filters(&self) -> &[Vec<usize>] {
        &self.filters
    }

    pub fn norm(&self, coords: &CVec) -> f64 {
        self.filters
            .iter()
            .map(|f| f.iter().map(|&x| coords[self.bundle.offset(x)]).sum::<C64>().norm())
            .fold(0.0, f64::max)
    }
}

/// The spaces `B_g` of a group grading of the generated algebra.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GradingDecomposition {
    pub dims: Vec<usize>,
    pub product_law: bool,
    pub adjoint_law: bool,
    pub direct_sum: bool,
    pub unit_is_diagonal: bool,
}

impl GradingDecomposition {
    pub fn laws_hold(&self) -> bool {
        self.product_law && self.adjoint_law && self.direct_sum && self.unit_is_diagonal
    }
}

pub fn group_grading_decomposition(
    cs: &CrossSectional,
    g: &Group,
    sigma: &Grading,
) -> Result<GradingDecomposition, AlgebraError> {
    let b = cs.bundle();
    let s = b.base();
    sigma.verify(s, g).map_err(AlgebraError::NotAGrading)?;
    if !cs.a0_zero {
        return Err(AlgebraError::HypothesisViolated(
            "the fiber over the zero element is nonzero".into(),
        ));
    }
    let n = b.total_dim();
    let tol = cs.member_tol();
    let fibers: Vec<OperatorSubspace> = (0..g.order())
        .map(|h| {
            let cols: Vec<usize> = (0..n).filter(|&k| sigma.sigma[b.locate(k).0] == Some(h)).collect();
            let mut m = zeros(n, cols.len());
            for (dst, &k) in cols.iter().enumerate() {
                m[(k, dst)] = re(1.0);
            }
            cs.subspace(&m)
        })
        .collect();
    let ops: Vec<Vec<BlockOperator>> = fibers.iter().map(|f| cs.subspace_ops(f)).collect();
    let mut product_law = true;
    let mut adjoint_law = true;
    for x in 0..g.order() {
        for t in &ops[x] {
            adjoint_law &= fibers[g.inv(x)].contains(&t.adjoint(), tol);
            for y in 0..g.order() {
                for u in &ops[y] {
                    product_law &= fibers[g.mul(x, y)].contains(&t.mul(u), tol);
                }
            }
        }
    }
    let all: Vec<&CMat> = fibers.iter().map(|f| &f.ops).collect();
    let len = cs.basis_mat.nrows();
    let stacked = linalg::hstack(len, &all);
    let direct_sum = stacked.ncols() == n && rank(&stacked, cs.tol()) == n;
    let diag_ops: Vec<BlockOperator> = cs.diag_basis.iter().map(|x| cs.iota(x)).collect();
    let diag = orth(&stack_ops(&diag_ops, len), cs.tol());
    let unit_is_diagonal = same_span(&fibers[g.identity()].ops, &diag, tol);
    Ok(GradingDecomposition {
        dims: fibers.iter().map(|f| f.dim()).collect(),
        product_law,
        adjoint_law,
        direct_sum,
        unit_is_diagonal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{trivial_line_bundle, ZeroFiber};
    use crate::corpus;
    use crate::isg::search_idempotent_pure_grading;

    fn coords(v: &[f64]) -> CVec {
        CVec::from_iterator(v.len(), v.iter().map(|&x| re(x)))
    }

    #[test]
    fn z2_circulants() {
        let b = trivial_line_bundle(&corpus::z2(), ZeroFiber::Full);
        let cs = CrossSectional::new(&b).unwrap();
        assert_eq!(cs.dim(), 2);
        assert_eq!(cs.ideal_ia().dim(), 0);
        let ja = cs.ideal_ja().unwrap();
        assert_eq!(ja.dim(), 0);
        let t = cs.operator(&coords(&[1.0, 1.0]));
        assert!((t.norm() - 2.0).abs() < 1e-12);
        let o = ExelOracle::new(&cs, 0).unwrap();
        assert_eq!(o.character_count(), 1);
        assert!((o.norm(&coords(&[1.0, 1.0])) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn e3_collapses_to_one_dimension() {
        let b = trivial_line_bundle(&corpus::e3(), ZeroFiber::Full);
        let cs = CrossSectional::new(&b).unwrap();
        let ia = cs.ideal_ia();
        assert_eq!(ia.dim(), 2);
        assert!(cs.is_ideal(&ia));
        let q = cs.quotient(&ia).unwrap();
        assert_eq!(q.dim(), 1);
        // delta_0 - delta_e is an order relation
        let t = cs.operator(&coords(&[0.0, -1.0, 1.0]));
        assert!(t.norm() > 0.5);
        assert!(q.norm(&t) < 1e-10);
        let chars = SemilatticeCharacters::new(&b).unwrap();
        assert_eq!(chars.filters().len(), 1);
    }

    #[test]
    fn hypotheses_gate_the_reduced_ideal() {
        let b = trivial_line_bundle(&corpus::i2(), ZeroFiber::Full);
        let cs = CrossSectional::new(&b).unwrap();
        assert!(matches!(cs.ideal_ja(), Err(AlgebraError::HypothesisViolated(_))));
    }

    #[test]
    fn i2_action_ideals_agree() {
        let b = corpus::i2_action();
        let cs = CrossSectional::new(&b).unwrap();
        let ia = cs.ideal_ia();
        let ja = cs.ideal_ja().unwrap();
        let quad = cs.ideal_ja_quadratic().unwrap();
        assert!(ja.same_as(&quad, 1e-8));
        assert!(ja.same_as(&ia, 1e-8));
        assert!(cs.condition_iii().unwrap());
        assert!(cs.ideal_ie().dim() <= ia.dim());
    }

    #[test]
    fn full_ideal_kills_every_norm() {
        let b = trivial_line_bundle(&corpus::z2(), ZeroFiber::Full);
        let cs = CrossSectional::new(&b).unwrap();
        let all = cs.subspace(&linalg::identity(2));
        let q = cs.quotient(&all).unwrap();
        assert_eq!(q.dim(), 0);
        assert!(q.norm(&cs.operator(&coords(&[3.0, -1.0]))) < 1e-12);
    }

    #[test]
    fn non_ideal_is_rejected() {
        let b = trivial_line_bundle(&corpus::z2(), ZeroFiber::Full);
        let cs = CrossSectional::new(&b).unwrap();
        let line = cs.subspace(&CMat::from_column_slice(2, 1, &[re(1.0), re(0.0)]));
        assert!(matches!(cs.quotient(&line), Err(AlgebraError::NotAnIdeal)));
    }

    #[test]
    fn grading_of_the_i2_action() {
        let b = corpus::i2_action();
        let cs = CrossSectional::new(&b).unwrap();
        let g = Group::cyclic(2);
        let sigma = search_idempotent_pure_grading(b.base(), &g).unwrap();
        let d = group_grading_decomposition(&cs, &g, &sigma).unwrap();
        assert_eq!(d.dims, vec![4, 4]);
        assert!(d.laws_hold());
    }

    #[test]
    fn expectation_identities_on_i2_action() {
        let cs = CrossSectional::new(&corpus::i2_action()).unwrap();
        let r = cs.expectation_checks(0, 10).unwrap();
        assert!(r.formula < 1e-10 && r.covariance < 1e-10 && r.bimodule < 1e-10);
        assert!(r.idempotent < 1e-10 && r.contraction_excess <= 1e-12);
    }
}
