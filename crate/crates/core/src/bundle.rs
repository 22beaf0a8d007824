//! Fell bundles over finite inverse semigroups with finite-dimensional fibers.
//!
//! Every fiber `A_s` is a coordinate space `C^{d_s}`. The operations are
//! stored as matrices:
//!
//! * `mu(s, t)`: `d_st x (d_s d_t)`, acting on `kron(a, b)`;
//! * `star(s)`: `d_{s*} x d_s`, with `a* = star(s) * conj(a)`;
//! * `j(t, s)`: `d_t x d_s`, present exactly when `s <= t`.
//!
//! Fiber norms are `||a|| = sqrt(||a* a||)` in the C*-algebra `A_{s*s}`.

use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fdalg::{basis, AlgIdeal, FdCStar, FdError};
use crate::isg::{InverseSemigroup, IsgError};
use crate::linalg::{
    self, columns_in_span, hermitian_eigen, in_span, kron, null_space, orth, random_cvec, rank, same_span, zeros, CMat,
    CVec, Tolerances,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BundleError {
    #[error(transparent)]
    Semigroup(#[from] IsgError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("unit fiber over {e} is not a C*-algebra: {source}")]
    UnitFiber { e: usize, source: FdError },
    #[error("not a partial homomorphism: {law} fails at ({s},{t})")]
    NotPartialHomomorphism { law: &'static str, s: usize, t: usize },
    #[error("ideal images span only {rank} of {dim} dimensions")]
    ImagesDontSpan { rank: usize, dim: usize },
    #[error("J_{s} is not contained in J_{t} although {s} <= {t}")]
    IdealMismatch { s: usize, t: usize },
    #[error("sections belong to different bundles")]
    BundleMismatch,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("degenerate module Gram matrix over idempotent {e}")]
    DegenerateGram { e: usize },
}

/// A Fell bundle with all operations in coordinates.
#[derive(Clone, Debug)]
pub struct FellBundle {
    base: InverseSemigroup,
    dims: Vec<usize>,
    offsets: Vec<usize>,
    mu: Vec<CMat>,
    star: Vec<CMat>,
    j: Vec<Option<CMat>>,
    tol: Tolerances,
    units: Vec<OnceLock<Result<FdCStar, FdError>>>,
}

impl FellBundle {
    /// Assembles a bundle, checking only shapes. Use [`validate_bundle`] for the axioms.
    ///
    /// `mu` is indexed by `s*n + t`, `star` by `s`, `j` by `t*n + s`.
    pub fn new(
        base: InverseSemigroup,
        dims: Vec<usize>,
        mu: Vec<CMat>,
        star: Vec<CMat>,
        j: Vec<Option<CMat>>,
        tol: Tolerances,
    ) -> Result<Self, BundleError> {
        let n = base.size();
        let bad = |m: String| Err(BundleError::Dimension(m));
        if dims.len() != n {
            return bad(format!("{} fiber dimensions for {n} elements", dims.len()));
        }
        if mu.len() != n * n || star.len() != n || j.len() != n * n {
            return bad("mu, star and j must be indexed over all elements".into());
        }
        for s in 0..n {
            for t in 0..n {
                let st = base.mul(s, t);
                if mu[s * n + t].shape() != (dims[st], dims[s] * dims[t]) {
                    return bad(format!(
                        "mu({s},{t}) is {:?}, expected ({}, {})",
                        mu[s * n + t].shape(),
                        dims[st],
                        dims[s] * dims[t]
                    ));
                }
            }
            if star[s].shape() != (dims[base.inv(s)], dims[s]) {
                return bad(format!("star({s}) has shape {:?}", star[s].shape()));
            }
        }
        for t in 0..n {
            for s in 0..n {
                match (&j[t * n + s], base.natural_leq(s, t)) {
                    (Some(m), true) if m.shape() == (dims[t], dims[s]) => {}
                    (Some(m), true) => return bad(format!("j({t},{s}) has shape {:?}", m.shape())),
                    (None, true) => return bad(format!("missing j({t},{s})")),
                    (Some(_), false) => return bad(format!("j({t},{s}) given but {s} is not below {t}")),
                    (None, false) => {}
                }
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0;
        for &d in &dims {
            offsets.push(acc);
            acc += d;
        }
        offsets.push(acc);
        let units = (0..n).map(|_| OnceLock::new()).collect();
        Ok(FellBundle {
            base,
            dims,
            offsets,
            mu,
            star,
            j,
            tol,
            units,
        })
    }

    /// Builds from closures; `j` is only called for `s <= t`.
    pub fn from_fn(
        base: InverseSemigroup,
        dims: Vec<usize>,
        mu: impl Fn(usize, usize) -> CMat,
        star: impl Fn(usize) -> CMat,
        j: impl Fn(usize, usize) -> CMat,
        tol: Tolerances,
    ) -> Result<Self, BundleError> {
        let n = base.size();
        let mut mus = Vec::with_capacity(n * n);
        let mut js = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                mus.push(mu(a, b));
                js.push(base.natural_leq(b, a).then(|| j(a, b)));
            }
        }
        let stars = (0..n).map(star).collect();
        FellBundle::new(base, dims, mus, stars, js, tol)
    }

    pub fn base(&self) -> &InverseSemigroup {
        &self.base
    }

    pub fn tol(&self) -> Tolerances {
        self.tol
    }

    pub fn with_tol(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self.units = (0..self.base.size()).map(|_| OnceLock::new()).collect();
        self
    }

    #[inline]
    pub fn dim(&self, s: usize) -> usize {
        self.dims[s]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// `dim C_c = sum_s d_s`.
    pub fn total_dim(&self) -> usize {
        self.offsets[self.base.size()]
    }

    /// Start of `A_s` in the stacked coordinates of a section.
    #[inline]
    pub fn offset(&self, s: usize) -> usize {
        self.offsets[s]
    }

    /// Element and fiber index of a stacked coordinate.
    pub fn locate(&self, k: usize) -> (usize, usize) {
        let s = self.offsets.partition_point(|&o| o <= k) - 1;
        (s, k - self.offsets[s])
    }

    pub fn mu_matrix(&self, s: usize, t: usize) -> &CMat {
        &self.mu[s * self.base.size() + t]
    }

    pub fn star_matrix(&self, s: usize) -> &CMat {
        &self.star[s]
    }

    /// `j_{t,s}`, or `None` unless `s <= t`.
    pub fn j_matrix(&self, t: usize, s: usize) -> Option<&CMat> {
        self.j[t * self.base.size() + s].as_ref()
    }

    /// `a . b` for `a in A_s`, `b in A_t`.
    pub fn mul(&self, s: usize, a: &CVec, t: usize, b: &CVec) -> CVec {
        self.mu_matrix(s, t) * kron(a, b)
    }

    /// `a*` in `A_{s*}`.
    pub fn star(&self, s: usize, a: &CVec) -> CVec {
        &self.star[s] * a.conjugate()
    }

    /// `a* a` in `A_{s*s}`.
    pub fn module_square(&self, s: usize, a: &CVec) -> CVec {
        self.mul(self.base.inv(s), &self.star(s, a), s, a)
    }

    /// The C*-algebra `A_e` for an idempotent `e`, built on first use.
    pub fn unit_fiber(&self, e: usize) -> Result<&FdCStar, BundleError> {
        assert!(self.base.is_idempotent(e), "unit fibers live over idempotents");
        self.units[e]
            .get_or_init(|| {
                let d = self.dims[e];
                let m = self.mu_matrix(e, e);
                let mut flat = Vec::with_capacity(d * d * d);
                for ij in 0..d * d {
                    for k in 0..d {
                        flat.push(m[(k, ij)]);
                    }
                }
                FdCStar::build(d, &flat, self.star[e].clone(), self.tol)
            })
            .as_ref()
            .map_err(|source| BundleError::UnitFiber {
                e,
                source: source.clone(),
            })
    }

    /// `||a|| = sqrt(||a* a||)`; NaN when `A_{s*s}` is not a C*-algebra.
    pub fn fiber_norm(&self, s: usize, a: &CVec) -> f64 {
        if self.dims[s] == 0 {
            return 0.0;
        }
        let e = self.base.source_idem(s);
        match self.unit_fiber(e) {
            Ok(alg) => alg.norm(&self.module_square(s, a)).sqrt(),
            Err(_) => f64::NAN,
        }
    }

    /// Unit of `A_e`.
    pub fn unit_of(&self, e: usize) -> Result<CVec, BundleError> {
        Ok(self.unit_fiber(e)?.unit().clone())
    }

    pub fn zero_fiber_is_zero(&self) -> bool {
        self.base.zero().is_none_or(|z| self.dims[z] == 0)
    }
}

/// Trivial line bundle `A_s = C`, optionally with `A_0 = {0}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ZeroFiber {
    /// `A_0 = C` like every other fiber.
    #[default]
    Full,
    /// `A_0 = {0}`.
    Zero,
}

/// `A_s = C`, scalar product, conjugation, identity inclusions.
pub fn trivial_line_bundle(s: &InverseSemigroup, zero: ZeroFiber) -> FellBundle {
    let n = s.size();
    let dims: Vec<usize> = (0..n)
        .map(|x| usize::from(!(zero == ZeroFiber::Zero && s.is_zero(x))))
        .collect();
    let ones = |r: usize, c: usize| CMat::from_element(r, c, linalg::re(1.0));
    FellBundle::from_fn(
        s.clone(),
        dims.clone(),
        |a, b| ones(dims[s.mul(a, b)], dims[a] * dims[b]),
        |a| ones(dims[s.inv(a)], dims[a]),
        |t, x| ones(dims[t], dims[x]),
        Tolerances::default(),
    )
    .expect("trivial line bundle has consistent shapes")
}

/// A partial linear map: a matrix meaningful on an orthonormal domain.
#[derive(Clone, Debug)]
pub struct PartialLinearMap {
    pub domain: CMat,
    pub matrix: CMat,
}

impl PartialLinearMap {
    /// `self o other` on `{x in dom other : other(x) in dom self}`.
    pub fn compose(&self, other: &PartialLinearMap, tol: f64) -> PartialLinearMap {
        let d = self.matrix.nrows();
        let image = &other.matrix * &other.domain;
        let proj = &self.domain * self.domain.adjoint();
        let off = (linalg::identity(d) - proj) * image;
        let kernel = null_space(&off, tol);
        let domain = orth(&(&other.domain * kernel), tol);
        PartialLinearMap {
            domain,
            matrix: &self.matrix * &other.matrix,
        }
    }

    pub fn same_as(&self, other: &PartialLinearMap, tol: f64) -> bool {
        if !same_span(&self.domain, &other.domain, tol) {
            return false;
        }
        let diff = (&self.matrix - &other.matrix) * &self.domain;
        diff.norm() <= tol * self.matrix.norm().max(1.0)
    }
}

/// A partial action of `S` on a finite-dimensional C*-algebra by restrictions of matrices.
#[derive(Clone, Debug)]
pub struct PartialActionSpec {
    pub algebra: FdCStar,
    /// `J_s`, one ideal per element.
    pub ideals: Vec<AlgIdeal>,
    /// `beta_s`, meaningful on `J_{s*}` and mapping it onto `J_s`.
    pub beta: Vec<CMat>,
}

impl PartialActionSpec {
    /// `J_s` is the ideal generated by `ideal_gens[s]`.
    pub fn new(algebra: FdCStar, ideal_gens: &[Vec<CVec>], beta: Vec<CMat>) -> Self {
        let ideals = ideal_gens.iter().map(|g| algebra.ideal_generated(g)).collect();
        PartialActionSpec { algebra, ideals, beta }
    }

    fn partial_map(&self, s: &InverseSemigroup, x: usize) -> PartialLinearMap {
        PartialLinearMap {
            domain: self.ideals[s.inv(x)].basis.clone(),
            matrix: self.beta[x].clone(),
        }
    }

    /// Checks the partial-action laws against the base semigroup.
    pub fn validate(&self, s: &InverseSemigroup) -> Result<(), BundleError> {
        let n = s.size();
        let a = &self.algebra;
        let d = a.dim();
        let tol = a.tol();
        if self.ideals.len() != n || self.beta.len() != n {
            return Err(BundleError::Dimension(
                "one ideal and one beta per element required".into(),
            ));
        }
        if self.beta.iter().any(|b| b.shape() != (d, d)) {
            return Err(BundleError::Dimension("beta matrices must be d x d".into()));
        }
        let law = |law, s, t| Err(BundleError::NotPartialHomomorphism { law, s, t });
        for x in 0..n {
            let dom = &self.ideals[s.inv(x)].basis;
            let img = &self.ideals[x].basis;
            let mapped = &self.beta[x] * dom;
            if dom.ncols() != img.ncols() || !columns_in_span(img, &mapped, tol.rank) {
                return law("beta_s maps J_{s*} onto J_s", x, x);
            }
            if rank(&mapped, tol.rank) != dom.ncols() {
                return law("beta_s is injective on J_{s*}", x, x);
            }
            for p in 0..dom.ncols() {
                let u = dom.column(p).into_owned();
                let bu = &self.beta[x] * &u;
                if (&self.beta[x] * a.star(&u) - a.star(&bu)).norm() > tol.identity * 10.0 {
                    return law("beta_s preserves the involution", x, x);
                }
                for q in 0..dom.ncols() {
                    let v = dom.column(q).into_owned();
                    let lhs = &self.beta[x] * a.mul(&u, &v);
                    let rhs = a.mul(&bu, &(&self.beta[x] * &v));
                    if (lhs - rhs).norm() > tol.identity * 10.0 {
                        return law("beta_s is multiplicative", x, x);
                    }
                }
            }
            let back = &self.beta[s.inv(x)] * &mapped;
            if (back - dom).norm() > tol.identity * 10.0 {
                return law("beta_{s*} inverts beta_s", x, s.inv(x));
            }
            if s.is_idempotent(x) && (&mapped - dom).norm() > tol.identity * 10.0 {
                return law("beta_e is the identity", x, x);
            }
        }
        for x in 0..n {
            for y in 0..n {
                if s.natural_leq(x, y) && !columns_in_span(&self.ideals[y].basis, &self.ideals[x].basis, tol.rank) {
                    return Err(BundleError::IdealMismatch { s: x, t: y });
                }
            }
        }
        let maps: Vec<PartialLinearMap> = (0..n).map(|x| self.partial_map(s, x)).collect();
        let eps = tol.rank.max(1e-9) * 100.0;
        for x in 0..n {
            for y in 0..n {
                let (xs, ys) = (s.inv(x), s.inv(y));
                let xy = s.mul(x, y);
                let lhs = maps[x].compose(&maps[y], eps).compose(&maps[ys], eps);
                let rhs = maps[xy].compose(&maps[ys], eps);
                if !lhs.same_as(&rhs, eps) {
                    return law("beta_s beta_t beta_t* = beta_st beta_t*", x, y);
                }
                let lhs = maps[xs].compose(&maps[x], eps).compose(&maps[y], eps);
                let rhs = maps[xs].compose(&maps[xy], eps);
                if !lhs.same_as(&rhs, eps) {
                    return law("beta_s* beta_s beta_t = beta_s* beta_st", x, y);
                }
            }
            let lhs = maps[x].compose(&maps[s.inv(x)], eps).compose(&maps[x], eps);
            if !lhs.same_as(&maps[x], eps) {
                return law("beta_s beta_s* beta_s = beta_s", x, x);
            }
        }
        let all: Vec<&CMat> = self.ideals.iter().map(|i| &i.basis).collect();
        let r = rank(&linalg::hstack(d, &all), tol.rank);
        if r != d {
            return Err(BundleError::ImagesDontSpan { rank: r, dim: d });
        }
        Ok(())
    }
}

/// The bundle `A_s = J_s` of a partial action, with
/// `a . b = beta_s(beta_s^{-1}(a) b)`, `a* = beta_s^{-1}(a*)` and `j` the inclusions.
pub fn bundle_from_partial_action(s: &InverseSemigroup, spec: &PartialActionSpec) -> Result<FellBundle, BundleError> {
    spec.validate(s)?;
    let a = &spec.algebra;
    let v: Vec<&CMat> = spec.ideals.iter().map(|i| &i.basis).collect();
    let dims: Vec<usize> = v.iter().map(|m| m.ncols()).collect();
    let mu = |x: usize, y: usize| {
        let xy = s.mul(x, y);
        let mut m = zeros(dims[xy], dims[x] * dims[y]);
        for i in 0..dims[x] {
            let pre = &spec.beta[s.inv(x)] * v[x].column(i);
            for k in 0..dims[y] {
                let prod = a.mul(&pre, &v[y].column(k).into_owned());
                let val = v[xy].adjoint() * (&spec.beta[x] * prod);
                m.set_column(i * dims[y] + k, &val);
            }
        }
        m
    };
    let star = |x: usize| {
        let xs = s.inv(x);
        let mut m = zeros(dims[xs], dims[x]);
        for i in 0..dims[x] {
            let st = a.star(&v[x].column(i).into_owned());
            m.set_column(i, &(v[xs].adjoint() * (&spec.beta[xs] * st)));
        }
        m
    };
    let j = |t: usize, x: usize| v[t].adjoint() * v[x];
    FellBundle::from_fn(s.clone(), dims.clone(), mu, star, j, a.tol())
}

/// The restriction of a bundle to the idempotents, with the embedding of
/// new element indices into the old ones.
pub fn restrict_to_idempotents(b: &FellBundle) -> (FellBundle, Vec<usize>) {
    let (e, emb) = b.base().semilattice();
    let n = e.size();
    let dims: Vec<usize> = emb.iter().map(|&x| b.dim(x)).collect();
    let r = FellBundle::from_fn(
        e,
        dims,
        |x, y| b.mu_matrix(emb[x], emb[y]).clone(),
        |x| b.star_matrix(emb[x]).clone(),
        |t, x| b.j_matrix(emb[t], emb[x]).expect("order is inherited").clone(),
        b.tol(),
    )
    .expect("restriction inherits consistent shapes");
    debug_assert_eq!(r.base().size(), n);
    (r, emb)
}

/// Pairs `(s, t)` for which `span A_s . A_t` is a proper subspace of `A_st`.
pub fn saturation_failures(b: &FellBundle) -> Vec<(usize, usize)> {
    let n = b.base().size();
    let mut out = Vec::new();
    for s in 0..n {
        for t in 0..n {
            let st = b.base().mul(s, t);
            if rank(b.mu_matrix(s, t), b.tol().rank) < b.dim(st) {
                out.push((s, t));
            }
        }
    }
    out
}

pub fn is_saturated(b: &FellBundle) -> bool {
    saturation_failures(b).is_empty()
}

/// The named checks performed by [`validate_bundle`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axiom {
    StarIsometric,
    InclusionIsometric,
    Associativity,
    StarAntiMultiplicative,
    StarInvolutive,
    Submultiplicative,
    CStarIdentity,
    Positivity,
    InclusionTransitive,
    InclusionCompatible,
    InclusionDiagonal,
    InclusionIdeal,
    UnitAbsorption,
    UnitFiberCStar,
    HilbertModule,
}

impl Axiom {
    pub const ALL: [Axiom; 15] = [
        Axiom::StarIsometric,
        Axiom::InclusionIsometric,
        Axiom::Associativity,
        Axiom::StarAntiMultiplicative,
        Axiom::StarInvolutive,
        Axiom::Submultiplicative,
        Axiom::CStarIdentity,
        Axiom::Positivity,
        Axiom::InclusionTransitive,
        Axiom::InclusionCompatible,
        Axiom::InclusionDiagonal,
        Axiom::InclusionIdeal,
        Axiom::UnitAbsorption,
        Axiom::UnitFiberCStar,
        Axiom::HilbertModule,
    ];

    /// Conventional numbering of the Fell bundle axioms (derived ones included).
    pub fn numeral(self) -> &'static str {
        match self {
            Axiom::StarIsometric => "iii",
            Axiom::InclusionIsometric => "iv",
            Axiom::Associativity => "v",
            Axiom::StarAntiMultiplicative => "vi",
            Axiom::StarInvolutive => "vii",
            Axiom::Submultiplicative => "viii",
            Axiom::CStarIdentity => "ix",
            Axiom::Positivity => "x",
            Axiom::InclusionTransitive => "xi",
            Axiom::InclusionCompatible => "xii",
            Axiom::InclusionDiagonal => "xiii",
            Axiom::InclusionIdeal => "xiv",
            Axiom::UnitAbsorption => "unit-absorption",
            Axiom::UnitFiberCStar => "unit-fiber",
            Axiom::HilbertModule => "hilbert-module",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Axiom::StarIsometric => "involution is isometric",
            Axiom::InclusionIsometric => "inclusions are isometric",
            Axiom::Associativity => "multiplication is associative",
            Axiom::StarAntiMultiplicative => "(ab)* = b* a*",
            Axiom::StarInvolutive => "a** = a",
            Axiom::Submultiplicative => "||ab|| <= ||a|| ||b||",
            Axiom::CStarIdentity => "||a* a|| = ||a||^2 and a* a = 0 only for a = 0",
            Axiom::Positivity => "a* a >= 0",
            Axiom::InclusionTransitive => "j_tr = j_ts j_sr",
            Axiom::InclusionCompatible => "inclusions commute with product and involution",
            Axiom::InclusionDiagonal => "j_ss = id",
            Axiom::InclusionIdeal => "j_fe(A_e) is an ideal of A_f",
            Axiom::UnitAbsorption => "j_fe(c) d = cd for e <= f",
            Axiom::UnitFiberCStar => "each A_e is a C*-algebra",
            Axiom::HilbertModule => "A_s is a positive definite Hilbert A_{s*s}-module",
        }
    }
}

/// Outcome of one check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub axiom: Axiom,
    pub numeral: String,
    pub passed: bool,
    /// Largest deviation seen (relative where the check is scale dependent).
    pub max_deviation: f64,
    /// Element indices of the first failure.
    pub witness: Option<Vec<usize>>,
    pub detail: Option<String>,
}

/// Per-axiom validation report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BundleReport {
    pub checks: Vec<CheckOutcome>,
    pub seed: u64,
    pub samples: usize,
}

impl BundleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, axiom: Axiom) -> &CheckOutcome {
        self.checks
            .iter()
            .find(|c| c.axiom == axiom)
            .expect("every axiom is checked")
    }
}

struct Tracker {
    axiom: Axiom,
    max_dev: f64,
    witness: Option<Vec<usize>>,
    detail: Option<String>,
    limit: f64,
}

impl Tracker {
    fn new(axiom: Axiom, limit: f64) -> Self {
        Tracker {
            axiom,
            max_dev: 0.0,
            witness: None,
            detail: None,
            limit,
        }
    }

    fn see(&mut self, dev: f64, witness: &[usize]) {
        let dev = if dev.is_nan() { f64::INFINITY } else { dev };
        if dev > self.max_dev {
            self.max_dev = dev;
        }
        if dev > self.limit && self.witness.is_none() {
            self.witness = Some(witness.to_vec());
        }
    }

    fn fail(&mut self, witness: &[usize], detail: String) {
        if self.witness.is_none() {
            self.witness = Some(witness.to_vec());
            self.detail = Some(detail);
        }
        self.max_dev = f64::INFINITY;
    }

    fn finish(self) -> CheckOutcome {
        CheckOutcome {
            axiom: self.axiom,
            numeral: self.axiom.numeral().to_string(),
            passed: self.witness.is_none(),
            max_deviation: self.max_dev,
            witness: self.witness,
            detail: self.detail,
        }
    }
}

/// Options for the sampled parts of [`validate_bundle`].
#[derive(Clone, Copy, Debug)]
pub struct ValidationOptions {
    pub seed: u64,
    /// Random elements drawn per fiber (per pair for two-argument checks).
    pub samples: usize,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions { seed: 0, samples: 3 }
    }
}

/// Checks every axiom. Algebraic identities run on all basis tuples; norm
/// inequalities and positivity additionally run on seeded random samples.
pub fn validate_bundle(b: &FellBundle, opts: ValidationOptions) -> BundleReport {
    let s = b.base();
    let n = s.size();
    let tol = b.tol();
    let id_lim = tol.identity * 10.0;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = Vec::new();

    // unit fibers first; norm-based checks depend on them
    let mut unit = Tracker::new(Axiom::UnitFiberCStar, 0.0);
    for &e in s.idempotents() {
        if let Err(err) = b.unit_fiber(e) {
            unit.fail(&[e], err.to_string());
        }
    }
    let units_ok = unit.witness.is_none();
    checks.push(unit.finish());

    let scale = |m: &CMat| m.norm().max(1.0);

    let mut assoc = Tracker::new(Axiom::Associativity, id_lim);
    for r in 0..n {
        for x in 0..n {
            let rx = s.mul(r, x);
            let m_rx = b.mu_matrix(r, x);
            for t in 0..n {
                let xt = s.mul(x, t);
                let lhs = b.mu_matrix(rx, t) * m_rx.kronecker(&linalg::identity(b.dim(t)));
                let rhs = b.mu_matrix(r, xt) * linalg::identity(b.dim(r)).kronecker(b.mu_matrix(x, t));
                assoc.see((&lhs - &rhs).norm() / scale(&lhs).max(scale(&rhs)), &[r, x, t]);
            }
        }
    }
    checks.push(assoc.finish());

    let mut anti = Tracker::new(Axiom::StarAntiMultiplicative, id_lim);
    for r in 0..n {
        for x in 0..n {
            let rx = s.mul(r, x);
            let (rs, xs) = (s.inv(r), s.inv(x));
            for i in 0..b.dim(r) {
                for k in 0..b.dim(x) {
                    let (a, c) = (basis(b.dim(r), i), basis(b.dim(x), k));
                    let lhs = b.star(rx, &b.mul(r, &a, x, &c));
                    let rhs = b.mul(xs, &b.star(x, &c), rs, &b.star(r, &a));
                    anti.see((lhs - rhs).norm(), &[r, x]);
                }
            }
        }
    }
    checks.push(anti.finish());

    let mut invol = Tracker::new(Axiom::StarInvolutive, id_lim);
    for x in 0..n {
        let back = b.star_matrix(s.inv(x)) * b.star_matrix(x).conjugate();
        invol.see((back - linalg::identity(b.dim(x))).norm(), &[x]);
    }
    checks.push(invol.finish());

    let mut diag = Tracker::new(Axiom::InclusionDiagonal, id_lim);
    for x in 0..n {
        let m = b.j_matrix(x, x).expect("s <= s");
        diag.see((m - linalg::identity(b.dim(x))).norm(), &[x]);
    }
    checks.push(diag.finish());

    let mut trans = Tracker::new(Axiom::InclusionTransitive, id_lim);
    for r in 0..n {
        for x in 0..n {
            if !s.natural_leq(r, x) {
                continue;
            }
            for t in 0..n {
                if !s.natural_leq(x, t) {
                    continue;
                }
                let lhs = b.j_matrix(t, r).expect("transitivity of the order");
                let rhs = b.j_matrix(t, x).unwrap() * b.j_matrix(x, r).unwrap();
                trans.see((lhs - rhs).norm(), &[r, x, t]);
            }
        }
    }
    checks.push(trans.finish());

    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|t| (0..n).map(move |x| (x, t)))
        .filter(|&(x, t)| s.natural_leq(x, t))
        .collect();
    let mut compat = Tracker::new(Axiom::InclusionCompatible, id_lim);
    for &(r, r2) in &pairs {
        for &(x, x2) in &pairs {
            let (rx, rx2) = (s.mul(r, x), s.mul(r2, x2));
            let j_big = b.j_matrix(rx2, rx).expect("order is compatible with products");
            let lhs = j_big * b.mu_matrix(r, x);
            let rhs = b.mu_matrix(r2, x2) * b.j_matrix(r2, r).unwrap().kronecker(b.j_matrix(x2, x).unwrap());
            compat.see((&lhs - &rhs).norm() / scale(&lhs).max(scale(&rhs)), &[r, r2, x, x2]);
        }
        // j_{r2*, r*} *_r = *_{r2} j_{r2, r}
        let jstar = b
            .j_matrix(s.inv(r2), s.inv(r))
            .expect("order is compatible with inverses");
        let lhs = jstar * b.star_matrix(r);
        let rhs = b.star_matrix(r2) * b.j_matrix(r2, r).unwrap().conjugate();
        compat.see((lhs - rhs).norm(), &[r, r2]);
    }
    checks.push(compat.finish());

    let mut absorb = Tracker::new(Axiom::UnitAbsorption, id_lim);
    let mut ideal = Tracker::new(Axiom::InclusionIdeal, id_lim);
    for &(e, f) in &pairs {
        if !s.is_idempotent(f) {
            continue;
        }
        let (de, df) = (b.dim(e), b.dim(f));
        let jfe = b.j_matrix(f, e).unwrap();
        let lhs = b.mu_matrix(f, e) * jfe.kronecker(&linalg::identity(de));
        absorb.see((lhs - b.mu_matrix(e, e)).norm(), &[e, f]);
        let img = orth(jfe, tol.rank);
        for i in 0..df {
            for k in 0..img.ncols() {
                let (a, c) = (basis(df, i), img.column(k).into_owned());
                for p in [b.mul(f, &a, f, &c), b.mul(f, &c, f, &a)] {
                    if !in_span(&img, &p, tol.rank.max(1e-9) * 10.0) {
                        ideal.fail(&[e, f], "A_f j(A_e) leaves j(A_e)".into());
                    }
                }
            }
        }
        for k in 0..img.ncols() {
            let c = img.column(k).into_owned();
            if !in_span(&img, &b.star(f, &c), tol.rank.max(1e-9) * 10.0) {
                ideal.fail(&[e, f], "j(A_e) is not self-adjoint".into());
            }
        }
    }
    checks.push(absorb.finish());
    checks.push(ideal.finish());

    // Norm-based checks need C*-algebras for the unit fibers.
    let mut module = Tracker::new(Axiom::HilbertModule, 0.0);
    let mut cstar = Tracker::new(Axiom::CStarIdentity, id_lim);
    let mut pos = Tracker::new(Axiom::Positivity, 0.0);
    let mut star_iso = Tracker::new(Axiom::StarIsometric, id_lim);
    let mut j_iso = Tracker::new(Axiom::InclusionIsometric, id_lim);
    let mut submult = Tracker::new(Axiom::Submultiplicative, id_lim);
    if units_ok {
        let samples: Vec<Vec<CVec>> = (0..n)
            .map(|x| {
                let d = b.dim(x);
                let mut v: Vec<CVec> = (0..d).map(|i| basis(d, i)).collect();
                if d > 0 {
                    v.extend((0..opts.samples).map(|_| random_cvec(&mut rng, d)));
                }
                v
            })
            .collect();
        for (x, xs) in samples.iter().enumerate() {
            let d = b.dim(x);
            if d == 0 {
                continue;
            }
            let e = s.source_idem(x);
            let alg = b.unit_fiber(e).expect("checked above");
            let g = CMat::from_fn(d, d, |i, k| {
                let sq = b.mul(s.inv(x), &b.star(x, &basis(d, i)), x, &basis(d, k));
                alg.trace_form(&sq)
            });
            let (vals, _) = hermitian_eigen(&g);
            let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if vals[0] <= tol.rank * top.max(1.0) {
                module.fail(&[x], format!("module Gram eigenvalue {:.3e}", vals[0]));
                cstar.fail(&[x], "a* a = 0 for some nonzero a".into());
            }
            for a in xs {
                let sq = b.module_square(x, a);
                let nrm = alg.norm(&sq);
                if !alg.is_positive(&sq) {
                    pos.fail(&[x], "a* a is not positive".into());
                }
                let sq2 = alg.mul(&alg.star(&sq), &sq);
                cstar.see((alg.norm(&sq2) - nrm * nrm).abs() / nrm.powi(2).max(1.0), &[x]);
                let na = nrm.sqrt();
                let nas = b.fiber_norm(s.inv(x), &b.star(x, a));
                star_iso.see((nas - na).abs() / na.max(1.0), &[x]);
            }
        }
        for &(x, t) in &pairs {
            for a in &samples[x] {
                let na = b.fiber_norm(x, a);
                let nj = b.fiber_norm(t, &(b.j_matrix(t, x).unwrap() * a));
                j_iso.see((nj - na).abs() / na.max(1.0), &[x, t]);
            }
        }
        for r in 0..n {
            for x in 0..n {
                let rx = s.mul(r, x);
                for a in &samples[r] {
                    let na = b.fiber_norm(r, a);
                    for c in &samples[x] {
                        let nab = b.fiber_norm(rx, &b.mul(r, a, x, c));
                        let bound = na * b.fiber_norm(x, c);
                        submult.see((nab - bound).max(0.0) / bound.max(1.0), &[r, x]);
                    }
                }
            }
        }
    } else {
        for t in [
            &mut module,
            &mut cstar,
            &mut pos,
            &mut star_iso,
            &mut j_iso,
            &mut submult,
        ] {
            t.fail(&[], "skipped: some unit fiber is not a C*-algebra".into());
        }
    }
    checks.push(module.finish());
    checks.push(cstar.finish());
    checks.push(pos.finish());
    checks.push(star_iso.finish());
    checks.push(j_iso.finish());
    checks.push(submult.finish());

    checks.sort_by_key(|c| Axiom::ALL.iter().position(|&a| a == c.axiom));
    BundleReport {
        checks,
        seed: opts.seed,
        samples: opts.samples,
    }
}
