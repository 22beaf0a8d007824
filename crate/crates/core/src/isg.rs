//! Finite inverse semigroups given by multiplication tables.
//!
//! Elements are dense indices `0..n`. Validation derives the inversion map,
//! the idempotent semilattice, the zero and the natural partial order once;
//! every later query is a table lookup.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IsgError {
    #[error("empty multiplication table")]
    Empty,
    #[error("row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("entry ({row},{col}) = {value} is out of range 0..{n}")]
    NotTotal {
        row: usize,
        col: usize,
        value: usize,
        n: usize,
    },
    #[error("not associative: ({a}*{b})*{c} != {a}*({b}*{c})")]
    NotAssociative { a: usize, b: usize, c: usize },
    #[error("not an inverse semigroup: element {s} has no inverse")]
    NoInverse { s: usize },
    #[error("not an inverse semigroup: idempotents {e} and {f} do not commute")]
    IdempotentsDontCommute { e: usize, f: usize },
    #[error("element {0} is not an idempotent")]
    NotIdempotent(usize),
    #[error("element index {0} out of range")]
    OutOfRange(usize),
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("subset is not closed under multiplication: {a}*{b} = {ab}")]
    NotClosed { a: usize, b: usize, ab: usize },
}

/// A total binary operation on `0..n`, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MulTable {
    n: usize,
    prod: Vec<usize>,
}

impl MulTable {
    /// Builds a table from rows; row `s`, column `t` holds `st`.
    pub fn new(rows: &[Vec<usize>]) -> Result<Self, IsgError> {
        let n = rows.len();
        if n == 0 {
            return Err(IsgError::Empty);
        }
        let mut prod = Vec::with_capacity(n * n);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(IsgError::NotSquare { row, len: r.len(), n });
            }
            for (col, &value) in r.iter().enumerate() {
                if value >= n {
                    return Err(IsgError::NotTotal { row, col, value, n });
                }
                prod.push(value);
            }
        }
        Ok(MulTable { n, prod })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> usize) -> Result<Self, IsgError> {
        let rows: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| f(a, b)).collect()).collect();
        MulTable::new(&rows)
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.prod[a * self.n + b]
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        self.prod.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    /// First triple (in lexicographic order) violating associativity.
    pub fn associativity_witness(&self) -> Option<(usize, usize, usize)> {
        let n = self.n;
        for a in 0..n {
            for b in 0..n {
                let ab = self.mul(a, b);
                for c in 0..n {
                    if self.mul(ab, c) != self.mul(a, self.mul(b, c)) {
                        return Some((a, b, c));
                    }
                }
            }
        }
        None
    }
}

/// A validated finite inverse semigroup with all derived structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InverseSemigroup {
    table: MulTable,
    inv: Vec<usize>,
    is_idem: Vec<bool>,
    idempotents: Vec<usize>,
    zero: Option<usize>,
    leq: Vec<bool>,
    labels: Vec<String>,
}

/// Validates a table as an inverse semigroup.
///
/// Unique inverses are checked as regularity plus commuting idempotents.
pub fn validate_inverse_semigroup(table: MulTable) -> Result<InverseSemigroup, IsgError> {
    InverseSemigroup::new(table)
}

impl InverseSemigroup {
    pub fn new(table: MulTable) -> Result<Self, IsgError> {
        if let Some((a, b, c)) = table.associativity_witness() {
            return Err(IsgError::NotAssociative { a, b, c });
        }
        let n = table.size();
        let is_idem: Vec<bool> = (0..n).map(|s| table.mul(s, s) == s).collect();
        let idempotents: Vec<usize> = (0..n).filter(|&s| is_idem[s]).collect();
        for &e in &idempotents {
            for &f in &idempotents {
                if table.mul(e, f) != table.mul(f, e) {
                    return Err(IsgError::IdempotentsDontCommute { e, f });
                }
            }
        }
        let mut inv = vec![usize::MAX; n];
        for (s, slot) in inv.iter_mut().enumerate() {
            // with commuting idempotents the inverse of a regular element is unique
            let found = (0..n).find(|&t| table.mul(table.mul(s, t), s) == s && table.mul(table.mul(t, s), t) == t);
            match found {
                Some(t) => *slot = t,
                None => return Err(IsgError::NoInverse { s }),
            }
        }
        debug_assert!((0..n).all(|s| {
            (0..n)
                .filter(|&t| table.mul(table.mul(s, t), s) == s && table.mul(table.mul(t, s), t) == t)
                .count()
                == 1
        }));
        let zero = (0..n).find(|&z| (0..n).all(|s| table.mul(z, s) == z && table.mul(s, z) == z));
        let mut leq = vec![false; n * n];
        for s in 0..n {
            let ss = table.mul(s, inv[s]);
            for t in 0..n {
                leq[s * n + t] = table.mul(ss, t) == s;
            }
        }
        let labels = (0..n).map(|i| i.to_string()).collect();
        Ok(InverseSemigroup {
            table,
            inv,
            is_idem,
            idempotents,
            zero,
            leq,
            labels,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        if labels.len() == self.size() {
            self.labels = labels;
        }
        self
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, s: usize) -> &str {
        &self.labels[s]
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.table.size()
    }

    pub fn table(&self) -> &MulTable {
        &self.table
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table.mul(a, b)
    }

    #[inline]
    pub fn inv(&self, s: usize) -> usize {
        self.inv[s]
    }

    #[inline]
    pub fn is_idempotent(&self, s: usize) -> bool {
        self.is_idem[s]
    }

    /// Idempotents in increasing index order.
    pub fn idempotents(&self) -> &[usize] {
        &self.idempotents
    }

    pub fn zero(&self) -> Option<usize> {
        self.zero
    }

    pub fn is_zero(&self, s: usize) -> bool {
        self.zero == Some(s)
    }

    /// `s s*`
    #[inline]
    pub fn range_idem(&self, s: usize) -> usize {
        self.mul(s, self.inv[s])
    }

    /// `s* s`
    #[inline]
    pub fn source_idem(&self, s: usize) -> usize {
        self.mul(self.inv[s], s)
    }

    /// Nonzero elements `S^x`.
    pub fn nonzero(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.size()).filter(move |&s| !self.is_zero(s))
    }

    /// Nonzero idempotents `E^x`.
    pub fn nonzero_idempotents(&self) -> impl Iterator<Item = usize> + '_ {
        self.idempotents.iter().copied().filter(move |&e| !self.is_zero(e))
    }

    pub fn is_semilattice(&self) -> bool {
        self.idempotents.len() == self.size()
    }

    /// Natural partial order: `s <= t` iff `s = (s s*) t`.
    #[inline]
    pub fn natural_leq(&self, s: usize, t: usize) -> bool {
        self.leq[s * self.size() + t]
    }

    /// Strictly-below pairs `(s, t)` with `s < t`, in lexicographic order.
    pub fn strict_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.size();
        let mut out = Vec::new();
        for s in 0..n {
            for t in 0..n {
                if s != t && self.natural_leq(s, t) {
                    out.push((s, t));
                }
            }
        }
        out
    }

    /// `D(u) = { s : s s* <= u* u }`.
    pub fn domain_set(&self, u: usize) -> Vec<usize> {
        let uu = self.source_idem(u);
        (0..self.size())
            .filter(|&s| self.natural_leq(self.range_idem(s), uu))
            .collect()
    }

    #[inline]
    pub fn in_domain(&self, u: usize, s: usize) -> bool {
        self.natural_leq(self.range_idem(s), self.source_idem(u))
    }

    /// `S_e = { s : s* s = e }`.
    pub fn s_fiber(&self, e: usize) -> Result<Vec<usize>, IsgError> {
        if e >= self.size() {
            return Err(IsgError::OutOfRange(e));
        }
        if !self.is_idempotent(e) {
            return Err(IsgError::NotIdempotent(e));
        }
        Ok((0..self.size()).filter(|&s| self.source_idem(s) == e).collect())
    }

    /// The Wagner-Preston partial bijection `s -> u s` on `D(u)`.
    pub fn wagner_preston(&self, u: usize) -> PartialBijection {
        let map = (0..self.size())
            .map(|s| self.in_domain(u, s).then(|| self.mul(u, s)))
            .collect();
        PartialBijection { map }
    }

    /// Returns a witness `(e, s)` with `e` a nonzero idempotent, `e <= s` and
    /// `s` not idempotent, or `None` when the semigroup is E*-unitary.
    ///
    /// The witness uses the first such `e` in index order and, above it, the
    /// lowest-index non-idempotent that is maximal in the natural order.
    pub fn e_star_unitary_witness(&self) -> Option<(usize, usize)> {
        let n = self.size();
        for e in self.nonzero_idempotents() {
            let above: Vec<usize> = (0..n)
                .filter(|&s| !self.is_idempotent(s) && self.natural_leq(e, s))
                .collect();
            if above.is_empty() {
                continue;
            }
            let maximal = above
                .iter()
                .copied()
                .find(|&s| !above.iter().any(|&t| t != s && self.natural_leq(s, t)))
                .unwrap_or(above[0]);
            return Some((e, maximal));
        }
        None
    }

    pub fn is_e_star_unitary(&self) -> bool {
        self.e_star_unitary_witness().is_none()
    }

    /// The sub-inverse-semigroup on `elements` (sorted, closed under products
    /// and inverses), together with the embedding of new indices into old ones.
    pub fn restrict(&self, elements: &[usize]) -> Result<(InverseSemigroup, Vec<usize>), IsgError> {
        let mut emb: Vec<usize> = elements.to_vec();
        emb.sort_unstable();
        emb.dedup();
        let mut pos = vec![usize::MAX; self.size()];
        for (i, &s) in emb.iter().enumerate() {
            if s >= self.size() {
                return Err(IsgError::OutOfRange(s));
            }
            pos[s] = i;
        }
        let k = emb.len();
        let mut rows = vec![vec![0; k]; k];
        for (i, &a) in emb.iter().enumerate() {
            for (j, &b) in emb.iter().enumerate() {
                let ab = self.mul(a, b);
                if pos[ab] == usize::MAX {
                    return Err(IsgError::NotClosed { a, b, ab });
                }
                rows[i][j] = pos[ab];
            }
        }
        let sub = InverseSemigroup::new(MulTable::new(&rows)?)?
            .with_labels(emb.iter().map(|&s| self.labels[s].clone()).collect());
        Ok((sub, emb))
    }

    /// The idempotent semilattice `E` as a semigroup in its own right.
    pub fn semilattice(&self) -> (InverseSemigroup, Vec<usize>) {
        self.restrict(&self.idempotents)
            .expect("idempotents of an inverse semigroup form a subsemigroup")
    }

    /// All filters of `E`, sorted by their minimum element's index.
    ///
    /// For a finite semilattice every filter is the up-set of its minimum.
    pub fn filters(&self) -> Vec<Filter> {
        let mut out: Vec<Filter> = self
            .idempotents
            .iter()
            .map(|&e| Filter {
                elements: self
                    .idempotents
                    .iter()
                    .copied()
                    .filter(|&f| self.natural_leq(e, f))
                    .collect(),
            })
            .collect();
        out.dedup();
        out
    }

    /// Characters of `E` as indicator vectors over the idempotents (in index order).
    pub fn characters(&self) -> Vec<Vec<u8>> {
        self.filters()
            .iter()
            .map(|f| {
                self.idempotents
                    .iter()
                    .map(|e| u8::from(f.elements.contains(e)))
                    .collect()
            })
            .collect()
    }

    /// Brute-force filter test on a subset of `E` (used to cross-check [`Self::filters`]).
    pub fn is_filter(&self, subset: &[usize]) -> bool {
        if subset.is_empty() {
            return false;
        }
        let contains = |x: usize| subset.contains(&x);
        if subset.iter().any(|&e| !self.is_idempotent(e)) {
            return false;
        }
        for &e in subset {
            for &f in subset {
                if !contains(self.mul(e, f)) {
                    return false;
                }
            }
            for &f in &self.idempotents {
                if self.natural_leq(e, f) && !contains(f) {
                    return false;
                }
            }
        }
        true
    }
}

impl fmt::Display for InverseSemigroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "inverse semigroup of order {} ({} idempotents, {})",
            self.size(),
            self.idempotents.len(),
            if self.zero.is_some() { "with zero" } else { "no zero" }
        )
    }
}

/// A filter of the idempotent semilattice, as sorted element indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Filter {
    pub elements: Vec<usize>,
}

impl Filter {
    pub fn minimum(&self, s: &InverseSemigroup) -> usize {
        self.elements
            .iter()
            .copied()
            .find(|&e| self.elements.iter().all(|&f| s.natural_leq(e, f)))
            .expect("finite filters have a minimum")
    }
}

/// A partial bijection on `0..n`: `map[s] = Some(t)` means `s -> t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialBijection {
    pub map: Vec<Option<usize>>,
}

impl PartialBijection {
    pub fn domain(&self) -> Vec<usize> {
        (0..self.map.len()).filter(|&s| self.map[s].is_some()).collect()
    }

    pub fn image(&self) -> Vec<usize> {
        let mut im: Vec<usize> = self.map.iter().flatten().copied().collect();
        im.sort_unstable();
        im
    }

    pub fn is_injective(&self) -> bool {
        let im: Vec<usize> = self.map.iter().flatten().copied().collect();
        let mut sorted = im.clone();
        sorted.sort_unstable();
        sorted.dedup();
        sorted.len() == im.len()
    }

    /// `self o other` on the largest possible domain.
    pub fn compose(&self, other: &PartialBijection) -> PartialBijection {
        PartialBijection {
            map: other.map.iter().map(|x| x.and_then(|y| self.map[y])).collect(),
        }
    }

    pub fn inverse(&self) -> PartialBijection {
        let mut map = vec![None; self.map.len()];
        for (s, t) in self.map.iter().enumerate() {
            if let Some(t) = t {
                map[*t] = Some(s);
            }
        }
        PartialBijection { map }
    }
}

/// A validated finite group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    table: MulTable,
    identity: usize,
    inv: Vec<usize>,
    labels: Vec<String>,
}

impl Group {
    pub fn new(table: MulTable) -> Result<Self, IsgError> {
        if let Some((a, b, c)) = table.associativity_witness() {
            return Err(IsgError::NotAGroup(format!("not associative at ({a},{b},{c})")));
        }
        let n = table.size();
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table.mul(e, g) == g && table.mul(g, e) == g))
            .ok_or_else(|| IsgError::NotAGroup("no identity element".into()))?;
        let mut inv = Vec::with_capacity(n);
        for g in 0..n {
            let h = (0..n)
                .find(|&h| table.mul(g, h) == identity && table.mul(h, g) == identity)
                .ok_or_else(|| IsgError::NotAGroup(format!("element {g} has no inverse")))?;
            inv.push(h);
        }
        let labels = (0..n).map(|i| i.to_string()).collect();
        Ok(Group {
            table,
            identity,
            inv,
            labels,
        })
    }

    /// Cyclic group `Z/n` with elements `0..n` under addition.
    pub fn cyclic(n: usize) -> Self {
        let table = MulTable::from_fn(n, |a, b| (a + b) % n).expect("cyclic table is total");
        Group::new(table)
            .expect("cyclic group is a group")
            .with_labels((0..n).map(|i| format!("{i}")).collect())
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        if labels.len() == self.order() {
            self.labels = labels;
        }
        self
    }

    pub fn label(&self, g: usize) -> &str {
        &self.labels[g]
    }

    pub fn order(&self) -> usize {
        self.table.size()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table.mul(a, b)
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inv[g]
    }

    pub fn table(&self) -> &MulTable {
        &self.table
    }
}

/// A map `sigma: S^x -> G`; `None` on the zero element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grading {
    pub sigma: Vec<Option<usize>>,
}

impl Grading {
    /// Checks multiplicativity on nonzero products and idempotent purity.
    pub fn verify(&self, s: &InverseSemigroup, g: &Group) -> Result<(), String> {
        if self.sigma.len() != s.size() {
            return Err("grading length differs from semigroup order".into());
        }
        for x in 0..s.size() {
            match (s.is_zero(x), self.sigma[x]) {
                (true, None) => {}
                (true, Some(_)) => return Err(format!("zero element {x} is graded")),
                (false, None) => return Err(format!("element {x} is not graded")),
                (false, Some(v)) => {
                    if v >= g.order() {
                        return Err(format!("grade of {x} out of range"));
                    }
                    if (v == g.identity()) != s.is_idempotent(x) {
                        return Err(format!("not idempotent pure at {x}"));
                    }
                }
            }
        }
        for a in s.nonzero() {
            for b in s.nonzero() {
                let ab = s.mul(a, b);
                if s.is_zero(ab) {
                    continue;
                }
                let (Some(sa), Some(sb), Some(sab)) = (self.sigma[a], self.sigma[b], self.sigma[ab]) else {
                    unreachable!("nonzero elements are graded")
                };
                if g.mul(sa, sb) != sab {
                    return Err(format!("sigma({a}*{b}) != sigma({a}) sigma({b})"));
                }
            }
        }
        Ok(())
    }
}

/// Backtracking search for an idempotent pure grading into `g`.
///
/// Non-idempotent elements are assigned in index order, group values in
/// index order (identity excluded), with `sigma(s*) = sigma(s)^-1` and all
/// forced products propagated after each choice. The first grading found is
/// returned; `None` means no grading into this particular group exists.
pub fn search_idempotent_pure_grading(s: &InverseSemigroup, g: &Group) -> Option<Grading> {
    let n = s.size();
    let mut sigma: Vec<Option<usize>> = vec![None; n];
    for e in s.nonzero_idempotents() {
        sigma[e] = Some(g.identity());
    }
    let sigma = propagate(s, g, sigma)?;
    let order: Vec<usize> = s.nonzero().filter(|&x| !s.is_idempotent(x)).collect();
    let found = backtrack(s, g, sigma, &order)?;
    let grading = Grading { sigma: found };
    debug_assert!(grading.verify(s, g).is_ok());
    Some(grading)
}

fn backtrack(
    s: &InverseSemigroup,
    g: &Group,
    sigma: Vec<Option<usize>>,
    order: &[usize],
) -> Option<Vec<Option<usize>>> {
    let Some(&next) = order.iter().find(|&&x| sigma[x].is_none()) else {
        return Some(sigma);
    };
    for v in (0..g.order()).filter(|&v| v != g.identity()) {
        let mut trial = sigma.clone();
        trial[next] = Some(v);
        if let Some(p) = propagate(s, g, trial) {
            if let Some(done) = backtrack(s, g, p, order) {
                return Some(done);
            }
        }
    }
    None
}

/// Closes a partial assignment under inverses and products; `None` on conflict.
fn propagate(s: &InverseSemigroup, g: &Group, mut sigma: Vec<Option<usize>>) -> Option<Vec<Option<usize>>> {
    let assign = |sigma: &mut Vec<Option<usize>>, x: usize, v: usize| -> Option<bool> {
        if (v == g.identity()) != s.is_idempotent(x) {
            return None;
        }
        match sigma[x] {
            Some(w) if w == v => Some(false),
            Some(_) => None,
            None => {
                sigma[x] = Some(v);
                Some(true)
            }
        }
    };
    loop {
        let mut changed = false;
        for x in s.nonzero() {
            if let Some(v) = sigma[x] {
                changed |= assign(&mut sigma, s.inv(x), g.inv(v))?;
            }
        }
        for a in s.nonzero() {
            let Some(va) = sigma[a] else { continue };
            for b in s.nonzero() {
                let Some(vb) = sigma[b] else { continue };
                let ab = s.mul(a, b);
                if s.is_zero(ab) {
                    continue;
                }
                changed |= assign(&mut sigma, ab, g.mul(va, vb))?;
            }
        }
        if !changed {
            return Some(sigma);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn z2_is_inverse_without_zero() {
        let s = corpus::z2();
        assert_eq!(s.idempotents(), &[0]);
        assert_eq!(s.zero(), None);
        assert!(s.is_e_star_unitary());
        assert_eq!(s.domain_set(1), vec![0, 1]);
    }

    #[test]
    fn left_zero_band_is_rejected() {
        let t = MulTable::new(&[vec![0, 0], vec![1, 1]]).unwrap();
        assert!(matches!(
            validate_inverse_semigroup(t),
            Err(IsgError::IdempotentsDontCommute { .. })
        ));
    }

    #[test]
    fn non_associative_table_has_witness() {
        // a*b = b+1 mod 3: (a b) c = c + 1 but a (b c) = c + 1 too; use a twisted table
        let t = MulTable::new(&[vec![1, 0], vec![0, 0]]).unwrap();
        let err = validate_inverse_semigroup(t).unwrap_err();
        let IsgError::NotAssociative { a, b, c } = err else {
            panic!("expected associativity failure, got {err:?}")
        };
        let t = MulTable::new(&[vec![1, 0], vec![0, 0]]).unwrap();
        assert_ne!(t.mul(t.mul(a, b), c), t.mul(a, t.mul(b, c)));
    }

    #[test]
    fn out_of_range_entry() {
        assert!(matches!(
            MulTable::new(&[vec![0, 2], vec![1, 0]]),
            Err(IsgError::NotTotal { value: 2, .. })
        ));
    }

    #[test]
    fn i2_order_and_fibers() {
        let s = corpus::i2();
        assert_eq!(s.size(), 7);
        assert_eq!(s.idempotents().len(), 4);
        assert_eq!(s.zero(), Some(corpus::I2_ZERO));
        assert!(s.natural_leq(corpus::I2_1TO2, corpus::I2_SWAP));
        assert_eq!(s.mul(corpus::I2_SWAP, corpus::I2_ID1), corpus::I2_1TO2);
        assert_eq!(s.s_fiber(corpus::I2_ID).unwrap(), vec![corpus::I2_ID, corpus::I2_SWAP]);
        assert_eq!(
            s.s_fiber(corpus::I2_ID1).unwrap(),
            vec![corpus::I2_ID1, corpus::I2_1TO2]
        );
        assert_eq!(
            s.s_fiber(corpus::I2_SWAP),
            Err(IsgError::NotIdempotent(corpus::I2_SWAP))
        );
        for x in 0..7 {
            assert!(s.natural_leq(corpus::I2_ZERO, x));
        }
    }

    #[test]
    fn wagner_preston_is_injective_and_inverse_pairs() {
        let s = corpus::i2();
        let maps: Vec<_> = (0..s.size()).map(|u| s.wagner_preston(u)).collect();
        for u in 0..s.size() {
            assert!(maps[u].is_injective());
            let back = maps[s.inv(u)].compose(&maps[u]);
            for x in 0..s.size() {
                assert_eq!(back.map[x], maps[u].map[x].map(|_| x));
            }
            for v in 0..u {
                assert_ne!(maps[u], maps[v]);
            }
        }
        let z = corpus::z2();
        assert_eq!(z.wagner_preston(1).map, vec![Some(1), Some(0)]);
    }

    #[test]
    fn e3_filters() {
        let s = corpus::e3();
        let f = s.filters();
        assert_eq!(f.len(), 3);
        assert!(s.natural_leq(1, 0));
        let sizes: Vec<usize> = f.iter().map(|x| x.elements.len()).collect();
        assert_eq!(sizes, vec![1, 2, 3]);
    }

    #[test]
    fn grading_search_i2() {
        let s = corpus::i2();
        let g = Group::cyclic(2);
        let gr = search_idempotent_pure_grading(&s, &g).expect("I2 is strongly E*-unitary");
        gr.verify(&s, &g).unwrap();
        assert_eq!(gr.sigma[corpus::I2_ID1], Some(0));
        assert_eq!(gr.sigma[corpus::I2_SWAP], Some(1));
        assert_eq!(gr.sigma[corpus::I2_ZERO], None);
    }

    #[test]
    fn grading_search_i3_fails() {
        let s = corpus::i3();
        for n in 1..=4 {
            assert!(search_idempotent_pure_grading(&s, &Group::cyclic(n)).is_none());
        }
    }

    #[test]
    fn semilattice_constant_grading() {
        let s = corpus::e3();
        let gr = search_idempotent_pure_grading(&s, &Group::cyclic(1)).unwrap();
        assert_eq!(gr.sigma, vec![Some(0), Some(0), None]);
    }

    #[test]
    fn group_validation_rejects_semigroups() {
        let t = corpus::e3().table().clone();
        assert!(matches!(Group::new(t), Err(IsgError::NotAGroup(_))));
    }
}
