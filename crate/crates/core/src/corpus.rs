//! Built-in example semigroups and groups.
//!
//! Element orders are fixed and documented because file formats and tests
//! refer to elements by index.

use crate::bundle::{bundle_from_partial_action, trivial_line_bundle, FellBundle, PartialActionSpec, ZeroFiber};
use crate::fdalg::FdCStar;
use crate::isg::{Group, InverseSemigroup, MulTable};
use crate::linalg::{identity, re, zeros, CMat, CVec};

pub const I2_ZERO: usize = 0;
pub const I2_ID1: usize = 1;
pub const I2_ID2: usize = 2;
pub const I2_ID: usize = 3;
pub const I2_1TO2: usize = 4;
pub const I2_2TO1: usize = 5;
pub const I2_SWAP: usize = 6;

/// `Z/2 = {1, g}` as an inverse semigroup (index 0 is the identity).
pub fn z2() -> InverseSemigroup {
    let g = Group::cyclic(2);
    InverseSemigroup::new(g.table().clone())
        .expect("groups are inverse semigroups")
        .with_labels(vec!["1".into(), "g".into()])
}

/// Cyclic group `Z/n` as an inverse semigroup.
pub fn cyclic(n: usize) -> InverseSemigroup {
    let g = Group::cyclic(n);
    InverseSemigroup::new(g.table().clone()).expect("groups are inverse semigroups")
}

/// The chain `0 > 1 > ... > n-1` (index 0 on top), product = minimum.
pub fn chain(n: usize) -> InverseSemigroup {
    let t = MulTable::from_fn(n, |a, b| a.max(b)).expect("chain table is total");
    InverseSemigroup::new(t).expect("chains are semilattices")
}

/// The three-element chain `1 > e > 0`.
pub fn e3() -> InverseSemigroup {
    chain(3).with_labels(vec!["1".into(), "e".into(), "0".into()])
}

/// Partial injections of `{1..n}`, as image vectors over points `0..n`.
pub fn partial_bijections(n: usize) -> Vec<Vec<Option<usize>>> {
    let mut all = Vec::new();
    let mut current = vec![None; n];
    let mut used = vec![false; n];
    fill(0, n, &mut current, &mut used, &mut all);
    all.sort_by_key(|m| sort_key(m));
    all
}

fn fill(x: usize, n: usize, current: &mut Vec<Option<usize>>, used: &mut Vec<bool>, out: &mut Vec<Vec<Option<usize>>>) {
    if x == n {
        out.push(current.clone());
        return;
    }
    current[x] = None;
    fill(x + 1, n, current, used, out);
    for y in 0..n {
        if !used[y] {
            used[y] = true;
            current[x] = Some(y);
            fill(x + 1, n, current, used, out);
            used[y] = false;
        }
    }
    current[x] = None;
}

/// Idempotents first, then by rank, sorted domain, and images.
fn sort_key(m: &[Option<usize>]) -> (bool, usize, Vec<usize>, Vec<usize>) {
    let idem = m.iter().enumerate().all(|(x, y)| y.is_none_or(|y| y == x));
    let dom: Vec<usize> = (0..m.len()).filter(|&x| m[x].is_some()).collect();
    let img: Vec<usize> = m.iter().flatten().copied().collect();
    (!idem, dom.len(), dom, img)
}

fn label(m: &[Option<usize>]) -> String {
    let dom: Vec<usize> = (0..m.len()).filter(|&x| m[x].is_some()).collect();
    if dom.is_empty() {
        return "0".into();
    }
    if dom.iter().all(|&x| m[x] == Some(x)) {
        let pts: Vec<String> = dom.iter().map(|x| (x + 1).to_string()).collect();
        return format!("id{{{}}}", pts.join(","));
    }
    let arrows: Vec<String> = dom
        .iter()
        .map(|&x| format!("{}>{}", x + 1, m[x].unwrap() + 1))
        .collect();
    format!("[{}]", arrows.join(","))
}

/// The symmetric inverse monoid `I_n` under composition `(st)(x) = s(t(x))`.
pub fn symmetric_inverse_monoid(n: usize) -> InverseSemigroup {
    let elems = partial_bijections(n);
    let index = |m: &Vec<Option<usize>>| elems.iter().position(|e| e == m).expect("closed");
    let t = MulTable::from_fn(elems.len(), |a, b| {
        let (s, t) = (&elems[a], &elems[b]);
        let st: Vec<Option<usize>> = t.iter().map(|y| y.and_then(|y| s[y])).collect();
        index(&st)
    })
    .expect("composition is total");
    InverseSemigroup::new(t)
        .expect("I_n is an inverse monoid")
        .with_labels(elems.iter().map(|m| label(m)).collect())
}

/// `I_2 = [0, id{1}, id{2}, id, 1>2, 2>1, swap]`.
pub fn i2() -> InverseSemigroup {
    symmetric_inverse_monoid(2)
}

/// `I_3`, 34 elements.
pub fn i3() -> InverseSemigroup {
    symmetric_inverse_monoid(3)
}

/// Index of the partial bijection with the given images in `I_n`.
pub fn in_index(n: usize, images: &[Option<usize>]) -> Option<usize> {
    partial_bijections(n).iter().position(|m| m == images)
}

/// Semigroups available by name in specification files.
pub fn semigroup_by_name(name: &str) -> Option<InverseSemigroup> {
    match name {
        "z2" => Some(z2()),
        "e3" => Some(e3()),
        "i2" => Some(i2()),
        "i3" => Some(i3()),
        _ => {
            if let Some(k) = name.strip_prefix("chain").and_then(|k| k.parse().ok()) {
                return (k > 0).then(|| chain(k));
            }
            if let Some(k) = name.strip_prefix("z").and_then(|k| k.parse().ok()) {
                return (k > 0).then(|| cyclic(k));
            }
            if let Some(k) = name.strip_prefix("i").and_then(|k| k.parse::<usize>().ok()) {
                return (1..=4).contains(&k).then(|| symmetric_inverse_monoid(k));
            }
            None
        }
    }
}

/// Groups available by name (`z<n>`).
pub fn group_by_name(name: &str) -> Option<Group> {
    let k: usize = name.strip_prefix("z")?.parse().ok()?;
    (k > 0).then(|| Group::cyclic(k))
}

fn unit_vec(n: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(n);
    v[i] = re(1.0);
    v
}

/// A partial action given by generators of the ideals `J_s` and matrices `beta_s`.
#[derive(Clone, Debug)]
pub struct ActionData {
    pub semigroup: InverseSemigroup,
    pub algebra: FdCStar,
    pub ideal_gens: Vec<Vec<CVec>>,
    pub beta: Vec<CMat>,
}

impl ActionData {
    pub fn bundle(&self) -> FellBundle {
        let spec = PartialActionSpec::new(self.algebra.clone(), &self.ideal_gens, self.beta.clone());
        bundle_from_partial_action(&self.semigroup, &spec).expect("corpus actions are partial actions")
    }
}

/// `I_n` acting on `C^n` by moving coordinates: `J_s` is spanned by the
/// image points of `s` and `beta_s` sends `e_x` to `e_{s(x)}`.
pub fn symmetric_inverse_monoid_action_data(n: usize) -> ActionData {
    let maps = partial_bijections(n);
    let ideal_gens = maps
        .iter()
        .map(|m| m.iter().flatten().map(|&y| unit_vec(n, y)).collect())
        .collect();
    let beta = maps
        .iter()
        .map(|m| {
            let mut b = zeros(n, n);
            for (x, y) in m.iter().enumerate() {
                if let Some(y) = y {
                    b[(*y, x)] = re(1.0);
                }
            }
            b
        })
        .collect();
    ActionData {
        semigroup: symmetric_inverse_monoid(n),
        algebra: FdCStar::commutative(n),
        ideal_gens,
        beta,
    }
}

pub fn symmetric_inverse_monoid_action(n: usize) -> FellBundle {
    symmetric_inverse_monoid_action_data(n).bundle()
}

/// `I_2` acting on `C^2`; fiber dimensions `(0, 1, 1, 2, 1, 1, 2)`.
pub fn i2_action() -> FellBundle {
    symmetric_inverse_monoid_action(2)
}

/// `Z/2` acting on `C^2` by swapping coordinates.
pub fn z2_swap_action_data() -> ActionData {
    let swap = CMat::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)]);
    let full = vec![unit_vec(2, 0), unit_vec(2, 1)];
    ActionData {
        semigroup: z2(),
        algebra: FdCStar::commutative(2),
        ideal_gens: vec![full.clone(), full],
        beta: vec![identity(2), swap],
    }
}

pub fn z2_swap_action() -> FellBundle {
    z2_swap_action_data().bundle()
}

/// `E3` acting on `C^2` with `J_1 = C^2`, `J_e = C e_1`, `J_0 = 0` and identity maps.
pub fn e3_partial_data() -> ActionData {
    ActionData {
        semigroup: e3(),
        algebra: FdCStar::commutative(2),
        ideal_gens: vec![vec![unit_vec(2, 0), unit_vec(2, 1)], vec![unit_vec(2, 0)], vec![]],
        beta: vec![identity(2); 3],
    }
}

pub fn e3_partial() -> FellBundle {
    e3_partial_data().bundle()
}

/// `Z/2` acting on `C^2` with `J_g = C e_1` and `beta_g` the identity there.
/// Not saturated: `A_g A_g` misses `e_2` in `A_1`.
pub fn z2_partial_data() -> ActionData {
    ActionData {
        semigroup: z2(),
        algebra: FdCStar::commutative(2),
        ideal_gens: vec![vec![unit_vec(2, 0), unit_vec(2, 1)], vec![unit_vec(2, 0)]],
        beta: vec![identity(2); 2],
    }
}

pub fn z2_partial() -> FellBundle {
    z2_partial_data().bundle()
}

/// Partial actions available by name.
pub fn action_by_name(name: &str) -> Option<ActionData> {
    match name {
        "i2_action" => Some(symmetric_inverse_monoid_action_data(2)),
        "i3_action" => Some(symmetric_inverse_monoid_action_data(3)),
        "e3_partial" => Some(e3_partial_data()),
        "z2_swap_action" => Some(z2_swap_action_data()),
        "z2_partial" => Some(z2_partial_data()),
        _ => None,
    }
}

/// Bundles available by name.
pub fn bundle_by_name(name: &str) -> Option<FellBundle> {
    let b = match name {
        "z2_trivial" => trivial_line_bundle(&z2(), ZeroFiber::Full),
        "e3_trivial" => trivial_line_bundle(&e3(), ZeroFiber::Full),
        "e3_trivial_contracted" => trivial_line_bundle(&e3(), ZeroFiber::Zero),
        "i2_trivial" => trivial_line_bundle(&i2(), ZeroFiber::Full),
        "i3_trivial" => trivial_line_bundle(&i3(), ZeroFiber::Full),
        "i2_action" => i2_action(),
        "i3_action" => symmetric_inverse_monoid_action(3),
        "e3_partial" => e3_partial(),
        "z2_swap_action" => z2_swap_action(),
        "z2_partial" => z2_partial(),
        _ => return None,
    };
    Some(b)
}

/// Names accepted by [`bundle_by_name`].
pub const BUNDLE_NAMES: [&str; 10] = [
    "z2_trivial",
    "e3_trivial",
    "e3_trivial_contracted",
    "i2_trivial",
    "i3_trivial",
    "i2_action",
    "i3_action",
    "e3_partial",
    "z2_swap_action",
    "z2_partial",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn i2_labels_follow_documented_order() {
        let s = i2();
        assert_eq!(
            s.labels(),
            &["0", "id{1}", "id{2}", "id{1,2}", "[1>2]", "[2>1]", "[1>2,2>1]"]
        );
    }

    #[test]
    fn sizes() {
        assert_eq!(i3().size(), 34);
        assert_eq!(symmetric_inverse_monoid(1).size(), 2);
        assert_eq!(chain(5).idempotents().len(), 5);
    }

    #[test]
    fn i3_witness_is_the_transposition_fixing_one() {
        let s = i3();
        let e = in_index(3, &[Some(0), None, None]).unwrap();
        let t = in_index(3, &[Some(0), Some(2), Some(1)]).unwrap();
        assert_eq!(s.e_star_unitary_witness(), Some((e, t)));
    }

    #[test]
    fn action_bundle_dimensions() {
        assert_eq!(i2_action().dims(), &[0, 1, 1, 2, 1, 1, 2]);
        assert_eq!(e3_partial().dims(), &[2, 1, 0]);
        assert_eq!(z2_swap_action().dims(), &[2, 2]);
        // sum of image sizes: 1*9 + 2*18 + 3*6
        assert_eq!(symmetric_inverse_monoid_action(3).total_dim(), 63);
    }

    #[test]
    fn names_resolve() {
        assert_eq!(semigroup_by_name("chain4").unwrap().size(), 4);
        assert_eq!(semigroup_by_name("z3").unwrap().size(), 3);
        assert!(semigroup_by_name("nope").is_none());
        assert_eq!(group_by_name("z2").unwrap().order(), 2);
    }
}
