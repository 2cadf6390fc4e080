//! Finite groups over explicit Cayley tables.
//!
//! Every group is stored as a dense `order × order` table of element indices
//! (row = left operand). Elements are indexed canonically:
//!
//! * `cyclic(n)`: residues `0..n`.
//! * `symmetric(n)` / `alternating(n)`: permutations in lexicographic order of
//!   one-line notation, except `symmetric(3)`, which uses
//!   `[e, (12), (13), (23), (123), (132)]`.
//! * `product(A, B)`: `(i, j) ↦ i·|B| + j`, folded left for more factors.
//!
//! `a ⊙ b` means "`a` applied first"; sequences are multiplied left to right.

mod abelian;
mod perm;
mod spec;
mod structure;

use std::collections::HashMap;
use std::fmt;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use abelian::AbelianDecomposition;
pub use spec::GroupSpec;
pub use structure::{QuotientMap, SubgroupMask, SubnormalSeries};

/// Largest group order accepted by any constructor.
pub const MAX_ORDER: usize = 10080;
/// Associativity is checked on every triple up to this order.
pub const EXHAUSTIVE_AXIOM_ORDER: usize = 256;
const RANDOM_ASSOCIATIVITY_TRIPLES: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("invalid Cayley table: {0}")]
    InvalidTable(String),
    #[error("group order {0} exceeds the limit of {MAX_ORDER}")]
    SizeLimit(usize),
    #[error("bad group descriptor: {0}")]
    BadSpec(String),
    #[error("element index {index} out of range for group of order {order}")]
    OutOfRange { index: usize, order: usize },
    #[error("mask is not a subgroup")]
    NotASubgroup,
    #[error("subgroup is not normal")]
    NotNormal,
    #[error("group is not Abelian")]
    NotAbelian,
    #[error("group is not solvable; derived series stabilises at a perfect subgroup of order {}", residual.order())]
    NotSolvable { residual: SubgroupMask },
    #[error("invalid subnormal series: {0}")]
    InvalidSeries(String),
}

/// Index of a group element under the owning group's canonical indexing.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Element(pub u32);

impl Element {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for Element {
    fn from(i: usize) -> Self {
        Element(i as u32)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    cayley: Vec<u32>,
    identity: Element,
    inverses: Vec<u32>,
    labels: Vec<String>,
    spec: GroupSpec,
}

impl FiniteGroup {
    pub fn from_spec(spec: &GroupSpec) -> Result<FiniteGroup, GroupError> {
        match spec {
            GroupSpec::Cyclic(n) => FiniteGroup::cyclic(*n),
            GroupSpec::Symmetric(n) => FiniteGroup::symmetric(*n),
            GroupSpec::Alternating(n) => FiniteGroup::alternating(*n),
            GroupSpec::Product(parts) => {
                let mut iter = parts.iter();
                let first = iter
                    .next()
                    .ok_or_else(|| GroupError::BadSpec("empty product".into()))?;
                let mut acc = FiniteGroup::from_spec(first)?;
                for part in iter {
                    acc = FiniteGroup::direct_product(&acc, &FiniteGroup::from_spec(part)?)?;
                }
                acc.spec = spec.clone();
                Ok(acc)
            }
            GroupSpec::Table(_) => Err(GroupError::BadSpec(
                "table descriptors must be built with from_table".into(),
            )),
        }
    }

    pub fn parse(text: &str) -> Result<FiniteGroup, GroupError> {
        FiniteGroup::from_spec(&text.parse()?)
    }

    pub fn cyclic(n: usize) -> Result<FiniteGroup, GroupError> {
        if n == 0 {
            return Err(GroupError::BadSpec("cyclic group needs n >= 1".into()));
        }
        check_size(n)?;
        let mut cayley = Vec::with_capacity(n * n);
        for a in 0..n {
            cayley.extend((0..n).map(|b| ((a + b) % n) as u32));
        }
        let labels = (0..n).map(|i| i.to_string()).collect();
        FiniteGroup::from_table(cayley, labels, GroupSpec::Cyclic(n))
    }

    pub fn symmetric(n: usize) -> Result<FiniteGroup, GroupError> {
        if n == 0 {
            return Err(GroupError::BadSpec("symmetric group needs n >= 1".into()));
        }
        check_size(perm::factorial(n).ok_or(GroupError::SizeLimit(usize::MAX))?)?;
        let mut perms = perm::all_lexicographic(n);
        if n == 3 {
            // e, (12), (13), (23), (123), (132)
            perms = vec![
                vec![0, 1, 2],
                vec![1, 0, 2],
                vec![2, 1, 0],
                vec![0, 2, 1],
                vec![1, 2, 0],
                vec![2, 0, 1],
            ];
        }
        FiniteGroup::from_permutations(perms, GroupSpec::Symmetric(n))
    }

    pub fn alternating(n: usize) -> Result<FiniteGroup, GroupError> {
        if n == 0 {
            return Err(GroupError::BadSpec("alternating group needs n >= 1".into()));
        }
        let full = perm::factorial(n).ok_or(GroupError::SizeLimit(usize::MAX))?;
        check_size(if n >= 2 { full / 2 } else { full })?;
        let perms = perm::all_lexicographic(n)
            .into_iter()
            .filter(|p| perm::is_even(p))
            .collect();
        FiniteGroup::from_permutations(perms, GroupSpec::Alternating(n))
    }

    pub fn direct_product(a: &FiniteGroup, b: &FiniteGroup) -> Result<FiniteGroup, GroupError> {
        let order = a
            .order
            .checked_mul(b.order)
            .ok_or(GroupError::SizeLimit(usize::MAX))?;
        check_size(order)?;
        let mut cayley = Vec::with_capacity(order * order);
        for x in 0..order {
            let (xa, xb) = (x / b.order, x % b.order);
            for y in 0..order {
                let (ya, yb) = (y / b.order, y % b.order);
                let za = a.op_index(xa, ya);
                let zb = b.op_index(xb, yb);
                cayley.push((za * b.order + zb) as u32);
            }
        }
        let labels = (0..order)
            .map(|x| format!("({},{})", a.labels[x / b.order], b.labels[x % b.order]))
            .collect();
        let spec = GroupSpec::Product(vec![a.spec.clone(), b.spec.clone()]);
        FiniteGroup::from_table(cayley, labels, spec)
    }

    fn from_permutations(perms: Vec<perm::Perm>, spec: GroupSpec) -> Result<FiniteGroup, GroupError> {
        let index: HashMap<&[u8], u32> = perms
            .iter()
            .enumerate()
            .map(|(i, p)| (p.as_slice(), i as u32))
            .collect();
        let n = perms.len();
        let mut cayley = Vec::with_capacity(n * n);
        for a in &perms {
            for b in &perms {
                let c = perm::compose(a, b);
                let idx = index.get(c.as_slice()).ok_or_else(|| {
                    GroupError::InvalidTable("permutation set not closed".into())
                })?;
                cayley.push(*idx);
            }
        }
        let labels = perms.iter().map(|p| perm::cycle_label(p)).collect();
        FiniteGroup::from_table(cayley, labels, spec)
    }

    /// Builds a group from a flat row-major table, verifying every axiom.
    pub fn from_table(
        cayley: Vec<u32>,
        labels: Vec<String>,
        spec: GroupSpec,
    ) -> Result<FiniteGroup, GroupError> {
        let order = (cayley.len() as f64).sqrt().round() as usize;
        if order == 0 || order * order != cayley.len() {
            return Err(GroupError::InvalidTable(format!(
                "table of {} entries is not square",
                cayley.len()
            )));
        }
        check_size(order)?;
        if labels.len() != order {
            return Err(GroupError::InvalidTable(format!(
                "{} labels for {order} elements",
                labels.len()
            )));
        }
        if cayley.iter().any(|&v| v as usize >= order) {
            return Err(GroupError::InvalidTable("entry out of range".into()));
        }
        check_latin(&cayley, order)?;

        let identity = (0..order)
            .find(|&e| (0..order).all(|g| cayley[e * order + g] as usize == g && cayley[g * order + e] as usize == g))
            .ok_or_else(|| GroupError::InvalidTable("no two-sided identity".into()))?;

        // Latin rows give exactly one right inverse per element.
        let mut inverses = vec![0u32; order];
        for g in 0..order {
            let h = (0..order)
                .find(|&h| cayley[g * order + h] as usize == identity)
                .ok_or_else(|| GroupError::InvalidTable(format!("element {g} has no inverse")))?;
            if cayley[h * order + g] as usize != identity {
                return Err(GroupError::InvalidTable(format!(
                    "inverse of element {g} is one-sided"
                )));
            }
            inverses[g] = h as u32;
        }

        let group = FiniteGroup {
            order,
            cayley,
            identity: Element(identity as u32),
            inverses,
            labels,
            spec,
        };
        group.check_associativity()?;
        Ok(group)
    }

    fn check_associativity(&self) -> Result<(), GroupError> {
        let n = self.order;
        let fail = |a: usize, b: usize, c: usize| {
            GroupError::InvalidTable(format!("associativity fails on ({a}, {b}, {c})"))
        };
        if n <= EXHAUSTIVE_AXIOM_ORDER {
            for a in 0..n {
                for b in 0..n {
                    let ab = self.op_index(a, b);
                    for c in 0..n {
                        if self.op_index(ab, c) != self.op_index(a, self.op_index(b, c)) {
                            return Err(fail(a, b, c));
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f_a550c);
            for _ in 0..RANDOM_ASSOCIATIVITY_TRIPLES {
                let a = (rng.next_u64() % n as u64) as usize;
                let b = (rng.next_u64() % n as u64) as usize;
                let c = (rng.next_u64() % n as u64) as usize;
                if self.op_index(self.op_index(a, b), c) != self.op_index(a, self.op_index(b, c)) {
                    return Err(fail(a, b, c));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn op_index(&self, a: usize, b: usize) -> usize {
        self.cayley[a * self.order + b] as usize
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> Element {
        self.identity
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, g: Element) -> &str {
        &self.labels[g.index()]
    }

    /// Finds an element by its label.
    pub fn element(&self, label: &str) -> Option<Element> {
        self.labels.iter().position(|l| l == label).map(Element::from)
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> {
        (0..self.order as u32).map(Element)
    }

    /// Row `a` of the Cayley table.
    pub fn row(&self, a: Element) -> &[u32] {
        &self.cayley[a.index() * self.order..(a.index() + 1) * self.order]
    }

    pub fn check(&self, g: Element) -> Result<Element, GroupError> {
        if g.index() < self.order {
            Ok(g)
        } else {
            Err(GroupError::OutOfRange { index: g.index(), order: self.order })
        }
    }

    #[inline]
    pub fn multiply(&self, a: Element, b: Element) -> Element {
        Element(self.cayley[a.index() * self.order + b.index()])
    }

    #[inline]
    pub fn inverse(&self, a: Element) -> Element {
        Element(self.inverses[a.index()])
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (a + 1..self.order).all(|b| self.op_index(a, b) == self.op_index(b, a)))
    }

    /// Order of `g` as a group element.
    pub fn element_order(&self, g: Element) -> usize {
        let mut k = 1;
        let mut x = g;
        while x != self.identity {
            x = self.multiply(x, g);
            k += 1;
        }
        k
    }

    /// `y_t = x_1 ⊙ … ⊙ x_t`.
    pub fn prefix_products(&self, seq: &[Element]) -> Vec<Element> {
        let mut acc = self.identity;
        seq.iter()
            .map(|&x| {
                acc = self.multiply(acc, x);
                acc
            })
            .collect()
    }

    pub fn product(&self, seq: &[Element]) -> Element {
        seq.iter().fold(self.identity, |acc, &x| self.multiply(acc, x))
    }
}

fn check_size(order: usize) -> Result<(), GroupError> {
    if order > MAX_ORDER {
        Err(GroupError::SizeLimit(order))
    } else {
        Ok(())
    }
}

fn check_latin(cayley: &[u32], n: usize) -> Result<(), GroupError> {
    let mut seen = vec![0usize; n];
    for r in 0..n {
        for c in 0..n {
            let v = cayley[r * n + c] as usize;
            if seen[v] == r + 1 {
                return Err(GroupError::InvalidTable(format!("row {r} repeats {v}")));
            }
            seen[v] = r + 1;
        }
    }
    seen.iter_mut().for_each(|s| *s = 0);
    for c in 0..n {
        for r in 0..n {
            let v = cayley[r * n + c] as usize;
            if seen[v] == c + 1 {
                return Err(GroupError::InvalidTable(format!("column {c} repeats {v}")));
            }
            seen[v] = c + 1;
        }
    }
    Ok(())
}
