//! Subgroups, normality, quotients and the derived series.

use serde::{Deserialize, Serialize};

use super::{Element, FiniteGroup, GroupError, GroupSpec};

/// Membership vector over the elements of a parent group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubgroupMask {
    members: Vec<bool>,
}

impl SubgroupMask {
    pub fn from_members(members: Vec<bool>) -> SubgroupMask {
        SubgroupMask { members }
    }

    pub fn from_elements(order: usize, elements: &[Element]) -> SubgroupMask {
        let mut members = vec![false; order];
        for g in elements {
            members[g.index()] = true;
        }
        SubgroupMask { members }
    }

    pub fn whole(g: &FiniteGroup) -> SubgroupMask {
        SubgroupMask { members: vec![true; g.order()] }
    }

    pub fn trivial(g: &FiniteGroup) -> SubgroupMask {
        SubgroupMask::from_elements(g.order(), &[g.identity()])
    }

    pub fn contains(&self, g: Element) -> bool {
        self.members.get(g.index()).copied().unwrap_or(false)
    }

    pub fn order(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    pub fn elements(&self) -> Vec<Element> {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| Element::from(i))
            .collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.order() == 1
    }
}

/// Chain `G = G_k ⊵ G_{k-1} ⊵ … ⊵ G_0 = {e}`, stored top-down.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubnormalSeries {
    chain: Vec<SubgroupMask>,
}

impl SubnormalSeries {
    /// Validates the chain against `g`: it starts at `g`, ends at `{e}`, each
    /// member is a normal subgroup of its predecessor and every factor is
    /// Abelian.
    pub fn new(g: &FiniteGroup, chain: Vec<SubgroupMask>) -> Result<SubnormalSeries, GroupError> {
        let invalid = |m: String| Err(GroupError::InvalidSeries(m));
        if chain.len() < 2 {
            return invalid("a series needs at least two members".into());
        }
        if chain.iter().any(|m| m.members.len() != g.order()) {
            return invalid("mask length does not match group order".into());
        }
        if chain[0] != SubgroupMask::whole(g) {
            return invalid("first member must be the whole group".into());
        }
        if !chain.last().unwrap().is_trivial() || !chain.last().unwrap().contains(g.identity()) {
            return invalid("last member must be the trivial subgroup".into());
        }
        for m in &chain {
            if !g.is_subgroup(m) {
                return invalid("member is not a subgroup".into());
            }
        }
        for (i, pair) in chain.windows(2).enumerate() {
            let (upper, lower) = (&pair[0], &pair[1]);
            if !lower.elements().iter().all(|&x| upper.contains(x)) {
                return invalid(format!("member {} is not contained in member {i}", i + 1));
            }
            if !g.is_normal_in(upper, lower) {
                return invalid(format!("member {} is not normal in member {i}", i + 1));
            }
            if !g.factor_is_abelian(upper, lower) {
                return invalid(format!("factor {i}/{} is not Abelian", i + 1));
            }
        }
        Ok(SubnormalSeries { chain })
    }

    pub fn chain(&self) -> &[SubgroupMask] {
        &self.chain
    }

    /// Number of factors.
    pub fn len(&self) -> usize {
        self.chain.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `G → G/N` together with the least-index section `G/N → G`.
#[derive(Clone, Debug)]
pub struct QuotientMap {
    pub quotient: FiniteGroup,
    pub projection: Vec<Element>,
    pub section: Vec<Element>,
}

impl QuotientMap {
    pub fn project(&self, g: Element) -> Element {
        self.projection[g.index()]
    }

    pub fn lift(&self, h: Element) -> Element {
        self.section[h.index()]
    }
}

impl FiniteGroup {
    pub fn is_subgroup(&self, h: &SubgroupMask) -> bool {
        h.members.len() == self.order
            && h.contains(self.identity)
            && h.elements().iter().all(|&a| {
                h.contains(self.inverse(a)) && h.elements().iter().all(|&b| h.contains(self.multiply(a, b)))
            })
    }

    /// Smallest subgroup containing `gens`.
    pub fn generate(&self, gens: &[Element]) -> SubgroupMask {
        let mut members = vec![false; self.order];
        members[self.identity.index()] = true;
        let mut frontier = vec![self.identity];
        // Right-multiplying by generators reaches the whole finite subgroup.
        while let Some(x) = frontier.pop() {
            for &s in gens {
                let y = self.multiply(x, s);
                if !members[y.index()] {
                    members[y.index()] = true;
                    frontier.push(y);
                }
            }
        }
        SubgroupMask { members }
    }

    /// `[H, H]` for a subgroup `H`.
    pub fn commutator_of(&self, h: &SubgroupMask) -> SubgroupMask {
        let elems = h.elements();
        let mut commutators = vec![false; self.order];
        for &a in &elems {
            for &b in &elems {
                let c = self.multiply(
                    self.multiply(a, b),
                    self.multiply(self.inverse(a), self.inverse(b)),
                );
                commutators[c.index()] = true;
            }
        }
        let gens: Vec<Element> = commutators
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| Element::from(i))
            .collect();
        self.generate(&gens)
    }

    pub fn commutator_subgroup(&self) -> SubgroupMask {
        self.commutator_of(&SubgroupMask::whole(self))
    }

    /// Derived series `G ⊵ [G,G] ⊵ …`, the shortest series with Abelian factors.
    ///
    /// The trivial group gets the one-factor series `[{e}, {e}]`.
    pub fn derived_series(&self) -> Result<SubnormalSeries, GroupError> {
        let mut chain = vec![SubgroupMask::whole(self)];
        if self.order == 1 {
            chain.push(SubgroupMask::trivial(self));
            return Ok(SubnormalSeries { chain });
        }
        loop {
            let current = chain.last().unwrap();
            let next = self.commutator_of(current);
            if &next == current {
                return Err(GroupError::NotSolvable { residual: next });
            }
            let done = next.is_trivial();
            chain.push(next);
            if done {
                return SubnormalSeries::new(self, chain);
            }
        }
    }

    pub fn derived_length(&self) -> Option<usize> {
        self.derived_series().ok().map(|s| s.len())
    }

    pub fn is_normal(&self, n: &SubgroupMask) -> Result<bool, GroupError> {
        if !self.is_subgroup(n) {
            return Err(GroupError::NotASubgroup);
        }
        Ok(self.is_normal_in(&SubgroupMask::whole(self), n))
    }

    /// `g N g⁻¹ ⊆ N` for every `g` in `upper`.
    pub(crate) fn is_normal_in(&self, upper: &SubgroupMask, n: &SubgroupMask) -> bool {
        let ns = n.elements();
        upper.elements().iter().all(|&g| {
            let gi = self.inverse(g);
            ns.iter().all(|&x| n.contains(self.multiply(self.multiply(g, x), gi)))
        })
    }

    /// Whether `upper / lower` is Abelian, i.e. every commutator lands in `lower`.
    pub(crate) fn factor_is_abelian(&self, upper: &SubgroupMask, lower: &SubgroupMask) -> bool {
        let elems = upper.elements();
        elems.iter().all(|&a| {
            elems.iter().all(|&b| {
                let c = self.multiply(
                    self.multiply(a, b),
                    self.multiply(self.inverse(a), self.inverse(b)),
                );
                lower.contains(c)
            })
        })
    }

    pub fn quotient(&self, n: &SubgroupMask) -> Result<QuotientMap, GroupError> {
        if !self.is_normal(n)? {
            return Err(GroupError::NotNormal);
        }
        let n_elems = n.elements();
        let mut projection = vec![Element(u32::MAX); self.order];
        let mut section = Vec::new();
        for g in self.elements() {
            if projection[g.index()] != Element(u32::MAX) {
                continue;
            }
            let coset = Element::from(section.len());
            for &x in &n_elems {
                projection[self.multiply(g, x).index()] = coset;
            }
            section.push(g);
        }
        // The identity coset is represented by the identity itself.
        let id_coset = projection[self.identity.index()];
        section[id_coset.index()] = self.identity;

        let q = section.len();
        let mut cayley = Vec::with_capacity(q * q);
        for &a in &section {
            for &b in &section {
                cayley.push(projection[self.multiply(a, b).index()].0);
            }
        }
        let labels = section.iter().map(|&s| format!("{}N", self.label(s))).collect();
        let spec = GroupSpec::Table(format!("{}/N{}", self.spec, n.order()));
        let quotient = FiniteGroup::from_table(cayley, labels, spec)?;
        Ok(QuotientMap { quotient, projection, section })
    }

    /// Re-indexes a subgroup as a standalone group. Returns the group and the
    /// embedding from its indices into `self`.
    pub fn subgroup_as_group(&self, h: &SubgroupMask) -> Result<(FiniteGroup, Vec<Element>), GroupError> {
        if !self.is_subgroup(h) {
            return Err(GroupError::NotASubgroup);
        }
        let embedding = h.elements();
        let mut local = vec![u32::MAX; self.order];
        for (i, g) in embedding.iter().enumerate() {
            local[g.index()] = i as u32;
        }
        let m = embedding.len();
        let mut cayley = Vec::with_capacity(m * m);
        for &a in &embedding {
            for &b in &embedding {
                cayley.push(local[self.multiply(a, b).index()]);
            }
        }
        let labels = embedding.iter().map(|&g| self.label(g).to_string()).collect();
        let spec = GroupSpec::Table(format!("{}<{}>", self.spec, m));
        Ok((FiniteGroup::from_table(cayley, labels, spec)?, embedding))
    }

    /// Translates a mask over `self` into the indexing of `subgroup_as_group(h)`.
    pub(crate) fn restrict_mask(&self, embedding: &[Element], mask: &SubgroupMask) -> SubgroupMask {
        SubgroupMask::from_members(embedding.iter().map(|&g| mask.contains(g)).collect())
    }
}
