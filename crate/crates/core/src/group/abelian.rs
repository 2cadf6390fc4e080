use serde::{Deserialize, Serialize};

use super::{Element, FiniteGroup, GroupError, SubgroupMask};

/// An explicit isomorphism `G ≅ C_{k_1} × … × C_{k_n}` in invariant-factor
/// form (`k_1 | k_2 | … | k_n`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbelianDecomposition {
    pub cyclic_orders: Vec<usize>,
    /// Generator of each cyclic factor, as elements of `G`.
    pub generators: Vec<Element>,
    /// `iso[g]` = exponent tuple `(m_1, …, m_n)` of element `g`.
    pub iso: Vec<Vec<usize>>,
}

impl AbelianDecomposition {
    pub fn coordinates(&self, g: Element) -> &[usize] {
        &self.iso[g.index()]
    }

    pub fn rank(&self) -> usize {
        self.cyclic_orders.len()
    }
}

impl FiniteGroup {
    /// Decomposes an Abelian group into cyclic factors.
    ///
    /// Greedy over quotients: repeatedly take the element of largest order
    /// modulo the subgroup built so far, then shift it inside its coset to an
    /// element of that same order, so that it splits off as a direct factor.
    pub fn abelian_decomposition(&self) -> Result<AbelianDecomposition, GroupError> {
        if !self.is_abelian() {
            return Err(GroupError::NotAbelian);
        }
        if self.order() == 1 {
            return Ok(AbelianDecomposition {
                cyclic_orders: vec![1],
                generators: vec![self.identity()],
                iso: vec![vec![0]],
            });
        }

        let mut built = SubgroupMask::trivial(self);
        let mut factors: Vec<(Element, usize)> = Vec::new();
        while built.order() < self.order() {
            let (x, m) = self
                .elements()
                .filter(|&x| !built.contains(x))
                .map(|x| (x, self.order_modulo(x, &built)))
                .fold(None, |best: Option<(Element, usize)>, cand| match best {
                    Some(b) if b.1 >= cand.1 => Some(b),
                    _ => Some(cand),
                })
                .expect("an element outside a proper subgroup exists");
            let lifted = built
                .elements()
                .into_iter()
                .map(|h| self.multiply(x, h))
                .find(|&y| self.element_order(y) == m)
                .ok_or_else(|| {
                    GroupError::InvalidTable("cyclic factor does not split".into())
                })?;
            factors.push((lifted, m));
            let mut gens: Vec<Element> = factors.iter().map(|f| f.0).collect();
            gens.sort();
            built = self.generate(&gens);
        }

        // Invariant-factor form lists the smallest order first.
        factors.reverse();
        let cyclic_orders: Vec<usize> = factors.iter().map(|f| f.1).collect();
        let generators: Vec<Element> = factors.iter().map(|f| f.0).collect();

        let mut iso: Vec<Option<Vec<usize>>> = vec![None; self.order()];
        for code in 0..self.order() {
            // Mixed-radix digits of `code`, last factor fastest.
            let mut rest = code;
            let mut exps = vec![0usize; cyclic_orders.len()];
            for (j, &k) in cyclic_orders.iter().enumerate().rev() {
                exps[j] = rest % k;
                rest /= k;
            }
            let g = exps
                .iter()
                .zip(&generators)
                .fold(self.identity(), |acc, (&m, &gen)| {
                    (0..m).fold(acc, |a, _| self.multiply(a, gen))
                });
            if iso[g.index()].is_some() {
                return Err(GroupError::InvalidTable("decomposition is not injective".into()));
            }
            iso[g.index()] = Some(exps);
        }
        let iso: Vec<Vec<usize>> = iso
            .into_iter()
            .map(|v| v.ok_or_else(|| GroupError::InvalidTable("decomposition is not onto".into())))
            .collect::<Result<_, _>>()?;

        let decomposition = AbelianDecomposition { cyclic_orders, generators, iso };
        self.check_decomposition(&decomposition)?;
        Ok(decomposition)
    }

    fn order_modulo(&self, x: Element, h: &SubgroupMask) -> usize {
        let mut k = 1;
        let mut y = x;
        while !h.contains(y) {
            y = self.multiply(y, x);
            k += 1;
        }
        k
    }

    fn check_decomposition(&self, d: &AbelianDecomposition) -> Result<(), GroupError> {
        let fail = || Err(GroupError::InvalidTable("decomposition is not a homomorphism".into()));
        if d.cyclic_orders.iter().product::<usize>() != self.order() {
            return fail();
        }
        for w in d.cyclic_orders.windows(2) {
            if w[1] % w[0] != 0 {
                return fail();
            }
        }
        for a in self.elements() {
            for b in self.elements() {
                let ab = self.multiply(a, b);
                for (j, &k) in d.cyclic_orders.iter().enumerate() {
                    if d.iso[ab.index()][j] != (d.iso[a.index()][j] + d.iso[b.index()][j]) % k {
                        return fail();
                    }
                }
            }
        }
        Ok(())
    }
}
