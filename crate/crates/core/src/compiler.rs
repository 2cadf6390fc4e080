//! Synthesis of exact tabular SSMs from finite solvable groups.
//!
//! An Abelian group `C_{k_1} × … × C_{k_n}` becomes one `n`-dimensional layer
//! where element `g` with coordinates `(m_j)` multiplies coordinate `j` by the
//! root of unity `exp(2πi m_j / k_j)`, starting from all ones.
//!
//! A solvable group is peeled along a subnormal series `G ⊵ N ⊵ … ⊵ {e}`. The
//! first layer tracks the Abelian quotient `H = G/N` through the projection
//! `π`. Fixing a section `s: H → G`, a product `g'` is stored as the pair
//! `(h', n')` with `g' = n' · s(h')`. Reading token `g` with `h = π(g)` and
//! `n = s(h)⁻¹ g`, the pair must become `(h'h, n' · κ(h', g))` where
//!
//! ```text
//! κ(h', g) = d(h', h) · s(h'h) n s(h'h)⁻¹,    d(h', h) = s(h') s(h) s(h'h)⁻¹
//! ```
//!
//! so the deeper layers are a recursively compiled model for `N` whose tables
//! are re-keyed on `(first-layer state h', token g)` with inner token
//! `κ(h', g)`. Both `d` and `κ` land in `N` because `π` kills them.

use num_complex::Complex64;
use thiserror::Error;

use crate::group::{Element, FiniteGroup, GroupError, QuotientMap, SubgroupMask, SubnormalSeries};
use crate::ssm::{DcdSsm, DecoderAnchor, FinitePrecisionConfig, LayerTable, SsmError, Transition};
use crate::verifier::{self, Verdict, VerifyError};

/// Sequence length up to which every compiled model is checked before it is
/// handed out.
pub const PRE_VERIFY_DEPTH: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompileError {
    #[error("group is not solvable; its derived series stalls at a perfect subgroup of order {}", residual.order())]
    NotSolvable { residual: SubgroupMask },
    #[error(transparent)]
    Group(GroupError),
    #[error(transparent)]
    Ssm(#[from] SsmError),
    #[error("compiled model failed pre-verification: {0}")]
    PreVerification(String),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

impl From<GroupError> for CompileError {
    fn from(e: GroupError) -> Self {
        match e {
            GroupError::NotSolvable { residual } => CompileError::NotSolvable { residual },
            other => CompileError::Group(other),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct CompileOptions {
    pub precision: FinitePrecisionConfig,
    /// Exhaustive self-check depth; 0 disables it.
    pub pre_verify_depth: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { precision: FinitePrecisionConfig::default(), pre_verify_depth: PRE_VERIFY_DEPTH }
    }
}

/// `exp(2πi m/k)`, exact on the axes and otherwise evaluated from the
/// reduced fraction in `(-1/2, 1/2]` of a turn.
pub fn root_of_unity(m: usize, k: usize) -> Complex64 {
    assert!(k > 0, "root of unity of order 0");
    let m = m % k;
    match (4 * m) % (4 * k) {
        0 => return Complex64::new(1.0, 0.0),
        x if x == k => return Complex64::new(0.0, 1.0),
        x if x == 2 * k => return Complex64::new(-1.0, 0.0),
        x if x == 3 * k => return Complex64::new(0.0, -1.0),
        _ => {}
    }
    let mut turn = m as f64 / k as f64;
    if turn > 0.5 {
        turn -= 1.0;
    }
    let (sin, cos) = (2.0 * std::f64::consts::PI * turn).sin_cos();
    Complex64::new(cos, sin)
}

/// The section, cocycle and effective-token tables for `G ⊵ N`.
#[derive(Clone, Debug)]
pub struct SectionCocycle {
    pub quotient_map: QuotientMap,
    pub normal: SubgroupMask,
    q: usize,
    n_g: usize,
    d_table: Vec<Element>,
    kappa_table: Vec<Element>,
}

impl SectionCocycle {
    /// `d(h', h) = s(h') s(h) s(h'h)⁻¹`.
    pub fn d(&self, h_prime: Element, h: Element) -> Element {
        self.d_table[h_prime.index() * self.q + h.index()]
    }

    /// `κ(h', g)`, the token the deeper layers see.
    pub fn kappa(&self, h_prime: Element, g: Element) -> Element {
        self.kappa_table[h_prime.index() * self.n_g + g.index()]
    }

    pub fn section(&self, h: Element) -> Element {
        self.quotient_map.lift(h)
    }
}

pub fn build_section_cocycle(g: &FiniteGroup, n: &SubgroupMask) -> Result<SectionCocycle, CompileError> {
    let quotient_map = g.quotient(n)?;
    let qg = &quotient_map.quotient;
    let s = |h: Element| quotient_map.lift(h);
    let (q, n_g) = (qg.order(), g.order());
    let outside = |what: &str| {
        CompileError::Group(GroupError::InvalidTable(format!("{what} value outside the normal subgroup")))
    };

    let mut d_table = Vec::with_capacity(q * q);
    for hp in qg.elements() {
        for h in qg.elements() {
            let hph = qg.multiply(hp, h);
            let d = g.product(&[s(hp), s(h), g.inverse(s(hph))]);
            if !n.contains(d) {
                return Err(outside("cocycle"));
            }
            d_table.push(d);
        }
    }

    let mut kappa_table = Vec::with_capacity(q * n_g);
    for hp in qg.elements() {
        for x in g.elements() {
            let h = quotient_map.project(x);
            let inner = g.multiply(g.inverse(s(h)), x);
            let rep = s(qg.multiply(hp, h));
            let conj = g.product(&[rep, inner, g.inverse(rep)]);
            let kappa = g.multiply(d_table[hp.index() * q + h.index()], conj);
            if !n.contains(kappa) {
                return Err(outside("effective token"));
            }
            kappa_table.push(kappa);
        }
    }
    Ok(SectionCocycle { quotient_map, normal: n.clone(), q, n_g, d_table, kappa_table })
}

/// Single-layer model for an Abelian group.
pub fn compile_abelian(g: &FiniteGroup) -> Result<DcdSsm, CompileError> {
    compile_abelian_with(g, &CompileOptions::default())
}

pub fn compile_abelian_with(g: &FiniteGroup, opts: &CompileOptions) -> Result<DcdSsm, CompileError> {
    let model = build_abelian(g, opts.precision)?;
    pre_verify(model, g, opts.pre_verify_depth)
}

/// Multi-layer model along the derived series.
pub fn compile(g: &FiniteGroup) -> Result<DcdSsm, CompileError> {
    compile_with(g, None, &CompileOptions::default())
}

/// Multi-layer model along a caller-supplied series.
pub fn compile_with_series(g: &FiniteGroup, series: &SubnormalSeries) -> Result<DcdSsm, CompileError> {
    compile_with(g, Some(series), &CompileOptions::default())
}

pub fn compile_with(
    g: &FiniteGroup,
    series: Option<&SubnormalSeries>,
    opts: &CompileOptions,
) -> Result<DcdSsm, CompileError> {
    let series = match series {
        // Revalidate: the series may have been built against another group.
        Some(s) => SubnormalSeries::new(g, s.chain().to_vec())?,
        None => g.derived_series()?,
    };
    let model = build(g, series.chain(), opts.precision)?;
    pre_verify(model, g, opts.pre_verify_depth)
}

fn pre_verify(model: DcdSsm, g: &FiniteGroup, depth: usize) -> Result<DcdSsm, CompileError> {
    if depth == 0 {
        return Ok(model);
    }
    let report = verifier::verify_exhaustive(&model, g, depth)?;
    match report.verdict {
        Verdict::Pass => Ok(model),
        Verdict::Fail => Err(CompileError::PreVerification(format!(
            "counterexample {:?}",
            report.first_counterexample
        ))),
    }
}

fn build(g: &FiniteGroup, chain: &[SubgroupMask], precision: FinitePrecisionConfig) -> Result<DcdSsm, CompileError> {
    if chain.len() <= 2 {
        return build_abelian(g, precision);
    }
    let normal = &chain[1];
    let cocycle = build_section_cocycle(g, normal)?;
    let qm = &cocycle.quotient_map;
    let top = build_abelian(&qm.quotient, precision)?;

    let (sub, embedding) = g.subgroup_as_group(normal)?;
    let inner_chain: Vec<SubgroupMask> = chain[1..].iter().map(|m| g.restrict_mask(&embedding, m)).collect();
    let inner = build(&sub, &inner_chain, precision)?;
    let mut local = vec![u32::MAX; g.order()];
    for (i, x) in embedding.iter().enumerate() {
        local[x.index()] = i as u32;
    }

    let n_tokens = g.order();
    let top_layer = &top.layers()[0];
    // Quotient element h' sits at state λ(h'), since the layer starts at ones.
    let top_state = |h: Element| top_layer.entry(0, h.0).expect("abelian tables are total").lambda.clone();

    let mut first = LayerTable::context_free(top_layer.dim(), n_tokens);
    for x in g.elements() {
        first.set(0, x.0, top_layer.entry(0, qm.project(x).0).expect("total").clone())?;
    }
    let mut layers = vec![first];

    for (depth, inner_layer) in inner.layers().iter().enumerate() {
        let inner_anchors = inner_layer.context_anchors();
        let mut anchors = Vec::with_capacity(qm.quotient.order() * inner_anchors.len());
        for hp in qm.quotient.elements() {
            for c in inner_anchors {
                let mut a = top_state(hp);
                a.extend_from_slice(c);
                anchors.push(a);
            }
        }
        let mut table = LayerTable::new(inner_layer.dim(), depth + 1, anchors, n_tokens)?;
        for hp in qm.quotient.elements() {
            for (ci, _) in inner_anchors.iter().enumerate() {
                for x in g.elements() {
                    let kappa = local[cocycle.kappa(hp, x).index()];
                    let entry = inner_layer.entry(ci, kappa).ok_or(SsmError::MissingTableEntry {
                        layer: depth,
                        anchor: ci,
                        token: kappa,
                    })?;
                    table.set(hp.index() * inner_anchors.len() + ci, x.0, entry.clone())?;
                }
            }
        }
        layers.push(table);
    }

    let mut h0 = vec![vec![Complex64::new(1.0, 0.0); top_layer.dim()]];
    h0.extend(inner.h0().iter().cloned());

    let mut decoder = Vec::with_capacity(g.order());
    for hp in qm.quotient.elements() {
        for a in inner.decoder() {
            let mut state = top_state(hp);
            state.extend_from_slice(&a.state);
            let element = g.multiply(embedding[a.element.index()], qm.lift(hp));
            decoder.push(DecoderAnchor { state, element });
        }
    }
    Ok(DcdSsm::new(g.spec().to_string(), n_tokens, precision, layers, h0, decoder)?)
}

fn build_abelian(g: &FiniteGroup, precision: FinitePrecisionConfig) -> Result<DcdSsm, CompileError> {
    let dec = g.abelian_decomposition()?;
    let lambda = |x: Element| -> Vec<Complex64> {
        dec.coordinates(x)
            .iter()
            .zip(&dec.cyclic_orders)
            .map(|(&m, &k)| root_of_unity(m, k))
            .collect()
    };
    let mut layer = LayerTable::context_free(dec.rank(), g.order());
    let mut decoder = Vec::with_capacity(g.order());
    for x in g.elements() {
        let l = lambda(x);
        decoder.push(DecoderAnchor { state: l.clone(), element: x });
        layer.set(0, x.0, Transition::rotation(l))?;
    }
    let h0 = vec![vec![Complex64::new(1.0, 0.0); dec.rank()]];
    Ok(DcdSsm::new(g.spec().to_string(), g.order(), precision, vec![layer], h0, decoder)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() <= 1e-12
    }

    #[test]
    fn roots_of_unity() {
        assert_eq!(root_of_unity(1, 2), Complex64::new(-1.0, 0.0));
        assert_eq!(root_of_unity(3, 4), Complex64::new(0.0, -1.0));
        assert_eq!(root_of_unity(0, 7), Complex64::new(1.0, 0.0));
        for k in 1..=60 {
            for m in 0..k {
                let z = root_of_unity(m, k);
                assert!((z.norm() - 1.0).abs() <= 4e-16);
                assert!(close(z, Complex64::from_polar(1.0, 2.0 * PI * m as f64 / k as f64)));
            }
        }
    }

    #[test]
    fn abelian_examples() {
        let c2 = FiniteGroup::cyclic(2).unwrap();
        let m = compile_abelian(&c2).unwrap();
        assert_eq!(m.num_layers(), 1);
        let l = &m.layers()[0];
        assert_eq!(l.entry(0, 0).unwrap().lambda, vec![Complex64::new(1.0, 0.0)]);
        assert_eq!(l.entry(0, 1).unwrap().lambda, vec![Complex64::new(-1.0, 0.0)]);
        assert_eq!(m.reachable_states(10).unwrap().len(), 2);

        let c60 = FiniteGroup::cyclic(60).unwrap();
        let m = compile_abelian(&c60).unwrap();
        let got = m.layers()[0].entry(0, 51).unwrap().lambda[0];
        assert!(close(got, Complex64::from_polar(1.0, 2.0 * PI * 51.0 / 60.0)));

        let c2c4 = FiniteGroup::parse("product:cyclic:2,cyclic:4").unwrap();
        let m = compile_abelian(&c2c4).unwrap();
        let g = c2c4.element("(1,3)").unwrap();
        let got = &m.layers()[0].entry(0, g.0).unwrap().lambda;
        assert_eq!(got, &vec![Complex64::new(-1.0, 0.0), Complex64::new(0.0, -1.0)]);
        assert!(close(got[1], Complex64::from_polar(1.0, 3.0 * PI / 2.0)));
    }

    #[test]
    fn representation_property() {
        for spec in ["cyclic:6", "product:cyclic:2,cyclic:4", "product:cyclic:3,cyclic:6", "cyclic:60"] {
            let g = FiniteGroup::parse(spec).unwrap();
            let m = build_abelian(&g, FinitePrecisionConfig::default()).unwrap();
            let lam = |x: Element| m.layers()[0].entry(0, x.0).unwrap().lambda.clone();
            for a in g.elements() {
                for b in g.elements() {
                    let ab = lam(g.multiply(a, b));
                    for ((x, y), z) in lam(a).iter().zip(lam(b)).zip(ab) {
                        assert!(close(x * y, z), "{spec}");
                    }
                }
            }
        }
    }

    #[test]
    fn s3_cocycle() {
        let s3 = FiniteGroup::symmetric(3).unwrap();
        let n = s3.commutator_subgroup();
        let sc = build_section_cocycle(&s3, &n).unwrap();
        let r = s3.element("(123)").unwrap();
        let r2 = s3.element("(132)").unwrap();
        let s = s3.element("(12)").unwrap();
        let e_coset = sc.quotient_map.project(s3.identity());
        let s_coset = sc.quotient_map.project(s);
        assert_eq!(sc.kappa(e_coset, r), r);
        assert_eq!(sc.kappa(s_coset, r), r2);
        assert_eq!(sc.section(e_coset), s3.identity());
        for hp in sc.quotient_map.quotient.elements() {
            assert_eq!(sc.kappa(hp, s3.identity()), s3.identity());
        }
    }

    #[test]
    fn cocycle_identities_hold_exhaustively() {
        for spec in ["symmetric:3", "alternating:4", "symmetric:4"] {
            let g = FiniteGroup::parse(spec).unwrap();
            let n = g.commutator_subgroup();
            let sc = build_section_cocycle(&g, &n).unwrap();
            let qg = &sc.quotient_map.quotient;
            for hp in qg.elements() {
                assert_eq!(sc.d(hp, qg.identity()), g.identity());
                assert_eq!(sc.d(qg.identity(), hp), g.identity());
                for h in qg.elements() {
                    let lhs = g.multiply(sc.section(hp), sc.section(h));
                    let rhs = g.multiply(sc.d(hp, h), sc.section(qg.multiply(hp, h)));
                    assert_eq!(lhs, rhs);
                }
                for x in g.elements() {
                    assert!(n.contains(sc.kappa(hp, x)));
                }
            }
        }
    }

    #[test]
    fn solvable_groups_get_derived_length_layers() {
        let s3 = FiniteGroup::symmetric(3).unwrap();
        let m = compile(&s3).unwrap();
        assert_eq!(m.num_layers(), 2);
        let first: Vec<f64> = (0..6).map(|x| m.layers()[0].entry(0, x).unwrap().lambda[0].re).collect();
        assert!(first.iter().all(|&re| re == 1.0 || re == -1.0));
        assert_eq!(m.reachable_states(10).unwrap().len(), 6);

        assert_eq!(compile(&FiniteGroup::cyclic(6).unwrap()).unwrap().num_layers(), 1);
        let a4 = FiniteGroup::alternating(4).unwrap();
        let m = compile(&a4).unwrap();
        assert_eq!(m.num_layers(), 2);
        assert_eq!(m.reachable_states(12).unwrap().len(), 12);
        assert_eq!(compile(&FiniteGroup::symmetric(4).unwrap()).unwrap().num_layers(), 3);
    }

    #[test]
    fn a5_is_rejected() {
        let a5 = FiniteGroup::alternating(5).unwrap();
        match compile(&a5) {
            Err(CompileError::NotSolvable { residual }) => assert_eq!(residual, SubgroupMask::whole(&a5)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn caller_series() {
        let c4 = FiniteGroup::cyclic(4).unwrap();
        let chain = vec![SubgroupMask::whole(&c4), c4.generate(&[Element(2)]), SubgroupMask::trivial(&c4)];
        let series = SubnormalSeries::new(&c4, chain).unwrap();
        let m = compile_with_series(&c4, &series).unwrap();
        assert_eq!(m.num_layers(), 2);
        for layer in m.layers() {
            for (_, t) in layer.entries() {
                for z in &t.lambda {
                    assert!(z.im == 0.0 && z.re.abs() == 1.0, "{z}");
                }
            }
        }

        let trivial = SubnormalSeries::new(&c4, vec![SubgroupMask::whole(&c4), SubgroupMask::trivial(&c4)]).unwrap();
        assert_eq!(compile_with_series(&c4, &trivial).unwrap(), compile_abelian(&c4).unwrap());

        let s3 = FiniteGroup::symmetric(3).unwrap();
        let foreign = SubnormalSeries::new(&c4, vec![SubgroupMask::whole(&c4), SubgroupMask::trivial(&c4)]).unwrap();
        assert!(matches!(
            compile_with_series(&s3, &foreign),
            Err(CompileError::Group(GroupError::InvalidSeries(_)))
        ));
    }
}
