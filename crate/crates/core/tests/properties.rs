//! Property checks that span several modules.

use gtssm::compiler::{compile, compile_with_series};
use gtssm::dynamics::{compose, iterate, AffineMap1D, Orbit};
use gtssm::group::{Element, FiniteGroup, SubgroupMask, SubnormalSeries};
use gtssm::s3;
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::OnceLock;

fn complex(range: f64) -> impl Strategy<Value = Complex64> {
    (-range..range, -range..range).prop_map(|(re, im)| Complex64::new(re, im))
}

fn affine() -> impl Strategy<Value = AffineMap1D> {
    (0.0..1.5f64, 0.0..std::f64::consts::TAU, complex(3.0))
        .prop_map(|(r, th, b)| AffineMap1D { lambda: Complex64::from_polar(r, th), b })
}

fn a4_model() -> &'static (FiniteGroup, gtssm::ssm::DcdSsm) {
    static M: OnceLock<(FiniteGroup, gtssm::ssm::DcdSsm)> = OnceLock::new();
    M.get_or_init(|| {
        let g = FiniteGroup::alternating(4).unwrap();
        let m = compile(&g).unwrap();
        (g, m)
    })
}

proptest! {
    #[test]
    fn composition_is_associative(f in affine(), g in affine(), h in affine()) {
        let left = compose(&compose(&f, &g), &h);
        let right = compose(&f, &compose(&g, &h));
        prop_assert!((left.lambda - right.lambda).norm() <= 1e-12);
        prop_assert!((left.b - right.b).norm() <= 1e-11);
    }

    #[test]
    fn composition_applies_first_map_first(f in affine(), g in affine(), x in complex(2.0)) {
        let via = compose(&f, &g).apply(x);
        prop_assert!((via - g.apply(f.apply(x))).norm() <= 1e-11);
    }

    #[test]
    fn unit_rotations_preserve_distance_to_center(th in 0.0..std::f64::consts::TAU, c in complex(2.0), x in complex(2.0), t in 0u64..500) {
        let m = AffineMap1D::rotation(Complex64::from_polar(1.0, th), c);
        let Orbit::Finite(xt) = iterate(&m, x, t) else { panic!("unit rotation diverged") };
        prop_assert!(((xt - c).norm() - (x - c).norm()).abs() <= 1e-9);
    }

    #[test]
    fn compiled_a4_tracks_running_products(seq in prop::collection::vec(0u32..12, 1..200)) {
        let (g, m) = a4_model();
        let seq: Vec<Element> = seq.into_iter().map(Element).collect();
        let want: Vec<Option<Element>> = g.prefix_products(&seq).into_iter().map(Some).collect();
        prop_assert_eq!(m.forward(&seq).unwrap(), want.clone());
        prop_assert_eq!(m.scan_forward(&seq).unwrap(), want);
    }

    #[test]
    fn cascade_agrees_with_compiled_s3(seq in prop::collection::vec(0u32..6, 1..300)) {
        let g = s3::s3();
        let seq: Vec<Element> = seq.into_iter().map(Element).collect();
        prop_assert_eq!(s3::cascade_run(&seq), g.prefix_products(&seq));
    }
}

#[test]
fn refined_series_for_s3_is_also_exact() {
    // S3 ⊵ A3 ⊵ e is the derived series; A3 cannot be refined further, so
    // the only other chain to exercise is the derived one given explicitly.
    let g = s3::s3();
    let a3 = g.commutator_subgroup();
    let series = SubnormalSeries::new(&g, vec![SubgroupMask::whole(&g), a3, SubgroupMask::trivial(&g)]).unwrap();
    let m = compile_with_series(&g, &series).unwrap();
    let r = gtssm::verifier::verify_exhaustive(&m, &g, 7).unwrap();
    assert_eq!(r.verdict, gtssm::verifier::Verdict::Pass);
}

#[test]
fn longer_series_adds_layers() {
    // C8 ⊵ C4 ⊵ C2 ⊵ e gives three parity-like layers instead of one.
    let g = FiniteGroup::cyclic(8).unwrap();
    let chain = vec![
        SubgroupMask::whole(&g),
        g.generate(&[Element(2)]),
        g.generate(&[Element(4)]),
        SubgroupMask::trivial(&g),
    ];
    let series = SubnormalSeries::new(&g, chain).unwrap();
    let m = compile_with_series(&g, &series).unwrap();
    assert_eq!(m.num_layers(), 3);
    let r = gtssm::verifier::verify_random(&m, &g, 200, 300, 1).unwrap();
    assert_eq!(r.verdict, gtssm::verifier::Verdict::Pass);
}
