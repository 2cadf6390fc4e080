//! One-dimensional complex affine recurrences `x ↦ λx + b`.
//!
//! A diagonal SSM decouples into one such map per state coordinate, so this is
//! the atom everything else is built from: classification of the orbit type,
//! composition (the associative operator behind the parallel scan), closed
//! form evaluation and the translation/divergence witnesses for pairs of
//! neutral rotations about different centers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default band for `| |λ| - 1 |` to count as unit modulus.
pub const NEUTRAL_TOLERANCE: f64 = 1e-9;
/// Magnitudes beyond this are pinned to the `Diverged` sentinel.
pub const INF_THRESHOLD: f64 = 1e12;
/// Default exponent bound for [`divergence_witness`].
pub const WITNESS_BOUND: u32 = 720;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("rotation centers coincide; the composed translation is zero")]
    DegenerateCenters,
    #[error("map is not a neutral rotation (|λ| = {modulus}, λ = {lambda})")]
    NotNeutral { lambda: Complex64, modulus: f64 },
    #[error("no exponent pair up to {bound} brings λ₁^α₁·λ₂^α₂ within {tol} of 1")]
    NotFound { bound: u32, tol: f64 },
    #[error("non-finite affine coefficient")]
    NonFinite,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap1D {
    pub lambda: Complex64,
    pub b: Complex64,
}

impl AffineMap1D {
    pub const IDENTITY: AffineMap1D = AffineMap1D {
        lambda: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
    };

    pub fn new(lambda: Complex64, b: Complex64) -> Result<AffineMap1D, DynamicsError> {
        if !(lambda.is_finite() && b.is_finite()) {
            return Err(DynamicsError::NonFinite);
        }
        Ok(AffineMap1D { lambda, b })
    }

    /// Rotation by `lambda` about `center`: `x ↦ λ(x - c) + c`.
    pub fn rotation(lambda: Complex64, center: Complex64) -> AffineMap1D {
        AffineMap1D { lambda, b: center * (Complex64::new(1.0, 0.0) - lambda) }
    }

    #[inline]
    pub fn apply(&self, x: Complex64) -> Complex64 {
        self.lambda * x + self.b
    }

    /// `self` first, then `next`.
    #[inline]
    pub fn then(&self, next: &AffineMap1D) -> AffineMap1D {
        compose(self, next)
    }

    pub fn fixed_point(&self) -> Option<Complex64> {
        fixed_point(self)
    }
}

/// Composition with `f` applied first: `(g∘f)(x) = λ_g λ_f x + (λ_g b_f + b_g)`.
#[inline]
pub fn compose(f: &AffineMap1D, g: &AffineMap1D) -> AffineMap1D {
    AffineMap1D {
        lambda: g.lambda * f.lambda,
        b: g.lambda * f.b + g.b,
    }
}

/// `c = b / (1 - λ)`, absent exactly when `λ = 1`.
pub fn fixed_point(m: &AffineMap1D) -> Option<Complex64> {
    if m.lambda == Complex64::new(1.0, 0.0) {
        None
    } else {
        Some(m.b / (Complex64::new(1.0, 0.0) - m.lambda))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DynamicsKind {
    Contraction,
    NeutralRotation,
    AllFixed,
    Translation,
    Expansive,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicsClass {
    pub kind: DynamicsKind,
    /// Present for contraction, neutral rotation and expansion.
    pub center: Option<Complex64>,
}

/// Case split on `|λ|`, with `tol` as the width of the neutral band and of
/// the `λ = 1` / `b = 0` tests.
pub fn classify(m: &AffineMap1D, tol: f64) -> DynamicsClass {
    let one = Complex64::new(1.0, 0.0);
    if (m.lambda - one).norm() <= tol {
        let kind = if m.b.norm() <= tol {
            DynamicsKind::AllFixed
        } else {
            DynamicsKind::Translation
        };
        return DynamicsClass { kind, center: None };
    }
    let center = Some(m.b / (one - m.lambda));
    let r = m.lambda.norm();
    let kind = if (r - 1.0).abs() <= tol {
        DynamicsKind::NeutralRotation
    } else if r < 1.0 {
        DynamicsKind::Contraction
    } else {
        DynamicsKind::Expansive
    };
    DynamicsClass { kind, center }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Orbit {
    Finite(Complex64),
    /// Magnitude exceeded [`INF_THRESHOLD`] (or overflowed).
    Diverged,
}

impl Orbit {
    pub fn value(self) -> Option<Complex64> {
        match self {
            Orbit::Finite(z) => Some(z),
            Orbit::Diverged => None,
        }
    }
}

fn pin(z: Complex64) -> Orbit {
    if z.is_finite() && z.norm() <= INF_THRESHOLD {
        Orbit::Finite(z)
    } else {
        Orbit::Diverged
    }
}

/// `x_t = λ^t (x_0 - c) + c` for `λ ≠ 1`, else `x_0 + t·b`.
pub fn closed_form(m: &AffineMap1D, x0: Complex64, t: u64) -> Orbit {
    match fixed_point(m) {
        None => pin(x0 + m.b * t as f64),
        Some(c) => {
            let power = complex_powu(m.lambda, t);
            pin(power * (x0 - c) + c)
        }
    }
}

/// Iterates the map `t` times, pinning to `Diverged` once the magnitude
/// crosses the threshold.
pub fn iterate(m: &AffineMap1D, x0: Complex64, t: u64) -> Orbit {
    let mut x = x0;
    for _ in 0..t {
        x = m.apply(x);
        if let Orbit::Diverged = pin(x) {
            return Orbit::Diverged;
        }
    }
    pin(x)
}

fn complex_powu(z: Complex64, mut e: u64) -> Complex64 {
    let mut base = z;
    let mut acc = Complex64::new(1.0, 0.0);
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

fn check_neutral(lambda: Complex64, tol: f64) -> Result<(), DynamicsError> {
    let modulus = lambda.norm();
    if (modulus - 1.0).abs() > tol || (lambda - Complex64::new(1.0, 0.0)).norm() <= tol {
        return Err(DynamicsError::NotNeutral { lambda, modulus });
    }
    Ok(())
}

/// Rotation by `λ` about `c1` followed by rotation by `λ*` about `c2` is the
/// translation `h ↦ h + (1 - λ*)(c2 - c1)`; returns that offset.
pub fn neutral_translation(
    lambda: Complex64,
    c1: Complex64,
    c2: Complex64,
) -> Result<Complex64, DynamicsError> {
    check_neutral(lambda, NEUTRAL_TOLERANCE)?;
    if (c2 - c1).norm() <= NEUTRAL_TOLERANCE {
        return Err(DynamicsError::DegenerateCenters);
    }
    Ok((Complex64::new(1.0, 0.0) - lambda.conj()) * (c2 - c1))
}

/// Exponents `(α1, α2)` with `λ1^α1 · λ2^α2 ≈ 1` while neither power is 1.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub alpha1: u32,
    pub alpha2: u32,
    /// `|λ1^α1 λ2^α2 - 1|`.
    pub residual: f64,
}

impl Witness {
    pub fn block_len(&self) -> u32 {
        self.alpha1 + self.alpha2
    }
}

/// Exhaustive search over `1 ≤ α1, α2 ≤ bound`.
///
/// Among pairs whose residual is within `tol`, returns the shortest block
/// (smallest `α1 + α2`), breaking ties by smaller `α1`.
pub fn divergence_witness(
    m1: &AffineMap1D,
    m2: &AffineMap1D,
    bound: u32,
    tol: f64,
) -> Result<Witness, DynamicsError> {
    for m in [m1, m2] {
        check_neutral(m.lambda, NEUTRAL_TOLERANCE)?;
    }
    let (c1, c2) = (fixed_point(m1).unwrap(), fixed_point(m2).unwrap());
    if (c1 - c2).norm() <= NEUTRAL_TOLERANCE {
        return Err(DynamicsError::DegenerateCenters);
    }

    let powers = |z: Complex64| {
        let mut out = Vec::with_capacity(bound as usize + 1);
        let mut acc = Complex64::new(1.0, 0.0);
        out.push(acc);
        for _ in 0..bound {
            acc *= z;
            out.push(acc);
        }
        out
    };
    let p1 = powers(m1.lambda);
    let p2 = powers(m2.lambda);
    let one = Complex64::new(1.0, 0.0);

    let mut best: Option<Witness> = None;
    for alpha1 in 1..=bound {
        let a = p1[alpha1 as usize];
        if (a - one).norm() <= tol {
            continue;
        }
        for alpha2 in 1..=bound {
            let b = p2[alpha2 as usize];
            if (b - one).norm() <= tol {
                continue;
            }
            let residual = (a * b - one).norm();
            if residual > tol {
                continue;
            }
            let cand = Witness { alpha1, alpha2, residual };
            let better = match best {
                None => true,
                Some(w) => (cand.block_len(), cand.alpha1) < (w.block_len(), w.alpha1),
            };
            if better {
                best = Some(cand);
            }
        }
    }
    best.ok_or(DynamicsError::NotFound { bound, tol })
}

/// The affine map of the block `m1^α1` then `m2^α2`.
pub fn witness_block(m1: &AffineMap1D, m2: &AffineMap1D, w: &Witness) -> AffineMap1D {
    let mut acc = AffineMap1D::IDENTITY;
    for _ in 0..w.alpha1 {
        acc = acc.then(m1);
    }
    for _ in 0..w.alpha2 {
        acc = acc.then(m2);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn classify_examples() {
        let m = AffineMap1D::new(c(0.5, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(classify(&m, NEUTRAL_TOLERANCE), DynamicsClass {
            kind: DynamicsKind::Contraction,
            center: Some(c(0.0, 0.0))
        });
        let m = AffineMap1D::IDENTITY;
        assert_eq!(classify(&m, NEUTRAL_TOLERANCE).kind, DynamicsKind::AllFixed);
        assert_eq!(classify(&m, NEUTRAL_TOLERANCE).center, None);

        let lambda = Complex64::from_polar(1.0, PI / 3.0);
        let m = AffineMap1D::new(lambda, c(1.0, 0.0)).unwrap();
        let class = classify(&m, NEUTRAL_TOLERANCE);
        assert_eq!(class.kind, DynamicsKind::NeutralRotation);
        let center = class.center.unwrap();
        assert!(close(center, c(1.0, 0.0) / (c(1.0, 0.0) - lambda), 1e-15));
        // Oracle: the distance to the center is preserved along 100 iterates.
        let mut x = c(3.0, -2.0);
        let r0 = (x - center).norm();
        for _ in 0..100 {
            x = m.apply(x);
            assert!(((x - center).norm() - r0).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_points() {
        let m = AffineMap1D::new(c(2.0, 0.0), c(-1.0, 0.0)).unwrap();
        assert_eq!(fixed_point(&m), Some(c(1.0, 0.0)));
        assert_eq!(m.apply(c(1.0, 0.0)), c(1.0, 0.0));
        let m = AffineMap1D::new(c(1.0, 0.0), c(3.0, 0.0)).unwrap();
        assert_eq!(fixed_point(&m), None);
        let m = AffineMap1D::new(c(0.0, 0.0), c(0.25, 4.0)).unwrap();
        assert_eq!(fixed_point(&m), Some(c(0.25, 4.0)));
        assert!(AffineMap1D::new(c(f64::NAN, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn compose_examples() {
        let f = AffineMap1D::new(c(2.0, 0.0), c(1.0, 0.0)).unwrap();
        let g = AffineMap1D::new(c(3.0, 0.0), c(0.0, 0.0)).unwrap();
        let h = compose(&f, &g);
        assert_eq!(h, AffineMap1D { lambda: c(6.0, 0.0), b: c(3.0, 0.0) });
        for x in [c(0.0, 0.0), c(1.0, 0.0)] {
            assert_eq!(h.apply(x), g.apply(f.apply(x)));
        }
        assert_eq!(compose(&f, &AffineMap1D::IDENTITY), f);
        assert_eq!(compose(&AffineMap1D::IDENTITY, &f), f);
    }

    #[test]
    fn conjugate_rotations_compose_to_translation() {
        let lambda = Complex64::from_polar(1.0, 0.7);
        let (c1, c2) = (c(0.3, -1.0), c(2.0, 0.5));
        let m = compose(
            &AffineMap1D::rotation(lambda, c1),
            &AffineMap1D::rotation(lambda.conj(), c2),
        );
        assert!(close(m.lambda, c(1.0, 0.0), 1e-15));
        let expected = (c(1.0, 0.0) - lambda.conj()) * (c2 - c1);
        assert!(close(m.b, expected, 1e-12));
    }

    #[test]
    fn closed_form_examples() {
        let m = AffineMap1D::new(c(1.0, 0.0), c(2.0, 0.0)).unwrap();
        assert_eq!(closed_form(&m, c(0.0, 0.0), 5), Orbit::Finite(c(10.0, 0.0)));
        let m = AffineMap1D::new(c(0.5, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(closed_form(&m, c(8.0, 0.0), 3), Orbit::Finite(c(1.0, 0.0)));
        let m = AffineMap1D::new(c(0.0, 1.0), c(0.0, 0.0)).unwrap();
        assert_eq!(closed_form(&m, c(1.0, 0.0), 4), Orbit::Finite(c(1.0, 0.0)));
        let m = AffineMap1D::new(c(2.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(closed_form(&m, c(1.0, 0.0), 60), Orbit::Diverged);
        assert_eq!(iterate(&m, c(1.0, 0.0), 60), Orbit::Diverged);
    }

    #[test]
    fn neutral_translation_examples() {
        let t = neutral_translation(c(0.0, 1.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!(close(t, c(1.0, 1.0), 1e-15));
        let via_compose = compose(
            &AffineMap1D::rotation(c(0.0, 1.0), c(0.0, 0.0)),
            &AffineMap1D::rotation(c(0.0, -1.0), c(1.0, 0.0)),
        );
        assert!(close(via_compose.b, t, 1e-15));
        let t = neutral_translation(c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!(close(t, c(2.0, 0.0), 1e-15));
        assert_eq!(
            neutral_translation(c(-1.0, 0.0), c(1.0, 1.0), c(1.0, 1.0)),
            Err(DynamicsError::DegenerateCenters)
        );
        assert!(matches!(
            neutral_translation(c(0.5, 0.0), c(0.0, 0.0), c(1.0, 0.0)),
            Err(DynamicsError::NotNeutral { .. })
        ));
    }

    #[test]
    fn witness_examples() {
        let w3 = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        let m1 = AffineMap1D::rotation(w3, c(0.0, 0.0));
        let m2 = AffineMap1D::rotation(w3, c(1.0, 0.0));
        let w = divergence_witness(&m1, &m2, WITNESS_BOUND, 1e-9).unwrap();
        assert_eq!((w.alpha1, w.alpha2), (1, 2));

        let m1 = AffineMap1D::rotation(c(-1.0, 0.0), c(0.0, 0.0));
        let m2 = AffineMap1D::rotation(c(-1.0, 0.0), c(1.0, 0.0));
        let w = divergence_witness(&m1, &m2, WITNESS_BOUND, 1e-9).unwrap();
        assert_eq!((w.alpha1, w.alpha2), (1, 1));
        let block = witness_block(&m1, &m2, &w);
        assert!(close(block.b, c(2.0, 0.0), 1e-15));

        let m2 = AffineMap1D::rotation(c(-1.0, 0.0), c(0.0, 0.0));
        assert_eq!(
            divergence_witness(&m1, &m2, WITNESS_BOUND, 1e-9),
            Err(DynamicsError::DegenerateCenters)
        );
    }

    #[test]
    fn witness_not_found_for_irrational_angles_and_small_bound() {
        let m1 = AffineMap1D::rotation(Complex64::from_polar(1.0, 1.0), c(0.0, 0.0));
        let m2 = AffineMap1D::rotation(Complex64::from_polar(1.0, 2.0_f64.sqrt()), c(1.0, 0.0));
        assert!(matches!(
            divergence_witness(&m1, &m2, 5, 1e-9),
            Err(DynamicsError::NotFound { .. })
        ));
    }
}
