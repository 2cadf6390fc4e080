//! Hand-built reference for `S3`: a two-automaton cascade and the equivalent
//! two-layer diagonal model.
//!
//! Elements are written `s^α r^β` with `s = (12)` and `r = (123)`. The first
//! automaton keeps the sign `q1 = (-1)^α`; the second keeps a cube root of
//! unity `q2` and rotates it by `exp(-2πiβ/3)` or its inverse, depending on
//! the freshly updated `q1`. Phases are stored as exact multiples of a sixth
//! of a turn.

use num_complex::Complex64;
use thiserror::Error;

use crate::group::{Element, FiniteGroup};
use crate::ssm::{DcdSsm, DecoderAnchor, FinitePrecisionConfig, LayerTable, Transition};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum S3Error {
    #[error("({alpha}, {beta}) is not an S3 encoding")]
    BadEncoding { alpha: u8, beta: u8 },
    #[error("state ({q1}, {q2}) is not one of the six automaton states")]
    UnknownState { q1: Complex64, q2: Complex64 },
}

/// Tabulated products the reference is checked against, rows and columns in
/// the order `e, (12), (13), (23), (123), (132)`. It is not associative (for
/// instance `((12)(12))(13) = (13)` while `(12)((12)(13)) = (23)`), so no group
/// reproduces all 36 entries.
pub const PUBLISHED_CAYLEY: [[&str; 6]; 6] = [
    ["e", "(12)", "(13)", "(23)", "(123)", "(132)"],
    ["(12)", "e", "(132)", "(123)", "(13)", "(23)"],
    ["(13)", "(123)", "e", "(132)", "(23)", "(12)"],
    ["(23)", "(132)", "(123)", "e", "(12)", "(13)"],
    ["(123)", "(13)", "(23)", "(12)", "(132)", "e"],
    ["(132)", "(23)", "(12)", "(13)", "e", "(123)"],
];

/// Canonical `S3` with index order `e, (12), (13), (23), (123), (132)`.
pub fn s3() -> FiniteGroup {
    FiniteGroup::symmetric(3).expect("S3 is valid")
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct S3Encoding {
    alpha: u8,
    beta: u8,
}

impl S3Encoding {
    pub fn new(alpha: u8, beta: u8) -> Result<S3Encoding, S3Error> {
        if alpha > 1 || beta > 2 {
            return Err(S3Error::BadEncoding { alpha, beta });
        }
        Ok(S3Encoding { alpha, beta })
    }

    pub fn alpha(self) -> u8 {
        self.alpha
    }

    pub fn beta(self) -> u8 {
        self.beta
    }
}

/// `(α, β)` for each canonical index: the listing `e, s, sr², sr, r, r²`
/// lines up with `e, (12), (13), (23), (123), (132)`.
const ENCODINGS: [(u8, u8); 6] = [(0, 0), (1, 0), (1, 2), (1, 1), (0, 1), (0, 2)];

pub fn encode_s3(g: Element) -> S3Encoding {
    let (alpha, beta) = ENCODINGS[g.index()];
    S3Encoding { alpha, beta }
}

pub fn decode_s3(enc: S3Encoding) -> Element {
    let i = ENCODINGS
        .iter()
        .position(|&p| p == (enc.alpha, enc.beta))
        .expect("encodings are exhaustive");
    Element(i as u32)
}

/// `exp(2πi p/6)` with the exact values the grid admits.
pub fn sixth_turn(p: i32) -> Complex64 {
    let half_root3 = 3f64.sqrt() / 2.0;
    match p.rem_euclid(6) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.5, half_root3),
        2 => Complex64::new(-0.5, half_root3),
        3 => Complex64::new(-1.0, 0.0),
        4 => Complex64::new(-0.5, -half_root3),
        _ => Complex64::new(0.5, -half_root3),
    }
}

/// `q1 = ±1`, `q2 = exp(2πi · q2_sixths / 6)` with `q2_sixths ∈ {0, 2, 4}`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct CascadeState {
    q1: i8,
    q2_sixths: u8,
}

impl CascadeState {
    pub const INITIAL: CascadeState = CascadeState { q1: 1, q2_sixths: 0 };

    pub fn q1(self) -> i8 {
        self.q1
    }

    pub fn q2_sixths(self) -> u8 {
        self.q2_sixths
    }

    pub fn as_complex(self) -> (Complex64, Complex64) {
        (Complex64::new(self.q1 as f64, 0.0), sixth_turn(self.q2_sixths as i32))
    }

    /// Snaps a numeric state to one of the six automaton states.
    pub fn from_complex(q1: Complex64, q2: Complex64, tol: f64) -> Result<CascadeState, S3Error> {
        for sign in [1i8, -1] {
            for p in [0u8, 2, 4] {
                let s = CascadeState { q1: sign, q2_sixths: p };
                let (a, b) = s.as_complex();
                if (a - q1).norm() <= tol && (b - q2).norm() <= tol {
                    return Ok(s);
                }
            }
        }
        Err(S3Error::UnknownState { q1, q2 })
    }
}

pub fn cascade_step(state: CascadeState, enc: S3Encoding) -> CascadeState {
    let q1 = if enc.alpha == 1 { -state.q1 } else { state.q1 };
    // Rotate by exp(-2πi β q1 / 3), i.e. -2β·q1 sixths of a turn.
    let p = state.q2_sixths as i32 - 2 * enc.beta as i32 * q1 as i32;
    CascadeState { q1, q2_sixths: p.rem_euclid(6) as u8 }
}

/// State-to-element table: `(1,1) e`, `(-1,1) s`, `(-1,e^{4πi/3}) sr²`,
/// `(-1,e^{2πi/3}) sr`, `(1,e^{-2πi/3}) r`, `(1,e^{-4πi/3}) r²`.
pub fn cascade_decode(state: CascadeState) -> Element {
    let label = match (state.q1, state.q2_sixths) {
        (1, 0) => "e",
        (-1, 0) => "(12)",
        (-1, 4) => "(13)",
        (-1, 2) => "(23)",
        (1, 4) => "(123)",
        (1, 2) => "(132)",
        _ => unreachable!("CascadeState keeps q2 on cube roots of unity"),
    };
    s3().element(label).expect("label exists")
}

pub fn cascade_run(seq: &[Element]) -> Vec<Element> {
    seq.iter()
        .scan(CascadeState::INITIAL, |st, &g| {
            *st = cascade_step(*st, encode_s3(g));
            Some(cascade_decode(*st))
        })
        .collect()
}

/// Two one-dimensional layers: `λ1(s^α r^β) = exp(-iπα)` and, keyed on the
/// pre-update sign `q1`, `λ2 = exp(-2πiβ · q1(-1)^α / 3)`; `b = 0`.
pub fn analytic_model() -> DcdSsm {
    analytic_model_with(FinitePrecisionConfig::default())
}

pub fn analytic_model_with(precision: FinitePrecisionConfig) -> DcdSsm {
    let g = s3();
    let one = Complex64::new(1.0, 0.0);
    let mut first = LayerTable::context_free(1, 6);
    let anchors = vec![vec![one], vec![-one]];
    let mut second = LayerTable::new(1, 1, anchors, 6).expect("valid layer");
    for x in g.elements() {
        let enc = encode_s3(x);
        first.set(0, x.0, Transition::rotation(vec![sixth_turn(3 * enc.alpha as i32)])).unwrap();
        for (anchor, q1_pre) in [(0usize, 1i32), (1, -1)] {
            let q1_post = if enc.alpha == 1 { -q1_pre } else { q1_pre };
            let lambda = sixth_turn(-2 * enc.beta as i32 * q1_post);
            second.set(anchor, x.0, Transition::rotation(vec![lambda])).unwrap();
        }
    }
    let decoder = [1i8, -1]
        .into_iter()
        .flat_map(|q1| [0u8, 2, 4].map(|p| CascadeState { q1, q2_sixths: p }))
        .map(|s| {
            let (a, b) = s.as_complex();
            DecoderAnchor { state: vec![a, b], element: cascade_decode(s) }
        })
        .collect();
    DcdSsm::new(
        g.spec().to_string(),
        6,
        precision,
        vec![first, second],
        vec![vec![one], vec![one]],
        decoder,
    )
    .expect("analytic S3 model is well formed")
}

/// `table[a][b]` = decoded cascade state after reading `a` then `b`.
pub fn reproduce_cayley() -> [[Element; 6]; 6] {
    let mut out = [[Element(0); 6]; 6];
    for a in 0..6u32 {
        for b in 0..6u32 {
            out[a as usize][b as usize] = cascade_run(&[Element(a), Element(b)])[1];
        }
    }
    out
}

/// [`PUBLISHED_CAYLEY`] as canonical indices.
pub fn published_cayley() -> [[Element; 6]; 6] {
    let g = s3();
    PUBLISHED_CAYLEY.map(|row| row.map(|l| g.element(l).expect("label exists")))
}
