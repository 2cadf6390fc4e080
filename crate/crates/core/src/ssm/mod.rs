//! Multi-layer input-dependent complex diagonal SSMs with tabular parameters.
//!
//! Layer `r` updates each coordinate as `h ← λ ⊙ h + b`, where `(λ, b)` is
//! looked up by `(context anchor, token)`. The context is the joint state of
//! layers `0..r` *before* this step's update, snapped to the nearest of the
//! layer's context anchors. Layer 0 has a single empty context. The decoder
//! maps the joint state to the nearest decoder anchor, or to nothing (`⊥`)
//! when no anchor is within `decode_tolerance`.

mod precision;
mod scan;
mod serial;

use std::collections::HashMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::dynamics::AffineMap1D;
use crate::group::Element;

pub use precision::{is_inf, FinitePrecisionConfig, Quantized, INF_STATE};
pub use scan::parallel_prefix;
pub use serial::MODEL_FORMAT;

/// Reachable-state searches give up beyond this many states.
pub const MAX_REACHABLE_STATES: usize = 1_000_000;

/// Decoder output: `None` is the `⊥` marker for a decode miss.
pub type Decoded = Option<Element>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SsmError {
    #[error("invalid precision config: {0}")]
    InvalidPrecision(String),
    #[error("token {token} is out of range for {n_tokens} tokens")]
    InvalidToken { token: u32, n_tokens: usize },
    #[error("layer {layer} has no entry for context anchor {anchor}, token {token}")]
    MissingTableEntry { layer: usize, anchor: usize, token: u32 },
    #[error("layer {layer}: context state is {distance:e} from the nearest anchor")]
    ContextMiss { layer: usize, distance: f64 },
    #[error("reachable state set exceeds {0} states")]
    StateExplosion(usize),
    #[error("expansive transition |λ| = {modulus} in layer {layer}")]
    Expansive { layer: usize, modulus: f64 },
    #[error("decoder anchors {0} and {1} are not separated by more than twice the decode tolerance")]
    AnchorsTooClose(usize, usize),
    #[error("malformed model: {0}")]
    Malformed(String),
    #[error("model JSON: {0}")]
    Json(String),
}

/// Per-coordinate `(λ, b)` for one `(context, token)` key.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub lambda: Vec<Complex64>,
    pub b: Vec<Complex64>,
}

impl Transition {
    pub fn rotation(lambda: Vec<Complex64>) -> Transition {
        let b = vec![Complex64::new(0.0, 0.0); lambda.len()];
        Transition { lambda, b }
    }

    pub fn coordinate(&self, j: usize) -> AffineMap1D {
        AffineMap1D { lambda: self.lambda[j], b: self.b[j] }
    }
}

/// One diagonal layer with a dense `(context anchor, token)` table.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerTable {
    dim: usize,
    context_arity: usize,
    context_anchors: Vec<Vec<Complex64>>,
    n_tokens: usize,
    entries: Vec<Option<Transition>>,
}

impl LayerTable {
    /// `context_arity` is the number of earlier layers whose joint state keys
    /// this layer; each anchor has their combined dimension.
    pub fn new(
        dim: usize,
        context_arity: usize,
        context_anchors: Vec<Vec<Complex64>>,
        n_tokens: usize,
    ) -> Result<LayerTable, SsmError> {
        if dim == 0 {
            return Err(SsmError::Malformed("layer dimension must be positive".into()));
        }
        if context_anchors.is_empty() {
            return Err(SsmError::Malformed("a layer needs at least one context anchor".into()));
        }
        let width = context_anchors[0].len();
        if context_anchors.iter().any(|a| a.len() != width) {
            return Err(SsmError::Malformed("context anchors differ in length".into()));
        }
        if context_arity == 0 && (context_anchors.len() != 1 || width != 0) {
            return Err(SsmError::Malformed("a context-free layer has one empty anchor".into()));
        }
        let entries = vec![None; context_anchors.len() * n_tokens];
        Ok(LayerTable { dim, context_arity, context_anchors, n_tokens, entries })
    }

    /// A layer with no context, keyed on the token alone.
    pub fn context_free(dim: usize, n_tokens: usize) -> LayerTable {
        LayerTable::new(dim, 0, vec![Vec::new()], n_tokens).expect("valid context-free layer")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn context_arity(&self) -> usize {
        self.context_arity
    }

    pub fn context_anchors(&self) -> &[Vec<Complex64>] {
        &self.context_anchors
    }

    pub fn n_tokens(&self) -> usize {
        self.n_tokens
    }

    pub fn set(&mut self, anchor: usize, token: u32, t: Transition) -> Result<(), SsmError> {
        if t.lambda.len() != self.dim || t.b.len() != self.dim {
            return Err(SsmError::Malformed("transition width differs from layer dim".into()));
        }
        if anchor >= self.context_anchors.len() || token as usize >= self.n_tokens {
            return Err(SsmError::Malformed(format!("key {anchor}:{token} out of range")));
        }
        self.entries[anchor * self.n_tokens + token as usize] = Some(t);
        Ok(())
    }

    pub fn entry(&self, anchor: usize, token: u32) -> Option<&Transition> {
        self.entries
            .get(anchor * self.n_tokens + token as usize)
            .and_then(|e| e.as_ref())
    }

    pub(crate) fn entry_mut(&mut self, anchor: usize, token: u32) -> Option<&mut Transition> {
        self.entries
            .get_mut(anchor * self.n_tokens + token as usize)
            .and_then(|e| e.as_mut())
    }

    /// All present entries as `((anchor, token), transition)`.
    pub fn entries(&self) -> impl Iterator<Item = ((usize, u32), &Transition)> {
        self.entries.iter().enumerate().filter_map(move |(i, e)| {
            e.as_ref().map(|t| ((i / self.n_tokens, (i % self.n_tokens) as u32), t))
        })
    }

    fn lookup(&self, layer: usize, anchor: usize, token: u32) -> Result<&Transition, SsmError> {
        self.entry(anchor, token)
            .ok_or(SsmError::MissingTableEntry { layer, anchor, token })
    }

    /// Nearest context anchor to `context` and its distance.
    pub fn quantize_context(&self, context: &[Complex64]) -> (usize, f64) {
        nearest(&self.context_anchors, context)
    }
}

/// Single affine map equal to stepping coordinate `coord` through the given
/// `(context anchor, token)` keys in order.
pub fn lift_sequence(
    layer: &LayerTable,
    coord: usize,
    keys: &[(usize, u32)],
) -> Result<AffineMap1D, SsmError> {
    keys.iter().try_fold(AffineMap1D::IDENTITY, |acc, &(anchor, token)| {
        let t = layer.lookup(0, anchor, token)?;
        Ok(acc.then(&t.coordinate(coord)))
    })
}

fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn nearest(anchors: &[Vec<Complex64>], v: &[Complex64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, a) in anchors.iter().enumerate() {
        let d: f64 = a.iter().zip(v).map(|(x, y)| (x - y).norm_sqr()).sum();
        if d < best.1 {
            best = (i, d);
        }
    }
    (best.0, best.1.sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecoderAnchor {
    pub state: Vec<Complex64>,
    pub element: Element,
}

/// Per-layer state vectors plus the number of steps taken.
#[derive(Clone, Debug, PartialEq)]
pub struct SsmState {
    pub layers: Vec<Vec<Complex64>>,
    pub step_counter: u64,
}

impl SsmState {
    pub fn joint(&self) -> Vec<Complex64> {
        self.layers.iter().flatten().copied().collect()
    }

    /// Exact bit pattern, usable as a hash key.
    pub fn key(&self) -> Vec<u64> {
        self.layers
            .iter()
            .flatten()
            .flat_map(|z| [z.re.to_bits(), z.im.to_bits()])
            .collect()
    }
}

/// Diagnostics from one step, for drift probing.
#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub struct StepStats {
    /// Largest `| |z| - 1 |` among updated coordinates before quantization.
    pub raw_modulus_deviation: f64,
    /// Largest `| |z| - 1 |` after quantization.
    pub modulus_deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DcdSsm {
    group_spec: String,
    n_tokens: usize,
    precision: FinitePrecisionConfig,
    layers: Vec<LayerTable>,
    h0: Vec<Vec<Complex64>>,
    decoder: Vec<DecoderAnchor>,
}

impl DcdSsm {
    pub fn new(
        group_spec: String,
        n_tokens: usize,
        precision: FinitePrecisionConfig,
        layers: Vec<LayerTable>,
        h0: Vec<Vec<Complex64>>,
        decoder: Vec<DecoderAnchor>,
    ) -> Result<DcdSsm, SsmError> {
        let model = DcdSsm { group_spec, n_tokens, precision, layers, h0, decoder };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<(), SsmError> {
        self.precision.validate()?;
        if self.layers.is_empty() {
            return Err(SsmError::Malformed("a model needs at least one layer".into()));
        }
        if self.h0.len() != self.layers.len() {
            return Err(SsmError::Malformed("one initial state per layer is required".into()));
        }
        let tol = self.precision.decode_tolerance;
        let mut width = 0;
        for (r, layer) in self.layers.iter().enumerate() {
            if layer.n_tokens != self.n_tokens {
                return Err(SsmError::Malformed(format!("layer {r} has a different token count")));
            }
            if layer.context_arity != r {
                return Err(SsmError::Malformed(format!("layer {r} must consume {r} earlier layers")));
            }
            if layer.context_anchors[0].len() != width {
                return Err(SsmError::Malformed(format!("layer {r} context width mismatch")));
            }
            if self.h0[r].len() != layer.dim {
                return Err(SsmError::Malformed(format!("initial state of layer {r} has wrong width")));
            }
            for (_, t) in layer.entries() {
                if t.lambda.iter().chain(&t.b).any(|z| !z.is_finite()) {
                    return Err(SsmError::Malformed(format!("non-finite parameter in layer {r}")));
                }
                if let Some(m) = t.lambda.iter().map(|z| z.norm()).find(|&m| m > 1.0 + tol) {
                    return Err(SsmError::Expansive { layer: r, modulus: m });
                }
            }
            width += layer.dim;
        }
        for (i, a) in self.decoder.iter().enumerate() {
            if a.state.len() != width {
                return Err(SsmError::Malformed(format!("decoder anchor {i} has wrong width")));
            }
            if a.element.index() >= self.n_tokens {
                return Err(SsmError::Malformed(format!("decoder anchor {i} names no element")));
            }
        }
        for i in 0..self.decoder.len() {
            for j in i + 1..self.decoder.len() {
                if distance(&self.decoder[i].state, &self.decoder[j].state) <= 2.0 * tol {
                    return Err(SsmError::AnchorsTooClose(i, j));
                }
            }
        }
        Ok(())
    }

    pub fn group_spec(&self) -> &str {
        &self.group_spec
    }

    pub fn n_tokens(&self) -> usize {
        self.n_tokens
    }

    pub fn precision(&self) -> &FinitePrecisionConfig {
        &self.precision
    }

    pub fn layers(&self) -> &[LayerTable] {
        &self.layers
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn h0(&self) -> &[Vec<Complex64>] {
        &self.h0
    }

    pub fn decoder(&self) -> &[DecoderAnchor] {
        &self.decoder
    }

    pub fn total_dim(&self) -> usize {
        self.layers.iter().map(|l| l.dim).sum()
    }

    /// Replaces the precision regime, revalidating anchor separation.
    pub fn with_precision(mut self, precision: FinitePrecisionConfig) -> Result<DcdSsm, SsmError> {
        self.precision = precision;
        self.validate()?;
        Ok(self)
    }

    /// Negates `λ_coord` of one table entry. Intended for mutation testing.
    pub fn negate_lambda(&mut self, layer: usize, anchor: usize, token: u32, coord: usize) -> Result<(), SsmError> {
        let entry = self
            .layers
            .get_mut(layer)
            .and_then(|l| l.entry_mut(anchor, token))
            .ok_or(SsmError::MissingTableEntry { layer, anchor, token })?;
        let z = entry
            .lambda
            .get_mut(coord)
            .ok_or_else(|| SsmError::Malformed(format!("coordinate {coord} out of range")))?;
        *z = -*z;
        Ok(())
    }

    /// Moves one coordinate of one decoder anchor. Intended for mutation testing.
    pub fn shift_decoder_anchor(&mut self, anchor: usize, coord: usize, delta: Complex64) -> Result<(), SsmError> {
        let z = self
            .decoder
            .get_mut(anchor)
            .and_then(|a| a.state.get_mut(coord))
            .ok_or_else(|| SsmError::Malformed(format!("no decoder coordinate {anchor}/{coord}")))?;
        *z += delta;
        Ok(())
    }

    pub fn initial_state(&self) -> SsmState {
        SsmState { layers: self.h0.clone(), step_counter: 0 }
    }

    fn check_token(&self, token: Element) -> Result<u32, SsmError> {
        if token.index() < self.n_tokens {
            Ok(token.0)
        } else {
            Err(SsmError::InvalidToken { token: token.0, n_tokens: self.n_tokens })
        }
    }

    /// Context anchor index for `layer`, given the pre-update joint state of
    /// the layers before it.
    fn context_index(&self, layer: usize, context: &[Complex64]) -> Result<usize, SsmError> {
        let table = &self.layers[layer];
        if table.context_anchors.len() == 1 && table.context_arity == 0 {
            return Ok(0);
        }
        let (idx, dist) = table.quantize_context(context);
        if dist <= self.precision.decode_tolerance {
            Ok(idx)
        } else {
            Err(SsmError::ContextMiss { layer, distance: dist })
        }
    }

    pub fn step(&self, state: &SsmState, token: Element) -> Result<SsmState, SsmError> {
        self.step_traced(state, token).map(|(s, _)| s)
    }

    pub fn step_traced(&self, state: &SsmState, token: Element) -> Result<(SsmState, StepStats), SsmError> {
        let token = self.check_token(token)?;
        let mut context: Vec<Complex64> = Vec::with_capacity(self.total_dim());
        let mut layers = Vec::with_capacity(self.layers.len());
        let mut stats = StepStats::default();
        for (r, table) in self.layers.iter().enumerate() {
            let anchor = self.context_index(r, &context)?;
            let t = table.lookup(r, anchor, token)?;
            let old = &state.layers[r];
            let new: Vec<Complex64> = (0..table.dim)
                .map(|j| {
                    if is_inf(old[j]) {
                        return INF_STATE;
                    }
                    let q = self.precision.quantize_traced(t.lambda[j] * old[j] + t.b[j]);
                    stats.raw_modulus_deviation = stats.raw_modulus_deviation.max(q.raw_deviation);
                    stats.modulus_deviation = stats.modulus_deviation.max((q.value.norm() - 1.0).abs());
                    q.value
                })
                .collect();
            context.extend_from_slice(old);
            layers.push(new);
        }
        Ok((SsmState { layers, step_counter: state.step_counter + 1 }, stats))
    }

    /// Nearest decoder anchor and its distance.
    pub fn nearest_anchor(&self, state: &SsmState) -> Option<(Element, f64)> {
        if self.decoder.is_empty() {
            return None;
        }
        let joint = state.joint();
        let mut best = (0, f64::INFINITY);
        for (i, a) in self.decoder.iter().enumerate() {
            let d: f64 = a.state.iter().zip(&joint).map(|(x, y)| (x - y).norm_sqr()).sum();
            if d < best.1 {
                best = (i, d);
            }
        }
        Some((self.decoder[best.0].element, best.1.sqrt()))
    }

    pub fn decode(&self, state: &SsmState) -> Decoded {
        self.nearest_anchor(state)
            .filter(|&(_, d)| d <= self.precision.decode_tolerance)
            .map(|(g, _)| g)
    }

    /// Sequential evaluation, decoding after every step.
    pub fn forward(&self, seq: &[Element]) -> Result<Vec<Decoded>, SsmError> {
        let mut state = self.initial_state();
        let mut out = Vec::with_capacity(seq.len());
        for &x in seq {
            state = self.step(&state, x)?;
            out.push(self.decode(&state));
        }
        Ok(out)
    }

    /// All states reachable from `h0` in at most `horizon` steps, merging
    /// states that lie within the decode tolerance of one already found.
    pub fn reachable_states(&self, horizon: usize) -> Result<Vec<SsmState>, SsmError> {
        let tol = self.precision.decode_tolerance;
        let mut found = vec![self.initial_state()];
        let mut exact: HashMap<Vec<u64>, usize> = HashMap::new();
        exact.insert(found[0].key(), 0);
        let mut frontier = vec![0usize];
        for _ in 0..horizon {
            let mut next = Vec::new();
            for &i in &frontier {
                for token in 0..self.n_tokens {
                    let mut s = self.step(&found[i], Element(token as u32))?;
                    s.step_counter = 0;
                    let key = s.key();
                    if exact.contains_key(&key) {
                        continue;
                    }
                    let joint = s.joint();
                    let known = found.iter().position(|f| distance(&f.joint(), &joint) <= tol);
                    match known {
                        Some(j) => {
                            exact.insert(key, j);
                        }
                        None => {
                            if found.len() >= MAX_REACHABLE_STATES {
                                return Err(SsmError::StateExplosion(MAX_REACHABLE_STATES));
                            }
                            exact.insert(key, found.len());
                            next.push(found.len());
                            found.push(s);
                        }
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        Ok(found)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Parity: one coordinate, token 1 flips the sign.
    fn parity() -> DcdSsm {
        let mut layer = LayerTable::context_free(1, 2);
        layer.set(0, 0, Transition::rotation(vec![c(1.0, 0.0)])).unwrap();
        layer.set(0, 1, Transition::rotation(vec![c(-1.0, 0.0)])).unwrap();
        let decoder = vec![
            DecoderAnchor { state: vec![c(1.0, 0.0)], element: Element(0) },
            DecoderAnchor { state: vec![c(-1.0, 0.0)], element: Element(1) },
        ];
        DcdSsm::new("cyclic:2".into(), 2, Default::default(), vec![layer], vec![vec![c(1.0, 0.0)]], decoder)
            .unwrap()
    }

    #[test]
    fn parity_forward() {
        let m = parity();
        let out = m.forward(&[Element(1), Element(1), Element(0), Element(1)]).unwrap();
        assert_eq!(out, vec![Some(Element(1)), Some(Element(0)), Some(Element(0)), Some(Element(1))]);
        let s = m.step(&m.initial_state(), Element(0)).unwrap();
        assert_eq!(s.layers, m.initial_state().layers);
        assert_eq!(s.step_counter, 1);
        assert_eq!(m.reachable_states(10).unwrap().len(), 2);
        assert!(matches!(m.step(&m.initial_state(), Element(2)), Err(SsmError::InvalidToken { .. })));
    }

    #[test]
    fn missing_entries_and_bad_models() {
        let mut layer = LayerTable::context_free(1, 2);
        layer.set(0, 0, Transition::rotation(vec![c(1.0, 0.0)])).unwrap();
        let m = DcdSsm::new("cyclic:2".into(), 2, Default::default(), vec![layer.clone()], vec![vec![c(1.0, 0.0)]], vec![])
            .unwrap();
        assert_eq!(
            m.step(&m.initial_state(), Element(1)),
            Err(SsmError::MissingTableEntry { layer: 0, anchor: 0, token: 1 })
        );
        assert_eq!(m.forward(&[Element(0)]).unwrap(), vec![None]);

        let mut expansive = layer.clone();
        expansive.set(0, 1, Transition::rotation(vec![c(2.0, 0.0)])).unwrap();
        assert!(matches!(
            DcdSsm::new("x".into(), 2, Default::default(), vec![expansive], vec![vec![c(1.0, 0.0)]], vec![]),
            Err(SsmError::Expansive { .. })
        ));

        let close = vec![
            DecoderAnchor { state: vec![c(1.0, 0.0)], element: Element(0) },
            DecoderAnchor { state: vec![c(1.0, 1e-6)], element: Element(1) },
        ];
        assert!(matches!(
            DcdSsm::new("x".into(), 2, Default::default(), vec![layer], vec![vec![c(1.0, 0.0)]], close),
            Err(SsmError::AnchorsTooClose(0, 1))
        ));
    }

    #[test]
    fn lift_sequence_examples() {
        let mut layer = LayerTable::context_free(1, 2);
        layer.set(0, 0, Transition::rotation(vec![c(0.0, 1.0)])).unwrap();
        layer.set(0, 1, Transition { lambda: vec![c(1.0, 0.0)], b: vec![c(1.0, 0.0)] }).unwrap();
        let m = lift_sequence(&layer, 0, &[(0, 0), (0, 0)]).unwrap();
        assert_eq!(m, AffineMap1D { lambda: c(-1.0, 0.0), b: c(0.0, 0.0) });
        let m = lift_sequence(&layer, 0, &[(0, 1), (0, 1)]).unwrap();
        assert_eq!(m, AffineMap1D { lambda: c(1.0, 0.0), b: c(2.0, 0.0) });
        assert_eq!(lift_sequence(&layer, 0, &[]).unwrap(), AffineMap1D::IDENTITY);
        assert!(lift_sequence(&layer, 0, &[(1, 0)]).is_err());
    }

    #[test]
    fn translation_layer_hits_inf_and_stays_there() {
        let mut layer = LayerTable::context_free(1, 1);
        layer.set(0, 0, Transition { lambda: vec![c(1.0, 0.0)], b: vec![c(3e11, 0.0)] }).unwrap();
        let m = DcdSsm::new("x".into(), 1, Default::default(), vec![layer], vec![vec![c(0.0, 0.0)]], vec![])
            .unwrap();
        let mut s = m.initial_state();
        for _ in 0..3 {
            s = m.step(&s, Element(0)).unwrap();
        }
        assert!(!is_inf(s.layers[0][0]));
        s = m.step(&s, Element(0)).unwrap();
        assert!(is_inf(s.layers[0][0]));
        s = m.step(&s, Element(0)).unwrap();
        assert!(is_inf(s.layers[0][0]));
        assert_eq!(m.decode(&s), None);
    }
}
