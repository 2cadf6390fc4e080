//! Self-describing JSON model documents.
//!
//! Complex numbers are `[re, im]` pairs written with shortest round-trip
//! formatting, so reading a document back reproduces every bit.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{DcdSsm, DecoderAnchor, FinitePrecisionConfig, LayerTable, SsmError, Transition};
use crate::group::Element;

pub const MODEL_FORMAT: &str = "gtssm-model/1";

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    format: String,
    group: String,
    n_tokens: usize,
    precision: FinitePrecisionConfig,
    h0: Vec<Vec<Complex64>>,
    layers: Vec<LayerDoc>,
    decoder: Vec<AnchorDoc>,
}

#[derive(Serialize, Deserialize)]
struct LayerDoc {
    dim: usize,
    context_arity: usize,
    context_anchors: Vec<Vec<Complex64>>,
    /// Keyed `"anchorIdx:tokenIdx"`.
    lambda: BTreeMap<String, Vec<Complex64>>,
    b: BTreeMap<String, Vec<Complex64>>,
}

#[derive(Serialize, Deserialize)]
struct AnchorDoc {
    state: Vec<Complex64>,
    element: u32,
}

fn parse_key(key: &str) -> Result<(usize, u32), SsmError> {
    let bad = || SsmError::Malformed(format!("bad table key {key:?}"));
    let (a, t) = key.split_once(':').ok_or_else(bad)?;
    Ok((a.parse().map_err(|_| bad())?, t.parse().map_err(|_| bad())?))
}

impl DcdSsm {
    pub fn to_json(&self) -> String {
        let layers = self
            .layers
            .iter()
            .map(|l| {
                let mut lambda = BTreeMap::new();
                let mut b = BTreeMap::new();
                for ((anchor, token), t) in l.entries() {
                    let key = format!("{anchor}:{token}");
                    lambda.insert(key.clone(), t.lambda.clone());
                    b.insert(key, t.b.clone());
                }
                LayerDoc {
                    dim: l.dim,
                    context_arity: l.context_arity,
                    context_anchors: l.context_anchors.clone(),
                    lambda,
                    b,
                }
            })
            .collect();
        let doc = ModelDoc {
            format: MODEL_FORMAT.to_string(),
            group: self.group_spec.clone(),
            n_tokens: self.n_tokens,
            precision: self.precision,
            h0: self.h0.clone(),
            layers,
            decoder: self
                .decoder
                .iter()
                .map(|a| AnchorDoc { state: a.state.clone(), element: a.element.0 })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("model documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<DcdSsm, SsmError> {
        let doc: ModelDoc = serde_json::from_str(text).map_err(|e| SsmError::Json(e.to_string()))?;
        if doc.format != MODEL_FORMAT {
            return Err(SsmError::Malformed(format!(
                "unsupported format {:?}, expected {MODEL_FORMAT:?}",
                doc.format
            )));
        }
        let mut layers = Vec::with_capacity(doc.layers.len());
        for l in doc.layers {
            let mut table = LayerTable::new(l.dim, l.context_arity, l.context_anchors, doc.n_tokens)?;
            if l.lambda.len() != l.b.len() {
                return Err(SsmError::Malformed("λ and b tables have different keys".into()));
            }
            for (key, lambda) in l.lambda {
                let b = l
                    .b
                    .get(&key)
                    .cloned()
                    .ok_or_else(|| SsmError::Malformed(format!("b table lacks key {key:?}")))?;
                let (anchor, token) = parse_key(&key)?;
                table.set(anchor, token, Transition { lambda, b })?;
            }
            layers.push(table);
        }
        let decoder = doc
            .decoder
            .into_iter()
            .map(|a| DecoderAnchor { state: a.state, element: Element(a.element) })
            .collect();
        DcdSsm::new(doc.group, doc.n_tokens, doc.precision, layers, doc.h0, decoder)
    }
}
