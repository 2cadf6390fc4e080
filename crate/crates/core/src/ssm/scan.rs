//! Parallel-prefix evaluation of a model, layer by layer.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{is_inf, DcdSsm, Decoded, SsmError, SsmState, INF_STATE};
use crate::dynamics::{compose, AffineMap1D};
use crate::group::Element;

/// Levels shorter than this are combined on the calling thread.
const PAR_THRESHOLD: usize = 4096;

/// Inclusive prefix fold `[x0, op(x0,x1), op(op(x0,x1),x2), …]`.
///
/// Work-efficient pairwise scheme: combine adjacent pairs, scan the half-length
/// sequence recursively, then fill in the even positions. The tree shape only
/// depends on the length, so results do not depend on the thread count.
pub fn parallel_prefix<T, F>(items: &[T], op: &F) -> Vec<T>
where
    T: Clone + Send + Sync,
    F: Fn(&T, &T) -> T + Sync,
{
    let n = items.len();
    if n <= 1 {
        return items.to_vec();
    }
    let pair = |i: usize| op(&items[2 * i], &items[2 * i + 1]);
    let pairs: Vec<T> = if n >= PAR_THRESHOLD {
        (0..n / 2).into_par_iter().map(pair).collect()
    } else {
        (0..n / 2).map(pair).collect()
    };
    let scanned = parallel_prefix(&pairs, op);
    let fill = |i: usize| {
        if i == 0 {
            items[0].clone()
        } else if i % 2 == 1 {
            scanned[i / 2].clone()
        } else {
            op(&scanned[i / 2 - 1], &items[i])
        }
    };
    if n >= PAR_THRESHOLD {
        (0..n).into_par_iter().map(fill).collect()
    } else {
        (0..n).map(fill).collect()
    }
}

impl DcdSsm {
    /// Same outputs as [`DcdSsm::forward`], computed by prefix-composing each
    /// coordinate's per-step affine maps.
    ///
    /// Layer `r`'s maps depend on the context anchors, which are read off the
    /// materialized (quantized) states of layers `< r`, so layers are scanned
    /// one after another. Intermediate scan nodes are not quantized; states are
    /// quantized once when materialized.
    pub fn scan_forward(&self, seq: &[Element]) -> Result<Vec<Decoded>, SsmError> {
        let tokens: Vec<u32> = seq.iter().map(|&x| self.check_token(x)).collect::<Result<_, _>>()?;
        let t_len = tokens.len();
        // states[r][t] is layer r after t steps.
        let mut states: Vec<Vec<Vec<Complex64>>> = Vec::with_capacity(self.layers.len());
        for (r, table) in self.layers.iter().enumerate() {
            let anchors: Vec<usize> = (0..t_len)
                .map(|t| {
                    let context: Vec<Complex64> =
                        states.iter().flat_map(|layer| layer[t].iter().copied()).collect();
                    self.context_index(r, &context)
                })
                .collect::<Result<_, _>>()?;
            let transitions = anchors
                .iter()
                .zip(&tokens)
                .map(|(&a, &tok)| table.lookup(r, a, tok))
                .collect::<Result<Vec<_>, _>>()?;

            let mut layer_states = vec![self.h0[r].clone(); t_len + 1];
            for j in 0..table.dim {
                let maps: Vec<AffineMap1D> = transitions.iter().map(|t| t.coordinate(j)).collect();
                let prefix = parallel_prefix(&maps, &compose);
                let h0 = self.h0[r][j];
                for (t, m) in prefix.iter().enumerate() {
                    layer_states[t + 1][j] = if is_inf(h0) {
                        INF_STATE
                    } else {
                        self.precision.quantize(m.apply(h0))
                    };
                }
            }
            states.push(layer_states);
        }
        Ok((1..=t_len)
            .map(|t| {
                let state = SsmState {
                    layers: states.iter().map(|layer| layer[t].clone()).collect(),
                    step_counter: t as u64,
                };
                self.decode(&state)
            })
            .collect())
    }
}
