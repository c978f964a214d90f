//! Recall analysis: for every predicate and every proper subset of its
//! argument positions, the maximum number of distinct answer substitutions.

use crate::bk::{FactBase, PredId};
use crate::exec::{map_collect, ExecMode};

pub const MAX_RECALL_ARITY: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecallError {
    #[error("predicate `{pred}` has arity {arity}, above the supported maximum of {MAX_RECALL_ARITY}")]
    ArityTooLarge { pred: String, arity: usize },
}

/// The recall of `pred` for a given input/output position split.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub struct RecallFact {
    pub pred: String,
    pub arity: usize,
    /// Ascending 1-based input (ground) positions; never the full position set.
    pub input_positions: Vec<usize>,
    /// Ascending 1-based output positions, the complement of the inputs.
    pub output_positions: Vec<usize>,
    pub bound: usize,
}

fn proper_subsets(arity: usize) -> Vec<Vec<usize>> {
    let mut subsets = Vec::new();
    for mask in 0..(1u32 << arity) - 1 {
        let s: Vec<usize> = (1..=arity).filter(|p| mask & (1 << (p - 1)) != 0).collect();
        subsets.push(s);
    }
    subsets
}

/// Computes every recall bound of the fact base: for each predicate and each
/// proper input subset (including the empty one), the maximum over keys of the
/// number of distinct output tuples.
pub fn compute_recalls(fb: &FactBase) -> Result<Vec<RecallFact>, RecallError> {
    compute_recalls_with(fb, ExecMode::default())
}

pub fn compute_recalls_with(fb: &FactBase, mode: ExecMode) -> Result<Vec<RecallFact>, RecallError> {
    for pid in fb.pred_ids() {
        let sig = fb.signature(pid);
        if sig.arity > MAX_RECALL_ARITY {
            return Err(RecallError::ArityTooLarge { pred: sig.name.clone(), arity: sig.arity });
        }
    }
    let pids: Vec<PredId> = fb.pred_ids().collect();
    let mut facts: Vec<RecallFact> = map_collect(ExecMode::default().min_of(mode), pids, |pid| {
        let sig = fb.signature(pid);
        let mut out = Vec::new();
        if fb.num_facts(pid) == 0 {
            return out;
        }
        for input in proper_subsets(sig.arity) {
            let ix = fb.index(pid, &input).expect("positions in range");
            let bound = ix.values().map(|vs| vs.len()).max().unwrap_or(0);
            let output: Vec<usize> =
                (1..=sig.arity).filter(|p| !input.contains(p)).collect();
            out.push(RecallFact {
                pred: sig.name.clone(),
                arity: sig.arity,
                input_positions: input,
                output_positions: output,
                bound,
            });
        }
        out
    })
    .into_iter()
    .flatten()
    .collect();
    facts.sort();
    Ok(facts)
}

impl ExecMode {
    fn min_of(self, other: ExecMode) -> ExecMode {
        if self == ExecMode::Sequential {
            self
        } else {
            other
        }
    }
}
