//! Totality analysis: argument-position subsets in which a predicate covers
//! the full cartesian product of its inferred type domains.

use std::collections::BTreeSet;

use crate::bk::{ConstId, FactBase, PredId, TypeAssignment};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TotalError {
    #[error("subset {subset:?} is not a nonempty proper subset of the positions of `{pred}`")]
    InvalidSubset { pred: String, subset: Vec<usize> },
    #[error("type domain at position {position} of `{pred}` is empty")]
    EmptyDomain { pred: String, position: usize },
}

/// A predicate that is total in `total_positions`: for every combination of
/// domain constants at those positions some fact supplies the rest. The
/// complementary `removable_positions` carry the variables a rule never needs
/// to use elsewhere.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub struct TotalFact {
    pub pred: String,
    pub arity: usize,
    pub total_positions: Vec<usize>,
    pub removable_positions: Vec<usize>,
}

/// Whether `pid` is total in the 1-based position subset `subset`. Returns
/// `Ok(None)` when total, or a witness combination of constants over `subset`
/// that no fact extends.
pub fn check_total(
    fb: &FactBase,
    types: &TypeAssignment,
    pid: PredId,
    subset: &[usize],
) -> Result<Option<Vec<ConstId>>, TotalError> {
    let sig = fb.signature(pid);
    let in_range = subset.iter().all(|&p| p >= 1 && p <= sig.arity);
    let strictly_ascending = subset.windows(2).all(|w| w[0] < w[1]);
    if subset.is_empty() || subset.len() >= sig.arity || !in_range || !strictly_ascending {
        return Err(TotalError::InvalidSubset { pred: sig.name.clone(), subset: subset.to_vec() });
    }
    let domains: Vec<&BTreeSet<ConstId>> = subset
        .iter()
        .map(|&p| {
            let d = types.domain(types.type_of(pid, p));
            if d.is_empty() {
                return Err(TotalError::EmptyDomain { pred: sig.name.clone(), position: p });
            }
            Ok(d)
        })
        .collect::<Result<_, _>>()?;
    let covered = fb.index(pid, subset).expect("validated positions");
    let product_size: usize = domains.iter().map(|d| d.len()).product();
    if covered.len() == product_size {
        // every observed key lies in the product, so equal cardinality means
        // full coverage
        return Ok(None);
    }
    let mut choice: Vec<ConstId> = Vec::with_capacity(domains.len());
    Ok(find_missing(&domains, &covered, &mut choice))
}

fn find_missing(
    domains: &[&BTreeSet<ConstId>],
    covered: &crate::bk::Index,
    choice: &mut Vec<ConstId>,
) -> Option<Vec<ConstId>> {
    if choice.len() == domains.len() {
        if covered.contains_key(choice.as_slice()) {
            return None;
        }
        return Some(choice.clone());
    }
    for &c in domains[choice.len()] {
        choice.push(c);
        if let Some(w) = find_missing(domains, covered, choice) {
            return Some(w);
        }
        choice.pop();
    }
    None
}

/// Finds, for every predicate, the minimal position subsets in which it is
/// total — equivalently the maximal removable complements. Subsets strictly
/// containing an already-total subset are suppressed, since they only shrink
/// the removable set.
pub fn find_total_facts(fb: &FactBase, types: &TypeAssignment) -> Vec<TotalFact> {
    let mut out = Vec::new();
    for pid in fb.pred_ids() {
        let sig = fb.signature(pid);
        if sig.arity < 2 || fb.num_facts(pid) == 0 {
            continue;
        }
        let mut totals: Vec<Vec<usize>> = Vec::new();
        for mask in 1u32..(1 << sig.arity) - 1 {
            let subset: Vec<usize> =
                (1..=sig.arity).filter(|p| mask & (1 << (p - 1)) != 0).collect();
            if totals.iter().any(|t| t.iter().all(|p| subset.contains(p))) {
                continue; // a subset of this one is already total
            }
            if check_total(fb, types, pid, &subset).expect("valid proper subset") == None {
                totals.push(subset);
            }
        }
        for subset in totals {
            let removable: Vec<usize> =
                (1..=sig.arity).filter(|p| !subset.contains(p)).collect();
            out.push(TotalFact {
                pred: sig.name.clone(),
                arity: sig.arity,
                total_positions: subset,
                removable_positions: removable,
            });
        }
    }
    out.sort();
    out
}
