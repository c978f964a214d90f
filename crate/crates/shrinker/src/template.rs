//! Enumeration, canonicalization, ordering, and batching of the second-order
//! templates whose instances are tested for unsatisfiability and implication.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

pub type VarId = u8;

/// A connected set of second-order literals. Literal `i` carries the implicit
/// second-order slot `i`; only the first-order variable tuples are stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Template {
    literals: Vec<Vec<VarId>>,
}

impl Template {
    pub fn new(literals: Vec<Vec<VarId>>) -> Template {
        canonicalize(&Template { literals })
    }

    pub fn literals(&self) -> &[Vec<VarId>] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn num_vars(&self) -> usize {
        num_vars(&self.literals)
    }

    /// Ordering key: ascending by size, then by the canonical literal list.
    pub fn canonical_key(&self) -> (usize, Vec<Vec<VarId>>) {
        (self.literals.len(), self.literals.clone())
    }

    pub fn is_connected(&self) -> bool {
        connected(&self.literals)
    }
}

fn num_vars(literals: &[Vec<VarId>]) -> usize {
    literals
        .iter()
        .flatten()
        .copied()
        .collect::<BTreeSet<_>>()
        .len()
}

fn connected(literals: &[Vec<VarId>]) -> bool {
    if literals.len() <= 1 {
        return true;
    }
    let mut reached = vec![false; literals.len()];
    reached[0] = true;
    let mut vars: BTreeSet<VarId> = literals[0].iter().copied().collect();
    loop {
        let mut grew = false;
        for (i, lit) in literals.iter().enumerate() {
            if !reached[i] && lit.iter().any(|v| vars.contains(v)) {
                reached[i] = true;
                vars.extend(lit.iter().copied());
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    reached.into_iter().all(|r| r)
}

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for i in 0..n {
            let mut p = rest.clone();
            p.insert(i, n - 1);
            out.push(p);
        }
    }
    out
}

/// Renumbers variables by first occurrence scanning the literal list.
pub(crate) fn renumber(literals: &[Vec<VarId>]) -> Vec<Vec<VarId>> {
    let mut map: BTreeMap<VarId, VarId> = BTreeMap::new();
    literals
        .iter()
        .map(|lit| {
            lit.iter()
                .map(|v| {
                    let next = map.len() as VarId;
                    *map.entry(*v).or_insert(next)
                })
                .collect()
        })
        .collect()
}

/// The lexicographically minimal form over all literal orderings combined with
/// first-occurrence variable renaming. Second-order slots are positional, so
/// slot renaming is absorbed by the literal reordering.
pub fn canonicalize(t: &Template) -> Template {
    let mut best: Option<Vec<Vec<VarId>>> = None;
    for perm in permutations(t.literals.len()) {
        let ordered: Vec<Vec<VarId>> =
            perm.iter().map(|&i| t.literals[i].clone()).collect();
        let renamed = renumber(&ordered);
        if best.as_ref().map_or(true, |b| renamed < *b) {
            best = Some(renamed);
        }
    }
    Template { literals: best.unwrap_or_default() }
}

/// Ordered queue of untested templates.
#[derive(Debug)]
pub struct TemplateQueue {
    pending: VecDeque<Template>,
    tested: BTreeSet<Vec<Vec<VarId>>>,
}

impl TemplateQueue {
    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn pending(&self) -> impl Iterator<Item = &Template> {
        self.pending.iter()
    }
}

/// Enumerates one canonical representative per equivalence class of connected
/// templates whose literal arities occur among `arities`, sorted ascending by
/// (size, canonical key).
pub fn build_templates(
    arities: &BTreeSet<usize>,
    max_literals: usize,
    max_vars: usize,
) -> TemplateQueue {
    let mut found: BTreeSet<Template> = BTreeSet::new();
    let mut literals: Vec<Vec<VarId>> = Vec::new();
    if max_literals >= 1 && max_vars >= 1 && !arities.is_empty() {
        extend(arities, max_literals, max_vars, &mut literals, &mut found);
    }
    let mut pending: Vec<Template> = found.into_iter().collect();
    pending.sort_by_key(|t| t.canonical_key());
    TemplateQueue { pending: pending.into(), tested: BTreeSet::new() }
}

fn extend(
    arities: &BTreeSet<usize>,
    max_literals: usize,
    max_vars: usize,
    literals: &mut Vec<Vec<VarId>>,
    found: &mut BTreeSet<Template>,
) {
    let used = num_vars(literals) as VarId;
    for &arity in arities {
        let mut tuple = Vec::with_capacity(arity);
        fill_tuple(arity, used, max_vars as VarId, &mut tuple, &mut |tuple| {
            literals.push(tuple.to_vec());
            if connected(literals) {
                found.insert(canonicalize(&Template { literals: literals.clone() }));
            }
            if literals.len() < max_literals {
                extend(arities, max_literals, max_vars, literals, found);
            }
            literals.pop();
        });
    }
}

/// Enumerates variable tuples of the given arity where a fresh variable may
/// only be introduced as the next unused id (restricted-growth form).
fn fill_tuple(
    remaining: usize,
    used: VarId,
    max_vars: VarId,
    tuple: &mut Vec<VarId>,
    f: &mut impl FnMut(&[VarId]),
) {
    if remaining == 0 {
        f(tuple);
        return;
    }
    let high = used.min(max_vars - 1);
    for v in 0..=high {
        let new_used = if v == used { used + 1 } else { used };
        tuple.push(v);
        fill_tuple(remaining - 1, new_used, max_vars, tuple, f);
        tuple.pop();
    }
}

/// Removes and returns the first `batch_size` pending templates, marking them
/// tested. Returns an empty batch once the queue is exhausted.
pub fn select_templates(q: &mut TemplateQueue, batch_size: usize) -> Vec<Template> {
    let n = batch_size.min(q.pending.len());
    let mut batch = Vec::with_capacity(n);
    for _ in 0..n {
        let t = q.pending.pop_front().unwrap();
        q.tested.insert(t.literals.clone());
        batch.push(t);
    }
    batch
}
