//! Batch discovery of unsatisfiable and implication-reducible template
//! instances by direct conjunctive-query evaluation.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use crate::bk::{ConstId, FactBase, PredId};
use crate::eval::{for_each_assignment, find_witness};
use crate::exec::{map_collect, ExecMode};
use crate::property::{ImpliesProp, Property, UnsatProp};
use crate::template::{build_templates, permutations, renumber, select_templates, Template, VarId};

/// A template with one predicate assigned to each second-order slot.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TemplateInstance {
    pub shape: Template,
    pub preds: Vec<PredId>,
}

impl TemplateInstance {
    pub fn new(shape: Template, preds: Vec<PredId>) -> TemplateInstance {
        assert_eq!(shape.len(), preds.len());
        TemplateInstance { shape, preds }
    }

    fn literals(&self) -> Vec<(PredId, Vec<VarId>)> {
        self.preds
            .iter()
            .zip(self.shape.literals())
            .map(|(&p, vs)| (p, vs.clone()))
            .collect()
    }
}

/// How long `find_unsat_impli` keeps pulling batches off the queue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    Time(Duration),
    Batches(usize),
    Unlimited,
}

/// Whether the instance has a satisfying assignment, with one witness.
pub fn check_satisfiable(fb: &FactBase, inst: &TemplateInstance) -> Option<Vec<ConstId>> {
    find_witness(fb, &inst.literals())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImplicationOutcome {
    pub implied: bool,
    /// An assignment satisfying the premise but not the implied literal.
    pub counterexample: Option<Vec<ConstId>>,
}

/// Whether every assignment satisfying the remaining literals also satisfies
/// the literal at `implied_index`. The implied literal must be captured (all
/// of its variables occur in the other literals); callers are expected to have
/// established that the premise is satisfiable.
pub fn check_implication(
    fb: &FactBase,
    inst: &TemplateInstance,
    implied_index: usize,
) -> ImplicationOutcome {
    let literals = inst.literals();
    let (implied_pred, implied_vars) = &literals[implied_index];
    let premise: Vec<(PredId, Vec<VarId>)> = literals
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != implied_index)
        .map(|(_, l)| l.clone())
        .collect();
    let captured = implied_vars
        .iter()
        .all(|v| premise.iter().any(|(_, vs)| vs.contains(v)));
    assert!(captured, "implied literal must be captured in the instance");
    let mut counterexample = None;
    for_each_assignment(fb, &premise, &mut |assignment| {
        let tuple: Vec<ConstId> =
            implied_vars.iter().map(|&v| assignment[v as usize]).collect();
        if fb.has_fact(*implied_pred, &tuple) {
            true
        } else {
            counterexample = Some(assignment.to_vec());
            false
        }
    });
    ImplicationOutcome { implied: counterexample.is_none(), counterexample }
}

/// Canonical form of an instance: the minimum, over literal reorderings, of
/// the renumbered (predicate, variables) literal list. Instances equal up to
/// slot and variable renaming share a key.
fn instance_key(literals: &[(PredId, Vec<VarId>)]) -> Vec<(PredId, Vec<VarId>)> {
    let mut best: Option<Vec<(PredId, Vec<VarId>)>> = None;
    for perm in permutations(literals.len()) {
        let vars: Vec<Vec<VarId>> =
            perm.iter().map(|&i| literals[i].1.clone()).collect();
        let renamed = renumber(&vars);
        let candidate: Vec<(PredId, Vec<VarId>)> = perm
            .iter()
            .zip(renamed)
            .map(|(&i, vs)| (literals[i].0, vs))
            .collect();
        if best.as_ref().map_or(true, |b| candidate < *b) {
            best = Some(candidate);
        }
    }
    best.unwrap_or_default()
}

type UnsatKeys = BTreeSet<Vec<(PredId, Vec<VarId>)>>;

/// True when some strict nonempty sub-instance is a known unsatisfiable one.
fn subsumed(literals: &[(PredId, Vec<VarId>)], unsat_keys: &UnsatKeys) -> bool {
    let n = literals.len();
    for mask in 1u32..(1 << n) - 1 {
        let subset: Vec<(PredId, Vec<VarId>)> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| literals[i].clone())
            .collect();
        if unsat_keys.contains(&instance_key(&subset)) {
            return true;
        }
    }
    false
}

fn pred_name(fb: &FactBase, pid: PredId) -> String {
    fb.signature(pid).name.clone()
}

/// All properties of one template over every assignment of non-empty
/// predicates, honoring the subsumption filter. Returns the properties and
/// the canonical keys of the unsatisfiable instances it reported.
fn check_template(
    fb: &FactBase,
    shape: &Template,
    preds_by_arity: &BTreeMap<usize, Vec<PredId>>,
    unsat_keys: &UnsatKeys,
) -> (BTreeSet<Property>, UnsatKeys) {
    let mut properties = BTreeSet::new();
    let mut new_unsat = UnsatKeys::new();
    let slots: Vec<&Vec<PredId>> = match shape
        .literals()
        .iter()
        .map(|l| preds_by_arity.get(&l.len()))
        .collect::<Option<Vec<_>>>()
    {
        Some(s) => s,
        None => return (properties, new_unsat),
    };
    let mut assignment = vec![0usize; shape.len()];
    // a per-template cache over canonical instance keys avoids re-evaluating
    // symmetric assignments such as (p,q) vs (q,p) on a symmetric shape
    let mut sat_cache: BTreeMap<Vec<(PredId, Vec<VarId>)>, bool> = BTreeMap::new();
    loop {
        let preds: Vec<PredId> = assignment.iter().zip(&slots).map(|(&i, s)| s[i]).collect();
        let inst = TemplateInstance::new(shape.clone(), preds.clone());
        let literals = inst.literals();
        let mut distinct: BTreeSet<&(PredId, Vec<VarId>)> = BTreeSet::new();
        let duplicate_literal = !literals.iter().all(|l| distinct.insert(l));
        if !duplicate_literal && !subsumed(&literals, unsat_keys) {
            let key = instance_key(&literals);
            let satisfiable = *sat_cache
                .entry(key.clone())
                .or_insert_with(|| check_satisfiable(fb, &inst).is_some());
            let names: Vec<String> = preds.iter().map(|&p| pred_name(fb, p)).collect();
            if !satisfiable {
                new_unsat.insert(key);
                properties.insert(Property::Unsat(UnsatProp::new(shape, names)));
            } else {
                for idx in 0..literals.len() {
                    if literals.len() < 2 {
                        break;
                    }
                    let captured = literals[idx].1.iter().all(|v| {
                        literals
                            .iter()
                            .enumerate()
                            .any(|(j, (_, vs))| j != idx && vs.contains(v))
                    });
                    if captured && check_implication(fb, &inst, idx).implied {
                        properties.insert(Property::Implies(ImpliesProp::new(
                            shape,
                            names.clone(),
                            idx,
                        )));
                    }
                }
            }
        }
        // next assignment, odometer style
        let mut pos = shape.len();
        loop {
            if pos == 0 {
                return (properties, new_unsat);
            }
            pos -= 1;
            assignment[pos] += 1;
            if assignment[pos] < slots[pos].len() {
                break;
            }
            assignment[pos] = 0;
        }
    }
}

fn preds_by_arity(fb: &FactBase) -> BTreeMap<usize, Vec<PredId>> {
    let mut map: BTreeMap<usize, Vec<PredId>> = BTreeMap::new();
    for pid in fb.pred_ids() {
        if fb.num_facts(pid) > 0 {
            map.entry(fb.signature(pid).arity).or_default().push(pid);
        }
    }
    map
}

fn process_batch(
    fb: &FactBase,
    batch: Vec<Template>,
    preds: &BTreeMap<usize, Vec<PredId>>,
    unsat_by_size: &mut BTreeMap<usize, UnsatKeys>,
    mode: ExecMode,
) -> BTreeSet<Property> {
    let mut properties = BTreeSet::new();
    // group by template size so that subsumption only ever consults results
    // from strictly smaller instances, making batch partitioning irrelevant
    let mut by_size: BTreeMap<usize, Vec<Template>> = BTreeMap::new();
    for t in batch {
        by_size.entry(t.len()).or_default().push(t);
    }
    for (size, templates) in by_size {
        let known: UnsatKeys = unsat_by_size
            .range(..size)
            .flat_map(|(_, keys)| keys.iter().cloned())
            .collect();
        let results = map_collect(mode, templates, |t| check_template(fb, &t, preds, &known));
        let stratum = unsat_by_size.entry(size).or_default();
        for (props, new_keys) in results {
            properties.extend(props);
            stratum.extend(new_keys);
        }
    }
    properties
}

/// Properties of a single batch of canonical templates; subsumption state is
/// local to the batch.
pub fn find_pointless_rules(fb: &FactBase, batch: Vec<Template>) -> BTreeSet<Property> {
    let preds = preds_by_arity(fb);
    let mut unsat_by_size = BTreeMap::new();
    process_batch(fb, batch, &preds, &mut unsat_by_size, ExecMode::default())
}

/// The full discovery loop: enumerate templates within the bounds, then test
/// them batch by batch until the queue empties or the budget runs out.
pub fn find_unsat_impli(
    fb: &FactBase,
    max_literals: usize,
    max_vars: usize,
    batch_size: usize,
    budget: Budget,
) -> BTreeSet<Property> {
    find_unsat_impli_with(fb, max_literals, max_vars, batch_size, budget, ExecMode::default())
}

pub fn find_unsat_impli_with(
    fb: &FactBase,
    max_literals: usize,
    max_vars: usize,
    batch_size: usize,
    budget: Budget,
    mode: ExecMode,
) -> BTreeSet<Property> {
    assert!(max_literals >= 1 && max_vars >= 1 && batch_size >= 1);
    let preds = preds_by_arity(fb);
    let arities: BTreeSet<usize> = preds.keys().copied().collect();
    let mut queue = build_templates(&arities, max_literals, max_vars);
    let start = Instant::now();
    let mut batches_done = 0usize;
    let mut unsat_by_size: BTreeMap<usize, UnsatKeys> = BTreeMap::new();
    let mut properties = BTreeSet::new();
    while !queue.is_empty() {
        match budget {
            Budget::Batches(n) if batches_done >= n => break,
            Budget::Time(limit) if start.elapsed() >= limit => break,
            _ => {}
        }
        let batch = select_templates(&mut queue, batch_size);
        properties.extend(process_batch(fb, batch, &preds, &mut unsat_by_size, mode));
        batches_done += 1;
    }
    properties
}
