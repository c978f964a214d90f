//! Brute-force verification that every rule pruned by the emitted constraints
//! really is pointless, plus hypothesis-space shrinkage statistics.

use std::collections::{BTreeMap, BTreeSet};

use crate::bk::{ConstId, FactBase, PredId, TypeAssignment};
use crate::exec::{map_collect, ExecMode};
use crate::property::Property;
use crate::template::{permutations, renumber, VarId};
use crate::total::check_total;

pub const DEFAULT_RULE_CEILING: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AuditError {
    #[error("rule space exceeds the ceiling of {ceiling} rules")]
    SpaceTooLarge { ceiling: usize },
}

/// A candidate rule: a placeholder propositional head `h` with a body of
/// first-order literals. Bodies are kept in canonical form (minimal over
/// literal reorderings and variable renamings) and need not be connected.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Rule {
    pub body: Vec<(PredId, Vec<VarId>)>,
}

impl Rule {
    pub fn new(body: Vec<(PredId, Vec<VarId>)>) -> Rule {
        Rule { body: canonical_body(&body) }
    }

    pub fn num_vars(&self) -> usize {
        self.body
            .iter()
            .flat_map(|(_, vs)| vs.iter())
            .map(|&v| v as usize + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn render(&self, fb: &FactBase) -> String {
        let lits: Vec<String> = self
            .body
            .iter()
            .map(|(pid, vs)| {
                let args: Vec<String> =
                    vs.iter().map(|&v| ((b'A' + v) as char).to_string()).collect();
                format!("{}({})", fb.signature(*pid).name, args.join(","))
            })
            .collect();
        format!("h :- {}", lits.join(", "))
    }
}

fn canonical_body(body: &[(PredId, Vec<VarId>)]) -> Vec<(PredId, Vec<VarId>)> {
    let mut best: Option<Vec<(PredId, Vec<VarId>)>> = None;
    for perm in permutations(body.len()) {
        let vars: Vec<Vec<VarId>> = perm.iter().map(|&i| body[i].1.clone()).collect();
        let renamed = renumber(&vars);
        let candidate: Vec<(PredId, Vec<VarId>)> =
            perm.iter().zip(renamed).map(|(&i, vs)| (body[i].0, vs)).collect();
        if best.as_ref().map_or(true, |b| candidate < *b) {
            best = Some(candidate);
        }
    }
    best.unwrap_or_default()
}

/// Every rule body over the fact base's predicates within the bounds, one
/// canonical representative per renaming class, in deterministic order.
/// Bodies are literal sets (no duplicates) and are not required to be
/// connected. Errors out if the space exceeds `ceiling`.
pub fn enumerate_rules(
    fb: &FactBase,
    max_body: usize,
    max_vars: usize,
    ceiling: usize,
) -> Result<Vec<Rule>, AuditError> {
    assert!(max_body >= 1 && max_vars >= 1);
    let pids: Vec<PredId> = fb.pred_ids().collect();
    let mut found: BTreeSet<Vec<(PredId, Vec<VarId>)>> = BTreeSet::new();
    let mut body: Vec<(PredId, Vec<VarId>)> = Vec::new();
    extend_body(fb, &pids, max_body, max_vars, ceiling, &mut body, &mut found)?;
    Ok(found.into_iter().map(|body| Rule { body }).collect())
}

fn extend_body(
    fb: &FactBase,
    pids: &[PredId],
    max_body: usize,
    max_vars: usize,
    ceiling: usize,
    body: &mut Vec<(PredId, Vec<VarId>)>,
    found: &mut BTreeSet<Vec<(PredId, Vec<VarId>)>>,
) -> Result<(), AuditError> {
    let used = body
        .iter()
        .flat_map(|(_, vs)| vs.iter())
        .map(|&v| v + 1)
        .max()
        .unwrap_or(0);
    for &pid in pids {
        let arity = fb.signature(pid).arity;
        let mut tuple = Vec::with_capacity(arity);
        let mut result = Ok(());
        fill_tuple(arity, used, max_vars as VarId, &mut tuple, &mut |tuple| {
            if result.is_err() {
                return;
            }
            let lit = (pid, tuple.to_vec());
            if body.contains(&lit) {
                return;
            }
            body.push(lit);
            found.insert(canonical_body(body));
            if found.len() > ceiling {
                result = Err(AuditError::SpaceTooLarge { ceiling });
            } else if body.len() < max_body {
                result = extend_body(fb, pids, max_body, max_vars, ceiling, body, found);
            }
            body.pop();
        });
        result?;
    }
    Ok(())
}

/// Restricted-growth enumeration of variable tuples (fresh variables only as
/// the next unused id), mirroring the template enumerator.
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

/// Brute-force enumeration of variable assignments satisfying every body
/// literal, independent of the index-driven evaluator: variables are assigned
/// in order over the whole constant pool, and a literal is checked as soon as
/// its last variable receives a value. Stops early when `f` returns false.
fn for_each_brute_sat(
    fb: &FactBase,
    body: &[(PredId, Vec<VarId>)],
    nvars: usize,
    f: &mut impl FnMut(&[ConstId]) -> bool,
) -> bool {
    if nvars == 0 {
        let ok = body.iter().all(|(pid, vs)| {
            debug_assert!(vs.is_empty());
            fb.has_fact(*pid, &[])
        });
        return !ok || f(&[]);
    }
    // literals become checkable once their highest variable is assigned
    let mut due_at: Vec<Vec<usize>> = vec![Vec::new(); nvars];
    for (i, (_, vs)) in body.iter().enumerate() {
        let max = vs.iter().copied().max().unwrap() as usize;
        due_at[max].push(i);
    }
    let mut assignment: Vec<ConstId> = Vec::with_capacity(nvars);
    brute_search(fb, body, &due_at, &mut assignment, nvars, f)
}

fn brute_search(
    fb: &FactBase,
    body: &[(PredId, Vec<VarId>)],
    due_at: &[Vec<usize>],
    assignment: &mut Vec<ConstId>,
    nvars: usize,
    f: &mut impl FnMut(&[ConstId]) -> bool,
) -> bool {
    if assignment.len() == nvars {
        return f(assignment);
    }
    for c in 0..fb.num_consts() {
        assignment.push(c);
        let depth = assignment.len() - 1;
        let ok = due_at[depth].iter().all(|&i| {
            let (pid, vs) = &body[i];
            let tuple: Vec<ConstId> = vs.iter().map(|&v| assignment[v as usize]).collect();
            fb.has_fact(*pid, &tuple)
        });
        if ok && !brute_search(fb, body, due_at, assignment, nvars, f) {
            assignment.pop();
            return false;
        }
        assignment.pop();
    }
    true
}

fn brute_satisfiable(fb: &FactBase, body: &[(PredId, Vec<VarId>)], nvars: usize) -> bool {
    !for_each_brute_sat(fb, body, nvars, &mut |_| false)
}

/// Definition-level check: no assignment of constants satisfies the body.
pub fn oracle_unsat(fb: &FactBase, r: &Rule) -> bool {
    !brute_satisfiable(fb, &r.body, r.num_vars())
}

fn captured(body: &[(PredId, Vec<VarId>)], idx: usize) -> bool {
    body[idx].1.iter().all(|v| {
        body.iter()
            .enumerate()
            .any(|(j, (_, vs))| j != idx && vs.contains(v))
    })
}

/// True iff some captured body literal can be removed without changing the
/// satisfying assignments: every assignment satisfying the remaining literals
/// also satisfies it. Requires a satisfiable rule (callers gate on
/// `oracle_unsat` first) and at least two body literals.
pub fn oracle_implication_reducible(fb: &FactBase, r: &Rule) -> bool {
    if r.body.len() < 2 {
        return false;
    }
    let nvars = r.num_vars();
    (0..r.body.len()).any(|idx| {
        if !captured(&r.body, idx) {
            return false;
        }
        let (pid, vs) = &r.body[idx];
        let rest: Vec<(PredId, Vec<VarId>)> = r
            .body
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != idx)
            .map(|(_, l)| l.clone())
            .collect();
        let mut all_implied = true;
        for_each_brute_sat(fb, &rest, nvars, &mut |a| {
            let tuple: Vec<ConstId> = vs.iter().map(|&v| a[v as usize]).collect();
            all_implied = fb.has_fact(*pid, &tuple);
            all_implied
        });
        all_implied
    })
}

/// Unifies the argument tuples of two literals: a map sending every variable
/// to the representative (minimum) of its merged class.
fn unify(nvars: usize, a: &[VarId], b: &[VarId]) -> Vec<VarId> {
    let mut rep: Vec<VarId> = (0..nvars as VarId).collect();
    fn find(rep: &mut Vec<VarId>, v: VarId) -> VarId {
        if rep[v as usize] == v {
            v
        } else {
            let r = find(rep, rep[v as usize]);
            rep[v as usize] = r;
            r
        }
    }
    for (&x, &y) in a.iter().zip(b) {
        let (rx, ry) = (find(&mut rep, x), find(&mut rep, y));
        let (lo, hi) = if rx < ry { (rx, ry) } else { (ry, rx) };
        rep[hi as usize] = lo;
    }
    (0..nvars as VarId).map(|v| find(&mut rep, v)).collect()
}

fn apply_subst(body: &[(PredId, Vec<VarId>)], subst: &[VarId]) -> Vec<(PredId, Vec<VarId>)> {
    let merged: BTreeSet<(PredId, Vec<VarId>)> = body
        .iter()
        .map(|(pid, vs)| (*pid, vs.iter().map(|&v| subst[v as usize]).collect()))
        .collect();
    merged.into_iter().collect()
}

/// θ-unification form of recall reducibility: the rule is satisfiable and
/// some pair of same-predicate literals unifies into a strictly smaller rule
/// whose body is still satisfiable. The reduced rule then subsumes the
/// original (every satisfying assignment of it extends to one of the
/// original, and both derive the head), so the original is redundant.
pub fn oracle_recall_reducible(fb: &FactBase, r: &Rule) -> bool {
    let nvars = r.num_vars();
    let has_pair = (0..r.body.len()).any(|i| {
        (i + 1..r.body.len()).any(|j| r.body[i].0 == r.body[j].0 && r.body[i] != r.body[j])
    });
    if !has_pair || !brute_satisfiable(fb, &r.body, nvars) {
        return false;
    }
    for i in 0..r.body.len() {
        for j in i + 1..r.body.len() {
            if r.body[i].0 != r.body[j].0 || r.body[i] == r.body[j] {
                continue;
            }
            let subst = unify(nvars, &r.body[i].1, &r.body[j].1);
            let reduced = apply_subst(&r.body, &subst);
            debug_assert!(reduced.len() < r.body.len());
            if brute_satisfiable(fb, &reduced, nvars) {
                return true;
            }
        }
    }
    false
}

/// Appendix-style pigeonhole form: the rule is satisfiable and some satisfying
/// assignment makes two distinct same-predicate literals coincide (violating
/// the all-different side condition on that predicate's literals).
pub fn pigeonhole_reducible(fb: &FactBase, r: &Rule) -> bool {
    let nvars = r.num_vars();
    let pairs: Vec<(usize, usize)> = (0..r.body.len())
        .flat_map(|i| (i + 1..r.body.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| r.body[i].0 == r.body[j].0 && r.body[i] != r.body[j])
        .collect();
    if pairs.is_empty() {
        return false;
    }
    let mut coincides = false;
    for_each_brute_sat(fb, &r.body, nvars, &mut |a| {
        coincides = pairs.iter().any(|&(i, j)| {
            let ti: Vec<ConstId> = r.body[i].1.iter().map(|&v| a[v as usize]).collect();
            let tj: Vec<ConstId> = r.body[j].1.iter().map(|&v| a[v as usize]).collect();
            ti == tj
        });
        !coincides
    });
    coincides
}

fn occurrences(body: &[(PredId, Vec<VarId>)], v: VarId) -> usize {
    body.iter()
        .flat_map(|(_, vs)| vs.iter())
        .filter(|&&w| w == v)
        .count()
}

/// True iff some body literal is total in a position subset whose
/// complementary (removable) positions carry variables occurring exactly once
/// in the whole rule.
pub fn oracle_singleton_reducible(fb: &FactBase, types: &TypeAssignment, r: &Rule) -> bool {
    for (pid, vs) in &r.body {
        let arity = vs.len();
        if arity < 2 {
            continue;
        }
        for mask in 1u32..(1 << arity) - 1 {
            let s: Vec<usize> = (1..=arity).filter(|p| mask & (1 << (p - 1)) != 0).collect();
            let removable: Vec<usize> = (1..=arity).filter(|p| !s.contains(p)).collect();
            if !removable.iter().all(|&p| occurrences(&r.body, vs[p - 1]) == 1) {
                continue;
            }
            if check_total(fb, types, *pid, &s) == Ok(None) {
                return true;
            }
        }
    }
    false
}

/// Which constraint kinds match the rule: [unsat, implies, recall, total].
pub fn prune_kinds(
    fb: &FactBase,
    r: &Rule,
    props: &BTreeSet<Property>,
    recall_cap: usize,
) -> [bool; 4] {
    prune_kinds_indexed(fb, r, &PropIndex::new(props), recall_cap)
}

/// Properties pre-grouped by the predicate names they mention, so matching a
/// rule only inspects shapes whose predicates all occur in its body.
pub struct PropIndex<'a> {
    embeds_by_preds: BTreeMap<Vec<&'a str>, Vec<(usize, &'a [Vec<VarId>], &'a [String])>>,
    recalls_by_pred: BTreeMap<&'a str, Vec<&'a crate::recall::RecallFact>>,
    totals_by_pred: BTreeMap<&'a str, Vec<&'a crate::total::TotalFact>>,
}

impl<'a> PropIndex<'a> {
    pub fn new(props: &'a BTreeSet<Property>) -> PropIndex<'a> {
        let mut ix = PropIndex {
            embeds_by_preds: BTreeMap::new(),
            recalls_by_pred: BTreeMap::new(),
            totals_by_pred: BTreeMap::new(),
        };
        let mut add_embed = |kind: usize, literals: &'a [Vec<VarId>], preds: &'a [String]| {
            let mut key: Vec<&str> = preds.iter().map(String::as_str).collect();
            key.sort_unstable();
            ix.embeds_by_preds.entry(key).or_default().push((kind, literals, preds));
        };
        for p in props {
            match p {
                Property::Unsat(u) => add_embed(0, &u.literals, &u.preds),
                Property::Implies(i) => add_embed(1, &i.literals, &i.preds),
                Property::Recall(rc) => {
                    ix.recalls_by_pred.entry(rc.pred.as_str()).or_default().push(rc)
                }
                Property::Total(t) => {
                    ix.totals_by_pred.entry(t.pred.as_str()).or_default().push(t)
                }
            }
        }
        ix
    }
}

pub fn prune_kinds_indexed(
    fb: &FactBase,
    r: &Rule,
    ix: &PropIndex,
    recall_cap: usize,
) -> [bool; 4] {
    let mut kinds = [false; 4];
    let names: Vec<&str> = r.body.iter().map(|(pid, _)| fb.signature(*pid).name.as_str()).collect();
    // every embeddable shape mentions a sub-multiset of the body's predicates
    let mut sorted = names.clone();
    sorted.sort_unstable();
    let mut keys: BTreeSet<Vec<&str>> = BTreeSet::new();
    for mask in 1u32..1 << sorted.len() {
        keys.insert(
            (0..sorted.len()).filter(|i| mask & (1 << i) != 0).map(|i| sorted[i]).collect(),
        );
    }
    for key in &keys {
        let Some(shapes) = ix.embeds_by_preds.get(key) else { continue };
        for &(kind, literals, preds) in shapes {
            if !kinds[kind] && embeds(literals, preds, &r.body, &names) {
                kinds[kind] = true;
            }
        }
    }
    for &name in names.iter().collect::<BTreeSet<_>>() {
        for rc in ix.recalls_by_pred.get(name).into_iter().flatten() {
            if kinds[2] || rc.input_positions.is_empty() || rc.bound > recall_cap {
                continue;
            }
            let mut groups: BTreeMap<Vec<VarId>, BTreeSet<Vec<VarId>>> = BTreeMap::new();
            for ((_, vs), &n) in r.body.iter().zip(&names) {
                if n != rc.pred || vs.len() != rc.arity {
                    continue;
                }
                let key: Vec<VarId> = rc.input_positions.iter().map(|&p| vs[p - 1]).collect();
                let out: Vec<VarId> = rc.output_positions.iter().map(|&p| vs[p - 1]).collect();
                groups.entry(key).or_default().insert(out);
            }
            if groups.values().any(|outs| outs.len() > rc.bound) {
                kinds[2] = true;
            }
        }
        for t in ix.totals_by_pred.get(name).into_iter().flatten() {
            if kinds[3] {
                continue;
            }
            let fires = r.body.iter().zip(&names).any(|((_, vs), &n)| {
                n == t.pred
                    && vs.len() == t.arity
                    && t.removable_positions
                        .iter()
                        .all(|&p| occurrences(&r.body, vs[p - 1]) == 1)
            });
            if fires {
                kinds[3] = true;
            }
        }
    }
    kinds
}

/// True iff any emitted constraint matches the rule's body.
pub fn constraint_prunes(
    fb: &FactBase,
    r: &Rule,
    props: &BTreeSet<Property>,
    recall_cap: usize,
) -> bool {
    prune_kinds(fb, r, props, recall_cap).iter().any(|&k| k)
}

/// Injective embedding of a property shape into a rule body: distinct shape
/// literals map to distinct body literals of the same predicate, under one
/// consistent (not necessarily injective) variable mapping.
fn embeds(
    shape: &[Vec<VarId>],
    shape_preds: &[String],
    body: &[(PredId, Vec<VarId>)],
    body_names: &[&str],
) -> bool {
    fn assign(
        shape: &[Vec<VarId>],
        shape_preds: &[String],
        body: &[(PredId, Vec<VarId>)],
        body_names: &[&str],
        idx: usize,
        used: &mut Vec<bool>,
        var_map: &mut BTreeMap<VarId, VarId>,
    ) -> bool {
        if idx == shape.len() {
            return true;
        }
        for (b, (_, vs)) in body.iter().enumerate() {
            if used[b] || body_names[b] != shape_preds[idx] || vs.len() != shape[idx].len() {
                continue;
            }
            let mut added: Vec<VarId> = Vec::new();
            let mut ok = true;
            for (&sv, &bv) in shape[idx].iter().zip(vs) {
                match var_map.get(&sv) {
                    Some(&mapped) if mapped == bv => {}
                    Some(_) => {
                        ok = false;
                        break;
                    }
                    None => {
                        var_map.insert(sv, bv);
                        added.push(sv);
                    }
                }
            }
            if ok {
                used[b] = true;
                if assign(shape, shape_preds, body, body_names, idx + 1, used, var_map) {
                    return true;
                }
                used[b] = false;
            }
            for sv in added {
                var_map.remove(&sv);
            }
        }
        false
    }
    let mut used = vec![false; body.len()];
    let mut var_map = BTreeMap::new();
    assign(shape, shape_preds, body, body_names, 0, &mut used, &mut var_map)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AuditReport {
    pub total_rules: usize,
    pub pruned: usize,
    pub false_prunes: Vec<String>,
    pub pruned_by_unsat: usize,
    pub pruned_by_implies: usize,
    pub pruned_by_recall: usize,
    pub pruned_by_total: usize,
    pub shrinkage: f64,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.false_prunes.is_empty()
    }
}

/// Enumerates the rule space within the bounds and checks that every rule
/// matched by a constraint is pointless per at least one brute-force oracle.
pub fn soundness_audit(
    fb: &FactBase,
    types: &TypeAssignment,
    props: &BTreeSet<Property>,
    max_body: usize,
    max_vars: usize,
    recall_cap: usize,
) -> Result<AuditReport, AuditError> {
    soundness_audit_with(fb, types, props, max_body, max_vars, recall_cap, ExecMode::default())
}

pub fn soundness_audit_with(
    fb: &FactBase,
    types: &TypeAssignment,
    props: &BTreeSet<Property>,
    max_body: usize,
    max_vars: usize,
    recall_cap: usize,
    mode: ExecMode,
) -> Result<AuditReport, AuditError> {
    let rules = enumerate_rules(fb, max_body, max_vars, DEFAULT_RULE_CEILING)?;
    let total_rules = rules.len();
    let ix = PropIndex::new(props);
    let verdicts = map_collect(mode, rules, |r| {
        let kinds = prune_kinds_indexed(fb, &r, &ix, recall_cap);
        if !kinds.iter().any(|&k| k) {
            return (kinds, None);
        }
        let pointless = oracle_unsat(fb, &r)
            || oracle_implication_reducible(fb, &r)
            || oracle_recall_reducible(fb, &r)
            || oracle_singleton_reducible(fb, types, &r);
        (kinds, Some((r, pointless)))
    });
    let mut report = AuditReport {
        total_rules,
        pruned: 0,
        false_prunes: Vec::new(),
        pruned_by_unsat: 0,
        pruned_by_implies: 0,
        pruned_by_recall: 0,
        pruned_by_total: 0,
        shrinkage: 0.0,
    };
    for (kinds, outcome) in verdicts {
        if let Some((rule, pointless)) = outcome {
            report.pruned += 1;
            report.pruned_by_unsat += kinds[0] as usize;
            report.pruned_by_implies += kinds[1] as usize;
            report.pruned_by_recall += kinds[2] as usize;
            report.pruned_by_total += kinds[3] as usize;
            if !pointless {
                report.false_prunes.push(rule.render(fb));
            }
        }
    }
    if total_rules > 0 {
        report.shrinkage = report.pruned as f64 / total_rules as f64;
    }
    report.false_prunes.sort();
    Ok(report)
}
