//! End-to-end acceptance suite: each test is one acceptance criterion and
//! prints a single pass/fail line through the harness.

use std::collections::BTreeSet;
use std::time::Instant;

use shrinker::audit::{
    enumerate_rules, oracle_recall_reducible, pigeonhole_reducible, prune_kinds,
    soundness_audit, Rule, DEFAULT_RULE_CEILING,
};
use shrinker::bk::{infer_types, parse_bk, ConstId, FactBase, PredId, TypeAssignment};
use shrinker::discover::{find_unsat_impli, Budget};
use shrinker::emit::{emit_asp, validate_asp};
use shrinker::gen::{random_fact_base, GenParams};
use shrinker::property::{ImpliesProp, Property, UnsatProp};
use shrinker::recall::{compute_recalls, RecallFact};
use shrinker::template::{build_templates, select_templates, Template, VarId};
use shrinker::total::{find_total_facts, TotalFact};

const INTRO: &str = include_str!("fixtures/intro.lp");
const RECALL_CAP: usize = 3;

fn intro() -> (FactBase, TypeAssignment) {
    let fb = parse_bk(INTRO).unwrap();
    let types = infer_types(&fb, &[]).unwrap();
    (fb, types)
}

/// The full pipeline property set for a fact base.
fn pipeline(fb: &FactBase, types: &TypeAssignment, max_literals: usize, max_vars: usize) -> BTreeSet<Property> {
    let mut props = find_unsat_impli(fb, max_literals, max_vars, 1000, Budget::Unlimited);
    props.extend(compute_recalls(fb).unwrap().into_iter().map(Property::Recall));
    props.extend(find_total_facts(fb, types).into_iter().map(Property::Total));
    props
}

fn rule(fb: &FactBase, lits: &[(&str, &[VarId])]) -> Rule {
    Rule::new(
        lits.iter()
            .map(|(name, vs)| (fb.pred_id(name, vs.len()).unwrap(), vs.to_vec()))
            .collect(),
    )
}

/// Criterion 1: the walkthrough rules r1–r9 are each eliminated by the named
/// mechanism, emptying that rule set.
#[test]
fn criterion_1_walkthrough_reproduction() {
    let start = Instant::now();
    let (fb, types) = intro();
    let props = pipeline(&fb, &types, 3, 6);
    // (rule body, mechanism): 0 unsat, 1 implies, 2 recall, 3 total
    let cases: Vec<(&str, Vec<(&str, &[VarId])>, usize)> = vec![
        ("r1 len totality", vec![("len", &[0, 1])], 3),
        ("r2 tail irreflexive", vec![("tail", &[0, 0])], 0),
        ("r3 tail asymmetric", vec![("tail", &[0, 1]), ("tail", &[1, 0])], 0),
        (
            "r4 head functional",
            vec![("head", &[0, 1]), ("head", &[0, 2])],
            2,
        ),
        (
            "r5 tail antitransitive",
            vec![("tail", &[0, 1]), ("tail", &[1, 2]), ("tail", &[0, 2])],
            0,
        ),
        (
            "r6 contains irreflexive tail",
            vec![("tail", &[0, 0]), ("head", &[0, 1]), ("odd", &[1])],
            0,
        ),
        (
            "r7 odd/even exclusive",
            vec![("head", &[0, 1]), ("odd", &[1]), ("even", &[1])],
            0,
        ),
        (
            "r8 odd implies int",
            vec![("head", &[0, 1]), ("int", &[1]), ("odd", &[1])],
            1,
        ),
        (
            "r9 succ chain implies lt",
            vec![("head", &[0, 1]), ("succ", &[1, 2]), ("succ", &[2, 3]), ("lt", &[1, 3])],
            1,
        ),
    ];
    let mut survivors = Vec::new();
    for (name, body, mechanism) in cases {
        let r = rule(&fb, &body);
        let kinds = prune_kinds(&fb, &r, &props, RECALL_CAP);
        assert!(
            kinds[mechanism],
            "{name}: expected mechanism {mechanism}, matched {kinds:?}"
        );
        if !kinds.iter().any(|&k| k) {
            survivors.push(name);
        }
    }
    assert!(survivors.is_empty(), "rules left unpruned: {survivors:?}");
    assert!(start.elapsed().as_secs() < 5, "took {:?}", start.elapsed());
}

/// Criterion 2: the recall table of the p/q fact base, with byte-exact fact
/// names.
#[test]
fn criterion_2_recall_table() {
    let start = Instant::now();
    let fb = parse_bk(
        "p(1,2). p(2,1). p(3,1).\n\
         q(p1,a,b). q(p2,b,c). q(p3,a,b). q(p4,b,c).",
    )
    .unwrap();
    let facts = compute_recalls(&fb).unwrap();
    let lookup = |pred: &str, input: &[usize]| {
        facts
            .iter()
            .find(|f| f.pred == pred && f.input_positions == input)
            .unwrap()
    };
    assert_eq!(lookup("p", &[]).bound, 3);
    assert_eq!(lookup("p", &[1]).bound, 1);
    // second argument 1 maps back to first arguments {2,3}, so p(-,+) is 2
    assert_eq!(lookup("p", &[2]).bound, 2);
    assert_eq!(lookup("q", &[1]).bound, 1);
    assert_eq!(lookup("q", &[2, 3]).bound, 2);
    let name = |f: &RecallFact| Property::Recall(f.clone()).fact_name();
    assert_eq!(name(lookup("p", &[1])), "recall_p_a_b_1");
    assert_eq!(name(lookup("p", &[2])), "recall_p_b_a_2");
    assert_eq!(name(lookup("q", &[2, 3])), "recall_q_bc_a_2");
    assert!(start.elapsed().as_secs() < 1);
}

/// Criterion 3: the published constraint listings, byte for byte (with the
/// documented singleton-rule typo correction).
#[test]
fn criterion_3_golden_asp_text() {
    let start = Instant::now();
    let recall = |pred: &str, input: &[usize], output: &[usize], bound: usize| {
        Property::Recall(RecallFact {
            pred: pred.into(),
            arity: input.len() + output.len(),
            input_positions: input.to_vec(),
            output_positions: output.to_vec(),
            bound,
        })
    };
    let total = |pred: &str, total_p: &[usize], removable: &[usize]| {
        Property::Total(TotalFact {
            pred: pred.into(),
            arity: total_p.len() + removable.len(),
            total_positions: total_p.to_vec(),
            removable_positions: removable.to_vec(),
        })
    };
    let props = BTreeSet::from([
        Property::Unsat(UnsatProp::new(
            &Template::new(vec![vec![0, 1], vec![1, 0]]),
            vec!["succ".into(), "succ".into()],
        )),
        Property::Implies(ImpliesProp::new(
            &Template::new(vec![vec![0], vec![0]]),
            vec!["odd".into(), "int".into()],
            1,
        )),
        recall("succ", &[1], &[2], 1),
        recall("succ", &[2], &[1], 1),
        recall("q", &[2, 3], &[1], 2),
        total("length", &[1], &[2]),
        total("add", &[1], &[2, 3]),
        total("add", &[2], &[1, 3]),
        total("add", &[3], &[1, 2]),
    ]);
    let expected = "\
unsat_ab_ba(succ,succ).
:- unsat_ab_ba(P,Q), body_literal(Rule,P,(A,B)), body_literal(Rule,Q,(B,A)).
implies_a_a(odd,int).
:- implies_a_a(P,Q), body_literal(Rule,P,(A,)), body_literal(Rule,Q,(A,)).
:- body_literal(Rule,q,(_,V1,V2)), #count{V0: body_literal(Rule,q,(V0,V1,V2))} > 2.
:- body_literal(Rule,succ,(V0,_)), #count{V1:body_literal(Rule,succ,(V0,V1))} > 1.
:- body_literal(Rule,succ,(_,V1)), #count{V0: body_literal(Rule,succ,(V0,V1))} > 1.
% corrected from the published listing, which misprints rule(V) for rule(Rule)
singleton(Rule,V):- rule(Rule), var(V),
    #count{P,Vars : body_literal(Rule,P,Vars), var_member(V,Vars)} == 1.
:- body_literal(Rule,add,(V0,V1,V2)), singleton(Rule,V0), singleton(Rule,V1).
:- body_literal(Rule,add,(V0,V1,V2)), singleton(Rule,V0), singleton(Rule,V2).
:- body_literal(Rule,add,(V0,V1,V2)), singleton(Rule,V1), singleton(Rule,V2).
:- body_literal(Rule,length,(V0,V1)), singleton(Rule,V1).
";
    assert_eq!(emit_asp(&props, RECALL_CAP), expected);
    assert!(start.elapsed().as_secs() < 1);
}

/// Criterion 4: soundness fuzzing — no false prunes over 20 seeded random
/// fact bases.
#[test]
fn criterion_4_soundness_fuzz_audit() {
    let start = Instant::now();
    let params = GenParams { max_preds: 4, max_arity: 3, max_facts: 40, const_pool: 6 };
    for seed in 0..20u64 {
        let fb = random_fact_base(seed, params);
        let types = infer_types(&fb, &[]).unwrap();
        let props = pipeline(&fb, &types, 3, 4);
        let report = soundness_audit(&fb, &types, &props, 3, 4, RECALL_CAP).unwrap();
        assert!(
            report.passed(),
            "seed {seed}: false prunes {:?}",
            report.false_prunes
        );
    }
    assert!(start.elapsed().as_secs() < 60, "took {:?}", start.elapsed());
}

// --- criterion 5 helpers: a brute-force re-derivation of the Unsat/Implies
// property set, written against a naive evaluator rather than the production
// join machinery -------------------------------------------------------------

/// Naive satisfying-assignment enumeration: assign variables in order over
/// the whole constant pool, checking each literal once its variables are all
/// bound. Returns false when cut short by `f`.
fn naive_for_each_sat(
    fb: &FactBase,
    literals: &[(PredId, Vec<VarId>)],
    nvars: usize,
    f: &mut impl FnMut(&[ConstId]) -> bool,
) -> bool {
    fn rec(
        fb: &FactBase,
        literals: &[(PredId, Vec<VarId>)],
        nvars: usize,
        a: &mut Vec<ConstId>,
        f: &mut impl FnMut(&[ConstId]) -> bool,
    ) -> bool {
        let depth = a.len();
        let ok = literals.iter().all(|(pid, vs)| {
            if vs.iter().any(|&v| v as usize >= depth) {
                return true;
            }
            let tuple: Vec<ConstId> = vs.iter().map(|&v| a[v as usize]).collect();
            fb.has_fact(*pid, &tuple)
        });
        if !ok {
            return true;
        }
        if depth == nvars {
            return f(a);
        }
        for c in 0..fb.num_consts() {
            a.push(c);
            let keep = rec(fb, literals, nvars, a, f);
            a.pop();
            if !keep {
                return false;
            }
        }
        true
    }
    rec(fb, literals, nvars, &mut Vec::new(), f)
}

fn naive_satisfiable(fb: &FactBase, literals: &[(PredId, Vec<VarId>)], nvars: usize) -> bool {
    !naive_for_each_sat(fb, literals, nvars, &mut |_| false)
}

fn perms(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in perms(n - 1) {
        for i in 0..n {
            let mut p = rest.clone();
            p.insert(i, n - 1);
            out.push(p);
        }
    }
    out
}

fn canonical_instance(literals: &[(PredId, Vec<VarId>)]) -> Vec<(PredId, Vec<VarId>)> {
    let mut best: Option<Vec<(PredId, Vec<VarId>)>> = None;
    for perm in perms(literals.len()) {
        let mut map: std::collections::BTreeMap<VarId, VarId> = Default::default();
        let candidate: Vec<(PredId, Vec<VarId>)> = perm
            .iter()
            .map(|&i| {
                let vs = literals[i]
                    .1
                    .iter()
                    .map(|v| {
                        let next = map.len() as VarId;
                        *map.entry(*v).or_insert(next)
                    })
                    .collect();
                (literals[i].0, vs)
            })
            .collect();
        if best.as_ref().map_or(true, |b| candidate < *b) {
            best = Some(candidate);
        }
    }
    best.unwrap()
}

/// Independent brute-force derivation of the Unsat/Implies set over every
/// canonical template within the bounds, with the same minimality convention:
/// unsatisfiable instances containing a smaller unsatisfiable sub-instance
/// are suppressed.
fn brute_unsat_implies(fb: &FactBase, max_literals: usize, max_vars: usize) -> BTreeSet<Property> {
    let mut nonempty: std::collections::BTreeMap<usize, Vec<PredId>> = Default::default();
    for pid in fb.pred_ids() {
        if fb.num_facts(pid) > 0 {
            nonempty.entry(fb.signature(pid).arity).or_default().push(pid);
        }
    }
    let arities: BTreeSet<usize> = nonempty.keys().copied().collect();
    let mut queue = build_templates(&arities, max_literals, max_vars);
    let templates = select_templates(&mut queue, usize::MAX);
    // first pass: classify every instance
    let mut instances: Vec<(Vec<(PredId, Vec<VarId>)>, bool)> = Vec::new();
    for t in &templates {
        let slots: Option<Vec<&Vec<PredId>>> =
            t.literals().iter().map(|l| nonempty.get(&l.len())).collect();
        let Some(slots) = slots else { continue };
        let mut odometer = vec![0usize; t.len()];
        'outer: loop {
            let literals: Vec<(PredId, Vec<VarId>)> = odometer
                .iter()
                .zip(&slots)
                .zip(t.literals())
                .map(|((&i, s), vs)| (s[i], vs.clone()))
                .collect();
            let distinct: BTreeSet<_> = literals.iter().collect();
            if distinct.len() == literals.len() {
                let sat = naive_satisfiable(fb, &literals, t.num_vars());
                instances.push((literals, sat));
            }
            for pos in (0..odometer.len()).rev() {
                odometer[pos] += 1;
                if odometer[pos] < slots[pos].len() {
                    continue 'outer;
                }
                odometer[pos] = 0;
                if pos == 0 {
                    break 'outer;
                }
            }
        }
    }
    let unsat_keys: BTreeSet<Vec<(PredId, Vec<VarId>)>> = instances
        .iter()
        .filter(|(_, sat)| !sat)
        .map(|(l, _)| canonical_instance(l))
        .collect();
    let has_unsat_strict_subset = |literals: &[(PredId, Vec<VarId>)]| {
        let n = literals.len();
        (1u32..(1 << n) - 1).any(|mask| {
            let sub: Vec<(PredId, Vec<VarId>)> = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| literals[i].clone())
                .collect();
            unsat_keys.contains(&canonical_instance(&sub))
        })
    };
    let mut props = BTreeSet::new();
    for (literals, sat) in &instances {
        if has_unsat_strict_subset(literals) {
            continue;
        }
        let vars: Vec<Vec<VarId>> = literals.iter().map(|(_, vs)| vs.clone()).collect();
        let shape = Template::new(vars.clone());
        let names: Vec<String> = literals
            .iter()
            .map(|(pid, _)| fb.signature(*pid).name.clone())
            .collect();
        if !sat {
            props.insert(Property::Unsat(UnsatProp::new(&shape, names.clone())));
            continue;
        }
        if literals.len() < 2 {
            continue;
        }
        let nvars = vars.iter().flatten().map(|&v| v as usize + 1).max().unwrap_or(0);
        for idx in 0..literals.len() {
            let is_captured = vars[idx].iter().all(|v| {
                vars.iter().enumerate().any(|(j, vs)| j != idx && vs.contains(v))
            });
            if !is_captured {
                continue;
            }
            let premise: Vec<(PredId, Vec<VarId>)> = literals
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != idx)
                .map(|(_, l)| l.clone())
                .collect();
            let (pid, vs) = &literals[idx];
            let mut implied = true;
            naive_for_each_sat(fb, &premise, nvars, &mut |a| {
                let tuple: Vec<ConstId> = vs.iter().map(|&v| a[v as usize]).collect();
                implied = fb.has_fact(*pid, &tuple);
                implied
            });
            if implied {
                // the template shape is canonical, so the index is valid there
                props.insert(Property::Implies(ImpliesProp::new(&shape, names.clone(), idx)));
            }
        }
    }
    props
}

/// Criterion 5: discovery equals the brute-force set on the walkthrough base
/// and five random ones.
#[test]
fn criterion_5_oracle_equivalence() {
    let start = Instant::now();
    let (max_literals, max_vars) = (3, 4);
    let check = |fb: &FactBase, label: &str| {
        let discovered: BTreeSet<Property> =
            find_unsat_impli(fb, max_literals, max_vars, 1000, Budget::Unlimited)
                .into_iter()
                .collect();
        let brute = brute_unsat_implies(fb, max_literals, max_vars);
        let only_discovered: Vec<String> =
            discovered.difference(&brute).map(|p| p.fact_name()).collect();
        let only_brute: Vec<String> =
            brute.difference(&discovered).map(|p| p.fact_name()).collect();
        assert!(
            only_discovered.is_empty() && only_brute.is_empty(),
            "{label}: discovery-only {only_discovered:?}, brute-only {only_brute:?}"
        );
    };
    let (fb, _) = intro();
    check(&fb, "intro");
    for seed in 100..105u64 {
        let fb = random_fact_base(seed, GenParams::default());
        check(&fb, &format!("seed {seed}"));
    }
    assert!(start.elapsed().as_secs() < 60, "took {:?}", start.elapsed());
}

/// Criterion 6: the θ-unification and pigeonhole forms of recall
/// reducibility agree on every enumerated walkthrough rule.
#[test]
fn criterion_6_pigeonhole_equivalence() {
    let start = Instant::now();
    let (fb, _) = intro();
    let rules = enumerate_rules(&fb, 3, 4, DEFAULT_RULE_CEILING).unwrap();
    let mut checked = 0usize;
    for r in &rules {
        let theta = oracle_recall_reducible(&fb, r);
        let pigeon = pigeonhole_reducible(&fb, r);
        assert_eq!(theta, pigeon, "disagreement on {}", r.render(&fb));
        checked += 1;
    }
    assert!(checked > 1000, "suspiciously small rule space: {checked}");
    assert!(start.elapsed().as_secs() < 60, "took {:?}", start.elapsed());
}

/// Criterion 7: batch-budget runs are reproducible and monotone.
#[test]
fn criterion_7_budget_monotonicity_and_determinism() {
    let start = Instant::now();
    let (fb, _) = intro();
    let mut previous: Option<BTreeSet<Property>> = None;
    for batches in [0, 1, 2, 4, 8, usize::MAX] {
        let run1 = find_unsat_impli(&fb, 3, 4, 25, Budget::Batches(batches));
        let run2 = find_unsat_impli(&fb, 3, 4, 25, Budget::Batches(batches));
        assert_eq!(
            emit_asp(&run1, RECALL_CAP),
            emit_asp(&run2, RECALL_CAP),
            "batch budget {batches} not byte-reproducible"
        );
        if let Some(prev) = &previous {
            assert!(prev.is_subset(&run1), "fact set shrank at budget {batches}");
        }
        previous = Some(run1);
    }
    assert!(start.elapsed().as_secs() < 10, "took {:?}", start.elapsed());
}

/// Criterion 8: every discovery stage prunes a strictly positive fraction of
/// the rule space, with no false prunes.
#[test]
fn criterion_8_staged_shrinkage() {
    let start = Instant::now();
    let (fb, types) = intro();
    let props = pipeline(&fb, &types, 3, 6);
    let stage = |keep: fn(&Property) -> bool| -> BTreeSet<Property> {
        props.iter().filter(|p| keep(p)).cloned().collect()
    };
    let stages: Vec<(&str, BTreeSet<Property>)> = vec![
        ("unsat", stage(|p| matches!(p, Property::Unsat(_)))),
        ("implies", stage(|p| matches!(p, Property::Implies(_)))),
        ("recall", stage(|p| matches!(p, Property::Recall(_)))),
        ("total", stage(|p| matches!(p, Property::Total(_)))),
    ];
    for (name, subset) in &stages {
        assert!(!subset.is_empty(), "stage {name} found nothing");
        let report = soundness_audit(&fb, &types, subset, 3, 4, RECALL_CAP).unwrap();
        assert!(report.passed(), "{name}: false prunes {:?}", report.false_prunes);
        assert!(report.shrinkage > 0.0, "stage {name} pruned nothing");
    }
    let full = soundness_audit(&fb, &types, &props, 3, 4, RECALL_CAP).unwrap();
    assert!(full.passed(), "false prunes {:?}", full.false_prunes);
    let max_stage = stages
        .iter()
        .map(|(_, s)| soundness_audit(&fb, &types, s, 3, 4, RECALL_CAP).unwrap().shrinkage)
        .fold(0.0f64, f64::max);
    assert!(full.shrinkage >= max_stage);
    // the combined document is well-formed
    assert!(validate_asp(&emit_asp(&props, RECALL_CAP)).is_ok());
    assert!(start.elapsed().as_secs() < 60, "took {:?}", start.elapsed());
}
