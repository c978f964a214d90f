//! Serialization of discovered properties into ASP pruning constraints and a
//! structured JSON document.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::json;

use crate::property::Property;
use crate::template::VarId;

pub const DEFAULT_RECALL_CAP: usize = 3;

/// The assembled output: fact lines, the generic rules their shapes need, and
/// the per-predicate specialized constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintDoc {
    pub property_facts: Vec<String>,
    pub generic_rules: Vec<String>,
    pub specialized_constraints: Vec<String>,
}

fn var_letter(v: VarId) -> char {
    (b'A' + v) as char
}

fn slot_letter(i: usize) -> char {
    (b'P' + i as u8) as char
}

fn var_tuple(vars: &[VarId]) -> String {
    if vars.len() == 1 {
        format!("({},)", var_letter(vars[0]))
    } else {
        let inner: Vec<String> = vars.iter().map(|&v| var_letter(v).to_string()).collect();
        format!("({})", inner.join(","))
    }
}

/// The generic constraint rule for one Unsat/Implies shape, e.g.
/// `:- unsat_ab_ba(P,Q), body_literal(Rule,P,(A,B)), body_literal(Rule,Q,(B,A)).`
/// Rules over more than two literals wrap onto an indented second line.
fn generic_rule(shape_name: &str, literals: &[Vec<VarId>]) -> String {
    let slots: Vec<String> = (0..literals.len()).map(|i| slot_letter(i).to_string()).collect();
    let head = format!("{}({})", shape_name, slots.join(","));
    let conjuncts: Vec<String> = literals
        .iter()
        .enumerate()
        .map(|(i, vs)| format!("body_literal(Rule,{},{})", slot_letter(i), var_tuple(vs)))
        .collect();
    if conjuncts.len() <= 2 {
        format!(":- {}, {}.", head, conjuncts.join(", "))
    } else {
        format!(
            ":- {}, {},\n   {}.",
            head,
            conjuncts[..2].join(", "),
            conjuncts[2..].join(", ")
        )
    }
}

fn recall_constraint(r: &crate::recall::RecallFact) -> String {
    let literal_args: Vec<String> = (1..=r.arity)
        .map(|p| {
            if r.input_positions.contains(&p) {
                format!("V{}", p - 1)
            } else {
                "_".to_string()
            }
        })
        .collect();
    let counted: Vec<String> =
        r.output_positions.iter().map(|&p| format!("V{}", p - 1)).collect();
    let counted = counted.join(",");
    let full_args: Vec<String> = (1..=r.arity).map(|p| format!("V{}", p - 1)).collect();
    // the established dialect writes no space after the colon exactly when the
    // counted tuple is the single variable V1
    let sep = if counted == "V1" { "" } else { " " };
    format!(
        ":- body_literal(Rule,{},({})), #count{{{}:{}body_literal(Rule,{},({}))}} > {}.",
        r.pred,
        literal_args.join(","),
        counted,
        sep,
        r.pred,
        full_args.join(","),
        r.bound
    )
}

const SINGLETON_RULE: &str = "\
% corrected from the published listing, which misprints rule(V) for rule(Rule)\n\
singleton(Rule,V):- rule(Rule), var(V),\n    \
#count{P,Vars : body_literal(Rule,P,Vars), var_member(V,Vars)} == 1.";

fn total_constraint(t: &crate::total::TotalFact) -> String {
    let args: Vec<String> = (1..=t.arity).map(|p| format!("V{}", p - 1)).collect();
    let singletons: Vec<String> = t
        .removable_positions
        .iter()
        .map(|&p| format!("singleton(Rule,V{})", p - 1))
        .collect();
    format!(
        ":- body_literal(Rule,{},({})), {}.",
        t.pred,
        args.join(","),
        singletons.join(", ")
    )
}

/// Splits the property set into fact lines, generic rules, and specialized
/// constraints, applying the recall emission cap.
pub fn build_doc(props: &BTreeSet<Property>, recall_cap: usize) -> ConstraintDoc {
    // fact name -> presentation literals, used to group facts by shape;
    // lexicographic fact order keeps equal shapes contiguous
    let mut unsat: BTreeMap<String, Vec<Vec<VarId>>> = BTreeMap::new();
    let mut implies: BTreeMap<String, Vec<Vec<VarId>>> = BTreeMap::new();
    let mut recalls: BTreeMap<String, &crate::recall::RecallFact> = BTreeMap::new();
    let mut totals: BTreeMap<String, &crate::total::TotalFact> = BTreeMap::new();
    for p in props {
        match p {
            Property::Unsat(u) => {
                unsat.insert(p.fact_name(), u.literals.clone());
            }
            Property::Implies(i) => {
                implies.insert(p.fact_name(), i.literals.clone());
            }
            Property::Recall(r) => {
                if !r.input_positions.is_empty() && r.bound <= recall_cap {
                    recalls.insert(p.fact_name(), r);
                }
            }
            Property::Total(t) => {
                totals.insert(p.fact_name(), t);
            }
        }
    }
    let mut property_facts = Vec::new();
    let mut generic_rules = Vec::new();
    for (prefix, group) in [("unsat_", &unsat), ("implies_", &implies)] {
        let mut shapes: BTreeMap<String, Vec<Vec<VarId>>> = BTreeMap::new();
        for (fact, literals) in group {
            property_facts.push(format!("{fact}."));
            let shape_name = fact[..fact.find('(').unwrap()].to_string();
            debug_assert!(shape_name.starts_with(prefix));
            shapes.insert(shape_name, literals.clone());
        }
        for (shape_name, literals) in shapes {
            generic_rules.push(generic_rule(&shape_name, &literals));
        }
    }
    let mut specialized_constraints: Vec<String> =
        recalls.values().map(|r| recall_constraint(r)).collect();
    if !totals.is_empty() {
        specialized_constraints.push(SINGLETON_RULE.to_string());
    }
    specialized_constraints.extend(totals.values().map(|t| total_constraint(t)));
    ConstraintDoc { property_facts, generic_rules, specialized_constraints }
}

/// The ASP program: facts grouped with their shapes' generic rules, then the
/// recall and totality constraints.
pub fn emit_asp(props: &BTreeSet<Property>, recall_cap: usize) -> String {
    let doc = build_doc(props, recall_cap);
    if doc.property_facts.is_empty() && doc.specialized_constraints.is_empty() {
        return "% no pointless-rule properties found\n".to_string();
    }
    let mut out = String::new();
    // interleave: each shape's facts immediately followed by its generic rule
    let mut rules_by_shape: BTreeMap<String, String> = BTreeMap::new();
    for rule in &doc.generic_rules {
        let head_start = rule.find(":- ").unwrap() + 3;
        let head_end = rule[head_start..].find('(').unwrap() + head_start;
        rules_by_shape.insert(rule[head_start..head_end].to_string(), rule.clone());
    }
    let mut current_shape: Option<String> = None;
    for fact in &doc.property_facts {
        let shape = fact[..fact.find('(').unwrap()].to_string();
        if current_shape.as_ref().is_some_and(|s| *s != shape) {
            let prev = current_shape.take().unwrap();
            out.push_str(&rules_by_shape[&prev]);
            out.push('\n');
        }
        out.push_str(fact);
        out.push('\n');
        current_shape = Some(shape);
    }
    if let Some(prev) = current_shape {
        out.push_str(&rules_by_shape[&prev]);
        out.push('\n');
    }
    for c in &doc.specialized_constraints {
        out.push_str(c);
        out.push('\n');
    }
    debug_assert!(validate_asp(&out).is_ok(), "{:?}", validate_asp(&out));
    out
}

/// Checks the output is a syntactically well-formed logic-program fragment:
/// every statement terminated by a period, parentheses and braces balanced.
pub fn validate_asp(text: &str) -> Result<(), String> {
    let mut statement = String::new();
    for line in text.lines() {
        if line.trim().is_empty() || line.trim_start().starts_with('%') {
            continue;
        }
        statement.push_str(line);
        let parens = statement.chars().filter(|&c| c == '(').count() as isize
            - statement.chars().filter(|&c| c == ')').count() as isize;
        let braces = statement.chars().filter(|&c| c == '{').count() as isize
            - statement.chars().filter(|&c| c == '}').count() as isize;
        if parens < 0 || braces < 0 {
            return Err(format!("unbalanced delimiters in `{statement}`"));
        }
        if statement.trim_end().ends_with('.') && parens == 0 && braces == 0 {
            statement.clear();
        }
    }
    if statement.is_empty() {
        Ok(())
    } else {
        Err(format!("unterminated statement `{statement}`"))
    }
}

/// The JSON mirror: four arrays plus metadata recording the emission cap.
pub fn emit_json(props: &BTreeSet<Property>, recall_cap: usize) -> String {
    let mut unsat = Vec::new();
    let mut implies = Vec::new();
    let mut recall = Vec::new();
    let mut total = Vec::new();
    for p in props {
        match p {
            Property::Unsat(u) => unsat.push(json!({
                "shape": shape_groups_of(&u.literals),
                "predicates": u.preds,
                "fact": p.fact_name(),
            })),
            Property::Implies(i) => implies.push(json!({
                "shape": shape_groups_of(&i.literals),
                "premise": i.preds[..i.preds.len() - 1],
                "conclusion": i.preds.last().unwrap(),
                "fact": p.fact_name(),
            })),
            Property::Recall(r) => recall.push(json!({
                "pred": r.pred,
                "arity": r.arity,
                "input_positions": r.input_positions,
                "output_positions": r.output_positions,
                "bound": r.bound,
                "fact": p.fact_name(),
                "emitted": !r.input_positions.is_empty() && r.bound <= recall_cap,
            })),
            Property::Total(t) => total.push(json!({
                "pred": t.pred,
                "arity": t.arity,
                "total_positions": t.total_positions,
                "removable_positions": t.removable_positions,
                "fact": p.fact_name(),
            })),
        }
    }
    let doc = json!({
        "unsat": unsat,
        "implies": implies,
        "recall": recall,
        "total": total,
        "meta": { "recall_emission_cap": recall_cap },
    });
    let mut text = serde_json::to_string_pretty(&doc).unwrap();
    text.push('\n');
    text
}

fn shape_groups_of(literals: &[Vec<VarId>]) -> String {
    literals
        .iter()
        .map(|l| l.iter().map(|&v| (b'a' + v) as char).collect::<String>())
        .collect::<Vec<_>>()
        .join("_")
}
