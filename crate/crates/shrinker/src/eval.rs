//! Index-driven evaluation of conjunctive queries over a fact base under the
//! closed-world assumption.

use crate::bk::{ConstId, FactBase, PredId};
use crate::template::VarId;

/// A conjunctive query: literals over fact-base predicates with shared
/// first-order variables.
pub type Query = [(PredId, Vec<VarId>)];

fn query_num_vars(literals: &Query) -> usize {
    literals
        .iter()
        .flat_map(|(_, vs)| vs.iter())
        .map(|&v| v as usize + 1)
        .max()
        .unwrap_or(0)
}

/// Calls `f` with every assignment of constants to the query's variables that
/// makes all literals facts. Stops early when `f` returns `false`. Returns
/// `false` iff the enumeration was cut short.
pub fn for_each_assignment(
    fb: &FactBase,
    literals: &Query,
    f: &mut impl FnMut(&[ConstId]) -> bool,
) -> bool {
    let n = query_num_vars(literals);
    // smallest relation first; within a literal's evaluation the already-bound
    // positions are used as an index key
    let mut order: Vec<usize> = (0..literals.len()).collect();
    order.sort_by_key(|&i| (fb.num_facts(literals[i].0), i));
    let ordered: Vec<&(PredId, Vec<VarId>)> = order.iter().map(|&i| &literals[i]).collect();
    let mut binding: Vec<Option<ConstId>> = vec![None; n];
    search(fb, &ordered, 0, &mut binding, f)
}

fn search(
    fb: &FactBase,
    literals: &[&(PredId, Vec<VarId>)],
    depth: usize,
    binding: &mut Vec<Option<ConstId>>,
    f: &mut impl FnMut(&[ConstId]) -> bool,
) -> bool {
    if depth == literals.len() {
        let full: Vec<ConstId> = binding.iter().map(|b| b.unwrap()).collect();
        return f(&full);
    }
    let (pid, vars) = literals[depth];
    let bound_positions: Vec<usize> = vars
        .iter()
        .enumerate()
        .filter(|(_, &v)| binding[v as usize].is_some())
        .map(|(i, _)| i + 1)
        .collect();
    if bound_positions.len() == vars.len() {
        let tuple: Vec<ConstId> = vars.iter().map(|&v| binding[v as usize].unwrap()).collect();
        if fb.has_fact(*pid, &tuple) {
            return search(fb, literals, depth + 1, binding, f);
        }
        return true;
    }
    let ix = fb
        .index(*pid, &bound_positions)
        .expect("literal positions are within the predicate arity");
    let key: Vec<ConstId> = bound_positions
        .iter()
        .map(|&p| binding[vars[p - 1] as usize].unwrap())
        .collect();
    let Some(values) = ix.get(&key) else { return true };
    let value_positions: Vec<usize> =
        (1..=vars.len()).filter(|p| !bound_positions.contains(p)).collect();
    for value in values {
        // bind the free positions, honoring repeated variables inside the literal
        let mut newly_bound: Vec<VarId> = Vec::new();
        let mut ok = true;
        for (slot, &p) in value_positions.iter().enumerate() {
            let v = vars[p - 1];
            match binding[v as usize] {
                Some(c) if c == value[slot] => {}
                Some(_) => {
                    ok = false;
                    break;
                }
                None => {
                    binding[v as usize] = Some(value[slot]);
                    newly_bound.push(v);
                }
            }
        }
        let keep_going = if ok { search(fb, literals, depth + 1, binding, f) } else { true };
        for v in newly_bound {
            binding[v as usize] = None;
        }
        if !keep_going {
            return false;
        }
    }
    true
}

/// One satisfying assignment, if any.
pub fn find_witness(fb: &FactBase, literals: &Query) -> Option<Vec<ConstId>> {
    let mut witness = None;
    for_each_assignment(fb, literals, &mut |assignment| {
        witness = Some(assignment.to_vec());
        false
    });
    witness
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bk::parse_bk;

    #[test]
    fn joins_respect_shared_variables() {
        let fb = parse_bk("succ(1,2). succ(2,3). succ(3,4).").unwrap();
        let succ = fb.pred_id("succ", 2).unwrap();
        // succ(A,B), succ(B,C)
        let q = vec![(succ, vec![0, 1]), (succ, vec![1, 2])];
        let mut rows = Vec::new();
        for_each_assignment(&fb, &q, &mut |a| {
            rows.push(a.iter().map(|&c| fb.const_name(c).to_string()).collect::<Vec<_>>());
            true
        });
        rows.sort();
        assert_eq!(rows, vec![vec!["1", "2", "3"], vec!["2", "3", "4"]]);
    }

    #[test]
    fn repeated_variable_within_literal() {
        let fb = parse_bk("p(a,a). p(a,b).").unwrap();
        let p = fb.pred_id("p", 2).unwrap();
        let q = vec![(p, vec![0, 0])];
        let w = find_witness(&fb, &q).unwrap();
        assert_eq!(fb.const_name(w[0]), "a");
    }

    #[test]
    fn unsatisfiable_query_has_no_witness() {
        let fb = parse_bk("tail(a,b). tail(b,c).").unwrap();
        let t = fb.pred_id("tail", 2).unwrap();
        assert!(find_witness(&fb, &[(t, vec![0, 0])]).is_none());
        assert!(find_witness(&fb, &[(t, vec![0, 1]), (t, vec![1, 0])]).is_none());
    }
}
