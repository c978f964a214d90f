//! The discovered pointless-rule witnesses and their serialization to fact
//! names such as `unsat_ab_ba(succ,succ)` or `implies_a_a(odd,int)`.

use crate::recall::RecallFact;
use crate::template::{renumber, Template, VarId};
use crate::total::TotalFact;

/// A witness that some class of rules is pointless.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub enum Property {
    Unsat(UnsatProp),
    Implies(ImpliesProp),
    Recall(RecallFact),
    Total(TotalFact),
}

/// An unsatisfiable template instance. Literals are stored in presentation
/// order with variables renumbered by first occurrence, so the shape name can
/// be read off directly.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub struct UnsatProp {
    pub literals: Vec<Vec<VarId>>,
    pub preds: Vec<String>,
}

/// A satisfiable instance whose last literal holds under every assignment
/// satisfying the preceding ones. Presentation order puts the implied literal
/// last; variables are renumbered by first occurrence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub struct ImpliesProp {
    pub literals: Vec<Vec<VarId>>,
    pub preds: Vec<String>,
}

/// Literal orderings that differ from the canonical one in the established
/// naming convention. The transitivity shape is customarily written
/// `ab_bc_ac` (chain first, closing edge last) rather than its canonical
/// `ab_ac_bc`.
fn presentation_order(canonical: &[Vec<VarId>]) -> Vec<usize> {
    if canonical == [vec![0, 1], vec![0, 2], vec![1, 2]] {
        return vec![0, 2, 1];
    }
    (0..canonical.len()).collect()
}

fn letters(vars: &[VarId]) -> String {
    vars.iter()
        .map(|&v| {
            debug_assert!(v < 26);
            (b'a' + v) as char
        })
        .collect()
}

fn shape_groups(literals: &[Vec<VarId>]) -> String {
    literals.iter().map(|l| letters(l)).collect::<Vec<_>>().join("_")
}

fn position_letters(positions: &[usize]) -> String {
    positions.iter().map(|&p| (b'a' + (p - 1) as u8) as char).collect()
}

impl UnsatProp {
    pub fn new(shape: &Template, preds: Vec<String>) -> UnsatProp {
        assert_eq!(shape.len(), preds.len());
        let order = presentation_order(shape.literals());
        let ordered: Vec<Vec<VarId>> =
            order.iter().map(|&i| shape.literals()[i].clone()).collect();
        let preds: Vec<String> = order.iter().map(|&i| preds[i].clone()).collect();
        UnsatProp { literals: renumber(&ordered), preds }
    }

    pub fn shape_name(&self) -> String {
        format!("unsat_{}", shape_groups(&self.literals))
    }
}

impl ImpliesProp {
    /// Builds the property from a canonical shape and the index of the implied
    /// literal, which must be captured (its variables all occur elsewhere).
    pub fn new(shape: &Template, preds: Vec<String>, implied_index: usize) -> ImpliesProp {
        assert_eq!(shape.len(), preds.len());
        let implied = &shape.literals()[implied_index];
        let captured = implied.iter().all(|v| {
            shape
                .literals()
                .iter()
                .enumerate()
                .any(|(i, l)| i != implied_index && l.contains(v))
        });
        assert!(captured, "implied literal must be captured in the shape");
        let mut order: Vec<usize> =
            (0..shape.len()).filter(|&i| i != implied_index).collect();
        order.push(implied_index);
        let ordered: Vec<Vec<VarId>> =
            order.iter().map(|&i| shape.literals()[i].clone()).collect();
        let preds: Vec<String> = order.iter().map(|&i| preds[i].clone()).collect();
        ImpliesProp { literals: renumber(&ordered), preds }
    }

    pub fn shape_name(&self) -> String {
        format!("implies_{}", shape_groups(&self.literals))
    }
}

impl Property {
    /// The unique serialized fact name, e.g. `unsat_ab_ba(succ,succ)`,
    /// `recall_q_bc_a_2`, or `total_len_a` (removable positions).
    pub fn fact_name(&self) -> String {
        match self {
            Property::Unsat(u) => format!("{}({})", u.shape_name(), u.preds.join(",")),
            Property::Implies(i) => format!("{}({})", i.shape_name(), i.preds.join(",")),
            Property::Recall(r) => {
                if r.input_positions.is_empty() {
                    format!(
                        "recall_{}_{}_{}",
                        r.pred,
                        position_letters(&r.output_positions),
                        r.bound
                    )
                } else {
                    format!(
                        "recall_{}_{}_{}_{}",
                        r.pred,
                        position_letters(&r.input_positions),
                        position_letters(&r.output_positions),
                        r.bound
                    )
                }
            }
            Property::Total(t) => {
                format!("total_{}_{}", t.pred, position_letters(&t.removable_positions))
            }
        }
    }
}
