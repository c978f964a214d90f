//! Seeded random fact bases for fuzzing and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bk::FactBase;

/// Size bounds for a random fact base.
#[derive(Debug, Clone, Copy)]
pub struct GenParams {
    pub max_preds: usize,
    pub max_arity: usize,
    pub max_facts: usize,
    pub const_pool: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams { max_preds: 5, max_arity: 3, max_facts: 50, const_pool: 8 }
    }
}

/// Deterministically generates a fact base from a seed: predicate count,
/// arities, and facts are all drawn from a seeded stream.
pub fn random_fact_base(seed: u64, params: GenParams) -> FactBase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let num_preds = rng.gen_range(1..=params.max_preds);
    let preds: Vec<(String, usize)> = (0..num_preds)
        .map(|i| (format!("p{i}"), rng.gen_range(1..=params.max_arity)))
        .collect();
    let num_facts = rng.gen_range(0..=params.max_facts);
    let mut raw = Vec::with_capacity(num_facts);
    for _ in 0..num_facts {
        let (name, arity) = &preds[rng.gen_range(0..preds.len())];
        let args: Vec<String> = (0..*arity)
            .map(|_| format!("c{}", rng.gen_range(0..params.const_pool)))
            .collect();
        raw.push((name.clone(), args));
    }
    FactBase::from_raw_facts(raw)
}
