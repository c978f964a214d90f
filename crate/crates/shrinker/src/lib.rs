//! Preprocessing for rule learners: discover properties of a materialized
//! fact base that make whole families of candidate rules pointless, and emit
//! them as ASP constraints and JSON.

pub mod audit;
pub mod bk;
pub mod discover;
pub mod emit;
pub mod eval;
pub mod exec;
pub mod gen;
pub mod property;
pub mod recall;
pub mod template;
pub mod total;
