//! An actor language with cooperative scheduling, its translation into a
//! continuation-passing intermediate representation, and the machinery to
//! check that the translation preserves behaviour and cost.

pub mod bench;
pub mod bridge;
pub mod cli;
pub mod compiler;
pub mod cost;
pub mod parser;
pub mod runtime;
pub mod source_lang;
pub mod source_sem;
pub mod target_ir;
pub mod trace;

use num_rational::Rational64;

/// Exact cost values.
pub type Cost = Rational64;
pub type ExactCostModel = cost::CostModel<Rational64>;
pub type ExactCostReport = cost::CostReport<Rational64>;
pub type FloatCostModel = cost::CostModel<f64>;
pub type FloatCostReport = cost::CostReport<f64>;
