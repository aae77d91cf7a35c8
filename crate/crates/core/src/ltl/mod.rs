//! Linear temporal logic over region propositions: parsing, direct
//! evaluation on lasso words, translation to Büchi automata and planning on
//! a transition system.

mod buchi;
mod formula;
mod plan;
mod word;

pub use buchi::{to_buchi, BuchiAutomaton, Label};
pub use formula::{parse, parse_with_props, Formula, ParseError};
pub use plan::{normalize, plan, Plan, PlanError};
pub use word::word_satisfies;
