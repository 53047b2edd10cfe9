//! Triple store with conjunctive patterns and property paths.

mod canned;
mod pattern;
mod store;

pub use canned::{examples_for, find_gaps, import_closure, neighborhood, GapReport};
pub use pattern::{PathMod, Pattern, PatternError, PatternTerm, TriplePattern};
pub use store::{Binding, Store};
