//! Finite simplicial sets and the machinery of higher groupoids, stacks and
//! hypercovers in the category of finite sets, where covers are surjections.
//!
//! Everything is computed exhaustively on finite truncations: horn and
//! matching objects, path spaces, strictification, simplicial groups with
//! `W` and `W̄`, Eilenberg-MacLane spaces and the descent of a cocycle to a
//! finite 2-group.

pub mod descent;
pub mod em;
pub mod error;
pub mod fixtures;
pub mod group;
pub mod iso;
pub mod json;
pub mod join;
pub mod kan;
pub mod path_space;
pub mod shapes;
pub mod simp_group;
pub mod sset;
pub mod strictify;
pub mod suites;

pub use error::{level_budget, set_level_budget, with_level_budget, Error, Result};
pub use kan::{classify, Kind, Nat, Verdict};
pub use sset::{SMap, SSet};
