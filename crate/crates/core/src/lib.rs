pub mod canon;
pub mod classical;
pub mod equivalence;
pub mod error;
pub mod game;
pub mod io;
pub mod perm;
pub mod quantum;
pub mod survey;

pub use error::{Error, Result};
pub use game::{evaluate_assignment, super_quantum_value, Assignment, Edge, EdgeLabel, EdgeTally, LabeledGameGraph};
pub use perm::{make_ld, translations, verify_p1p2, Permutation, PermutationSet};
