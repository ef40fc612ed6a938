//! Finite checks of the theory behind the solver.

pub mod equiv;
pub mod orbits;
pub mod walk;

pub use equiv::{check_set_hom_equiv, check_set_hom_equiv_with, EquivConfig, EquivReport};
pub use orbits::{
    count_isomorphism_classes, orbit_count, orbit_count_with, Exactness, OrbitConfig, OrbitReport,
};
pub use walk::{
    check_aclwalk_lemma, find_alternating_walk, find_exact_walk, PairCheck, Walk, WalkLemmaReport,
};
