//! Constraint satisfaction for templates defined over the rationals with
//! their order.
//!
//! An instance with `n` variables is decided by sampling a finite substructure
//! of the template on `n` points and running arc-consistency against it. The
//! crate also carries the finite machinery that justifies this: set
//! structures, totally symmetric and semi-lattice polymorphisms, and
//! exhaustive homomorphism search as an oracle.
//!
//! Formula evaluation and assignment checking are generic over [`Scalar`];
//! samples and witnesses use integer points.

use std::fmt::Debug;

use indexmap::IndexMap;
use num_rational::Ratio;
use num_traits::Num;

pub mod ac;
pub mod error;
pub mod formula;
pub mod hom;
pub mod lab;
pub mod polymorphism;
pub mod power;
pub mod sampler;
pub mod solver;
pub mod structure;
pub mod template;

pub use ac::{ac, ac_bound, ac_round_robin, AcOutcome, DomainMap};
pub use error::{Error, Result};
pub use formula::{parse_formula, Comparison, Formula, ParseError};
pub use hom::{find_homomorphism, hom_exists, structure_hom};
pub use polymorphism::{
    find_semilattice, has_ts_polymorphism, is_polymorphism, BinaryOpTable, SubsetFunctionTable,
};
pub use power::power_structure;
pub use sampler::{sample, sample_direct, sample_interpretation, Sample, SamplerConfig};
pub use solver::{
    extract_witness, solve, solve_with, verify_assignment, verify_direct_assignment, SolveOptions,
    Verdict,
};
pub use structure::{Constraint, FiniteStructure, Instance, Relation, Signature};
pub use template::{preset, validate_template, Semilattice, Template, TemplateKind};

/// An ordered number type usable as a coordinate of a point.
pub trait Scalar: Num + PartialOrd + Clone + Debug {}

impl<T: Num + PartialOrd + Clone + Debug> Scalar for T {}

/// A point of the base grid; all samplers produce these.
pub type Point = Vec<i64>;

/// A point with exact rational coordinates.
pub type RationalPoint = Vec<Ratio<i64>>;

/// Witness for a direct template: one integer per variable.
pub type Witness = IndexMap<String, i64>;
