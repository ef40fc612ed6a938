use serde::Serialize;

use crate::error::{Error, Result};
use crate::hom::structure_hom;
use crate::polymorphism::{
    find_semilattice, has_ts_polymorphism_budgeted, BinaryOpTable, DEFAULT_SEMILATTICE_CAP,
    DEFAULT_TS_BUDGET,
};
use crate::power::power_structure;
use crate::structure::FiniteStructure;

/// Both sides of the finite equivalence "P(B) -> B iff B has totally
/// symmetric polymorphisms of all arities", computed independently.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquivReport {
    pub set_hom: bool,
    pub ts_at_km: bool,
    /// Arity `k * m` at which the TS search ran.
    pub ts_arity: usize,
    pub semilattice: Option<BinaryOpTable>,
    pub consistent: bool,
}

#[derive(Clone, Debug)]
pub struct EquivConfig {
    pub max_size: usize,
    pub ts_budget: usize,
}

impl Default for EquivConfig {
    fn default() -> Self {
        EquivConfig {
            max_size: 3,
            ts_budget: DEFAULT_TS_BUDGET,
        }
    }
}

pub fn check_set_hom_equiv(b: &FiniteStructure) -> Result<EquivReport> {
    check_set_hom_equiv_with(b, &EquivConfig::default())
}

pub fn check_set_hom_equiv_with(b: &FiniteStructure, config: &EquivConfig) -> Result<EquivReport> {
    if b.size() > config.max_size {
        return Err(Error::cap(
            "structure size for the equivalence check",
            b.size() as u64,
            config.max_size as u64,
        ));
    }
    if b.size() == 0 {
        return Err(Error::Precondition(
            "the equivalence check needs a non-empty domain".into(),
        ));
    }
    let set_hom = structure_hom(&power_structure(b)?, b)?.is_some();
    let ts_arity = (b.signature().max_arity() * b.size()).max(1);
    let ts_at_km = has_ts_polymorphism_budgeted(b, ts_arity, config.ts_budget)?.is_some();
    let semilattice = if b.size() <= DEFAULT_SEMILATTICE_CAP {
        find_semilattice(b)?
    } else {
        None
    };
    Ok(EquivReport {
        set_hom,
        ts_at_km,
        ts_arity,
        semilattice,
        consistent: set_hom == ts_at_km,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k3_is_negative_on_both_sides() {
        let r = check_set_hom_equiv(&FiniteStructure::clique(3)).unwrap();
        assert!(!r.set_hom && !r.ts_at_km && r.consistent);
        assert_eq!(r.ts_arity, 6);
        assert_eq!(r.semilattice, None);
    }

    #[test]
    fn order_is_positive_on_both_sides() {
        let b = FiniteStructure::single("R", 2, 2, &[&[0, 0], &[0, 1], &[1, 1]]).unwrap();
        let r = check_set_hom_equiv(&b).unwrap();
        assert!(r.set_hom && r.ts_at_km && r.consistent);
        assert_eq!(r.semilattice, Some(BinaryOpTable::min(2)));
    }

    #[test]
    fn singleton_loop() {
        let b = FiniteStructure::single("R", 2, 1, &[&[0, 0]]).unwrap();
        let r = check_set_hom_equiv(&b).unwrap();
        assert!(r.set_hom && r.ts_at_km);
    }

    #[test]
    fn size_cap() {
        let b = FiniteStructure::single("R", 2, 4, &[]).unwrap();
        assert!(check_set_hom_equiv(&b).unwrap_err().is_cap_exceeded());
    }
}
