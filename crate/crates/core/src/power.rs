//! The set structure P(B) on the non-empty subsets of a finite structure.
//!
//! Subsets are bitmasks over B's domain. Element `i` of P(B) is the subset with
//! mask `i + 1`, so elements are ordered by ascending mask.

use crate::error::{Error, Result};
use crate::structure::{FiniteStructure, Relation};

pub const DEFAULT_MAX_SUBSET_BITS: usize = 16;

/// Bitmask of the subset that P(B) element `element` stands for.
pub fn subset_mask(element: usize) -> u64 {
    element as u64 + 1
}

/// P(B) element for a non-empty subset mask.
pub fn subset_element(mask: u64) -> usize {
    debug_assert!(mask != 0);
    (mask - 1) as usize
}

pub fn mask_members(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |&b| mask >> b & 1 == 1)
}

pub fn power_structure(b: &FiniteStructure) -> Result<FiniteStructure> {
    power_structure_capped(b, DEFAULT_MAX_SUBSET_BITS)
}

/// Builds P(B). A tuple of subsets `(U_1, ..., U_k)` is in `R` iff every
/// element of every `U_i` extends to a tuple of `R^B` drawn from the `U_j`.
pub fn power_structure_capped(
    b: &FiniteStructure,
    max_subset_bits: usize,
) -> Result<FiniteStructure> {
    let m = b.size();
    if m == 0 {
        return Err(Error::InvalidStructure(
            "P(B) needs a non-empty domain".into(),
        ));
    }
    let cap = max_subset_bits.min(63);
    if m > cap {
        return Err(Error::cap("domain size for P(B)", m as u64, cap as u64));
    }
    let count = (1u64 << m) - 1;
    let relations = b
        .relations()
        .iter()
        .map(|rel| Relation::new(rel.arity(), covering_tuples(rel, count)))
        .collect();
    let labels = (0..count as usize)
        .map(|e| {
            let names: Vec<String> = mask_members(subset_mask(e)).map(|u| b.label(u)).collect();
            format!("{{{}}}", names.join(","))
        })
        .collect();
    FiniteStructure::new(b.signature().clone(), count as usize, relations)?.with_labels(labels)
}

fn covering_tuples(rel: &Relation, count: u64) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(rel.arity());
    extend(rel, count, &mut chosen, &mut out);
    out
}

/// Depth-first over positions. A prefix survives only if each element of each
/// chosen subset has a support among tuples whose prefix lies in the chosen
/// subsets; later positions can only remove supports.
fn extend(rel: &Relation, count: u64, chosen: &mut Vec<u64>, out: &mut Vec<Vec<usize>>) {
    if chosen.len() == rel.arity() {
        out.push(chosen.iter().map(|&mask| subset_element(mask)).collect());
        return;
    }
    for mask in 1..=count {
        chosen.push(mask);
        if prefix_covered(rel, chosen) {
            extend(rel, count, chosen, out);
        }
        chosen.pop();
    }
}

fn prefix_covered(rel: &Relation, chosen: &[u64]) -> bool {
    let mut covered = vec![0u64; chosen.len()];
    for t in rel.tuples() {
        if chosen.iter().zip(t).all(|(&mask, &v)| mask >> v & 1 == 1) {
            for (c, &v) in covered.iter_mut().zip(t) {
                *c |= 1 << v;
            }
        }
    }
    covered
        .iter()
        .zip(chosen)
        .all(|(&c, &mask)| c & mask == mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hom::structure_hom;

    /// The membership rule checked literally on one tuple of subsets.
    fn rule_holds(rel: &Relation, subsets: &[u64]) -> bool {
        (0..subsets.len()).all(|i| {
            mask_members(subsets[i]).all(|u| {
                rel.tuples().iter().any(|t| {
                    t[i] == u && t.iter().zip(subsets).all(|(&v, &mask)| mask >> v & 1 == 1)
                })
            })
        })
    }

    #[test]
    fn singleton_loop() {
        let b = FiniteStructure::single("R", 2, 1, &[&[0, 0]]).unwrap();
        let p = power_structure(&b).unwrap();
        assert_eq!(p.size(), 1);
        assert_eq!(p.relations()[0].tuples(), &[vec![0, 0]]);
        assert_eq!(p.label(0), "{0}");
    }

    #[test]
    fn k3_membership_examples() {
        let p = power_structure(&FiniteStructure::clique(3)).unwrap();
        let e = &p.relations()[0];
        let s01 = subset_element(0b011);
        let s0 = subset_element(0b001);
        assert!(e.contains(&[s01, s01]));
        assert!(!e.contains(&[s0, s0]));
        assert_eq!(p.size(), 7);
    }

    #[test]
    fn power_of_k3_does_not_map_back() {
        let k3 = FiniteStructure::clique(3);
        let p = power_structure(&k3).unwrap();
        assert_eq!(structure_hom(&p, &k3).unwrap(), None);
    }

    #[test]
    fn matches_literal_rule_on_all_pairs_and_triples() {
        let b = FiniteStructure::single("R", 2, 3, &[&[0, 1], &[1, 1], &[2, 0]]).unwrap();
        let p = power_structure(&b).unwrap();
        for x in 1..8u64 {
            for y in 1..8u64 {
                let expect = rule_holds(&b.relations()[0], &[x, y]);
                let got = p.relations()[0].contains(&[subset_element(x), subset_element(y)]);
                assert_eq!(expect, got, "({x:b}, {y:b})");
            }
        }
        let t = FiniteStructure::single("T", 3, 3, &[&[0, 1, 2], &[1, 1, 0], &[2, 0, 0]]).unwrap();
        let pt = power_structure(&t).unwrap();
        for x in 1..8u64 {
            for y in 1..8u64 {
                for z in 1..8u64 {
                    let expect = rule_holds(&t.relations()[0], &[x, y, z]);
                    let got = pt.relations()[0].contains(&[
                        subset_element(x),
                        subset_element(y),
                        subset_element(z),
                    ]);
                    assert_eq!(expect, got);
                }
            }
        }
    }

    #[test]
    fn size_is_two_to_the_m_minus_one() {
        for m in 1..=5 {
            let b = FiniteStructure::single("R", 1, m, &[&[0]]).unwrap();
            assert_eq!(power_structure(&b).unwrap().size(), (1 << m) - 1);
        }
    }

    #[test]
    fn cap_and_empty_domain_errors() {
        let b = FiniteStructure::single("R", 1, 5, &[]).unwrap();
        assert!(power_structure_capped(&b, 4).unwrap_err().is_cap_exceeded());
        let empty = FiniteStructure::single("R", 1, 0, &[]).unwrap();
        assert!(power_structure(&empty).is_err());
    }
}
