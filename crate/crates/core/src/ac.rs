//! Arc-consistency (hyperarc-consistency) for instances against finite structures.
//!
//! Each variable starts with the full domain of `B`; a constraint
//! `R(x_1, ..., x_k)` shrinks `h(x_i)` to the `i`-th projection of
//! `R^B ∩ h(x_1) × ... × h(x_k)`. Both the worklist and the round-robin
//! schedule compute the greatest fixpoint of these updates, which is unique.

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;
use indexmap::IndexMap;

use crate::error::Result;
use crate::power::subset_element;
use crate::structure::{BoundInstance, FiniteStructure, Instance};

/// Candidate images per variable, indexed like the instance's variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainMap {
    sets: Vec<FixedBitSet>,
}

impl DomainMap {
    pub fn full(num_vars: usize, size: usize) -> Self {
        let mut all = FixedBitSet::with_capacity(size);
        all.insert_range(..);
        DomainMap {
            sets: vec![all; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.sets.len()
    }

    pub fn set(&self, var: usize) -> &FixedBitSet {
        &self.sets[var]
    }

    /// Sorted elements of `h(var)`.
    pub fn values(&self, var: usize) -> Vec<usize> {
        self.sets[var].ones().collect()
    }

    pub fn any_empty(&self) -> bool {
        self.sets.iter().any(|s| s.is_clear())
    }

    /// Keyed by variable name, in declaration order.
    pub fn named(&self, instance: &Instance) -> IndexMap<String, Vec<usize>> {
        instance
            .variables
            .iter()
            .enumerate()
            .map(|(v, name)| (name.clone(), self.values(v)))
            .collect()
    }

    /// Each domain as an element of P(B) (bitmask order); `None` if some
    /// domain is empty or the structure is too large for masks.
    pub fn as_power_elements(&self) -> Option<Vec<usize>> {
        self.sets
            .iter()
            .map(|s| {
                if s.len() > 63 || s.is_clear() {
                    return None;
                }
                let mask = s.ones().fold(0u64, |m, v| m | 1 << v);
                Some(subset_element(mask))
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AcOutcome {
    pub accept: bool,
    pub domains: DomainMap,
}

pub fn ac(instance: &Instance, b: &FiniteStructure) -> Result<AcOutcome> {
    let bound = instance.bind(b.signature())?;
    Ok(ac_bound(&bound, b))
}

/// Worklist arc-consistency.
pub fn ac_bound(instance: &BoundInstance, b: &FiniteStructure) -> AcOutcome {
    ac_observed(instance, b, |_, _, _| {})
}

/// Worklist arc-consistency reporting every domain update as
/// `(variable, before, after)`.
pub fn ac_observed(
    instance: &BoundInstance,
    b: &FiniteStructure,
    mut observe: impl FnMut(usize, &FixedBitSet, &FixedBitSet),
) -> AcOutcome {
    let mut domains = DomainMap::full(instance.num_vars, b.size());
    let mut touching = vec![Vec::new(); instance.num_vars];
    for (ci, c) in instance.constraints.iter().enumerate() {
        for &v in &c.vars {
            if touching[v].last() != Some(&ci) {
                touching[v].push(ci);
            }
        }
    }
    let repeats: Vec<bool> = instance
        .constraints
        .iter()
        .map(|c| {
            let mut vs = c.vars.clone();
            vs.sort_unstable();
            vs.windows(2).any(|w| w[0] == w[1])
        })
        .collect();

    let mut queue: VecDeque<usize> = (0..instance.constraints.len()).collect();
    let mut queued = vec![true; instance.constraints.len()];
    while let Some(ci) = queue.pop_front() {
        queued[ci] = false;
        let c = &instance.constraints[ci];
        let supports = project(&c.vars, &b.relations()[c.relation], &domains, b.size());
        let mut changed = Vec::new();
        for (pos, &v) in c.vars.iter().enumerate() {
            let mut next = domains.sets[v].clone();
            next.intersect_with(&supports[pos]);
            if next != domains.sets[v] {
                observe(v, &domains.sets[v], &next);
                domains.sets[v] = next;
                changed.push(v);
            }
        }
        for v in changed {
            for &other in &touching[v] {
                if (other != ci || repeats[ci]) && !queued[other] {
                    queued[other] = true;
                    queue.push_back(other);
                }
            }
        }
    }
    AcOutcome {
        accept: !domains.any_empty(),
        domains,
    }
}

/// For each position, the values occurring there among tuples of `rel` that
/// lie inside the current domains.
fn project(
    vars: &[usize],
    rel: &crate::structure::Relation,
    domains: &DomainMap,
    size: usize,
) -> Vec<FixedBitSet> {
    let mut supports = vec![FixedBitSet::with_capacity(size); vars.len()];
    for t in rel.tuples() {
        if vars
            .iter()
            .zip(t)
            .all(|(&v, &x)| domains.sets[v].contains(x))
        {
            for (s, &x) in supports.iter_mut().zip(t) {
                s.insert(x);
            }
        }
    }
    supports
}

/// Arc-consistency exactly as the textbook repeat-loop: sweep all
/// constraints and positions, assigning `h(x_i)` one position at a time,
/// until a full sweep changes nothing.
pub fn ac_round_robin(instance: &BoundInstance, b: &FiniteStructure) -> AcOutcome {
    let mut domains = DomainMap::full(instance.num_vars, b.size());
    loop {
        let mut changed = false;
        for c in &instance.constraints {
            let rel = &b.relations()[c.relation];
            for (i, &xi) in c.vars.iter().enumerate() {
                let mut projection = FixedBitSet::with_capacity(b.size());
                for t in rel.tuples() {
                    if c.vars
                        .iter()
                        .zip(t)
                        .all(|(&v, &x)| domains.sets[v].contains(x))
                    {
                        projection.insert(t[i]);
                    }
                }
                if projection != domains.sets[xi] {
                    domains.sets[xi] = projection;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    AcOutcome {
        accept: !domains.any_empty(),
        domains,
    }
}
