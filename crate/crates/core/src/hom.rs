//! Exhaustive homomorphism search by backtracking.
//!
//! This is the reference oracle the rest of the crate is checked against, so
//! it deliberately uses only support checks on partial assignments and never
//! runs arc-consistency.

use indexmap::IndexMap;

use crate::error::Result;
use crate::structure::{BoundInstance, FiniteStructure, Instance};

/// Searches for a homomorphism from `instance` to `target`, returning the
/// assignment keyed by variable name. `None` is authoritative.
pub fn hom_exists(
    instance: &Instance,
    target: &FiniteStructure,
) -> Result<Option<IndexMap<String, usize>>> {
    let bound = instance.bind(target.signature())?;
    Ok(find_homomorphism(&bound, target).map(|values| {
        instance
            .variables
            .iter()
            .cloned()
            .zip(values)
            .collect::<IndexMap<_, _>>()
    }))
}

/// Searches for a homomorphism between two structures. The source signature
/// must be contained in the target signature.
pub fn structure_hom(
    source: &FiniteStructure,
    target: &FiniteStructure,
) -> Result<Option<Vec<usize>>> {
    for sym in source.signature().symbols() {
        target.signature().resolve(&sym.name, sym.arity)?;
    }
    let bound = source.to_instance().bind(target.signature())?;
    Ok(find_homomorphism(&bound, target))
}

/// Backtracking over a bound instance; the result is indexed by variable.
pub fn find_homomorphism(instance: &BoundInstance, target: &FiniteStructure) -> Option<Vec<usize>> {
    let all: Vec<usize> = (0..target.size()).collect();
    Search::new(instance, target, vec![all; instance.num_vars]).run()
}

/// Like [`find_homomorphism`], but variable `v` only tries `candidates[v]`,
/// in that order.
pub fn find_homomorphism_ordered(
    instance: &BoundInstance,
    target: &FiniteStructure,
    candidates: Vec<Vec<usize>>,
) -> Option<Vec<usize>> {
    assert_eq!(candidates.len(), instance.num_vars);
    Search::new(instance, target, candidates).run()
}

struct Search<'a> {
    instance: &'a BoundInstance,
    target: &'a FiniteStructure,
    /// `index[rel][pos][value]` lists tuple indices with `value` at `pos`.
    index: Vec<Vec<Vec<Vec<usize>>>>,
    /// Constraint indices touching each variable.
    touching: Vec<Vec<usize>>,
    order: Vec<usize>,
    candidates: Vec<Vec<usize>>,
    assignment: Vec<Option<usize>>,
}

impl<'a> Search<'a> {
    fn new(
        instance: &'a BoundInstance,
        target: &'a FiniteStructure,
        candidates: Vec<Vec<usize>>,
    ) -> Self {
        let size = target.size();
        let index = target
            .relations()
            .iter()
            .map(|rel| {
                let mut by_pos = vec![vec![Vec::new(); size]; rel.arity()];
                for (ti, t) in rel.tuples().iter().enumerate() {
                    for (p, &v) in t.iter().enumerate() {
                        by_pos[p][v].push(ti);
                    }
                }
                by_pos
            })
            .collect();
        let mut touching = vec![Vec::new(); instance.num_vars];
        for (ci, c) in instance.constraints.iter().enumerate() {
            for &v in &c.vars {
                if touching[v].last() != Some(&ci) {
                    touching[v].push(ci);
                }
            }
        }
        let order = variable_order(instance, &touching);
        Search {
            instance,
            target,
            index,
            touching,
            order,
            candidates,
            assignment: vec![None; instance.num_vars],
        }
    }

    fn run(mut self) -> Option<Vec<usize>> {
        if self.extend(0) {
            Some(
                self.assignment
                    .into_iter()
                    .map(|v| v.expect("complete"))
                    .collect(),
            )
        } else {
            None
        }
    }

    fn extend(&mut self, depth: usize) -> bool {
        let Some(&var) = self.order.get(depth) else {
            return true;
        };
        for i in 0..self.candidates[var].len() {
            self.assignment[var] = Some(self.candidates[var][i]);
            if self.consistent(var) && self.extend(depth + 1) {
                return true;
            }
        }
        self.assignment[var] = None;
        false
    }

    /// Every constraint touching `var` still has a tuple agreeing with the
    /// assigned positions.
    fn consistent(&self, var: usize) -> bool {
        self.touching[var].iter().all(|&ci| {
            let c = &self.instance.constraints[ci];
            let rel = &self.target.relations()[c.relation];
            let pos = c.vars.iter().position(|&v| v == var).expect("touching");
            let value = self.assignment[var].expect("assigned");
            self.index[c.relation][pos][value].iter().any(|&ti| {
                let t = &rel.tuples()[ti];
                c.vars
                    .iter()
                    .zip(t)
                    .all(|(&v, &x)| self.assignment[v].is_none_or(|a| a == x))
            })
        })
    }
}

/// Static order: repeatedly pick the variable sharing the most constraints
/// with already ordered variables (ties by total degree, then index).
fn variable_order(instance: &BoundInstance, touching: &[Vec<usize>]) -> Vec<usize> {
    let n = instance.num_vars;
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut links = vec![0usize; n];
    for _ in 0..n {
        let next = (0..n)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| (links[v], touching[v].len(), std::cmp::Reverse(v)))
            .expect("unplaced variable");
        placed[next] = true;
        order.push(next);
        for &ci in &touching[next] {
            for &w in &instance.constraints[ci].vars {
                if !placed[w] {
                    links[w] += 1;
                }
            }
        }
    }
    order
}

/// Checks that `mapping` (indexed by variable) satisfies every constraint.
pub fn is_homomorphism(
    instance: &BoundInstance,
    target: &FiniteStructure,
    mapping: &[usize],
) -> bool {
    mapping.len() == instance.num_vars
        && mapping.iter().all(|&v| v < target.size())
        && instance.constraints.iter().all(|c| {
            let image: Vec<usize> = c.vars.iter().map(|&v| mapping[v]).collect();
            target.relations()[c.relation].contains(&image)
        })
}
