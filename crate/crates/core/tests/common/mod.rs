#![allow(dead_code)]

use std::collections::HashSet;

use ordcsp::{Constraint, FiniteStructure, Instance, Relation, Signature};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

pub const EU: &[(&str, usize)] = &[("E", 2), ("U", 1)];
pub const E: &[(&str, usize)] = &[("E", 2)];

/// Every tuple of `{0..size}^arity` in lexicographic order.
pub fn all_tuples(size: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..size).map(move |v| {
                    let mut t = t.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

/// Builds a structure whose relation `i` keeps the tuples selected by `bits[i]`
/// (indexed like [`all_tuples`]).
pub fn from_bits(size: usize, sig: &[(&str, usize)], bits: &[Vec<bool>]) -> FiniteStructure {
    let relations = sig
        .iter()
        .zip(bits)
        .map(|(&(_, arity), keep)| {
            let tuples = all_tuples(size, arity)
                .into_iter()
                .zip(keep)
                .filter(|(_, &k)| k)
                .map(|(t, _)| t);
            Relation::new(arity, tuples.collect::<Vec<_>>())
        })
        .collect();
    FiniteStructure::new(
        Signature::new(sig.iter().copied()).unwrap(),
        size,
        relations,
    )
    .unwrap()
}

pub fn random_structure(
    rng: &mut impl Rng,
    size: usize,
    sig: &[(&str, usize)],
    density: f64,
) -> FiniteStructure {
    let bits: Vec<Vec<bool>> = sig
        .iter()
        .map(|&(_, arity)| {
            (0..size.pow(arity as u32))
                .map(|_| rng.gen_bool(density))
                .collect()
        })
        .collect();
    from_bits(size, sig, &bits)
}

pub fn arb_structure(
    sizes: std::ops::RangeInclusive<usize>,
    sig: &'static [(&'static str, usize)],
) -> impl Strategy<Value = FiniteStructure> {
    sizes.prop_flat_map(move |size| {
        let rels: Vec<_> = sig
            .iter()
            .map(|&(_, arity)| proptest::collection::vec(any::<bool>(), size.pow(arity as u32)))
            .collect();
        rels.prop_map(move |bits| from_bits(size, sig, &bits))
    })
}

pub fn var_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

pub fn random_instance(
    rng: &mut impl Rng,
    sig: &[(&str, usize)],
    vars: usize,
    constraints: usize,
) -> Instance {
    let variables = var_names(vars);
    let constraints = (0..constraints)
        .map(|_| {
            let &(rel, arity) = sig.choose(rng).unwrap();
            Constraint {
                rel: rel.to_string(),
                args: (0..arity)
                    .map(|_| variables[rng.gen_range(0..vars)].clone())
                    .collect(),
            }
        })
        .collect();
    Instance {
        variables,
        constraints,
    }
}

pub fn arb_instance(
    sig: &'static [(&'static str, usize)],
    max_vars: usize,
    max_constraints: usize,
) -> impl Strategy<Value = Instance> {
    (1..=max_vars).prop_flat_map(move |vars| {
        let constraint = (0..sig.len()).prop_flat_map(move |r| {
            proptest::collection::vec(0..vars, sig[r].1).prop_map(move |args| (r, args))
        });
        proptest::collection::vec(constraint, 0..=max_constraints).prop_map(move |cs| {
            let variables = var_names(vars);
            let constraints = cs
                .into_iter()
                .map(|(r, args)| Constraint {
                    rel: sig[r].0.to_string(),
                    args: args.iter().map(|&a| variables[a].clone()).collect(),
                })
                .collect();
            Instance {
                variables,
                constraints,
            }
        })
    })
}

/// Exhaustive search over all `|B|^|A|` assignments.
pub fn brute_hom(a: &Instance, b: &FiniteStructure) -> bool {
    let index = |name: &str| a.variables.iter().position(|v| v == name).unwrap();
    let constraints: Vec<(&Relation, Vec<usize>)> = a
        .constraints
        .iter()
        .map(|c| {
            (
                b.relation(&c.rel).unwrap(),
                c.args.iter().map(|x| index(x)).collect(),
            )
        })
        .collect();
    all_tuples(b.size(), a.variables.len())
        .into_iter()
        .any(|h| {
            constraints.iter().all(|(rel, vars)| {
                let image: Vec<usize> = vars.iter().map(|&v| h[v]).collect();
                rel.contains(&image)
            })
        })
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    permutations(n - 1)
        .into_iter()
        .flat_map(|p| {
            (0..n).map(move |i| {
                let mut q = p.clone();
                q.insert(i, n - 1);
                q
            })
        })
        .collect()
}

/// Membership vector of the substructure induced on `elements`, minimized
/// over all orderings of `elements`.
pub fn canonical_form(b: &FiniteStructure, elements: &[usize]) -> Vec<bool> {
    let k = elements.len();
    permutations(k)
        .into_iter()
        .map(|perm| {
            let ordered: Vec<usize> = perm.iter().map(|&i| elements[i]).collect();
            b.relations()
                .iter()
                .flat_map(|rel| {
                    all_tuples(k, rel.arity()).into_iter().map(|t| {
                        let image: Vec<usize> = t.iter().map(|&i| ordered[i]).collect();
                        rel.contains(&image)
                    })
                })
                .collect::<Vec<bool>>()
        })
        .min()
        .unwrap()
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for e in start..n {
            cur.push(e);
            go(e + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

pub fn isomorphism_types(b: &FiniteStructure, k: usize) -> HashSet<Vec<bool>> {
    subsets(b.size(), k)
        .iter()
        .map(|s| canonical_form(b, s))
        .collect()
}

/// Number of `n`-point configurations in the plane up to independent order
/// automorphisms of each axis: `n` distinct cells of a `k x l` grid meeting
/// every row and column, summed over `k` and `l`.
pub fn plane_configurations(n: usize) -> usize {
    let mut total = 0;
    for k in 1..=n {
        for l in 1..=n {
            total += subsets(k * l, n)
                .iter()
                .filter(|cells| {
                    let rows: HashSet<usize> = cells.iter().map(|c| c / l).collect();
                    let cols: HashSet<usize> = cells.iter().map(|c| c % l).collect();
                    rows.len() == k && cols.len() == l
                })
                .count();
        }
    }
    total
}
