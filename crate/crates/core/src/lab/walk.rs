//! Alternating closed walks on two binary relations.
//!
//! A walk `x_0, x_1, ..., x_{2n}` with `x_{2n} = x_0` alternates an `R` step
//! `(x_{2i}, x_{2i+1})` with an `S` step `(x_{2i+1}, x_{2i+2})`. If a totally
//! symmetric operation of arity `n` preserves both relations and such a walk
//! of length `2n` exists, then `R ∩ S⁻¹` is non-empty.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::polymorphism::has_ts_polymorphism;
use crate::structure::{FiniteStructure, Relation};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Walk {
    /// `x_0, ..., x_{2n}` with the last equal to the first.
    pub vertices: Vec<usize>,
}

impl Walk {
    /// Number of steps, `2n`.
    pub fn len(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_valid(&self, r: &Relation, s: &Relation) -> bool {
        let v = &self.vertices;
        v.len() >= 3
            && v.len() % 2 == 1
            && v.first() == v.last()
            && v.windows(2).enumerate().all(|(i, w)| {
                let rel = if i % 2 == 0 { r } else { s };
                rel.contains(w)
            })
    }
}

fn adjacency(rel: &Relation, size: usize) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); size];
    for t in rel.tuples() {
        adj[t[0]].push(t[1]);
    }
    adj
}

fn domain_size(r: &Relation, s: &Relation) -> usize {
    r.tuples()
        .iter()
        .chain(s.tuples())
        .flat_map(|t| t.iter().copied())
        .max()
        .map_or(0, |m| m + 1)
}

/// Shortest alternating closed walk of length at most `2 * max_half_length`,
/// by breadth-first search over (vertex, parity) from each start vertex.
pub fn find_alternating_walk(r: &Relation, s: &Relation, max_half_length: usize) -> Option<Walk> {
    assert!(
        r.arity() == 2 && s.arity() == 2,
        "walks need binary relations"
    );
    let size = domain_size(r, s);
    let (ra, sa) = (adjacency(r, size), adjacency(s, size));
    let mut best: Option<Walk> = None;
    for start in 0..size {
        // State index: vertex * 2 + parity (0 = next step uses R).
        let mut parent = vec![usize::MAX; 2 * size];
        let mut dist = vec![usize::MAX; 2 * size];
        let mut queue = VecDeque::new();
        dist[start * 2] = 0;
        queue.push_back(start * 2);
        let mut closing = None;
        'bfs: while let Some(state) = queue.pop_front() {
            let (v, parity) = (state / 2, state % 2);
            if dist[state] >= 2 * max_half_length {
                continue;
            }
            let next_parity = 1 - parity;
            for &w in if parity == 0 { &ra[v] } else { &sa[v] } {
                let next = w * 2 + next_parity;
                if next == start * 2 {
                    closing = Some(state);
                    break 'bfs;
                }
                if dist[next] == usize::MAX {
                    dist[next] = dist[state] + 1;
                    parent[next] = state;
                    queue.push_back(next);
                }
            }
        }
        if let Some(last) = closing {
            let mut vertices = vec![start];
            let mut state = last;
            while state != start * 2 {
                vertices.push(state / 2);
                state = parent[state];
            }
            vertices.push(start);
            vertices.reverse();
            if best
                .as_ref()
                .is_none_or(|b| vertices.len() < b.vertices.len())
            {
                best = Some(Walk { vertices });
            }
        }
    }
    best
}

/// An alternating closed walk of length exactly `2n`, if one exists.
pub fn find_exact_walk(r: &Relation, s: &Relation, n: usize) -> Option<Walk> {
    assert!(
        r.arity() == 2 && s.arity() == 2,
        "walks need binary relations"
    );
    if n == 0 {
        return None;
    }
    let size = domain_size(r, s);
    let (ra, sa) = (adjacency(r, size), adjacency(s, size));
    for start in 0..size {
        // layers[i][v] = predecessor of v at step i, reachable after i steps.
        let mut layers: Vec<Vec<Option<usize>>> = vec![vec![None; size]];
        layers[0][start] = Some(start);
        for step in 0..2 * n {
            let adj = if step % 2 == 0 { &ra } else { &sa };
            let mut next = vec![None; size];
            for v in (0..size).filter(|&v| layers[step][v].is_some()) {
                for &w in &adj[v] {
                    next[w].get_or_insert(v);
                }
            }
            layers.push(next);
        }
        if layers[2 * n][start].is_some() {
            let mut vertices = vec![start];
            let mut v = start;
            for step in (1..=2 * n).rev() {
                v = layers[step][v].expect("reachable");
                vertices.push(v);
            }
            vertices.reverse();
            return Some(Walk { vertices });
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairCheck {
    pub r: String,
    pub s: String,
    /// Walk of length exactly `2n`: the hypothesis of the lemma.
    pub exact_walk: Option<Walk>,
    /// Shortest walk of length at most `2n`, for information.
    pub shortest_walk: Option<Walk>,
    pub r_meets_s_inverse: bool,
    pub violation: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WalkLemmaReport {
    pub n: usize,
    pub pairs: Vec<PairCheck>,
    pub violations: usize,
}

/// Checks the walk lemma on every ordered pair of binary relations of `b`,
/// after confirming that `b` has a totally symmetric polymorphism of arity `n`.
pub fn check_aclwalk_lemma(b: &FiniteStructure, n: usize) -> Result<WalkLemmaReport> {
    if n == 0 {
        return Err(Error::Precondition("arity must be at least 1".into()));
    }
    if has_ts_polymorphism(b, n)?.is_none() {
        return Err(Error::Precondition(format!(
            "no totally symmetric polymorphism of arity {n}"
        )));
    }
    let binary: Vec<(&str, &Relation)> = b
        .signature()
        .symbols()
        .iter()
        .zip(b.relations())
        .filter(|(sym, _)| sym.arity == 2)
        .map(|(sym, rel)| (sym.name.as_str(), rel))
        .collect();
    let mut pairs = Vec::new();
    for &(rn, r) in &binary {
        for &(sn, s) in &binary {
            let exact_walk = find_exact_walk(r, s, n);
            let shortest_walk = find_alternating_walk(r, s, n);
            let r_meets_s_inverse = r.tuples().iter().any(|t| s.contains(&[t[1], t[0]]));
            let violation = exact_walk.is_some() && !r_meets_s_inverse;
            pairs.push(PairCheck {
                r: rn.to_string(),
                s: sn.to_string(),
                exact_walk,
                shortest_walk,
                r_meets_s_inverse,
                violation,
            });
        }
    }
    let violations = pairs.iter().filter(|p| p.violation).count();
    Ok(WalkLemmaReport {
        n,
        pairs,
        violations,
    })
}
