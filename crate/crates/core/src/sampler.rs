//! Finite samples of templates.
//!
//! The direct sampler evaluates each relation on the grid `{0, ..., n-1}`.
//! The interpretation sampler enumerates the `d`-tuples of `{0, ..., dn-1}`
//! satisfying the domain formula, quotients them by the equality formula and
//! evaluates relations on one representative per class.

use log::warn;
use petgraph::unionfind::UnionFind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::{FiniteStructure, Relation};
use crate::template::{Template, TemplateKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub structure: FiniteStructure,
    /// Base-grid tuple standing for each element (length = dimension).
    pub representatives: Vec<Vec<i64>>,
    pub base_grid_size: usize,
}

impl Sample {
    pub fn size(&self) -> usize {
        self.structure.size()
    }

    pub fn sidecar(&self) -> SampleSidecar {
        SampleSidecar {
            representatives: self.representatives.clone(),
            base_grid_size: self.base_grid_size,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSidecar {
    pub representatives: Vec<Vec<i64>>,
    pub base_grid_size: usize,
}

#[derive(Clone, Debug)]
pub struct SamplerConfig {
    /// Cap on `(dn)^d`.
    pub grid_cap: u64,
    /// Congruence is checked exhaustively up to this many satisfying tuples.
    pub exhaustive_limit: usize,
    /// Number of random congruence checks beyond the exhaustive limit.
    pub sampled_checks: usize,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            grid_cap: 1_000_000,
            exhaustive_limit: 10_000,
            sampled_checks: 100_000,
            seed: 0,
        }
    }
}

/// Dispatches on the template kind.
pub fn sample(t: &Template, n: usize) -> Result<Sample> {
    sample_with(t, n, &SamplerConfig::default())
}

pub fn sample_with(t: &Template, n: usize, config: &SamplerConfig) -> Result<Sample> {
    match t.kind {
        TemplateKind::Direct => sample_direct(t, n),
        TemplateKind::Interpretation => sample_interpretation_with(t, n, config),
    }
}

/// The induced substructure on `{0, ..., n-1}`; `n = 0` is treated as 1.
pub fn sample_direct(t: &Template, n: usize) -> Result<Sample> {
    if t.kind != TemplateKind::Direct {
        return Err(Error::Precondition(format!(
            "`{}` is not a direct template",
            t.name
        )));
    }
    let n = n.max(1);
    let points: Vec<Vec<i64>> = (0..n as i64).map(|i| vec![i]).collect();
    let relations = evaluate_relations(t, &points);
    Ok(Sample {
        structure: FiniteStructure::new(t.signature()?, n, relations)?,
        representatives: points,
        base_grid_size: n,
    })
}

pub fn sample_interpretation(t: &Template, n: usize) -> Result<Sample> {
    sample_interpretation_with(t, n, &SamplerConfig::default())
}

pub fn sample_interpretation_with(
    t: &Template,
    n: usize,
    config: &SamplerConfig,
) -> Result<Sample> {
    if t.kind != TemplateKind::Interpretation {
        return Err(Error::Precondition(format!(
            "`{}` is not an interpretation",
            t.name
        )));
    }
    let classes = interpretation_classes(t, n, config)?;
    let representatives: Vec<Vec<i64>> = classes.iter().map(|c| c[0].clone()).collect();
    let relations = evaluate_relations(t, &representatives);
    Ok(Sample {
        structure: FiniteStructure::new(t.signature()?, representatives.len(), relations)?,
        representatives,
        base_grid_size: t.dimension * n.max(1),
    })
}

/// Equivalence classes of the grid tuples satisfying the domain formula,
/// ordered by their lexicographically least member, which comes first.
/// Validates that the equality formula is an equivalence and a congruence.
pub fn interpretation_classes(
    t: &Template,
    n: usize,
    config: &SamplerConfig,
) -> Result<Vec<Vec<Vec<i64>>>> {
    let d = t.dimension;
    let grid = d * n.max(1);
    let cells = (grid as u64).checked_pow(d as u32).unwrap_or(u64::MAX);
    if cells > config.grid_cap {
        return Err(Error::cap(
            "interpretation grid (dn)^d",
            cells,
            config.grid_cap,
        ));
    }
    let tuples: Vec<Vec<i64>> = grid_points(grid, d)
        .filter(|p| t.domain_formula.holds(p))
        .collect();
    let count = tuples.len();
    let eq = &t.equality_formula;
    let mut pair = vec![0i64; 2 * d];
    let mut related = |a: &[i64], b: &[i64]| {
        pair[..d].copy_from_slice(a);
        pair[d..].copy_from_slice(b);
        eq.holds(&pair)
    };

    let mut uf = UnionFind::<usize>::new(count);
    for (i, a) in tuples.iter().enumerate() {
        if !related(a, a) {
            return Err(Error::EqualityNotEquivalence(format!(
                "not reflexive on {a:?}"
            )));
        }
        for (j, b) in tuples.iter().enumerate().skip(i + 1) {
            let ab = related(a, b);
            if ab != related(b, a) {
                return Err(Error::EqualityNotEquivalence(format!(
                    "not symmetric on {a:?}, {b:?}"
                )));
            }
            if ab {
                uf.union(i, j);
            }
        }
    }
    let labels = uf.into_labeling();
    for i in 0..count {
        for j in i + 1..count {
            if labels[i] == labels[j] && !related(&tuples[i], &tuples[j]) {
                return Err(Error::EqualityNotEquivalence(format!(
                    "not transitive: {:?} and {:?} are linked but unrelated",
                    tuples[i], tuples[j]
                )));
            }
        }
    }

    // Tuples are in lexicographic order, so first occurrence = least member.
    let mut class_of_root = std::collections::HashMap::new();
    let mut classes: Vec<Vec<Vec<i64>>> = Vec::new();
    for (i, p) in tuples.iter().enumerate() {
        let c = *class_of_root.entry(labels[i]).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[c].push(p.clone());
    }
    check_congruence(t, &tuples, &classes, config)?;
    Ok(classes)
}

/// Every relation formula gives the same answer when one argument is replaced
/// by its class representative, for every choice of the other arguments.
fn check_congruence(
    t: &Template,
    tuples: &[Vec<i64>],
    classes: &[Vec<Vec<i64>>],
    config: &SamplerConfig,
) -> Result<()> {
    let swaps: Vec<(&Vec<i64>, &Vec<i64>)> = classes
        .iter()
        .flat_map(|c| c[1..].iter().map(move |member| (member, &c[0])))
        .collect();
    if swaps.is_empty() || tuples.is_empty() || t.relations.is_empty() {
        return Ok(());
    }
    let mut point = Vec::new();
    let mut violation = |rel: &crate::template::TemplateRelation,
                         pos: usize,
                         member: &[i64],
                         rep: &[i64],
                         others: &[&Vec<i64>]|
     -> Option<Error> {
        let mut eval_with = |x: &[i64]| {
            point.clear();
            let mut rest = others.iter();
            for a in 0..rel.arity {
                if a == pos {
                    point.extend_from_slice(x);
                } else {
                    point.extend_from_slice(rest.next().expect("co-argument"));
                }
            }
            rel.formula.holds(&point)
        };
        (eval_with(member) != eval_with(rep)).then(|| Error::EqualityNotCongruence {
            relation: rel.name.clone(),
            detail: format!(
                "{member:?} and {rep:?} are equal but differ at argument {pos} against {others:?}"
            ),
        })
    };

    if tuples.len() <= config.exhaustive_limit {
        for rel in &t.relations {
            for pos in 0..rel.arity {
                for &(member, rep) in &swaps {
                    let mut idx = vec![0usize; rel.arity - 1];
                    loop {
                        let others: Vec<&Vec<i64>> = idx.iter().map(|&i| &tuples[i]).collect();
                        if let Some(e) = violation(rel, pos, member, rep, &others) {
                            return Err(e);
                        }
                        if !odometer(&mut idx, tuples.len()) {
                            break;
                        }
                    }
                }
            }
        }
    } else {
        warn!(
            "{} satisfying tuples exceed the exhaustive limit; checking congruence on {} random cases (seed {})",
            tuples.len(),
            config.sampled_checks,
            config.seed
        );
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        for _ in 0..config.sampled_checks {
            let rel = &t.relations[rng.gen_range(0..t.relations.len())];
            let pos = rng.gen_range(0..rel.arity);
            let (member, rep) = swaps[rng.gen_range(0..swaps.len())];
            let others: Vec<&Vec<i64>> = (1..rel.arity)
                .map(|_| &tuples[rng.gen_range(0..tuples.len())])
                .collect();
            if let Some(e) = violation(rel, pos, member, rep, &others) {
                return Err(e);
            }
        }
    }
    Ok(())
}

fn odometer(digits: &mut [usize], base: usize) -> bool {
    for x in digits.iter_mut().rev() {
        *x += 1;
        if *x < base {
            return true;
        }
        *x = 0;
    }
    false
}

/// All points of `{0, ..., grid-1}^d` in lexicographic order.
pub fn grid_points(grid: usize, d: usize) -> impl Iterator<Item = Vec<i64>> {
    let total = (grid as u64).pow(d as u32);
    (0..total).map(move |mut code| {
        let mut p = vec![0i64; d];
        for slot in p.iter_mut().rev() {
            *slot = (code % grid as u64) as i64;
            code /= grid as u64;
        }
        p
    })
}

/// Evaluates every relation formula on all tuples of the given element points.
pub fn evaluate_relations(t: &Template, points: &[Vec<i64>]) -> Vec<Relation> {
    let size = points.len();
    t.relations
        .iter()
        .map(|rel| {
            let mut tuples = Vec::new();
            if size > 0 {
                let mut idx = vec![0usize; rel.arity];
                let mut point = Vec::with_capacity(rel.arity * t.dimension);
                loop {
                    point.clear();
                    for &i in &idx {
                        point.extend_from_slice(&points[i]);
                    }
                    if rel.formula.holds(&point) {
                        tuples.push(idx.clone());
                    }
                    if !odometer(&mut idx, size) {
                        break;
                    }
                }
            }
            Relation::new(rel.arity, tuples)
        })
        .collect()
}
