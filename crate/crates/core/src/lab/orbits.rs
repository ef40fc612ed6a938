//! Counting orbits of n-subsets through isomorphism classes of induced
//! substructures of a finite sample.
//!
//! For a homogeneous template two n-subsets lie in the same orbit exactly when
//! their induced substructures are isomorphic, and every n-subset is
//! order-isomorphic to one inside `Sample(n)`. For other templates the count
//! is a lower bound.

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::{sample_with, SamplerConfig};
use crate::structure::FiniteStructure;
use crate::template::{is_documented_homogeneous, Template};

pub const MAX_ORBIT_N: usize = 7;
pub const DEFAULT_SUBSET_BUDGET: u128 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    Exact,
    LowerBound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub n: usize,
    pub class_count: usize,
    pub exactness: Exactness,
}

#[derive(Clone, Debug)]
pub struct OrbitConfig {
    /// Cap on `C(|Sample(n)|, n)`.
    pub subset_budget: u128,
    pub sampler: SamplerConfig,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        OrbitConfig {
            subset_budget: DEFAULT_SUBSET_BUDGET,
            sampler: SamplerConfig::default(),
        }
    }
}

pub fn orbit_count(t: &Template, n: usize) -> Result<OrbitReport> {
    orbit_count_with(t, n, &OrbitConfig::default())
}

pub fn orbit_count_with(t: &Template, n: usize, config: &OrbitConfig) -> Result<OrbitReport> {
    let sample = sample_with(t, n, &config.sampler)?;
    let class_count = count_isomorphism_classes(&sample.structure, n, config.subset_budget)?;
    let exactness = if is_documented_homogeneous(t) {
        Exactness::Exact
    } else {
        Exactness::LowerBound
    };
    Ok(OrbitReport {
        n,
        class_count,
        exactness,
    })
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of isomorphism types among the substructures of `b` induced on
/// `n`-element subsets.
///
/// Subsets are enumerated in increasing element order while the membership
/// bits of the induced structure are built incrementally; distinct raw
/// encodings are then reduced to a canonical form minimized over all `n!`
/// orderings.
pub fn count_isomorphism_classes(b: &FiniteStructure, n: usize, budget: u128) -> Result<usize> {
    if n == 0 || n > MAX_ORBIT_N {
        return Err(Error::Precondition(format!(
            "subset size must be between 1 and {MAX_ORBIT_N}, got {n}"
        )));
    }
    let subsets = binomial(b.size(), n);
    if subsets > budget {
        return Err(Error::cap("n-subsets to enumerate", subsets, budget));
    }
    if subsets == 0 {
        return Ok(0);
    }
    if PairCode::applies(b) {
        return Ok(PairCode::new(b, n).count(b));
    }
    Ok(count_generic(b, n))
}

fn count_generic(b: &FiniteStructure, n: usize) -> usize {
    let layout = Layout::new(b, n);
    let index = MembershipIndex::new(b);
    let mut raw_codes: FxHashSet<Vec<u64>> = FxHashSet::default();
    let mut codes = vec![vec![0u64; layout.words]; n + 1];
    let mut chosen = Vec::with_capacity(n);
    enumerate(
        b,
        &layout,
        &index,
        n,
        0,
        &mut chosen,
        &mut codes,
        &mut raw_codes,
    );

    let perms = permutations(n);
    let canonical: FxHashSet<Vec<u64>> = raw_codes
        .iter()
        .map(|code| layout.canonical(code, &perms))
        .collect();
    canonical.len()
}

/// Encoding for structures with relations of arity at most two: one word per
/// position (its loops and unary memberships) and one word per pair of
/// positions (memberships in both directions).
struct PairCode {
    n: usize,
    size: usize,
    /// Number of binary relations; pair words hold forward bits below this
    /// and backward bits above.
    binary: u32,
    pair: Vec<u64>,
    single: Vec<u64>,
}

impl PairCode {
    fn applies(b: &FiniteStructure) -> bool {
        let arities = || b.relations().iter().map(|r| r.arity());
        let binary = arities().filter(|&a| a == 2).count();
        let unary = arities().filter(|&a| a == 1).count();
        arities().all(|a| a <= 2) && binary <= 32 && binary + unary <= 64
    }

    fn new(b: &FiniteStructure, n: usize) -> Self {
        let size = b.size();
        let mut pair = vec![0u64; size * size];
        let mut single = vec![0u64; size];
        let binary = b.relations().iter().filter(|r| r.arity() == 2).count() as u32;
        let (mut bi, mut ui) = (0u32, binary);
        for rel in b.relations() {
            match rel.arity() {
                2 => {
                    for t in rel.tuples() {
                        let (e, f) = (t[0], t[1]);
                        pair[e * size + f] |= 1 << bi;
                        pair[f * size + e] |= 1 << (binary + bi);
                        if e == f {
                            single[e] |= 1 << bi;
                        }
                    }
                    bi += 1;
                }
                1 => {
                    for t in rel.tuples() {
                        single[t[0]] |= 1 << ui;
                    }
                    ui += 1;
                }
                _ => {}
            }
        }
        PairCode {
            n,
            size,
            binary,
            pair,
            single,
        }
    }

    fn slots(&self) -> usize {
        self.n + self.n * (self.n - 1) / 2
    }

    /// Slot of the pair `p < j`.
    fn pair_slot(&self, p: usize, j: usize) -> usize {
        self.n + j * (j - 1) / 2 + p
    }

    fn count(&self, b: &FiniteStructure) -> usize {
        let mut raw: FxHashSet<Box<[u64]>> = FxHashSet::default();
        let mut code = vec![0u64; self.slots()];
        let mut chosen = Vec::with_capacity(self.n);
        self.enumerate(b.size(), 0, &mut chosen, &mut code, &mut raw);
        let perms = permutations(self.n);
        let mut scratch = vec![0u64; self.slots()];
        let canonical: FxHashSet<Vec<u64>> = raw
            .iter()
            .map(|c| self.canonical(c, &perms, &mut scratch))
            .collect();
        canonical.len()
    }

    fn enumerate(
        &self,
        size: usize,
        from: usize,
        chosen: &mut Vec<usize>,
        code: &mut [u64],
        out: &mut FxHashSet<Box<[u64]>>,
    ) {
        let j = chosen.len();
        if j == self.n {
            if !out.contains(&*code) {
                out.insert(code.into());
            }
            return;
        }
        for e in from..=size - (self.n - j) {
            code[j] = self.single[e];
            let base = self.pair_slot(0, j.max(1));
            for (p, &c) in chosen.iter().enumerate() {
                code[base + p] = self.pair[c * self.size + e];
            }
            chosen.push(e);
            self.enumerate(size, e + 1, chosen, code, out);
            chosen.pop();
        }
    }

    fn swap_direction(&self, word: u64) -> u64 {
        let low = (1u64 << self.binary) - 1;
        (word & low) << self.binary | (word >> self.binary) & low
    }

    fn canonical(&self, code: &[u64], perms: &[Vec<usize>], out: &mut [u64]) -> Vec<u64> {
        let mut best: Option<Vec<u64>> = None;
        for perm in perms {
            for j in 0..self.n {
                out[perm[j]] = code[j];
                for p in 0..j {
                    let word = code[self.pair_slot(p, j)];
                    let (a, c) = (perm[p], perm[j]);
                    if a < c {
                        out[self.pair_slot(a, c)] = word;
                    } else {
                        out[self.pair_slot(c, a)] = self.swap_direction(word);
                    }
                }
            }
            if best.as_deref().is_none_or(|b| *out < *b) {
                best = Some(out.to_vec());
            }
        }
        best.expect("at least one permutation")
    }
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    b: &FiniteStructure,
    layout: &Layout,
    index: &MembershipIndex,
    n: usize,
    from: usize,
    chosen: &mut Vec<usize>,
    codes: &mut [Vec<u64>],
    out: &mut FxHashSet<Vec<u64>>,
) {
    let depth = chosen.len();
    if depth == n {
        if !out.contains(&codes[depth]) {
            out.insert(codes[depth].clone());
        }
        return;
    }
    // Leave room for the remaining picks.
    let last = b.size() - (n - depth);
    for e in from..=last {
        chosen.push(e);
        let (done, rest) = codes.split_at_mut(depth + 1);
        let code = &mut rest[0];
        code.copy_from_slice(&done[depth]);
        layout.add_position(index, chosen, code);
        enumerate(b, layout, index, n, e + 1, chosen, codes, out);
        chosen.pop();
    }
}

/// Bit positions of relation memberships among `n` ordered positions.
struct Layout {
    n: usize,
    arities: Vec<usize>,
    offsets: Vec<usize>,
    words: usize,
}

impl Layout {
    fn new(b: &FiniteStructure, n: usize) -> Self {
        let arities: Vec<usize> = b.relations().iter().map(|r| r.arity()).collect();
        let mut offsets = Vec::with_capacity(arities.len());
        let mut total = 0;
        for &a in &arities {
            offsets.push(total);
            total += n.pow(a as u32);
        }
        Layout {
            n,
            arities,
            offsets,
            words: total.div_ceil(64).max(1),
        }
    }

    fn bit(&self, rel: usize, positions: &[usize]) -> usize {
        self.offsets[rel] + positions.iter().fold(0, |acc, &p| acc * self.n + p)
    }

    /// Sets the bits of every tuple that mentions the newest position.
    fn add_position(&self, index: &MembershipIndex, chosen: &[usize], code: &mut [u64]) {
        let j = chosen.len() - 1;
        let mut positions = Vec::new();
        let mut elements = Vec::new();
        for (r, &arity) in self.arities.iter().enumerate() {
            positions.clear();
            positions.resize(arity, 0);
            loop {
                if positions.contains(&j) {
                    elements.clear();
                    elements.extend(positions.iter().map(|&p| chosen[p]));
                    if index.contains(r, &elements) {
                        let bit = self.bit(r, &positions);
                        code[bit / 64] |= 1 << (bit % 64);
                    }
                }
                if !step(&mut positions, j + 1) {
                    break;
                }
            }
        }
    }

    /// Minimum over all relabelings of the positions.
    fn canonical(&self, code: &[u64], perms: &[Vec<usize>]) -> Vec<u64> {
        let set_bits: Vec<(usize, Vec<usize>)> = self.decode(code);
        let mut best: Option<Vec<u64>> = None;
        let mut out = vec![0u64; self.words];
        for perm in perms {
            out.iter_mut().for_each(|w| *w = 0);
            for (r, positions) in &set_bits {
                let moved: Vec<usize> = positions.iter().map(|&p| perm[p]).collect();
                let bit = self.bit(*r, &moved);
                out[bit / 64] |= 1 << (bit % 64);
            }
            if best.as_ref().is_none_or(|b| out < *b) {
                best = Some(out.clone());
            }
        }
        best.expect("at least one permutation")
    }

    fn decode(&self, code: &[u64]) -> Vec<(usize, Vec<usize>)> {
        let mut set = Vec::new();
        for (r, &arity) in self.arities.iter().enumerate() {
            let mut positions = vec![0usize; arity];
            loop {
                let bit = self.bit(r, &positions);
                if code[bit / 64] >> (bit % 64) & 1 == 1 {
                    set.push((r, positions.clone()));
                }
                if !step(&mut positions, self.n) {
                    break;
                }
            }
        }
        set
    }
}

fn step(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..n).collect();
    let mut all = vec![current.clone()];
    // Lexicographic successor.
    loop {
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return all;
        };
        let j = (i..n)
            .rev()
            .find(|&j| current[j] > current[i - 1])
            .expect("pivot");
        current.swap(i - 1, j);
        current[i..].reverse();
        all.push(current.clone());
    }
}

/// Dense bit tables where they fit, binary search otherwise.
enum Lookup {
    Dense(Vec<u64>),
    Sparse,
}

struct MembershipIndex<'a> {
    b: &'a FiniteStructure,
    lookups: Vec<Lookup>,
}

const DENSE_LIMIT: u128 = 1 << 27;

impl<'a> MembershipIndex<'a> {
    fn new(b: &'a FiniteStructure) -> Self {
        let size = b.size();
        let lookups = b
            .relations()
            .iter()
            .map(|rel| {
                let cells = (size as u128).pow(rel.arity() as u32);
                if cells > DENSE_LIMIT {
                    return Lookup::Sparse;
                }
                let mut bits = vec![0u64; (cells as usize).div_ceil(64)];
                for t in rel.tuples() {
                    let idx = t.iter().fold(0usize, |acc, &v| acc * size + v);
                    bits[idx / 64] |= 1 << (idx % 64);
                }
                Lookup::Dense(bits)
            })
            .collect();
        MembershipIndex { b, lookups }
    }

    fn contains(&self, rel: usize, tuple: &[usize]) -> bool {
        match &self.lookups[rel] {
            Lookup::Dense(bits) => {
                let size = self.b.size();
                let idx = tuple.iter().fold(0usize, |acc, &v| acc * size + v);
                bits[idx / 64] >> (idx % 64) & 1 == 1
            }
            Lookup::Sparse => self.b.relations()[rel].contains(tuple),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{FiniteStructure, Relation};
    use crate::template::preset;

    #[test]
    fn binomials() {
        assert_eq!(binomial(100, 5), 75_287_520);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(7, 0), 1);
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(permutations(1), vec![vec![0]]);
    }

    #[test]
    fn qlt_has_one_orbit() {
        let r = orbit_count(&preset("qlt").unwrap(), 4).unwrap();
        assert_eq!(r.class_count, 1);
        assert_eq!(r.exactness, Exactness::Exact);
    }

    #[test]
    fn gamma2_small_counts() {
        let t = preset("gamma2").unwrap();
        for (n, expect) in [(1, 1), (2, 2), (3, 4)] {
            assert_eq!(orbit_count(&t, n).unwrap().class_count, expect);
        }
    }

    #[test]
    fn gamma3_is_a_lower_bound() {
        let r = orbit_count(&preset("gamma3").unwrap(), 2).unwrap();
        assert_eq!(r.exactness, Exactness::LowerBound);
        assert!(r.class_count >= 1);
    }

    #[test]
    fn small_digraph_types() {
        let k4 = FiniteStructure::clique(4);
        assert_eq!(count_isomorphism_classes(&k4, 3, 1000).unwrap(), 1);
        assert_eq!(count_isomorphism_classes(&k4, 5, 1000).unwrap(), 0);
        // Directed path 0 -> 1 -> 2 -> 3: pairs are an edge or a non-edge;
        // triples are a 2-path {0,1,2}, or an edge plus an isolated vertex.
        let path = FiniteStructure::single("E", 2, 4, &[&[0, 1], &[1, 2], &[2, 3]]).unwrap();
        assert_eq!(count_isomorphism_classes(&path, 2, 1000).unwrap(), 2);
        assert_eq!(count_isomorphism_classes(&path, 3, 1000).unwrap(), 2);
    }

    #[test]
    fn pair_encoding_agrees_with_generic() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let size: usize = rng.gen_range(3..8);
            let symbols = [("E", 2), ("F", 2), ("U", 1)];
            let relations = symbols
                .iter()
                .map(|&(_, arity)| {
                    let cells = size.pow(arity as u32);
                    let tuples = (0..cells).filter(|_| rng.gen_bool(0.35)).map(|i| {
                        if arity == 2 {
                            vec![i / size, i % size]
                        } else {
                            vec![i]
                        }
                    });
                    Relation::new(arity, tuples.collect::<Vec<_>>())
                })
                .collect();
            let sig = crate::structure::Signature::new(symbols).unwrap();
            let b = FiniteStructure::new(sig, size, relations).unwrap();
            assert!(PairCode::applies(&b));
            for n in 1..=size.min(4) {
                assert_eq!(
                    PairCode::new(&b, n).count(&b),
                    count_generic(&b, n),
                    "n = {n}"
                );
            }
        }
    }

    #[test]
    fn budget_and_range_errors() {
        let s = FiniteStructure::clique(10);
        assert!(count_isomorphism_classes(&s, 3, 10)
            .unwrap_err()
            .is_cap_exceeded());
        assert!(count_isomorphism_classes(&s, 0, 10).is_err());
        assert!(count_isomorphism_classes(&s, 8, u128::MAX).is_err());
    }

    #[test]
    fn report_json() {
        let r = OrbitReport {
            n: 4,
            class_count: 8,
            exactness: Exactness::Exact,
        };
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"n":4,"class_count":8,"exactness":"exact"}"#
        );
    }
}
