//! Totally symmetric and semi-lattice polymorphisms of finite structures.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hom::find_homomorphism_ordered;
use crate::power::{mask_members, subset_element, subset_mask, DEFAULT_MAX_SUBSET_BITS};
use crate::structure::{BoundConstraint, BoundInstance, FiniteStructure, Relation};

/// Default cap on deduplicated TS constraints.
pub const DEFAULT_TS_BUDGET: usize = 1_000_000;
/// Default cap on the domain size for semi-lattice search.
pub const DEFAULT_SEMILATTICE_CAP: usize = 6;
/// Default cap on the tuple combinations the brute-force polymorphism check visits.
pub const DEFAULT_CHECK_BUDGET: u64 = 50_000_000;

/// A function on the non-empty subsets of `{0, ..., size - 1}` with at most
/// `arity` elements. It induces the totally symmetric operation
/// `(x_1, ..., x_n) -> f({x_1, ..., x_n})`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetFunctionTable {
    arity: usize,
    size: usize,
    /// Indexed by `mask - 1`; `None` for subsets larger than `arity`.
    values: Vec<Option<usize>>,
}

impl SubsetFunctionTable {
    /// Builds a table from a function on subset masks.
    pub fn from_fn(arity: usize, size: usize, mut f: impl FnMut(u64) -> usize) -> Result<Self> {
        if arity == 0 {
            return Err(Error::DomainMismatch("arity must be positive".into()));
        }
        if size > DEFAULT_MAX_SUBSET_BITS {
            return Err(Error::cap(
                "domain size for subset tables",
                size as u64,
                DEFAULT_MAX_SUBSET_BITS as u64,
            ));
        }
        let count = (1usize << size) - 1;
        let values = (0..count)
            .map(|e| {
                let mask = subset_mask(e);
                (mask.count_ones() as usize <= arity).then(|| f(mask))
            })
            .collect();
        Ok(SubsetFunctionTable {
            arity,
            size,
            values,
        })
    }

    /// The unary table `{a} -> a`.
    pub fn identity(size: usize) -> Result<Self> {
        Self::from_fn(1, size, |mask| mask.trailing_zeros() as usize)
    }

    /// The n-ary fold `f(x_1, f(x_2, ... f(x_{n-1}, x_n)))` of a semi-lattice.
    pub fn from_semilattice(op: &BinaryOpTable, arity: usize) -> Result<Self> {
        Self::from_fn(arity, op.size(), |mask| {
            let mut members = mask_members(mask);
            let first = members.next().expect("non-empty subset");
            members.fold(first, |acc, x| op.apply(acc, x))
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, mask: u64) -> Option<usize> {
        if mask == 0 {
            return None;
        }
        self.values.get(subset_element(mask)).copied().flatten()
    }

    /// Applies the induced totally symmetric operation.
    pub fn apply(&self, args: &[usize]) -> Option<usize> {
        if args.is_empty() || args.len() > self.arity {
            return None;
        }
        let mask = args.iter().fold(0u64, |m, &a| m | 1 << a);
        self.get(mask)
    }

    /// Defined entries as `(subset members, value)` pairs in mask order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, usize)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(e, v)| v.map(|value| (mask_members(subset_mask(e)).collect(), value)))
    }
}

/// A binary operation given by its full table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryOpTable {
    size: usize,
    table: Vec<Vec<usize>>,
}

impl BinaryOpTable {
    pub fn new(table: Vec<Vec<usize>>) -> Result<Self> {
        let size = table.len();
        if table
            .iter()
            .any(|row| row.len() != size || row.iter().any(|&v| v >= size))
        {
            return Err(Error::DomainMismatch(
                "operation table must be square and total".into(),
            ));
        }
        Ok(BinaryOpTable { size, table })
    }

    pub fn min(size: usize) -> Self {
        Self::from_fn(size, |a, b| a.min(b))
    }

    pub fn max(size: usize) -> Self {
        Self::from_fn(size, |a, b| a.max(b))
    }

    pub fn from_fn(size: usize, f: impl Fn(usize, usize) -> usize) -> Self {
        let table = (0..size)
            .map(|a| (0..size).map(|b| f(a, b)).collect())
            .collect();
        BinaryOpTable { size, table }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn apply(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn is_semilattice(&self) -> bool {
        let n = self.size;
        (0..n).all(|a| self.apply(a, a) == a)
            && (0..n).all(|a| (0..n).all(|b| self.apply(a, b) == self.apply(b, a)))
            && (0..n).all(|a| {
                (0..n).all(|b| {
                    (0..n)
                        .all(|c| self.apply(self.apply(a, b), c) == self.apply(a, self.apply(b, c)))
                })
            })
    }
}

/// Either kind of operation table accepted by [`is_polymorphism`].
#[derive(Clone, Copy, Debug)]
pub enum Operation<'a> {
    Binary(&'a BinaryOpTable),
    Symmetric(&'a SubsetFunctionTable),
}

impl<'a> From<&'a BinaryOpTable> for Operation<'a> {
    fn from(op: &'a BinaryOpTable) -> Self {
        Operation::Binary(op)
    }
}

impl<'a> From<&'a SubsetFunctionTable> for Operation<'a> {
    fn from(op: &'a SubsetFunctionTable) -> Self {
        Operation::Symmetric(op)
    }
}

pub fn is_polymorphism<'a>(op: impl Into<Operation<'a>>, b: &FiniteStructure) -> Result<bool> {
    is_polymorphism_budgeted(op, b, DEFAULT_CHECK_BUDGET)
}

/// Applies the operation coordinatewise to every choice of `arity` tuples of
/// each relation and checks that the result stays in the relation.
pub fn is_polymorphism_budgeted<'a>(
    op: impl Into<Operation<'a>>,
    b: &FiniteStructure,
    budget: u64,
) -> Result<bool> {
    let op = op.into();
    let (arity, size) = match op {
        Operation::Binary(t) => (2, t.size()),
        Operation::Symmetric(t) => (t.arity(), t.size()),
    };
    if size != b.size() {
        return Err(Error::DomainMismatch(format!(
            "operation on {size} elements, structure has {}",
            b.size()
        )));
    }
    for rel in b.relations() {
        let combos = (rel.len() as u64)
            .checked_pow(arity as u32)
            .unwrap_or(u64::MAX);
        if combos > budget {
            return Err(Error::cap(
                "tuple combinations in polymorphism check",
                combos,
                budget,
            ));
        }
    }
    let apply = |args: &[usize]| -> usize {
        match op {
            Operation::Binary(t) => t.apply(args[0], args[1]),
            Operation::Symmetric(t) => t.apply(args).expect("table covers arity"),
        }
    };
    for rel in b.relations() {
        if rel.is_empty() {
            continue;
        }
        let mut picks = vec![0usize; arity];
        let mut args = vec![0usize; arity];
        loop {
            let image: Vec<usize> = (0..rel.arity())
                .map(|i| {
                    for (slot, &p) in args.iter_mut().zip(&picks) {
                        *slot = rel.tuples()[p][i];
                    }
                    apply(&args)
                })
                .collect();
            if !rel.contains(&image) {
                return Ok(false);
            }
            if !advance(&mut picks, rel.len()) {
                break;
            }
        }
    }
    Ok(true)
}

/// Odometer increment; false once every position has wrapped.
fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

pub fn has_ts_polymorphism(
    b: &FiniteStructure,
    arity: usize,
) -> Result<Option<SubsetFunctionTable>> {
    has_ts_polymorphism_budgeted(b, arity, DEFAULT_TS_BUDGET)
}

/// Searches for a totally symmetric polymorphism of the given arity.
///
/// Choosing `arity` tuples of a `k`-ary relation constrains the table only
/// through the column sets `(V_1, ..., V_k)` of the chosen tuples. Those
/// column-set tuples are exactly the unions of at most `arity` relation
/// tuples, found here by breadth-first closure, so the search never visits
/// the `|R|^arity` raw combinations.
pub fn has_ts_polymorphism_budgeted(
    b: &FiniteStructure,
    arity: usize,
    budget: usize,
) -> Result<Option<SubsetFunctionTable>> {
    if arity == 0 {
        return Err(Error::DomainMismatch("arity must be positive".into()));
    }
    let m = b.size();
    if m > DEFAULT_MAX_SUBSET_BITS {
        return Err(Error::cap(
            "domain size for subset tables",
            m as u64,
            DEFAULT_MAX_SUBSET_BITS as u64,
        ));
    }
    if arity == 1 {
        return SubsetFunctionTable::identity(m).map(Some);
    }
    if m == 0 {
        return Ok(None);
    }

    let mut constraints = Vec::new();
    for (ri, rel) in b.relations().iter().enumerate() {
        for state in column_set_closure(rel, arity, budget.saturating_sub(constraints.len()))? {
            constraints.push(BoundConstraint {
                relation: ri,
                vars: state.iter().map(|&mask| subset_element(mask)).collect(),
            });
        }
    }

    // One variable per non-empty subset; unconstrained ones take their minimum.
    let count = (1usize << m) - 1;
    let candidates = (0..count)
        .map(|e| {
            let mask = subset_mask(e);
            let inside = mask_members(mask);
            let outside = (0..m).filter(move |&v| mask >> v & 1 == 0);
            inside.chain(outside).collect()
        })
        .collect();
    let instance = BoundInstance {
        num_vars: count,
        constraints,
    };
    let Some(values) = find_homomorphism_ordered(&instance, b, candidates) else {
        return Ok(None);
    };
    SubsetFunctionTable::from_fn(arity, m, |mask| values[subset_element(mask)]).map(Some)
}

/// All column-set tuples of unions of between 1 and `arity` tuples of `rel`.
fn column_set_closure(rel: &Relation, arity: usize, budget: usize) -> Result<Vec<Vec<u64>>> {
    let as_masks = |t: &[usize]| t.iter().map(|&v| 1u64 << v).collect::<Vec<u64>>();
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut order = Vec::new();
    let mut frontier = Vec::new();
    for t in rel.tuples() {
        let s = as_masks(t);
        if seen.insert(s.clone()) {
            order.push(s.clone());
            frontier.push(s);
        }
    }
    for _ in 1..arity {
        if frontier.is_empty() {
            break;
        }
        let mut next = Vec::new();
        for s in &frontier {
            for t in rel.tuples() {
                let u: Vec<u64> = s.iter().zip(t).map(|(&mask, &v)| mask | 1 << v).collect();
                if seen.insert(u.clone()) {
                    if seen.len() > budget {
                        return Err(Error::cap(
                            "deduplicated TS constraints",
                            seen.len() as u64,
                            budget as u64,
                        ));
                    }
                    order.push(u.clone());
                    next.push(u);
                }
            }
        }
        frontier = next;
    }
    if order.len() > budget {
        return Err(Error::cap(
            "deduplicated TS constraints",
            order.len() as u64,
            budget as u64,
        ));
    }
    Ok(order)
}

pub fn find_semilattice(b: &FiniteStructure) -> Result<Option<BinaryOpTable>> {
    find_semilattice_capped(b, DEFAULT_SEMILATTICE_CAP)
}

/// Exhaustive search for an idempotent, commutative, associative binary
/// polymorphism. Cells above the diagonal are filled in lexicographic order.
pub fn find_semilattice_capped(b: &FiniteStructure, cap: usize) -> Result<Option<BinaryOpTable>> {
    let m = b.size();
    if m > cap {
        return Err(Error::cap(
            "domain size for semi-lattice search",
            m as u64,
            cap as u64,
        ));
    }
    let mut search = SemilatticeSearch::new(b);
    if search.fill(0) {
        let table = search
            .table
            .iter()
            .map(|row| row.iter().map(|v| v.expect("filled")).collect())
            .collect();
        Ok(Some(BinaryOpTable::new(table)?))
    } else {
        Ok(None)
    }
}

struct SemilatticeSearch<'a> {
    b: &'a FiniteStructure,
    m: usize,
    table: Vec<Vec<Option<usize>>>,
    cells: Vec<(usize, usize)>,
    /// For each cell, the (relation, tuple, tuple) pairs with some coordinate
    /// combining exactly that cell.
    watchers: Vec<Vec<(usize, usize, usize)>>,
}

impl<'a> SemilatticeSearch<'a> {
    fn new(b: &'a FiniteStructure) -> Self {
        let m = b.size();
        let mut table = vec![vec![None; m]; m];
        for (a, row) in table.iter_mut().enumerate() {
            row[a] = Some(a);
        }
        let cells: Vec<(usize, usize)> = (0..m)
            .flat_map(|a| (a + 1..m).map(move |c| (a, c)))
            .collect();
        let cell_index = |a: usize, c: usize| cells.iter().position(|&x| x == (a.min(c), a.max(c)));
        let mut watchers = vec![Vec::new(); cells.len()];
        for (ri, rel) in b.relations().iter().enumerate() {
            for (ti, t) in rel.tuples().iter().enumerate() {
                for (ui, u) in rel.tuples().iter().enumerate() {
                    let mut touched: Vec<usize> = t
                        .iter()
                        .zip(u)
                        .filter(|(x, y)| x != y)
                        .filter_map(|(&x, &y)| cell_index(x, y))
                        .collect();
                    touched.sort_unstable();
                    touched.dedup();
                    for ci in touched {
                        watchers[ci].push((ri, ti, ui));
                    }
                }
            }
        }
        SemilatticeSearch {
            b,
            m,
            table,
            cells,
            watchers,
        }
    }

    fn fill(&mut self, next: usize) -> bool {
        let Some(&(a, c)) = self.cells.get(next) else {
            return true;
        };
        for v in 0..self.m {
            self.table[a][c] = Some(v);
            self.table[c][a] = Some(v);
            if self.associative_so_far() && self.preserves_so_far(next) && self.fill(next + 1) {
                return true;
            }
        }
        self.table[a][c] = None;
        self.table[c][a] = None;
        false
    }

    fn associative_so_far(&self) -> bool {
        let t = &self.table;
        for x in 0..self.m {
            for y in 0..self.m {
                let Some(xy) = t[x][y] else { continue };
                for z in 0..self.m {
                    let Some(yz) = t[y][z] else { continue };
                    if let (Some(l), Some(r)) = (t[xy][z], t[x][yz]) {
                        if l != r {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    fn preserves_so_far(&self, cell: usize) -> bool {
        self.watchers[cell].iter().all(|&(ri, ti, ui)| {
            let rel = &self.b.relations()[ri];
            let (t, u) = (&rel.tuples()[ti], &rel.tuples()[ui]);
            let image: Option<Vec<usize>> =
                t.iter().zip(u).map(|(&x, &y)| self.table[x][y]).collect();
            image.is_none_or(|img| rel.contains(&img))
        })
    }
}
