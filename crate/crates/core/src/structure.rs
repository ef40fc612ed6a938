//! Finite relational structures and CSP instances, plus their JSON file formats.
//!
//! A [`FiniteStructure`] has domain `{0, ..., size - 1}` and one tuple set per
//! symbol of its [`Signature`]. Tuple sets are kept sorted and deduplicated so
//! that membership is a binary search and iteration order is reproducible.

use std::collections::HashSet;
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

/// Ordered list of relation symbols with unique names.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    symbols: Vec<Symbol>,
}

impl Signature {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut sig = Signature::default();
        for (name, arity) in symbols {
            sig.push(name.into(), arity)?;
        }
        Ok(sig)
    }

    fn push(&mut self, name: String, arity: usize) -> Result<()> {
        if arity == 0 {
            return Err(Error::InvalidStructure(format!(
                "symbol `{name}` must have arity at least 1"
            )));
        }
        if self.index_of(&name).is_some() {
            return Err(Error::InvalidStructure(format!(
                "duplicate symbol `{name}`"
            )));
        }
        self.symbols.push(Symbol { name, arity });
        Ok(())
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    pub fn max_arity(&self) -> usize {
        self.symbols.iter().map(|s| s.arity).max().unwrap_or(0)
    }

    /// Resolves `name` and checks that it is used with `arity`.
    pub fn resolve(&self, name: &str, arity: usize) -> Result<usize> {
        let idx = self
            .index_of(name)
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
        let expected = self.symbols[idx].arity;
        if expected != arity {
            return Err(Error::ArityMismatch {
                symbol: name.to_string(),
                expected,
                found: arity,
            });
        }
        Ok(idx)
    }
}

/// A sorted, deduplicated set of tuples of one fixed arity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relation {
    arity: usize,
    tuples: Vec<Vec<usize>>,
}

impl Relation {
    pub fn new(arity: usize, tuples: impl IntoIterator<Item = Vec<usize>>) -> Self {
        let mut tuples: Vec<Vec<usize>> = tuples.into_iter().collect();
        tuples.sort_unstable();
        tuples.dedup();
        Relation { arity, tuples }
    }

    pub fn empty(arity: usize) -> Self {
        Relation {
            arity,
            tuples: Vec::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        self.tuples
            .binary_search_by(|t| t.as_slice().cmp(tuple))
            .is_ok()
    }
}

/// A finite relational structure on the domain `{0, ..., size - 1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteStructure {
    signature: Signature,
    size: usize,
    relations: Vec<Relation>,
    labels: Option<Vec<String>>,
}

impl FiniteStructure {
    /// Builds a structure, checking that every relation matches its symbol's
    /// arity and that every tuple entry lies in the domain.
    pub fn new(signature: Signature, size: usize, relations: Vec<Relation>) -> Result<Self> {
        if relations.len() != signature.len() {
            return Err(Error::InvalidStructure(format!(
                "signature has {} symbols but {} relations were given",
                signature.len(),
                relations.len()
            )));
        }
        for (sym, rel) in signature.symbols().iter().zip(&relations) {
            if rel.arity != sym.arity {
                return Err(Error::ArityMismatch {
                    symbol: sym.name.clone(),
                    expected: sym.arity,
                    found: rel.arity,
                });
            }
            for t in &rel.tuples {
                if t.len() != sym.arity {
                    return Err(Error::ArityMismatch {
                        symbol: sym.name.clone(),
                        expected: sym.arity,
                        found: t.len(),
                    });
                }
                if let Some(&bad) = t.iter().find(|&&v| v >= size) {
                    return Err(Error::InvalidStructure(format!(
                        "tuple {t:?} of `{}` mentions element {bad} outside domain of size {size}",
                        sym.name
                    )));
                }
            }
        }
        Ok(FiniteStructure {
            signature,
            size,
            relations,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.size {
            return Err(Error::InvalidStructure(format!(
                "{} labels given for a domain of size {}",
                labels.len(),
                self.size
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Convenience constructor for a structure with a single relation.
    pub fn single(name: &str, arity: usize, size: usize, tuples: &[&[usize]]) -> Result<Self> {
        let sig = Signature::new([(name, arity)])?;
        let rel = Relation::new(arity, tuples.iter().map(|t| t.to_vec()));
        FiniteStructure::new(sig, size, vec![rel])
    }

    /// The complete loopless digraph on `k` vertices, relation `E`.
    pub fn clique(k: usize) -> Self {
        let tuples = (0..k)
            .flat_map(|a| (0..k).filter(move |&b| b != a).map(move |b| vec![a, b]))
            .collect::<Vec<_>>();
        let sig = Signature::new([("E", 2)]).expect("static signature");
        FiniteStructure::new(sig, k, vec![Relation::new(2, tuples)]).expect("valid clique")
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.signature.index_of(name).map(|i| &self.relations[i])
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, element: usize) -> String {
        match &self.labels {
            Some(l) => l[element].clone(),
            None => element.to_string(),
        }
    }

    /// Renames elements by `perm` (element `a` becomes `perm[a]`).
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.size {
            return Err(Error::DomainMismatch(format!(
                "permutation of length {} for a domain of size {}",
                perm.len(),
                self.size
            )));
        }
        let relations = self
            .relations
            .iter()
            .map(|r| {
                Relation::new(
                    r.arity,
                    r.tuples
                        .iter()
                        .map(|t| t.iter().map(|&v| perm[v]).collect()),
                )
            })
            .collect();
        FiniteStructure::new(self.signature.clone(), self.size, relations)
    }

    /// The substructure induced on `elements`, renumbered in the given order.
    pub fn induced(&self, elements: &[usize]) -> Result<Self> {
        let mut position = vec![usize::MAX; self.size];
        for (i, &e) in elements.iter().enumerate() {
            if e >= self.size {
                return Err(Error::DomainMismatch(format!("element {e} out of range")));
            }
            position[e] = i;
        }
        let relations = self
            .relations
            .iter()
            .map(|r| {
                Relation::new(
                    r.arity,
                    r.tuples.iter().filter_map(|t| {
                        t.iter()
                            .map(|&v| (position[v] != usize::MAX).then_some(position[v]))
                            .collect::<Option<Vec<_>>>()
                    }),
                )
            })
            .collect();
        FiniteStructure::new(self.signature.clone(), elements.len(), relations)
    }

    /// Views the structure as a CSP instance whose variables are the elements.
    pub fn to_instance(&self) -> Instance {
        let names: Vec<String> = (0..self.size).map(|e| format!("v{e}")).collect();
        let constraints = self
            .signature
            .symbols()
            .iter()
            .zip(&self.relations)
            .flat_map(|(sym, rel)| {
                let names = &names;
                rel.tuples.iter().map(move |t| Constraint {
                    rel: sym.name.clone(),
                    args: t.iter().map(|&v| names[v].clone()).collect(),
                })
            })
            .collect();
        Instance {
            variables: names,
            constraints,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: StructureFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&StructureFile::from(self)).expect("structure serializes")
    }
}

impl fmt::Display for FiniteStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "structure of size {}", self.size)?;
        for (sym, rel) in self.signature.symbols().iter().zip(&self.relations) {
            write!(f, "; {}/{}: {} tuples", sym.name, sym.arity, rel.len())?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureFile {
    signature: Vec<Symbol>,
    size: usize,
    #[serde(default)]
    relations: IndexMap<String, Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl From<&FiniteStructure> for StructureFile {
    fn from(s: &FiniteStructure) -> Self {
        StructureFile {
            signature: s.signature.symbols.clone(),
            size: s.size,
            relations: s
                .signature
                .symbols()
                .iter()
                .zip(&s.relations)
                .map(|(sym, rel)| (sym.name.clone(), rel.tuples.clone()))
                .collect(),
            labels: s.labels.clone(),
        }
    }
}

impl TryFrom<StructureFile> for FiniteStructure {
    type Error = Error;

    fn try_from(mut file: StructureFile) -> Result<Self> {
        let signature = Signature::new(file.signature.iter().map(|s| (s.name.clone(), s.arity)))?;
        if let Some(extra) = file
            .relations
            .keys()
            .find(|name| signature.index_of(name).is_none())
        {
            return Err(Error::UnknownSymbol(extra.clone()));
        }
        let relations = signature
            .symbols()
            .iter()
            .map(|sym| {
                let tuples = file.relations.swap_remove(&sym.name).unwrap_or_default();
                Relation::new(sym.arity, tuples)
            })
            .collect();
        let s = FiniteStructure::new(signature, file.size, relations)?;
        match file.labels {
            Some(labels) => s.with_labels(labels),
            None => Ok(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constraint {
    pub rel: String,
    pub args: Vec<String>,
}

/// A CSP instance: named variables and constraints over relation symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub variables: Vec<String>,
    #[serde(default)]
    pub constraints: Vec<Constraint>,
}

impl Instance {
    pub fn new(variables: &[&str], constraints: &[(&str, &[&str])]) -> Self {
        Instance {
            variables: variables.iter().map(|v| v.to_string()).collect(),
            constraints: constraints
                .iter()
                .map(|(rel, args)| Constraint {
                    rel: rel.to_string(),
                    args: args.iter().map(|a| a.to_string()).collect(),
                })
                .collect(),
        }
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    /// Resolves symbol and variable names against `signature`.
    pub fn bind(&self, signature: &Signature) -> Result<BoundInstance> {
        let mut seen = HashSet::new();
        for v in &self.variables {
            if !seen.insert(v.as_str()) {
                return Err(Error::InvalidInstance(format!("duplicate variable `{v}`")));
            }
        }
        let var_index = |name: &str| {
            self.variables
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| Error::UnknownVariable(name.to_string()))
        };
        let constraints = self
            .constraints
            .iter()
            .map(|c| {
                let relation = signature.resolve(&c.rel, c.args.len())?;
                let vars = c
                    .args
                    .iter()
                    .map(|a| var_index(a))
                    .collect::<Result<Vec<_>>>()?;
                Ok(BoundConstraint { relation, vars })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BoundInstance {
            num_vars: self.variables.len(),
            constraints,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundConstraint {
    pub relation: usize,
    pub vars: Vec<usize>,
}

/// An instance with names resolved to indices of a target signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundInstance {
    pub num_vars: usize,
    pub constraints: Vec<BoundConstraint>,
}
