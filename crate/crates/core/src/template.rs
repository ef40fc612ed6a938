//! Infinite templates presented over (Q; <).
//!
//! A direct template defines each relation by a formula over its arguments.
//! A `d`-dimensional interpretation represents each element by a `d`-tuple of
//! rationals satisfying the domain formula; the equality formula (over `2d`
//! variables) says when two tuples name the same element, and a relation of
//! arity `m` is a formula over `m * d` variables where argument `a`,
//! coordinate `c` is variable `a * d + c`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{parse_formula, Formula};
use crate::structure::Signature;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TemplateKind {
    Direct,
    Interpretation,
}

/// Declared semi-lattice polymorphism used for witness extraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semilattice {
    Min,
    Max,
}

impl Semilattice {
    pub fn fold(self, values: impl IntoIterator<Item = usize>) -> Option<usize> {
        match self {
            Semilattice::Min => values.into_iter().min(),
            Semilattice::Max => values.into_iter().max(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TemplateRelation {
    pub name: String,
    pub arity: usize,
    pub formula: Formula,
}

impl TemplateRelation {
    pub fn new(name: &str, arity: usize, formula: Formula) -> Self {
        TemplateRelation {
            name: name.to_string(),
            arity,
            formula,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Template {
    pub name: String,
    pub kind: TemplateKind,
    pub dimension: usize,
    pub domain_formula: Formula,
    pub equality_formula: Formula,
    pub relations: Vec<TemplateRelation>,
    pub semilattice: Option<Semilattice>,
}

/// Componentwise equality of two `d`-tuples.
pub fn componentwise_equality(d: usize) -> Formula {
    if d == 1 {
        Formula::eq(0, 1)
    } else {
        Formula::and((0..d).map(|c| Formula::eq(c, d + c)))
    }
}

impl Template {
    pub fn direct(
        name: &str,
        relations: Vec<TemplateRelation>,
        semilattice: Option<Semilattice>,
    ) -> Self {
        Template {
            name: name.to_string(),
            kind: TemplateKind::Direct,
            dimension: 1,
            domain_formula: Formula::True,
            equality_formula: Formula::eq(0, 1),
            relations,
            semilattice,
        }
    }

    pub fn interpretation(
        name: &str,
        dimension: usize,
        domain_formula: Formula,
        equality_formula: Formula,
        relations: Vec<TemplateRelation>,
    ) -> Self {
        Template {
            name: name.to_string(),
            kind: TemplateKind::Interpretation,
            dimension,
            domain_formula,
            equality_formula,
            relations,
            semilattice: None,
        }
    }

    pub fn signature(&self) -> Result<Signature> {
        Signature::new(self.relations.iter().map(|r| (r.name.clone(), r.arity)))
    }

    pub fn relation(&self, name: &str) -> Option<&TemplateRelation> {
        self.relations.iter().find(|r| r.name == name)
    }

    pub fn validate(&self) -> ValidationReport {
        validate_template(self)
    }

    /// Parses and validates a template file.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: TemplateFile = serde_json::from_str(text)?;
        let t = file.into_template()?;
        let report = t.validate();
        if report.is_valid() {
            Ok(t)
        } else {
            Err(Error::InvalidTemplate(report.violations))
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&TemplateFile::from(self)).expect("template serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&TemplateFile::from(self)).expect("template serializes")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_template(t: &Template) -> ValidationReport {
    let mut v = Vec::new();
    let d = t.dimension;
    if t.name.is_empty() {
        v.push("template name is empty".to_string());
    }
    if d == 0 {
        v.push("dimension must be at least 1".to_string());
    }
    if t.kind == TemplateKind::Direct {
        if d != 1 {
            v.push(format!("direct templates have dimension 1, found {d}"));
        }
        if t.domain_formula != Formula::True {
            v.push("direct templates use the domain formula `true`".to_string());
        }
        if t.equality_formula != Formula::eq(0, 1) {
            v.push("direct templates use the equality formula `(eq 0 1)`".to_string());
        }
    }
    if t.kind == TemplateKind::Interpretation && t.semilattice.is_some() {
        v.push(
            "witness extraction (semilattice) is only supported for direct templates".to_string(),
        );
    }
    let domain_vars = t.domain_formula.variable_count();
    if domain_vars > d {
        v.push(format!(
            "domain formula uses index {} but dimension is {d}",
            domain_vars - 1
        ));
    }
    let eq_vars = t.equality_formula.variable_count();
    if eq_vars > 2 * d {
        v.push(format!(
            "equality formula uses index {} but only {} variables exist",
            eq_vars - 1,
            2 * d
        ));
    }
    let mut names = HashSet::new();
    for r in &t.relations {
        if r.name.is_empty() {
            v.push("relation with empty name".to_string());
        }
        if !names.insert(r.name.as_str()) {
            v.push(format!("duplicate relation `{}`", r.name));
        }
        if r.arity == 0 {
            v.push(format!("relation `{}` has arity 0", r.name));
        }
        let used = r.formula.variable_count();
        if used > r.arity * d {
            v.push(format!(
                "relation `{}`: index {} out of range (arity {} x dimension {d} = {} variables)",
                r.name,
                used - 1,
                r.arity,
                r.arity * d
            ));
        }
    }
    ValidationReport { violations: v }
}

pub const PRESET_NAMES: [&str; 5] = ["qlt", "ord3", "gamma1", "gamma2", "gamma3"];

/// Presets whose orbit counts by induced-substructure isomorphism are exact.
pub const HOMOGENEOUS_PRESETS: [&str; 4] = ["qlt", "ord3", "gamma1", "gamma2"];

pub fn preset(name: &str) -> Result<Template> {
    let t = match name {
        "qlt" => Template::direct(
            "qlt",
            vec![TemplateRelation::new("Lt", 2, Formula::lt(0, 1))],
            Some(Semilattice::Min),
        ),
        "ord3" => Template::direct(
            "ord3",
            vec![TemplateRelation::new(
                "T",
                3,
                Formula::or([Formula::gt(0, 1), Formula::gt(0, 2)]),
            )],
            Some(Semilattice::Min),
        ),
        "gamma1" => {
            let cmps = [
                ("lt", Formula::lt as fn(usize, usize) -> Formula),
                ("eq", Formula::eq),
                ("gt", Formula::gt),
            ];
            let relations = cmps
                .iter()
                .flat_map(|(rn, rho)| {
                    cmps.iter().map(move |(sn, sigma)| {
                        TemplateRelation::new(
                            &format!("R_{rn}_{sn}"),
                            2,
                            Formula::and([rho(0, 2), sigma(1, 3)]),
                        )
                    })
                })
                .collect();
            Template::interpretation(
                "gamma1",
                2,
                Formula::True,
                componentwise_equality(2),
                relations,
            )
        }
        "gamma2" => Template::interpretation(
            "gamma2",
            2,
            Formula::True,
            componentwise_equality(2),
            vec![
                TemplateRelation::new("R", 2, Formula::and([Formula::eq(0, 2), Formula::lt(1, 3)])),
                TemplateRelation::new("S", 2, Formula::lt(0, 2)),
            ],
        ),
        "gamma3" => Template::interpretation(
            "gamma3",
            2,
            Formula::ne(0, 1),
            Formula::and([
                Formula::eq(0, 2),
                Formula::or([
                    Formula::and([Formula::lt(0, 1), Formula::lt(2, 3)]),
                    Formula::and([Formula::gt(0, 1), Formula::gt(2, 3)]),
                ]),
            ]),
            vec![
                TemplateRelation::new(
                    "M",
                    2,
                    Formula::and([Formula::eq(0, 2), Formula::lt(0, 1), Formula::gt(2, 3)]),
                ),
                TemplateRelation::new(
                    "Ord",
                    2,
                    Formula::or([
                        Formula::and([Formula::lt(0, 1), Formula::gt(2, 3)]),
                        Formula::and([Formula::lt(0, 1), Formula::lt(2, 3), Formula::lt(0, 2)]),
                        Formula::and([Formula::gt(0, 1), Formula::gt(2, 3), Formula::lt(0, 2)]),
                    ]),
                ),
            ],
        ),
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(t)
}

/// True when `t` is exactly one of the presets known to be homogeneous.
pub fn is_documented_homogeneous(t: &Template) -> bool {
    HOMOGENEOUS_PRESETS
        .iter()
        .any(|name| preset(name).is_ok_and(|p| &p == t))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationFile {
    name: String,
    arity: usize,
    formula: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TemplateFile {
    name: String,
    kind: TemplateKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain_formula: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    equality_formula: Option<String>,
    relations: Vec<RelationFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    semilattice: Option<Semilattice>,
}

impl From<&Template> for TemplateFile {
    fn from(t: &Template) -> Self {
        let interp = t.kind == TemplateKind::Interpretation;
        TemplateFile {
            name: t.name.clone(),
            kind: t.kind,
            dimension: interp.then_some(t.dimension),
            domain_formula: interp.then(|| t.domain_formula.to_string()),
            equality_formula: interp.then(|| t.equality_formula.to_string()),
            relations: t
                .relations
                .iter()
                .map(|r| RelationFile {
                    name: r.name.clone(),
                    arity: r.arity,
                    formula: r.formula.to_string(),
                })
                .collect(),
            semilattice: t.semilattice,
        }
    }
}

impl TemplateFile {
    fn into_template(self) -> Result<Template> {
        let relations = self
            .relations
            .into_iter()
            .map(|r| {
                let formula = parse_formula(&r.formula).map_err(|e| {
                    Error::InvalidTemplate(vec![format!("relation `{}`: {e}", r.name)])
                })?;
                Ok(TemplateRelation {
                    name: r.name,
                    arity: r.arity,
                    formula,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let parse_field =
            |field: &str, text: Option<String>, default: Formula| -> Result<Formula> {
                match text {
                    None => Ok(default),
                    Some(s) => parse_formula(&s)
                        .map_err(|e| Error::InvalidTemplate(vec![format!("{field}: {e}")])),
                }
            };
        let dimension = self.dimension.unwrap_or(1);
        let domain_formula = parse_field("domain_formula", self.domain_formula, Formula::True)?;
        let equality_formula = parse_field(
            "equality_formula",
            self.equality_formula,
            componentwise_equality(dimension.max(1)),
        )?;
        Ok(Template {
            name: self.name,
            kind: self.kind,
            dimension,
            domain_formula,
            equality_formula,
            relations,
            semilattice: self.semilattice,
        })
    }
}
