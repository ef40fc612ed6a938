//! Deciding instances of an infinite template: sample at the instance size,
//! then run arc-consistency against the sample.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::ac::{ac_bound, DomainMap};
use crate::error::{Error, Result};
use crate::sampler::{sample_with, SamplerConfig};
use crate::structure::Instance;
use crate::template::{Template, TemplateKind};
use crate::{Scalar, Witness};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub accept: bool,
    pub sample_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domains: Option<IndexMap<String, Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Attach a semi-lattice witness when the template declares one.
    pub witness: bool,
    pub sampler: SamplerConfig,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            witness: true,
            sampler: SamplerConfig::default(),
        }
    }
}

pub fn solve(t: &Template, instance: &Instance) -> Result<Verdict> {
    solve_with(t, instance, &SolveOptions::default())
}

pub fn solve_with(t: &Template, instance: &Instance, options: &SolveOptions) -> Result<Verdict> {
    let report = t.validate();
    if !report.is_valid() {
        return Err(Error::InvalidTemplate(report.violations));
    }
    let signature = t.signature()?;
    let bound = instance.bind(&signature)?;
    let want_witness = options.witness && t.semilattice.is_some() && t.kind == TemplateKind::Direct;

    if instance.num_variables() == 0 {
        return Ok(Verdict {
            accept: true,
            sample_size: 0,
            domains: Some(IndexMap::new()),
            witness: want_witness.then(IndexMap::new),
        });
    }

    let sample = sample_with(t, instance.num_variables(), &options.sampler)?;
    let outcome = ac_bound(&bound, &sample.structure);
    if !outcome.accept {
        return Ok(Verdict {
            accept: false,
            sample_size: sample.size(),
            domains: None,
            witness: None,
        });
    }
    let witness = if want_witness {
        Some(extract_witness(t, instance, &outcome.domains)?)
    } else {
        None
    };
    Ok(Verdict {
        accept: true,
        sample_size: sample.size(),
        domains: Some(outcome.domains.named(instance)),
        witness,
    })
}

/// Folds each accepting domain with the template's declared semi-lattice
/// (min or max of the sample points) and verifies the result.
///
/// The domains must come from arc-consistency against the direct sample, whose
/// element `i` is the rational point `i`.
pub fn extract_witness(t: &Template, instance: &Instance, domains: &DomainMap) -> Result<Witness> {
    if t.kind != TemplateKind::Direct {
        return Err(Error::Precondition(
            "witness extraction needs a direct template".into(),
        ));
    }
    let Some(op) = t.semilattice else {
        return Err(Error::Precondition(format!(
            "template `{}` declares no semilattice",
            t.name
        )));
    };
    if domains.num_vars() != instance.num_variables() {
        return Err(Error::Precondition(
            "domains do not match the instance".into(),
        ));
    }
    let mut witness = Witness::new();
    for (v, name) in instance.variables.iter().enumerate() {
        let value = op
            .fold(domains.set(v).ones())
            .ok_or_else(|| Error::Precondition(format!("domain of `{name}` is empty")))?;
        witness.insert(name.clone(), value as i64);
    }
    if !verify_direct_assignment(t, instance, &witness)? {
        return Err(Error::VerificationFailed(format!(
            "{op:?} is not a polymorphism of `{}`: folded assignment {witness:?} violates a constraint",
            t.name
        )));
    }
    Ok(witness)
}

/// Checks an assignment of one scalar per variable against a direct template.
pub fn verify_direct_assignment<T: Scalar>(
    t: &Template,
    instance: &Instance,
    assignment: &IndexMap<String, T>,
) -> Result<bool> {
    let points: IndexMap<String, Vec<T>> = assignment
        .iter()
        .map(|(k, v)| (k.clone(), vec![v.clone()]))
        .collect();
    verify_assignment(t, instance, &points)
}

/// True iff every point satisfies the domain formula and every constraint's
/// defining formula holds on the concatenated argument points.
pub fn verify_assignment<T: Scalar>(
    t: &Template,
    instance: &Instance,
    assignment: &IndexMap<String, Vec<T>>,
) -> Result<bool> {
    let d = t.dimension;
    for name in &instance.variables {
        let point = assignment
            .get(name)
            .ok_or_else(|| Error::MissingVariable(name.clone()))?;
        if point.len() != d {
            return Err(Error::DomainMismatch(format!(
                "point for `{name}` has {} coordinates, template dimension is {d}",
                point.len()
            )));
        }
        if !t.domain_formula.eval(point)? {
            return Ok(false);
        }
    }
    for c in &instance.constraints {
        let rel = t
            .relation(&c.rel)
            .ok_or_else(|| Error::UnknownSymbol(c.rel.clone()))?;
        if rel.arity != c.args.len() {
            return Err(Error::ArityMismatch {
                symbol: c.rel.clone(),
                expected: rel.arity,
                found: c.args.len(),
            });
        }
        let mut point = Vec::with_capacity(rel.arity * d);
        for arg in &c.args {
            let p = assignment
                .get(arg)
                .ok_or_else(|| Error::MissingVariable(arg.clone()))?;
            point.extend_from_slice(p);
        }
        if !rel.formula.eval(&point)? {
            return Ok(false);
        }
    }
    Ok(true)
}
