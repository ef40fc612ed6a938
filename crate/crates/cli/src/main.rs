use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use log::debug;
use serde::Serialize;

use ordcsp::lab::{self, EquivConfig, OrbitConfig};
use ordcsp::polymorphism::{has_ts_polymorphism_budgeted, DEFAULT_TS_BUDGET};
use ordcsp::power::{power_structure_capped, DEFAULT_MAX_SUBSET_BITS};
use ordcsp::template::PRESET_NAMES;
use ordcsp::{FiniteStructure, Instance, SamplerConfig, SolveOptions, Template};

const ACCEPT: u8 = 0;
const REJECT: u8 = 1;
const USAGE: u8 = 2;
const CAP: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ordcsp",
    version,
    about = "Arc-consistency solving for templates over (Q; <)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a built-in template.
    Preset {
        #[arg(long)]
        name: String,
        #[command(flatten)]
        out: Out,
    },
    /// Finite sample of a template on `--size` points.
    Sample {
        #[command(flatten)]
        template: TemplateArg,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the representatives and grid size here.
        #[arg(long)]
        sidecar: Option<PathBuf>,
        #[command(flatten)]
        out: Out,
    },
    /// Decide an instance of a template.
    Solve {
        #[command(flatten)]
        template: TemplateArg,
        #[arg(long)]
        instance: PathBuf,
        /// Attach a semi-lattice witness (direct templates declaring one).
        #[arg(long)]
        witness: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
    /// Arc-consistency of an instance against a finite structure.
    Ac {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        structure: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Homomorphism search from a structure or instance into a structure.
    Hom {
        #[arg(
            long,
            required_unless_present = "instance",
            conflicts_with = "instance"
        )]
        from: Option<PathBuf>,
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long)]
        to: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Set structure P(B).
    Powerset {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_SUBSET_BITS)]
        max_subset_bits: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Search for a totally symmetric polymorphism.
    CheckTs {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        arity: usize,
        #[arg(long, default_value_t = DEFAULT_TS_BUDGET)]
        budget: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Search for a semi-lattice polymorphism.
    CheckSemilattice {
        #[arg(long)]
        structure: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Compare P(B) -> B with totally symmetric polymorphisms.
    CheckEquiv {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TS_BUDGET)]
        budget: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Alternating closed walks: `--name R,S --size N` searches one pair up to
    /// length 2N; `--arity n` checks the walk lemma on all pairs.
    Walk {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long, requires = "size", conflicts_with = "arity")]
        name: Option<String>,
        #[arg(long)]
        size: Option<usize>,
        #[arg(long, required_unless_present = "name")]
        arity: Option<usize>,
        #[command(flatten)]
        out: Out,
    },
    /// Isomorphism types of `--size`-subsets of the sample.
    Orbits {
        #[command(flatten)]
        template: TemplateArg,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = ordcsp::lab::orbits::DEFAULT_SUBSET_BUDGET)]
        budget: u128,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Args)]
struct TemplateArg {
    /// Template file, or the name of a built-in preset.
    #[arg(long = "template")]
    path: String,
}

impl TemplateArg {
    fn load(&self) -> anyhow::Result<Template> {
        let path = Path::new(&self.path);
        if path.exists() {
            let text = read(path)?;
            return Template::from_json(&text)
                .with_context(|| format!("invalid template file `{}`", path.display()));
        }
        if PRESET_NAMES.contains(&self.path.as_str()) {
            debug!("using built-in preset {}", self.path);
            return Ok(ordcsp::preset(&self.path)?);
        }
        bail!(
            "template `{}` is neither a readable file nor a preset ({})",
            self.path,
            PRESET_NAMES.join(", ")
        )
    }
}

#[derive(Args)]
struct Out {
    /// Write JSON here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Out {
    fn emit(&self, json: &str) -> anyhow::Result<()> {
        match &self.out {
            Some(path) => fs::write(path, format!("{json}\n"))
                .with_context(|| format!("cannot write `{}`", path.display())),
            None => {
                println!("{json}");
                Ok(())
            }
        }
    }

    fn emit_value(&self, value: &impl Serialize) -> anyhow::Result<()> {
        self.emit(&serde_json::to_string(value)?)
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read `{}`", path.display()))
}

fn load_structure(path: &Path) -> anyhow::Result<FiniteStructure> {
    FiniteStructure::from_json(&read(path)?)
        .with_context(|| format!("invalid structure file `{}`", path.display()))
}

fn load_instance(path: &Path) -> anyhow::Result<Instance> {
    Instance::from_json(&read(path)?)
        .with_context(|| format!("invalid instance file `{}`", path.display()))
}

fn verdict(positive: bool) -> u8 {
    if positive {
        ACCEPT
    } else {
        REJECT
    }
}

#[derive(Serialize)]
struct AcReport {
    accept: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    domains: Option<indexmap::IndexMap<String, Vec<usize>>>,
}

#[derive(Serialize)]
struct HomReport {
    exists: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    mapping: Option<serde_json::Value>,
}

#[derive(Serialize)]
struct SearchReport<T> {
    found: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    table: Option<T>,
}

#[derive(Serialize)]
struct WalkReport {
    r: String,
    s: String,
    walk: Option<lab::Walk>,
}

fn run(command: Command) -> anyhow::Result<u8> {
    match command {
        Command::Preset { name, out } => {
            let t = ordcsp::preset(&name)?;
            out.emit(&t.to_json())?;
            eprintln!("preset {name}: {} relations", t.relations.len());
            Ok(ACCEPT)
        }
        Command::Sample {
            template,
            size,
            seed,
            sidecar,
            out,
        } => {
            let t = template.load()?;
            let config = SamplerConfig {
                seed,
                ..SamplerConfig::default()
            };
            let sample = ordcsp::sampler::sample_with(&t, size, &config)?;
            out.emit(&sample.structure.to_json())?;
            if let Some(path) = sidecar {
                let json = serde_json::to_string(&sample.sidecar())?;
                fs::write(&path, format!("{json}\n"))
                    .with_context(|| format!("cannot write `{}`", path.display()))?;
            }
            eprintln!("sample of {} at n = {size}: {}", t.name, sample.structure);
            Ok(ACCEPT)
        }
        Command::Solve {
            template,
            instance,
            witness,
            seed,
            out,
        } => {
            let t = template.load()?;
            let a = load_instance(&instance)?;
            let options = SolveOptions {
                witness,
                sampler: SamplerConfig {
                    seed,
                    ..SamplerConfig::default()
                },
            };
            let v = ordcsp::solve_with(&t, &a, &options)?;
            out.emit_value(&v)?;
            eprintln!(
                "{} (sample size {})",
                if v.accept { "accept" } else { "reject" },
                v.sample_size
            );
            Ok(verdict(v.accept))
        }
        Command::Ac {
            instance,
            structure,
            out,
        } => {
            let a = load_instance(&instance)?;
            let b = load_structure(&structure)?;
            let outcome = ordcsp::ac(&a, &b)?;
            let report = AcReport {
                accept: outcome.accept,
                domains: outcome.accept.then(|| outcome.domains.named(&a)),
            };
            out.emit_value(&report)?;
            eprintln!(
                "{}",
                if outcome.accept {
                    "arc-consistent"
                } else {
                    "reject"
                }
            );
            Ok(verdict(outcome.accept))
        }
        Command::Hom {
            from,
            instance,
            to,
            out,
        } => {
            let target = load_structure(&to)?;
            let mapping = match (from, instance) {
                (Some(path), _) => ordcsp::structure_hom(&load_structure(&path)?, &target)?
                    .map(serde_json::to_value)
                    .transpose()?,
                (None, Some(path)) => ordcsp::hom_exists(&load_instance(&path)?, &target)?
                    .map(serde_json::to_value)
                    .transpose()?,
                (None, None) => bail!("hom needs --from or --instance"),
            };
            let exists = mapping.is_some();
            out.emit_value(&HomReport { exists, mapping })?;
            eprintln!(
                "{}",
                if exists {
                    "homomorphism found"
                } else {
                    "no homomorphism"
                }
            );
            Ok(verdict(exists))
        }
        Command::Powerset {
            structure,
            max_subset_bits,
            out,
        } => {
            let b = load_structure(&structure)?;
            let p = power_structure_capped(&b, max_subset_bits)?;
            out.emit(&p.to_json())?;
            eprintln!("P(B): {p}");
            Ok(ACCEPT)
        }
        Command::CheckTs {
            structure,
            arity,
            budget,
            out,
        } => {
            let b = load_structure(&structure)?;
            let table = has_ts_polymorphism_budgeted(&b, arity, budget)?;
            let found = table.is_some();
            out.emit_value(&SearchReport { found, table })?;
            eprintln!(
                "totally symmetric polymorphism of arity {arity}: {}",
                if found { "found" } else { "none" }
            );
            Ok(verdict(found))
        }
        Command::CheckSemilattice { structure, out } => {
            let b = load_structure(&structure)?;
            let table = ordcsp::find_semilattice(&b)?;
            let found = table.is_some();
            out.emit_value(&SearchReport { found, table })?;
            eprintln!(
                "semilattice polymorphism: {}",
                if found { "found" } else { "none" }
            );
            Ok(verdict(found))
        }
        Command::CheckEquiv {
            structure,
            budget,
            out,
        } => {
            let b = load_structure(&structure)?;
            let config = EquivConfig {
                ts_budget: budget,
                ..EquivConfig::default()
            };
            let report = lab::check_set_hom_equiv_with(&b, &config)?;
            out.emit_value(&report)?;
            eprintln!(
                "P(B) -> B: {}, TS at arity {}: {}",
                report.set_hom, report.ts_arity, report.ts_at_km
            );
            Ok(verdict(report.consistent))
        }
        Command::Walk {
            structure,
            name,
            size,
            arity,
            out,
        } => {
            let b = load_structure(&structure)?;
            if let Some(names) = name {
                let (r, s) = names
                    .split_once(',')
                    .ok_or_else(|| anyhow!("--name expects two relations as `R,S`"))?;
                let rel = |n: &str| {
                    let rel = b
                        .relation(n)
                        .ok_or_else(|| anyhow!("structure has no relation `{n}`"))?;
                    if rel.arity() != 2 {
                        bail!("relation `{n}` is not binary");
                    }
                    Ok(rel)
                };
                let half = size.expect("clap requires --size with --name");
                let walk = lab::find_alternating_walk(rel(r)?, rel(s)?, half);
                let found = walk.is_some();
                out.emit_value(&WalkReport {
                    r: r.to_string(),
                    s: s.to_string(),
                    walk,
                })?;
                eprintln!(
                    "alternating closed walk: {}",
                    if found { "found" } else { "none" }
                );
                Ok(verdict(found))
            } else {
                let n = arity.expect("clap requires --arity without --name");
                let report = lab::check_aclwalk_lemma(&b, n)?;
                out.emit_value(&report)?;
                eprintln!(
                    "{} pairs checked, {} violations",
                    report.pairs.len(),
                    report.violations
                );
                Ok(verdict(report.violations == 0))
            }
        }
        Command::Orbits {
            template,
            size,
            budget,
            seed,
            out,
        } => {
            let t = template.load()?;
            let config = OrbitConfig {
                subset_budget: budget,
                sampler: SamplerConfig {
                    seed,
                    ..SamplerConfig::default()
                },
            };
            let report = lab::orbit_count_with(&t, size, &config)?;
            out.emit_value(&report)?;
            eprintln!(
                "{} at n = {size}: {} classes ({:?})",
                t.name, report.class_count, report.exactness
            );
            Ok(ACCEPT)
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let cap = err
        .chain()
        .filter_map(|e| e.downcast_ref::<ordcsp::Error>())
        .any(|e| e.is_cap_exceeded());
    if cap {
        CAP
    } else {
        USAGE
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
