//! JSON model files and their conversion to and from library types.
//! Rationals are written as `"p/q"` strings; integers and `"p"` strings are
//! accepted on input.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use gptm_core::evm::Evm;
use gptm_core::experiments::StatExperiment;
use gptm_core::gain::{Ensemble, Functional, PartitionedEnsemble, WStarFamily};
use gptm_core::rational::{format_rational, parse_rational, Vector};
use gptm_core::space::{standard_space, GptSpace, RawSpace, SpaceKind};
use gptm_core::{Rational, StochasticMatrix};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Number {
    Int(i64),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SpaceSpec {
    /// `"classical(n)"`, `"gbit"` or `"polygon(k)"`.
    Named(String),
    Inline(InlineSpace),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineSpace {
    dim: usize,
    order_unit: Vec<Number>,
    cone_generators: Vec<Vec<Number>>,
    #[serde(default)]
    name: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvmFile {
    space: SpaceSpec,
    effects: Map<String, Value>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyJson {
    labels: Vec<String>,
    functionals: Vec<Vec<Number>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyFile {
    #[serde(default)]
    space: Option<SpaceSpec>,
    labels: Vec<String>,
    functionals: Vec<Vec<Number>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartitionedFile {
    space: SpaceSpec,
    parts: Vec<FamilyJson>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentFile {
    params: Vec<String>,
    samples: Vec<String>,
    kernel: Vec<Vec<Number>>,
}

/// Parse failures carry no path; [`Loader`] attaches it.
type Parsed<T> = Result<T, String>;

fn number(n: &Number) -> Parsed<Rational> {
    match n {
        Number::Int(i) => Ok(Rational::from_integer((*i).into())),
        Number::Text(s) => parse_rational(s).ok_or_else(|| format!("not a rational: {s:?}")),
    }
}

fn vector(ns: &[Number]) -> Parsed<Vector> {
    ns.iter().map(number).collect()
}

pub fn parse_space_kind(name: &str) -> Option<SpaceKind> {
    let arg = |prefix: &str| name.strip_prefix(prefix)?.strip_suffix(')')?.trim().parse::<usize>().ok();
    match name.trim() {
        "gbit" => Some(SpaceKind::Gbit),
        _ => arg("classical(").map(SpaceKind::Classical).or_else(|| arg("polygon(").map(SpaceKind::Polygon)),
    }
}

/// Reads model files and interns spaces, so measurements given against the
/// same space description share one validated space.
#[derive(Default)]
pub struct Loader {
    spaces: Vec<(String, Arc<GptSpace>)>,
}

impl Loader {
    pub fn new() -> Self {
        Self::default()
    }

    fn read<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::bad_json(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::bad_json(path, e))
    }

    fn space_from(&mut self, path: &Path, spec: &SpaceSpec) -> Result<Arc<GptSpace>, CliError> {
        let key = match spec {
            SpaceSpec::Named(n) => n.trim().to_string(),
            SpaceSpec::Inline(s) => format!("{s:?}"),
        };
        if let Some((_, s)) = self.spaces.iter().find(|(k, _)| *k == key) {
            return Ok(s.clone());
        }
        let space = match spec {
            SpaceSpec::Named(n) => {
                let kind = parse_space_kind(n).ok_or_else(|| CliError::bad_json(path, format!("unknown space name {n:?}")))?;
                standard_space(kind)?
            }
            SpaceSpec::Inline(s) => {
                let bad = |m| CliError::bad_json(path, m);
                let raw = RawSpace {
                    dim: s.dim,
                    order_unit: vector(&s.order_unit).map_err(bad)?,
                    cone_generators: s.cone_generators.iter().map(|g| vector(g)).collect::<Parsed<_>>().map_err(bad)?,
                    name: s.name.clone(),
                };
                GptSpace::new(raw)?
            }
        };
        let space = Arc::new(space);
        self.spaces.push((key, space.clone()));
        Ok(space)
    }

    pub fn space(&mut self, path: &Path) -> Result<Arc<GptSpace>, CliError> {
        let spec: SpaceSpec = Self::read(path)?;
        self.space_from(path, &spec)
    }

    pub fn evm(&mut self, path: &Path) -> Result<Evm, CliError> {
        let file: EvmFile = Self::read(path)?;
        let space = self.space_from(path, &file.space)?;
        let mut effects = Vec::with_capacity(file.effects.len());
        for (label, v) in file.effects {
            let ns: Vec<Number> = serde_json::from_value(v).map_err(|e| CliError::bad_json(path, format!("effect {label:?}: {e}")))?;
            effects.push((label, vector(&ns).map_err(|e| CliError::bad_json(path, e))?));
        }
        Ok(Evm::new(space, effects)?)
    }

    pub fn evms(&mut self, paths: &[impl AsRef<Path>]) -> Result<Vec<Evm>, CliError> {
        paths.iter().map(|p| self.evm(p.as_ref())).collect()
    }

    /// A w*-family; `space` falls back to `default` when the file has none.
    pub fn family(&mut self, path: &Path, default: Option<&Arc<GptSpace>>) -> Result<(Arc<GptSpace>, WStarFamily), CliError> {
        let file: FamilyFile = Self::read(path)?;
        let space = match (&file.space, default) {
            (Some(spec), _) => self.space_from(path, spec)?,
            (None, Some(s)) => s.clone(),
            (None, None) => return Err(CliError::bad_json(path, "missing \"space\"")),
        };
        let family = family_from(path, &file.labels, &file.functionals)?;
        Ok((space, family))
    }

    pub fn ensemble(&mut self, path: &Path) -> Result<Ensemble, CliError> {
        let (space, family) = self.family(path, None)?;
        Ok(Ensemble::new(space, family)?)
    }

    pub fn partitioned(&mut self, path: &Path) -> Result<PartitionedEnsemble, CliError> {
        let file: PartitionedFile = Self::read(path)?;
        let space = self.space_from(path, &file.space)?;
        let parts = file.parts.iter().map(|p| family_from(path, &p.labels, &p.functionals)).collect::<Result<_, _>>()?;
        Ok(PartitionedEnsemble::new(space, parts)?)
    }

    pub fn experiment(&mut self, path: &Path) -> Result<StatExperiment, CliError> {
        let file: ExperimentFile = Self::read(path)?;
        let kernel = file.kernel.iter().map(|r| vector(r)).collect::<Parsed<_>>().map_err(|e| CliError::bad_json(path, e))?;
        Ok(StatExperiment::new(file.params, file.samples, kernel)?)
    }
}

fn family_from(path: &Path, labels: &[String], functionals: &[Vec<Number>]) -> Result<WStarFamily, CliError> {
    let fs = functionals
        .iter()
        .map(|f| vector(f).map(Functional::new))
        .collect::<Parsed<Vec<_>>>()
        .map_err(|e| CliError::bad_json(path, e))?;
    Ok(WStarFamily::new(labels.to_vec(), fs)?)
}

pub fn rational_json(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

pub fn vector_json(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(rational_json).collect())
}

pub fn functional_json(f: &Functional) -> Value {
    vector_json(f.coords())
}

pub fn space_json(s: &GptSpace) -> Value {
    let mut v = json!({
        "dim": s.dim(),
        "order_unit": vector_json(s.order_unit()),
        "cone_generators": s.generators().iter().map(|g| vector_json(g)).collect::<Vec<_>>(),
    });
    if let Some(name) = s.name() {
        v["name"] = json!(name);
    }
    v
}

pub fn effects_json<'a>(items: impl IntoIterator<Item = (&'a String, &'a Vector)>) -> Value {
    Value::Object(items.into_iter().map(|(l, e)| (l.clone(), vector_json(e))).collect())
}

pub fn evm_json(m: &Evm) -> Value {
    json!({ "space": space_json(m.space()), "effects": effects_json(m.iter()) })
}

pub fn family_json(f: &WStarFamily) -> Value {
    json!({
        "labels": f.labels(),
        "functionals": f.functionals().iter().map(functional_json).collect::<Vec<_>>(),
    })
}

pub fn partitioned_json(pe: &PartitionedEnsemble) -> Value {
    json!({ "parts": pe.parts().iter().map(family_json).collect::<Vec<_>>() })
}

pub fn matrix_json(p: &StochasticMatrix) -> Value {
    json!({
        "rows": p.rows(),
        "cols": p.cols(),
        "p": p.entries().iter().map(|r| vector_json(r)).collect::<Vec<_>>(),
    })
}

pub fn experiment_json(e: &StatExperiment) -> Value {
    json!({
        "params": e.params(),
        "samples": e.samples(),
        "kernel": e.kernel().iter().map(|r| vector_json(r)).collect::<Vec<_>>(),
    })
}
