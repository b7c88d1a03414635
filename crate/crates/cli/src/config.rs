//! Per-command configuration documents and global overrides.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use finitegap::bandset::FiniteGapSet;
use finitegap::isotorus::{DirichletData, DistanceOptions};
use finitegap::sumrules::{BaseSpec, ExperimentConfig, Job, PerturbationSpec, Shape};

use crate::CliError;

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub nodes: Option<usize>,
}

impl Overrides {
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::BadInput(format!("--tol must be positive, got {t}")));
            }
        }
        if self.nodes == Some(0) {
            return Err(CliError::BadInput("--nodes must be positive".into()));
        }
        Ok(())
    }

    pub fn reseed(&self, spec: &mut PerturbationSpec) {
        if let (Some(seed), Shape::Random { seed: s, .. }) = (self.seed, &mut spec.shape) {
            *s = seed;
        }
    }
}

/// Raw configuration text, parsed once as a generic value for hashing.
pub struct RawConfig {
    pub value: Value,
}

impl RawConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::BadInput(format!("cannot read config {}: {e}", path.display())))?;
        let value = serde_json::from_str(&text)
            .map_err(|e| CliError::BadInput(format!("malformed JSON in {}: {e}", path.display())))?;
        Ok(Self { value })
    }

    pub fn parse<T: DeserializeOwned>(&self) -> Result<T, CliError> {
        serde_json::from_value(self.value.clone()).map_err(|e| CliError::BadInput(format!("invalid config: {e}")))
    }
}

/// SHA-256 of the command, the config and the overrides in canonical form
/// (object keys sorted).
pub fn config_hash(command: &str, config: &Value, o: &Overrides) -> String {
    let doc = json!({
        "command": command,
        "config": config,
        "overrides": { "seed": o.seed, "tol": o.tol, "nodes": o.nodes },
    });
    hex::encode(Sha256::digest(serde_json::to_vec(&doc).expect("JSON values always serialise")))
}

/// Reads a JSON output of an earlier run; absent files are a missing
/// dependency, unreadable ones bad input.
pub fn upstream(path: &Path) -> Result<Value, CliError> {
    if !path.exists() {
        return Err(CliError::Missing(format!("upstream file {} does not exist", path.display())));
    }
    let text =
        fs::read_to_string(path).map_err(|e| CliError::BadInput(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::BadInput(format!("malformed JSON in {}: {e}", path.display())))
}

fn field<T: DeserializeOwned>(doc: &Value, key: &str, path: &Path) -> Result<T, CliError> {
    let v = doc.get(key).ok_or_else(|| CliError::BadInput(format!("{} has no `{key}` field", path.display())))?;
    serde_json::from_value(v.clone()).map_err(|e| CliError::BadInput(format!("`{key}` in {}: {e}", path.display())))
}

/// Band set given inline or taken from the `bands` field of an earlier
/// output.
pub fn resolve_set(
    bands: &Option<FiniteGapSet>,
    set_file: &Option<PathBuf>,
    default: Option<FiniteGapSet>,
) -> Result<FiniteGapSet, CliError> {
    match (bands, set_file) {
        (Some(_), Some(_)) => Err(CliError::BadInput("give either `bands` or `set_file`, not both".into())),
        (Some(e), None) => Ok(e.clone()),
        (None, Some(p)) => field(&upstream(p)?, "bands", p),
        (None, None) => default.ok_or_else(|| CliError::BadInput("missing `bands`".into())),
    }
}

fn positive(n: usize, what: &str) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::BadInput(format!("`{what}` must be positive")));
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EqmConfig {
    pub bands: FiniteGapSet,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

fn default_grid_points() -> usize {
    401
}

impl EqmConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.grid_points < 2 {
            return Err(CliError::BadInput("`grid_points` must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusConfig {
    #[serde(default)]
    pub bands: Option<FiniteGapSet>,
    #[serde(default)]
    pub set_file: Option<PathBuf>,
    #[serde(default)]
    pub dirichlet: Option<DirichletData>,
    /// Alternative to `dirichlet`: one circle angle per gap.
    #[serde(default)]
    pub angles: Option<Vec<f64>>,
    pub n: usize,
}

impl TorusConfig {
    pub fn resolve(&self) -> Result<(FiniteGapSet, DirichletData), CliError> {
        positive(self.n, "n")?;
        let e = resolve_set(&self.bands, &self.set_file, None)?;
        let dd = match (&self.dirichlet, &self.angles) {
            (Some(dd), None) => DirichletData::new(&e, dd.points().to_vec())?,
            (None, Some(a)) => DirichletData::from_angles(&e, a)?,
            (None, None) if e.gap_count() == 0 => DirichletData::empty(),
            _ => return Err(CliError::BadInput("give exactly one of `dirichlet` or `angles`".into())),
        };
        Ok((e, dd))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbConfig {
    #[serde(default)]
    pub bands: Option<FiniteGapSet>,
    #[serde(default)]
    pub set_file: Option<PathBuf>,
    #[serde(default = "free_base")]
    pub base: BaseSpec,
    pub perturbation: PerturbationSpec,
    pub size: usize,
}

fn free_base() -> BaseSpec {
    BaseSpec::Free
}

pub fn free_set() -> FiniteGapSet {
    FiniteGapSet::new(&[-2.0, 2.0]).expect("[-2, 2] is a valid set")
}

impl PerturbConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        positive(self.size, "size")?;
        self.perturbation.validate()?;
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OprlConfig {
    #[serde(default)]
    pub bands: Option<FiniteGapSet>,
    #[serde(default)]
    pub set_file: Option<PathBuf>,
    #[serde(default = "free_base")]
    pub base: BaseSpec,
    #[serde(default)]
    pub perturbation: Option<PerturbationSpec>,
    pub n: usize,
    pub points: Vec<[f64; 2]>,
}

impl OprlConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        positive(self.n, "n")?;
        positive(self.points.len(), "points")?;
        if let Some(p) = &self.perturbation {
            p.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(usize),
    Many(Vec<usize>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<usize> {
        match self {
            OneOrMany::One(m) => vec![*m],
            OneOrMany::Many(ms) => ms.clone(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceConfig {
    #[serde(default)]
    pub bands: Option<FiniteGapSet>,
    #[serde(default)]
    pub set_file: Option<PathBuf>,
    #[serde(default)]
    pub base: Option<BaseSpec>,
    /// Earlier `torus` output supplying both the set and the torus point.
    #[serde(default)]
    pub torus_file: Option<PathBuf>,
    #[serde(default)]
    pub perturbation: Option<PerturbationSpec>,
    pub m: OneOrMany,
    #[serde(default)]
    pub grid: DistanceOptions,
}

impl DistanceConfig {
    pub fn resolve(&self) -> Result<(FiniteGapSet, BaseSpec, Vec<usize>), CliError> {
        let ms = self.m.values();
        if ms.is_empty() || ms.contains(&0) {
            return Err(CliError::BadInput("`m` must list positive indices".into()));
        }
        if let Some(p) = &self.perturbation {
            p.validate()?;
        }
        let (e, base) = match (&self.torus_file, &self.base) {
            (Some(_), Some(_)) => {
                return Err(CliError::BadInput("give either `base` or `torus_file`, not both".into()))
            }
            (Some(path), None) => {
                if self.bands.is_some() || self.set_file.is_some() {
                    return Err(CliError::BadInput("`torus_file` already fixes the set".into()));
                }
                let doc = upstream(path)?;
                let e: FiniteGapSet = field(&doc, "bands", path)?;
                let dd: DirichletData = field(&doc, "dirichlet", path)?;
                dd.validate(&e)?;
                (e, BaseSpec::Torus { dirichlet: dd })
            }
            (None, Some(b)) => (resolve_set(&self.bands, &self.set_file, None)?, b.clone()),
            (None, None) => return Err(CliError::BadInput("missing `base` or `torus_file`".into())),
        };
        Ok((e, base, ms))
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum SumruleConfig {
    Many { experiments: Vec<ExperimentConfig> },
    One(ExperimentConfig),
}

impl SumruleConfig {
    pub fn into_list(self, o: &Overrides) -> Result<Vec<ExperimentConfig>, CliError> {
        let mut list = match self {
            SumruleConfig::Many { experiments } => experiments,
            SumruleConfig::One(c) => vec![c],
        };
        positive(list.len(), "experiments")?;
        let mut names: Vec<String> = list.iter().map(|c| crate::output::slug(&c.name)).collect();
        names.sort();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(CliError::BadInput("experiment names must be distinct".into()));
        }
        for c in &mut list {
            if let Some(seed) = o.seed {
                c.reseed(seed);
            }
            if let Some(t) = o.tol {
                match &mut c.job {
                    Job::SzegoRatio { tol, .. } | Job::SumRule { tol, .. } | Job::Oscillatory { tol, .. } => *tol = t,
                    _ => {}
                }
            }
        }
        Ok(list)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    /// Files to aggregate; every JSON output in the output directory when
    /// absent.
    #[serde(default)]
    pub inputs: Option<Vec<PathBuf>>,
}
