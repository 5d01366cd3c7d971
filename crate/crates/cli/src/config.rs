//! Run configuration: JSON file merged with command-line flags.
//! Precedence is flags, then file, then defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use spinboson::{preset, validate_model, ModelSpec, PresetName, Rational, ReferenceState, Tolerances};

use crate::error::CliError;
use crate::Common;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum AllKeyword {
    All,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum SectorFile {
    All(AllKeyword),
    Reference {
        mu: Rational,
        #[serde(default)]
        n: Vec<u64>,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputFile {
    format: Option<Format>,
    path: Option<PathBuf>,
}

/// On-disk layout. Rationals are strings such as `"3/2"`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    preset: Option<PresetName>,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    model: Option<ModelSpec>,
    j: Option<Rational>,
    sector: Option<SectorFile>,
    max_bosons: Option<u64>,
    tolerances: Option<Tolerances>,
    #[serde(default)]
    output: OutputFile,
    seed: Option<u64>,
    draws: Option<usize>,
    index: Option<usize>,
}

/// Which sectors a command works on.
#[derive(Debug, Clone, PartialEq)]
pub enum Selector {
    All { max_bosons: u64 },
    Reference(ReferenceState),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub preset: Option<PresetName>,
    model: Option<ModelSpec>,
    j: Option<Rational>,
    mu: Option<Rational>,
    n: Option<Vec<u64>>,
    max_bosons: u64,
    pub tol: Tolerances,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub draws: Option<usize>,
    pub index: usize,
}

fn read_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

fn parse_param(raw: &str) -> Result<(String, f64), CliError> {
    let (k, v) = raw
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--param expects key=value, got `{raw}`")))?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("--param {k}: `{v}` is not a number")))?;
    Ok((k.trim().to_string(), v))
}

fn parse_list(raw: &str) -> Result<Vec<u64>, CliError> {
    raw.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("--n: `{t}` is not a non-negative integer")))
        })
        .collect()
}

impl RunConfig {
    pub fn resolve(flags: &Common) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => read_file(path)?,
            None => FileConfig::default(),
        };

        let preset_name = flags.preset.or(file.preset);
        let mut params = BTreeMap::new();
        if let Some(name) = preset_name {
            params = name.default_params();
        }
        params.extend(file.params.clone());
        for raw in &flags.param {
            let (k, v) = parse_param(raw)?;
            params.insert(k, v);
        }

        let model = match (preset_name, file.model) {
            (Some(_), Some(_)) => {
                return Err(CliError::Usage("give either a preset or an inline model, not both".into()))
            }
            (Some(name), None) => {
                if let Some(bad) = params.keys().find(|k| !name.param_names().contains(&k.as_str())) {
                    return Err(CliError::Usage(format!(
                        "preset {name} has no parameter `{bad}` (expected {})",
                        name.param_names().join(", ")
                    )));
                }
                Some(preset(name, &params)?)
            }
            (None, Some(m)) => {
                if !params.is_empty() {
                    return Err(CliError::Usage("parameters need a preset".into()));
                }
                Some(validate_model(m)?)
            }
            (None, None) => None,
        };

        let j = match &flags.j {
            Some(raw) => Some(raw.parse::<Rational>().map_err(|e| CliError::Usage(format!("--j: {e}")))?),
            None => file.j,
        };
        let (mut mu, mut n) = match file.sector {
            Some(SectorFile::Reference { mu, n }) => (Some(mu), Some(n)),
            _ => (None, None),
        };
        if let Some(raw) = &flags.mu {
            mu = Some(raw.parse::<Rational>().map_err(|e| CliError::Usage(format!("--mu: {e}")))?);
        }
        if let Some(raw) = &flags.n {
            n = Some(parse_list(raw)?);
        }
        let default_bosons = preset_name.map(|p| p.default_grid().max_total_bosons).unwrap_or(2);
        let max_bosons = flags.max_bosons.or(file.max_bosons).unwrap_or(default_bosons);

        let mut tol = file.tolerances.unwrap_or_default();
        let overrides = [
            (&mut tol.eigen, flags.tol_eigen),
            (&mut tol.roots, flags.tol_roots),
            (&mut tol.newton, flags.tol_newton),
            (&mut tol.bae, flags.tol_bae),
            (&mut tol.matching, flags.tol_match),
            (&mut tol.algebra, flags.tol_algebra),
        ];
        for (slot, flag) in overrides {
            if let Some(v) = flag {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(CliError::Usage(format!("tolerances must be positive, got {v}")));
                }
                *slot = v;
            }
        }

        Ok(RunConfig {
            preset: preset_name,
            model,
            j,
            mu,
            n,
            max_bosons,
            tol,
            format: flags.format.or(file.output.format).unwrap_or(Format::Text),
            output: flags.output.clone().or(file.output.path),
            seed: flags.seed.or(file.seed),
            draws: flags.draws.or(file.draws),
            index: flags.index.or(file.index).unwrap_or(0),
        })
    }

    pub fn model(&self) -> Result<&ModelSpec, CliError> {
        self.model
            .as_ref()
            .ok_or_else(|| CliError::Usage("no model: give --preset or a config with `preset` or `model`".into()))
    }

    pub fn j(&self) -> Result<Rational, CliError> {
        self.j.ok_or_else(|| CliError::Usage("no spin: give --j or `j` in the config".into()))
    }

    pub fn selector(&self) -> Result<Selector, CliError> {
        match self.mu {
            Some(mu) => {
                let m = self.model()?.m;
                let n_bosons = self.n.clone().unwrap_or_else(|| vec![0; m]);
                Ok(Selector::Reference(ReferenceState { mu, n_bosons }))
            }
            None if self.n.is_some() => Err(CliError::Usage("--n needs --mu".into())),
            None => Ok(Selector::All {
                max_bosons: self.max_bosons,
            }),
        }
    }
}
