//! Experiment configuration: TOML file plus command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use madc_core::Model;
use serde::Deserialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Construct,
    Verify,
    Simulate,
    Audit,
    Sweep,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Construct => "construct",
            Mode::Verify => "verify",
            Mode::Simulate => "simulate",
            Mode::Audit => "audit",
            Mode::Sweep => "sweep",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// What a sweep does at each parameter point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SweepTask {
    /// Seeded protocol rounds with load and decode checks.
    #[default]
    Simulate,
    /// Build and verify the PDA.
    Construct,
}

pub fn parse_model(s: &str) -> Result<Model, String> {
    match s.to_ascii_lowercase().as_str() {
        "connect" => Ok(Model::Connect),
        "cyclic" => Ok(Model::Cyclic),
        _ => Err(format!("unknown model `{s}` (expected connect or cyclic)")),
    }
}

/// Parses `"4"`, `"2-5"`, `"2,3,7"` or mixes like `"1-3,6"` into a sorted,
/// deduplicated, nonempty list.
pub fn parse_range(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        if part.is_empty() {
            bail!("empty element in range `{s}`");
        }
        match part.split_once('-') {
            Some((lo, hi)) => {
                let lo: usize = lo
                    .trim()
                    .parse()
                    .with_context(|| format!("bad range `{s}`"))?;
                let hi: usize = hi
                    .trim()
                    .parse()
                    .with_context(|| format!("bad range `{s}`"))?;
                if lo > hi {
                    bail!("empty range `{part}`");
                }
                out.extend(lo..=hi);
            }
            None => out.push(part.parse().with_context(|| format!("bad range `{s}`"))?),
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum RangeValue {
    One(usize),
    Many(Vec<usize>),
    Text(String),
}

impl RangeValue {
    fn resolve(&self, name: &str) -> Result<Vec<usize>> {
        let mut v = match self {
            RangeValue::One(x) => vec![*x],
            RangeValue::Many(xs) => xs.clone(),
            RangeValue::Text(s) => parse_range(s)?,
        };
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            bail!("range `{name}` is empty");
        }
        Ok(v)
    }
}

/// On-disk form; every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    mode: Option<Mode>,
    model: Option<Model>,
    k: Option<RangeValue>,
    f: Option<RangeValue>,
    q: Option<RangeValue>,
    alpha: Option<RangeValue>,
    eta: Option<usize>,
    beta: Option<usize>,
    trials: Option<u64>,
    seed: Option<u64>,
    input: Option<PathBuf>,
    output: Option<PathBuf>,
    format: Option<Format>,
    task: Option<SweepTask>,
}

/// Flags shared by every subcommand. Flags win over the config file.
#[derive(clap::Args, Clone, Debug, Default)]
pub struct Args {
    /// PDA text file (verify only).
    pub input: Option<PathBuf>,
    /// TOML config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_model)]
    pub model: Option<Model>,
    /// Number of reducers; a range such as 2-5 in sweeps.
    #[arg(long)]
    pub k: Option<String>,
    /// Mappers per block, connect model.
    #[arg(long)]
    pub f: Option<String>,
    /// Mappers per block (and functions), cyclic model; functions in audit.
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    /// Files per batch.
    #[arg(long)]
    pub eta: Option<usize>,
    /// Bits per intermediate value.
    #[arg(long)]
    pub beta: Option<usize>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; defaults to $MADC_OUT_DIR/<mode>.<ext>, else stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, value_enum)]
    pub task: Option<SweepTask>,
}

/// Fully resolved configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub model: Option<Model>,
    pub k: Option<Vec<usize>>,
    pub f: Option<Vec<usize>>,
    pub q: Option<Vec<usize>>,
    pub alpha: Option<Vec<usize>>,
    pub eta: usize,
    pub beta: Option<usize>,
    pub trials: Option<u64>,
    /// Defaults to 0, so every randomized mode has a seed.
    pub seed: u64,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub task: SweepTask,
}

fn flag_range(flag: &Option<String>, name: &str) -> Result<Option<Vec<usize>>> {
    flag.as_deref()
        .map(|s| parse_range(s).with_context(|| format!("--{name}")))
        .transpose()
}

fn file_range(v: &Option<RangeValue>, name: &str) -> Result<Option<Vec<usize>>> {
    v.as_ref().map(|r| r.resolve(name)).transpose()
}

fn load_file(path: &Path) -> Result<FileConfig> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

impl ExperimentConfig {
    /// Merges the config file (if any) with flags. `mode` comes from the
    /// subcommand, or from the file for `run`.
    pub fn resolve(mode: Option<Mode>, args: &Args) -> Result<Self> {
        let file = match &args.config {
            Some(p) => load_file(p)?,
            None => FileConfig::default(),
        };
        let mode = mode
            .or(file.mode)
            .ok_or_else(|| anyhow!("no mode given: set `mode` in the config file"))?;
        let pick = |flag: Result<Option<Vec<usize>>>, from_file: Result<Option<Vec<usize>>>| {
            Ok::<_, anyhow::Error>(flag?.or(from_file?))
        };
        let cfg = Self {
            mode,
            model: args.model.or(file.model),
            k: pick(flag_range(&args.k, "k"), file_range(&file.k, "k"))?,
            f: pick(flag_range(&args.f, "f"), file_range(&file.f, "f"))?,
            q: pick(flag_range(&args.q, "q"), file_range(&file.q, "q"))?,
            alpha: pick(
                flag_range(&args.alpha, "alpha"),
                file_range(&file.alpha, "alpha"),
            )?,
            eta: args.eta.or(file.eta).unwrap_or(1),
            beta: args.beta.or(file.beta),
            trials: args.trials.or(file.trials),
            seed: args.seed.or(file.seed).unwrap_or(0),
            input: args.input.clone().or(file.input),
            output: args.out.clone().or(file.output),
            format: args.format.or(file.format).unwrap_or_default(),
            task: args.task.or(file.task).unwrap_or_default(),
        };
        if cfg.input.is_some() && cfg.mode != Mode::Verify {
            bail!("an input file is only accepted by verify");
        }
        if cfg.trials == Some(0) {
            bail!("trials >= 1 violated");
        }
        Ok(cfg)
    }

    pub fn model(&self) -> Result<Model> {
        self.model.ok_or_else(|| anyhow!("--model is required"))
    }

    /// Mapper count per block: `--f` for connect, `--q` for cyclic.
    pub fn inner_range(&self, model: Model) -> Result<&[usize]> {
        let (want, other, name, other_name) = match model {
            Model::Connect => (&self.f, &self.q, "f", "q"),
            Model::Cyclic => (&self.q, &self.f, "q", "f"),
        };
        if other.is_some() {
            bail!("--{other_name} does not apply to the {model} model; use --{name}");
        }
        want.as_deref()
            .ok_or_else(|| anyhow!("--{name} is required for the {model} model"))
    }
}

/// The only element of a one-point range.
pub fn single(values: Option<&[usize]>, name: &str) -> Result<Option<usize>> {
    match values {
        None => Ok(None),
        Some([v]) => Ok(Some(*v)),
        Some(_) => bail!("--{name} must be a single value here"),
    }
}

pub fn required(values: Option<&[usize]>, name: &str) -> Result<usize> {
    single(values, name)?.ok_or_else(|| anyhow!("--{name} is required"))
}
