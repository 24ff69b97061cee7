//! Run configuration: command-line flags layered over an optional config file.

use crate::error::CliError;
use crate::source::{self, LoadedModel, ModelInput};
use clap::{Args, Subcommand, ValueEnum};
use serde::Deserialize;
use std::path::{Path, PathBuf};

pub const DEFAULT_NLIST: [usize; 5] = [10, 14, 20, 28, 40];
pub const DEFAULT_SEED: u64 = 0x5eed;
const DEFAULT_NMAX: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StudyKind {
    Energy,
    Projector,
    Wavefunction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Hartree minimizer and mean-field operator.
    Hartree,
    /// Quasiparticle energies and the truncated H_0 spectrum.
    Bogoliubov,
    /// Energy, projector and wavefunction coefficients of one level.
    Expand,
    /// Convergence study against exact diagonalization.
    Verify {
        #[arg(value_enum)]
        kind: StudyKind,
    },
    /// First one-body density matrix coefficients.
    Rdm,
    /// Invariant suite on the selected model.
    Selftest,
}

impl Command {
    /// Expansion order the command needs, if any.
    fn order(&self, requested: usize) -> Option<usize> {
        match self {
            Command::Hartree | Command::Bogoliubov => None,
            Command::Expand | Command::Verify { .. } => Some(requested),
            Command::Rdm => Some(1),
            Command::Selftest => Some(2),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Command::Hartree => "hartree".into(),
            Command::Bogoliubov => "bogoliubov".into(),
            Command::Expand => "expand".into(),
            Command::Verify { kind } => format!("verify-{}", kind.to_possible_value().unwrap().get_name()),
            Command::Rdm => "rdm".into(),
            Command::Selftest => "selftest".into(),
        }
    }
}

/// Flags shared by all commands; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// `torus`, `free`, an inline JSON document, or a .json/.toml model file.
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// Excitation cutoff of the truncated Fock space.
    #[arg(long, global = true)]
    pub nmax: Option<usize>,
    /// Bogoliubov level index n.
    #[arg(long, global = true)]
    pub level: Option<usize>,
    /// Expansion order a.
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// Particle numbers for convergence studies.
    #[arg(long = "Nlist", global = true, value_delimiter = ',')]
    pub nlist: Option<Vec<usize>>,
    /// Directory receiving CSV/JSON artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Omit timing data so repeated runs produce identical bytes.
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Seed for the random starts of the Hartree minimization.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML or JSON file with any of the above keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ModelField {
    Source(String),
    Inline(ModelInput),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    model: Option<ModelField>,
    nmax: Option<usize>,
    level: Option<usize>,
    order: Option<usize>,
    #[serde(rename = "Nlist")]
    nlist: Option<Vec<usize>>,
    out: Option<PathBuf>,
    deterministic: Option<bool>,
    seed: Option<u64>,
}

fn read_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|x| x == "toml") {
        toml::from_str(&text).map_err(|e| e.to_string())
    } else {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub model: LoadedModel,
    pub nmax: usize,
    pub level: usize,
    pub order: usize,
    pub nlist: Vec<usize>,
    pub out: Option<PathBuf>,
    pub deterministic: bool,
    pub seed: u64,
}

impl RunConfig {
    pub fn resolve(command: Command, flags: Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => read_file_config(path)?,
            None => FileConfig::default(),
        };
        let model = match (flags.model, file.model) {
            (Some(s), _) | (None, Some(ModelField::Source(s))) => source::load(&s)?,
            (None, Some(ModelField::Inline(input))) => source::from_value(input)?,
            (None, None) => source::load("torus")?,
        };
        let order = flags.order.or(file.order).unwrap_or(1);
        let min_nmax = command.order(order).map_or(2, |a| 2 + 3 * a);
        let config = RunConfig {
            command,
            model,
            nmax: flags.nmax.or(file.nmax).unwrap_or(DEFAULT_NMAX.max(min_nmax)),
            level: flags.level.or(file.level).unwrap_or(0),
            order,
            nlist: flags.nlist.or(file.nlist).unwrap_or_else(|| DEFAULT_NLIST.to_vec()),
            out: flags.out.or(file.out),
            deterministic: flags.deterministic || file.deterministic.unwrap_or(false),
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        if let Some(a) = self.command.order(self.order) {
            let need = 2 + 3 * a;
            if self.nmax < need {
                return Err(CliError::Config(format!(
                    "nmax = {} is too small for order {a}: each H_j changes the excitation number by at most 3, \
                     so the order-{a} terms reach {need} sectors and nmax must be at least 2 + 3a = {need}",
                    self.nmax
                )));
            }
        }
        if matches!(self.command, Command::Verify { .. }) {
            if self.nlist.is_empty() {
                return Err(CliError::Config("Nlist is empty".into()));
            }
            let floor = self.nmax.max(2);
            if let Some(bad) = self.nlist.iter().find(|&&n| n <= floor) {
                return Err(CliError::Config(format!(
                    "Nlist entry {bad} must exceed max(2, nmax) = {floor} so the cutoff space embeds in every N-particle space"
                )));
            }
        }
        Ok(())
    }
}
