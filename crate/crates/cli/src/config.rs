//! Run configuration: an optional TOML file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use matryoshka_core::chain::{ChainConfig, PatternName};
use matryoshka_core::matryoshka::InitialState;
use matryoshka_core::propagator::t_star;
use matryoshka_core::ChainSpec;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// File layout:
///
/// ```toml
/// [chain]
/// n_sites = 7
/// lambda = 1.0
/// pattern = "matryoshka"
/// b_fields = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
///
/// [options]
/// t_star = 0.7853981633974483
/// rounds = 4
/// grid_points = 21
/// b3_ratios = [0.0, 0.05, 0.1]
/// initial = "all0"
/// bits = "0000000"
/// force = false
/// out = "results"
/// ```
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub chain: Option<ChainConfig>,
    #[serde(default)]
    pub options: FileOptions,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileOptions {
    pub t_star: Option<f64>,
    pub rounds: Option<usize>,
    pub grid_points: Option<usize>,
    pub b3_ratios: Option<Vec<f64>>,
    pub initial: Option<InitialArg>,
    pub bits: Option<String>,
    pub force: Option<bool>,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum InitialArg {
    All0,
    All1,
}

impl From<InitialArg> for InitialState {
    fn from(a: InitialArg) -> Self {
        match a {
            InitialArg::All0 => InitialState::All0,
            InitialArg::All1 => InitialState::All1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum PatternArg {
    PerfectTransfer,
    Matryoshka,
    Custom,
}

impl From<PatternArg> for PatternName {
    fn from(p: PatternArg) -> Self {
        match p {
            PatternArg::PerfectTransfer => PatternName::PerfectTransfer,
            PatternArg::Matryoshka => PatternName::Matryoshka,
            PatternArg::Custom => PatternName::Custom,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Generate,
    Verify,
    FluxCheck,
    Conveyor,
    Ghz,
    Sweep,
    PaperPoint,
}

/// Flag values; `None` means "not given on the command line".
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub n_sites: Option<usize>,
    pub lambda: Option<f64>,
    pub pattern: Option<PatternArg>,
    pub b_fields: Option<Vec<f64>>,
    pub t_star: Option<f64>,
    pub out: Option<PathBuf>,
    pub rounds: Option<usize>,
    pub grid_points: Option<usize>,
    pub b3_ratios: Option<Vec<f64>>,
    pub initial: Option<InitialArg>,
    pub bits: Option<String>,
    pub force: bool,
}

pub const DEFAULT_N_SITES: usize = 3;
pub const DEFAULT_ROUNDS: usize = 4;

/// Everything a command needs, fully resolved. This is what output files embed,
/// so it carries no paths.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: CommandName,
    pub chain: ChainConfig,
    pub t_star: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b3_ratios: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bits: Option<Vec<u8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub force: Option<bool>,
    /// Output directory, if one was given.
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub spec: ChainSpec,
}

impl RunConfig {
    pub fn header_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

pub fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn parse_bits(s: &str, n: usize) -> Result<Vec<u8>, CliError> {
    let bits: Vec<u8> = s
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(CliError::Usage(format!("bit string contains {other:?}"))),
        })
        .collect::<Result<_, _>>()?;
    if bits.len() != n {
        return Err(CliError::Usage(format!(
            "bit string has {} sites but the chain has {n}",
            bits.len()
        )));
    }
    Ok(bits)
}

pub fn resolve(command: CommandName, file: FileConfig, flags: Overrides) -> Result<RunConfig, CliError> {
    let mut chain = file.chain.unwrap_or(ChainConfig {
        n_sites: DEFAULT_N_SITES,
        lambda: 1.0,
        pattern: PatternName::Matryoshka,
        b_fields: None,
        j_x: None,
        j_y: None,
    });
    if let Some(n) = flags.n_sites {
        chain.n_sites = n;
    }
    if let Some(l) = flags.lambda {
        chain.lambda = l;
    }
    if let Some(p) = flags.pattern {
        chain.pattern = p.into();
    }
    if let Some(b) = flags.b_fields {
        chain.b_fields = Some(b);
    }
    if chain.b_fields.is_none() {
        chain.b_fields = Some(vec![0.0; chain.n_sites]);
    }
    let spec = ChainSpec::try_from(chain.clone())?;

    let opts = file.options;
    let t = flags.t_star.or(opts.t_star).unwrap_or_else(|| t_star(spec.lambda));
    if !(t.is_finite() && t > 0.0) {
        return Err(CliError::Usage(format!("t_star must be positive and finite, got {t}")));
    }
    let out = flags.out.or(opts.out);
    let mut cfg = RunConfig {
        command,
        chain,
        t_star: t,
        rounds: None,
        grid_points: None,
        b3_ratios: None,
        initial: None,
        bits: None,
        force: None,
        out,
        spec,
    };
    match command {
        CommandName::Generate => {
            cfg.initial = Some(flags.initial.or(opts.initial).unwrap_or(InitialArg::All0));
        }
        CommandName::Verify => {
            let n = cfg.spec.n_sites;
            cfg.bits = Some(match flags.bits.or(opts.bits) {
                Some(s) => parse_bits(&s, n)?,
                None => vec![0; n],
            });
        }
        CommandName::Conveyor => {
            cfg.rounds = Some(flags.rounds.or(opts.rounds).unwrap_or(DEFAULT_ROUNDS));
            cfg.force = Some(flags.force || opts.force.unwrap_or(false));
        }
        CommandName::Sweep => {
            let grid = flags
                .grid_points
                .or(opts.grid_points)
                .unwrap_or(matryoshka_core::analysis::DEFAULT_GRID_POINTS);
            if grid < 2 {
                return Err(CliError::Usage(format!("grid needs at least 2 points, got {grid}")));
            }
            let b3 = flags
                .b3_ratios
                .or(opts.b3_ratios)
                .unwrap_or_else(|| matryoshka_core::analysis::DEFAULT_B3_RATIOS.to_vec());
            if b3.is_empty() {
                return Err(CliError::Usage("at least one B3 ratio is required".into()));
            }
            cfg.grid_points = Some(grid);
            cfg.b3_ratios = Some(b3);
        }
        CommandName::FluxCheck | CommandName::Ghz | CommandName::PaperPoint => {}
    }
    Ok(cfg)
}
