//! Campaign configuration file.
//!
//! ```toml
//! grid = "ieee14"          # bundled case, or a path to a grid TOML file
//! episodes = 10
//! max_steps = 2016
//! seed = 7
//! output = "out/rpa"       # relative to the working directory
//! # chronics_file = "week.csv"  # replay one CSV instead of generating per episode
//!
//! [defender]
//! rho_activate = 0.95
//! rho_safe = 0.80
//!
//! [perturber]
//! kind = "rpa"             # none | rpa | gepa | rlpa
//! # seed = 3               # attacker streams; defaults to the master seed
//! # rlpa_model = "q.json"  # trained attacker; trained on the fly when absent
//! # rlpa_epsilon = 0.0     # exploration while evaluating
//!
//! [rpa]
//! p = 0.2
//! sigma_gen = 0.3
//! sigma_load = 0.3
//! sigma_flow = 0.3
//!
//! [gepa]
//! iterations = 10
//! step_size = 0.02
//! cap = 0.1
//!
//! [rlpa]
//! episodes = 30
//! learning_rate = 0.1
//! epsilon = 0.2
//! discount = 0.95
//!
//! [metrics]
//! window = 50
//! reward_threshold = 0.05
//! cosine_threshold = 0.02
//!
//! [chronics]
//! daily_amplitude = 0.25
//! ```
//!
//! Unknown keys are rejected. Input paths (`grid`, `chronics_file`,
//! `rlpa_model`) are resolved against the directory of the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::defender::DefenderConfig;
use crate::error::{Error, Result};
use crate::grid::ChronicsParams;
use crate::metrics::MetricParams;
use crate::perturb::{AttackerKind, GepaConfig, RlpaConfig, RpaConfig};

/// Episodes in a full-scale campaign.
pub const FULL_EPISODES: usize = 35;
/// Steps per episode in a full-scale campaign (four weeks).
pub const FULL_MAX_STEPS: usize = 8064;
/// Desk-scale defaults: ten one-week episodes.
pub const DESK_EPISODES: usize = 10;
pub const DESK_MAX_STEPS: usize = 2016;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturberConfig {
    pub kind: AttackerKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rlpa_model: Option<PathBuf>,
    pub rlpa_epsilon: f64,
}

impl Default for PerturberConfig {
    fn default() -> Self {
        PerturberConfig { kind: AttackerKind::None, seed: None, rlpa_model: None, rlpa_epsilon: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CampaignConfig {
    pub grid: String,
    pub episodes: usize,
    pub max_steps: usize,
    pub seed: u64,
    /// Not echoed into outputs, so runs written to different directories
    /// stay byte-identical.
    #[serde(skip_serializing)]
    pub output: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chronics_file: Option<PathBuf>,
    pub defender: DefenderConfig,
    pub perturber: PerturberConfig,
    pub rpa: RpaConfig,
    pub gepa: GepaConfig,
    pub rlpa: RlpaConfig,
    pub metrics: MetricParams,
    pub chronics: ChronicsParams,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            grid: "ieee14".into(),
            episodes: DESK_EPISODES,
            max_steps: DESK_MAX_STEPS,
            seed: 0,
            output: PathBuf::from("out"),
            chronics_file: None,
            defender: DefenderConfig::default(),
            perturber: PerturberConfig::default(),
            rpa: RpaConfig::default(),
            gepa: GepaConfig::default(),
            rlpa: RlpaConfig { max_steps: DESK_MAX_STEPS, ..RlpaConfig::default() },
            metrics: MetricParams::default(),
            chronics: ChronicsParams::default(),
        }
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl CampaignConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file and resolves its input paths against the file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if cfg.grid != "ieee14" || base.join("ieee14").exists() {
            cfg.grid = resolve(base, Path::new(&cfg.grid)).display().to_string();
        }
        cfg.chronics_file = cfg.chronics_file.map(|p| resolve(base, &p));
        cfg.perturber.rlpa_model = cfg.perturber.rlpa_model.map(|p| resolve(base, &p));
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(Error::Config("episodes must be >= 1".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be >= 1".into()));
        }
        if self.grid != "ieee14" && !Path::new(&self.grid).exists() {
            return Err(Error::Config(format!("grid file `{}` does not exist", self.grid)));
        }
        for p in [&self.chronics_file, &self.perturber.rlpa_model].into_iter().flatten() {
            if !p.exists() {
                return Err(Error::Config(format!("file `{}` does not exist", p.display())));
            }
        }
        self.defender.validate()?;
        self.metrics.validate()?;
        match self.perturber.kind {
            AttackerKind::None => {}
            AttackerKind::Rpa => self.rpa.validate()?,
            AttackerKind::Gepa => self.gepa.validate()?,
            AttackerKind::Rlpa => {
                self.rlpa.validate()?;
                if !(0.0..=1.0).contains(&self.perturber.rlpa_epsilon) {
                    return Err(Error::Config("perturber.rlpa_epsilon must lie in [0, 1]".into()));
                }
            }
        }
        Ok(())
    }

    /// Seed of the attacker streams: the perturber's own seed if set.
    pub fn attacker_seed(&self) -> u64 {
        self.perturber.seed.unwrap_or(self.seed)
    }
}
