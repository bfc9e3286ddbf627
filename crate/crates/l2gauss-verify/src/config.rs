use std::path::PathBuf;

use l2gauss::numerics::Weights;
use serde::{Deserialize, Serialize};

use crate::VerifyError;

/// The named suites, in the order a full run executes them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Measure,
    Cutoff,
    Surface,
    Dbar,
    Ck,
    Sobolev,
    Determinism,
}

impl Suite {
    pub const ALL: [Suite; 7] =
        [Suite::Measure, Suite::Cutoff, Suite::Surface, Suite::Dbar, Suite::Ck, Suite::Sobolev, Suite::Determinism];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Measure => "measure",
            Suite::Cutoff => "cutoff",
            Suite::Surface => "surface",
            Suite::Dbar => "dbar",
            Suite::Ck => "ck",
            Suite::Sobolev => "sobolev",
            Suite::Determinism => "determinism",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleSizes {
    pub fernique: usize,
    pub cutoff_bank: usize,
    pub gauss_green: usize,
}

impl Default for SampleSizes {
    fn default() -> Self {
        SampleSizes { fernique: 1_000_000, cutoff_bank: 100_000, gauss_green: 50_000 }
    }
}

/// A reproducible run. Missing JSON fields take the defaults, which are the
/// acceptance settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub weights: Weights,
    /// Truncation dimension for Monte Carlo checks.
    pub dims: usize,
    pub samples: SampleSizes,
    pub seed: u64,
    /// Suite names or `all`. Empty runs nothing.
    pub suites: Vec<String>,
    pub output: Option<PathBuf>,
}

pub const DEFAULT_SEED: u64 = 20_240_101;
pub const SEED_ENV: &str = "L2GAUSS_SEED";

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            weights: Weights::default(),
            dims: 8,
            samples: SampleSizes::default(),
            seed: DEFAULT_SEED,
            suites: Vec::new(),
            output: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, VerifyError> {
        serde_json::from_str(text).map_err(|e| VerifyError::Config(e.to_string()))
    }

    pub fn with_suites<S: Into<String>>(mut self, suites: impl IntoIterator<Item = S>) -> Self {
        self.suites = suites.into_iter().map(Into::into).collect();
        self
    }

    /// Applies the seed override from the environment, if set.
    pub fn with_env_seed(mut self) -> Result<Self, VerifyError> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v.trim().parse().map_err(|_| VerifyError::Config(format!("{SEED_ENV} must be an unsigned integer, got {v:?}")))?;
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), VerifyError> {
        if self.dims < 2 {
            return Err(VerifyError::Config("dims must be at least 2".into()));
        }
        let s = &self.samples;
        if s.fernique == 0 || s.cutoff_bank == 0 || s.gauss_green == 0 {
            return Err(VerifyError::Config("sample sizes must be positive".into()));
        }
        self.selected().map(|_| ())
    }

    /// The selected suites in execution order, without repeats.
    pub fn selected(&self) -> Result<Vec<Suite>, VerifyError> {
        let mut out = Vec::new();
        for name in &self.suites {
            if name == "all" {
                out.extend(Suite::ALL);
            } else {
                out.push(Suite::parse(name).ok_or_else(|| VerifyError::Config(format!("unknown suite {name:?}")))?);
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}
