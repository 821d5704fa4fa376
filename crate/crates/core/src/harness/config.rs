//! Experiment configuration: a flat key-value document plus overrides.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::DEFAULT_SEED;

/// Environment variable consulted for the seed when neither the config file nor
/// a flag sets one.
pub const SEED_ENV: &str = "SANDWICH_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Sample,
    Enumerate,
    Couple,
    Moments,
    Sandwich,
    MicroStudy,
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "sample" => ExperimentKind::Sample,
            "enumerate" => ExperimentKind::Enumerate,
            "couple" => ExperimentKind::Couple,
            "moments" => ExperimentKind::Moments,
            "sandwich" => ExperimentKind::Sandwich,
            "micro-study" => ExperimentKind::MicroStudy,
            other => return Err(Error::Config(format!("unknown experiment kind {other:?}"))),
        })
    }
}

/// Every field is optional in the file; [`ExperimentConfig::validate`] fills
/// defaults and rejects missing required values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentConfig {
    pub kind: Option<ExperimentKind>,
    /// Model name (see `ModelSpec::from_name`) or, for `couple`, the procedure.
    pub model: Option<String>,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub p: Option<f64>,
    pub x: Option<f64>,
    /// Number of doubled pairs for the disjoint-doubles model, or matchings
    /// added in `pairing-plus-matchings`.
    pub i: Option<usize>,
    pub tau: Option<usize>,
    pub fn_bound: Option<f64>,
    /// Second model of a micro study.
    pub model_b: Option<String>,
    pub d_b: Option<usize>,
    pub i_b: Option<usize>,
    /// Comma-separated statistic names.
    pub statistics: Option<String>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    /// Gate half-width in standard errors.
    pub gate_se: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merged(mut self, over: &ExperimentConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if over.$f.is_some() { self.$f = over.$f.clone(); } )* };
        }
        take!(kind, model, n, d, p, x, i, tau, fn_bound, model_b, d_b, i_b, statistics, trials, seed, out, gate_se);
        self
    }

    /// Applies the seed from the environment when none is set, then the
    /// default seed. `env` is the variable's value, if present.
    pub fn with_env_seed(mut self, env: Option<&str>) -> Result<Self> {
        if self.seed.is_none() {
            if let Some(v) = env {
                let s = v.trim();
                let parsed = match s.strip_prefix("0x") {
                    Some(h) => u64::from_str_radix(h, 16),
                    None => s.parse(),
                };
                self.seed = Some(parsed.map_err(|_| Error::Config(format!("{SEED_ENV}={v:?} is not an integer")))?);
            }
        }
        Ok(self)
    }

    /// Checks required fields and fills defaults (`trials = 1`, default seed).
    pub fn validate(mut self) -> Result<Self> {
        let kind = self.kind.ok_or_else(|| Error::Config("missing experiment kind".into()))?;
        if self.n.is_none() {
            return Err(Error::Config("missing n".into()));
        }
        let trials = self.trials.unwrap_or(1);
        if trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        self.trials = Some(trials);
        self.seed = Some(self.seed.unwrap_or(DEFAULT_SEED));
        let d_optional = matches!(self.model.as_deref(), Some("gnp") | Some("matchings"));
        if self.d.is_none() && !d_optional {
            return Err(Error::Config("missing d".into()));
        }
        if kind == ExperimentKind::MicroStudy && self.model_b.is_none() {
            return Err(Error::Config("micro-study needs model-b".into()));
        }
        if let Some(s) = self.gate_se {
            if !(s > 0.0) {
                return Err(Error::Config("gate-se must be positive".into()));
            }
        }
        Ok(self)
    }

    pub fn kind(&self) -> ExperimentKind {
        self.kind.expect("validated config")
    }

    pub fn trials(&self) -> u64 {
        self.trials.unwrap_or(1)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let file = ExperimentConfig::from_toml("kind = \"sample\"\nmodel = \"pairing\"\nn = 4\nd = 2\nseed = 7\n").unwrap();
        let flags = ExperimentConfig { seed: Some(9), ..Default::default() };
        let c = file.clone().merged(&flags).with_env_seed(Some("11")).unwrap().validate().unwrap();
        assert_eq!(c.seed(), 9);
        let c = file.with_env_seed(Some("11")).unwrap().validate().unwrap();
        assert_eq!(c.seed(), 7);
        let bare = ExperimentConfig::from_toml("kind = \"sample\"\nmodel = \"pairing\"\nn = 4\nd = 2\n").unwrap();
        assert_eq!(bare.with_env_seed(Some("0x10")).unwrap().validate().unwrap().seed(), 16);
    }

    #[test]
    fn rejects_unknown_keys_and_missing_kind() {
        assert!(ExperimentConfig::from_toml("colour = 3").is_err());
        assert!(ExperimentConfig::from_toml("n = 3").unwrap().validate().is_err());
    }
}
