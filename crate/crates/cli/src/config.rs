use std::path::{Path, PathBuf};

use looptheta::error::{Error, Result};
use looptheta::metaplectic::GaussLadder;
use serde::{Deserialize, Serialize};

pub const CONFIG_ENV: &str = "LOOPTHETA_CONFIG";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Global truncation depth D.
    pub depth: i32,
    pub p: u64,
    /// Trace bound for classical theta tables and loop theta factors.
    pub trace_bound: i64,
    /// Trace bound for Yoshida lift coefficients.
    pub lift_bound: i64,
    pub q_list: Vec<f64>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub ladder_rungs: Vec<u32>,
    pub ladder_max_modulus: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let ladder = GaussLadder::default();
        RunConfig {
            depth: 8,
            p: 11,
            trace_bound: 12,
            lift_bound: 20,
            q_list: vec![2.0, 4.0, 8.0, 16.0],
            seed: 7,
            output_dir: PathBuf::from("out"),
            ladder_rungs: ladder.rungs,
            ladder_max_modulus: ladder.max_modulus,
        }
    }
}

impl RunConfig {
    /// The file named by `path`, else the one named by the environment, else defaults.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let from_env = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
        let cfg = match path.map(Path::to_path_buf).or(from_env) {
            Some(p) => {
                let text = std::fs::read_to_string(&p).map_err(|e| Error::Parse(format!("cannot read {}: {}", p.display(), e)))?;
                serde_json::from_str(&text).map_err(|e| Error::Parse(format!("bad config {}: {}", p.display(), e)))?
            }
            None => RunConfig::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.into()));
        if self.depth <= 0 {
            return bad("depth must be positive");
        }
        if self.trace_bound <= 0 || self.lift_bound <= 0 {
            return bad("trace bounds must be positive");
        }
        if self.q_list.is_empty() || self.q_list.iter().any(|&q| !(q > 1.0)) {
            return bad("q values must exceed 1");
        }
        if self.ladder_rungs.is_empty() || self.ladder_rungs.contains(&0) || self.ladder_max_modulus == 0 {
            return bad("ladder rungs and cap must be positive");
        }
        Ok(())
    }

    pub fn ladder(&self) -> GaussLadder {
        GaussLadder { rungs: self.ladder_rungs.clone(), max_modulus: self.ladder_max_modulus }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let c = RunConfig::default();
        c.validate().unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), c);
        let partial: RunConfig = serde_json::from_str(r#"{"p": 23}"#).unwrap();
        assert_eq!(partial.p, 23);
        assert_eq!(partial.depth, 8);
        assert!(serde_json::from_str::<RunConfig>(r#"{"nope": 1}"#).is_err());
        let bad = RunConfig { q_list: vec![0.5], ..RunConfig::default() };
        assert!(bad.validate().is_err());
    }
}
