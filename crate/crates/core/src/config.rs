//! Run and sweep configuration: a flat JSON object with every field
//! optional; missing fields take the documented defaults. The resolved
//! (fully materialized) config is echoed next to every run's artifacts so a
//! run can be reproduced byte-for-byte from its own output directory.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::task_family::MAX_N_INPUTS;

/// One training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n_inputs: usize,
    pub num_agents: usize,
    pub r_a: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub message_width: usize,
    pub hidden_width: usize,
    pub seed: u64,
    pub eval_every: usize,
    pub out_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_inputs: 3,
            num_agents: 4,
            r_a: 0.5,
            epochs: 3000,
            batch_size: 512,
            learning_rate: 0.001,
            message_width: 32,
            hidden_width: 128,
            seed: 1,
            eval_every: 50,
            out_dir: "runs/train".into(),
        }
    }
}

impl RunConfig {
    /// Family size implied by `n_inputs`.
    pub fn num_tasks(&self) -> usize {
        1usize << (1usize << self.n_inputs)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_N_INPUTS).contains(&self.n_inputs) {
            return Err(Error::Config(format!(
                "n_inputs must be in 1..={MAX_N_INPUTS}, got {}",
                self.n_inputs
            )));
        }
        if self.num_agents < 1 {
            return Err(Error::Config("num_agents must be at least 1".into()));
        }
        if self.num_tasks() < self.num_agents {
            return Err(Error::Config(format!(
                "{} tasks cannot cover {} agents",
                self.num_tasks(),
                self.num_agents
            )));
        }
        if !self.r_a.is_finite() || !(0.0..=1.0).contains(&self.r_a) {
            return Err(Error::Config(format!(
                "r_a must lie in [0, 1], got {}",
                self.r_a
            )));
        }
        if self.epochs < 1 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.message_width < 1 {
            return Err(Error::Config("message_width must be at least 1".into()));
        }
        if self.hidden_width < 1 {
            return Err(Error::Config("hidden_width must be at least 1".into()));
        }
        if self.eval_every < 1 {
            return Err(Error::Config("eval_every must be at least 1".into()));
        }
        if self.out_dir.is_empty() {
            return Err(Error::Config("out_dir must be nonempty".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}

/// An `r_a` x seed grid of runs sharing one base config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub base: RunConfig,
    pub r_a_values: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            base: RunConfig {
                out_dir: "runs/sweep".into(),
                ..RunConfig::default()
            },
            r_a_values: vec![0.0, 0.125, 0.25, 0.5, 0.75, 1.0],
            seeds: vec![1, 2, 3],
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.r_a_values.is_empty() {
            return Err(Error::Config("r_a_values must be nonempty".into()));
        }
        for w in self.r_a_values.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Config(
                    "r_a_values must be strictly increasing".into(),
                ));
            }
        }
        for &v in &self.r_a_values {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!(
                    "r_a_values entries must lie in [0, 1], got {v}"
                )));
            }
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must be nonempty".into()));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return Err(Error::Config("seeds must be distinct".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}

fn read_config_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config file {}: {e}", path.display())))
}

pub fn load_run_config(path: &Path) -> Result<RunConfig> {
    RunConfig::from_json(&read_config_file(path)?).map_err(|e| prefix_path(e, path))
}

pub fn load_sweep_config(path: &Path) -> Result<SweepConfig> {
    SweepConfig::from_json(&read_config_file(path)?).map_err(|e| prefix_path(e, path))
}

fn prefix_path(err: Error, path: &Path) -> Error {
    match err {
        Error::Config(msg) if !msg.contains("cannot read config file") => {
            Error::Config(format!("{}: {msg}", path.display()))
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        let config = RunConfig::from_json("{}").unwrap();
        assert_eq!(config, RunConfig::default());
        assert_eq!(config.num_tasks(), 256);
        assert_eq!(config.epochs, 3000);
        assert_eq!(config.batch_size, 512);
        assert_eq!(config.learning_rate, 0.001);
        assert_eq!(config.message_width, 32);
        assert_eq!(config.hidden_width, 128);
    }

    #[test]
    fn overrides_apply() {
        let config = RunConfig::from_json(r#"{"n_inputs": 2, "r_a": 0.25, "seed": 9}"#).unwrap();
        assert_eq!(config.n_inputs, 2);
        assert_eq!(config.num_tasks(), 16);
        assert_eq!(config.r_a, 0.25);
        assert_eq!(config.seed, 9);
    }

    #[test]
    fn unknown_field_is_rejected() {
        let err = RunConfig::from_json(r#"{"n_input": 2}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("n_input"), "{msg}");
    }

    #[test]
    fn parse_error_names_position() {
        let err = RunConfig::from_json("{\n  \"r_a\": oops\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn out_of_range_values_rejected() {
        assert!(RunConfig::from_json(r#"{"r_a": 1.5}"#).is_err());
        assert!(RunConfig::from_json(r#"{"n_inputs": 9}"#).is_err());
        assert!(RunConfig::from_json(r#"{"epochs": 0}"#).is_err());
        assert!(RunConfig::from_json(r#"{"learning_rate": 0.0}"#).is_err());
        assert!(RunConfig::from_json(r#"{"num_agents": 20, "n_inputs": 1}"#).is_err());
    }

    #[test]
    fn echo_roundtrips() {
        let config = RunConfig::from_json(r#"{"seed": 123, "r_a": 0.125}"#).unwrap();
        let echoed = RunConfig::from_json(&config.to_json_pretty()).unwrap();
        assert_eq!(config, echoed);
    }

    #[test]
    fn sweep_defaults_and_grid() {
        let sweep = SweepConfig::from_json("{}").unwrap();
        assert_eq!(sweep.r_a_values, vec![0.0, 0.125, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(sweep.seeds, vec![1, 2, 3]);
        assert_eq!(sweep.r_a_values.len() * sweep.seeds.len(), 18);
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        assert!(SweepConfig::from_json(r#"{"r_a_values": [0.5, 0.25]}"#).is_err());
        assert!(SweepConfig::from_json(r#"{"r_a_values": [0.5, 0.5]}"#).is_err());
        assert!(SweepConfig::from_json(r#"{"r_a_values": []}"#).is_err());
        assert!(SweepConfig::from_json(r#"{"seeds": [1, 1]}"#).is_err());
        assert!(SweepConfig::from_json(r#"{"seeds": []}"#).is_err());
    }

    #[test]
    fn missing_file_error_names_path() {
        let err = load_run_config(Path::new("/definitely/not/here.json")).unwrap_err();
        assert!(err.to_string().contains("/definitely/not/here.json"));
    }
}
