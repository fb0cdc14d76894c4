//! `key = value` configuration: tolerances, bounds and exponent windows.

use std::path::{Path, PathBuf};

use thiserror::Error;

use super::records::{parse_records, RecordError};
use crate::curves::FgaConfig;
use crate::moduli::LiftConfig;
use crate::nucleus::NucleusConfig;
use crate::twist::AttractorConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("config: {0}")]
    Syntax(#[from] RecordError),
    #[error("config: unknown key `{0}`")]
    UnknownKey(String),
    #[error("config: key `{key}`: cannot parse `{value}`")]
    Value { key: String, value: String },
    #[error("config: sections are not supported (found [{0}])")]
    Section(String),
}

#[derive(Clone, Debug)]
pub struct Config {
    pub nucleus: NucleusConfig,
    pub attractor: AttractorConfig,
    pub fga: FgaConfig,
    pub lift: LiftConfig,
    /// Largest order tried by the sub-hyperbolicity check.
    pub order_bound: u32,
    /// Agreement required between computed and tabulated fixed points.
    pub fixed_point_tolerance: f64,
    pub fixtures: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            nucleus: NucleusConfig::default(),
            attractor: AttractorConfig::default(),
            fga: FgaConfig::default(),
            lift: LiftConfig::default(),
            order_bound: 4,
            fixed_point_tolerance: 1e-3,
            fixtures: None,
        }
    }
}

pub const KEYS: &[&str] = &[
    "nucleus.window",
    "nucleus.state_bound",
    "nucleus.max_rounds",
    "nucleus.max_depth",
    "attractor.window",
    "attractor.verify_window",
    "attractor.max_iter",
    "fga.bound",
    "fga.iterations",
    "fga.window",
    "fga.max_widenings",
    "lift.initial_step",
    "lift.min_step",
    "lift.separation",
    "lift.min_gap",
    "lift.residual",
    "order_bound",
    "fixed_point_tolerance",
    "fixtures",
];

impl Config {
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
        let mut cfg = Config::parse(&text)?;
        // relative fixture paths are taken from the config file's directory
        if let (Some(dir), Some(parent)) = (cfg.fixtures.as_mut(), path.parent()) {
            if dir.is_relative() {
                *dir = parent.join(&dir);
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut cfg = Config::default();
        if text.lines().all(|l| l.trim().is_empty() || l.trim().starts_with('#')) {
            return Ok(cfg);
        }
        for rec in parse_records("config", text)? {
            if !rec.id.is_empty() {
                return Err(ConfigError::Section(rec.id));
            }
            for (k, v) in &rec.fields {
                cfg.set(k, v)?;
            }
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
            value.parse().map_err(|_| ConfigError::Value { key: key.into(), value: value.into() })
        }
        match key {
            "nucleus.window" => self.nucleus.window = num(key, value)?,
            "nucleus.state_bound" => self.nucleus.state_bound = num(key, value)?,
            "nucleus.max_rounds" => self.nucleus.max_rounds = num(key, value)?,
            "nucleus.max_depth" => self.nucleus.max_depth = num(key, value)?,
            "attractor.window" => self.attractor.window = num(key, value)?,
            "attractor.verify_window" => self.attractor.verify_window = num(key, value)?,
            "attractor.max_iter" => self.attractor.max_iter = num(key, value)?,
            "fga.bound" => self.fga.bound = num(key, value)?,
            "fga.iterations" => self.fga.iterations = num(key, value)?,
            "fga.window" => self.fga.window = num(key, value)?,
            "fga.max_widenings" => self.fga.max_widenings = num(key, value)?,
            "lift.initial_step" => self.lift.initial_step = num(key, value)?,
            "lift.min_step" => self.lift.min_step = num(key, value)?,
            "lift.separation" => self.lift.separation = num(key, value)?,
            "lift.min_gap" => self.lift.min_gap = num(key, value)?,
            "lift.residual" => self.lift.residual = num(key, value)?,
            "order_bound" => self.order_bound = num(key, value)?,
            "fixed_point_tolerance" => self.fixed_point_tolerance = num(key, value)?,
            "fixtures" => self.fixtures = Some(PathBuf::from(value)),
            other => return Err(ConfigError::UnknownKey(other.into())),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_known_keys() {
        let cfg = Config::parse("# bounds\nfga.bound = 100\nnucleus.window = 4\nlift.residual = 1e-8\n").unwrap();
        assert_eq!(cfg.fga.bound, 100);
        assert_eq!(cfg.nucleus.window, 4);
        assert_eq!(cfg.lift.residual, 1e-8);
        assert_eq!(cfg.attractor.window, AttractorConfig::default().window);
    }

    #[test]
    fn empty_is_default() {
        let cfg = Config::parse("\n# nothing\n").unwrap();
        assert_eq!(cfg.fga.bound, 512);
    }

    #[test]
    fn errors_are_distinct() {
        assert!(matches!(Config::parse("bogus = 1"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(Config::parse("fga.bound = many"), Err(ConfigError::Value { .. })));
        assert!(matches!(Config::parse("fga.bound"), Err(ConfigError::Syntax(_))));
        assert!(matches!(Config::parse("[x]\nfga.bound = 1"), Err(ConfigError::Section(_))));
    }
}
