//! Flat `key=value` configuration files and same-named CLI flag overrides.

use std::fs;
use std::path::Path;

use clap::{Arg, ArgMatches, Args, Command, FromArgMatches};
use modadc::experiment::{ExperimentConfig, FoldMode, CONFIG_KEYS};

use crate::CliError;

/// One `--<key> <value>` flag per config key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides(pub Vec<(&'static str, String)>);

impl FromArgMatches for Overrides {
    fn from_arg_matches(m: &ArgMatches) -> Result<Self, clap::Error> {
        let mut o = Self::default();
        o.update_from_arg_matches(m)?;
        Ok(o)
    }

    fn update_from_arg_matches(&mut self, m: &ArgMatches) -> Result<(), clap::Error> {
        for key in CONFIG_KEYS {
            if let Some(v) = m.get_one::<String>(key) {
                self.0.retain(|(k, _)| *k != key);
                self.0.push((key, v.clone()));
            }
        }
        Ok(())
    }
}

impl Args for Overrides {
    fn augment_args(cmd: Command) -> Command {
        CONFIG_KEYS.iter().fold(cmd, |cmd, key| {
            cmd.arg(
                Arg::new(*key)
                    .long(*key)
                    .value_name("VALUE")
                    .allow_negative_numbers(true)
                    .help_heading("Config overrides"),
            )
        })
    }

    fn augment_args_for_update(cmd: Command) -> Command {
        Self::augment_args(cmd)
    }
}

/// Parses `key=value` lines. Blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str, cfg: &mut ExperimentConfig) -> Result<(), CliError> {
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key=value, got `{line}`", i + 1)))?;
        cfg.set(k.trim(), v)
            .map_err(|e| CliError::Config(format!("line {}: {e}", i + 1)))?;
    }
    Ok(())
}

/// Defaults, then the file (if any), then flag overrides; validated.
pub fn resolve(
    default_mode: FoldMode,
    file: Option<&Path>,
    overrides: &Overrides,
) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig {
        mode: default_mode,
        ..Default::default()
    };
    if let Some(path) = file {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        parse_config_text(&text, &mut cfg)?;
    }
    for (k, v) in &overrides.0 {
        cfg.set(k, v).map_err(|e| CliError::Config(format!("--{k}: {e}")))?;
    }
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

/// The `# key=value` lines that open every output file.
pub fn echo_lines(cfg: &ExperimentConfig) -> String {
    cfg.entries()
        .into_iter()
        .map(|(k, v)| format!("# {k}={v}\n"))
        .collect()
}
