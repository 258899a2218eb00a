//! Run settings: defaults, overridden by a flat `key = value` config
//! file, overridden in turn by command-line flags.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use wsd_core::disambig::Strategy;

#[derive(Clone, Debug)]
pub struct Settings {
    pub hierarchy: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub bags: Option<PathBuf>,
    pub gold: Option<PathBuf>,
    pub decisions: Option<PathBuf>,
    pub exclusions: Option<PathBuf>,
    pub targets: Vec<String>,
    pub radius: u32,
    pub cap: usize,
    pub positional: bool,
    pub strategy: Strategy,
    pub weight_collection: bool,
    pub weight_query: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            hierarchy: None,
            lexicon: None,
            corpus: None,
            bags: None,
            gold: None,
            decisions: None,
            exclusions: None,
            targets: Vec::new(),
            radius: 2,
            cap: 64,
            positional: false,
            strategy: Strategy::Basic,
            weight_collection: true,
            weight_query: true,
        }
    }
}

fn parse_bool(value: &str) -> Result<bool> {
    match value {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => bail!("expected a boolean, got `{value}`"),
    }
}

impl Settings {
    /// Applies one config file: `key = value` per line, `#` comments.
    pub fn apply_config(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config line {}: expected `key = value`", n + 1))?;
            let key = key.trim();
            let value = value.trim();
            let ctx = || format!("config line {} (`{key}`)", n + 1);
            match key {
                "hierarchy" => self.hierarchy = Some(PathBuf::from(value)),
                "lexicon" => self.lexicon = Some(PathBuf::from(value)),
                "corpus" => self.corpus = Some(PathBuf::from(value)),
                "bags" => self.bags = Some(PathBuf::from(value)),
                "gold" => self.gold = Some(PathBuf::from(value)),
                "decisions" => self.decisions = Some(PathBuf::from(value)),
                "exclusions" => self.exclusions = Some(PathBuf::from(value)),
                "target" => self.targets.push(value.to_string()),
                "radius" => self.radius = value.parse().with_context(ctx)?,
                "cap" => self.cap = value.parse().with_context(ctx)?,
                "positional" => self.positional = parse_bool(value).with_context(ctx)?,
                "strategy" => {
                    self.strategy = value
                        .parse()
                        .map_err(|()| anyhow!("strategy must be `basic` or `sequential`"))
                        .with_context(ctx)?
                }
                "weight_collection" => self.weight_collection = parse_bool(value).with_context(ctx)?,
                "weight_query" => self.weight_query = parse_bool(value).with_context(ctx)?,
                _ => bail!("config line {}: unknown key `{key}`", n + 1),
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.cap == 0 {
            bail!("cap must be at least 1");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_overrides_defaults() {
        let mut s = Settings::default();
        s.apply_config(
            "# test\nhierarchy = /tmp/h.tsv\nradius = 3\ncap=32\npositional = on\nstrategy = sequential\nweight_query = false\ntarget = 昼\ntarget = 雨\n",
        )
        .unwrap();
        assert_eq!(s.hierarchy.as_deref(), Some(std::path::Path::new("/tmp/h.tsv")));
        assert_eq!(s.radius, 3);
        assert_eq!(s.cap, 32);
        assert!(s.positional);
        assert_eq!(s.strategy, Strategy::Sequential);
        assert!(!s.weight_query);
        assert!(s.weight_collection);
        assert_eq!(s.targets, ["昼", "雨"]);
    }

    #[test]
    fn bad_keys_and_values_are_rejected() {
        let mut s = Settings::default();
        assert!(s.apply_config("nonsense = 1\n").is_err());
        assert!(s.apply_config("radius = many\n").is_err());
        assert!(s.apply_config("just a line\n").is_err());
    }

    #[test]
    fn zero_cap_fails_validation() {
        let mut s = Settings::default();
        s.apply_config("cap = 0\n").unwrap();
        assert!(s.validate().is_err());
    }
}
