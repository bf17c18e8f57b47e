//! Campaign files: TOML with a format version, shared defaults and a list of
//! experiments.
//!
//! ```toml
//! format_version = 1
//! output_dir = "results"   # relative to the campaign file
//! master_seed = 42
//! workers = 4              # optional
//!
//! [[experiment]]
//! name = "rec"
//! kind = "recurrence1d"
//! p = 0.75
//! step_cap = 1000000
//! trials = 10000
//! ```
//!
//! Each experiment writes `<output_dir>/<name>.csv` (one row per trial) and
//! `<output_dir>/<name>.json` (config echo, summary, seed, wall time).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use erwlab::experiments::{run_experiment, ExperimentConfig};
use serde::Deserialize;

use crate::{default_workers, summary_json, write_file, Failure};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignFile {
    pub format_version: u32,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub master_seed: u64,
    pub workers: Option<usize>,
    #[serde(default, rename = "experiment")]
    pub experiments: Vec<ExperimentConfig>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("erwlab-out")
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name != "."
        && name != ".."
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

impl CampaignFile {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        let file: CampaignFile = toml::from_str(text).map_err(|e| Failure::Invalid(e.to_string()))?;
        file.validate()?;
        Ok(file)
    }

    fn validate(&self) -> Result<(), Failure> {
        if self.format_version != FORMAT_VERSION {
            return Err(Failure::Invalid(format!(
                "format_version: unsupported version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        let mut seen = BTreeSet::new();
        for (i, e) in self.experiments.iter().enumerate() {
            if !valid_name(&e.name) {
                return Err(Failure::Invalid(format!(
                    "experiment[{i}].name: {:?} must be non-empty and use only letters, digits, '-', '_' or '.'",
                    e.name
                )));
            }
            if !seen.insert(e.name.as_str()) {
                return Err(Failure::Invalid(format!("experiment[{i}].name: duplicate name {:?}", e.name)));
            }
            e.validate()
                .map_err(|err| Failure::Invalid(format!("experiment {:?}: {err}", e.name)))?;
        }
        Ok(())
    }
}

pub fn run_campaign(path: &Path, workers_flag: Option<usize>) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    let file = CampaignFile::parse(&text)?;
    if file.experiments.is_empty() {
        println!("campaign {}: no experiments", path.display());
        return Ok(());
    }
    let workers = default_workers(workers_flag.or(file.workers))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let out_dir = base.join(&file.output_dir);
    for cfg in &file.experiments {
        let seed = cfg.master_seed.unwrap_or(file.master_seed);
        let t = Instant::now();
        let out = run_experiment(cfg, file.master_seed, workers)
            .map_err(|e| Failure::Runtime(format!("experiment {:?}: {e}", cfg.name)))?;
        let wall = t.elapsed().as_millis();
        write_file(&out_dir.join(format!("{}.csv", cfg.name)), &out.table.to_csv())?;
        write_file(&out_dir.join(format!("{}.json", cfg.name)), &summary_json(cfg, &out, seed, wall))?;
        println!("{}: {} [{wall} ms]", cfg.name, out.headline);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_file() {
        let f = CampaignFile::parse(
            r#"
format_version = 1
output_dir = "o"
master_seed = 9
workers = 2

[[experiment]]
name = "a"
kind = "band"
heights = [8, 16]
trials = 5

[[experiment]]
name = "b"
kind = "speed"
dim = 4
epsilon = 0.5
n = 100
trials = 3
"#,
        )
        .unwrap();
        assert_eq!(f.experiments.len(), 2);
        assert_eq!(f.master_seed, 9);
        assert_eq!(f.workers, Some(2));
    }

    #[test]
    fn empty_campaign_is_valid() {
        let f = CampaignFile::parse("format_version = 1\n").unwrap();
        assert!(f.experiments.is_empty());
    }

    fn invalid(text: &str) -> String {
        match CampaignFile::parse(text) {
            Err(Failure::Invalid(m)) => m,
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_files() {
        assert!(invalid("format_version = 7\n").contains("format_version"));
        assert!(invalid("master_seed = 1\n").contains("format_version"));
        assert!(invalid("format_version = 1\n[[experiment]]\nname = \"x\"\nkind = \"foo\"\ntrials = 1\n").contains("kind"));
        let dup = "format_version = 1\n[[experiment]]\nname = \"x\"\nkind = \"band\"\ntrials = 1\n\
                   [[experiment]]\nname = \"x\"\nkind = \"band\"\ntrials = 1\n";
        assert!(invalid(dup).contains("duplicate"));
        assert!(invalid("format_version = 1\n[[experiment]]\nname = \"../x\"\nkind = \"band\"\ntrials = 1\n").contains("name"));
        assert!(invalid("format_version = 1\n[[experiment]]\nname = \"x\"\nkind = \"band\"\ntrials = 1\ncolour = 3\n").contains("colour"));
    }
}
