use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Environment variable overriding the fixtures directory.
pub const FIXTURES_ENV: &str = "SUBKERNEL_FIXTURES";

/// Observed spreads may exceed their frozen value by this factor.
pub const FIXTURE_SLACK: f64 = 1.05;

pub const FROZEN_FILE: &str = "spreads.json";
pub const KNOWN_FAILURES_FILE: &str = "known_failures.json";

pub fn fixtures_dir() -> PathBuf {
    match std::env::var_os(FIXTURES_ENV) {
        Some(p) => PathBuf::from(p),
        None => Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures"),
    }
}

/// Frozen spreads and constants, keyed by `c<criterion>/<check>`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Frozen {
    pub values: BTreeMap<String, f64>,
}

impl Frozen {
    /// A missing file is an empty set of fixtures.
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(FROZEN_FILE);
        if !path.exists() {
            return Ok(Self::default());
        }
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut f = std::fs::File::create(dir.join(FROZEN_FILE))?;
        serde_json::to_writer_pretty(&mut f, self)?;
        f.write_all(b"\n")?;
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }
}

/// Criteria that fail for a documented reason, by number.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KnownFailures {
    pub criteria: BTreeMap<u32, String>,
}

impl KnownFailures {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(KNOWN_FAILURES_FILE);
        if !path.exists() {
            return Ok(Self::default());
        }
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn reason(&self, id: u32) -> Option<&str> {
        self.criteria.get(&id).map(String::as_str)
    }
}
