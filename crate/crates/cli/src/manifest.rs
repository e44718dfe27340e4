use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::output::{self, Outputs};
use crate::request::Request;

pub const FILE_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Everything needed to rerun a command and check that it produced the
/// same bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub request: Request,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub duration_secs: f64,
}

impl RunManifest {
    pub fn new(request: &Request, jobs: Option<usize>, outputs: &Outputs, duration_secs: f64) -> Result<Self> {
        let inputs = request
            .inputs()
            .into_iter()
            .map(|spec| {
                Ok(FileDigest {
                    path: spec.path.clone(),
                    sha256: output::file_digest(&spec.path)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: request.name().into(),
            seed: request.seed(),
            jobs,
            request: request.clone(),
            inputs,
            outputs: digests(outputs),
            duration_secs,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    /// Input files whose current digest differs from the recorded one.
    pub fn changed_inputs(&self) -> Result<Vec<PathBuf>> {
        let mut changed = Vec::new();
        for d in &self.inputs {
            if output::file_digest(&d.path)? != d.sha256 {
                changed.push(d.path.clone());
            }
        }
        Ok(changed)
    }

    /// CSV outputs whose digest differs from the recorded one (or that are
    /// missing from `fresh`).
    pub fn csv_mismatches(&self, fresh: &Outputs) -> Vec<PathBuf> {
        let now = digests(fresh);
        self.outputs
            .iter()
            .filter(|d| d.path.extension().is_some_and(|e| e == "csv"))
            .filter(|d| !now.iter().any(|n| n == *d))
            .map(|d| d.path.clone())
            .collect()
    }
}

fn digests(outputs: &Outputs) -> Vec<FileDigest> {
    outputs
        .files
        .iter()
        .map(|(name, bytes)| FileDigest {
            path: name.into(),
            sha256: output::sha256_hex(bytes),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::request::Request;

    #[test]
    fn only_csv_outputs_are_compared() {
        let req = Request::Enumerate { n: 3, k: 1, dedup: false };
        let mut a = Outputs::default();
        a.add("x.csv", "1\n");
        a.add("x.json", "{}");
        let m = RunManifest::new(&req, None, &a, 0.0).unwrap();
        let mut b = Outputs::default();
        b.add("x.csv", "1\n");
        b.add("x.json", "{\"changed\":1}");
        assert!(m.csv_mismatches(&b).is_empty());
        let mut c = Outputs::default();
        c.add("x.csv", "2\n");
        assert_eq!(m.csv_mismatches(&c), vec![PathBuf::from("x.csv")]);
        assert!(m.csv_mismatches(&Outputs::default()).len() == 1);
    }

    #[test]
    fn manifest_round_trips() {
        let req = Request::Enumerate { n: 4, k: 2, dedup: true };
        let m = RunManifest::new(&req, Some(2), &Outputs::default(), 0.5).unwrap();
        let back: RunManifest = serde_json::from_str(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.command, "enumerate");
        assert_eq!(back.seed, None);
    }
}
