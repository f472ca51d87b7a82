use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Provenance written next to (or embedded in) every output.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command_line: Vec<String>,
    /// sha256 of each input file, keyed by the path as given.
    pub inputs: BTreeMap<String, String>,
    pub seed: u64,
    pub mc_n: usize,
    pub grid: Option<serde_json::Value>,
    pub wall_time_s: f64,
    #[serde(skip)]
    started: Option<Instant>,
}

impl RunManifest {
    pub fn new(seed: u64, mc_n: usize) -> Self {
        RunManifest {
            tool: "maxstab",
            version: env!("CARGO_PKG_VERSION"),
            command_line: std::env::args().collect(),
            inputs: BTreeMap::new(),
            seed,
            mc_n,
            grid: None,
            wall_time_s: 0.0,
            started: Some(Instant::now()),
        }
    }

    pub fn record_input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs
            .insert(path.display().to_string(), hex::encode(Sha256::digest(bytes)));
    }

    pub fn finish(&mut self) -> &Self {
        if let Some(t) = self.started {
            self.wall_time_s = t.elapsed().as_secs_f64();
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hashes_are_sha256_hex() {
        let mut m = RunManifest::new(7, 10);
        m.record_input(Path::new("x.json"), b"abc");
        assert_eq!(
            m.inputs["x.json"],
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
