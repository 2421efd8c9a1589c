use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use genefuse::pipeline::StageTimes;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub logical_cores: usize,
    pub memory_bytes: u64,
    pub thread_cap: usize,
    pub os: String,
    pub arch: String,
}

impl Environment {
    pub fn capture(thread_cap: usize) -> Self {
        Self {
            logical_cores: logical_cores(),
            memory_bytes: total_memory(),
            thread_cap,
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTiming {
    pub run: usize,
    pub seed: u64,
    pub wall_seconds: f64,
    pub stages: StageTimes,
}

/// Provenance for one invocation. Everything time- or host-dependent lives
/// here so the report itself stays reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command_line: Vec<String>,
    pub config_fingerprint: String,
    pub dataset_path: String,
    pub dataset_sha256: String,
    pub seeds: Vec<u64>,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub environment: Environment,
    pub runs: Vec<RunTiming>,
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

pub fn logical_cores() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// `MemTotal` from /proc/meminfo; 0 where unavailable.
fn total_memory() -> u64 {
    let Ok(text) = std::fs::read_to_string("/proc/meminfo") else {
        return 0;
    };
    text.lines()
        .find_map(|l| l.strip_prefix("MemTotal:"))
        .and_then(|rest| rest.trim().trim_end_matches("kB").trim().parse::<u64>().ok())
        .map_or(0, |kb| kb * 1024)
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}
