//! CSV tables, JSON run manifests and file digests.
//!
//! Floats are written with Rust's shortest round-trip formatting so a rerun
//! with the same inputs reproduces every file byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiments::{DepthRow, NoiseMapResult, SummaryRow, SweepResult};
use crate::training::TrainingRecord;

pub const EPOCHAL_HEADER: &str = "channel,gamma,seed,epoch,train_mse,val_mse";
pub const SUMMARY_HEADER: &str = "channel,gamma,mean_final_train_mse,mean_final_val_mse,stderr_val";
pub const NOISEMAP_HEADER: &str = "channel,gamma_train,gamma_eval,mean_val_mse";
pub const DEPTH_HEADER: &str = "channel,layers,gamma_opt,mean_final_val_mse_at_opt,val_mse_noiseless";

fn push_record(out: &mut String, channel: &str, gamma: f64, record: &TrainingRecord) {
    for (epoch, (tr, va)) in record.train_mse.iter().zip(&record.val_mse).enumerate() {
        writeln!(out, "{channel},{gamma},{},{},{tr},{va}", record.seed, epoch + 1).unwrap();
    }
}

/// Per-epoch losses of one training run; epochs are numbered from 1.
pub fn record_csv(record: &TrainingRecord) -> String {
    let mut out = format!("{EPOCHAL_HEADER}\n");
    push_record(&mut out, record.noise.label(), record.noise.gamma, record);
    out
}

/// Training record including initial and final parameters.
pub fn record_json(record: &TrainingRecord) -> Result<String> {
    Ok(serde_json::to_string_pretty(record)? + "\n")
}

/// Per-epoch losses of every run in the sweeps, in (channel, γ, replica)
/// order as given.
pub fn epochal_csv(sweeps: &[&SweepResult]) -> String {
    let mut out = format!("{EPOCHAL_HEADER}\n");
    for sweep in sweeps {
        for run in &sweep.runs {
            push_record(&mut out, run.channel.label(), run.gamma, &run.record);
        }
    }
    out
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.channel, r.gamma, r.mean_final_train_mse, r.mean_final_val_mse, r.stderr_val
        )
        .unwrap();
    }
    out
}

pub fn noisemap_csv(map: &NoiseMapResult) -> String {
    let mut out = format!("{NOISEMAP_HEADER}\n");
    for (t, row) in map.mean_val_mse.iter().enumerate() {
        for (f, value) in row.iter().enumerate() {
            writeln!(out, "{},{},{},{value}", map.channel, map.gammas[t], map.gammas[f]).unwrap();
        }
    }
    out
}

pub fn depth_csv(rows: &[DepthRow]) -> String {
    let mut out = format!("{DEPTH_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.channel, r.layers, r.gamma_opt, r.val_mse_at_opt, r.val_mse_noiseless
        )
        .unwrap();
    }
    out
}

/// Provenance written next to every results file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: serde_json::Value,
    pub master_seed: u64,
    pub grid: Vec<f64>,
    pub data_path: Option<PathBuf>,
    pub data_sha256: Option<String>,
    pub outputs: Vec<PathBuf>,
    pub tool_version: String,
    pub argv: Vec<String>,
}

impl RunManifest {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        write!(s, "{b:02x}").unwrap();
        s
    })
}

pub fn file_sha256(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    Ok(sha256_hex(&bytes))
}

/// Write `contents` to `path`, creating parent directories.
pub fn write_file(path: impl AsRef<Path>, contents: &str) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(format!("creating {}", parent.display()), e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{ChannelKind, NoiseSpec};

    fn record() -> TrainingRecord {
        TrainingRecord {
            seed: 9,
            noise: NoiseSpec::new(ChannelKind::PhaseDamping, 0.01).unwrap(),
            train_mse: vec![0.5, 0.25],
            val_mse: vec![0.75, 0.125],
            initial_params: vec![1.0],
            final_params: vec![2.0],
            optimizer_steps: 4,
        }
    }

    #[test]
    fn record_tables() {
        assert_eq!(
            record_csv(&record()),
            "channel,gamma,seed,epoch,train_mse,val_mse\npd,0.01,9,1,0.5,0.75\npd,0.01,9,2,0.25,0.125\n"
        );
        let json: serde_json::Value = serde_json::from_str(&record_json(&record()).unwrap()).unwrap();
        assert_eq!(json["final_params"][0], 2.0);
    }

    #[test]
    fn noiseless_label() {
        let mut r = record();
        r.noise = NoiseSpec::none();
        assert!(record_csv(&r).lines().nth(1).unwrap().starts_with("none,0,"));
    }

    #[test]
    fn digest_known_value() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_roundtrip() {
        let m = RunManifest {
            command: "sweep".into(),
            params: serde_json::json!({"layers": 5}),
            master_seed: 3,
            grid: vec![0.0, 1e-5],
            data_path: None,
            data_sha256: None,
            outputs: vec!["a.csv".into()],
            tool_version: "0.1.0".into(),
            argv: vec!["noisereg".into(), "sweep".into()],
        };
        assert_eq!(RunManifest::from_json(&m.to_json().unwrap()).unwrap(), m);
    }
}
