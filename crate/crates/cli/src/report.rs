//! Run manifests and CSV output.
//!
//! Every artifact write funnels through [`RunWriter`], which records the
//! config hash, base seed and output names into `manifest.json`. Floats are
//! written with Rust's shortest round-trip formatting, so reruns with the
//! same config and seed produce byte-identical files regardless of the
//! worker-thread count.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config_sha256: String,
    pub base_seed: u64,
    pub threads: usize,
    pub blend_radius: f64,
    /// Small-range threshold R < 1/(2 d e² a₂) from sampled derivative
    /// bounds; below it the stopped-QV estimates are provably uniform.
    pub small_range_threshold: Option<f64>,
    pub derivative_bounds: Option<geojump::geometry::DerivativeBounds>,
    pub outputs: Vec<String>,
    /// Content address of the run: sha256 over the output files in listed
    /// order (a rerun with the same config and seed reproduces it).
    pub content_address: String,
    pub checks: Vec<CheckLine>,
}

pub fn sha256_hex(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub struct RunWriter {
    out_dir: PathBuf,
    manifest: RunManifest,
}

impl RunWriter {
    pub fn new(
        out_dir: &Path,
        subcommand: &str,
        config_text: &str,
        base_seed: u64,
        threads: usize,
        blend_radius: f64,
    ) -> std::io::Result<Self> {
        fs::create_dir_all(out_dir)?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            manifest: RunManifest {
                subcommand: subcommand.to_string(),
                config_sha256: sha256_hex(config_text),
                base_seed,
                threads,
                blend_radius,
                small_range_threshold: None,
                derivative_bounds: None,
                outputs: Vec::new(),
                content_address: String::new(),
                checks: Vec::new(),
            },
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    pub fn set_threshold(&mut self, bounds: geojump::geometry::DerivativeBounds, threshold: f64) {
        self.manifest.derivative_bounds = Some(bounds);
        self.manifest.small_range_threshold = Some(threshold);
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.manifest.checks.push(CheckLine { name: name.to_string(), passed, detail });
    }

    pub fn all_passed(&self) -> bool {
        self.manifest.checks.iter().all(|c| c.passed)
    }

    pub fn checks(&self) -> &[CheckLine] {
        &self.manifest.checks
    }

    /// Write a CSV file from a header and stringified rows.
    pub fn write_csv(
        &mut self,
        name: &str,
        header: &str,
        rows: &[Vec<String>],
    ) -> std::io::Result<()> {
        let path = self.out_dir.join(name);
        let mut file = fs::File::create(&path)?;
        writeln!(file, "{header}")?;
        for row in rows {
            writeln!(file, "{}", row.join(","))?;
        }
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> std::io::Result<()> {
        let path = self.out_dir.join(name);
        let text = serde_json::to_string_pretty(value).expect("serializable");
        fs::write(path, text)?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    /// Finalize: write `manifest.json` and report overall pass/fail.
    pub fn finish(mut self) -> std::io::Result<bool> {
        let mut hasher = Sha256::new();
        for name in &self.manifest.outputs {
            hasher.update(name.as_bytes());
            hasher.update(fs::read(self.out_dir.join(name))?);
        }
        self.manifest.content_address =
            hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
        self.manifest.outputs.push("manifest.json".to_string());
        let passed = self.all_passed();
        let text = serde_json::to_string_pretty(&self.manifest).expect("serializable");
        fs::write(self.out_dir.join("manifest.json"), text)?;
        Ok(passed)
    }
}

/// Shortest-round-trip float column.
pub fn fcol(x: f64) -> String {
    format!("{x}")
}
