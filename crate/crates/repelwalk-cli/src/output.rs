use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

use repelwalk::mcmc::RNG_NAME;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Canonical hash of the resolved experiment config.
pub fn config_hash<T: Serialize>(cfg: &T) -> String {
    let bytes = serde_json::to_vec(cfg).expect("config serializes");
    let digest = Sha256::digest(&bytes);
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// 17 significant digits: round-trips f64 exactly through decimal text.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Quotes a CSV cell that may contain commas or quotes.
pub fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

pub struct Metadata {
    pub config_hash: String,
    pub seed: u64,
}

impl Metadata {
    fn header_lines(&self) -> Vec<String> {
        vec![
            format!("# artifact_version={ARTIFACT_VERSION}"),
            format!("# config_hash={}", self.config_hash),
            format!("# seed={}", self.seed),
            format!("# rng={RNG_NAME}"),
            // the one line that varies between identical runs
            format!(
                "# timestamp_unix={}",
                SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0)
            ),
        ]
    }
}

pub struct CsvFile {
    writer: BufWriter<File>,
    pub path: PathBuf,
}

impl CsvFile {
    pub fn create(dir: &Path, name: &str, meta: &Metadata, columns: &[&str]) -> anyhow::Result<Self> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output dir {}", dir.display()))?;
        let path = dir.join(name);
        let mut writer = BufWriter::new(
            File::create(&path).with_context(|| format!("cannot create {}", path.display()))?,
        );
        for line in meta.header_lines() {
            writeln!(writer, "{line}")?;
        }
        writeln!(writer, "{}", columns.join(","))?;
        Ok(CsvFile { writer, path })
    }

    pub fn row(&mut self, cells: &[String]) -> anyhow::Result<()> {
        writeln!(self.writer, "{}", cells.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> anyhow::Result<PathBuf> {
        self.writer.flush()?;
        Ok(self.path)
    }
}

pub struct JsonlFile {
    writer: BufWriter<File>,
    pub path: PathBuf,
}

impl JsonlFile {
    pub fn create(dir: &Path, name: &str, meta: &Metadata) -> anyhow::Result<Self> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output dir {}", dir.display()))?;
        let path = dir.join(name);
        let mut writer = BufWriter::new(
            File::create(&path).with_context(|| format!("cannot create {}", path.display()))?,
        );
        let mut header = serde_json::Map::new();
        header.insert("artifact_version".into(), ARTIFACT_VERSION.into());
        header.insert("config_hash".into(), meta.config_hash.clone().into());
        header.insert("seed".into(), meta.seed.into());
        header.insert("rng".into(), RNG_NAME.into());
        header.insert(
            "timestamp_unix".into(),
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
                .into(),
        );
        writeln!(writer, "{}", serde_json::Value::Object(header))?;
        Ok(JsonlFile { writer, path })
    }

    pub fn record(&mut self, value: &serde_json::Value) -> anyhow::Result<()> {
        writeln!(self.writer, "{value}")?;
        Ok(())
    }

    pub fn finish(mut self) -> anyhow::Result<PathBuf> {
        self.writer.flush()?;
        Ok(self.path)
    }
}
