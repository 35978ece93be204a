//! Output directory handling: every file is written to a temporary name in
//! its final directory and renamed into place.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Component, Path, PathBuf};
use std::sync::Mutex;

use serde::Serialize;

use crate::error::CliError;

#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Mutex<Vec<String>>,
}

impl OutputDir {
    pub fn create(root: impl AsRef<Path>) -> Result<Self, CliError> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(&root).map_err(|e| CliError::io(root.display().to_string(), e))?;
        Ok(Self { root, written: Mutex::new(Vec::new()) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Files written so far, relative to the root, in write order.
    pub fn written(&self) -> Vec<String> {
        self.written.lock().unwrap().clone()
    }

    /// Resolves a relative path, rejecting anything that could escape the root.
    pub fn resolve(&self, rel: &str) -> Result<PathBuf, CliError> {
        let path = Path::new(rel);
        let ok = !rel.is_empty() && path.components().all(|c| matches!(c, Component::Normal(_)));
        if !ok {
            return Err(CliError::OutsideOutput(rel.to_string()));
        }
        Ok(self.root.join(path))
    }

    pub fn exists(&self, rel: &str) -> bool {
        self.resolve(rel).is_ok_and(|p| p.exists())
    }

    pub fn read_to_string(&self, rel: &str) -> Result<String, CliError> {
        let p = self.resolve(rel)?;
        fs::read_to_string(&p).map_err(|e| CliError::io(p.display().to_string(), e))
    }

    pub fn write_bytes(&self, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.resolve(rel)?;
        let dir = path.parent().expect("resolved paths have a parent");
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display().to_string(), e))?;
        let name = path.file_name().unwrap().to_string_lossy();
        let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
        let io = |e| CliError::io(path.display().to_string(), e);
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(bytes).map_err(io)?;
        f.sync_all().map_err(io)?;
        drop(f);
        fs::rename(&tmp, &path).map_err(io)?;
        let mut w = self.written.lock().unwrap();
        if !w.iter().any(|x| x == rel) {
            w.push(rel.to_string());
        }
        Ok(())
    }

    pub fn write_json<T: Serialize>(&self, rel: &str, value: &T) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write_bytes(rel, s.as_bytes())
    }

    pub fn write_csv(&self, rel: &str, table: &CsvTable) -> Result<(), CliError> {
        let bytes = table.to_bytes()?;
        self.write_bytes(rel, &bytes)
    }
}

/// A numeric table with `# key: value` metadata lines above the header.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvTable {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Shortest round-trip representation; non-finite values as `nan`, `inf`, `-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:?}")
    }
}

impl CsvTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { meta: Vec::new(), columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut out = Vec::new();
        for (k, v) in &self.meta {
            out.extend_from_slice(format!("# {k}: {v}\n").as_bytes());
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|x| fmt_f64(*x)))?;
        }
        w.into_inner().map_err(|e| CliError::io("csv buffer", e.into_error()))
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut meta = Vec::new();
        let mut body = String::new();
        for line in text.lines() {
            if let Some(m) = line.strip_prefix('#') {
                if let Some((k, v)) = m.trim().split_once(':') {
                    meta.push((k.trim().to_string(), v.trim().to_string()));
                }
            } else if !line.trim().is_empty() {
                body.push_str(line);
                body.push('\n');
            }
        }
        let mut r = csv::Reader::from_reader(body.as_bytes());
        let columns: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|f| {
                    let f = f.trim();
                    if f.is_empty() {
                        Ok(f64::NAN)
                    } else {
                        f.parse::<f64>().map_err(|_| CliError::Plot(format!("row {}: '{f}' is not a number", i + 1)))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Ok(Self { meta, columns, rows })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
        Self::parse(&text)
    }
}

/// Run record written next to every command's outputs.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub status: String,
    pub wall_time_s: f64,
    /// The full configuration as TOML; re-running with it reproduces the outputs.
    pub config: String,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_escaping_paths() {
        let d = tempfile::tempdir().unwrap();
        let out = OutputDir::create(d.path()).unwrap();
        for bad in ["../x.csv", "/etc/passwd", "a/../../b", "", "./"] {
            assert!(matches!(out.resolve(bad), Err(CliError::OutsideOutput(_))), "{bad}");
        }
        assert!(out.resolve("points/a.csv").is_ok());
    }

    #[test]
    fn csv_round_trip() {
        let mut t = CsvTable::new(["t", "pop"]).meta("g", 1.5);
        t.push(vec![0.0, 1.0]);
        t.push(vec![0.1, f64::NAN]);
        t.push(vec![0.2, 1.0 / 3.0]);
        let back = CsvTable::parse(std::str::from_utf8(&t.to_bytes().unwrap()).unwrap()).unwrap();
        assert_eq!(back.columns, t.columns);
        assert_eq!(back.meta_value("g"), Some("1.5"));
        assert_eq!(back.rows[2][1], 1.0 / 3.0);
        assert!(back.rows[1][1].is_nan());
    }
}
