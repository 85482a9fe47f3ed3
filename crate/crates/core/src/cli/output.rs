use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// Envelope around every command result.
#[derive(Debug, Clone, Serialize)]
pub struct Artifact<T: Serialize> {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub tolerances: Value,
    pub config: Value,
    pub result: T,
}

impl<T: Serialize> Artifact<T> {
    pub fn new(command: &'static str, seed: u64, tolerances: Value, config: Value, result: T) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            tolerances,
            config,
            result,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("artifact serializes");
        s.push('\n');
        s
    }

    /// `#`-prefixed metadata lines, then `header` and `rows`.
    pub fn to_csv(&self, header: &[&str], rows: &[Vec<String>]) -> String {
        let mut out = String::new();
        let meta = [
            ("schema", Value::from(self.schema)),
            ("tool", Value::from(self.tool)),
            ("version", Value::from(self.version)),
            ("command", Value::from(self.command)),
            ("seed", Value::from(self.seed)),
            ("tolerances", self.tolerances.clone()),
            ("config", self.config.clone()),
        ];
        for (key, value) in meta {
            let _ = writeln!(out, "# {key}: {value}");
        }
        let _ = writeln!(out, "{}", header.join(","));
        for row in rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

/// 17 significant digits, `.` decimal separator.
pub fn csv_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}").to_lowercase()
    }
}

/// Writes `contents` to `path` through a temporary file in the same directory,
/// or to stdout when `path` is `None`.
pub fn emit(contents: &str, path: Option<&Path>) -> std::io::Result<()> {
    match path {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(contents.as_bytes())?;
            stdout.flush()
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(contents.as_bytes())?;
            tmp.as_file().sync_all()?;
            tmp.persist(path).map_err(|e| e.error)?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23] {
            assert_eq!(csv_float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(csv_float(f64::NAN), "nan");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        emit("first", Some(&path)).unwrap();
        emit("second", Some(&path)).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn csv_has_metadata_then_header() {
        let a = Artifact::new("sweep", 3, serde_json::json!({"det": 1e-10}), Value::Null, ());
        let csv = a.to_csv(&["N", "p"], &[vec!["1".into(), csv_float(1.0)]]);
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[..7].iter().all(|l| l.starts_with('#')));
        assert_eq!(lines[7], "N,p");
        assert!(csv.contains("# seed: 3"));
    }
}
