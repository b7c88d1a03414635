//! Artifacts assembled in memory and written only after every computation
//! of a command has succeeded.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

pub const TOOL: &str = "finitegap";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance stamped into every file.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_sha256: String,
}

impl Meta {
    pub fn new(command: &str, config_sha256: String) -> Self {
        Self { tool: TOOL, version: VERSION, command: command.into(), config_sha256 }
    }
}

pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// 17 significant digits, locale independent.
pub fn format_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    /// JSON object with a leading `meta` member.
    pub fn json(name: &str, meta: &Meta, body: impl Serialize) -> Result<Self, String> {
        let mut value = serde_json::to_value(body).map_err(|e| e.to_string())?;
        let Value::Object(map) = &mut value else { return Err("report body must be a JSON object".into()) };
        map.insert("meta".into(), json!(meta));
        let mut bytes = serde_json::to_vec_pretty(&value).map_err(|e| e.to_string())?;
        bytes.push(b'\n');
        Ok(Self { name: name.into(), bytes })
    }

    /// CSV with a `#` provenance line before the header.
    pub fn csv(name: &str, meta: &Meta, header: &[&str], rows: Vec<Vec<Cell>>) -> Result<Self, String> {
        let mut bytes =
            format!("# {} {} {} config_sha256={}\n", meta.tool, meta.version, meta.command, meta.config_sha256)
                .into_bytes();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).map_err(|e| e.to_string())?;
        for row in rows {
            let fields: Vec<String> = row
                .into_iter()
                .map(|c| match c {
                    Cell::Int(n) => n.to_string(),
                    Cell::Num(x) => format_num(x),
                    Cell::Text(s) => s,
                })
                .collect();
            w.write_record(&fields).map_err(|e| e.to_string())?;
        }
        bytes.extend(w.into_inner().map_err(|e| e.to_string())?);
        Ok(Self { name: name.into(), bytes })
    }
}

/// File-name safe version of an experiment or table name.
pub fn slug(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

/// Writes every artifact through a temporary file and a rename.
pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> std::io::Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for a in artifacts {
        let target = dir.join(&a.name);
        let tmp = dir.join(format!(".{}.tmp", a.name));
        fs::write(&tmp, &a.bytes)?;
        fs::rename(&tmp, &target)?;
        written.push(target.display().to_string());
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_seventeen_digits() {
        assert_eq!(format_num(0.1), "1.0000000000000001e-1");
        assert_eq!(format_num(f64::NEG_INFINITY), "-inf");
        let x = 2f64.sqrt();
        assert_eq!(format_num(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_has_provenance_line() {
        let meta = Meta::new("eqm", "ab".into());
        let a = Artifact::csv("t.csv", &meta, &["n", "x"], vec![vec![1usize.into(), 0.5.into()]]).unwrap();
        let text = String::from_utf8(a.bytes).unwrap();
        assert_eq!(text, format!("# finitegap {VERSION} eqm config_sha256=ab\nn,x\n1,5.0000000000000000e-1\n"));
    }
}
