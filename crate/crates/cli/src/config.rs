//! Config loading.
//!
//! A config file is TOML or JSON (picked by extension, `.json` or anything
//! else as TOML). Parsing runs in three steps so diagnostics stay precise:
//! syntax errors carry a line, tabulated weights given as
//! `{ family = "tabulated", csv = "path" }` are inlined from the CSV, and the
//! typed pass reports the dotted path of the first offending field.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// A parsed config, before it is bound to a command's schema.
#[derive(Debug, Clone)]
pub struct RawConfig {
    pub path: Option<PathBuf>,
    pub value: Value,
    /// SHA-256 of the file bytes.
    pub file_sha256: Option<String>,
}

impl RawConfig {
    pub fn empty() -> Self {
        Self {
            path: None,
            value: Value::Object(Map::new()),
            file_sha256: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(CliError::io(path))?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| CliError::Usage(format!("{}: config is not valid UTF-8", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let mut value = parse_text(&text, is_json).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        inline_tables(&mut value, base, "")?;
        Ok(Self {
            path: Some(path.to_path_buf()),
            value,
            file_sha256: Some(hex::encode(Sha256::digest(&bytes))),
        })
    }

    /// Bind to a command schema; the error names the field.
    pub fn bind<T: DeserializeOwned>(&self) -> Result<T> {
        serde_path_to_error::deserialize(&self.value).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "config".to_string() } else { format!("field `{path}`") };
            CliError::Usage(format!("{field}: {}", e.inner()))
        })
    }

    /// Overwrite a top-level key. Flags go through here so the resolved
    /// hash covers them.
    pub fn set(&mut self, key: &str, v: Value) {
        if let Value::Object(m) = &mut self.value {
            m.insert(key.to_string(), v);
        }
    }

    /// SHA-256 of the canonical (sorted-key) JSON of the resolved config.
    pub fn resolved_sha256(&self) -> String {
        let bytes = serde_json::to_vec(&self.value).expect("JSON values serialize");
        hex::encode(Sha256::digest(bytes))
    }
}

fn parse_text(text: &str, json: bool) -> std::result::Result<Value, String> {
    let v: Value = if json {
        serde_json::from_str(text).map_err(|e| e.to_string())?
    } else {
        let t: toml::Value = toml::from_str(text).map_err(|e| e.to_string().trim_end().to_string())?;
        serde_json::to_value(t).map_err(|e| e.to_string())?
    };
    if !v.is_object() {
        return Err("top level must be a table".into());
    }
    Ok(v)
}

fn inline_tables(v: &mut Value, base: &Path, at: &str) -> Result<()> {
    match v {
        Value::Object(m) => {
            if m.get("family").and_then(Value::as_str) == Some("tabulated") {
                if let Some(csv) = m.remove("csv") {
                    let field = join(at, "csv");
                    let rel = csv
                        .as_str()
                        .ok_or_else(|| CliError::Usage(format!("field `{field}`: expected a path string")))?;
                    let (r, values) = read_table(&base.join(rel), &field)?;
                    m.insert("table".into(), serde_json::json!({ "r": r, "values": values }));
                }
            }
            for (k, child) in m.iter_mut() {
                inline_tables(child, base, &join(at, k))?;
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter_mut().enumerate() {
                inline_tables(child, base, &format!("{at}[{i}]"))?;
            }
        }
        _ => {}
    }
    Ok(())
}

fn join(at: &str, key: &str) -> String {
    if at.is_empty() {
        key.to_string()
    } else {
        format!("{at}.{key}")
    }
}

/// Two columns `(r, ω(r))`; a header row is allowed and lines starting with
/// `#` are skipped.
pub fn read_table(path: &Path, field: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::Usage(format!("field `{field}`: {}: {e}", path.display())))?;
    let (mut r, mut w) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Usage(format!("field `{field}`: {}: {e}", path.display())))?;
        let line = rec.position().map_or(i as u64 + 1, |p| p.line());
        if rec.len() != 2 {
            return Err(CliError::Usage(format!(
                "field `{field}`: {} line {line}: expected 2 columns, found {}",
                path.display(),
                rec.len()
            )));
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(a), Ok(b)) => {
                r.push(a);
                w.push(b);
            }
            // a header is only allowed before the data
            _ if r.is_empty() && i == 0 => {}
            _ => {
                return Err(CliError::Usage(format!(
                    "field `{field}`: {} line {line}: not a number pair",
                    path.display()
                )))
            }
        }
    }
    Ok((r, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use bergman::weights::WeightSpec;
    use serde::Deserialize;

    #[derive(Debug, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct One {
        weight: WeightSpec,
    }

    fn raw(text: &str, json: bool) -> RawConfig {
        RawConfig {
            path: None,
            value: parse_text(text, json).unwrap(),
            file_sha256: None,
        }
    }

    #[test]
    fn toml_and_json_agree() {
        let a = raw("[weight]\nfamily = \"standard\"\na = 1.0\n", false);
        let b = raw(r#"{"weight": {"family": "standard", "a": 1.0}}"#, true);
        assert_eq!(a.bind::<One>().unwrap().weight, b.bind::<One>().unwrap().weight);
        assert_eq!(a.resolved_sha256(), b.resolved_sha256());
    }

    #[test]
    fn unknown_family_names_the_field() {
        let e = raw("[weight]\nfamily = \"gaussian\"\n", false).bind::<One>().unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("weight"), "{msg}");
        assert!(msg.contains("gaussian"), "{msg}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let e = parse_text("[weight]\nfamily = \n", false).unwrap_err();
        assert!(e.contains("line 2"), "{e}");
        let e = parse_text("{\n\"weight\": }", true).unwrap_err();
        assert!(e.contains("line 2"), "{e}");
    }

    #[test]
    fn tabulated_csv_is_inlined() {
        let dir = std::env::temp_dir().join(format!("bergman-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("w.csv"), "r,omega\n0.0,1.0\n0.5,0.5\n0.9,0.1\n").unwrap();
        let cfg = dir.join("c.toml");
        std::fs::write(&cfg, "[weight]\nfamily = \"tabulated\"\ncsv = \"w.csv\"\n").unwrap();
        let one: One = RawConfig::load(&cfg).unwrap().bind().unwrap();
        one.weight.validate().unwrap();
        std::fs::write(dir.join("w.csv"), "0.0,1.0\n0.5,x\n").unwrap();
        let e = RawConfig::load(&cfg).unwrap_err().to_string();
        assert!(e.contains("weight.csv") && e.contains("line 2"), "{e}");
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
