//! `key=value` configuration files, expanded into flags ahead of the
//! command-line ones so that explicit flags win.

use std::path::Path;

use serde_json::{Map, Value};

use crate::CliError;

/// Replaces `--config <file>` (or `--config=<file>`) by the flags the file
/// holds, inserted right after the subcommand name.
pub fn expand_config(args: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut out = Vec::with_capacity(args.len());
    let mut path = None;
    let mut iter = args.into_iter();
    while let Some(a) = iter.next() {
        if a == "--config" {
            path = Some(iter.next().ok_or_else(|| CliError::Usage("--config needs a file".into()))?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            out.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(out);
    };
    let flags = read_config(Path::new(&path))?;
    let at = out.iter().skip(1).position(|a| !a.starts_with('-')).map_or(out.len(), |i| i + 2);
    let tail = out.split_off(at.min(out.len()));
    out.extend(flags);
    out.extend(tail);
    Ok(out)
}

fn read_config(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut flags = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{}:{}: expected key=value", path.display(), no + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        match value {
            "true" => flags.push(format!("--{key}")),
            "false" => {}
            _ => flags.push(format!("--{key}={value}")),
        }
    }
    Ok(flags)
}

/// The `key=value` form of a JSON config echo.
pub fn config_lines(config: &Map<String, Value>) -> String {
    let mut out = String::new();
    for (k, v) in config {
        let value = match v {
            Value::Null => continue,
            Value::String(s) => s.clone(),
            Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(","),
            other => scalar(other),
        };
        out.push_str(k);
        out.push('=');
        out.push_str(&value);
        out.push('\n');
    }
    out
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn file_flags_precede_explicit_ones() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# sweep\na = 2\ns-list=0.25,0.75\nstrict=true\noracle=false").unwrap();
        let args = ["oscillax", "sweep", "--config", f.path().to_str().unwrap(), "--a", "0.5"]
            .map(String::from)
            .to_vec();
        let out = expand_config(args).unwrap();
        assert_eq!(out, ["oscillax", "sweep", "--a=2", "--s-list=0.25,0.75", "--strict", "--a", "0.5"]);
    }

    #[test]
    fn malformed_lines_are_usage_errors() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "a 2").unwrap();
        let args = ["oscillax", "eval", "--config", f.path().to_str().unwrap()].map(String::from).to_vec();
        assert!(matches!(expand_config(args), Err(CliError::Usage(_))));
    }

    #[test]
    fn echo_round_trips_lists() {
        let v: Value = serde_json::json!({"a": 2.0, "s-list": [0.25, 0.75], "family": "packet", "modulation": null});
        assert_eq!(config_lines(v.as_object().unwrap()), "a=2.0\nfamily=packet\ns-list=0.25,0.75\n");
    }
}
