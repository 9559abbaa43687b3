//! Structural comparison of JSON reports.

use crate::error::{CliError, CliResult};
use serde_json::Value;
use std::path::{Path, PathBuf};

/// Keys that legitimately change between runs.
const VOLATILE: [&str; 2] = ["runtime_ms", "timings_ms"];

#[derive(Debug, Clone, PartialEq)]
pub struct Difference {
    pub file: String,
    pub pointer: String,
    pub left: String,
    pub right: String,
}

fn numbers_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn walk(file: &str, pointer: String, a: &Value, b: &Value, tol: f64, out: &mut Vec<Difference>) {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            let mut keys: Vec<&String> = x.keys().chain(y.keys()).collect();
            keys.sort();
            keys.dedup();
            for k in keys {
                if VOLATILE.contains(&k.as_str()) {
                    continue;
                }
                let p = format!("{pointer}/{k}");
                match (x.get(k), y.get(k)) {
                    (Some(u), Some(v)) => walk(file, p, u, v, tol, out),
                    (u, v) => out.push(Difference {
                        file: file.into(),
                        pointer: p,
                        left: u.map_or("<missing>".into(), |u| u.to_string()),
                        right: v.map_or("<missing>".into(), |v| v.to_string()),
                    }),
                }
            }
        }
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => {
            for (i, (u, v)) in x.iter().zip(y).enumerate() {
                walk(file, format!("{pointer}/{i}"), u, v, tol, out);
            }
        }
        (Value::Number(x), Value::Number(y)) => {
            let (u, v) = (
                x.as_f64().unwrap_or(f64::NAN),
                y.as_f64().unwrap_or(f64::NAN),
            );
            if x != y && !numbers_close(u, v, tol) {
                out.push(Difference {
                    file: file.into(),
                    pointer,
                    left: x.to_string(),
                    right: y.to_string(),
                });
            }
        }
        _ if a == b => {}
        _ => out.push(Difference {
            file: file.into(),
            pointer,
            left: a.to_string(),
            right: b.to_string(),
        }),
    }
}

fn read_json(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn report_files(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|x| x == "json")
                && p.file_name().is_some_and(|n| n != "manifest.json")
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Compares two report files, or two report directories file by file
/// (the manifest is skipped). Numbers within `tol` relative count as equal.
pub fn diff_paths(a: &Path, b: &Path, tol: f64) -> CliResult<Vec<Difference>> {
    let mut out = Vec::new();
    if a.is_dir() && b.is_dir() {
        let (fa, fb) = (report_files(a)?, report_files(b)?);
        let names = |v: &[PathBuf]| -> Vec<String> {
            v.iter()
                .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
                .collect()
        };
        let (na, nb) = (names(&fa), names(&fb));
        for n in na.iter().filter(|n| !nb.contains(n)) {
            out.push(Difference {
                file: n.clone(),
                pointer: String::new(),
                left: "present".into(),
                right: "<missing>".into(),
            });
        }
        for n in nb.iter().filter(|n| !na.contains(n)) {
            out.push(Difference {
                file: n.clone(),
                pointer: String::new(),
                left: "<missing>".into(),
                right: "present".into(),
            });
        }
        for n in na.iter().filter(|n| nb.contains(n)) {
            let (u, v) = (read_json(&a.join(n))?, read_json(&b.join(n))?);
            walk(n, String::new(), &u, &v, tol, &mut out);
        }
    } else {
        let (u, v) = (read_json(a)?, read_json(b)?);
        let name = a
            .file_name()
            .map_or(String::new(), |n| n.to_string_lossy().into_owned());
        walk(&name, String::new(), &u, &v, tol, &mut out);
    }
    Ok(out)
}
