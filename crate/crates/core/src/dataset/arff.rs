//! Reader for the dense ARFF subset used by the public microarray archives:
//! numeric attributes followed by exactly one nominal class attribute.

use std::path::Path;

use ndarray::Array2;

use super::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

enum Attr {
    Numeric(String),
    Nominal(String, Vec<String>),
}

/// Splits on commas outside single or double quotes.
fn split_fields(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quote: Option<char> = None;
    for ch in line.chars() {
        match quote {
            Some(q) if ch == q => quote = None,
            Some(_) => cur.push(ch),
            None if ch == '\'' || ch == '"' => quote = Some(ch),
            None if ch == ',' => out.push(std::mem::take(&mut cur).trim().to_string()),
            None => cur.push(ch),
        }
    }
    out.push(cur.trim().to_string());
    out
}

fn unquote(s: &str) -> String {
    let s = s.trim();
    if s.len() >= 2
        && ((s.starts_with('\'') && s.ends_with('\'')) || (s.starts_with('"') && s.ends_with('"')))
    {
        s[1..s.len() - 1].to_string()
    } else {
        s.to_string()
    }
}

/// Splits `@attribute <name> <type>` into name and type text; names may be quoted.
fn split_attribute(rest: &str) -> Option<(String, String)> {
    let rest = rest.trim_start();
    let first = rest.chars().next()?;
    if first == '\'' || first == '"' {
        let end = rest[1..].find(first)? + 1;
        Some((rest[1..end].to_string(), rest[end + 1..].trim().to_string()))
    } else {
        let end = rest.find(char::is_whitespace)?;
        Some((rest[..end].to_string(), rest[end..].trim().to_string()))
    }
}

fn starts_with_keyword(line: &str, kw: &str) -> bool {
    line.len() >= kw.len()
        && line[..kw.len()].eq_ignore_ascii_case(kw)
        && line[kw.len()..]
            .chars()
            .next()
            .map_or(true, char::is_whitespace)
}

pub fn load_arff<F: Scalar>(path: impl AsRef<Path>) -> Result<Dataset<F>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_arff(&text, path)
}

pub(crate) fn parse_arff<F: Scalar>(text: &str, path: &Path) -> Result<Dataset<F>> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut attrs: Vec<Attr> = Vec::new();
    let mut seen_relation = false;
    let mut in_data = false;
    let mut values: Vec<F> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if !in_data {
            if starts_with_keyword(line, "@relation") {
                seen_relation = true;
            } else if starts_with_keyword(line, "@attribute") {
                let (name, ty) = split_attribute(&line["@attribute".len()..])
                    .ok_or_else(|| err(lineno, "malformed @attribute line".into()))?;
                if ty.starts_with('{') {
                    if !ty.ends_with('}') {
                        return Err(err(lineno, "unterminated nominal value list".into()));
                    }
                    let vals: Vec<String> = split_fields(&ty[1..ty.len() - 1])
                        .into_iter()
                        .map(|v| unquote(&v))
                        .filter(|v| !v.is_empty())
                        .collect();
                    if vals.is_empty() {
                        return Err(err(lineno, format!("nominal attribute {name} has no values")));
                    }
                    attrs.push(Attr::Nominal(name, vals));
                } else {
                    match ty.to_ascii_lowercase().as_str() {
                        "numeric" | "real" | "integer" => attrs.push(Attr::Numeric(name)),
                        other => {
                            return Err(err(lineno, format!("unknown attribute type {other:?}")))
                        }
                    }
                }
            } else if starts_with_keyword(line, "@data") {
                if !seen_relation {
                    return Err(err(lineno, "@data before @relation".into()));
                }
                let nominal = attrs
                    .iter()
                    .filter(|a| matches!(a, Attr::Nominal(..)))
                    .count();
                if nominal != 1 || !matches!(attrs.last(), Some(Attr::Nominal(..))) {
                    return Err(err(
                        lineno,
                        "exactly one nominal attribute (the class) must be declared last".into(),
                    ));
                }
                if attrs.len() < 2 {
                    return Err(err(lineno, "no feature attributes declared".into()));
                }
                in_data = true;
            } else {
                return Err(err(lineno, format!("unexpected header line {line:?}")));
            }
            continue;
        }

        if line.starts_with('{') {
            return Err(err(lineno, "sparse ARFF rows are not supported".into()));
        }
        let fields = split_fields(line);
        if fields.len() != attrs.len() {
            return Err(err(
                lineno,
                format!(
                    "row has {} values but {} attributes are declared",
                    fields.len(),
                    attrs.len()
                ),
            ));
        }
        for (col, (field, attr)) in fields.iter().zip(&attrs).enumerate() {
            if field == "?" {
                return Err(err(
                    lineno,
                    format!("missing value '?' in column {}; impute before loading", col + 1),
                ));
            }
            match attr {
                Attr::Numeric(name) => {
                    let v: f64 = field.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                        err(lineno, format!("non-numeric value {field:?} for attribute {name}"))
                    })?;
                    values.push(F::lit(v));
                }
                Attr::Nominal(name, vals) => {
                    let v = unquote(field);
                    let id = vals.iter().position(|c| *c == v).ok_or_else(|| {
                        err(lineno, format!("value {v:?} not declared for attribute {name}"))
                    })?;
                    labels.push(id);
                }
            }
        }
    }

    if !in_data {
        return Err(err(text.lines().count(), "missing @data section".into()));
    }
    let Some(Attr::Nominal(_, class_names)) = attrs.pop() else {
        unreachable!("checked at @data");
    };
    let feature_names: Vec<String> = attrs
        .into_iter()
        .map(|a| match a {
            Attr::Numeric(n) => n,
            Attr::Nominal(n, _) => n,
        })
        .collect();
    let n = labels.len();
    let p = feature_names.len();
    let features = Array2::from_shape_vec((n, p), values)
        .map_err(|e| Error::dataset(e.to_string()))?;
    Dataset::new(features, labels, feature_names, class_names)
}
