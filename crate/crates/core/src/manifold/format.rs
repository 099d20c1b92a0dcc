//! The manifold file format.
//!
//! One assignment per line, `#` comments, UTF-8:
//!
//! ```text
//! dim = 2
//! name = sphere
//! domain = [0.3, 2.8] [0, 3]
//! g 1 1 = 1
//! g 2 2 = sin(t1)^2
//! Q 1 1 2 = 2 / t2^3
//! ```
//!
//! `dim` and `domain` are required and may appear anywhere; `name` is
//! optional.  Metric lines need `i <= j`, cubic lines `i <= j <= k`, and a
//! repeated key is an error.  Unlisted entries are zero.

use super::{ManifoldSpec, SpecError};
use crate::expr::{ParseError, ScalarField};
use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("missing `dim` assignment")]
    MissingDim,
    #[error("missing `domain` assignment")]
    MissingDomain,
    #[error("line {line}: {source}")]
    Expr { line: usize, source: ParseError },
    #[error("line {line}: {source}")]
    Spec { line: usize, source: SpecError },
}

fn err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Line {
        line,
        message: message.into(),
    }
}

pub(super) fn parse(text: &str) -> Result<ManifoldSpec, FormatError> {
    // First pass: find `dim` so entry expressions can be parsed against it.
    let mut dim: Option<(usize, usize)> = None; // (value, line)
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let Some((key, value)) = split_assignment(raw) else {
            continue;
        };
        if key == "dim" {
            if dim.is_some() {
                return Err(err(line, "duplicate `dim`"));
            }
            let d: usize = value
                .parse()
                .map_err(|_| err(line, format!("invalid dimension `{value}`")))?;
            dim = Some((d, line));
        }
    }
    let Some((dim, _)) = dim else {
        return Err(FormatError::MissingDim);
    };

    let mut name: Option<String> = None;
    let mut domain: Option<(Vec<(f64, f64)>, usize)> = None;
    let mut g_entries: Vec<(usize, usize, ScalarField)> = Vec::new();
    let mut q_entries: Vec<(usize, usize, usize, ScalarField)> = Vec::new();
    let mut last_line = 0;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        last_line = line;
        let Some((key, value)) = split_assignment(raw) else {
            let stripped = strip_comment(raw).trim();
            if !stripped.is_empty() {
                return Err(err(line, format!("expected `key = value`, got `{stripped}`")));
            }
            continue;
        };
        let mut words = key.split_whitespace();
        let head = words.next().unwrap_or("");
        match head {
            "dim" => {}
            "name" => {
                if name.is_some() {
                    return Err(err(line, "duplicate `name`"));
                }
                if value.is_empty() {
                    return Err(err(line, "empty name"));
                }
                name = Some(value.to_string());
            }
            "domain" => {
                if domain.is_some() {
                    return Err(err(line, "duplicate `domain`"));
                }
                domain = Some((parse_domain(value, line)?, line));
            }
            "g" => {
                let idx = parse_indices(words, 2, line, "g")?;
                let field = parse_field(value, dim, line)?;
                g_entries.push((idx[0], idx[1], field));
                check_sorted(&idx, line, "g")?;
            }
            "Q" => {
                let idx = parse_indices(words, 3, line, "Q")?;
                let field = parse_field(value, dim, line)?;
                q_entries.push((idx[0], idx[1], idx[2], field));
                check_sorted(&idx, line, "Q")?;
            }
            other => {
                return Err(err(line, format!("unknown key `{other}`")));
            }
        }
    }

    let Some((domain, domain_line)) = domain else {
        return Err(FormatError::MissingDomain);
    };
    ManifoldSpec::from_parts(
        name.unwrap_or_else(|| "unnamed".to_string()),
        dim,
        domain,
        g_entries,
        q_entries,
    )
    .map_err(|source| match &source {
        SpecError::DomainLength { .. } | SpecError::EmptyInterval { .. } => FormatError::Spec {
            line: domain_line,
            source,
        },
        _ => FormatError::Spec {
            line: last_line.max(1),
            source,
        },
    })
}

/// Splits `key = value` after stripping comments; returns `None` for
/// blank/comment lines.  The key keeps interior whitespace (`g 1 2`).
fn split_assignment(raw: &str) -> Option<(&str, &str)> {
    let stripped = strip_comment(raw);
    let eq = stripped.find('=')?;
    let key = stripped[..eq].trim();
    let value = stripped[eq + 1..].trim();
    if key.is_empty() {
        return None;
    }
    Some((key, value))
}

fn strip_comment(raw: &str) -> &str {
    match raw.find('#') {
        Some(pos) => &raw[..pos],
        None => raw,
    }
}

fn parse_indices<'a>(
    words: impl Iterator<Item = &'a str>,
    want: usize,
    line: usize,
    what: &str,
) -> Result<Vec<usize>, FormatError> {
    let idx: Result<Vec<usize>, _> = words.map(|w| w.parse::<usize>()).collect();
    let idx = idx.map_err(|_| err(line, format!("`{what}` indices must be integers")))?;
    if idx.len() != want {
        return Err(err(
            line,
            format!("`{what}` takes {want} indices, got {}", idx.len()),
        ));
    }
    Ok(idx)
}

fn check_sorted(idx: &[usize], line: usize, what: &str) -> Result<(), FormatError> {
    if idx.windows(2).any(|w| w[0] > w[1]) {
        return Err(err(
            line,
            format!(
                "`{what} {}` violates the ascending index order rule",
                idx.iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            ),
        ));
    }
    Ok(())
}

fn parse_field(src: &str, dim: usize, line: usize) -> Result<ScalarField, FormatError> {
    if src.is_empty() {
        return Err(err(line, "empty expression"));
    }
    ScalarField::parse(src, dim).map_err(|source| FormatError::Expr { line, source })
}

/// `[a1, b1] [a2, b2] ...` with plain decimal numbers.
fn parse_domain(src: &str, line: usize) -> Result<Vec<(f64, f64)>, FormatError> {
    let mut out = Vec::new();
    let mut rest = src.trim();
    while !rest.is_empty() {
        if !rest.starts_with('[') {
            return Err(err(line, format!("expected `[` in domain, got `{rest}`")));
        }
        let close = rest
            .find(']')
            .ok_or_else(|| err(line, "unterminated `[` in domain"))?;
        let body = &rest[1..close];
        let parts: Vec<&str> = body.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(err(line, format!("interval `[{body}]` needs two endpoints")));
        }
        let lo: f64 = parts[0]
            .parse()
            .map_err(|_| err(line, format!("bad number `{}`", parts[0])))?;
        let hi: f64 = parts[1]
            .parse()
            .map_err(|_| err(line, format!("bad number `{}`", parts[1])))?;
        out.push((lo, hi));
        rest = rest[close + 1..].trim_start();
    }
    if out.is_empty() {
        return Err(err(line, "domain lists no intervals"));
    }
    Ok(out)
}

pub(super) fn write(spec: &ManifoldSpec) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let n = spec.dim();
    let _ = writeln!(out, "dim = {n}");
    let _ = writeln!(out, "name = {}", spec.name());
    let intervals: Vec<String> = spec
        .domain()
        .iter()
        .map(|&(a, b)| format!("[{a:?}, {b:?}]"))
        .collect();
    let _ = writeln!(out, "domain = {}", intervals.join(" "));
    for i in 1..=n {
        for j in i..=n {
            let f = spec.metric_entry(i, j);
            if !f.is_zero() {
                let _ = writeln!(out, "g {i} {j} = {f}");
            }
        }
    }
    for i in 1..=n {
        for j in i..=n {
            for k in j..=n {
                let f = spec.cubic_entry(i, j, k);
                if !f.is_zero() {
                    let _ = writeln!(out, "Q {i} {j} {k} = {f}");
                }
            }
        }
    }
    out
}
