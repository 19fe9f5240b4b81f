//! Reading observation files: one positive number per line, or a
//! single-column CSV with an optional header. `#` starts a comment.

use std::fs;
use std::io::Read;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}: {msg}")]
    Row { path: String, line: usize, msg: String },
    #[error("{path}: no observations found")]
    Empty { path: String },
}

/// Read observations from `path`, or from stdin when `path` is `-`.
pub fn read_observations(path: &Path) -> Result<Vec<f64>, InputError> {
    let name = path.display().to_string();
    let text = if name == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map(|_| s)
    } else {
        fs::read_to_string(path)
    }
    .map_err(|source| InputError::Io { path: name.clone(), source })?;
    parse_observations(&text, &name)
}

pub fn parse_observations(text: &str, name: &str) -> Result<Vec<f64>, InputError> {
    let mut out = Vec::new();
    let mut seen_row = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row_err = |msg: String| InputError::Row { path: name.to_string(), line: i + 1, msg };
        // A trailing delimiter is tolerated; a second column is not.
        let field = line.strip_suffix(',').unwrap_or(line).trim();
        if field.contains(',') || field.contains(';') || field.contains('\t') {
            return Err(row_err(format!("expected a single column, got '{line}'")));
        }
        let field = field.trim_matches('"');
        let first = !seen_row;
        seen_row = true;
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => out.push(v),
            Ok(v) => return Err(row_err(format!("observations must be positive and finite, got {v}"))),
            // The first row may be a column header.
            Err(_) if first && field.chars().any(|c| c.is_alphabetic()) && !is_special_float(field) => {}
            Err(_) => return Err(row_err(format!("cannot parse '{field}' as a number"))),
        }
    }
    if out.is_empty() {
        return Err(InputError::Empty { path: name.to_string() });
    }
    Ok(out)
}

fn is_special_float(s: &str) -> bool {
    matches!(s.to_ascii_lowercase().trim_start_matches(['+', '-']), "inf" | "infinity" | "nan")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Vec<f64>, InputError> {
        parse_observations(s, "t")
    }

    #[test]
    fn plain_and_csv() {
        assert_eq!(parse("1\n2.5\n# note\n\n3 # trailing\n").unwrap(), vec![1.0, 2.5, 3.0]);
        assert_eq!(parse("strength\n1.5,\n\"2\"\n").unwrap(), vec![1.5, 2.0]);
    }

    #[test]
    fn row_errors_carry_line_numbers() {
        let line = |s| match parse(s) {
            Err(InputError::Row { line, .. }) => line,
            other => panic!("unexpected {other:?}"),
        };
        assert_eq!(line("1\n2\nx\n"), 3);
        assert_eq!(line("# h\n1\n-2\n"), 3);
        assert_eq!(line("0\n"), 1);
        assert_eq!(line("1,2\n"), 1);
        assert_eq!(line("header\nother\n"), 2);
        assert_eq!(line("nan\n"), 1);
        assert!(matches!(parse("# only comments\n"), Err(InputError::Empty { .. })));
        assert!(matches!(parse("value\n"), Err(InputError::Empty { .. })));
    }
}
