//! `[id]` headed blocks of `key = value` lines, shared by fixtures and config.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecordError {
    #[error("{file}:{line}: {msg}")]
    Syntax { file: String, line: usize, msg: String },
    #[error("{file}: no records")]
    Empty { file: String },
    #[error("{file}: record [{id}] missing field `{field}`")]
    Missing { file: String, id: String, field: String },
    #[error("{file}: record [{id}] field `{field}`: {msg}")]
    Field { file: String, id: String, field: String, msg: String },
}

#[derive(Clone, Debug, Default)]
pub struct Record {
    pub id: String,
    pub line: usize,
    pub fields: BTreeMap<String, String>,
}

impl Record {
    pub fn get<'a>(&'a self, file: &str, key: &str) -> Result<&'a str, RecordError> {
        self.fields.get(key).map(|s| s.as_str()).ok_or_else(|| RecordError::Missing {
            file: file.into(),
            id: self.id.clone(),
            field: key.into(),
        })
    }

    pub fn field_error(&self, file: &str, key: &str, msg: impl ToString) -> RecordError {
        RecordError::Field { file: file.into(), id: self.id.clone(), field: key.into(), msg: msg.to_string() }
    }
}

/// Lines before the first header go to a record with an empty id.
pub fn parse_records(file: &str, text: &str) -> Result<Vec<Record>, RecordError> {
    let mut out: Vec<Record> = Vec::new();
    let mut cur = Record::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let id = rest.strip_suffix(']').ok_or_else(|| RecordError::Syntax {
                file: file.into(),
                line: i + 1,
                msg: "unterminated header".into(),
            })?;
            if !cur.id.is_empty() || !cur.fields.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            cur.id = id.trim().to_string();
            cur.line = i + 1;
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| RecordError::Syntax {
            file: file.into(),
            line: i + 1,
            msg: format!("expected `key = value`, got {line:?}"),
        })?;
        let k = k.trim().to_string();
        if k.is_empty() {
            return Err(RecordError::Syntax { file: file.into(), line: i + 1, msg: "empty key".into() });
        }
        if cur.fields.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(RecordError::Syntax { file: file.into(), line: i + 1, msg: format!("duplicate key `{k}`") });
        }
    }
    if !cur.id.is_empty() || !cur.fields.is_empty() {
        out.push(cur);
    }
    if out.is_empty() {
        return Err(RecordError::Empty { file: file.into() });
    }
    Ok(out)
}

/// Splits a comma list, ignoring commas inside `<...>` or `(...)`.
pub fn split_list(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '<' | '(' => depth += 1,
            '>' | ')' => depth -= 1,
            _ => {}
        }
        if c == ',' && depth == 0 {
            out.push(cur.trim().to_string());
            cur.clear();
        } else {
            cur.push(c);
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_blocks() {
        let r = parse_records("t", "# c\n[x]\na = 1\nb = 2, 3\n[y]\na=4\n").unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].fields["b"], "2, 3");
        assert_eq!(r[1].id, "y");
    }

    #[test]
    fn empty_is_error() {
        assert!(matches!(parse_records("t", "\n# nothing\n"), Err(RecordError::Empty { .. })));
        assert!(parse_records("t", "[x]\nnot a pair\n").is_err());
    }

    #[test]
    fn split_respects_brackets() {
        assert_eq!(split_list("<1,a>s, (ab)^n, b"), vec!["<1,a>s", "(ab)^n", "b"]);
    }
}
