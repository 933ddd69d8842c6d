//! `key = value` text files shared by system, covering and representation inputs.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Split into entries; blank lines and `#` comments are skipped.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::File {
            line: k + 1,
            msg: format!("expected `key = value`, got `{line}`"),
        })?;
        out.push(Entry {
            line: k + 1,
            key: key.trim().to_string(),
            value: value.trim().to_string(),
        });
    }
    Ok(out)
}

/// Comma-separated name list.
pub fn split_names(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Parse a `Name[fiber]` key into its parts.
pub fn bracket_key(key: &str) -> Option<(&str, &str)> {
    let (name, rest) = key.split_once('[')?;
    let inner = rest.strip_suffix(']')?;
    Some((name.trim(), inner.trim()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_and_keys() {
        let e = parse_entries("# kdv\nindependent = x, t\n\nequation = u_t = u*u_x\n").unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[1].value, "u_t = u*u_x");
        assert_eq!(split_names(&e[0].value), vec!["x", "t"]);
        assert_eq!(bracket_key("V_x[w]"), Some(("V_x", "w")));
        assert!(parse_entries("nonsense").is_err());
    }
}
