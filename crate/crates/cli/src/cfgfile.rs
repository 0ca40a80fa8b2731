//! `key = value` config files: UTF-8, `#` starts a comment, blank lines
//! ignored. Flags always override file values.

use std::collections::BTreeMap;
use std::path::Path;

pub fn load(path: &Path) -> Result<BTreeMap<String, String>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config file {}: {}", path.display(), e))?;
    parse(&text).map_err(|e| format!("{}: {}", path.display(), e))
}

pub fn parse(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("line {}: expected `key = value`", lineno + 1));
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(format!("line {}: empty key", lineno + 1));
        }
        map.insert(key.to_string(), value.to_string());
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_comments_and_blanks() {
        let map = parse("n = 2\nL = 1,2  # anisotropy\n\n# full-line comment\nseed=7\n").unwrap();
        assert_eq!(map["n"], "2");
        assert_eq!(map["L"], "1,2");
        assert_eq!(map["seed"], "7");
        assert_eq!(map.len(), 3);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(parse("just a line\n").is_err());
        assert!(parse("= 3\n").is_err());
    }
}
