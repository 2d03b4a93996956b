//! Password dictionaries and their on-disk format: one candidate per
//! line, with backslash escapes so arbitrary octet passwords survive a
//! line-oriented file.

use thiserror::Error;

/// An ordered list of candidate passwords. Attacks scan it front to
/// back and stop at the first match.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dictionary {
    candidates: Vec<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("dictionary line {line}: {reason}")]
pub struct DictionaryParseError {
    pub line: usize,
    pub reason: String,
}

impl Dictionary {
    pub fn new(candidates: Vec<Vec<u8>>) -> Self {
        Dictionary { candidates }
    }

    pub fn candidates(&self) -> &[Vec<u8>] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Parse the line-oriented file format, unescaping each line.
    pub fn parse(text: &str) -> Result<Dictionary, DictionaryParseError> {
        let mut candidates = Vec::new();
        for (index, line) in text.lines().enumerate() {
            let bytes = unescape_bytes(line).map_err(|reason| DictionaryParseError {
                line: index + 1,
                reason,
            })?;
            candidates.push(bytes);
        }
        Ok(Dictionary { candidates })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for candidate in &self.candidates {
            out.push_str(&escape_bytes(candidate));
            out.push('\n');
        }
        out
    }
}

/// Escape an octet string for one dictionary line: printable ASCII is
/// kept, backslash and everything else becomes an escape sequence.
pub fn escape_bytes(bytes: &[u8]) -> String {
    let mut out = String::new();
    for &b in bytes {
        match b {
            b'\\' => out.push_str("\\\\"),
            b'\n' => out.push_str("\\n"),
            b'\r' => out.push_str("\\r"),
            b'\t' => out.push_str("\\t"),
            0 => out.push_str("\\0"),
            0x20..=0x7e => out.push(b as char),
            _ => out.push_str(&format!("\\x{b:02x}")),
        }
    }
    out
}

/// Invert [`escape_bytes`].
pub fn unescape_bytes(line: &str) -> Result<Vec<u8>, String> {
    let mut out = Vec::new();
    let mut chars = line.bytes();
    while let Some(b) = chars.next() {
        if b != b'\\' {
            out.push(b);
            continue;
        }
        match chars.next() {
            Some(b'\\') => out.push(b'\\'),
            Some(b'n') => out.push(b'\n'),
            Some(b'r') => out.push(b'\r'),
            Some(b't') => out.push(b'\t'),
            Some(b'0') => out.push(0),
            Some(b'x') => {
                let hi = chars.next().ok_or("truncated \\x escape")?;
                let lo = chars.next().ok_or("truncated \\x escape")?;
                let hex = [hi, lo];
                let s = std::str::from_utf8(&hex).map_err(|_| "bad \\x escape")?;
                out.push(u8::from_str_radix(s, 16).map_err(|_| "bad \\x escape")?);
            }
            other => return Err(format!("unknown escape {:?}", other.map(|c| c as char))),
        }
    }
    Ok(out)
}
