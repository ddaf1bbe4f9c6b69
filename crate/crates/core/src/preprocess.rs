//! Header extraction, regex masking, tokenization and digit masking.
//!
//! Header formats follow the loghub convention: `<Field>` placeholders
//! separated by literal text, where the literal text is itself a regex
//! fragment (so `\[<Time>\]` or `(\[<PID>\])?` work as in the public
//! benchmark settings) and any run of spaces matches any run of whitespace.

use std::path::Path;

use regex::{NoExpand, Regex};

use crate::error::{Error, Result};
use crate::model::{Token, TokenKind, WILDCARD};

const CONTENT_FIELD: &str = "<Content>";

/// Splits raw bytes into lines, decoding UTF-8 lossily and dropping the
/// line terminator (`\n` or `\r\n`). A trailing newline does not start an
/// extra line.
pub fn split_lines(bytes: &[u8]) -> Vec<String> {
    let text = String::from_utf8_lossy(bytes);
    text.lines().map(str::to_string).collect()
}

pub fn read_lines(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(split_lines(&bytes))
}

/// A compiled header format.
#[derive(Debug, Clone)]
pub struct LogFormat {
    source: String,
    pattern: Regex,
}

impl LogFormat {
    pub fn parse(format: &str) -> Result<LogFormat> {
        let content_count = format.matches(CONTENT_FIELD).count();
        if content_count != 1 {
            return Err(Error::Config(format!(
                "log_format must contain exactly one {CONTENT_FIELD} placeholder, found {content_count}"
            )));
        }

        let field = Regex::new(r"<[^<>]+>").expect("static regex");
        let spaces = Regex::new(r" +").expect("static regex");
        let mut pattern = String::from("^");
        let mut last = 0;
        for m in field.find_iter(format) {
            pattern.push_str(&spaces.replace_all(&format[last..m.start()], NoExpand(r"\s+")));
            if m.as_str() == CONTENT_FIELD {
                pattern.push_str("(?P<Content>.*?)");
            } else {
                pattern.push_str("(?:.*?)");
            }
            last = m.end();
        }
        pattern.push_str(&spaces.replace_all(&format[last..], NoExpand(r"\s+")));
        pattern.push('$');

        let pattern = Regex::new(&pattern).map_err(|source| Error::Regex {
            pattern: format.to_string(),
            source,
        })?;
        Ok(LogFormat {
            source: format.to_string(),
            pattern,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.source
    }

    /// The `<Content>` field of `raw`, or `None` if the line does not match.
    pub fn extract<'a>(&self, raw: &'a str) -> Option<&'a str> {
        self.pattern
            .captures(raw.trim())
            .and_then(|c| c.name("Content"))
            .map(|m| m.as_str())
    }
}

/// Lenient header extraction: non-matching lines come back whole.
pub fn extract_content<'a>(raw: &'a str, format: &LogFormat) -> &'a str {
    format.extract(raw).unwrap_or(raw)
}

/// Ordered list of masking regexes.
#[derive(Debug, Clone, Default)]
pub struct RegexSet {
    regexes: Vec<Regex>,
}

impl RegexSet {
    pub fn compile<S: AsRef<str>>(patterns: &[S]) -> Result<RegexSet> {
        let regexes = patterns
            .iter()
            .map(|p| {
                Regex::new(p.as_ref()).map_err(|source| Error::Regex {
                    pattern: p.as_ref().to_string(),
                    source,
                })
            })
            .collect::<Result<_>>()?;
        Ok(RegexSet { regexes })
    }

    pub fn len(&self) -> usize {
        self.regexes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regexes.is_empty()
    }
}

/// Replaces every match of every regex, in order, with `<*>`.
pub fn apply_regexes(content: &str, regexes: &RegexSet) -> String {
    let mut out = content.to_string();
    for re in &regexes.regexes {
        if let std::borrow::Cow::Owned(replaced) = re.replace_all(&out, NoExpand(WILDCARD)) {
            out = replaced;
        }
    }
    out
}

/// Replaces digit runs in alphanumeric tokens with `<*>` and merges
/// adjacent wildcards. Tokens without digits, and pure-digit tokens, come
/// back unchanged.
pub fn mask_token(text: &str) -> String {
    let has_digit = text.bytes().any(|b| b.is_ascii_digit());
    let has_other = text.bytes().any(|b| !b.is_ascii_digit());
    if !(has_digit && has_other) {
        return text.to_string();
    }

    let mut out = String::with_capacity(text.len() + 4);
    let mut in_digits = false;
    for ch in text.chars() {
        if ch.is_ascii_digit() {
            if !in_digits {
                out.push_str(WILDCARD);
                in_digits = true;
            }
        } else {
            out.push(ch);
            in_digits = false;
        }
    }
    merge_wildcards(out)
}

fn merge_wildcards(mut text: String) -> String {
    const DOUBLE: &str = "<*><*>";
    while text.contains(DOUBLE) {
        text = text.replace(DOUBLE, WILDCARD);
    }
    text
}

/// Splits on whitespace runs and masks each token.
pub fn tokenize_and_mask(content: &str) -> Vec<Token> {
    content
        .split_whitespace()
        .map(|t| Token::new(mask_token(t)))
        .collect()
}

/// Drops pure wildcard tokens; masked tokens are kept.
pub fn wildcard_filter(tokens: &[Token]) -> Vec<Token> {
    tokens
        .iter()
        .filter(|t| t.kind() != TokenKind::Wildcard)
        .cloned()
        .collect()
}

/// Header format plus masking regexes, compiled once per dataset.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    format: LogFormat,
    regexes: RegexSet,
    strict: bool,
}

impl Preprocessor {
    pub fn new(format: LogFormat, regexes: RegexSet) -> Preprocessor {
        Preprocessor {
            format,
            regexes,
            strict: false,
        }
    }

    /// In strict mode lines that do not match the header format are errors.
    pub fn strict(mut self, strict: bool) -> Preprocessor {
        self.strict = strict;
        self
    }

    pub fn format(&self) -> &LogFormat {
        &self.format
    }

    pub fn content<'a>(&self, line_id: usize, raw: &'a str) -> Result<&'a str> {
        match self.format.extract(raw) {
            Some(content) => Ok(content),
            None if self.strict => Err(Error::HeaderMismatch {
                line: line_id,
                format: self.format.as_str().to_string(),
            }),
            None => Ok(raw),
        }
    }

    /// Regex masking followed by tokenization and digit masking.
    pub fn tokens(&self, content: &str) -> Vec<Token> {
        tokenize_and_mask(&apply_regexes(content, &self.regexes))
    }
}
