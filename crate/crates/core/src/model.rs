//! Token and template model shared by every stage of the pipeline.

use std::fmt;

/// The literal marking a variable position.
pub const WILDCARD: &str = "<*>";

/// Dense, creation-ordered template identifier (0-based).
pub type TemplateId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    /// Fixed text, indexable.
    Constant,
    /// Exactly `<*>`. Never indexed.
    Wildcard,
    /// Text with at least one embedded `<*>` plus other characters, e.g. `total=<*>,`.
    Masked,
}

impl TokenKind {
    /// Classifies token text purely by its shape.
    pub fn classify(text: &str) -> TokenKind {
        if text == WILDCARD {
            TokenKind::Wildcard
        } else if text.contains(WILDCARD) {
            TokenKind::Masked
        } else {
            TokenKind::Constant
        }
    }
}

/// One whitespace-delimited unit of a message.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    text: String,
    kind: TokenKind,
}

impl Token {
    /// Builds a token, deriving its kind from the text.
    ///
    /// Panics if `text` is empty or contains whitespace; tokens only come out
    /// of the tokenizer, which never produces either.
    pub fn new(text: impl Into<String>) -> Token {
        let text = text.into();
        assert!(!text.is_empty(), "token text must not be empty");
        assert!(
            !text.chars().any(char::is_whitespace),
            "token text must not contain whitespace: {text:?}"
        );
        let kind = TokenKind::classify(&text);
        Token { text, kind }
    }

    pub fn wildcard() -> Token {
        Token {
            text: WILDCARD.to_string(),
            kind: TokenKind::Wildcard,
        }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn kind(&self) -> TokenKind {
        self.kind
    }

    pub fn is_wildcard(&self) -> bool {
        self.kind == TokenKind::Wildcard
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// A mutable event template.
///
/// The token count is fixed at creation. Positions may only move from
/// non-wildcard to wildcard, never back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    id: TemplateId,
    tokens: Vec<Token>,
    occurrences: u64,
}

impl Template {
    pub(crate) fn new(id: TemplateId, tokens: Vec<Token>) -> Template {
        Template {
            id,
            tokens,
            occurrences: 1,
        }
    }

    pub fn id(&self) -> TemplateId {
        self.id
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn occurrences(&self) -> u64 {
        self.occurrences
    }

    pub(crate) fn record_occurrence(&mut self) {
        self.occurrences += 1;
    }

    /// Turns position `pos` into a wildcard, returning the replaced token if
    /// it was not already a wildcard.
    pub(crate) fn generalize(&mut self, pos: usize) -> Option<Token> {
        let slot = &mut self.tokens[pos];
        if slot.is_wildcard() {
            return None;
        }
        Some(std::mem::replace(slot, Token::wildcard()))
    }

    /// Renders the template with single spaces between tokens.
    pub fn text(&self) -> String {
        template_string(&self.tokens)
    }
}

/// Joins tokens with a single space.
pub fn template_string(tokens: &[Token]) -> String {
    let mut out = String::with_capacity(tokens.iter().map(|t| t.text.len() + 1).sum());
    for (i, tok) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&tok.text);
    }
    out
}

/// Per-line parser output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRecord {
    /// 1-based line number in the input.
    pub line_id: usize,
    /// Message content after header extraction.
    pub content: String,
    pub event_id: TemplateId,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Token> {
        s.split_whitespace().map(Token::new).collect()
    }

    #[test]
    fn classify_kinds() {
        assert_eq!(Token::new("<*>").kind(), TokenKind::Wildcard);
        assert_eq!(Token::new("total=<*>,").kind(), TokenKind::Masked);
        assert_eq!(Token::new("<*><*>").kind(), TokenKind::Masked);
        assert_eq!(Token::new("from").kind(), TokenKind::Constant);
        assert_eq!(Token::new("<*").kind(), TokenKind::Constant);
    }

    #[test]
    #[should_panic]
    fn empty_token_rejected() {
        Token::new("");
    }

    #[test]
    fn renders_template_strings() {
        let t = vec![
            Token::new("Invalid"),
            Token::new("user"),
            Token::wildcard(),
            Token::new("from"),
            Token::wildcard(),
        ];
        assert_eq!(template_string(&t), "Invalid user <*> from <*>");
        assert_eq!(template_string(&[Token::new("a")]), "a");
        assert_eq!(
            template_string(&[Token::new("total=<*>,"), Token::new("active=<*>")]),
            "total=<*>, active=<*>"
        );
        assert_eq!(template_string(&[]), "");
    }

    #[test]
    fn generalize_is_one_way() {
        let mut t = Template::new(0, toks("a b c"));
        assert_eq!(t.generalize(1), Some(Token::new("b")));
        assert_eq!(t.generalize(1), None);
        assert_eq!(t.text(), "a <*> c");
        assert_eq!(t.len(), 3);
        assert_eq!(t.occurrences(), 1);
    }
}
