use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// A lowercased word (maximal alphanumeric run) or a single punctuation char.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Token(String);

impl Token {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }

    /// True for punctuation/symbol tokens.
    pub fn is_punct(&self) -> bool {
        !self.0.chars().any(char::is_alphanumeric)
    }

    /// Whether `s` is something [`tokenize`] could have produced.
    pub fn is_valid(s: &str) -> bool {
        let mut chars = s.chars();
        match chars.next() {
            None => false,
            Some(c) if c.is_whitespace() => false,
            Some(c) if c.is_alphanumeric() => chars.all(char::is_alphanumeric),
            Some(_) => chars.next().is_none(),
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Lowercase `text` and split it into word and punctuation tokens.
///
/// Words are maximal runs of alphanumeric characters; every other
/// non-whitespace character becomes a token of its own.
pub fn tokenize(text: &str) -> Vec<Token> {
    let lower = text.to_lowercase();
    let mut tokens = Vec::new();
    let mut word = String::new();
    for c in lower.chars() {
        if c.is_alphanumeric() {
            word.push(c);
            continue;
        }
        if !word.is_empty() {
            tokens.push(Token(core::mem::take(&mut word)));
        }
        if !c.is_whitespace() {
            tokens.push(Token(String::from(c)));
        }
    }
    if !word.is_empty() {
        tokens.push(Token(word));
    }
    tokens
}
