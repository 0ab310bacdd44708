//! Tweet normalization and tokenization.
//!
//! Links become `<url>`, mentions become `<user>`, hashtags lose their `#`,
//! everything is lowercased and any character that is not alphanumeric acts
//! as a token separator.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

pub const URL_TOKEN: &str = "<url>";
pub const USER_TOKEN: &str = "<user>";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDoc {
    pub id: String,
    pub tokens: Vec<String>,
}

impl TokenizedDoc {
    pub fn from_text(id: impl Into<String>, text: &str) -> Self {
        TokenizedDoc {
            id: id.into(),
            tokens: preprocess(text),
        }
    }
}

fn url_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)(?:https?://|www\.)\S+").unwrap())
}

fn mention_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    // A mention must not be glued to a preceding word character (e-mail addresses).
    RE.get_or_init(|| Regex::new(r"(^|[^\w@])@(\w+)").unwrap())
}

/// Tokenizes a tweet for feature extraction.
pub fn preprocess(text: &str) -> Vec<String> {
    tokenize(text, true)
}

/// Same normalization as [`preprocess`] except that mentions keep their
/// handle text, so keyword queries can target accounts such as `kkmputrajaya`.
pub fn match_tokens(text: &str) -> Vec<String> {
    tokenize(text, false)
}

fn tokenize(text: &str, mask_mentions: bool) -> Vec<String> {
    let text = url_re().replace_all(text, " <url> ");
    let replacement = if mask_mentions { "$1 <user> " } else { "$1 $2 " };
    let text = mention_re().replace_all(&text, replacement);
    let lowered = text.to_lowercase();

    let mut tokens = Vec::new();
    for raw in lowered.split_whitespace() {
        if raw == URL_TOKEN || raw == USER_TOKEN {
            tokens.push(raw.to_string());
            continue;
        }
        let mut current = String::new();
        for ch in raw.chars() {
            if ch.is_alphanumeric() {
                current.push(ch);
            } else if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            tokens.push(current);
        }
    }
    tokens
}
