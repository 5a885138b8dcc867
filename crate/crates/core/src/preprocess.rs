//! Tweet cleaning: URL and invisible-character removal, mention and hashtag
//! stripping, tokenization and stopword removal.
//!
//! [`clean`] runs the stages in this order:
//! `remove_urls_and_noise -> strip_mentions_and_hashtags -> tokenize -> remove_stopwords`.
//! Stopword matching needs tokens, so mentions and hashtag signs are handled
//! on the raw text first. Bundled stopword lists contain no `#` or `@` forms,
//! so the result is the same as removing stopwords before the hashtag pass.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;

use crate::corpus::Language;
use crate::error::{Error, Result};

const DUTCH_STOPWORDS: &str = include_str!("../data/stopwords/dutch.txt");
const ENGLISH_STOPWORDS: &str = include_str!("../data/stopwords/english.txt");
const SPANISH_STOPWORDS: &str = include_str!("../data/stopwords/spanish.txt");

fn url_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)(?:https?://|www\.)\S*").unwrap())
}

fn invisible_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[\p{Cc}\p{Cf}]").unwrap())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessConfig {
    pub language: Language,
    pub remove_urls: bool,
    pub remove_invisible: bool,
    pub strip_mentions: bool,
    pub strip_hashtag_sign: bool,
    pub remove_stopwords: bool,
    pub lowercase: bool,
    pub stopwords: BTreeSet<String>,
}

impl PreprocessConfig {
    /// Every stage enabled, with the bundled stopword list for `language`.
    pub fn for_language(language: Language) -> Self {
        PreprocessConfig {
            language,
            remove_urls: true,
            remove_invisible: true,
            strip_mentions: true,
            strip_hashtag_sign: true,
            remove_stopwords: true,
            lowercase: true,
            stopwords: bundled_stopwords(language),
        }
    }

    /// Every stage disabled; `clean` reduces to a case-preserving `tokenize`.
    pub fn passthrough(language: Language) -> Self {
        PreprocessConfig {
            language,
            remove_urls: false,
            remove_invisible: false,
            strip_mentions: false,
            strip_hashtag_sign: false,
            remove_stopwords: false,
            lowercase: false,
            stopwords: BTreeSet::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.remove_stopwords && self.stopwords.is_empty() {
            return Err(Error::Usage(
                "stopword removal enabled with an empty stopword list".into(),
            ));
        }
        Ok(())
    }
}

/// Parses a stopword file: one token per line, `#` starts a comment line.
pub fn parse_stopwords(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.to_lowercase())
        .collect()
}

pub fn bundled_stopwords(language: Language) -> BTreeSet<String> {
    parse_stopwords(match language {
        Language::Dutch => DUTCH_STOPWORDS,
        Language::English => ENGLISH_STOPWORDS,
        Language::Spanish => SPANISH_STOPWORDS,
    })
}

pub fn load_stopwords(path: &Path) -> Result<BTreeSet<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_stopwords(&text))
}

/// Deletes URLs and Unicode control/format characters.
///
/// Control characters that are whitespace (tab, newline, ...) become a plain
/// space so adjacent words stay separate.
pub fn remove_urls_and_noise(text: &str) -> String {
    remove_urls(&remove_invisible(text))
}

pub fn remove_urls(text: &str) -> String {
    url_pattern().replace_all(text, "").into_owned()
}

pub fn remove_invisible(text: &str) -> String {
    invisible_pattern()
        .replace_all(text, |caps: &regex::Captures<'_>| {
            if caps[0].chars().all(char::is_whitespace) {
                " "
            } else {
                ""
            }
        })
        .into_owned()
}

/// Drops whitespace-delimited tokens beginning with `@` and deletes every `#`.
/// Remaining tokens are re-joined with single spaces.
pub fn strip_mentions_and_hashtags(text: &str) -> String {
    strip_social(text, true, true)
}

fn strip_social(text: &str, mentions: bool, hashtags: bool) -> String {
    let mut out = String::with_capacity(text.len());
    for token in text.split_whitespace() {
        if mentions && token.starts_with('@') {
            continue;
        }
        let token = if hashtags {
            token.replace('#', "")
        } else {
            token.to_string()
        };
        if token.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&token);
    }
    out
}

/// Splits on whitespace and trims non-alphanumeric characters from both ends
/// of each token. Internal punctuation is kept (`covid-19`).
pub fn tokenize(text: &str, lowercase: bool) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|raw| {
            let owned;
            let token = if lowercase {
                owned = raw.to_lowercase();
                owned.as_str()
            } else {
                raw
            };
            let trimmed = token.trim_matches(|c: char| !c.is_alphanumeric());
            (!trimmed.is_empty()).then(|| trimmed.to_string())
        })
        .collect()
}

pub fn remove_stopwords(tokens: Vec<String>, config: &PreprocessConfig) -> Vec<String> {
    if !config.remove_stopwords {
        return tokens;
    }
    tokens
        .into_iter()
        .filter(|t| !config.stopwords.contains(t))
        .collect()
}

/// Full cleaning pipeline.
pub fn clean(text: &str, config: &PreprocessConfig) -> Vec<String> {
    let mut text = text.to_string();
    if config.remove_invisible {
        text = remove_invisible(&text);
    }
    if config.remove_urls {
        text = remove_urls(&text);
    }
    if config.strip_mentions || config.strip_hashtag_sign {
        text = strip_social(&text, config.strip_mentions, config.strip_hashtag_sign);
        // deleting '#' can splice a URL back together ("ht#tps://")
        if config.remove_urls {
            text = remove_urls(&text);
        }
    }
    remove_stopwords(tokenize(&text, config.lowercase), config)
}
