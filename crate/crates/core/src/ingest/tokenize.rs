//! Tweet text normalization.
//!
//! Pipeline: lowercase, drop URLs, split on whitespace, then scan each chunk
//! into hashtags (`#` kept), mentions (`@` stripped), emoji and plain words.
//! Any other punctuation separates tokens. Plain words lose stopwords and are
//! Porter-stemmed; hashtags, handles and emoji are never stemmed.

use std::collections::HashSet;
use std::path::Path;
use std::sync::OnceLock;

use super::porter;
use crate::{Error, Result};

const BUNDLED_STOPWORDS: &str = include_str!("stopwords.txt");

/// Upper bound on re-stemming passes; stems settle after two or three.
const MAX_STEM_PASSES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Hashtag(String),
    Handle(String),
    Emoji(String),
    Word(String),
}

fn is_tag_char(c: char) -> bool {
    c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_'
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

pub(crate) fn is_emoji(c: char) -> bool {
    matches!(c as u32,
        0x1F000..=0x1F3FA
        | 0x1F400..=0x1FAFF
        | 0x2600..=0x27BF
        | 0x2300..=0x23FF
        | 0x2B00..=0x2BFF
        | 0x2190..=0x21FF
        | 0x3030 | 0x303D | 0x3297 | 0x3299
        | 0x00A9 | 0x00AE | 0x203C | 0x2049 | 0x2122 | 0x2139)
}

/// Characters that extend the preceding emoji: variation selectors, skin
/// tone modifiers, keycap and tag sequences.
fn is_emoji_modifier(c: char) -> bool {
    matches!(c as u32, 0xFE0E | 0xFE0F | 0x1F3FB..=0x1F3FF | 0x20E3 | 0xE0020..=0xE007F)
}

const ZWJ: char = '\u{200D}';

fn scan_chunk(chunk: &[char], out: &mut Vec<Token>) {
    let mut i = 0;
    while i < chunk.len() {
        let c = chunk[i];
        if (c == '#' || c == '@') && chunk.get(i + 1).is_some_and(|&n| is_tag_char(n)) {
            let start = i + 1;
            let mut end = start;
            while end < chunk.len() && is_tag_char(chunk[end]) {
                end += 1;
            }
            let body: String = chunk[start..end].iter().collect();
            out.push(if c == '#' {
                Token::Hashtag(format!("#{body}"))
            } else {
                Token::Handle(body)
            });
            i = end;
        } else if is_emoji(c) {
            let mut emoji = String::from(c);
            i += 1;
            while i < chunk.len() {
                let n = chunk[i];
                if is_emoji_modifier(n) {
                    emoji.push(n);
                    i += 1;
                } else if n == ZWJ && chunk.get(i + 1).is_some_and(|&e| is_emoji(e)) {
                    emoji.push(n);
                    emoji.push(chunk[i + 1]);
                    i += 2;
                } else {
                    break;
                }
            }
            out.push(Token::Emoji(emoji));
        } else if c.is_alphanumeric() {
            let mut word = String::new();
            while i < chunk.len() {
                let n = chunk[i];
                if n.is_alphanumeric() {
                    word.push(n);
                    i += 1;
                } else if is_apostrophe(n) && chunk.get(i + 1).is_some_and(|a| a.is_alphanumeric())
                {
                    i += 1;
                } else {
                    break;
                }
            }
            out.push(Token::Word(word));
        } else {
            i += 1;
        }
    }
}

fn strip_url(chunk: &str) -> &str {
    if chunk.starts_with("www.") {
        return "";
    }
    match chunk.find("http://").or_else(|| chunk.find("https://")) {
        Some(pos) => &chunk[..pos],
        None => chunk,
    }
}

fn lex(text: &str) -> Vec<Token> {
    let lower = text.to_lowercase();
    let mut tokens = Vec::new();
    for chunk in lower.split_whitespace() {
        let chunk: Vec<char> = strip_url(chunk).chars().collect();
        scan_chunk(&chunk, &mut tokens);
    }
    tokens
}

/// Returns the hashtags of `text`, lowercased, in order, duplicates kept.
///
/// A hashtag is `#` followed by one or more of `[a-z0-9_]` after lowercasing;
/// any other character ends it.
pub fn extract_hashtags(text: &str) -> Vec<String> {
    lex(text)
        .into_iter()
        .filter_map(|t| match t {
            Token::Hashtag(h) => Some(h),
            _ => None,
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Normalizer {
    stopwords: HashSet<String>,
}

impl Default for Normalizer {
    fn default() -> Self {
        Self::from_stopword_list(BUNDLED_STOPWORDS)
    }
}

impl Normalizer {
    /// Parses a stopword list: one token per line, `#` starts a comment.
    pub fn from_stopword_list(list: &str) -> Self {
        let stopwords = list
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(str::to_lowercase)
            .collect();
        Normalizer { stopwords }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::from_stopword_list(&text))
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token)
    }

    /// Stems until the result no longer changes, so that normalizing the
    /// output again is a no-op.
    fn stem_word(&self, word: &str) -> String {
        let mut current = word.to_string();
        for _ in 0..MAX_STEM_PASSES {
            let next = porter::stem(&current);
            if next == current {
                break;
            }
            current = next;
        }
        current
    }

    pub fn normalize(&self, text: &str) -> Vec<String> {
        lex(text)
            .into_iter()
            .filter_map(|t| match t {
                Token::Hashtag(h) => Some(h),
                Token::Emoji(e) => Some(e),
                Token::Handle(h) => (!self.is_stopword(&h)).then_some(h),
                Token::Word(w) => {
                    if self.is_stopword(&w) {
                        return None;
                    }
                    let stemmed = self.stem_word(&w);
                    (!self.is_stopword(&stemmed)).then_some(stemmed)
                }
            })
            .collect()
    }
}

fn default_normalizer() -> &'static Normalizer {
    static DEFAULT: OnceLock<Normalizer> = OnceLock::new();
    DEFAULT.get_or_init(Normalizer::default)
}

/// Normalizes `text` with the bundled stopword list.
pub fn normalize_tokens(text: &str) -> Vec<String> {
    default_normalizer().normalize(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hashtags_case_folded_and_duplicated() {
        assert_eq!(
            extract_hashtags("Stay safe #COVID19 #covid19"),
            vec!["#covid19", "#covid19"]
        );
        assert!(extract_hashtags("no tags here").is_empty());
    }

    #[test]
    fn hyphen_terminates_hashtag() {
        assert_eq!(extract_hashtags("#covid-19 is here"), vec!["#covid"]);
    }

    #[test]
    fn bare_hash_is_punctuation() {
        assert!(extract_hashtags("# ## #!").is_empty());
    }

    #[test]
    fn normalize_reference_sentence() {
        assert_eq!(
            normalize_tokens("COVID-19 is SPREADING!! @realDonaldTrump 🙏"),
            vec!["covid", "19", "spread", "realdonaldtrump", "🙏"]
        );
    }

    #[test]
    fn normalize_empty_and_stopwords() {
        assert!(normalize_tokens("").is_empty());
        assert!(normalize_tokens("the and of").is_empty());
    }

    #[test]
    fn urls_are_removed() {
        assert_eq!(
            normalize_tokens("read https://t.co/abc123 later www.example.com"),
            vec!["read", "later"]
        );
        assert_eq!(normalize_tokens("(see:http://x.y/z)"), vec!["see"]);
    }

    #[test]
    fn hashtags_are_not_stemmed() {
        assert_eq!(normalize_tokens("#Hoping hoping"), vec!["#hoping", "hope"]);
    }

    #[test]
    fn apostrophes_join_contractions() {
        assert!(normalize_tokens("don't it's").is_empty());
        assert_eq!(normalize_tokens("nation’s"), vec!["nation"]);
    }

    #[test]
    fn emoji_sequences_stay_whole() {
        let family = "👨\u{200D}👩\u{200D}👧";
        assert_eq!(
            normalize_tokens(&format!("hi{family}!")),
            vec!["hi", family]
        );
        assert_eq!(normalize_tokens("👍🏽👍"), vec!["👍🏽", "👍"]);
    }

    #[test]
    fn stem_that_is_a_stopword_is_dropped() {
        // "ones" stems to "on"
        assert!(normalize_tokens("ones").is_empty());
    }

    #[test]
    fn custom_stopword_list() {
        let n = Normalizer::from_stopword_list("# comment\ncovid  # inline\n\n");
        assert!(n.is_stopword("covid"));
        assert_eq!(n.normalize("covid the"), vec!["the"]);
    }

    fn word() -> impl Strategy<Value = String> {
        prop_oneof![
            "[a-zA-Z]{1,12}",
            "[a-z]{2,8}(ing|ed|s|ation|ness|ly|ies)",
            "#[a-zA-Z0-9_]{1,8}",
            "[0-9]{1,4}",
            Just("🙏".to_string()),
            Just("don't".to_string()),
            "[!?.,;:()\\-]{1,3}",
        ]
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(words in prop::collection::vec(word(), 0..12)) {
            let text = words.join(" ");
            let once = normalize_tokens(&text);
            let twice = normalize_tokens(&once.join(" "));
            prop_assert_eq!(once, twice);
        }
    }
}
