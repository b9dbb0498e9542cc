//! Text normalization shared by indexing, query parsing, and name matching.

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Fixed stopword list applied during tokenization (30 words).
pub const STOPWORDS: [&str; 30] = [
    "the", "of", "and", "to", "in", "is", "it", "for", "on", "with", "as", "by", "at", "from",
    "that", "this", "an", "be", "are", "was", "were", "or", "not", "but", "have", "has", "had",
    "its", "which", "their",
];

fn is_stopword(token: &str) -> bool {
    STOPWORDS.contains(&token)
}

/// Case-fold and strip diacritics: "Ångström" -> "angstrom".
pub fn fold(text: &str) -> String {
    text.nfd()
        .filter(|c| !is_combining_mark(*c))
        .flat_map(char::to_lowercase)
        .collect()
}

/// Tokenize text for indexing and querying.
///
/// Case-folded, diacritic-stripped, split on non-alphanumeric characters;
/// tokens shorter than two characters and the fixed stopword list are
/// dropped. Deterministic; empty input yields an empty list.
pub fn tokenize(text: &str) -> Vec<String> {
    fold(text)
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2 && !is_stopword(t))
        .map(str::to_string)
        .collect()
}

/// Normalized form of a last name: folded, inner whitespace collapsed.
pub fn normalize_last_name(last: &str) -> String {
    fold(last).split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Normalized form of author initials: folded, punctuation dropped.
/// "M.J." -> "mj".
pub fn normalize_initials(initials: &str) -> String {
    fold(initials).chars().filter(|c| c.is_alphanumeric()).collect()
}

/// Venue tokens for reference matching: folded words with punctuation
/// stripped inside each word, so "A&A" and "ApJ" both survive as single
/// tokens. No stopword or length filtering; venues are not prose.
pub fn venue_tokens(text: &str) -> Vec<String> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .map(|w| fold(w).chars().filter(|c| c.is_alphanumeric()).collect::<String>())
        .filter(|w| !w.is_empty())
        .collect()
}
