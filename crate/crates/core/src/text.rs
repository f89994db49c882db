//! Tokenization and similarity helpers shared by ingestion, dedup and notes.
//!
//! Normalization rules:
//! - text is lowercased;
//! - a *token* is a maximal run of alphanumeric characters;
//! - for trigrams, every run of non-alphanumeric characters collapses to a
//!   single space, the result is trimmed, and every window of three
//!   characters is a trigram (strings shorter than three characters yield
//!   themselves as the only trigram).

use std::collections::BTreeSet;

const STOPWORDS: [&str; 18] = [
    "a", "an", "the", "and", "or", "of", "to", "in", "on", "for", "with", "by", "is", "are",
    "how", "what", "vs", "from",
];

/// Lowercase alphanumeric tokens, in order, duplicates kept.
pub fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

pub fn token_set(text: &str) -> BTreeSet<String> {
    tokens(text).into_iter().collect()
}

/// Token set without common function words.
pub fn content_tokens(text: &str) -> BTreeSet<String> {
    tokens(text)
        .into_iter()
        .filter(|t| !STOPWORDS.contains(&t.as_str()))
        .collect()
}

/// |a ∩ b| / |a ∪ b|; two empty sets have similarity 0.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut gap = false;
    for c in text.chars() {
        if c.is_alphanumeric() {
            if gap && !out.is_empty() {
                out.push(' ');
            }
            gap = false;
            out.extend(c.to_lowercase());
        } else {
            gap = true;
        }
    }
    out
}

pub fn trigrams(text: &str) -> BTreeSet<String> {
    let chars: Vec<char> = normalize(text).chars().collect();
    if chars.is_empty() {
        return BTreeSet::new();
    }
    if chars.len() < 3 {
        return BTreeSet::from([chars.iter().collect()]);
    }
    chars.windows(3).map(|w| w.iter().collect()).collect()
}

pub fn trigram_similarity(a: &str, b: &str) -> f64 {
    jaccard(&trigrams(a), &trigrams(b))
}

/// Longest prefix of `text` of at most `max_chars` characters that ends on a
/// whole word. Trailing whitespace is dropped.
pub fn truncate_words(text: &str, max_chars: usize) -> &str {
    let mut cut = None;
    for (n, (i, _)) in text.char_indices().enumerate() {
        if n == max_chars {
            cut = Some(i);
            break;
        }
    }
    let Some(cut) = cut else {
        return text.trim_end();
    };
    let next_is_space = text[cut..].chars().next().is_some_and(char::is_whitespace);
    let head = &text[..cut];
    if next_is_space {
        return head.trim_end();
    }
    match head.rfind(char::is_whitespace) {
        Some(ws) => head[..ws].trim_end(),
        None => "",
    }
}
