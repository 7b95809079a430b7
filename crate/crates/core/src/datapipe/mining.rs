use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::ranker::{Message, Speaker};
use crate::textproc::{split_sentences, tokenize};

use super::types::{ChatLog, Listing, QAExample};

const STOPWORD_DATA: &str = include_str!("stopwords.txt");

/// English function words trimmed from the edges of a phrase match.
pub static STOPWORDS: StopwordList = StopwordList;

pub struct StopwordList;

impl StopwordList {
    pub fn iter(&self) -> impl Iterator<Item = &'static str> {
        STOPWORD_DATA.lines().map(str::trim).filter(|l| !l.is_empty())
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn is_stopword(word: &str) -> bool {
    STOPWORDS.iter().any(|s| s == word)
}

/// Thresholds for turning a seller reply into a label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MiningConfig {
    /// Shortest phrase match that makes a positive example.
    pub min_positive: usize,
    /// Longest phrase match that still counts as "no answer".
    pub max_negative: usize,
    /// Context messages kept before the question.
    pub max_history: usize,
}

impl Default for MiningConfig {
    fn default() -> Self {
        Self { min_positive: 3, max_negative: 1, max_history: 10 }
    }
}

/// Lowercased word tokens with punctuation removed.
pub fn word_tokens(text: &str) -> Vec<String> {
    tokenize(text).into_iter().filter(|t| !t.is_punct()).map(|t| t.into_string()).collect()
}

/// Length of the longest contiguous word sequence shared by `a` and `b`,
/// counted after trimming stopwords from both ends of the match.
pub fn phrase_match_len(a: &[String], b: &[String]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let stop: Vec<bool> = a.iter().map(|w| is_stopword(w)).collect();
    // first_content[s]: first index >= s in `a` that is not a stopword
    let mut first_content = alloc::vec![a.len(); a.len() + 1];
    for s in (0..a.len()).rev() {
        first_content[s] = if stop[s] { first_content[s + 1] } else { s };
    }
    let mut prev = alloc::vec![0usize; b.len() + 1];
    let mut cur = alloc::vec![0usize; b.len() + 1];
    let mut best = 0;
    for i in 0..a.len() {
        for j in 0..b.len() {
            cur[j + 1] = if a[i] == b[j] { prev[j] + 1 } else { 0 };
            let run = cur[j + 1];
            if run > 0 && !stop[i] {
                let start = first_content[i + 1 - run];
                best = best.max(i + 1 - start);
            }
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    best
}

/// Mine labelled examples from one chat about `listing`.
///
/// Every buyer message directly followed by a seller message is a question.
/// The reply is matched against each description sentence; a long enough
/// shared phrase labels the earliest best sentence, almost no overlap gives
/// a no-answer example, and anything in between is skipped.
pub fn mine_examples(chat: &ChatLog, listing: &Listing, config: &MiningConfig) -> Vec<QAExample> {
    let candidates = split_sentences(&listing.description);
    if candidates.is_empty() {
        return Vec::new();
    }
    let sentence_words: Vec<Vec<String>> = candidates.iter().map(|s| word_tokens(s)).collect();
    let messages = &chat.messages;
    let mut out = Vec::new();
    for i in 0..messages.len().saturating_sub(1) {
        if messages[i].speaker != Speaker::Buyer || messages[i + 1].speaker != Speaker::Seller {
            continue;
        }
        let reply = word_tokens(&messages[i + 1].text);
        let mut best_len = 0;
        let mut best_idx = 0;
        for (idx, words) in sentence_words.iter().enumerate() {
            let len = phrase_match_len(&reply, words);
            if len > best_len {
                best_len = len;
                best_idx = idx;
            }
        }
        let label = if best_len >= config.min_positive {
            best_idx + 1
        } else if best_len <= config.max_negative {
            0
        } else {
            continue;
        };
        let start = i.saturating_sub(config.max_history);
        let context = messages[start..i]
            .iter()
            .map(|m| Message { speaker: m.speaker, text: m.text.clone() })
            .collect();
        out.push(QAExample {
            listing_id: listing.listing_id.clone(),
            context,
            question: messages[i].text.clone(),
            candidates: candidates.clone(),
            label,
        });
    }
    out
}

/// Mine every chat against its listing. Chats whose listing is missing are
/// skipped and counted in the second return value.
pub fn mine_all(chats: &[ChatLog], listings: &[Listing], config: &MiningConfig) -> (Vec<QAExample>, usize) {
    let by_id: BTreeMap<&str, &Listing> = listings.iter().map(|l| (l.listing_id.as_str(), l)).collect();
    let mut out = Vec::new();
    let mut skipped = 0;
    for chat in chats {
        match by_id.get(chat.listing_id.as_str()) {
            Some(listing) => out.extend(mine_examples(chat, listing, config)),
            None => skipped += 1,
        }
    }
    (out, skipped)
}
