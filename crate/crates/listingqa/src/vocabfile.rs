//! Tab-separated vocabulary listing: `<ngram>\t<id>\t<freq>` per line, with
//! bigram halves joined by `·`, unigrams first, in id order.

use std::fs;
use std::path::Path;

use listingqa_core::textproc::{NGram, NGramVocab, Token, BIGRAM_JOINT};

use crate::error::{Error, Result};

pub fn format_vocab(vocab: &NGramVocab) -> String {
    let mut out = String::new();
    for (ngram, id, freq) in vocab.entries() {
        out.push_str(&format!("{}\t{id}\t{freq}\n", ngram.joined()));
    }
    out
}

pub fn write_vocab(path: &Path, vocab: &NGramVocab) -> Result<()> {
    fs::write(path, format_vocab(vocab)).map_err(|e| Error::io(path, e))
}

fn split_bigram(s: &str) -> Option<(String, String)> {
    let mut found = None;
    for (i, c) in s.char_indices() {
        if c != BIGRAM_JOINT {
            continue;
        }
        let (a, b) = (&s[..i], &s[i + c.len_utf8()..]);
        if Token::is_valid(a) && Token::is_valid(b) {
            if found.is_some() {
                return None;
            }
            found = Some((a.to_string(), b.to_string()));
        }
    }
    found
}

fn parse_ngram(s: &str) -> Option<NGram> {
    if Token::is_valid(s) {
        Some(NGram::Unigram(s.to_string()))
    } else {
        split_bigram(s).map(|(a, b)| NGram::Bigram(a, b))
    }
}

/// Parse a vocabulary listing. Caps default to the entry counts when not given.
pub fn parse_vocab(text: &str, source_name: &str, caps: Option<(usize, usize)>) -> Result<NGramVocab> {
    let mut unigrams = Vec::new();
    let mut bigrams = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let bad = |message: String| Error::Parse { source_name: source_name.into(), line: line_no, message };
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [ngram, id, freq] = fields[..] else {
            return Err(bad(format!("expected 3 tab-separated fields, found {}", fields.len())));
        };
        let id: usize = id.parse().map_err(|_| bad(format!("bad id {id:?}")))?;
        let freq: u64 = freq.parse().map_err(|_| bad(format!("bad frequency {freq:?}")))?;
        if id != unigrams.len() + bigrams.len() {
            return Err(bad(format!("id {id} out of sequence")));
        }
        match parse_ngram(ngram) {
            Some(NGram::Unigram(t)) if bigrams.is_empty() => unigrams.push((t, freq)),
            Some(NGram::Unigram(_)) => return Err(bad("unigram after the bigram block".into())),
            Some(NGram::Bigram(a, b)) => bigrams.push(((a, b), freq)),
            None => return Err(bad(format!("{ngram:?} is neither a token nor a token pair"))),
        }
    }
    let (ucap, bcap) = caps.unwrap_or((unigrams.len().max(1), bigrams.len().max(1)));
    Ok(NGramVocab::from_entries(unigrams, bigrams, ucap, bcap)?)
}

pub fn read_vocab(path: &Path, caps: Option<(usize, usize)>) -> Result<NGramVocab> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_vocab(&text, &path.display().to_string(), caps)
}
