use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Reverse;

use serde::{Deserialize, Serialize};

use super::tokenize::{tokenize, Token};
use crate::{Error, Result};

/// A unigram or an ordered token pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum NGram {
    Unigram(String),
    Bigram(String, String),
}

impl NGram {
    /// Rendering used by the vocabulary file: bigram halves joined by `·`.
    pub fn joined(&self) -> String {
        match self {
            NGram::Unigram(t) => t.clone(),
            NGram::Bigram(a, b) => format!("{a}{}{b}", super::BIGRAM_JOINT),
        }
    }
}

/// Sparse multiset of n-gram ids for one text.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BagOfNGrams {
    pub ids: Vec<u32>,
}

impl BagOfNGrams {
    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Fixed unigram + bigram vocabulary.
///
/// Unigrams own ids `0..n_unigrams`, bigrams follow. Within each block ids are
/// ordered by descending corpus frequency, ties broken lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VocabRepr", into = "VocabRepr")]
pub struct NGramVocab {
    unigrams: Vec<(String, u64)>,
    bigrams: Vec<((String, String), u64)>,
    unigram_cap: usize,
    bigram_cap: usize,
    unigram_ids: BTreeMap<String, u32>,
    bigram_ids: BTreeMap<String, BTreeMap<String, u32>>,
}

impl NGramVocab {
    /// Assemble a vocabulary from entries already in id order.
    pub fn from_entries(
        unigrams: Vec<(String, u64)>,
        bigrams: Vec<((String, String), u64)>,
        unigram_cap: usize,
        bigram_cap: usize,
    ) -> Result<Self> {
        if unigram_cap == 0 || bigram_cap == 0 {
            return Err(Error::Config("vocabulary caps must be at least 1".into()));
        }
        if unigrams.len() > unigram_cap || bigrams.len() > bigram_cap {
            return Err(Error::Config(format!(
                "vocabulary of {}+{} entries exceeds caps {unigram_cap}+{bigram_cap}",
                unigrams.len(),
                bigrams.len()
            )));
        }
        let mut unigram_ids = BTreeMap::new();
        for (i, (tok, _)) in unigrams.iter().enumerate() {
            if !Token::is_valid(tok) || unigram_ids.insert(tok.clone(), i as u32).is_some() {
                return Err(Error::Config(format!("bad or duplicate unigram {tok:?}")));
            }
        }
        let offset = unigrams.len() as u32;
        let mut bigram_ids: BTreeMap<String, BTreeMap<String, u32>> = BTreeMap::new();
        for (j, ((a, b), _)) in bigrams.iter().enumerate() {
            if !Token::is_valid(a) || !Token::is_valid(b) {
                return Err(Error::Config(format!("bad bigram {a:?} {b:?}")));
            }
            let slot = bigram_ids.entry(a.clone()).or_default();
            if slot.insert(b.clone(), offset + j as u32).is_some() {
                return Err(Error::Config(format!("duplicate bigram {a:?} {b:?}")));
            }
        }
        Ok(Self { unigrams, bigrams, unigram_cap, bigram_cap, unigram_ids, bigram_ids })
    }

    /// Total number of ids (rows of the embedding table).
    pub fn len(&self) -> usize {
        self.unigrams.len() + self.bigrams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn unigram_count(&self) -> usize {
        self.unigrams.len()
    }

    pub fn bigram_count(&self) -> usize {
        self.bigrams.len()
    }

    pub fn caps(&self) -> (usize, usize) {
        (self.unigram_cap, self.bigram_cap)
    }

    pub fn unigram_id(&self, token: &str) -> Option<u32> {
        self.unigram_ids.get(token).copied()
    }

    pub fn bigram_id(&self, first: &str, second: &str) -> Option<u32> {
        self.bigram_ids.get(first)?.get(second).copied()
    }

    /// All entries as `(ngram, id, frequency)` in id order.
    pub fn entries(&self) -> impl Iterator<Item = (NGram, u32, u64)> + '_ {
        let uni = self
            .unigrams
            .iter()
            .enumerate()
            .map(|(i, (t, f))| (NGram::Unigram(t.clone()), i as u32, *f));
        let offset = self.unigrams.len();
        let bi = self.bigrams.iter().enumerate().map(move |(j, ((a, b), f))| {
            (NGram::Bigram(a.clone(), b.clone()), (offset + j) as u32, *f)
        });
        uni.chain(bi)
    }
}

/// Count unigrams and bigrams over `corpus` and keep the most frequent ones.
///
/// Each corpus item is one text; bigrams never span two items.
pub fn build_vocab<I, S>(corpus: I, unigram_cap: usize, bigram_cap: usize) -> Result<NGramVocab>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    if unigram_cap == 0 || bigram_cap == 0 {
        return Err(Error::Config("vocabulary caps must be at least 1".into()));
    }
    let mut uni: BTreeMap<String, u64> = BTreeMap::new();
    let mut bi: BTreeMap<(String, String), u64> = BTreeMap::new();
    for text in corpus {
        let tokens = tokenize(text.as_ref());
        for t in &tokens {
            *uni.entry(String::from(t.as_str())).or_default() += 1;
        }
        for pair in tokens.windows(2) {
            let key = (String::from(pair[0].as_str()), String::from(pair[1].as_str()));
            *bi.entry(key).or_default() += 1;
        }
    }
    NGramVocab::from_entries(top_k(uni, unigram_cap), top_k(bi, bigram_cap), unigram_cap, bigram_cap)
}

// BTreeMap iteration is already lexicographic, so a stable sort on frequency
// alone yields "frequency desc, then lexicographic".
fn top_k<K: Ord>(counts: BTreeMap<K, u64>, cap: usize) -> Vec<(K, u64)> {
    let mut items: Vec<(K, u64)> = counts.into_iter().collect();
    items.sort_by_key(|(_, f)| Reverse(*f));
    items.truncate(cap);
    items
}

/// In-vocabulary unigram ids followed by in-vocabulary bigram ids.
pub fn featurize(text: &str, vocab: &NGramVocab) -> BagOfNGrams {
    featurize_tokens(&tokenize(text), vocab)
}

pub fn featurize_tokens(tokens: &[Token], vocab: &NGramVocab) -> BagOfNGrams {
    let mut ids: Vec<u32> = tokens.iter().filter_map(|t| vocab.unigram_id(t.as_str())).collect();
    ids.extend(
        tokens
            .windows(2)
            .filter_map(|p| vocab.bigram_id(p[0].as_str(), p[1].as_str())),
    );
    BagOfNGrams { ids }
}

#[derive(Serialize, Deserialize)]
struct VocabRepr {
    unigram_cap: usize,
    bigram_cap: usize,
    unigrams: Vec<(String, u64)>,
    bigrams: Vec<(String, String, u64)>,
}

impl From<NGramVocab> for VocabRepr {
    fn from(v: NGramVocab) -> Self {
        VocabRepr {
            unigram_cap: v.unigram_cap,
            bigram_cap: v.bigram_cap,
            unigrams: v.unigrams,
            bigrams: v.bigrams.into_iter().map(|((a, b), f)| (a, b, f)).collect(),
        }
    }
}

impl TryFrom<VocabRepr> for NGramVocab {
    type Error = Error;

    fn try_from(r: VocabRepr) -> Result<Self> {
        let bigrams = r.bigrams.into_iter().map(|(a, b, f)| ((a, b), f)).collect();
        NGramVocab::from_entries(r.unigrams, bigrams, r.unigram_cap, r.bigram_cap)
    }
}
