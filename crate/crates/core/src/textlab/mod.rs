//! Tokenization, unigram frequencies and LDA topic models.

mod lda;

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, TweetRecord};
use crate::{Error, Result};

pub use lda::{lda_fit, GibbsSampler, LdaConfig, TopicModel, TopicReport, WordProb};

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

/// Stop-word set. The text format is one word per line; blank lines are ignored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StopWords(HashSet<String>);

impl StopWords {
    /// The bundled English list.
    pub fn english() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    pub fn parse(text: &str) -> Self {
        StopWords(
            text.lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty())
                .collect(),
        )
    }

    pub fn read<R: Read>(input: R) -> Result<Self> {
        let mut words = HashSet::new();
        for line in BufReader::new(input).lines() {
            let line = line.map_err(|e| Error::io("<stopwords>", e))?;
            let w = line.trim().to_lowercase();
            if !w.is_empty() {
                words.insert(w);
            }
        }
        Ok(StopWords(words))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(file)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for StopWords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        StopWords(iter.into_iter().map(|s| s.into().to_lowercase()).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDoc {
    pub doc_id: String,
    pub tokens: Vec<String>,
    pub hashtags_included: bool,
}

static URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?:https?://|www\.)\S+").unwrap());
static MENTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@\w+").unwrap());
static HASHTAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"#\w+").unwrap());

/// Lowercases, strips URLs and @-mentions, splits on non-alphanumeric
/// characters and drops stop words and single-character tokens. Hashtags
/// become ordinary tokens when `include_hashtags` is set and are removed
/// otherwise.
pub fn tokenize_text(text: &str, stopwords: &StopWords, include_hashtags: bool) -> Vec<String> {
    let lower = text.to_lowercase();
    let no_urls = URL.replace_all(&lower, " ");
    let mut cleaned = MENTION.replace_all(&no_urls, " ").into_owned();
    if !include_hashtags {
        cleaned = HASHTAG.replace_all(&cleaned, " ").into_owned();
    }
    cleaned
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2 && !stopwords.contains(t))
        .map(str::to_owned)
        .collect()
}

pub fn tokenize_tweets<'a>(
    tweets: impl IntoIterator<Item = &'a TweetRecord>,
    stopwords: &StopWords,
    include_hashtags: bool,
) -> Vec<TokenizedDoc> {
    tweets
        .into_iter()
        .map(|t| TokenizedDoc {
            doc_id: t.tweet_id.clone(),
            tokens: tokenize_text(&t.text, stopwords, include_hashtags),
            hashtags_included: include_hashtags,
        })
        .collect()
}

/// One document per tweet, in corpus order. Documents may be empty.
pub fn tokenize(corpus: &Corpus, stopwords: &StopWords, include_hashtags: bool) -> Vec<TokenizedDoc> {
    tokenize_tweets(corpus.tweets(), stopwords, include_hashtags)
}

/// Concatenates tweet documents by author; the pooled `doc_id` is the user id.
pub fn pool_by_author(corpus: &Corpus, docs: &[TokenizedDoc]) -> Vec<TokenizedDoc> {
    let mut pooled: BTreeMap<&str, TokenizedDoc> = BTreeMap::new();
    for d in docs {
        let Some(t) = corpus.tweet(&d.doc_id) else { continue };
        pooled
            .entry(t.user_id.as_str())
            .or_insert_with(|| TokenizedDoc {
                doc_id: t.user_id.clone(),
                tokens: Vec::new(),
                hashtags_included: d.hashtags_included,
            })
            .tokens
            .extend(d.tokens.iter().cloned());
    }
    pooled.into_values().collect()
}

/// Term counts over all tokens, most frequent first, ties in lexicographic order.
pub fn unigram_frequencies(docs: &[TokenizedDoc], top_n: usize) -> Result<Vec<(String, u64)>> {
    if top_n < 1 {
        return Err(Error::InvalidArgument("top_n must be >= 1".into()));
    }
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for t in docs.iter().flat_map(|d| &d.tokens) {
        *counts.entry(t).or_insert(0) += 1;
    }
    let mut ranked: Vec<(String, u64)> = counts.into_iter().map(|(t, c)| (t.to_owned(), c)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(top_n);
    Ok(ranked)
}

/// `term,count`.
pub fn write_frequencies_csv<W: Write>(freqs: &[(String, u64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["term", "count"])?;
    for (t, c) in freqs {
        w.write_record([t.as_str(), &c.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<frequencies>", e))?;
    Ok(())
}
