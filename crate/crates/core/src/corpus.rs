//! Canonical tweet corpus.
//!
//! Input is UTF-8 JSONL, one object per line. Required keys are `tweet_id`,
//! `user_id`, `text` and `hashtags` (array); `screen_name`,
//! `retweeted_user_id`, `in_reply_to_user_id`, `mentioned_user_ids` (array)
//! and `timestamp` (ISO-8601) are optional. Unknown keys are ignored.
//!
//! Upstream platform payloads map onto the canonical schema as follows:
//!
//! | canonical             | v1.1 tweet object                       |
//! |-----------------------|-----------------------------------------|
//! | `tweet_id`            | `id_str`                                |
//! | `user_id`             | `user.id_str`                           |
//! | `screen_name`         | `user.screen_name`                      |
//! | `text`                | `full_text` or `text`                   |
//! | `hashtags`            | `entities.hashtags[].text`              |
//! | `retweeted_user_id`   | `retweeted_status.user.id_str`          |
//! | `in_reply_to_user_id` | `in_reply_to_user_id_str`               |
//! | `mentioned_user_ids`  | `entities.user_mentions[].id_str`       |
//! | `timestamp`           | `created_at` (reformatted as RFC 3339)  |

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

/// One message in the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub user_id: String,
    #[serde(default)]
    pub screen_name: String,
    pub text: String,
    pub hashtags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retweeted_user_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_reply_to_user_id: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mentioned_user_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<DateTime<Utc>>,
}

impl TweetRecord {
    pub fn is_retweet(&self) -> bool {
        self.retweeted_user_id.is_some()
    }

    /// Brings a freshly parsed record into canonical form: hashtags
    /// normalized (empties dropped, duplicates kept), empty optional ids
    /// cleared, repeated mentions of the same account collapsed.
    fn normalize(mut self) -> Result<Self> {
        if self.tweet_id.is_empty() {
            return Err(Error::InvalidArgument("empty tweet_id".into()));
        }
        if self.user_id.is_empty() {
            return Err(Error::InvalidArgument("empty user_id".into()));
        }
        self.hashtags = self
            .hashtags
            .iter()
            .filter_map(|h| normalize_hashtag(h))
            .collect();
        self.retweeted_user_id = self.retweeted_user_id.filter(|s| !s.is_empty());
        self.in_reply_to_user_id = self.in_reply_to_user_id.filter(|s| !s.is_empty());
        let mut seen = BTreeSet::new();
        self.mentioned_user_ids
            .retain(|m| !m.is_empty() && seen.insert(m.clone()));
        Ok(self)
    }
}

/// Normalizes a raw hashtag: trims whitespace, strips leading `#`, lowercases.
///
/// Returns `None` when nothing is left.
pub fn normalize_hashtag(raw: &str) -> Option<String> {
    let token = raw.trim().trim_start_matches('#').trim().to_lowercase();
    if token.is_empty() {
        None
    } else {
        Some(token)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteractionKind {
    Retweet,
    Reply,
    Mention,
}

/// A directed actor → target interaction carried by one tweet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interaction {
    pub kind: InteractionKind,
    pub source: String,
    pub target: String,
    /// Set when the author interacts with their own account.
    pub is_self: bool,
}

/// Lists the retweet, reply and mention edges of one tweet, in that order.
pub fn extract_interactions(tweet: &TweetRecord) -> Vec<Interaction> {
    let edge = |kind, target: &String| Interaction {
        kind,
        source: tweet.user_id.clone(),
        target: target.clone(),
        is_self: *target == tweet.user_id,
    };
    let mut out = Vec::with_capacity(2 + tweet.mentioned_user_ids.len());
    if let Some(rt) = &tweet.retweeted_user_id {
        out.push(edge(InteractionKind::Retweet, rt));
    }
    if let Some(reply) = &tweet.in_reply_to_user_id {
        out.push(edge(InteractionKind::Reply, reply));
    }
    for m in &tweet.mentioned_user_ids {
        out.push(edge(InteractionKind::Mention, m));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadMode {
    /// Any malformed or duplicate line aborts the load.
    #[default]
    Strict,
    /// Malformed lines are skipped and counted; duplicates keep the first record.
    Lenient,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub lines_read: usize,
    pub skipped_count: usize,
    pub duplicate_count: usize,
}

/// Immutable tweet collection with derived user and hashtag-usage indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    tweets: Vec<TweetRecord>,
    positions: BTreeMap<String, usize>,
    users: BTreeMap<String, BTreeSet<String>>,
    hashtag_usage: BTreeMap<String, BTreeMap<String, u64>>,
    digest: String,
}

impl Corpus {
    /// Builds a corpus from records, normalizing each one.
    ///
    /// Duplicate tweet ids are an error.
    pub fn from_tweets(tweets: impl IntoIterator<Item = TweetRecord>) -> Result<Self> {
        let mut records = Vec::new();
        let mut ids = BTreeSet::new();
        for (i, t) in tweets.into_iter().enumerate() {
            let t = t.normalize()?;
            if !ids.insert(t.tweet_id.clone()) {
                return Err(Error::DuplicateTweetId {
                    line: i + 1,
                    tweet_id: t.tweet_id,
                });
            }
            records.push(t);
        }
        Ok(Self::index(records))
    }

    fn index(tweets: Vec<TweetRecord>) -> Self {
        let mut positions = BTreeMap::new();
        let mut users: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut hashtag_usage: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
        let mut hasher = Sha256::new();
        for (i, t) in tweets.iter().enumerate() {
            positions.insert(t.tweet_id.clone(), i);
            users
                .entry(t.user_id.clone())
                .or_default()
                .insert(t.tweet_id.clone());
            let usage = hashtag_usage.entry(t.user_id.clone()).or_default();
            for h in &t.hashtags {
                *usage.entry(h.clone()).or_insert(0) += 1;
            }
            hasher.update(serde_json::to_vec(t).expect("tweet serializes"));
            hasher.update(b"\n");
        }
        Corpus {
            tweets,
            positions,
            users,
            hashtag_usage,
            digest: hex::encode(hasher.finalize()),
        }
    }

    pub fn tweets(&self) -> &[TweetRecord] {
        &self.tweets
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    pub fn tweet(&self, tweet_id: &str) -> Option<&TweetRecord> {
        self.positions.get(tweet_id).map(|&i| &self.tweets[i])
    }

    /// Author index: user id → ids of the tweets they wrote.
    pub fn users(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.users
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    pub fn contains_user(&self, user_id: &str) -> bool {
        self.users.contains_key(user_id)
    }

    /// Tweets written by `user_id`, ordered by tweet id.
    pub fn user_tweets<'a>(&'a self, user_id: &str) -> impl Iterator<Item = &'a TweetRecord> + 'a {
        self.users
            .get(user_id)
            .into_iter()
            .flatten()
            .map(move |id| self.tweet(id).expect("index is consistent"))
    }

    /// Per-user hashtag usage counts; duplicates within a tweet count separately.
    pub fn hashtag_usage(&self) -> &BTreeMap<String, BTreeMap<String, u64>> {
        &self.hashtag_usage
    }

    /// SHA-256 over the canonical serialization of every tweet.
    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for t in &self.tweets {
            serde_json::to_writer(&mut out, t)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    pub fn to_jsonl_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }
}

/// Loads a canonical JSONL corpus from `path`.
pub fn load_corpus(path: impl AsRef<Path>, mode: LoadMode) -> Result<(Corpus, LoadReport)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(file, mode).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Reads a canonical JSONL corpus from any reader. Blank lines are ignored.
pub fn read_corpus<R: Read>(reader: R, mode: LoadMode) -> Result<(Corpus, LoadReport)> {
    let mut reader = BufReader::new(reader);
    let mut report = LoadReport::default();
    let mut tweets = Vec::new();
    let mut ids = BTreeSet::new();
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        let n = reader
            .read_until(b'\n', &mut buf)
            .map_err(|e| Error::io("<reader>", e))?;
        if n == 0 {
            break;
        }
        line_no += 1;
        report.lines_read += 1;
        let parsed = std::str::from_utf8(&buf)
            .map_err(|e| e.to_string())
            .and_then(|line| {
                if line.trim().is_empty() {
                    Ok(None)
                } else {
                    serde_json::from_str::<TweetRecord>(line)
                        .map_err(|e| e.to_string())
                        .and_then(|t| t.normalize().map_err(|e| e.to_string()))
                        .map(Some)
                }
            });
        let tweet = match parsed {
            Ok(Some(t)) => t,
            Ok(None) => {
                report.lines_read -= 1;
                continue;
            }
            Err(message) => match mode {
                LoadMode::Strict => {
                    return Err(Error::Malformed {
                        line: line_no,
                        message,
                    })
                }
                LoadMode::Lenient => {
                    log::debug!("skipping malformed line {line_no}: {message}");
                    report.skipped_count += 1;
                    continue;
                }
            },
        };
        if !ids.insert(tweet.tweet_id.clone()) {
            match mode {
                LoadMode::Strict => {
                    return Err(Error::DuplicateTweetId {
                        line: line_no,
                        tweet_id: tweet.tweet_id,
                    })
                }
                LoadMode::Lenient => {
                    report.duplicate_count += 1;
                    continue;
                }
            }
        }
        tweets.push(tweet);
    }
    Ok((Corpus::index(tweets), report))
}
