//! User polarity and stance.
//!
//! A user's polarity is the usage-weighted mean label of the labeled hashtags
//! they used; its sign decides the stance.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stance {
    Believer,
    Disbeliever,
    Unclassified,
}

impl Stance {
    pub const ALL: [Stance; 3] = [Stance::Believer, Stance::Disbeliever, Stance::Unclassified];

    pub fn from_polarity(polarity: Option<f64>) -> Self {
        match polarity {
            Some(p) if p < 0.0 => Stance::Disbeliever,
            Some(p) if p > 0.0 => Stance::Believer,
            _ => Stance::Unclassified,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stance::Believer => "believer",
            Stance::Disbeliever => "disbeliever",
            Stance::Unclassified => "unclassified",
        }
    }
}

impl fmt::Display for Stance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "believer" => Ok(Stance::Believer),
            "disbeliever" => Ok(Stance::Disbeliever),
            "unclassified" => Ok(Stance::Unclassified),
            other => Err(Error::InvalidArgument(format!("unknown stance {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// Every use of a hashtag counts.
    #[default]
    Count,
    /// Each distinct hashtag counts once per user.
    Presence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StanceOptions {
    pub weighting: Weighting,
    /// Count hashtags carried by the user's retweets as used by the user.
    pub include_retweets: bool,
}

impl Default for StanceOptions {
    fn default() -> Self {
        StanceOptions {
            weighting: Weighting::Count,
            include_retweets: true,
        }
    }
}

fn usage(corpus: &Corpus, user: &str, opts: &StanceOptions) -> BTreeMap<String, u64> {
    let mut counts: BTreeMap<String, u64> = if opts.include_retweets {
        corpus.hashtag_usage().get(user).cloned().unwrap_or_default()
    } else {
        let mut m = BTreeMap::new();
        for t in corpus.user_tweets(user).filter(|t| !t.is_retweet()) {
            for h in &t.hashtags {
                *m.entry(h.clone()).or_insert(0) += 1;
            }
        }
        m
    };
    if opts.weighting == Weighting::Presence {
        counts.values_mut().for_each(|c| *c = 1);
    }
    counts
}

/// Weighted mean label and the total weight behind it, or `None` when the
/// user used no labeled hashtag.
fn weighted_polarity(counts: &BTreeMap<String, u64>, labels: &BTreeMap<String, f64>) -> Option<(f64, u64)> {
    let (mut score, mut weight) = (0.0, 0u64);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (h, &c) in counts {
        if let Some(&l) = labels.get(h) {
            score += l * c as f64;
            weight += c;
            lo = lo.min(l);
            hi = hi.max(l);
        }
    }
    // clamp absorbs rounding; the mean is a convex combination
    (weight > 0).then(|| ((score / weight as f64).clamp(lo, hi), weight))
}

pub fn user_polarity(
    corpus: &Corpus,
    labels: &BTreeMap<String, f64>,
    user: &str,
    opts: &StanceOptions,
) -> Result<Option<f64>> {
    if !corpus.contains_user(user) {
        return Err(Error::UnknownUser(user.to_owned()));
    }
    Ok(weighted_polarity(&usage(corpus, user, opts), labels).map(|(p, _)| p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StanceRow {
    pub polarity: Option<f64>,
    pub stance: Stance,
    /// Labeled hashtag usages behind the polarity (its weight denominator).
    pub hashtag_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StanceCounts {
    pub believer: usize,
    pub disbeliever: usize,
    pub unclassified: usize,
}

impl StanceCounts {
    pub fn get(&self, s: Stance) -> usize {
        match s {
            Stance::Believer => self.believer,
            Stance::Disbeliever => self.disbeliever,
            Stance::Unclassified => self.unclassified,
        }
    }

    fn bump(&mut self, s: Stance, by: usize) {
        match s {
            Stance::Believer => self.believer += by,
            Stance::Disbeliever => self.disbeliever += by,
            Stance::Unclassified => self.unclassified += by,
        }
    }

    pub fn total(&self) -> usize {
        self.believer + self.disbeliever + self.unclassified
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StanceTable {
    rows: BTreeMap<String, StanceRow>,
}

impl StanceTable {
    pub fn rows(&self) -> &BTreeMap<String, StanceRow> {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Stance of `user`; accounts absent from the table are unclassified.
    pub fn stance_of(&self, user: &str) -> Stance {
        self.rows.get(user).map_or(Stance::Unclassified, |r| r.stance)
    }

    pub fn members(&self, stance: Stance) -> impl Iterator<Item = &str> {
        self.rows
            .iter()
            .filter(move |(_, r)| r.stance == stance)
            .map(|(u, _)| u.as_str())
    }

    pub fn counts(&self) -> StanceCounts {
        let mut c = StanceCounts::default();
        for r in self.rows.values() {
            c.bump(r.stance, 1);
        }
        c
    }

    /// `user_id,polarity,stance,hashtag_count`; undefined polarity is an empty field.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["user_id", "polarity", "stance", "hashtag_count"])?;
        for (u, r) in &self.rows {
            let polarity = r.polarity.map(|p| p.to_string()).unwrap_or_default();
            w.write_record([u.as_str(), &polarity, r.stance.as_str(), &r.hashtag_count.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<stance>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(input);
        let mut rows = BTreeMap::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec?;
            let bad = |message: String| Error::Malformed { line: i + 2, message };
            if rec.len() != 4 {
                return Err(bad("expected user_id,polarity,stance,hashtag_count".into()));
            }
            let polarity = match &rec[1] {
                "" => None,
                p => Some(p.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            };
            let stance: Stance = rec[2].parse().map_err(|e: Error| bad(e.to_string()))?;
            let hashtag_count = rec[3].parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
            rows.insert(
                rec[0].to_owned(),
                StanceRow {
                    polarity,
                    stance,
                    hashtag_count,
                },
            );
        }
        Ok(StanceTable { rows })
    }
}

/// Classifies every author in the corpus.
pub fn classify_users(corpus: &Corpus, labels: &BTreeMap<String, f64>, opts: &StanceOptions) -> StanceTable {
    let rows = corpus
        .users()
        .keys()
        .map(|u| {
            let scored = weighted_polarity(&usage(corpus, u, opts), labels);
            let polarity = scored.map(|(p, _)| p);
            let row = StanceRow {
                polarity,
                stance: Stance::from_polarity(polarity),
                hashtag_count: scored.map_or(0, |(_, w)| w),
            };
            (u.clone(), row)
        })
        .collect();
    StanceTable { rows }
}

/// Tweets per author stance.
pub fn group_tweet_counts(corpus: &Corpus, table: &StanceTable) -> StanceCounts {
    let mut c = StanceCounts::default();
    for (u, tweets) in corpus.users() {
        c.bump(table.stance_of(u), tweets.len());
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TweetRecord;
    use crate::testutil::tweet;

    fn labels() -> BTreeMap<String, f64> {
        BTreeMap::from([("h1".to_string(), 1.0 / 3.0), ("h2".into(), -1.0), ("pos".into(), 1.0)])
    }

    fn three_users() -> Corpus {
        Corpus::from_tweets([
            tweet("1", "mixed", &["h1", "h2"]),
            tweet("2", "mixed", &["h1"]),
            tweet("3", "nolabel", &["unknown"]),
            tweet("4", "single", &["pos"]),
        ])
        .unwrap()
    }

    #[test]
    fn weighted_mean_example() {
        let c = three_users();
        let p = user_polarity(&c, &labels(), "mixed", &StanceOptions::default()).unwrap().unwrap();
        assert!((p - (-1.0 / 9.0)).abs() <= 1e-12, "{p}");
        assert_eq!(Stance::from_polarity(Some(p)), Stance::Disbeliever);
    }

    #[test]
    fn no_labeled_hashtags_is_undefined() {
        let c = three_users();
        assert_eq!(user_polarity(&c, &labels(), "nolabel", &Default::default()).unwrap(), None);
        assert_eq!(Stance::from_polarity(None), Stance::Unclassified);
    }

    #[test]
    fn single_hashtag() {
        let c = three_users();
        assert_eq!(user_polarity(&c, &labels(), "single", &Default::default()).unwrap(), Some(1.0));
        assert!(matches!(
            user_polarity(&c, &labels(), "ghost", &Default::default()),
            Err(Error::UnknownUser(_))
        ));
    }

    #[test]
    fn classify_three_users() {
        let table = classify_users(&three_users(), &labels(), &Default::default());
        let counts = table.counts();
        assert_eq!((counts.disbeliever, counts.believer, counts.unclassified), (1, 1, 1));
        assert_eq!(table.rows()["mixed"].hashtag_count, 3);
        assert_eq!(table.rows()["nolabel"].hashtag_count, 0);
    }

    #[test]
    fn empty_and_uniform() {
        let empty = Corpus::from_tweets(Vec::<TweetRecord>::new()).unwrap();
        assert!(classify_users(&empty, &labels(), &Default::default()).is_empty());
        let c = Corpus::from_tweets([tweet("1", "a", &["pos"]), tweet("2", "b", &["pos", "x"])]).unwrap();
        let t = classify_users(&c, &labels(), &Default::default());
        assert_eq!(t.counts().believer, 2);
    }

    #[test]
    fn exact_zero_is_unclassified() {
        let labels = BTreeMap::from([("p".to_string(), 1.0), ("n".into(), -1.0)]);
        let c = Corpus::from_tweets([tweet("1", "u", &["p", "n"])]).unwrap();
        let t = classify_users(&c, &labels, &Default::default());
        assert_eq!(t.rows()["u"].polarity, Some(0.0));
        assert_eq!(t.rows()["u"].stance, Stance::Unclassified);
    }

    #[test]
    fn presence_weighting_and_retweet_exclusion() {
        let labels = BTreeMap::from([("p".to_string(), 1.0), ("n".into(), -1.0)]);
        let mut rt = tweet("3", "u", &["n"]);
        rt.retweeted_user_id = Some("v".into());
        let c = Corpus::from_tweets([tweet("1", "u", &["p", "p"]), tweet("2", "u", &["n"]), rt]).unwrap();
        let count = StanceOptions::default();
        assert_eq!(user_polarity(&c, &labels, "u", &count).unwrap(), Some(0.0));
        let presence = StanceOptions {
            weighting: Weighting::Presence,
            ..count
        };
        assert_eq!(user_polarity(&c, &labels, "u", &presence).unwrap(), Some(0.0));
        let originals = StanceOptions {
            include_retweets: false,
            ..count
        };
        assert_eq!(user_polarity(&c, &labels, "u", &originals).unwrap(), Some(1.0 / 3.0));
        let both = StanceOptions {
            weighting: Weighting::Presence,
            include_retweets: false,
        };
        assert_eq!(user_polarity(&c, &labels, "u", &both).unwrap(), Some(0.0));
    }

    #[test]
    fn tweet_counts_per_stance() {
        let labels = BTreeMap::from([("p".to_string(), 1.0), ("n".into(), -1.0)]);
        let mut tweets = Vec::new();
        let plan = [("d1", "n", 3), ("d2", "n", 2), ("b1", "p", 3), ("u1", "x", 2)];
        let mut id = 0;
        for (user, tag, n) in plan {
            for _ in 0..n {
                id += 1;
                tweets.push(tweet(&id.to_string(), user, &[tag]));
            }
        }
        let c = Corpus::from_tweets(tweets).unwrap();
        let t = classify_users(&c, &labels, &Default::default());
        let counts = group_tweet_counts(&c, &t);
        assert_eq!((counts.disbeliever, counts.believer, counts.unclassified), (5, 3, 2));
    }

    #[test]
    fn csv_round_trip() {
        let table = classify_users(&three_users(), &labels(), &Default::default());
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("user_id,polarity,stance,hashtag_count\n"));
        assert!(text.contains("nolabel,,unclassified,0\n"));
        assert_eq!(StanceTable::read_csv(buf.as_slice()).unwrap(), table);
    }
}
