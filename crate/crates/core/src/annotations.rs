//! External per-account annotations: bot probabilities and account types.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::stance::{Stance, StanceTable};
use crate::{Error, Result};

/// Reads two-column CSV rows, skipping a header whose first field is `user_id`.
/// Yields `(line, user_id, value)`.
fn two_column_rows<R: Read>(input: R) -> Result<Vec<(usize, String, String)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(i + 1, |p| p.line() as usize);
        if i == 0 && rec.get(0) == Some("user_id") {
            continue;
        }
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != 2 || rec[0].is_empty() {
            return Err(Error::Malformed {
                line,
                message: "expected two fields: user_id and a value".into(),
            });
        }
        out.push((line, rec[0].to_owned(), rec[1].to_owned()));
    }
    Ok(out)
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::io(path, e))
}

/// Bot-likeness probability per account.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BotScoreTable {
    scores: BTreeMap<String, f64>,
}

impl BotScoreTable {
    pub fn new(scores: BTreeMap<String, f64>) -> Result<Self> {
        if let Some((u, p)) = scores.iter().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidArgument(format!("probability {p} for {u:?} outside [0, 1]")));
        }
        Ok(BotScoreTable { scores })
    }

    /// CSV `user_id,probability`, header optional.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut scores = BTreeMap::new();
        for (line, user, value) in two_column_rows(input)? {
            let p: f64 = value.parse().map_err(|_| Error::Malformed {
                line,
                message: format!("probability {value:?} is not a number"),
            })?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Malformed {
                    line,
                    message: format!("probability {p} outside [0, 1]"),
                });
            }
            scores.insert(user, p);
        }
        Ok(BotScoreTable { scores })
    }

    pub fn get(&self, user: &str) -> Option<f64> {
        self.scores.get(user).copied()
    }

    pub fn scores(&self) -> &BTreeMap<String, f64> {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

pub fn load_bot_scores(path: impl AsRef<Path>) -> Result<BotScoreTable> {
    BotScoreTable::read_csv(open(path.as_ref())?)
}

/// Accounts whose probability is strictly greater than `threshold`.
pub fn classify_bots(scores: &BotScoreTable, threshold: f64) -> BTreeSet<String> {
    scores
        .scores
        .iter()
        .filter(|(_, &p)| p > threshold)
        .map(|(u, _)| u.clone())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccountType {
    News,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AccountTypeTable {
    types: BTreeMap<String, AccountType>,
}

impl AccountTypeTable {
    pub fn new(types: BTreeMap<String, AccountType>) -> Self {
        AccountTypeTable { types }
    }

    /// CSV `user_id,type` with type `news` or `other`, header optional.
    /// A user listed twice with different types is an error.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut types = BTreeMap::new();
        for (line, user, value) in two_column_rows(input)? {
            let t = match value.to_lowercase().as_str() {
                "news" => AccountType::News,
                "other" => AccountType::Other,
                _ => {
                    return Err(Error::Malformed {
                        line,
                        message: format!("account type {value:?} is not news or other"),
                    })
                }
            };
            if let Some(prev) = types.insert(user.clone(), t) {
                if prev != t {
                    return Err(Error::Malformed {
                        line,
                        message: format!("conflicting account types for {user:?}"),
                    });
                }
            }
        }
        Ok(AccountTypeTable { types })
    }

    /// Accounts absent from the table are `Other`.
    pub fn type_of(&self, user: &str) -> AccountType {
        self.types.get(user).copied().unwrap_or(AccountType::Other)
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }
}

pub fn load_account_types(path: impl AsRef<Path>) -> Result<AccountTypeTable> {
    AccountTypeTable::read_csv(open(path.as_ref())?)
}

/// Thresholds 0.00, 0.05, ..., 1.00.
pub fn default_grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepScope {
    /// One row per stance group and threshold.
    #[default]
    PerGroup,
    /// One row per threshold over every author, group `all`.
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub threshold: f64,
    pub group: String,
    pub account_fraction: f64,
    pub tweet_fraction: f64,
    pub unscored_count: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Bot-like share of accounts and of tweets per group at each threshold.
/// Unscored accounts count as not bot-like and are tallied separately.
/// Rows are ordered by threshold, then group name.
pub fn bot_threshold_sweep(
    corpus: &Corpus,
    stances: &StanceTable,
    scores: &BotScoreTable,
    grid: &[f64],
    scope: SweepScope,
) -> Result<Vec<SweepRow>> {
    if grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::InvalidArgument("sweep thresholds must lie in [0, 1]".into()));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("sweep thresholds must be ascending".into()));
    }
    let tweets_of = |u: &str| corpus.users().get(u).map_or(0, BTreeSet::len);
    let groups: Vec<(String, Vec<&str>)> = match scope {
        SweepScope::PerGroup => Stance::ALL
            .iter()
            .map(|&s| (s.to_string(), stances.members(s).collect()))
            .collect(),
        SweepScope::Global => vec![("all".into(), corpus.users().keys().map(String::as_str).collect())],
    };
    let mut rows = Vec::with_capacity(grid.len() * groups.len());
    for &threshold in grid {
        for (name, members) in &groups {
            let group_tweets: usize = members.iter().map(|u| tweets_of(u)).sum();
            let (mut bots, mut bot_tweets, mut unscored) = (0, 0, 0);
            for u in members {
                match scores.get(u) {
                    Some(p) if p > threshold => {
                        bots += 1;
                        bot_tweets += tweets_of(u);
                    }
                    Some(_) => {}
                    None => unscored += 1,
                }
            }
            rows.push(SweepRow {
                threshold,
                group: name.clone(),
                account_fraction: ratio(bots, members.len()),
                tweet_fraction: ratio(bot_tweets, group_tweets),
                unscored_count: unscored,
            });
        }
    }
    Ok(rows)
}

/// `threshold,group,account_fraction,tweet_fraction,unscored_count`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["threshold", "group", "account_fraction", "tweet_fraction", "unscored_count"])?;
    for r in rows {
        w.write_record([
            r.threshold.to_string(),
            r.group.clone(),
            r.account_fraction.to_string(),
            r.tweet_fraction.to_string(),
            r.unscored_count.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<sweep>", e))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewsAccount {
    pub user_id: String,
    pub screen_name: String,
    pub tweets: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupConcentration {
    pub group_tweets: usize,
    pub news_tweets: usize,
    /// News tweets over all tweets of the group.
    pub news_share: f64,
    /// Largest single news account's share of the group's news tweets.
    pub top1_share: f64,
    /// Sum of squared news-account shares of the group's news tweets.
    pub herfindahl: f64,
    /// News accounts by tweet count, descending (word-cloud weights).
    pub accounts: Vec<NewsAccount>,
}

/// News-source concentration keyed by stance name.
pub fn news_source_concentration(
    corpus: &Corpus,
    stances: &StanceTable,
    types: &AccountTypeTable,
) -> BTreeMap<String, GroupConcentration> {
    let mut out = BTreeMap::new();
    for s in Stance::ALL {
        let mut group_tweets = 0;
        let mut accounts = Vec::new();
        for u in stances.members(s) {
            let n = corpus.users().get(u).map_or(0, BTreeSet::len);
            group_tweets += n;
            if types.type_of(u) == AccountType::News && n > 0 {
                let screen_name = corpus
                    .user_tweets(u)
                    .map(|t| t.screen_name.as_str())
                    .find(|s| !s.is_empty())
                    .unwrap_or(u)
                    .to_owned();
                accounts.push(NewsAccount {
                    user_id: u.to_owned(),
                    screen_name,
                    tweets: n,
                });
            }
        }
        accounts.sort_by(|a, b| b.tweets.cmp(&a.tweets).then_with(|| a.user_id.cmp(&b.user_id)));
        let news_tweets: usize = accounts.iter().map(|a| a.tweets).sum();
        let herfindahl = accounts.iter().map(|a| ratio(a.tweets, news_tweets).powi(2)).sum();
        out.insert(
            s.to_string(),
            GroupConcentration {
                group_tweets,
                news_tweets,
                news_share: ratio(news_tweets, group_tweets),
                top1_share: accounts.first().map_or(0.0, |a| ratio(a.tweets, news_tweets)),
                herfindahl,
                accounts,
            },
        );
    }
    out
}
