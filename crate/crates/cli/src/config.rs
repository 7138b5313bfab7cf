//! Pipeline configuration.
//!
//! The config file is TOML with flat keys; every key except `corpus_path`
//! and `seed_file` has a default. Relative paths resolve against the
//! directory holding the config file.
//!
//! ```toml
//! corpus_path = "tweets.jsonl"
//! seed_file = "seeds.csv"
//! output_dir = "out"
//! gamma = 1
//! presence_weighting = false
//! topics = 5
//! rng_seed = 7
//! bot_scores = "bot_scores.csv"
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use polarnet::commnet::{NetworkKind, NetworkOptions};
use polarnet::hashtag_graph::{PropagationConfig, UnlabeledNeighbors};
use polarnet::stance::{StanceOptions, Weighting};
use polarnet::textlab::LdaConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus_path: PathBuf,
    pub seed_file: PathBuf,
    pub output_dir: PathBuf,
    /// Skip malformed corpus lines instead of failing.
    pub lenient: bool,

    pub min_cooccurrence: u64,
    pub gamma: u64,
    pub max_passes: Option<u64>,
    pub unlabeled_neighbors: UnlabeledNeighbors,

    pub presence_weighting: bool,
    pub include_retweet_hashtags: bool,

    pub mentions_in_retweets: bool,
    /// Network the reciprocal subnetwork is cut from.
    pub reciprocal_base: NetworkKind,

    pub top_k: usize,

    pub topics: usize,
    /// Defaults to `50 / topics`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub rng_seed: u64,
    pub stopword_file: Option<PathBuf>,
    /// Keep hashtags as ordinary tokens in text reports.
    pub text_hashtags: bool,
    /// Tokens dropped from frequency and topic input.
    pub exclude_terms: Vec<String>,
    pub top_terms: usize,
    pub top_words: usize,

    pub bot_scores: Option<PathBuf>,
    pub account_types: Option<PathBuf>,
    /// Defaults to 0.00, 0.05, ..., 1.00.
    pub bot_thresholds: Option<Vec<f64>>,
    /// Sweep over all authors instead of per stance group.
    pub global_sweep: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus_path: PathBuf::new(),
            seed_file: PathBuf::new(),
            output_dir: PathBuf::from("polarnet-out"),
            lenient: false,
            min_cooccurrence: 1,
            gamma: 100,
            max_passes: None,
            unlabeled_neighbors: UnlabeledNeighbors::Skip,
            presence_weighting: false,
            include_retweet_hashtags: true,
            mentions_in_retweets: true,
            reciprocal_base: NetworkKind::AllCommunication,
            top_k: 3,
            topics: 10,
            alpha: None,
            beta: 0.01,
            iterations: 1000,
            rng_seed: 0,
            stopword_file: None,
            text_hashtags: false,
            exclude_terms: Vec::new(),
            top_terms: 50,
            top_words: 10,
            bot_scores: None,
            account_types: None,
            bot_thresholds: None,
            global_sweep: false,
        }
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if !p.as_os_str().is_empty() && p.is_relative() {
        *p = base.join(&*p);
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Parses a config file and resolves its relative paths.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.corpus_path, &mut cfg.seed_file, &mut cfg.output_dir] {
            resolve(base, p);
        }
        for p in [&mut cfg.stopword_file, &mut cfg.bot_scores, &mut cfg.account_types]
            .into_iter()
            .flatten()
        {
            resolve(base, p);
        }
        Ok(cfg)
    }

    /// Makes every path absolute against the current directory, so the
    /// config embedded in a manifest stays valid from anywhere.
    pub fn absolutize(&mut self) -> Result<()> {
        for p in [&mut self.corpus_path, &mut self.seed_file, &mut self.output_dir]
            .into_iter()
            .chain([&mut self.stopword_file, &mut self.bot_scores, &mut self.account_types].into_iter().flatten())
        {
            if !p.as_os_str().is_empty() {
                *p = std::path::absolute(&*p)?;
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        let require = |p: &Path, key: &str| -> Result<()> {
            ensure!(!p.as_os_str().is_empty(), "{key} is required");
            ensure!(p.is_file(), "{key} {} does not exist", p.display());
            Ok(())
        };
        require(&self.corpus_path, "corpus_path")?;
        require(&self.seed_file, "seed_file")?;
        for (p, key) in [
            (&self.stopword_file, "stopword_file"),
            (&self.bot_scores, "bot_scores"),
            (&self.account_types, "account_types"),
        ] {
            if let Some(p) = p {
                require(p, key)?;
            }
        }
        ensure!(!self.output_dir.as_os_str().is_empty(), "output_dir is required");
        ensure!(self.min_cooccurrence >= 1, "min_cooccurrence must be >= 1");
        ensure!(self.gamma >= 1, "gamma must be >= 1");
        ensure!(self.max_passes != Some(0), "max_passes must be >= 1");
        ensure!(self.top_k >= 1, "top_k must be >= 1");
        ensure!(self.topics >= 1, "topics must be >= 1");
        ensure!(self.alpha.is_none_or(|a| a > 0.0), "alpha must be positive");
        ensure!(self.beta > 0.0, "beta must be positive");
        ensure!(self.top_terms >= 1 && self.top_words >= 1, "top_terms and top_words must be >= 1");
        if !matches!(
            self.reciprocal_base,
            NetworkKind::Retweet | NetworkKind::Mention | NetworkKind::Reply | NetworkKind::AllCommunication
        ) {
            bail!("reciprocal_base must be retweet, mention, reply or all-communication");
        }
        if let Some(grid) = &self.bot_thresholds {
            ensure!(!grid.is_empty(), "bot_thresholds must not be empty");
            ensure!(grid.iter().all(|t| (0.0..=1.0).contains(t)), "bot_thresholds must lie in [0, 1]");
            ensure!(grid.windows(2).all(|w| w[0] <= w[1]), "bot_thresholds must be ascending");
        }
        Ok(())
    }

    pub fn propagation(&self) -> PropagationConfig {
        PropagationConfig {
            gamma: self.gamma,
            max_passes: self.max_passes.unwrap_or(u64::MAX),
            unlabeled: self.unlabeled_neighbors,
            ..Default::default()
        }
    }

    pub fn stance(&self) -> StanceOptions {
        StanceOptions {
            weighting: if self.presence_weighting { Weighting::Presence } else { Weighting::Count },
            include_retweets: self.include_retweet_hashtags,
        }
    }

    pub fn networks(&self) -> NetworkOptions {
        NetworkOptions {
            mentions_in_retweets: self.mentions_in_retweets,
        }
    }

    pub fn lda(&self) -> LdaConfig {
        let base = LdaConfig::new(self.topics);
        LdaConfig {
            alpha: self.alpha.unwrap_or(base.alpha),
            beta: self.beta,
            iterations: self.iterations,
            seed: self.rng_seed,
            ..base
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_keys() {
        let cfg = PipelineConfig::from_toml("corpus_path = \"c.jsonl\"\nseed_file = \"s.csv\"\n").unwrap();
        assert_eq!(cfg.gamma, 100);
        assert_eq!(cfg.top_k, 3);
        assert_eq!(cfg.lda().alpha, 5.0);
        assert!(cfg.include_retweet_hashtags && cfg.mentions_in_retweets);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(PipelineConfig::from_toml("gama = 3\n").is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = PipelineConfig {
            corpus_path: "a/b.jsonl".into(),
            max_passes: Some(7),
            alpha: Some(0.5),
            bot_thresholds: Some(vec![0.0, 0.5]),
            exclude_terms: vec!["rt".into()],
            reciprocal_base: NetworkKind::Mention,
            ..Default::default()
        };
        assert_eq!(PipelineConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn missing_corpus_fails_validation() {
        let cfg = PipelineConfig {
            corpus_path: "/no/such/corpus.jsonl".into(),
            ..Default::default()
        };
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("corpus_path"), "{err}");
    }

    #[test]
    fn relative_paths_follow_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "corpus_path = \"c.jsonl\"\nseed_file = \"/abs/s.csv\"\nbot_scores = \"b.csv\"\n").unwrap();
        let cfg = PipelineConfig::load(&path).unwrap();
        assert_eq!(cfg.corpus_path, dir.path().join("c.jsonl"));
        assert_eq!(cfg.seed_file, PathBuf::from("/abs/s.csv"));
        assert_eq!(cfg.bot_scores, Some(dir.path().join("b.csv")));
        assert_eq!(cfg.output_dir, dir.path().join("polarnet-out"));
    }
}
