//! Latent Dirichlet allocation by collapsed Gibbs sampling.
//!
//! Each token's topic is resampled from
//! `p(z = k) ∝ (n_dk + α) (n_kw + β) / (n_k + Vβ)` with the token's own
//! assignment removed from the counts. A fixed seed reproduces every
//! assignment bit for bit.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TokenizedDoc;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl LdaConfig {
    /// `alpha = 50 / topics`, `beta = 0.01`, 1000 sweeps, seed 0.
    pub fn new(topics: usize) -> Self {
        LdaConfig {
            topics,
            alpha: 50.0 / topics.max(1) as f64,
            beta: 0.01,
            iterations: 1000,
            seed: 0,
        }
    }
}

impl Default for LdaConfig {
    fn default() -> Self {
        Self::new(10)
    }
}

/// Sampler state. Documents without tokens are dropped on construction.
#[derive(Debug, Clone)]
pub struct GibbsSampler {
    cfg: LdaConfig,
    vocabulary: Vec<String>,
    doc_ids: Vec<String>,
    docs: Vec<Vec<usize>>,
    assignments: Vec<Vec<usize>>,
    doc_topic: Vec<Vec<u64>>,
    topic_word: Vec<Vec<u64>>,
    topic_total: Vec<u64>,
    rng: ChaCha8Rng,
    sweeps: usize,
}

impl GibbsSampler {
    pub fn new(docs: &[TokenizedDoc], cfg: LdaConfig) -> Result<Self> {
        if cfg.topics < 1 {
            return Err(Error::InvalidArgument("topic count must be >= 1".into()));
        }
        if !(cfg.alpha > 0.0 && cfg.beta > 0.0) {
            return Err(Error::InvalidArgument("alpha and beta must be positive".into()));
        }
        let usable: Vec<&TokenizedDoc> = docs.iter().filter(|d| !d.tokens.is_empty()).collect();
        if usable.is_empty() {
            return Err(Error::NoDocuments);
        }
        let vocabulary: Vec<String> = usable
            .iter()
            .flat_map(|d| d.tokens.iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if cfg.topics > vocabulary.len() {
            log::warn!(
                "{} topics requested for a vocabulary of {} words",
                cfg.topics,
                vocabulary.len()
            );
        }
        let index: BTreeMap<&str, usize> = vocabulary.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
        let docs: Vec<Vec<usize>> = usable
            .iter()
            .map(|d| d.tokens.iter().map(|t| index[t.as_str()]).collect())
            .collect();

        let k = cfg.topics;
        let v = vocabulary.len();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut doc_topic = vec![vec![0u64; k]; docs.len()];
        let mut topic_word = vec![vec![0u64; v]; k];
        let mut topic_total = vec![0u64; k];
        let assignments: Vec<Vec<usize>> = docs
            .iter()
            .enumerate()
            .map(|(d, words)| {
                words
                    .iter()
                    .map(|&w| {
                        let z = rng.random_range(0..k);
                        doc_topic[d][z] += 1;
                        topic_word[z][w] += 1;
                        topic_total[z] += 1;
                        z
                    })
                    .collect()
            })
            .collect();

        Ok(GibbsSampler {
            cfg,
            vocabulary,
            doc_ids: usable.iter().map(|d| d.doc_id.clone()).collect(),
            docs,
            assignments,
            doc_topic,
            topic_word,
            topic_total,
            rng,
            sweeps: 0,
        })
    }

    /// Resamples every token once.
    pub fn sweep(&mut self) {
        let k = self.cfg.topics;
        let (alpha, beta) = (self.cfg.alpha, self.cfg.beta);
        let vbeta = self.vocabulary.len() as f64 * beta;
        let mut weights = vec![0.0f64; k];
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i];
                let old = self.assignments[d][i];
                self.doc_topic[d][old] -= 1;
                self.topic_word[old][w] -= 1;
                self.topic_total[old] -= 1;

                let mut total = 0.0;
                for (t, slot) in weights.iter_mut().enumerate() {
                    total += (self.doc_topic[d][t] as f64 + alpha) * (self.topic_word[t][w] as f64 + beta)
                        / (self.topic_total[t] as f64 + vbeta);
                    *slot = total;
                }
                let u = self.rng.random::<f64>() * total;
                let new = weights.partition_point(|&c| c <= u).min(k - 1);

                self.assignments[d][i] = new;
                self.doc_topic[d][new] += 1;
                self.topic_word[new][w] += 1;
                self.topic_total[new] += 1;
            }
        }
        self.sweeps += 1;
    }

    pub fn run(&mut self, sweeps: usize) {
        for _ in 0..sweeps {
            self.sweep();
        }
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn assignments(&self) -> &[Vec<usize>] {
        &self.assignments
    }

    pub fn topic_word_counts(&self) -> &[Vec<u64>] {
        &self.topic_word
    }

    pub fn topic_totals(&self) -> &[u64] {
        &self.topic_total
    }

    pub fn token_count(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }

    /// Smoothed distributions from the current counts.
    pub fn model(&self) -> TopicModel {
        let k = self.cfg.topics;
        let v = self.vocabulary.len();
        let (alpha, beta) = (self.cfg.alpha, self.cfg.beta);
        let phi = (0..k)
            .map(|t| {
                let denom = self.topic_total[t] as f64 + v as f64 * beta;
                self.topic_word[t].iter().map(|&c| (c as f64 + beta) / denom).collect()
            })
            .collect();
        let theta = self
            .doc_topic
            .iter()
            .zip(&self.docs)
            .map(|(counts, words)| {
                let denom = words.len() as f64 + k as f64 * alpha;
                counts.iter().map(|&c| (c as f64 + alpha) / denom).collect()
            })
            .collect();
        TopicModel {
            topics: k,
            vocabulary: self.vocabulary.clone(),
            doc_ids: self.doc_ids.clone(),
            phi,
            theta,
            alpha,
            beta,
            iterations: self.sweeps,
            rng_seed: self.cfg.seed,
            assignments: self.assignments.clone(),
        }
    }
}

/// Fitted topic model. `phi` is topics × vocabulary, `theta` documents × topics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub topics: usize,
    pub vocabulary: Vec<String>,
    pub doc_ids: Vec<String>,
    pub phi: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub rng_seed: u64,
    pub assignments: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordProb {
    pub word: String,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicReport {
    pub topic_id: usize,
    pub top_words: Vec<WordProb>,
}

impl TopicModel {
    /// The `n` most probable words of `topic`, ties in lexicographic order.
    /// Words in `exclude` are skipped.
    pub fn top_words(&self, topic: usize, n: usize, exclude: Option<&BTreeSet<String>>) -> Result<Vec<WordProb>> {
        let row = self.phi.get(topic).ok_or(Error::TopicOutOfRange {
            topic,
            k: self.topics,
        })?;
        let mut ranked: Vec<(usize, f64)> = row
            .iter()
            .copied()
            .enumerate()
            .filter(|(w, _)| exclude.is_none_or(|ex| !ex.contains(&self.vocabulary[*w])))
            .collect();
        // vocabulary is sorted, so index order is lexicographic order
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(ranked
            .into_iter()
            .take(n)
            .map(|(w, prob)| WordProb {
                word: self.vocabulary[w].clone(),
                prob,
            })
            .collect())
    }

    pub fn report(&self, n: usize, exclude: Option<&BTreeSet<String>>) -> Vec<TopicReport> {
        (0..self.topics)
            .map(|t| TopicReport {
                topic_id: t,
                top_words: self.top_words(t, n, exclude).expect("topic in range"),
            })
            .collect()
    }
}

/// Runs `cfg.iterations` sweeps from a seeded random initialization.
pub fn lda_fit(docs: &[TokenizedDoc], cfg: &LdaConfig) -> Result<TopicModel> {
    let mut sampler = GibbsSampler::new(docs, *cfg)?;
    sampler.run(cfg.iterations);
    Ok(sampler.model())
}
