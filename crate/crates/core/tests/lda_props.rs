use polarnet::textlab::{lda_fit, GibbsSampler, LdaConfig, TokenizedDoc};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VOCAB: usize = 20;

/// 50 documents, each drawn from one of two topics over disjoint halves of a
/// 20-word vocabulary.
fn two_topic_corpus(seed: u64) -> Vec<TokenizedDoc> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..50)
        .map(|d| {
            let offset = (d % 2) * VOCAB / 2;
            TokenizedDoc {
                doc_id: format!("d{d}"),
                tokens: (0..30).map(|_| format!("w{:02}", offset + rng.random_range(0..VOCAB / 2))).collect(),
                hashtags_included: false,
            }
        })
        .collect()
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn recovered(seed: u64) -> bool {
    let docs = two_topic_corpus(seed);
    let cfg = LdaConfig {
        iterations: 200,
        alpha: 0.1,
        seed,
        ..LdaConfig::new(2)
    };
    let m = lda_fit(&docs, &cfg).unwrap();
    let truth: Vec<Vec<f64>> = (0..2)
        .map(|t| {
            m.vocabulary
                .iter()
                .map(|w| {
                    let i: usize = w[1..].parse().unwrap();
                    if i / (VOCAB / 2) == t { 2.0 / VOCAB as f64 } else { 0.0 }
                })
                .collect()
        })
        .collect();
    truth
        .iter()
        .all(|g| m.phi.iter().map(|row| cosine(row, g)).fold(0.0, f64::max) >= 0.8)
}

#[test]
fn recovers_disjoint_topics() {
    let hits = (0..10).filter(|&s| recovered(s)).count();
    assert!(hits >= 9, "{hits}/10 seeds recovered both topics");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn every_sweep_conserves_tokens(seed in any::<u64>(), k in 1usize..5) {
        let docs = two_topic_corpus(seed);
        let mut s = GibbsSampler::new(&docs, LdaConfig { iterations: 5, seed, ..LdaConfig::new(k) }).unwrap();
        for _ in 0..5 {
            s.sweep();
            let total: u64 = s.topic_word_counts().iter().flatten().sum();
            prop_assert_eq!(total as usize, s.token_count());
            prop_assert_eq!(s.topic_totals().iter().sum::<u64>() as usize, s.token_count());
        }
    }

    #[test]
    fn distributions_sum_to_one(seed in any::<u64>(), k in 1usize..6) {
        let m = lda_fit(&two_topic_corpus(seed), &LdaConfig { iterations: 10, seed, ..LdaConfig::new(k) }).unwrap();
        for row in m.phi.iter().chain(&m.theta) {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn seeded_runs_match(seed in any::<u64>()) {
        let docs = two_topic_corpus(seed ^ 1);
        let cfg = LdaConfig { iterations: 20, seed, ..LdaConfig::new(3) };
        prop_assert_eq!(lda_fit(&docs, &cfg).unwrap(), lda_fit(&docs, &cfg).unwrap());
    }
}
