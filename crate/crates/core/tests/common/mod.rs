#![allow(dead_code)]

use std::collections::BTreeMap;

use polarnet::commnet::{CommNetwork, NetworkKind};
use polarnet::corpus::{Corpus, TweetRecord};
use polarnet::hashtag_graph::HashtagGraph;
use proptest::prelude::*;

pub fn user(i: usize) -> String {
    format!("u{i}")
}

/// Raw material for one tweet; indexes are resolved into ids by `build_corpus`.
#[derive(Debug, Clone)]
pub struct TweetSpec {
    pub author: usize,
    pub hashtags: Vec<usize>,
    pub retweet_of: Option<usize>,
    pub reply_to: Option<usize>,
    pub mentions: Vec<usize>,
}

pub fn tweet_spec(users: usize, tags: usize) -> impl Strategy<Value = TweetSpec> {
    (
        0..users,
        prop::collection::vec(0..tags, 0..4),
        prop::option::weighted(0.3, 0..users),
        prop::option::weighted(0.2, 0..users),
        prop::collection::vec(0..users, 0..3),
    )
        .prop_map(|(author, hashtags, retweet_of, reply_to, mentions)| TweetSpec {
            author,
            hashtags,
            retweet_of,
            reply_to,
            mentions,
        })
}

pub fn record(id: usize, s: &TweetSpec) -> TweetRecord {
    TweetRecord {
        tweet_id: format!("t{id:05}"),
        user_id: user(s.author),
        screen_name: format!("name{}", s.author),
        text: String::new(),
        hashtags: s.hashtags.iter().map(|h| format!("h{h}")).collect(),
        retweeted_user_id: s.retweet_of.map(user),
        in_reply_to_user_id: s.reply_to.map(user),
        mentioned_user_ids: s.mentions.iter().map(|&m| user(m)).collect(),
        timestamp: None,
    }
}

pub fn build_corpus(specs: &[TweetSpec]) -> Corpus {
    Corpus::from_tweets(specs.iter().enumerate().map(|(i, s)| record(i, s))).unwrap()
}

pub fn corpus_strategy(max_tweets: usize) -> impl Strategy<Value = Corpus> {
    prop::collection::vec(tweet_spec(8, 6), 1..max_tweets).prop_map(|s| build_corpus(&s))
}

/// Random directed graph on `n` nodes as (src, dst, weight) with no self-loops.
pub fn digraph(max_nodes: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize, u64)>)> {
    (1..=max_nodes).prop_flat_map(|n| {
        let edges = prop::collection::btree_map((0..n, 0..n), 1u64..5, 0..(n * n).max(1))
            .prop_map(|m| m.into_iter().filter(|((a, b), _)| a != b).map(|((a, b), w)| (a, b, w)).collect());
        (Just(n), edges)
    })
}

pub fn network(kind: NetworkKind, n: usize, edges: &[(usize, usize, u64)]) -> CommNetwork {
    CommNetwork::from_edges(
        kind,
        (0..n).map(user),
        edges.iter().map(|&(a, b, w)| (user(a), user(b), w)),
    )
    .unwrap()
}

/// Connected random hashtag graph: a random spanning tree plus extra edges.
pub fn connected_graph(max_nodes: usize) -> impl Strategy<Value = (usize, BTreeMap<(usize, usize), u64>)> {
    (2..=max_nodes).prop_flat_map(|n| {
        let tree = prop::collection::vec((any::<prop::sample::Index>(), 1u64..10), n - 1);
        let extra = prop::collection::vec((0..n, 0..n, 1u64..10), 0..2 * n);
        (Just(n), tree, extra).prop_map(|(n, tree, extra)| {
            let mut edges = BTreeMap::new();
            for (i, (parent, w)) in tree.into_iter().enumerate() {
                let child = i + 1;
                edges.insert((parent.index(child), child), w);
            }
            for (a, b, w) in extra {
                if a != b {
                    edges.insert((a.min(b), a.max(b)), w);
                }
            }
            (n, edges)
        })
    })
}

pub fn tag(i: usize) -> String {
    format!("h{i:02}")
}

pub fn hashtag_graph(n: usize, edges: &BTreeMap<(usize, usize), u64>) -> HashtagGraph {
    HashtagGraph::from_edges((0..n).map(tag), edges.iter().map(|(&(a, b), &w)| (tag(a), tag(b), w))).unwrap()
}
