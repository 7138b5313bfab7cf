//! Directed user-to-user communication networks.
//!
//! Edges point from actor to target (retweeter → retweeted) and carry the
//! number of interactions. Self-interactions never become edges; they are
//! tallied by [`self_interaction_counts`].

mod export;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{extract_interactions, Corpus, InteractionKind};
use crate::stance::{Stance, StanceTable};
use crate::{Error, Result};

pub use export::{export_graph, read_edge_csv, write_dot, write_edge_csv, write_gexf, ExportFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetworkKind {
    Retweet,
    Mention,
    Reply,
    AllCommunication,
    Reciprocal,
    /// Mentioned-by plus retweeted-by; edge `(x, y)` means `x` was addressed by `y`.
    ReceivedInfluence,
}

impl NetworkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NetworkKind::Retweet => "retweet",
            NetworkKind::Mention => "mention",
            NetworkKind::Reply => "reply",
            NetworkKind::AllCommunication => "all-communication",
            NetworkKind::Reciprocal => "reciprocal",
            NetworkKind::ReceivedInfluence => "received-influence",
        }
    }
}

impl From<InteractionKind> for NetworkKind {
    fn from(k: InteractionKind) -> Self {
        match k {
            InteractionKind::Retweet => NetworkKind::Retweet,
            InteractionKind::Mention => NetworkKind::Mention,
            InteractionKind::Reply => NetworkKind::Reply,
        }
    }
}

impl fmt::Display for NetworkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkOptions {
    /// Keep mention edges carried by retweets.
    pub mentions_in_retweets: bool,
}

impl Default for NetworkOptions {
    fn default() -> Self {
        NetworkOptions {
            mentions_in_retweets: true,
        }
    }
}

/// Directed weighted user graph with optional per-node stance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "NetworkFile", try_from = "NetworkFile")]
pub struct CommNetwork {
    kind: NetworkKind,
    nodes: BTreeSet<String>,
    edges: BTreeMap<(String, String), u64>,
    stances: BTreeMap<String, Stance>,
    corpus_digest: String,
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    kind: NetworkKind,
    corpus_digest: String,
    nodes: Vec<String>,
    edges: Vec<(String, String, u64)>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    stances: BTreeMap<String, Stance>,
}

impl From<CommNetwork> for NetworkFile {
    fn from(n: CommNetwork) -> Self {
        NetworkFile {
            kind: n.kind,
            corpus_digest: n.corpus_digest,
            nodes: n.nodes.into_iter().collect(),
            edges: n.edges.into_iter().map(|((a, b), w)| (a, b, w)).collect(),
            stances: n.stances,
        }
    }
}

impl TryFrom<NetworkFile> for CommNetwork {
    type Error = Error;

    fn try_from(f: NetworkFile) -> Result<Self> {
        let mut n = CommNetwork::from_edges(f.kind, f.nodes, f.edges)?;
        n.corpus_digest = f.corpus_digest;
        n.stances = f.stances;
        Ok(n)
    }
}

impl CommNetwork {
    pub fn empty(kind: NetworkKind) -> Self {
        CommNetwork {
            kind,
            nodes: BTreeSet::new(),
            edges: BTreeMap::new(),
            stances: BTreeMap::new(),
            corpus_digest: String::new(),
        }
    }

    /// Builds a network from explicit parts. Repeated edges accumulate;
    /// zero weights and self-loops are rejected.
    pub fn from_edges<S: Into<String>>(
        kind: NetworkKind,
        nodes: impl IntoIterator<Item = S>,
        edges: impl IntoIterator<Item = (S, S, u64)>,
    ) -> Result<Self> {
        let mut n = Self::empty(kind);
        n.nodes.extend(nodes.into_iter().map(Into::into));
        for (a, b, w) in edges {
            let (a, b) = (a.into(), b.into());
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop on {a:?}")));
            }
            if w == 0 {
                return Err(Error::InvalidArgument(format!("zero weight on ({a:?}, {b:?})")));
            }
            n.add(a, b, w);
        }
        Ok(n)
    }

    fn add(&mut self, a: String, b: String, w: u64) {
        self.nodes.insert(a.clone());
        self.nodes.insert(b.clone());
        *self.edges.entry((a, b)).or_insert(0) += w;
    }

    pub fn kind(&self) -> NetworkKind {
        self.kind
    }

    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, u64)> {
        self.edges.iter().map(|((a, b), &w)| (a.as_str(), b.as_str(), w))
    }

    pub fn weight(&self, src: &str, dst: &str) -> u64 {
        // BTreeMap<(String, String)> cannot be probed with borrowed pairs.
        self.edges
            .get(&(src.to_owned(), dst.to_owned()))
            .copied()
            .unwrap_or(0)
    }

    pub fn has_edge(&self, src: &str, dst: &str) -> bool {
        self.weight(src, dst) > 0
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().sum()
    }

    pub fn corpus_digest(&self) -> &str {
        &self.corpus_digest
    }

    pub fn stances(&self) -> &BTreeMap<String, Stance> {
        &self.stances
    }

    pub fn stance_of(&self, user: &str) -> Option<Stance> {
        self.stances.get(user).copied()
    }

    pub fn is_symmetric(&self) -> bool {
        self.asymmetric_edge().is_none()
    }

    pub(crate) fn asymmetric_edge(&self) -> Option<(&str, &str)> {
        self.edges()
            .find(|(a, b, _)| !self.has_edge(b, a))
            .map(|(a, b, _)| (a, b))
    }

    /// Attaches the stance of every node; nodes missing from `table` are unclassified.
    pub fn with_stances(mut self, table: &StanceTable) -> Self {
        self.stances = self.nodes.iter().map(|u| (u.clone(), table.stance_of(u))).collect();
        self
    }

    /// Reverses every edge.
    pub fn transpose(&self) -> Self {
        CommNetwork {
            edges: self.edges.iter().map(|((a, b), &w)| ((b.clone(), a.clone()), w)).collect(),
            ..self.clone()
        }
    }

    /// Multiplies every edge weight by `factor`.
    pub fn scaled(&self, factor: u64) -> Self {
        assert!(factor > 0, "scale factor must be positive");
        let mut n = self.clone();
        n.edges.values_mut().for_each(|w| *w *= factor);
        n
    }

    /// Edge-wise sum of `parts`, which must come from the same corpus.
    pub(crate) fn merged(kind: NetworkKind, parts: &[&CommNetwork]) -> Result<Self> {
        let mut out = Self::empty(kind);
        if let Some(first) = parts.first() {
            if parts.iter().any(|p| p.corpus_digest != first.corpus_digest) {
                return Err(Error::MismatchedCorpora);
            }
            out.corpus_digest = first.corpus_digest.clone();
        }
        for p in parts {
            out.nodes.extend(p.nodes.iter().cloned());
            for ((a, b), &w) in &p.edges {
                *out.edges.entry((a.clone(), b.clone())).or_insert(0) += w;
            }
            for (u, &s) in &p.stances {
                out.stances.insert(u.clone(), s);
            }
        }
        Ok(out)
    }
}

fn kept(kind: InteractionKind, is_retweet: bool, opts: &NetworkOptions) -> bool {
    !(kind == InteractionKind::Mention && is_retweet && !opts.mentions_in_retweets)
}

/// Network of one interaction kind: edge `(a, b)` counts tweets by `a` that
/// retweet, mention or reply to `b`.
pub fn build_network(corpus: &Corpus, kind: InteractionKind, opts: &NetworkOptions) -> CommNetwork {
    let mut n = CommNetwork::empty(kind.into());
    n.corpus_digest = corpus.digest().to_owned();
    for t in corpus.tweets() {
        for e in extract_interactions(t) {
            if e.kind == kind && !e.is_self && kept(e.kind, t.is_retweet(), opts) {
                n.add(e.source, e.target, 1);
            }
        }
    }
    n
}

/// Self-interactions per kind, left out of every network.
pub fn self_interaction_counts(corpus: &Corpus, opts: &NetworkOptions) -> BTreeMap<InteractionKind, u64> {
    let mut out = BTreeMap::from([
        (InteractionKind::Retweet, 0),
        (InteractionKind::Reply, 0),
        (InteractionKind::Mention, 0),
    ]);
    for t in corpus.tweets() {
        for e in extract_interactions(t) {
            if e.is_self && kept(e.kind, t.is_retweet(), opts) {
                *out.entry(e.kind).or_insert(0) += 1;
            }
        }
    }
    out
}

/// Edge-wise sum of the retweet, mention and reply networks. Every author in
/// `corpus` is a node, so accounts that only tweet appear isolated.
pub fn all_communication(
    retweet: &CommNetwork,
    mention: &CommNetwork,
    reply: &CommNetwork,
    corpus: &Corpus,
) -> Result<CommNetwork> {
    let expected = [
        (retweet, NetworkKind::Retweet),
        (mention, NetworkKind::Mention),
        (reply, NetworkKind::Reply),
    ];
    for (n, kind) in expected {
        if n.kind != kind {
            return Err(Error::InvalidArgument(format!("expected a {kind} network, got {}", n.kind)));
        }
        if n.corpus_digest != corpus.digest() {
            return Err(Error::MismatchedCorpora);
        }
    }
    let mut out = CommNetwork::merged(NetworkKind::AllCommunication, &[retweet, mention, reply])?;
    out.nodes.extend(corpus.users().keys().cloned());
    Ok(out)
}

/// Keeps the edges whose reverse is also present. Nodes without a surviving
/// edge are dropped.
pub fn reciprocal_subnetwork(n: &CommNetwork) -> CommNetwork {
    let mut out = CommNetwork::empty(NetworkKind::Reciprocal);
    out.corpus_digest = n.corpus_digest.clone();
    for (a, b, w) in n.edges() {
        if n.has_edge(b, a) {
            out.add(a.to_owned(), b.to_owned(), w);
        }
    }
    out.stances = n
        .stances
        .iter()
        .filter(|(u, _)| out.nodes.contains(*u))
        .map(|(u, &s)| (u.clone(), s))
        .collect();
    out
}

/// Subgraph induced by the nodes whose stance is in `groups`.
pub fn group_subgraph(n: &CommNetwork, table: &StanceTable, groups: &[Stance]) -> CommNetwork {
    let keep = |u: &str| groups.contains(&table.stance_of(u));
    CommNetwork {
        kind: n.kind,
        nodes: n.nodes.iter().filter(|u| keep(u)).cloned().collect(),
        edges: n
            .edges
            .iter()
            .filter(|((a, b), _)| keep(a) && keep(b))
            .map(|(k, &w)| (k.clone(), w))
            .collect(),
        stances: n
            .stances
            .iter()
            .filter(|(u, _)| keep(u))
            .map(|(u, &s)| (u.clone(), s))
            .collect(),
        corpus_digest: n.corpus_digest.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TweetRecord;
    use crate::testutil::{mention, reply, retweet, tweet};

    fn net(edges: &[(&str, &str)]) -> CommNetwork {
        CommNetwork::from_edges(
            NetworkKind::AllCommunication,
            Vec::<&str>::new(),
            edges.iter().map(|&(a, b)| (a, b, 1)),
        )
        .unwrap()
    }

    #[test]
    fn retweet_twice() {
        let c = Corpus::from_tweets([retweet("1", "a", "b"), retweet("2", "a", "b")]).unwrap();
        let n = build_network(&c, InteractionKind::Retweet, &Default::default());
        assert_eq!(n.weight("a", "b"), 2);
        assert_eq!(n.weight("b", "a"), 0);
        assert_eq!(n.edge_count(), 1);
    }

    #[test]
    fn mentions_fan_out() {
        let c = Corpus::from_tweets([mention("1", "a", &["b", "c"])]).unwrap();
        let n = build_network(&c, InteractionKind::Mention, &Default::default());
        assert_eq!(n.edges().collect::<Vec<_>>(), vec![("a", "b", 1), ("a", "c", 1)]);
    }

    #[test]
    fn no_replies() {
        let c = Corpus::from_tweets([tweet("1", "a", &[]), mention("2", "a", &["b"])]).unwrap();
        let n = build_network(&c, InteractionKind::Reply, &Default::default());
        assert_eq!(n.edge_count(), 0);
        assert_eq!(n.node_count(), 0);
    }

    #[test]
    fn self_loops_are_counted_not_built() {
        let c = Corpus::from_tweets([retweet("1", "a", "a"), mention("2", "a", &["a", "b"])]).unwrap();
        let opts = NetworkOptions::default();
        assert_eq!(build_network(&c, InteractionKind::Retweet, &opts).edge_count(), 0);
        assert_eq!(build_network(&c, InteractionKind::Mention, &opts).edge_count(), 1);
        let diag = self_interaction_counts(&c, &opts);
        assert_eq!(diag[&InteractionKind::Retweet], 1);
        assert_eq!(diag[&InteractionKind::Mention], 1);
        assert_eq!(diag[&InteractionKind::Reply], 0);
    }

    #[test]
    fn mentions_inside_retweets_flag() {
        let mut rt = retweet("1", "a", "b");
        rt.mentioned_user_ids = vec!["c".into()];
        let c = Corpus::from_tweets([rt]).unwrap();
        let with = build_network(&c, InteractionKind::Mention, &NetworkOptions::default());
        assert_eq!(with.weight("a", "c"), 1);
        let without = NetworkOptions {
            mentions_in_retweets: false,
        };
        assert_eq!(build_network(&c, InteractionKind::Mention, &without).edge_count(), 0);
    }

    #[test]
    fn all_communication_sums_and_adds_authors() {
        let mut t = retweet("2", "a", "b");
        t.mentioned_user_ids = vec!["b".into()];
        let c = Corpus::from_tweets([retweet("1", "a", "b"), t, tweet("3", "quiet", &[]), reply("4", "b", "a")]).unwrap();
        let o = NetworkOptions::default();
        let (rt, mn, rp) = (
            build_network(&c, InteractionKind::Retweet, &o),
            build_network(&c, InteractionKind::Mention, &o),
            build_network(&c, InteractionKind::Reply, &o),
        );
        assert_eq!((rt.weight("a", "b"), mn.weight("a", "b")), (2, 1));
        let all = all_communication(&rt, &mn, &rp, &c).unwrap();
        assert_eq!(all.kind(), NetworkKind::AllCommunication);
        assert_eq!(all.weight("a", "b"), 3);
        assert_eq!(all.weight("b", "a"), 1);
        assert!(all.nodes().contains("quiet"));

        let other = Corpus::from_tweets([tweet("9", "z", &[])]).unwrap();
        assert!(matches!(all_communication(&rt, &mn, &rp, &other), Err(Error::MismatchedCorpora)));
    }

    #[test]
    fn all_communication_of_empty_networks() {
        let c = Corpus::from_tweets([tweet("1", "a", &[]), tweet("2", "b", &[])]).unwrap();
        let o = NetworkOptions::default();
        let empty = |k| build_network(&c, k, &o);
        let all = all_communication(
            &empty(InteractionKind::Retweet),
            &empty(InteractionKind::Mention),
            &empty(InteractionKind::Reply),
            &c,
        )
        .unwrap();
        assert_eq!(all.edge_count(), 0);
        assert_eq!(all.nodes().iter().collect::<Vec<_>>(), vec!["a", "b"]);
        let none = Corpus::from_tweets(Vec::<TweetRecord>::new()).unwrap();
        let all = all_communication(
            &build_network(&none, InteractionKind::Retweet, &o),
            &build_network(&none, InteractionKind::Mention, &o),
            &build_network(&none, InteractionKind::Reply, &o),
            &none,
        )
        .unwrap();
        assert_eq!(all.node_count(), 0);
    }

    #[test]
    fn reciprocal_filter() {
        let n = net(&[("a", "b"), ("b", "a"), ("a", "c")]);
        let r = reciprocal_subnetwork(&n);
        assert_eq!(r.edges().map(|(a, b, _)| (a, b)).collect::<Vec<_>>(), vec![("a", "b"), ("b", "a")]);
        assert!(r.is_symmetric());
        assert_eq!(r.kind(), NetworkKind::Reciprocal);

        let sym = net(&[("a", "b"), ("b", "a")]);
        assert_eq!(reciprocal_subnetwork(&sym).edges().collect::<Vec<_>>(), sym.edges().collect::<Vec<_>>());
        assert_eq!(reciprocal_subnetwork(&net(&[])).edge_count(), 0);
        assert_eq!(reciprocal_subnetwork(&r), r);
    }

    #[test]
    fn reciprocal_keeps_weights() {
        let n = CommNetwork::from_edges(NetworkKind::Mention, Vec::<&str>::new(), [("a", "b", 5), ("b", "a", 2)]).unwrap();
        let r = reciprocal_subnetwork(&n);
        assert_eq!((r.weight("a", "b"), r.weight("b", "a")), (5, 2));
    }

    fn stance_fixture() -> (Corpus, StanceTable) {
        let labels = BTreeMap::from([("p".to_string(), 1.0), ("n".into(), -1.0)]);
        let c = Corpus::from_tweets([
            tweet("1", "d1", &["n"]),
            tweet("2", "d2", &["n"]),
            tweet("3", "b1", &["p"]),
            tweet("4", "u1", &[]),
        ])
        .unwrap();
        let t = crate::stance::classify_users(&c, &labels, &Default::default());
        (c, t)
    }

    #[test]
    fn group_subgraphs() {
        let (_, table) = stance_fixture();
        let n = net(&[("d1", "d2"), ("d2", "d1"), ("d1", "b1"), ("d1", "u1"), ("u1", "d2"), ("b1", "u1")]);
        let d = group_subgraph(&n, &table, &[Stance::Disbeliever]);
        assert_eq!(d.edges().map(|(a, b, _)| (a, b)).collect::<Vec<_>>(), vec![("d1", "d2"), ("d2", "d1")]);
        let du = group_subgraph(&n, &table, &[Stance::Disbeliever, Stance::Unclassified]);
        assert!(d.edges().all(|(a, b, _)| du.has_edge(a, b)));
        assert_eq!(du.edge_count(), 4);
        assert_eq!(group_subgraph(&n, &table, &Stance::ALL), n);
        // "ghost" is missing from the table and therefore unclassified.
        let g = net(&[("d1", "ghost")]);
        assert_eq!(group_subgraph(&g, &table, &[Stance::Unclassified]).edge_count(), 0);
        assert_eq!(group_subgraph(&g, &table, &[Stance::Unclassified]).nodes().len(), 1);
    }

    #[test]
    fn stances_attach_to_all_nodes() {
        let (_, table) = stance_fixture();
        let n = net(&[("d1", "b1"), ("b1", "ghost")]).with_stances(&table);
        assert_eq!(n.stance_of("d1"), Some(Stance::Disbeliever));
        assert_eq!(n.stance_of("b1"), Some(Stance::Believer));
        assert_eq!(n.stance_of("ghost"), Some(Stance::Unclassified));
    }

    #[test]
    fn json_round_trip() {
        let (_, table) = stance_fixture();
        let n = net(&[("d1", "b1"), ("b1", "d1")]).with_stances(&table);
        let s = serde_json::to_string(&n).unwrap();
        assert_eq!(serde_json::from_str::<CommNetwork>(&s).unwrap(), n);
    }
}
