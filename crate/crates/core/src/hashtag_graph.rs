//! Hashtag co-occurrence graph and seeded label propagation.
//!
//! Two hashtags are joined by an edge whose weight is the number of tweets
//! containing both. A handful of seed hashtags are pinned at -1 or +1 and
//! the remaining hashtags receive the weighted mean label of their labeled
//! neighbors once enough of those neighbors are labeled. The quorum is
//! relaxed by a slack `l = pass / gamma` that grows with the pass counter:
//! an unlabeled hashtag with `|t|` neighbors, `|t_l|` of them labeled, is
//! updated when `|t_l| + l >= |t|`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::{Error, Result};

/// Undirected weighted hashtag graph. Node ids index into [`HashtagGraph::nodes`],
/// which is sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashtagGraph {
    nodes: Vec<String>,
    index: BTreeMap<String, usize>,
    adjacency: Vec<BTreeMap<usize, u64>>,
    seeds: BTreeMap<usize, i8>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    nodes: Vec<String>,
    edges: Vec<(String, String, u64)>,
    #[serde(default)]
    seeds: BTreeMap<String, i8>,
}

impl HashtagGraph {
    /// Builds a graph from explicit nodes and undirected edges. Endpoints of
    /// edges are added as nodes; repeated edges accumulate weight.
    pub fn from_edges<S: AsRef<str>>(
        nodes: impl IntoIterator<Item = S>,
        edges: impl IntoIterator<Item = (S, S, u64)>,
    ) -> Result<Self> {
        let mut names: BTreeSet<String> = nodes.into_iter().map(|s| s.as_ref().to_owned()).collect();
        let edges: Vec<(String, String, u64)> = edges
            .into_iter()
            .map(|(a, b, w)| (a.as_ref().to_owned(), b.as_ref().to_owned(), w))
            .collect();
        for (a, b, w) in &edges {
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop on {a:?}")));
            }
            if *w == 0 {
                return Err(Error::InvalidArgument(format!("zero weight on {a:?}-{b:?}")));
            }
            names.insert(a.clone());
            names.insert(b.clone());
        }
        let mut g = Self::with_nodes(names);
        for (a, b, w) in edges {
            let (i, j) = (g.index[&a], g.index[&b]);
            *g.adjacency[i].entry(j).or_insert(0) += w;
            *g.adjacency[j].entry(i).or_insert(0) += w;
        }
        Ok(g)
    }

    fn with_nodes(names: BTreeSet<String>) -> Self {
        let nodes: Vec<String> = names.into_iter().collect();
        let index = nodes.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let adjacency = vec![BTreeMap::new(); nodes.len()];
        HashtagGraph {
            nodes,
            index,
            adjacency,
            seeds: BTreeMap::new(),
        }
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(BTreeMap::len).sum::<usize>() / 2
    }

    pub fn contains(&self, hashtag: &str) -> bool {
        self.index.contains_key(hashtag)
    }

    pub fn weight(&self, a: &str, b: &str) -> u64 {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&i), Some(&j)) => self.adjacency[i].get(&j).copied().unwrap_or(0),
            _ => 0,
        }
    }

    /// Neighbors of `hashtag` with edge weights.
    pub fn neighbors<'a>(&'a self, hashtag: &str) -> impl Iterator<Item = (&'a str, u64)> + 'a {
        self.index
            .get(hashtag)
            .into_iter()
            .flat_map(move |&i| self.adjacency[i].iter())
            .map(move |(&j, &w)| (self.nodes[j].as_str(), w))
    }

    /// Undirected edges `(a, b, weight)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(&str, &str, u64)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (i, adj) in self.adjacency.iter().enumerate() {
            for (&j, &w) in adj.range(i + 1..) {
                out.push((self.nodes[i].as_str(), self.nodes[j].as_str(), w));
            }
        }
        out
    }

    pub fn seeds(&self) -> BTreeMap<&str, f64> {
        self.seeds
            .iter()
            .map(|(&i, &l)| (self.nodes[i].as_str(), f64::from(l)))
            .collect()
    }

    /// Returns a copy of the graph with every edge weight multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Self {
        assert!(factor > 0, "scale factor must be positive");
        let mut g = self.clone();
        for adj in &mut g.adjacency {
            for w in adj.values_mut() {
                *w *= factor;
            }
        }
        g
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        let file = GraphFile {
            nodes: self.nodes.clone(),
            edges: self
                .edges()
                .into_iter()
                .map(|(a, b, w)| (a.to_owned(), b.to_owned(), w))
                .collect(),
            seeds: self
                .seeds
                .iter()
                .map(|(&i, &l)| (self.nodes[i].clone(), l))
                .collect(),
        };
        serde_json::to_writer_pretty(out, &file)?;
        Ok(())
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self> {
        let file: GraphFile = serde_json::from_reader(input)?;
        let mut g = Self::from_edges(file.nodes, file.edges)?;
        for (h, l) in file.seeds {
            let i = *g
                .index
                .get(&h)
                .ok_or_else(|| Error::InvalidArgument(format!("seed {h:?} is not a node")))?;
            g.seeds.insert(i, l);
        }
        Ok(g)
    }
}

/// Builds the co-occurrence graph of `corpus`.
///
/// A tweet contributes at most 1 to each hashtag pair regardless of repeats;
/// pairs seen in fewer than `min_weight` tweets are dropped. Every hashtag
/// that appears in any tweet is a node, isolated or not.
pub fn build_cooccurrence_graph(corpus: &Corpus, min_weight: u64) -> Result<HashtagGraph> {
    if min_weight < 1 {
        return Err(Error::InvalidArgument("min_weight must be >= 1".into()));
    }
    let mut names = BTreeSet::new();
    let mut pairs: BTreeMap<(&str, &str), u64> = BTreeMap::new();
    for t in corpus.tweets() {
        let tags: BTreeSet<&str> = t.hashtags.iter().map(String::as_str).collect();
        let tags: Vec<&str> = tags.into_iter().collect();
        for (i, a) in tags.iter().enumerate() {
            names.insert((*a).to_owned());
            for b in &tags[i + 1..] {
                *pairs.entry((a, b)).or_insert(0) += 1;
            }
        }
    }
    let mut g = HashtagGraph::with_nodes(names);
    for ((a, b), w) in pairs {
        if w < min_weight {
            continue;
        }
        let (i, j) = (g.index[a], g.index[b]);
        g.adjacency[i].insert(j, w);
        g.adjacency[j].insert(i, w);
    }
    Ok(g)
}

/// Validated seed hashtags, each pinned at -1 or +1.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SeedSpec {
    entries: BTreeMap<String, i8>,
}

impl SeedSpec {
    /// Hashtags are normalized; a hashtag listed with both signs is an error.
    pub fn new<S: AsRef<str>>(entries: impl IntoIterator<Item = (S, i8)>) -> Result<Self> {
        let mut out = BTreeMap::new();
        for (raw, label) in entries {
            if label != -1 && label != 1 {
                return Err(Error::InvalidArgument(format!(
                    "seed label for {:?} must be -1 or 1, got {label}",
                    raw.as_ref()
                )));
            }
            let Some(h) = crate::corpus::normalize_hashtag(raw.as_ref()) else {
                return Err(Error::InvalidArgument(format!(
                    "seed hashtag {:?} is empty after normalization",
                    raw.as_ref()
                )));
            };
            match out.get(&h) {
                Some(&prev) if prev != label => return Err(Error::ContradictorySeed(h)),
                _ => {
                    out.insert(h, label);
                }
            }
        }
        Ok(SeedSpec { entries: out })
    }

    pub fn entries(&self) -> &BTreeMap<String, i8> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reads `hashtag,label` CSV with a header row.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let mut entries = Vec::new();
        for (i, row) in reader.records().enumerate() {
            let row = row?;
            let line = i + 2;
            let (Some(h), Some(l)) = (row.get(0), row.get(1)) else {
                return Err(Error::Malformed {
                    line,
                    message: "expected hashtag,label".into(),
                });
            };
            let label = match l.trim_start_matches('+') {
                "1" | "1.0" => 1,
                "-1" | "-1.0" => -1,
                other => {
                    return Err(Error::Malformed {
                        line,
                        message: format!("label must be -1 or 1, got {other:?}"),
                    })
                }
            };
            entries.push((h.to_owned(), label));
        }
        Self::new(entries)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file)
    }
}

/// Pins the seed labels onto `graph`. Returns the seeded graph and the seed
/// hashtags that are not nodes of the graph.
pub fn seed_labels(graph: &HashtagGraph, seeds: &SeedSpec) -> (HashtagGraph, Vec<String>) {
    let mut g = graph.clone();
    g.seeds.clear();
    let mut missing = Vec::new();
    for (h, &label) in &seeds.entries {
        match g.index.get(h) {
            Some(&i) => {
                g.seeds.insert(i, label);
            }
            None => missing.push(h.clone()),
        }
    }
    if !missing.is_empty() {
        log::warn!("seed hashtags not in graph: {}", missing.join(", "));
    }
    (g, missing)
}

/// How unlabeled neighbors enter the weighted mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnlabeledNeighbors {
    /// Both the score and the normalizer range over labeled neighbors only.
    #[default]
    Skip,
    /// Unlabeled neighbors contribute label 0 and their weight to the normalizer.
    AsZero,
}

/// Order in which unlabeled nodes are visited within a pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeOrder {
    #[default]
    Lexicographic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropagationConfig {
    /// Passes per unit of slack.
    pub gamma: u64,
    pub max_passes: u64,
    pub node_order: NodeOrder,
    pub unlabeled: UnlabeledNeighbors,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig {
            gamma: 100,
            max_passes: u64::MAX,
            node_order: NodeOrder::Lexicographic,
            unlabeled: UnlabeledNeighbors::Skip,
        }
    }
}

/// Propagates seed labels through the graph.
///
/// Passes run while unlabeled nodes remain, at most `|nodes|` of them (and at
/// most `max_passes`). Pass `p` uses slack `l = p / gamma`. Within a pass
/// nodes are updated sequentially, so a node labeled early in a pass counts
/// as labeled for the rest of it. A node is only labeled once it has at
/// least one labeled neighbor. Nodes never labeled are absent from the
/// result; seeds are returned unchanged.
pub fn propagate_labels(graph: &HashtagGraph, cfg: &PropagationConfig) -> Result<BTreeMap<String, f64>> {
    if graph.seeds.is_empty() {
        return Err(Error::NoSeeds);
    }
    if cfg.gamma < 1 || cfg.max_passes < 1 {
        return Err(Error::InvalidArgument("gamma and max_passes must be >= 1".into()));
    }
    let n = graph.node_count();
    let mut labels: Vec<Option<f64>> = vec![None; n];
    for (&i, &l) in &graph.seeds {
        labels[i] = Some(f64::from(l));
    }
    let mut labeled_neighbors: Vec<usize> = graph
        .adjacency
        .iter()
        .map(|adj| adj.keys().filter(|j| labels[**j].is_some()).count())
        .collect();
    // NodeOrder::Lexicographic is node id order.
    let order: Vec<usize> = (0..n).collect();
    let max_degree = graph.adjacency.iter().map(BTreeMap::len).max().unwrap_or(0) as u64;
    let total_passes = (n as u64).min(cfg.max_passes);
    let mut unlabeled = labels.iter().filter(|l| l.is_none()).count();

    let mut pass = 0u64;
    while pass < total_passes && unlabeled > 0 {
        let slack = pass / cfg.gamma;
        let mut changed = false;
        for &node in &order {
            if labels[node].is_some() {
                continue;
            }
            let degree = graph.adjacency[node].len() as u64;
            let have = labeled_neighbors[node];
            if have == 0 || have as u64 + slack < degree {
                continue;
            }
            let (mut score, mut norm) = (0.0, 0.0);
            for (&j, &w) in &graph.adjacency[node] {
                let w = w as f64;
                match (labels[j], cfg.unlabeled) {
                    (Some(l), _) => {
                        score += l * w;
                        norm += w;
                    }
                    (None, UnlabeledNeighbors::AsZero) => norm += w,
                    (None, UnlabeledNeighbors::Skip) => {}
                }
            }
            labels[node] = Some(score / norm);
            unlabeled -= 1;
            changed = true;
            for &j in graph.adjacency[node].keys() {
                labeled_neighbors[j] += 1;
            }
        }
        if changed {
            pass += 1;
        } else if slack >= max_degree {
            // Every remaining node lacks a labeled neighbor; no later pass can help.
            break;
        } else {
            // Passes until the slack next grows would repeat this one exactly.
            pass = (slack + 1) * cfg.gamma;
        }
    }

    Ok(labels
        .into_iter()
        .enumerate()
        .filter_map(|(i, l)| l.map(|l| (graph.nodes[i].clone(), l)))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct LabelSummary {
    pub negative: usize,
    pub positive: usize,
    pub zero: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

pub fn label_histogram(labels: &BTreeMap<String, f64>) -> LabelSummary {
    let mut s = LabelSummary::default();
    for &l in labels.values() {
        if l < 0.0 {
            s.negative += 1;
        } else if l > 0.0 {
            s.positive += 1;
        } else {
            s.zero += 1;
        }
        s.min = Some(s.min.map_or(l, |m: f64| m.min(l)));
        s.max = Some(s.max.map_or(l, |m: f64| m.max(l)));
    }
    s
}

/// Writes `hashtag,label` CSV, labels in shortest round-trip decimal form.
pub fn write_labels_csv<W: Write>(labels: &BTreeMap<String, f64>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["hashtag", "label"])?;
    for (h, l) in labels {
        w.write_record([h.as_str(), &l.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<labels>", e))?;
    Ok(())
}

pub fn read_labels_csv<R: Read>(input: R) -> Result<BTreeMap<String, f64>> {
    let mut reader = csv::Reader::from_reader(input);
    let mut out = BTreeMap::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let parsed = match (row.get(0), row.get(1).map(str::parse::<f64>)) {
            (Some(h), Some(Ok(l))) if (-1.0..=1.0).contains(&l) => Some((h.to_owned(), l)),
            _ => None,
        };
        let (h, l) = parsed.ok_or_else(|| Error::Malformed {
            line: i + 2,
            message: "expected hashtag,label with label in [-1, 1]".into(),
        })?;
        out.insert(h, l);
    }
    Ok(out)
}
