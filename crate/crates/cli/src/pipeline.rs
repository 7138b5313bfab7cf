//! Pipeline stages and the files they exchange.
//!
//! Every stage reads its inputs from the output directory, so stages can be
//! run one at a time and inspected in between:
//!
//! | stage         | writes                                                          |
//! |---------------|-----------------------------------------------------------------|
//! | `ingest`      | `corpus.jsonl`, `ingest.json`                                   |
//! | `hashtags`    | `hashtag_graph.json`                                            |
//! | `propagate`   | `hashtag_labels.csv`, `propagation.json`                        |
//! | `classify`    | `stance.csv`, `stance_summary.json`                             |
//! | `networks`    | `networks.json`, `network_<kind>.{dot,gexf,csv}`, `network_diagnostics.json` |
//! | `metrics`     | `metrics.json`, `influencers.json`, `super_{spreaders,friends}_<group>.csv` |
//! | `text`        | `frequencies_<group>.csv`, `topics_<group>.json`                |
//! | `annotations` | `bot_sweep.csv`, `news_concentration.json` (when inputs are configured) |
//! | `report`      | `manifest.json`                                                 |

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, Result};
use polarnet::annotations::{
    bot_threshold_sweep, default_grid, load_account_types, load_bot_scores, news_source_concentration, write_sweep_csv,
    SweepScope,
};
use polarnet::commnet::{
    all_communication, build_network, group_subgraph, reciprocal_subnetwork, self_interaction_counts, write_dot,
    write_edge_csv, write_gexf, CommNetwork, ExportFormat, NetworkKind,
};
use polarnet::corpus::{load_corpus, read_corpus, Corpus, InteractionKind, LoadMode};
use polarnet::hashtag_graph::{
    build_cooccurrence_graph, label_histogram, propagate_labels, read_labels_csv, seed_labels, write_labels_csv,
    HashtagGraph, SeedSpec,
};
use polarnet::netmetrics::{echo_chamberness, influence_base, super_friends, super_spreaders, GroupMetrics, InfluencerReport};
use polarnet::stance::{classify_users, group_tweet_counts, Stance, StanceTable};
use polarnet::textlab::{lda_fit, tokenize, unigram_frequencies, write_frequencies_csv, StopWords, TopicReport};
use polarnet::Error as CoreError;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;

pub const MANIFEST: &str = "manifest.json";
const CORPUS: &str = "corpus.jsonl";
const GRAPH: &str = "hashtag_graph.json";
const LABELS: &str = "hashtag_labels.csv";
const STANCE: &str = "stance.csv";
const NETWORKS: &str = "networks.json";

/// Groups reported separately by the metrics and text stages.
const GROUPS: [Stance; 2] = [Stance::Believer, Stance::Disbeliever];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Ingest,
    Hashtags,
    Propagate,
    Classify,
    Networks,
    Metrics,
    Text,
    Annotations,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 9] = [
        Stage::Ingest,
        Stage::Hashtags,
        Stage::Propagate,
        Stage::Classify,
        Stage::Networks,
        Stage::Metrics,
        Stage::Text,
        Stage::Annotations,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Hashtags => "hashtags",
            Stage::Propagate => "propagate",
            Stage::Classify => "classify",
            Stage::Networks => "networks",
            Stage::Metrics => "metrics",
            Stage::Text => "text",
            Stage::Annotations => "annotations",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown stage {s:?}"))
    }
}

/// An intermediate file another stage should have produced.
#[derive(Debug)]
pub struct MissingIntermediate {
    pub file: String,
    pub producer: Stage,
}

impl fmt::Display for MissingIntermediate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "missing intermediate {}; run the `{}` stage first", self.file, self.producer)
    }
}

impl std::error::Error for MissingIntermediate {}

#[derive(Debug)]
pub struct StageError {
    pub stage: Stage,
    pub source: anyhow::Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {:#}", self.stage, self.source)
    }
}

impl std::error::Error for StageError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(self.source.as_ref())
    }
}

/// Output directory of one stage; records what it writes so a failed stage
/// can clean up after itself.
struct Workdir<'a> {
    root: &'a Path,
    written: Vec<PathBuf>,
}

impl<'a> Workdir<'a> {
    fn new(root: &'a Path) -> Self {
        Workdir {
            root,
            written: Vec::new(),
        }
    }

    fn input(&self, file: &str, producer: Stage) -> Result<PathBuf> {
        let path = self.root.join(file);
        if path.is_file() {
            Ok(path)
        } else {
            Err(MissingIntermediate {
                file: file.to_owned(),
                producer,
            }
            .into())
        }
    }

    fn open(&self, file: &str, producer: Stage) -> Result<fs::File> {
        let path = self.input(file, producer)?;
        fs::File::open(&path).with_context(|| format!("opening {}", path.display()))
    }

    /// Writes `file` through a temporary sibling and renames it into place.
    fn write(&mut self, file: &str, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        let path = self.root.join(file);
        let mut tmp = tempfile::NamedTempFile::new_in(self.root)?;
        {
            let mut w = std::io::BufWriter::new(tmp.as_file_mut());
            body(&mut w)?;
            w.flush()?;
        }
        tmp.persist(&path).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path);
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, file: &str, value: &T) -> Result<()> {
        self.write(file, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            w.write_all(b"\n")?;
            Ok(())
        })
    }

    fn corpus(&self) -> Result<Corpus> {
        Ok(read_corpus(self.open(CORPUS, Stage::Ingest)?, LoadMode::Strict)?.0)
    }

    fn stances(&self) -> Result<StanceTable> {
        Ok(StanceTable::read_csv(self.open(STANCE, Stage::Classify)?)?)
    }
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Serialize)]
struct IngestSummary {
    lines_read: usize,
    skipped_count: usize,
    duplicate_count: usize,
    tweets: usize,
    users: usize,
    corpus_digest: String,
}

fn ingest(cfg: &PipelineConfig, dir: &mut Workdir) -> Result<()> {
    let mode = if cfg.lenient { LoadMode::Lenient } else { LoadMode::Strict };
    let (corpus, report) = load_corpus(&cfg.corpus_path, mode)?;
    dir.write(CORPUS, |w| Ok(corpus.write_jsonl(w)?))?;
    dir.write_json(
        "ingest.json",
        &IngestSummary {
            lines_read: report.lines_read,
            skipped_count: report.skipped_count,
            duplicate_count: report.duplicate_count,
            tweets: corpus.len(),
            users: corpus.user_count(),
            corpus_digest: corpus.digest().to_owned(),
        },
    )
}

fn hashtags(cfg: &PipelineConfig, dir: &mut Workdir) -> Result<()> {
    let graph = build_cooccurrence_graph(&dir.corpus()?, cfg.min_cooccurrence)?;
    dir.write(GRAPH, |w| Ok(graph.write_json(w)?))
}

#[derive(Serialize)]
struct PropagationSummary {
    nodes: usize,
    labeled: usize,
    missing_seeds: Vec<String>,
    negative: usize,
    positive: usize,
    zero: usize,
}

fn propagate(cfg: &PipelineConfig, dir: &mut Workdir) -> Result<()> {
    let graph = HashtagGraph::read_json(dir.open(GRAPH, Stage::Hashtags)?)?;
    let seeds = SeedSpec::load(&cfg.seed_file)?;
    let (seeded, missing_seeds) = seed_labels(&graph, &seeds);
    let labels = propagate_labels(&seeded, &cfg.propagation())?;
    let summary = label_histogram(&labels);
    dir.write(LABELS, |w| Ok(write_labels_csv(&labels, w)?))?;
    dir.write_json(
        "propagation.json",
        &PropagationSummary {
            nodes: graph.node_count(),
            labeled: labels.len(),
            missing_seeds,
            negative: summary.negative,
            positive: summary.positive,
            zero: summary.zero,
        },
    )
}

fn classify(cfg: &PipelineConfig, dir: &mut Workdir) -> Result<()> {
    let corpus = dir.corpus()?;
    let labels = read_labels_csv(dir.open(LABELS, Stage::Propagate)?)?;
    let table = classify_users(&corpus, &labels, &cfg.stance());
    dir.write(STANCE, |w| Ok(table.write_csv(w)?))?;
    let summary = BTreeMap::from([("users", table.counts()), ("tweets", group_tweet_counts(&corpus, &table))]);
    dir.write_json("stance_summary.json", &summary)
}

#[derive(Serialize)]
struct NetworkStats {
    nodes: usize,
    edges: usize,
    total_weight: u64,
}

#[derive(Serialize)]
struct NetworkDiagnostics {
    self_interactions: BTreeMap<InteractionKind, u64>,
    networks: BTreeMap<&'static str, NetworkStats>,
}

fn networks(cfg: &PipelineConfig, dir: &mut Workdir) -> Result<()> {
    let corpus = dir.corpus()?;
    let table = dir.stances()?;
    let opts = cfg.networks();
    let rt = build_network(&corpus, InteractionKind::Retweet, &opts);
    let mn = build_network(&corpus, InteractionKind::Mention, &opts);
    let rp = build_network(&corpus, InteractionKind::Reply, &opts);
    let all = all_communication(&rt, &mn, &rp, &corpus)?;
    let reciprocal = reciprocal_subnetwork(match cfg.reciprocal_base {
        NetworkKind::Retweet => &rt,
        NetworkKind::Mention => &mn,
        NetworkKind::Reply => &rp,
        _ => &all,
    });
    let influence = influence_base(&rt, &mn)?;

    let nets: BTreeMap<&'static str, CommNetwork> = [rt, mn, rp, all, reciprocal, influence]
        .into_iter()
        .map(|n| (n.kind().as_str(), n.with_stances(&table)))
        .collect();
    dir.write_json(NETWORKS, &nets)?;
    for (kind, n) in &nets {
        for fmt in ExportFormat::ALL {
            let file = format!("network_{kind}.{}", fmt.extension());
            dir.write(&file, |w| {
                match fmt {
                    ExportFormat::Dot => write_dot(n, w)?,
                    ExportFormat::Gexf => write_gexf(n, w)?,
                    ExportFormat::EdgeCsv => write_edge_csv(n, w)?,
                }
                Ok(())
            })?;
        }
    }
    let diagnostics = NetworkDiagnostics {
        self_interactions: self_interaction_counts(&corpus, &opts),
        networks: nets
            .iter()
            .map(|(k, n)| {
                (
                    *k,
                    NetworkStats {
                        nodes: n.node_count(),
                        edges: n.edge_count(),
                        total_weight: n.total_weight(),
                    },
                )
            })
            .collect(),
    };
    dir.write_json("network_diagnostics.json", &diagnostics)
}

#[derive(Serialize)]
struct InfluencerSummary {
    k: usize,
    count: usize,
    /// Share of the group's accounts.
    fraction: f64,
    accounts: BTreeSet<String>,
}

impl InfluencerSummary {
    fn new(r: &InfluencerReport, members: usize) -> Self {
        InfluencerSummary {
            k: r.k,
            count: r.super_set.len(),
            fraction: r.fraction_of(members),
            accounts: r.super_set.clone(),
        }
    }
}

#[derive(Serialize)]
struct GroupInfluencers {
    members: usize,
    super_spreaders: InfluencerSummary,
    super_friends: InfluencerSummary,
}

fn metrics(cfg: &PipelineConfig, dir: &mut Workdir) -> Result<()> {
    let table = dir.stances()?;
    let nets: BTreeMap<String, CommNetwork> = serde_json::from_reader(std::io::BufReader::new(dir.open(NETWORKS, Stage::Networks)?))
        .context("reading networks.json")?;
    let net = |kind: NetworkKind| {
        nets.get(kind.as_str())
            .with_context(|| format!("networks.json lacks the {} network", kind.as_str()))
    };
    let all = net(NetworkKind::AllCommunication)?;
    let reciprocal = net(NetworkKind::Reciprocal)?;
    let influence = net(NetworkKind::ReceivedInfluence)?;

    let mut rows = Vec::new();
    for g in GROUPS {
        for (with_unc, groups) in [(false, vec![g]), (true, vec![g, Stance::Unclassified])] {
            rows.push(GroupMetrics::new(g.as_str(), with_unc, &echo_chamberness(&group_subgraph(all, &table, &groups))));
        }
    }
    rows.push(GroupMetrics::new(
        "all",
        false,
        &echo_chamberness(&group_subgraph(all, &table, &GROUPS)),
    ));
    rows.push(GroupMetrics::new("all", true, &echo_chamberness(all)));
    dir.write_json("metrics.json", &rows)?;

    let mut summary = BTreeMap::new();
    for g in GROUPS {
        let members = table.members(g).count();
        let spreaders = super_spreaders(&group_subgraph(influence, &table, &[g]), cfg.top_k)?;
        let friends = super_friends(&group_subgraph(reciprocal, &table, &[g]), cfg.top_k)?;
        dir.write(&format!("super_spreaders_{g}.csv"), |w| Ok(spreaders.write_csv(w)?))?;
        dir.write(&format!("super_friends_{g}.csv"), |w| Ok(friends.write_csv(w)?))?;
        summary.insert(
            g.as_str(),
            GroupInfluencers {
                members,
                super_spreaders: InfluencerSummary::new(&spreaders, members),
                super_friends: InfluencerSummary::new(&friends, members),
            },
        );
    }
    dir.write_json("influencers.json", &summary)
}

#[derive(Serialize, Deserialize)]
struct TopicsFile {
    group: String,
    documents: usize,
    vocabulary_size: usize,
    topics: usize,
    alpha: f64,
    beta: f64,
    iterations: usize,
    rng_seed: u64,
    report: Vec<TopicReport>,
}

fn text(cfg: &PipelineConfig, dir: &mut Workdir) -> Result<()> {
    let corpus = dir.corpus()?;
    let table = dir.stances()?;
    let stop = match &cfg.stopword_file {
        Some(p) => StopWords::load(p)?,
        None => StopWords::english(),
    };
    let exclude: BTreeSet<String> = cfg.exclude_terms.iter().map(|t| t.to_lowercase()).collect();
    let mut docs = tokenize(&corpus, &stop, cfg.text_hashtags);
    for d in &mut docs {
        d.tokens.retain(|t| !exclude.contains(t));
    }
    let lda = cfg.lda();
    for g in GROUPS {
        let group_docs: Vec<_> = docs
            .iter()
            .filter(|d| corpus.tweet(&d.doc_id).is_some_and(|t| table.stance_of(&t.user_id) == g))
            .cloned()
            .collect();
        let freqs = unigram_frequencies(&group_docs, cfg.top_terms)?;
        dir.write(&format!("frequencies_{g}.csv"), |w| Ok(write_frequencies_csv(&freqs, w)?))?;
        let (documents, vocabulary_size, report) = match lda_fit(&group_docs, &lda) {
            Ok(m) => (m.doc_ids.len(), m.vocabulary.len(), m.report(cfg.top_words, None)),
            Err(CoreError::NoDocuments) => (0, 0, Vec::new()),
            Err(e) => return Err(e.into()),
        };
        dir.write_json(
            &format!("topics_{g}.json"),
            &TopicsFile {
                group: g.to_string(),
                documents,
                vocabulary_size,
                topics: lda.topics,
                alpha: lda.alpha,
                beta: lda.beta,
                iterations: lda.iterations,
                rng_seed: lda.seed,
                report,
            },
        )?;
    }
    Ok(())
}

fn annotations(cfg: &PipelineConfig, dir: &mut Workdir) -> Result<()> {
    if cfg.bot_scores.is_none() && cfg.account_types.is_none() {
        log::info!("no annotation inputs configured");
        return Ok(());
    }
    let corpus = dir.corpus()?;
    let table = dir.stances()?;
    if let Some(path) = &cfg.bot_scores {
        let scores = load_bot_scores(path)?;
        let grid = cfg.bot_thresholds.clone().unwrap_or_else(default_grid);
        let scope = if cfg.global_sweep { SweepScope::Global } else { SweepScope::PerGroup };
        let rows = bot_threshold_sweep(&corpus, &table, &scores, &grid, scope)?;
        dir.write("bot_sweep.csv", |w| Ok(write_sweep_csv(&rows, w)?))?;
    }
    if let Some(path) = &cfg.account_types {
        let types = load_account_types(path)?;
        dir.write_json("news_concentration.json", &news_source_concentration(&corpus, &table, &types))?;
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub generated_at: String,
    pub config_hash: String,
    pub rng_seed: u64,
    pub config: PipelineConfig,
    /// SHA-256 of every input file, keyed by config field.
    pub inputs: BTreeMap<String, String>,
    /// SHA-256 of every other file in the bundle.
    pub artifacts: BTreeMap<String, String>,
}

fn report(cfg: &PipelineConfig, dir: &mut Workdir) -> Result<()> {
    dir.input(CORPUS, Stage::Ingest)?;
    let mut inputs = BTreeMap::new();
    let optional = [
        ("stopword_file", &cfg.stopword_file),
        ("bot_scores", &cfg.bot_scores),
        ("account_types", &cfg.account_types),
    ];
    for (key, path) in [("corpus_path", Some(&cfg.corpus_path)), ("seed_file", Some(&cfg.seed_file))]
        .into_iter()
        .chain(optional.into_iter().map(|(k, p)| (k, p.as_ref())))
    {
        if let Some(path) = path {
            inputs.insert(key.to_owned(), sha256_file(path)?);
        }
    }
    let mut artifacts = BTreeMap::new();
    for entry in fs::read_dir(dir.root)? {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if entry.file_type()?.is_file() && name != MANIFEST && !name.starts_with('.') {
            artifacts.insert(name, sha256_file(&entry.path())?);
        }
    }
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_owned(),
        generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        config_hash: cfg.hash(),
        rng_seed: cfg.rng_seed,
        config: cfg.clone(),
        inputs,
        artifacts,
    };
    dir.write_json(MANIFEST, &manifest)
}

fn execute(stage: Stage, cfg: &PipelineConfig, root: &Path) -> std::result::Result<(), StageError> {
    let mut dir = Workdir::new(root);
    let result = match stage {
        Stage::Ingest => ingest(cfg, &mut dir),
        Stage::Hashtags => hashtags(cfg, &mut dir),
        Stage::Propagate => propagate(cfg, &mut dir),
        Stage::Classify => classify(cfg, &mut dir),
        Stage::Networks => networks(cfg, &mut dir),
        Stage::Metrics => metrics(cfg, &mut dir),
        Stage::Text => text(cfg, &mut dir),
        Stage::Annotations => annotations(cfg, &mut dir),
        Stage::Report => report(cfg, &mut dir),
    };
    result.map_err(|source| {
        for p in &dir.written {
            let _ = fs::remove_file(p);
        }
        StageError { stage, source }
    })
}

/// Runs one stage against the intermediates already in `cfg.output_dir`.
pub fn run_stage(cfg: &PipelineConfig, stage: Stage) -> Result<()> {
    cfg.validate().context("invalid config")?;
    fs::create_dir_all(&cfg.output_dir).with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    execute(stage, cfg, &cfg.output_dir)?;
    Ok(())
}

/// Runs every stage in a staging directory next to `cfg.output_dir` and
/// moves the bundle into place only once all of them succeed.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<()> {
    cfg.validate().context("invalid config")?;
    let parent = match cfg.output_dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).with_context(|| format!("creating {}", parent.display()))?;
    let staging = tempfile::Builder::new().prefix(".polarnet-staging-").tempdir_in(&parent)?;
    for stage in Stage::ALL {
        log::info!("running {stage}");
        execute(stage, cfg, staging.path())?;
    }
    fs::create_dir_all(&cfg.output_dir).with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    for entry in fs::read_dir(staging.path())? {
        let entry = entry?;
        fs::rename(entry.path(), cfg.output_dir.join(entry.file_name()))?;
    }
    Ok(())
}
