//! Reciprocity, density, echo-chamberness and influential-account sets.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::commnet::{CommNetwork, NetworkKind};
use crate::{Error, Result};

/// Fraction of directed edges whose reverse edge is also present; 0 without edges.
pub fn reciprocity(n: &CommNetwork) -> f64 {
    if n.edge_count() == 0 {
        return 0.0;
    }
    let mutual = n.edges().filter(|(a, b, _)| n.has_edge(b, a)).count();
    mutual as f64 / n.edge_count() as f64
}

/// Distinct directed edges over `|V|(|V|-1)`; 0 below two nodes.
pub fn density(n: &CommNetwork) -> f64 {
    let v = n.node_count();
    if v < 2 {
        return 0.0;
    }
    n.edge_count() as f64 / (v as f64 * (v as f64 - 1.0))
}

/// Total weight over the maximum possible total, `max_weight * |V|(|V|-1)`.
pub fn weighted_density(n: &CommNetwork) -> f64 {
    let v = n.node_count();
    let max = n.edges().map(|(_, _, w)| w).max().unwrap_or(0);
    if v < 2 || max == 0 {
        return 0.0;
    }
    n.total_weight() as f64 / (max as f64 * v as f64 * (v as f64 - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EchoResult {
    pub reciprocity: f64,
    pub density: f64,
    pub echo_chamberness: f64,
    pub node_count: usize,
    pub edge_count: usize,
}

/// `e = (r * d)^(1/3)`.
pub fn echo_chamberness(n: &CommNetwork) -> EchoResult {
    let r = reciprocity(n);
    let d = density(n);
    EchoResult {
        reciprocity: r,
        density: d,
        echo_chamberness: (r * d).cbrt(),
        node_count: n.node_count(),
        edge_count: n.edge_count(),
    }
}

/// One line of the metrics report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMetrics {
    pub group: String,
    pub with_unclassified: bool,
    pub r: f64,
    pub d: f64,
    pub e: f64,
    pub n_nodes: usize,
    pub n_edges: usize,
}

impl GroupMetrics {
    pub fn new(group: impl Into<String>, with_unclassified: bool, echo: &EchoResult) -> Self {
        GroupMetrics {
            group: group.into(),
            with_unclassified,
            r: echo.reciprocity,
            d: echo.density,
            e: echo.echo_chamberness,
            n_nodes: echo.node_count,
            n_edges: echo.edge_count,
        }
    }
}

/// Mentioned-by plus retweeted-by network: edge `(x, y)` with weight `w`
/// means `y` mentioned or retweeted `x` `w` times. An account's received
/// influence is therefore its out-weight here.
pub fn influence_base(retweet: &CommNetwork, mention: &CommNetwork) -> Result<CommNetwork> {
    if retweet.kind() != NetworkKind::Retweet || mention.kind() != NetworkKind::Mention {
        return Err(Error::InvalidArgument("influence base needs a retweet and a mention network".into()));
    }
    CommNetwork::merged(NetworkKind::ReceivedInfluence, &[&retweet.transpose(), &mention.transpose()])
}

const POWER_TOLERANCE: f64 = 1e-10;
const POWER_MAX_ITER: usize = 1000;

fn symmetric_adjacency(n: &CommNetwork) -> (Vec<&str>, Vec<BTreeMap<usize, f64>>) {
    let names: Vec<&str> = n.nodes().iter().map(String::as_str).collect();
    let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    let mut adj = vec![BTreeMap::new(); names.len()];
    for (a, b, w) in n.edges() {
        let (i, j) = (index[a], index[b]);
        *adj[i].entry(j).or_insert(0.0) += w as f64;
        *adj[j].entry(i).or_insert(0.0) += w as f64;
    }
    (names, adj)
}

fn components(adj: &[BTreeMap<usize, f64>]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; adj.len()];
    let mut out = Vec::new();
    for start in 0..adj.len() {
        if seen[start] || adj[start].is_empty() {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for &j in adj[i].keys() {
                if !seen[j] {
                    seen[j] = true;
                    comp.push(j);
                    queue.push_back(j);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Power iteration on `A + I` restricted to one component. The shift keeps
/// bipartite components from oscillating without moving the eigenvector.
/// Returns the unit eigenvector and its eigenvalue for `A`.
fn component_eigenvector(adj: &[BTreeMap<usize, f64>], comp: &[usize]) -> (Vec<f64>, f64) {
    let local: BTreeMap<usize, usize> = comp.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let m = comp.len();
    let mut x = vec![1.0 / (m as f64).sqrt(); m];
    let multiply = |x: &[f64]| -> Vec<f64> {
        comp.iter()
            .map(|&i| adj[i].iter().map(|(j, w)| w * x[local[j]]).sum())
            .collect()
    };
    for _ in 0..POWER_MAX_ITER {
        let ax = multiply(&x);
        let mut next: Vec<f64> = ax.iter().zip(&x).map(|(a, b)| a + b).collect();
        let norm = next.iter().map(|v| v * v).sum::<f64>().sqrt();
        next.iter_mut().for_each(|v| *v /= norm);
        let delta = next.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        x = next;
        if delta < POWER_TOLERANCE {
            break;
        }
    }
    let ax = multiply(&x);
    let lambda = ax.iter().zip(&x).map(|(a, b)| a * b).sum();
    (x, lambda)
}

/// Eigenvector centrality of the symmetrized weighted network `W + Wᵀ`,
/// unit L2 norm. On a disconnected network only the component with the
/// largest leading eigenvalue scores; every other account gets 0.
pub fn eigenvector_centrality(n: &CommNetwork) -> BTreeMap<String, f64> {
    let (names, adj) = symmetric_adjacency(n);
    let mut scores = vec![0.0; names.len()];
    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
    for comp in components(&adj) {
        let (vec, lambda) = component_eigenvector(&adj, &comp);
        let better = match &best {
            None => true,
            Some((bl, bc, _)) => {
                let tol = 1e-12 * bl.abs().max(1.0);
                lambda > bl + tol || ((lambda - bl).abs() <= tol && comp.len() > bc.len())
            }
        };
        if better {
            best = Some((lambda, comp, vec));
        }
    }
    if let Some((_, comp, vec)) = best {
        for (i, v) in comp.into_iter().zip(vec) {
            scores[i] = v.max(0.0);
        }
    }
    names.into_iter().map(str::to_owned).zip(scores).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfluenceRow {
    /// Weighted count of times the account was addressed.
    pub received: u64,
    pub eigenvector: f64,
    /// Distinct accounts that addressed it.
    pub distinct_sources: u64,
    /// Competition ranks (1 = best) on the three measures.
    pub ranks: [usize; 3],
    pub is_super: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluencerReport {
    pub k: usize,
    pub rows: BTreeMap<String, InfluenceRow>,
    pub super_set: BTreeSet<String>,
    /// `|super_set|` over the accounts in the network, 0 when it is empty.
    pub fraction: f64,
}

impl InfluencerReport {
    /// `|super_set| / population`, for a population other than the network's nodes.
    pub fn fraction_of(&self, population: usize) -> f64 {
        if population == 0 {
            0.0
        } else {
            self.super_set.len() as f64 / population as f64
        }
    }

    /// `user_id,measure1,measure2,measure3,is_super`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["user_id", "measure1", "measure2", "measure3", "is_super"])?;
        for (u, r) in &self.rows {
            w.write_record([
                u.as_str(),
                &r.received.to_string(),
                &r.eigenvector.to_string(),
                &r.distinct_sources.to_string(),
                if r.is_super { "true" } else { "false" },
            ])?;
        }
        w.flush().map_err(|e| Error::io("<influencers>", e))?;
        Ok(())
    }
}

/// Competition rank of every score (1 + number of strictly better scores,
/// where "better" means larger by more than `tol`).
fn ranks(scores: &[f64], tol: f64) -> Vec<usize> {
    let mut sorted: Vec<f64> = scores.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    scores
        .iter()
        .map(|&s| 1 + sorted.partition_point(|&x| x > s + tol))
        .collect()
}

/// Accounts with a positive score ranked within the top `k`; ties at the
/// cut are all included.
fn top_k(scores: &[f64], k: usize, tol: f64) -> Vec<bool> {
    ranks(scores, tol)
        .into_iter()
        .zip(scores)
        .map(|(r, &s)| r <= k && s > tol)
        .collect()
}

/// Ranks accounts on received weight, eigenvector centrality and distinct
/// sources in base orientation (out-edges are received influence).
fn influencers(base: &CommNetwork, k: usize) -> Result<InfluencerReport> {
    if k < 1 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let names: Vec<&String> = base.nodes().iter().collect();
    let mut received: BTreeMap<&str, u64> = BTreeMap::new();
    let mut sources: BTreeMap<&str, u64> = BTreeMap::new();
    for (x, _, w) in base.edges() {
        *received.entry(x).or_insert(0) += w;
        *sources.entry(x).or_insert(0) += 1;
    }
    let eigen = eigenvector_centrality(base);
    let m1: Vec<f64> = names.iter().map(|u| received.get(u.as_str()).copied().unwrap_or(0) as f64).collect();
    let m2: Vec<f64> = names.iter().map(|u| eigen[*u]).collect();
    let m3: Vec<f64> = names.iter().map(|u| sources.get(u.as_str()).copied().unwrap_or(0) as f64).collect();

    // Eigenvector scores of structurally equivalent accounts differ only by rounding.
    const EIGEN_TIE: f64 = 1e-9;
    let (r1, r2, r3) = (ranks(&m1, 0.0), ranks(&m2, EIGEN_TIE), ranks(&m3, 0.0));
    let (t1, t2, t3) = (top_k(&m1, k, 0.0), top_k(&m2, k, EIGEN_TIE), top_k(&m3, k, 0.0));

    let mut rows = BTreeMap::new();
    let mut super_set = BTreeSet::new();
    for (i, u) in names.iter().enumerate() {
        let is_super = t1[i] || t2[i] || t3[i];
        if is_super {
            super_set.insert((*u).clone());
        }
        rows.insert(
            (*u).clone(),
            InfluenceRow {
                received: m1[i] as u64,
                eigenvector: m2[i],
                distinct_sources: m3[i] as u64,
                ranks: [r1[i], r2[i], r3[i]],
                is_super,
            },
        );
    }
    let fraction = if names.is_empty() {
        0.0
    } else {
        super_set.len() as f64 / names.len() as f64
    };
    Ok(InfluencerReport {
        k,
        rows,
        super_set,
        fraction,
    })
}

/// Super spreaders on a [`influence_base`] network.
pub fn super_spreaders(base: &CommNetwork, k: usize) -> Result<InfluencerReport> {
    influencers(base, k)
}

/// Super friends on a reciprocal (symmetric) network.
pub fn super_friends(reciprocal: &CommNetwork, k: usize) -> Result<InfluencerReport> {
    if let Some((a, b)) = reciprocal.asymmetric_edge() {
        return Err(Error::NotSymmetric(a.to_owned(), b.to_owned()));
    }
    influencers(reciprocal, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commnet::{build_network, reciprocal_subnetwork};
    use crate::corpus::{Corpus, InteractionKind};
    use crate::testutil::{mention, retweet};

    fn net(edges: &[(&str, &str)]) -> CommNetwork {
        CommNetwork::from_edges(
            NetworkKind::AllCommunication,
            Vec::<&str>::new(),
            edges.iter().map(|&(a, b)| (a, b, 1)),
        )
        .unwrap()
    }

    fn complete(n: usize) -> CommNetwork {
        let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
        let mut edges = Vec::new();
        for a in &names {
            for b in &names {
                if a != b {
                    edges.push((a.clone(), b.clone(), 1));
                }
            }
        }
        CommNetwork::from_edges(NetworkKind::AllCommunication, Vec::<String>::new(), edges).unwrap()
    }

    #[test]
    fn reciprocity_examples() {
        assert_eq!(reciprocity(&complete(4)), 1.0);
        assert_eq!(reciprocity(&net(&[("a", "b")])), 0.0);
        assert_eq!(reciprocity(&net(&[("a", "b"), ("b", "a"), ("a", "c")])), 2.0 / 3.0);
        assert_eq!(reciprocity(&net(&[])), 0.0);
    }

    #[test]
    fn density_examples() {
        assert_eq!(density(&complete(3)), 1.0);
        assert_eq!(density(&net(&[("a", "b"), ("b", "a"), ("a", "c")])), 0.5);
        let single = CommNetwork::from_edges(NetworkKind::AllCommunication, ["a"], Vec::<(&str, &str, u64)>::new()).unwrap();
        assert_eq!(density(&single), 0.0);
    }

    #[test]
    fn weighted_density_bounds() {
        let n = CommNetwork::from_edges(NetworkKind::Mention, Vec::<&str>::new(), [("a", "b", 4), ("b", "a", 2)]).unwrap();
        assert_eq!(weighted_density(&n), 6.0 / 8.0);
        assert_eq!(weighted_density(&complete(3)), 1.0);
    }

    #[test]
    fn echo_examples() {
        let e = echo_chamberness(&complete(5));
        assert!((e.echo_chamberness - 1.0).abs() < 1e-15);
        assert_eq!(echo_chamberness(&net(&[("a", "b"), ("b", "c")])).echo_chamberness, 0.0);
        let e = echo_chamberness(&net(&[("a", "b"), ("b", "a"), ("a", "c")]));
        assert!((e.echo_chamberness - (1.0f64 / 3.0).powf(1.0 / 3.0)).abs() < 1e-12);
        assert_eq!(format!("{:.4}", e.echo_chamberness), "0.6934");
        assert_eq!((e.node_count, e.edge_count), (3, 3));
    }

    #[test]
    fn influence_base_received_counts() {
        let c = Corpus::from_tweets([retweet("1", "a", "b"), mention("2", "c", &["b"])]).unwrap();
        let o = Default::default();
        let base = influence_base(
            &build_network(&c, InteractionKind::Retweet, &o),
            &build_network(&c, InteractionKind::Mention, &o),
        )
        .unwrap();
        assert_eq!(base.weight("b", "a") + base.weight("b", "c"), 2);
        let rep = super_spreaders(&base, 3).unwrap();
        assert_eq!(rep.rows["b"].received, 2);
        assert_eq!(rep.rows["a"].received, 0);

        let c = Corpus::from_tweets([retweet("1", "a", "b"), retweet("2", "b", "a")]).unwrap();
        let base = influence_base(
            &build_network(&c, InteractionKind::Retweet, &o),
            &build_network(&c, InteractionKind::Mention, &o),
        )
        .unwrap();
        let rep = super_spreaders(&base, 3).unwrap();
        assert_eq!((rep.rows["a"].received, rep.rows["b"].received), (1, 1));
    }

    #[test]
    fn influence_base_checks_inputs() {
        let c = Corpus::from_tweets([retweet("1", "a", "b")]).unwrap();
        let other = Corpus::from_tweets([retweet("1", "x", "y")]).unwrap();
        let o = Default::default();
        let rt = build_network(&c, InteractionKind::Retweet, &o);
        let empty = influence_base(&rt, &build_network(&c, InteractionKind::Mention, &o)).unwrap();
        assert_eq!(empty.edge_count(), 1);
        assert!(matches!(
            influence_base(&rt, &build_network(&other, InteractionKind::Mention, &o)),
            Err(Error::MismatchedCorpora)
        ));
        assert!(influence_base(&rt, &rt).is_err());
    }

    fn star_base() -> CommNetwork {
        let tweets = (1..=5).map(|i| retweet(&i.to_string(), &format!("f{i}"), "x"));
        let c = Corpus::from_tweets(tweets).unwrap();
        let o = Default::default();
        influence_base(
            &build_network(&c, InteractionKind::Retweet, &o),
            &build_network(&c, InteractionKind::Mention, &o),
        )
        .unwrap()
    }

    #[test]
    fn star_center_tops_every_measure() {
        let rep = super_spreaders(&star_base(), 3).unwrap();
        assert_eq!(rep.rows["x"].ranks, [1, 1, 1]);
        assert!(rep.super_set.contains("x"));
        assert_eq!(rep.rows["x"].received, 5);
        assert_eq!(rep.rows["x"].distinct_sources, 5);
        // The five leaves tie on eigenvector centrality and are all kept.
        assert_eq!(rep.super_set.len(), 6);
        for i in 1..=5 {
            assert_eq!(rep.rows[&format!("f{i}")].ranks[1], 2);
        }
    }

    #[test]
    fn empty_network_has_no_spreaders() {
        let rep = super_spreaders(&net(&[]), 3).unwrap();
        assert!(rep.super_set.is_empty());
        assert_eq!(rep.fraction, 0.0);
        assert!(super_spreaders(&net(&[]), 0).is_err());
    }

    #[test]
    fn everyone_in_top_three() {
        let base = net(&[("x", "p"), ("y", "q")]);
        let rep = super_spreaders(&base, 3).unwrap();
        assert!(rep.super_set.contains("x") && rep.super_set.contains("y"));
    }

    #[test]
    fn super_friends_examples() {
        let pair = reciprocal_subnetwork(&net(&[("a", "b"), ("b", "a"), ("a", "c")]));
        let rep = super_friends(&pair, 3).unwrap();
        assert!(rep.super_set.is_subset(&BTreeSet::from(["a".to_string(), "b".to_string()])));

        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push(("hub".to_string(), format!("s{i}")));
            edges.push((format!("s{i}"), "hub".to_string()));
        }
        let star = CommNetwork::from_edges(
            NetworkKind::Reciprocal,
            Vec::<String>::new(),
            edges.into_iter().map(|(a, b)| (a, b, 1)),
        )
        .unwrap();
        let rep = super_friends(&star, 3).unwrap();
        assert_eq!(rep.rows["hub"].ranks, [1, 1, 1]);

        assert!(super_friends(&reciprocal_subnetwork(&net(&[])), 3).unwrap().super_set.is_empty());
        assert!(matches!(super_friends(&net(&[("a", "b")]), 3), Err(Error::NotSymmetric(..))));
    }

    #[test]
    fn disconnected_uses_dominant_component() {
        // Triangle (leading eigenvalue 4 on W + Wᵀ) beats a single pair (2).
        let n = net(&[("a", "b"), ("b", "c"), ("c", "a"), ("p", "q")]);
        let e = eigenvector_centrality(&n);
        assert_eq!((e["p"], e["q"]), (0.0, 0.0));
        for u in ["a", "b", "c"] {
            assert!((e[u] - 1.0 / 3f64.sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(ranks(&[3.0, 1.0, 3.0, 2.0], 0.0), vec![1, 4, 1, 3]);
        assert_eq!(top_k(&[5.0, 4.0, 4.0, 4.0, 1.0], 2, 0.0), vec![true, true, true, true, false]);
        assert_eq!(top_k(&[2.0, 0.0, 0.0], 3, 0.0), vec![true, false, false]);
    }

    #[test]
    fn influencer_csv() {
        let rep = super_spreaders(&star_base(), 1).unwrap();
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("user_id,measure1,measure2,measure3,is_super\n"));
        assert_eq!(text.lines().count(), 7);
        assert!(text.lines().any(|l| l.starts_with("x,5,") && l.ends_with(",5,true")));
        assert_eq!(rep.super_set, BTreeSet::from(["x".to_string()]));
        assert_eq!(rep.fraction_of(12), 1.0 / 12.0);
    }
}
