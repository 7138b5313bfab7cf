//! DOT, GEXF 1.2 and edge-list CSV serialization.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CommNetwork, NetworkKind};
use crate::stance::Stance;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExportFormat {
    Dot,
    Gexf,
    EdgeCsv,
}

impl ExportFormat {
    pub const ALL: [ExportFormat; 3] = [ExportFormat::Dot, ExportFormat::Gexf, ExportFormat::EdgeCsv];

    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Dot => "dot",
            ExportFormat::Gexf => "gexf",
            ExportFormat::EdgeCsv => "csv",
        }
    }
}

fn color(s: Stance) -> &'static str {
    match s {
        Stance::Disbeliever => "red",
        Stance::Believer => "green",
        Stance::Unclassified => "gray",
    }
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn node_stance(n: &CommNetwork, u: &str) -> Stance {
    n.stance_of(u).unwrap_or(Stance::Unclassified)
}

pub fn write_dot<W: Write>(n: &CommNetwork, mut out: W) -> std::io::Result<()> {
    writeln!(out, "digraph {} {{", dot_quote(n.kind().as_str()))?;
    for u in n.nodes() {
        let s = node_stance(n, u);
        writeln!(out, "  {} [stance=\"{s}\", color=\"{}\"];", dot_quote(u), color(s))?;
    }
    for (a, b, w) in n.edges() {
        writeln!(out, "  {} -> {} [weight={w}];", dot_quote(a), dot_quote(b))?;
    }
    writeln!(out, "}}")?;
    out.flush()
}

pub fn write_gexf<W: Write>(n: &CommNetwork, mut out: W) -> std::io::Result<()> {
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(out, r#"<gexf xmlns="http://www.gexf.net/1.2draft" version="1.2">"#)?;
    writeln!(out, r#"  <meta><description>{}</description></meta>"#, n.kind())?;
    writeln!(out, r#"  <graph mode="static" defaultedgetype="directed">"#)?;
    writeln!(out, r#"    <attributes class="node">"#)?;
    writeln!(out, r#"      <attribute id="stance" title="stance" type="string"/>"#)?;
    writeln!(out, r#"    </attributes>"#)?;
    writeln!(out, r#"    <nodes>"#)?;
    for u in n.nodes() {
        let stance = node_stance(n, u);
        let u = xml_escape(u);
        writeln!(out, r#"      <node id="{u}" label="{u}">"#)?;
        writeln!(
            out,
            r#"        <attvalues><attvalue for="stance" value="{stance}"/></attvalues>"#
        )?;
        writeln!(out, r#"      </node>"#)?;
    }
    writeln!(out, r#"    </nodes>"#)?;
    writeln!(out, r#"    <edges>"#)?;
    for (i, (a, b, w)) in n.edges().enumerate() {
        writeln!(
            out,
            r#"      <edge id="{i}" source="{}" target="{}" weight="{w}"/>"#,
            xml_escape(a),
            xml_escape(b)
        )?;
    }
    writeln!(out, r#"    </edges>"#)?;
    writeln!(out, r#"  </graph>"#)?;
    writeln!(out, r#"</gexf>"#)?;
    out.flush()
}

/// `src,dst,weight`, one row per edge.
pub fn write_edge_csv<W: Write>(n: &CommNetwork, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["src", "dst", "weight"])?;
    for (a, b, weight) in n.edges() {
        w.write_record([a, b, &weight.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<edge csv>", e))?;
    Ok(())
}

pub fn read_edge_csv<R: Read>(kind: NetworkKind, input: R) -> Result<CommNetwork> {
    let mut reader = csv::Reader::from_reader(input);
    let mut edges = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let weight = rec.get(2).and_then(|w| w.parse::<u64>().ok());
        match (rec.get(0), rec.get(1), weight) {
            (Some(a), Some(b), Some(w)) if rec.len() == 3 => edges.push((a.to_owned(), b.to_owned(), w)),
            _ => {
                return Err(Error::Malformed {
                    line: i + 2,
                    message: "expected src,dst,weight".into(),
                })
            }
        }
    }
    CommNetwork::from_edges(kind, Vec::<String>::new(), edges)
}

pub fn export_graph(n: &CommNetwork, format: ExportFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let out = BufWriter::new(file);
    match format {
        ExportFormat::Dot => write_dot(n, out).map_err(|e| Error::io(path, e)),
        ExportFormat::Gexf => write_gexf(n, out).map_err(|e| Error::io(path, e)),
        ExportFormat::EdgeCsv => write_edge_csv(n, out),
    }
}
