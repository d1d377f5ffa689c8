//! GraphML dialect for lane graphs.
//!
//! Key declarations are always written in the order of [`KEYS`]. Floats use
//! Rust's shortest round-trip formatting, so parsing a written document
//! yields bit-identical values. Several `<graph>` elements may share one
//! document; ingest stores the road and pedestrian graphs together.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::FORMAT_VERSION;
use crate::category::ActorCategory;
use crate::error::{Error, Result};
use crate::lanegraph::{ActorAttributes, GraphEdge, GraphKind, GraphNode, LaneGraph, NodeKind, Relation};
use crate::opendrive::Pose;

const NS: &str = "http://graphml.graphdrawing.org/xmlns";

/// (id, domain, type) for every declared key.
const KEYS: &[(&str, &str, &str)] = &[
    ("format_version", "graph", "int"),
    ("map_id", "graph", "string"),
    ("graph_kind", "graph", "string"),
    ("spacing", "graph", "double"),
    ("x", "node", "double"),
    ("y", "node", "double"),
    ("heading", "node", "double"),
    ("s", "node", "double"),
    ("road", "node", "string"),
    ("section", "node", "int"),
    ("lane", "node", "int"),
    ("kind", "node", "string"),
    ("actor", "node", "string"),
    ("category", "node", "string"),
    ("model", "node", "string"),
    ("velocity", "node", "double"),
    ("offset", "node", "double"),
    ("ego", "node", "boolean"),
    ("relation", "edge", "string"),
    ("length", "edge", "double"),
];

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn graph_kind_str(kind: GraphKind) -> &'static str {
    match kind {
        GraphKind::Road => "road",
        GraphKind::Pedestrian => "pedestrian",
    }
}

fn node_kind_str(kind: NodeKind) -> &'static str {
    match kind {
        NodeKind::RoadBound => "road_bound",
        NodeKind::Pedestrian => "pedestrian",
    }
}

pub fn graph_to_graphml(graph: &LaneGraph) -> String {
    graphs_to_graphml(&[graph])
}

pub fn graphs_to_graphml(graphs: &[&LaneGraph]) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(out, "<graphml xmlns=\"{NS}\">");
    for (id, domain, ty) in KEYS {
        let _ = writeln!(
            out,
            "  <key id=\"{id}\" for=\"{domain}\" attr.name=\"{id}\" attr.type=\"{ty}\"/>"
        );
    }
    for graph in graphs {
        write_graph(&mut out, graph);
    }
    out.push_str("</graphml>\n");
    out
}

fn data(out: &mut String, indent: &str, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{indent}<data key=\"{key}\">{}</data>", escape(&value.to_string()));
}

fn write_graph(out: &mut String, graph: &LaneGraph) {
    let kind = graph_kind_str(graph.kind);
    let default = if graph.kind == GraphKind::Road { "directed" } else { "undirected" };
    let _ = writeln!(out, "  <graph id=\"{kind}\" edgedefault=\"{default}\">");
    data(out, "    ", "format_version", FORMAT_VERSION);
    data(out, "    ", "map_id", &graph.map_id);
    data(out, "    ", "graph_kind", kind);
    data(out, "    ", "spacing", graph.spacing);
    for n in graph.nodes() {
        let _ = writeln!(out, "    <node id=\"{}\">", escape(&n.id));
        let ind = "      ";
        data(out, ind, "x", n.pose.x);
        data(out, ind, "y", n.pose.y);
        data(out, ind, "heading", n.pose.heading);
        data(out, ind, "s", n.s_coord);
        data(out, ind, "road", &n.road_id);
        data(out, ind, "section", n.section);
        data(out, ind, "lane", n.lane_id);
        data(out, ind, "kind", node_kind_str(n.kind));
        if let Some(a) = &n.actor {
            data(out, ind, "actor", &a.actor_id);
            data(out, ind, "category", a.category);
            if let Some(m) = &a.model {
                data(out, ind, "model", m);
            }
            data(out, ind, "velocity", a.velocity);
            data(out, ind, "offset", a.offset);
            data(out, ind, "ego", a.ego);
        }
        out.push_str("    </node>\n");
    }
    for e in graph.edges() {
        let _ = writeln!(
            out,
            "    <edge source=\"{}\" target=\"{}\" directed=\"{}\">",
            escape(&e.from),
            escape(&e.to),
            e.relation.is_directed()
        );
        data(out, "      ", "relation", e.relation.as_str());
        data(out, "      ", "length", e.length);
        out.push_str("    </edge>\n");
    }
    out.push_str("  </graph>\n");
}

/// A parsed document plus warnings about content that was skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedGraphs {
    pub graphs: Vec<LaneGraph>,
    pub warnings: Vec<String>,
}

pub fn graphml_to_graph(text: &str) -> Result<(LaneGraph, Vec<String>)> {
    let mut parsed = graphml_to_graphs(text)?;
    match parsed.graphs.len() {
        1 => Ok((parsed.graphs.remove(0), parsed.warnings)),
        n => Err(Error::Format(format!("expected one graph, found {n}"))),
    }
}

struct Reader<'a> {
    /// key id -> attribute name
    keys: BTreeMap<String, String>,
    warnings: &'a mut Vec<String>,
}

impl Reader<'_> {
    /// Known `<data>` children of an element, by attribute name.
    fn data<'d>(&mut self, node: roxmltree::Node<'d, 'd>, what: &str) -> BTreeMap<String, &'d str> {
        let mut out = BTreeMap::new();
        for d in node.children().filter(|c| c.has_tag_name((NS, "data")) || c.has_tag_name("data")) {
            let key = d.attribute("key").unwrap_or("");
            let Some(name) = self.keys.get(key) else {
                self.warnings.push(format!("{what}: ignoring data for undeclared key {key:?}"));
                continue;
            };
            if !KEYS.iter().any(|(k, _, _)| k == name) {
                self.warnings.push(format!("{what}: ignoring unknown key {name:?}"));
                continue;
            }
            out.insert(name.clone(), d.text().unwrap_or(""));
        }
        out
    }
}

fn required<'d>(map: &BTreeMap<String, &'d str>, key: &str, what: &str) -> Result<&'d str> {
    map.get(key)
        .copied()
        .ok_or_else(|| Error::Format(format!("{what} is missing mandatory key {key}")))
}

fn number<T: std::str::FromStr>(map: &BTreeMap<String, &str>, key: &str, what: &str) -> Result<T> {
    let raw = required(map, key, what)?;
    raw.trim()
        .parse()
        .map_err(|_| Error::Format(format!("{what}: key {key} has invalid value {raw:?}")))
}

pub fn graphml_to_graphs(text: &str) -> Result<ParsedGraphs> {
    let doc = roxmltree::Document::parse(text).map_err(|e| {
        let pos = e.pos();
        Error::Xml {
            line: pos.row,
            column: pos.col,
            message: e.to_string(),
        }
    })?;
    let root = doc.root_element();
    if root.tag_name().name() != "graphml" {
        return Err(Error::Format("root element is not <graphml>".to_string()));
    }
    let mut warnings = Vec::new();
    let keys = root
        .children()
        .filter(|c| c.tag_name().name() == "key")
        .filter_map(|k| {
            let id = k.attribute("id")?;
            let name = k.attribute("attr.name").unwrap_or(id);
            Some((id.to_string(), name.to_string()))
        })
        .collect();
    let mut reader = Reader {
        keys,
        warnings: &mut warnings,
    };

    let mut graphs = Vec::new();
    for g in root.children().filter(|c| c.tag_name().name() == "graph") {
        let gid = g.attribute("id").unwrap_or("graph");
        let what = format!("graph {gid}");
        let meta = reader.data(g, &what);
        let version: u32 = number(&meta, "format_version", &what)?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "{what}: format version {version} is not supported (expected {FORMAT_VERSION})"
            )));
        }
        let map_id = required(&meta, "map_id", &what)?.to_string();
        let kind = match required(&meta, "graph_kind", &what)? {
            "road" => GraphKind::Road,
            "pedestrian" => GraphKind::Pedestrian,
            other => return Err(Error::Format(format!("{what}: unknown graph kind {other:?}"))),
        };
        let spacing: f64 = number(&meta, "spacing", &what)?;

        let mut nodes = Vec::new();
        for n in g.children().filter(|c| c.tag_name().name() == "node") {
            let id = n
                .attribute("id")
                .ok_or_else(|| Error::Format(format!("{what}: node without id")))?;
            let what = format!("node {id}");
            let d = reader.data(n, &what);
            let node_kind = match required(&d, "kind", &what)? {
                "road_bound" => NodeKind::RoadBound,
                "pedestrian" => NodeKind::Pedestrian,
                other => return Err(Error::Format(format!("{what}: unknown node kind {other:?}"))),
            };
            let actor = if d.contains_key("actor") {
                let category: ActorCategory = required(&d, "category", &what)?.parse()?;
                let ego = match d.get("ego").copied().unwrap_or("false") {
                    "true" => true,
                    "false" => false,
                    other => return Err(Error::Format(format!("{what}: invalid ego flag {other:?}"))),
                };
                Some(ActorAttributes {
                    actor_id: required(&d, "actor", &what)?.to_string(),
                    category,
                    model: d.get("model").map(|m| m.to_string()),
                    velocity: number(&d, "velocity", &what)?,
                    offset: number(&d, "offset", &what)?,
                    ego,
                })
            } else {
                None
            };
            nodes.push(GraphNode {
                id: id.to_string(),
                pose: Pose::new(
                    number(&d, "x", &what)?,
                    number(&d, "y", &what)?,
                    number(&d, "heading", &what)?,
                ),
                s_coord: number(&d, "s", &what)?,
                road_id: required(&d, "road", &what)?.to_string(),
                section: if d.contains_key("section") { number(&d, "section", &what)? } else { 0 },
                lane_id: number(&d, "lane", &what)?,
                kind: node_kind,
                actor,
            });
        }

        let mut edges = Vec::new();
        for e in g.children().filter(|c| c.tag_name().name() == "edge") {
            let (Some(from), Some(to)) = (e.attribute("source"), e.attribute("target")) else {
                return Err(Error::Format(format!("{what}: edge without source or target")));
            };
            let ewhat = format!("edge {from} -> {to}");
            let d = reader.data(e, &ewhat);
            let rel_text = required(&d, "relation", &ewhat)?;
            let relation = Relation::parse(rel_text)
                .ok_or_else(|| Error::Format(format!("{ewhat}: unknown relation {rel_text:?}")))?;
            let length = if d.contains_key("length") {
                number(&d, "length", &ewhat)?
            } else {
                f64::NAN
            };
            edges.push(GraphEdge {
                from: from.to_string(),
                to: to.to_string(),
                relation,
                length,
            });
        }
        let mut graph = LaneGraph::from_parts(map_id, kind, spacing, nodes, edges)?;
        if graph.edges().iter().any(|e| e.length.is_nan()) {
            graph = fill_lengths(graph)?;
        }
        graphs.push(graph);
    }
    Ok(ParsedGraphs { graphs, warnings })
}

/// Recomputes missing edge lengths as the distance between endpoint poses.
fn fill_lengths(graph: LaneGraph) -> Result<LaneGraph> {
    let edges = graph
        .edges()
        .iter()
        .map(|e| {
            let mut e = e.clone();
            if e.length.is_nan() {
                let a = graph.node(&e.from).unwrap().pose;
                e.length = a.distance(&graph.node(&e.to).unwrap().pose);
            }
            e
        })
        .collect();
    LaneGraph::from_parts(
        graph.map_id.clone(),
        graph.kind,
        graph.spacing,
        graph.nodes().cloned().collect::<Vec<_>>(),
        edges,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph_has_only_declarations() {
        let g = LaneGraph::empty("m", GraphKind::Road, 4.0);
        let doc = graph_to_graphml(&g);
        assert_eq!(doc.matches("<key ").count(), KEYS.len());
        assert!(!doc.contains("<node"));
        let (back, warnings) = graphml_to_graph(&doc).unwrap();
        assert_eq!(back, g);
        assert!(warnings.is_empty());
    }

    #[test]
    fn escaping() {
        assert_eq!(escape("a<b>&\"'"), "a&lt;b&gt;&amp;&quot;&apos;");
    }

    #[test]
    fn unknown_keys_warn_and_missing_keys_fail() {
        let doc = format!(
            r#"<graphml xmlns="{NS}">
              <key id="format_version" for="graph" attr.name="format_version"/>
              <key id="map_id" for="graph" attr.name="map_id"/>
              <key id="graph_kind" for="graph" attr.name="graph_kind"/>
              <key id="spacing" for="graph" attr.name="spacing"/>
              <key id="colour" for="node" attr.name="colour"/>
              <key id="y" for="node" attr.name="y"/>
              <key id="heading" for="node" attr.name="heading"/>
              <key id="s" for="node" attr.name="s"/>
              <key id="road" for="node" attr.name="road"/>
              <key id="lane" for="node" attr.name="lane"/>
              <key id="kind" for="node" attr.name="kind"/>
              <graph id="road">
                <data key="format_version">1</data><data key="map_id">m</data>
                <data key="graph_kind">road</data><data key="spacing">4</data>
                <node id="a"><data key="colour">red</data><data key="y">0</data>
                  <data key="heading">0</data><data key="s">0</data><data key="road">1</data>
                  <data key="lane">-1</data><data key="kind">road_bound</data></node>
              </graph></graphml>"#
        );
        let err = graphml_to_graphs(&doc).unwrap_err();
        assert!(matches!(&err, Error::Format(m) if m.contains("mandatory key x")), "{err}");

        let with_x = doc.replace(
            r#"<data key="y">0</data>"#,
            r#"<data key="y">0</data><data key="x">1.5</data>"#,
        ).replace(
            r#"<key id="y""#,
            r#"<key id="x" for="node" attr.name="x"/><key id="y""#,
        );
        let parsed = graphml_to_graphs(&with_x).unwrap();
        assert_eq!(parsed.graphs[0].node("a").unwrap().pose.x, 1.5);
        assert_eq!(parsed.warnings.len(), 1);
        assert!(parsed.warnings[0].contains("colour"));
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let g = LaneGraph::empty("m", GraphKind::Road, 4.0);
        let doc = graph_to_graphml(&g).replace(
            "<data key=\"format_version\">1</data>",
            "<data key=\"format_version\">7</data>",
        );
        assert!(matches!(graphml_to_graph(&doc), Err(Error::Format(_))));
    }
}
