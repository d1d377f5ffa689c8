//! The lane graph: spawn nodes sampled along lanes, linked by typed relations.
//!
//! Road graphs carry directed `successor`, `left` and `right` edges between
//! road-bound nodes. Pedestrian graphs carry undirected `pedestrian` edges.
//! Scenario subgraphs may additionally hold one directed `goal` edge per
//! actor; goal edges are annotations and never take part in traversal.
//! Predecessors are answered from the incoming index rather than stored.

mod build;
mod pedestrian;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::category::ActorCategory;
use crate::error::{Error, Result};
use crate::opendrive::Pose;

pub use build::build_lane_graph;
pub use pedestrian::{build_pedestrian_graph, CROSSWALK_ATTACH_RADIUS};

pub const DEFAULT_SPACING: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    RoadBound,
    Pedestrian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Road,
    Pedestrian,
}

impl GraphKind {
    pub fn node_kind(self) -> NodeKind {
        match self {
            GraphKind::Road => NodeKind::RoadBound,
            GraphKind::Pedestrian => NodeKind::Pedestrian,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Successor,
    Left,
    Right,
    Pedestrian,
    Goal,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Successor => "successor",
            Relation::Left => "left",
            Relation::Right => "right",
            Relation::Pedestrian => "pedestrian",
            Relation::Goal => "goal",
        }
    }

    pub fn parse(s: &str) -> Option<Relation> {
        [
            Relation::Successor,
            Relation::Left,
            Relation::Right,
            Relation::Pedestrian,
            Relation::Goal,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
    }

    /// Relations that define movement; `goal` is excluded.
    pub fn is_navigable(self) -> bool {
        self != Relation::Goal
    }

    pub fn is_directed(self) -> bool {
        self != Relation::Pedestrian
    }

    /// Directed movement relations, the ones that decide terminal nodes.
    pub fn is_directed_navigable(self) -> bool {
        matches!(self, Relation::Successor | Relation::Left | Relation::Right)
    }
}

/// Actor parameters stored on a spawn node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorAttributes {
    pub actor_id: String,
    pub category: ActorCategory,
    pub model: Option<String>,
    pub velocity: f64,
    pub offset: f64,
    pub ego: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: String,
    pub pose: Pose,
    /// Arc length along the lane (or crosswalk chain) in sampling order.
    pub s_coord: f64,
    pub road_id: String,
    pub section: usize,
    /// 0 for crosswalk nodes.
    pub lane_id: i32,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actor: Option<ActorAttributes>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub from: String,
    pub to: String,
    pub relation: Relation,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLaneGraph")]
pub struct LaneGraph {
    pub map_id: String,
    pub kind: GraphKind,
    pub spacing: f64,
    nodes: BTreeMap<String, GraphNode>,
    edges: Vec<GraphEdge>,
    #[serde(skip)]
    outgoing: BTreeMap<String, Vec<usize>>,
    #[serde(skip)]
    incoming: BTreeMap<String, Vec<usize>>,
}

#[derive(Deserialize)]
struct RawLaneGraph {
    map_id: String,
    kind: GraphKind,
    spacing: f64,
    nodes: BTreeMap<String, GraphNode>,
    edges: Vec<GraphEdge>,
}

impl TryFrom<RawLaneGraph> for LaneGraph {
    type Error = Error;

    fn try_from(raw: RawLaneGraph) -> Result<Self> {
        LaneGraph::from_parts(raw.map_id, raw.kind, raw.spacing, raw.nodes.into_values(), raw.edges)
    }
}

impl LaneGraph {
    pub fn empty(map_id: impl Into<String>, kind: GraphKind, spacing: f64) -> Self {
        LaneGraph {
            map_id: map_id.into(),
            kind,
            spacing,
            nodes: BTreeMap::new(),
            edges: Vec::new(),
            outgoing: BTreeMap::new(),
            incoming: BTreeMap::new(),
        }
    }

    /// Assembles a graph, checking that every edge endpoint exists and that
    /// there are no self-loops or duplicate node ids.
    pub fn from_parts(
        map_id: impl Into<String>,
        kind: GraphKind,
        spacing: f64,
        nodes: impl IntoIterator<Item = GraphNode>,
        edges: Vec<GraphEdge>,
    ) -> Result<Self> {
        let mut graph = LaneGraph::empty(map_id, kind, spacing);
        for node in nodes {
            let id = node.id.clone();
            if graph.nodes.insert(id.clone(), node).is_some() {
                return Err(Error::Format(format!("duplicate node id {id}")));
            }
        }
        for e in &edges {
            if e.from == e.to {
                return Err(Error::Format(format!("self-loop on {}", e.from)));
            }
            for end in [&e.from, &e.to] {
                if !graph.nodes.contains_key(end) {
                    return Err(Error::Format(format!("edge endpoint {end} is not a node")));
                }
            }
        }
        graph.edges = edges;
        graph.reindex();
        Ok(graph)
    }

    fn reindex(&mut self) {
        self.outgoing.clear();
        self.incoming.clear();
        for (i, e) in self.edges.iter().enumerate() {
            self.outgoing.entry(e.from.clone()).or_default().push(i);
            self.incoming.entry(e.to.clone()).or_default().push(i);
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = &GraphNode> {
        self.nodes.values()
    }

    pub fn node(&self, id: &str) -> Option<&GraphNode> {
        self.nodes.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = &str> {
        self.nodes.keys().map(String::as_str)
    }

    /// Edges stored with `id` as their source.
    pub fn outgoing(&self, id: &str) -> impl Iterator<Item = &GraphEdge> {
        self.outgoing
            .get(id)
            .into_iter()
            .flatten()
            .map(move |&i| &self.edges[i])
    }

    /// Edges stored with `id` as their target; reverse successor edges are
    /// the predecessor relation.
    pub fn incoming(&self, id: &str) -> impl Iterator<Item = &GraphEdge> {
        self.incoming
            .get(id)
            .into_iter()
            .flatten()
            .map(move |&i| &self.edges[i])
    }

    pub fn predecessors(&self, id: &str) -> Vec<&str> {
        self.incoming(id)
            .filter(|e| e.relation == Relation::Successor)
            .map(|e| e.from.as_str())
            .collect()
    }

    /// Movement neighbors: directed targets plus both ends of undirected
    /// pedestrian edges. Each entry is (neighbor, edge length).
    pub fn neighbors(&self, id: &str) -> Vec<(&str, f64)> {
        let mut out: Vec<(&str, f64)> = self
            .outgoing(id)
            .filter(|e| e.relation.is_navigable())
            .map(|e| (e.to.as_str(), e.length))
            .collect();
        out.extend(
            self.incoming(id)
                .filter(|e| e.relation == Relation::Pedestrian)
                .map(|e| (e.from.as_str(), e.length)),
        );
        out
    }

    pub fn out_degree_directed(&self, id: &str) -> usize {
        self.outgoing(id)
            .filter(|e| e.relation.is_directed_navigable())
            .count()
    }

    pub fn has_outgoing(&self, id: &str, relation: Relation) -> bool {
        self.outgoing(id).any(|e| e.relation == relation)
    }

    pub(crate) fn node_mut(&mut self, id: &str) -> Option<&mut GraphNode> {
        self.nodes.get_mut(id)
    }

    pub(crate) fn push_edge(&mut self, edge: GraphEdge) {
        let i = self.edges.len();
        self.outgoing.entry(edge.from.clone()).or_default().push(i);
        self.incoming.entry(edge.to.clone()).or_default().push(i);
        self.edges.push(edge);
    }

    pub(crate) fn retain_edges(&mut self, keep: impl FnMut(&GraphEdge) -> bool) {
        self.edges.retain(keep);
        self.reindex();
    }

    /// Copy without actor attributes and goal edges.
    pub fn stripped(&self) -> LaneGraph {
        let mut g = self.clone();
        for node in g.nodes.values_mut() {
            node.actor = None;
        }
        g.retain_edges(|e| e.relation != Relation::Goal);
        g
    }
}

pub(crate) fn edge_between(graph_nodes: &BTreeMap<String, GraphNode>, from: &str, to: &str, relation: Relation) -> GraphEdge {
    let length = graph_nodes[from].pose.distance(&graph_nodes[to].pose);
    GraphEdge {
        from: from.to_string(),
        to: to.to_string(),
        relation,
        length,
    }
}

/// Every node reachable from `from` along movement edges, including `from`.
pub fn reachable_set(graph: &LaneGraph, from: &str) -> Result<BTreeSet<String>> {
    if !graph.contains(from) {
        return Err(Error::domain(format!("unknown node {from}")));
    }
    let mut seen = BTreeSet::from([from.to_string()]);
    let mut queue = VecDeque::from([from.to_string()]);
    while let Some(id) = queue.pop_front() {
        for (next, _) in graph.neighbors(&id) {
            if !seen.contains(next) {
                seen.insert(next.to_string());
                queue.push_back(next.to_string());
            }
        }
    }
    Ok(seen)
}

/// Nodes without outgoing successor, left or right edges.
pub fn terminal_nodes(graph: &LaneGraph) -> BTreeSet<String> {
    graph
        .node_ids()
        .filter(|id| graph.out_degree_directed(id) == 0)
        .map(str::to_string)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn node(id: &str, x: f64, y: f64) -> GraphNode {
        GraphNode {
            id: id.into(),
            pose: Pose::new(x, y, 0.0),
            s_coord: 0.0,
            road_id: "r".into(),
            section: 0,
            lane_id: -1,
            kind: NodeKind::RoadBound,
            actor: None,
        }
    }

    fn edge(from: &str, to: &str, relation: Relation) -> GraphEdge {
        GraphEdge {
            from: from.into(),
            to: to.into(),
            relation,
            length: 1.0,
        }
    }

    #[test]
    fn from_parts_rejects_bad_edges() {
        let nodes = || vec![node("a", 0.0, 0.0), node("b", 1.0, 0.0)];
        let bad = LaneGraph::from_parts("m", GraphKind::Road, 1.0, nodes(), vec![edge("a", "z", Relation::Successor)]);
        assert!(bad.is_err());
        let looped = LaneGraph::from_parts("m", GraphKind::Road, 1.0, nodes(), vec![edge("a", "a", Relation::Successor)]);
        assert!(looped.is_err());
    }

    #[test]
    fn goal_edges_do_not_count() {
        let g = LaneGraph::from_parts(
            "m",
            GraphKind::Road,
            1.0,
            vec![node("a", 0.0, 0.0), node("b", 1.0, 0.0), node("c", 2.0, 0.0)],
            vec![edge("a", "b", Relation::Successor), edge("b", "c", Relation::Goal)],
        )
        .unwrap();
        assert_eq!(terminal_nodes(&g), BTreeSet::from(["b".to_string(), "c".to_string()]));
        assert_eq!(reachable_set(&g, "b").unwrap(), BTreeSet::from(["b".to_string()]));
        assert_eq!(g.predecessors("b"), vec!["a"]);
    }

    #[test]
    fn pedestrian_edges_traverse_both_ways() {
        let g = LaneGraph::from_parts(
            "m",
            GraphKind::Pedestrian,
            1.0,
            vec![node("a", 0.0, 0.0), node("b", 1.0, 0.0)],
            vec![edge("a", "b", Relation::Pedestrian)],
        )
        .unwrap();
        assert_eq!(reachable_set(&g, "b").unwrap().len(), 2);
    }

    #[test]
    fn empty_and_single_node_terminals() {
        let empty = LaneGraph::empty("m", GraphKind::Road, 1.0);
        assert!(terminal_nodes(&empty).is_empty());
        let single = LaneGraph::from_parts("m", GraphKind::Road, 1.0, vec![node("x", 0.0, 0.0)], vec![]).unwrap();
        assert_eq!(terminal_nodes(&single), BTreeSet::from(["x".to_string()]));
        assert!(matches!(reachable_set(&single, "nope"), Err(Error::Domain(_))));
    }
}
