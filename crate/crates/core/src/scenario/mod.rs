//! Scenario model: environment, actors placed on spawn nodes with goals
//! drawn from reachable terminal nodes, ego designation, and the encoding of
//! all of it as node attributes and goal edges on the induced subgraphs.

mod rng;
mod sampler;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use rng::ScenarioRng;
pub use sampler::{sample_batch, sample_scenario, SamplerConfig};

use crate::category::ActorCategory;
use crate::error::{Error, Result};
use crate::lanegraph::{
    reachable_set, terminal_nodes, ActorAttributes, GraphEdge, LaneGraph, NodeKind, Relation,
};
use crate::opendrive::MapMetadata;
use crate::persist::AssetCatalog;
use crate::regions::{induced_subgraph, RegionPartition, Roi};

pub const DEFAULT_OFFSET_MARGIN: f64 = 1.0;

/// Everything derived from one ingested map.
#[derive(Debug, Clone, PartialEq)]
pub struct MapBundle {
    pub map_id: String,
    /// Hex SHA-256 of the source document.
    pub digest: String,
    pub metadata: MapMetadata,
    pub road_graph: LaneGraph,
    pub pedestrian_graph: LaneGraph,
    pub partition: RegionPartition,
}

/// Time of day, either one of the four symbolic values or minutes after
/// midnight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeOfDay {
    Dawn,
    Noon,
    Sunset,
    Night,
    Minutes(u16),
}

impl TimeOfDay {
    pub const SYMBOLIC: [TimeOfDay; 4] = [TimeOfDay::Dawn, TimeOfDay::Noon, TimeOfDay::Sunset, TimeOfDay::Night];

    fn symbol(self) -> Option<&'static str> {
        match self {
            TimeOfDay::Dawn => Some("dawn"),
            TimeOfDay::Noon => Some("noon"),
            TimeOfDay::Sunset => Some("sunset"),
            TimeOfDay::Night => Some("night"),
            TimeOfDay::Minutes(_) => None,
        }
    }
}

impl fmt::Display for TimeOfDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.symbol(), self) {
            (Some(s), _) => f.write_str(s),
            (None, TimeOfDay::Minutes(m)) => write!(f, "{m}"),
            _ => unreachable!(),
        }
    }
}

impl Serialize for TimeOfDay {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match (self.symbol(), self) {
            (Some(sym), _) => s.serialize_str(sym),
            (None, TimeOfDay::Minutes(m)) => s.serialize_u16(*m),
            _ => unreachable!(),
        }
    }
}

impl<'de> Deserialize<'de> for TimeOfDay {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Minutes(u64),
            Symbol(String),
        }
        match Raw::deserialize(d)? {
            Raw::Minutes(m) if m < 24 * 60 => Ok(TimeOfDay::Minutes(m as u16)),
            Raw::Minutes(m) => Err(serde::de::Error::custom(format!(
                "time of day {m} is not within 0..1440 minutes"
            ))),
            Raw::Symbol(s) => TimeOfDay::SYMBOLIC
                .into_iter()
                .find(|t| t.symbol() == Some(s.as_str()))
                .ok_or_else(|| serde::de::Error::custom(format!("unknown time of day {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentConfig {
    pub weather_preset: String,
    pub time_of_day: TimeOfDay,
}

impl EnvironmentConfig {
    /// Uses the preset's bound time of day when it has one.
    pub fn from_preset(catalog: &AssetCatalog, preset: &str, fallback: TimeOfDay) -> Result<EnvironmentConfig> {
        let p = catalog
            .preset(preset)
            .ok_or_else(|| Error::domain(format!("unknown weather preset {preset}")))?;
        Ok(EnvironmentConfig {
            weather_preset: preset.to_string(),
            time_of_day: p.implies_time.unwrap_or(fallback),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorSpec {
    pub actor_id: String,
    pub category: ActorCategory,
    #[serde(default)]
    pub model: Option<String>,
    pub spawn_node: String,
    pub goal_node: String,
    /// Metres per second.
    pub desired_velocity: f64,
    /// Metres, positive to the left of the lane center.
    #[serde(default)]
    pub lateral_offset: f64,
    #[serde(default)]
    pub is_ego: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub scenario_id: String,
    pub map_id: String,
    pub map_digest: String,
    pub roi: Roi,
    pub environment: EnvironmentConfig,
    pub offset_margin: f64,
    /// Sorted by actor id.
    pub actors: Vec<ActorSpec>,
    pub road_graph: LaneGraph,
    pub pedestrian_graph: LaneGraph,
}

pub fn new_scenario(
    scenario_id: impl Into<String>,
    bundle: &MapBundle,
    roi: Roi,
    environment: EnvironmentConfig,
    catalog: &AssetCatalog,
) -> Result<Scenario> {
    roi.validate(&bundle.partition)?;
    if catalog.preset(&environment.weather_preset).is_none() {
        return Err(Error::domain(format!(
            "unknown weather preset {}",
            environment.weather_preset
        )));
    }
    Ok(Scenario {
        scenario_id: scenario_id.into(),
        map_id: bundle.map_id.clone(),
        map_digest: bundle.digest.clone(),
        road_graph: induced_subgraph(&bundle.road_graph, &bundle.partition, &roi)?,
        pedestrian_graph: induced_subgraph(&bundle.pedestrian_graph, &bundle.partition, &roi)?,
        roi,
        environment,
        offset_margin: DEFAULT_OFFSET_MARGIN,
        actors: Vec::new(),
    })
}

/// Nodes of a directed road graph that can reach a terminal node other
/// than themselves.
fn nodes_with_goals(graph: &LaneGraph) -> BTreeSet<String> {
    let terminals = terminal_nodes(graph);
    let mut seen: BTreeSet<String> = terminals.clone();
    let mut queue: VecDeque<String> = terminals.iter().cloned().collect();
    while let Some(id) = queue.pop_front() {
        for e in graph.incoming(&id).filter(|e| e.relation.is_navigable()) {
            if seen.insert(e.from.clone()) {
                queue.push_back(e.from.clone());
            }
        }
    }
    // a terminal only reaches itself
    seen.retain(|id| !terminals.contains(id));
    seen
}

impl Scenario {
    pub fn actor(&self, actor_id: &str) -> Option<&ActorSpec> {
        self.actors.iter().find(|a| a.actor_id == actor_id)
    }

    pub fn ego(&self) -> Option<&str> {
        self.actors.iter().find(|a| a.is_ego).map(|a| a.actor_id.as_str())
    }

    pub fn graph_for(&self, category: ActorCategory) -> &LaneGraph {
        if category.is_pedestrian() {
            &self.pedestrian_graph
        } else {
            &self.road_graph
        }
    }

    fn graph_for_mut(&mut self, category: ActorCategory) -> &mut LaneGraph {
        if category.is_pedestrian() {
            &mut self.pedestrian_graph
        } else {
            &mut self.road_graph
        }
    }

    /// Goals an actor spawned at `spawn` may be given. Road nodes get the
    /// reachable terminal nodes; pedestrian nodes get every node reachable
    /// along the undirected sidewalk graph.
    pub fn goal_candidates(&self, spawn: &str) -> Result<BTreeSet<String>> {
        let mut out = if self.road_graph.contains(spawn) {
            let terminals = terminal_nodes(&self.road_graph);
            reachable_set(&self.road_graph, spawn)?
                .into_iter()
                .filter(|n| terminals.contains(n))
                .collect()
        } else if self.pedestrian_graph.contains(spawn) {
            reachable_set(&self.pedestrian_graph, spawn)?
        } else {
            return Err(Error::domain(format!("unknown node {spawn}")));
        };
        out.remove(spawn);
        Ok(out)
    }

    pub fn is_occupied(&self, node: &str) -> bool {
        self.actors.iter().any(|a| a.spawn_node == node)
    }

    /// Unoccupied road-bound nodes that have at least one goal candidate,
    /// sorted by id.
    pub fn eligible_spawn_nodes(&self) -> Vec<String> {
        let occupied: BTreeSet<&str> = self.actors.iter().map(|a| a.spawn_node.as_str()).collect();
        nodes_with_goals(&self.road_graph)
            .into_iter()
            .filter(|n| !occupied.contains(n.as_str()))
            .collect()
    }

    /// Unoccupied pedestrian nodes with at least one other reachable node.
    pub fn eligible_pedestrian_nodes(&self) -> Vec<String> {
        let occupied: BTreeSet<&str> = self.actors.iter().map(|a| a.spawn_node.as_str()).collect();
        self.pedestrian_graph
            .nodes()
            .filter(|n| !occupied.contains(n.id.as_str()))
            .filter(|n| !self.pedestrian_graph.neighbors(&n.id).is_empty())
            .map(|n| n.id.clone())
            .collect()
    }

    pub fn max_allowable_actors(&self) -> usize {
        self.eligible_spawn_nodes().len()
    }

    /// Problems with a spec against the current scenario, without the
    /// occupancy rule.
    fn spec_problems(&self, spec: &ActorSpec, catalog: &AssetCatalog) -> Vec<String> {
        let mut problems = Vec::new();
        let id = &spec.actor_id;
        if id.is_empty() {
            problems.push("actor id must not be empty".to_string());
        }
        if !(spec.desired_velocity.is_finite() && spec.desired_velocity > 0.0) {
            problems.push(format!("actor {id}: desired velocity {} must be positive", spec.desired_velocity));
        }
        if !(spec.lateral_offset.is_finite() && spec.lateral_offset.abs() <= self.offset_margin) {
            problems.push(format!(
                "actor {id}: lateral offset {} exceeds the {} m margin",
                spec.lateral_offset, self.offset_margin
            ));
        }
        if let Some(model) = &spec.model {
            match catalog.model(model) {
                None => problems.push(format!("actor {id}: model {model} is not in the asset catalog")),
                Some(m) if m.category != spec.category => problems.push(format!(
                    "actor {id}: model {model} is a {}, not a {}",
                    m.category, spec.category
                )),
                Some(_) => {}
            }
        }
        if spec.is_ego && spec.category.is_pedestrian() {
            problems.push(format!("actor {id}: a pedestrian cannot be the ego"));
        }
        let graph = self.graph_for(spec.category);
        let expected_kind = if spec.category.is_pedestrian() {
            NodeKind::Pedestrian
        } else {
            NodeKind::RoadBound
        };
        match graph.node(&spec.spawn_node) {
            Some(n) if n.kind == expected_kind => {
                if spec.goal_node == spec.spawn_node {
                    problems.push(format!("actor {id}: goal equals spawn node"));
                } else {
                    let candidates = self.goal_candidates(&spec.spawn_node).unwrap_or_default();
                    if !candidates.contains(&spec.goal_node) {
                        problems.push(format!(
                            "actor {id}: goal {} is not a goal candidate of {}",
                            spec.goal_node, spec.spawn_node
                        ));
                    }
                }
            }
            _ => problems.push(format!(
                "actor {id}: spawn node {} is not a {} node of the scenario",
                spec.spawn_node,
                if spec.category.is_pedestrian() { "pedestrian" } else { "road-bound" }
            )),
        }
        problems
    }

    /// Adds an actor, annotating its spawn node and adding its goal edge.
    pub fn place_actor(&self, spec: ActorSpec, catalog: &AssetCatalog) -> Result<Scenario> {
        if let Some(other) = self.actors.iter().find(|a| a.spawn_node == spec.spawn_node) {
            return Err(Error::Occupied {
                node: spec.spawn_node.clone(),
                actor_id: other.actor_id.clone(),
            });
        }
        if self.actor(&spec.actor_id).is_some() {
            return Err(Error::Conflict(format!("actor id {} is already in use", spec.actor_id)));
        }
        let problems = self.spec_problems(&spec, catalog);
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }

        let mut next = self.clone();
        if spec.is_ego {
            next.clear_ego();
        }
        let graph = next.graph_for_mut(spec.category);
        let length = {
            let a = graph.node(&spec.spawn_node).unwrap().pose;
            a.distance(&graph.node(&spec.goal_node).unwrap().pose)
        };
        graph.node_mut(&spec.spawn_node).unwrap().actor = Some(attributes(&spec));
        graph.push_edge(GraphEdge {
            from: spec.spawn_node.clone(),
            to: spec.goal_node.clone(),
            relation: Relation::Goal,
            length,
        });
        let at = next.actors.partition_point(|a| a.actor_id < spec.actor_id);
        next.actors.insert(at, spec);
        Ok(next)
    }

    fn clear_ego(&mut self) {
        let ego: Vec<(String, ActorCategory)> = self
            .actors
            .iter()
            .filter(|a| a.is_ego)
            .map(|a| (a.spawn_node.clone(), a.category))
            .collect();
        for (node, category) in ego {
            if let Some(attrs) = self.graph_for_mut(category).node_mut(&node).and_then(|n| n.actor.as_mut()) {
                attrs.ego = false;
            }
        }
        for a in &mut self.actors {
            a.is_ego = false;
        }
    }

    pub fn designate_ego(&self, actor_id: &str) -> Result<Scenario> {
        let actor = self
            .actor(actor_id)
            .ok_or_else(|| Error::domain(format!("unknown actor {actor_id}")))?;
        if actor.category.is_pedestrian() {
            return Err(Error::validation(format!(
                "actor {actor_id} is a pedestrian and cannot be the ego"
            )));
        }
        let (node, category) = (actor.spawn_node.clone(), actor.category);
        let mut next = self.clone();
        next.clear_ego();
        for a in next.actors.iter_mut().filter(|a| a.actor_id == actor_id) {
            a.is_ego = true;
        }
        if let Some(attrs) = next.graph_for_mut(category).node_mut(&node).and_then(|n| n.actor.as_mut()) {
            attrs.ego = true;
        }
        Ok(next)
    }

    pub fn remove_actor(&self, actor_id: &str) -> Result<Scenario> {
        let actor = self
            .actor(actor_id)
            .ok_or_else(|| Error::domain(format!("unknown actor {actor_id}")))?
            .clone();
        let mut next = self.clone();
        next.actors.retain(|a| a.actor_id != actor_id);
        let graph = next.graph_for_mut(actor.category);
        graph.node_mut(&actor.spawn_node).unwrap().actor = None;
        graph.retain_edges(|e| !(e.relation == Relation::Goal && e.from == actor.spawn_node));
        Ok(next)
    }

    pub fn set_environment(&self, environment: EnvironmentConfig, catalog: &AssetCatalog) -> Result<Scenario> {
        if catalog.preset(&environment.weather_preset).is_none() {
            return Err(Error::domain(format!(
                "unknown weather preset {}",
                environment.weather_preset
            )));
        }
        let mut next = self.clone();
        next.environment = environment;
        Ok(next)
    }

    /// Re-derives the subgraphs for a new roi over the same map and places
    /// every actor again. Fails with a conflict naming the actors the new
    /// roi would invalidate, leaving the caller's value untouched.
    pub fn with_roi(&self, bundle: &MapBundle, roi: Roi, catalog: &AssetCatalog) -> Result<Scenario> {
        if bundle.map_id != self.map_id || bundle.digest != self.map_digest {
            return Err(Error::StaleMap {
                map_id: self.map_id.clone(),
                expected: self.map_digest.clone(),
                actual: bundle.digest.clone(),
            });
        }
        let mut next = new_scenario(self.scenario_id.clone(), bundle, roi, self.environment.clone(), catalog)?;
        next.offset_margin = self.offset_margin;
        let mut broken = Vec::new();
        for spec in &self.actors {
            match next.place_actor(spec.clone(), catalog) {
                Ok(placed) => next = placed,
                Err(e) => broken.push(format!("{}: {e}", spec.actor_id)),
            }
        }
        if !broken.is_empty() {
            return Err(Error::Conflict(format!("the new roi invalidates actors {}", broken.join("; "))));
        }
        Ok(next)
    }

    /// Rebuilds the actor list from node attributes and goal edges alone.
    pub fn actors_from_graph(&self) -> Result<Vec<ActorSpec>> {
        let mut out = Vec::new();
        for graph in [&self.road_graph, &self.pedestrian_graph] {
            let mut goals: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
            for e in graph.edges().iter().filter(|e| e.relation == Relation::Goal) {
                goals.entry(e.from.as_str()).or_default().push(e.to.as_str());
            }
            for node in graph.nodes() {
                let node_goals = goals.remove(node.id.as_str()).unwrap_or_default();
                let Some(a) = &node.actor else {
                    if !node_goals.is_empty() {
                        return Err(Error::Format(format!("goal edge from unoccupied node {}", node.id)));
                    }
                    continue;
                };
                let [goal] = node_goals[..] else {
                    return Err(Error::Format(format!(
                        "actor {} has {} goal edges",
                        a.actor_id,
                        node_goals.len()
                    )));
                };
                out.push(ActorSpec {
                    actor_id: a.actor_id.clone(),
                    category: a.category,
                    model: a.model.clone(),
                    spawn_node: node.id.clone(),
                    goal_node: goal.to_string(),
                    desired_velocity: a.velocity,
                    lateral_offset: a.offset,
                    is_ego: a.ego,
                });
            }
        }
        out.sort_by(|a, b| a.actor_id.cmp(&b.actor_id));
        Ok(out)
    }

    /// Every scenario invariant, reporting all violations at once.
    pub fn validate(&self, catalog: &AssetCatalog) -> Result<()> {
        let mut problems = Vec::new();
        if catalog.preset(&self.environment.weather_preset).is_none() {
            problems.push(format!("unknown weather preset {}", self.environment.weather_preset));
        }
        let mut ids = BTreeSet::new();
        let mut spawns = BTreeSet::new();
        for a in &self.actors {
            if !ids.insert(&a.actor_id) {
                problems.push(format!("duplicate actor id {}", a.actor_id));
            }
            if !spawns.insert(&a.spawn_node) {
                problems.push(format!("spawn node {} hosts more than one actor", a.spawn_node));
            }
            problems.extend(self.spec_problems(a, catalog));
        }
        if self.actors.iter().filter(|a| a.is_ego).count() > 1 {
            problems.push("more than one ego".to_string());
        }
        if !self.actors.windows(2).all(|w| w[0].actor_id < w[1].actor_id) {
            problems.push("actors are not ordered by id".to_string());
        }
        match self.actors_from_graph() {
            Ok(encoded) if encoded == self.actors => {}
            Ok(_) => problems.push("actor list differs from the graph encoding".to_string()),
            Err(e) => problems.push(e.to_string()),
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }
}

fn attributes(spec: &ActorSpec) -> ActorAttributes {
    ActorAttributes {
        actor_id: spec.actor_id.clone(),
        category: spec.category,
        model: spec.model.clone(),
        velocity: spec.desired_velocity,
        offset: spec.lateral_offset,
        ego: spec.is_ego,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_of_day_serde() {
        assert_eq!(serde_json::to_string(&TimeOfDay::Night).unwrap(), "\"night\"");
        assert_eq!(serde_json::to_string(&TimeOfDay::Minutes(390)).unwrap(), "390");
        let t: TimeOfDay = serde_json::from_str("\"dawn\"").unwrap();
        assert_eq!(t, TimeOfDay::Dawn);
        let t: TimeOfDay = serde_json::from_str("1439").unwrap();
        assert_eq!(t, TimeOfDay::Minutes(1439));
        assert!(serde_json::from_str::<TimeOfDay>("1440").is_err());
        assert!(serde_json::from_str::<TimeOfDay>("\"teatime\"").is_err());
    }
}
