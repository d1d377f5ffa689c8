//! Shortest-path planning and constant-speed playback of a scenario.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::category::ActorCategory;
use crate::error::{Error, Result};
use crate::lanegraph::{LaneGraph, Relation};
use crate::opendrive::Pose;
use crate::persist::FORMAT_VERSION;
use crate::scenario::Scenario;

pub const DEFAULT_DT: f64 = 0.05;
pub const MAX_FRAMES: usize = 20_000;
/// Upper bound on the distance between densified path poses.
pub const DENSIFY_STEP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    /// Cumulative arc length from the spawn node.
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPlan {
    pub actor_id: String,
    pub node_path: Vec<String>,
    pub path_length: f64,
    pub poses: Vec<PathPose>,
}

#[derive(Debug, PartialEq)]
struct Entry {
    dist: f64,
    node: String,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then on node id
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Nodes that can step to `id`, with the edge length.
fn reverse_neighbors<'g>(graph: &'g LaneGraph, id: &str) -> Vec<(&'g str, f64)> {
    let mut out: Vec<(&str, f64)> = graph
        .incoming(id)
        .filter(|e| e.relation.is_navigable())
        .map(|e| (e.from.as_str(), e.length))
        .collect();
    out.extend(
        graph
            .outgoing(id)
            .filter(|e| e.relation == Relation::Pedestrian)
            .map(|e| (e.to.as_str(), e.length)),
    );
    out
}

/// Distance from every node to `goal`.
fn distances_to(graph: &LaneGraph, goal: &str) -> BTreeMap<String, f64> {
    let mut dist: BTreeMap<String, f64> = BTreeMap::from([(goal.to_string(), 0.0)]);
    let mut heap = BinaryHeap::from([Entry {
        dist: 0.0,
        node: goal.to_string(),
    }]);
    while let Some(Entry { dist: d, node }) = heap.pop() {
        if d > dist[&node] {
            continue;
        }
        for (prev, w) in reverse_neighbors(graph, &node) {
            let nd = d + w;
            if dist.get(prev).is_none_or(|&old| nd < old) {
                dist.insert(prev.to_string(), nd);
                heap.push(Entry {
                    dist: nd,
                    node: prev.to_string(),
                });
            }
        }
    }
    dist
}

/// Shortest path from `spawn` to `goal` over movement edges. Among paths of
/// equal length the lexicographically smallest node sequence wins.
pub fn plan_trajectory(graph: &LaneGraph, spawn: &str, goal: &str) -> Result<TrajectoryPlan> {
    for id in [spawn, goal] {
        if !graph.contains(id) {
            return Err(Error::Planning(format!("unknown node {id}")));
        }
    }
    if spawn == goal {
        return Err(Error::Planning(format!("spawn and goal are both {spawn}")));
    }
    let dist = distances_to(graph, goal);
    let Some(&total) = dist.get(spawn) else {
        return Err(Error::Planning(format!("{goal} is not reachable from {spawn}")));
    };

    // walk forward along edges that stay on a shortest path, smallest id first
    let mut path = vec![spawn.to_string()];
    let mut visited = BTreeSet::from([spawn.to_string()]);
    let mut here = spawn.to_string();
    while here != goal {
        let d_here = dist[&here];
        let tol = 1e-9 * d_here.max(1.0);
        let next = graph
            .neighbors(&here)
            .into_iter()
            .filter(|(n, w)| {
                !visited.contains(*n) && dist.get(*n).is_some_and(|&dn| (w + dn - d_here).abs() <= tol)
            })
            .map(|(n, _)| n)
            .min()
            .ok_or_else(|| Error::Planning(format!("lost the shortest path at {here}")))?
            .to_string();
        visited.insert(next.clone());
        path.push(next.clone());
        here = next;
    }

    let nodes: Vec<Pose> = path.iter().map(|id| graph.node(id).unwrap().pose).collect();
    let poses = densify(&nodes);
    let path_length = poses.last().map_or(0.0, |p| p.s);
    if path_length <= 0.0 {
        return Err(Error::Planning(format!(
            "path from {spawn} to {goal} has zero length"
        )));
    }
    log::debug!("planned {} -> {goal}: {} nodes, {total:.3} m", spawn, path.len());
    Ok(TrajectoryPlan {
        actor_id: String::new(),
        node_path: path,
        path_length,
        poses,
    })
}

/// Linear interpolation between node positions at steps of at most
/// [`DENSIFY_STEP`]; headings follow each segment's direction.
fn densify(nodes: &[Pose]) -> Vec<PathPose> {
    let mut out = Vec::new();
    let mut s = 0.0;
    let mut last_heading = nodes.first().map_or(0.0, |p| p.heading);
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = a.distance(&b);
        if len <= 0.0 {
            continue;
        }
        let heading = (b.y - a.y).atan2(b.x - a.x);
        if out.is_empty() {
            out.push(PathPose { x: a.x, y: a.y, heading, s: 0.0 });
        }
        let steps = (len / DENSIFY_STEP).ceil().max(1.0) as usize;
        for i in 1..=steps {
            let f = i as f64 / steps as f64;
            out.push(PathPose {
                x: a.x + f * (b.x - a.x),
                y: a.y + f * (b.y - a.y),
                heading,
                s: s + f * len,
            });
        }
        s += len;
        last_heading = heading;
    }
    if out.is_empty() {
        if let Some(p) = nodes.first() {
            out.push(PathPose { x: p.x, y: p.y, heading: last_heading, s: 0.0 });
        }
    }
    out
}

impl TrajectoryPlan {
    /// Pose at arc length `s`, clamped to the path.
    pub fn pose_at(&self, s: f64) -> PathPose {
        let s = s.clamp(0.0, self.path_length);
        let i = self.poses.partition_point(|p| p.s < s);
        if i == 0 {
            return self.poses[0];
        }
        if i >= self.poses.len() {
            return *self.poses.last().unwrap();
        }
        let (a, b) = (self.poses[i - 1], self.poses[i]);
        let f = if b.s > a.s { (s - a.s) / (b.s - a.s) } else { 1.0 };
        PathPose {
            x: a.x + f * (b.x - a.x),
            y: a.y + f * (b.y - a.y),
            heading: b.heading,
            s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorState {
    pub actor_id: String,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    /// Arc length travelled along the planned path.
    pub s: f64,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub frame: usize,
    pub t: f64,
    pub actors: Vec<ActorState>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineActor {
    pub actor_id: String,
    pub category: ActorCategory,
    pub ego: bool,
    pub velocity: f64,
    pub path_length: f64,
    /// First frame at which the actor is at its goal.
    pub arrival_frame: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub scenario_id: String,
    pub dt: f64,
    pub duration: f64,
    pub actors: Vec<TimelineActor>,
    pub frames: Vec<Frame>,
}

/// Frames needed to cover `length` at `velocity`: the first `k` with
/// `velocity * k * dt >= length`.
pub fn arrival_frame(length: f64, velocity: f64, dt: f64) -> usize {
    (length / velocity / dt - 1e-9).ceil().max(0.0) as usize
}

pub fn plan_actor(scenario: &Scenario, actor_id: &str) -> Result<TrajectoryPlan> {
    let actor = scenario
        .actor(actor_id)
        .ok_or_else(|| Error::domain(format!("unknown actor {actor_id}")))?;
    let mut plan = plan_trajectory(scenario.graph_for(actor.category), &actor.spawn_node, &actor.goal_node)
        .map_err(|e| Error::Planning(format!("actor {actor_id}: {e}")))?;
    plan.actor_id = actor_id.to_string();
    Ok(plan)
}

pub fn realize_scenario(scenario: &Scenario, dt: f64) -> Result<Timeline> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::domain(format!("dt must be positive, got {dt}")));
    }
    let mut plans = Vec::new();
    let mut actors = Vec::new();
    for a in &scenario.actors {
        let plan = plan_actor(scenario, &a.actor_id)?;
        let arrival = arrival_frame(plan.path_length, a.desired_velocity, dt);
        if arrival >= MAX_FRAMES {
            return Err(Error::domain(format!(
                "actor {} needs {} frames to arrive, more than the {MAX_FRAMES} frame limit",
                a.actor_id,
                arrival + 1
            )));
        }
        actors.push(TimelineActor {
            actor_id: a.actor_id.clone(),
            category: a.category,
            ego: a.is_ego,
            velocity: a.desired_velocity,
            path_length: plan.path_length,
            arrival_frame: arrival,
        });
        plans.push((plan, a.desired_velocity, a.lateral_offset, arrival));
    }
    let last = actors.iter().map(|a| a.arrival_frame).max().unwrap_or(0);
    let frames = (0..=last)
        .map(|k| {
            let t = k as f64 * dt;
            let states = plans
                .iter()
                .map(|(plan, v, offset, arrival)| {
                    let done = k >= *arrival;
                    let s = if done { plan.path_length } else { (v * t).min(plan.path_length) };
                    let p = plan.pose_at(s);
                    let shifted = Pose::new(p.x, p.y, p.heading).offset_left(*offset);
                    ActorState {
                        actor_id: plan.actor_id.clone(),
                        x: shifted.x,
                        y: shifted.y,
                        heading: p.heading,
                        s,
                        done,
                    }
                })
                .collect();
            Frame { frame: k, t, actors: states }
        })
        .collect();
    Ok(Timeline {
        scenario_id: scenario.scenario_id.clone(),
        dt,
        duration: last as f64 * dt,
        actors,
        frames,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineHeader {
    pub format_version: u32,
    pub scenario_id: String,
    pub dt: f64,
    pub duration: f64,
    pub frame_count: usize,
    pub actors: Vec<TimelineActor>,
}

/// Line-delimited export: one header object, then one frame object per line.
pub fn timeline_to_jsonl(timeline: &Timeline) -> String {
    let header = TimelineHeader {
        format_version: FORMAT_VERSION,
        scenario_id: timeline.scenario_id.clone(),
        dt: timeline.dt,
        duration: timeline.duration,
        frame_count: timeline.frames.len(),
        actors: timeline.actors.clone(),
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for f in &timeline.frames {
        out.push_str(&serde_json::to_string(f).expect("frame serializes"));
        out.push('\n');
    }
    out
}

pub fn timeline_from_jsonl(text: &str) -> Result<Timeline> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: TimelineHeader = serde_json::from_str(
        lines
            .next()
            .ok_or_else(|| Error::Format("empty timeline document".to_string()))?,
    )
    .map_err(|e| Error::Format(format!("timeline header: {e}")))?;
    if header.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "timeline version {} is not supported",
            header.format_version
        )));
    }
    let frames: Vec<Frame> = lines
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Format(format!("timeline frame {i}: {e}"))))
        .collect::<Result<_>>()?;
    if frames.len() != header.frame_count {
        return Err(Error::Format(format!(
            "timeline declares {} frames but holds {}",
            header.frame_count,
            frames.len()
        )));
    }
    Ok(Timeline {
        scenario_id: header.scenario_id,
        dt: header.dt,
        duration: header.duration,
        actors: header.actors,
        frames,
    })
}
