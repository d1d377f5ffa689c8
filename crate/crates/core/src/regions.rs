//! Segmentation of the road graph into selectable regions, and the
//! connectivity-preserving region-of-interest rules built on top of it.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lanegraph::{GraphKind, GraphNode, LaneGraph, Relation};
use crate::opendrive::{LaneType, RoadNetwork, TravelDirection};

pub const DEFAULT_TARGET_LENGTH: f64 = 75.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Junction,
    RoadSegment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RegionSource {
    Junction { junction_id: String },
    Road { road_id: String, s_start: f64, s_end: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub region_id: String,
    pub kind: RegionKind,
    /// Road-bound nodes of the region.
    pub node_ids: BTreeSet<String>,
    /// Pedestrian nodes attached to the region.
    #[serde(default)]
    pub pedestrian_node_ids: BTreeSet<String>,
    pub source: RegionSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionPartition {
    pub map_id: String,
    pub target_length: f64,
    pub regions: BTreeMap<String, Region>,
    pub adjacency: BTreeMap<String, BTreeSet<String>>,
}

impl RegionPartition {
    pub fn region(&self, id: &str) -> Result<&Region> {
        self.regions
            .get(id)
            .ok_or_else(|| Error::domain(format!("unknown region {id}")))
    }

    pub fn neighbors(&self, id: &str) -> impl Iterator<Item = &str> {
        self.adjacency.get(id).into_iter().flatten().map(String::as_str)
    }

    /// The region holding a road-bound or pedestrian node.
    pub fn region_of(&self, node_id: &str) -> Option<&str> {
        self.regions
            .values()
            .find(|r| r.node_ids.contains(node_id) || r.pedestrian_node_ids.contains(node_id))
            .map(|r| r.region_id.as_str())
    }

    pub fn region_ids(&self) -> impl Iterator<Item = &str> {
        self.regions.keys().map(String::as_str)
    }
}

/// Position of a node along its road's reference line.
pub fn road_s(network: &RoadNetwork, node: &GraphNode) -> Option<f64> {
    let road = network.roads.get(&node.road_id)?;
    if node.lane_id == 0 {
        // crosswalk chains sit across the road at a single station
        return None;
    }
    let sec = road.lane_sections.get(node.section)?;
    let lane = sec.lanes.get(&node.lane_id)?;
    let reversed = lane.lane_type == LaneType::Driving && lane.travel_direction == TravelDirection::AgainstS;
    Some(if reversed {
        sec.s_end - node.s_coord
    } else {
        sec.s_start + node.s_coord
    })
}

/// Index of the slice holding station `s` on a road of `length` cut into
/// `k` slices. Ranges are closed on the high side, so a node sitting exactly
/// on a boundary stays with the lower slice.
fn slice_index(s: f64, length: f64, k: usize) -> usize {
    let width = length / k as f64;
    let raw = (s / width - 1e-9).ceil() as i64 - 1;
    raw.clamp(0, k as i64 - 1) as usize
}

pub fn slice_count(length: f64, target_length: f64) -> usize {
    ((length / target_length).round() as usize).max(1)
}

/// Splits `road_graph` into junction regions and road slices of roughly
/// `target_length` metres. Pedestrian nodes, when given, go to the region of
/// the nearest road-bound node on their own road.
pub fn segment_regions(
    road_graph: &LaneGraph,
    pedestrian_graph: Option<&LaneGraph>,
    network: &RoadNetwork,
    target_length: f64,
) -> Result<RegionPartition> {
    if !(target_length.is_finite() && target_length > 0.0) {
        return Err(Error::domain(format!(
            "target length must be positive, got {target_length}"
        )));
    }

    let mut regions: BTreeMap<String, Region> = BTreeMap::new();
    let mut node_region: BTreeMap<&str, String> = BTreeMap::new();
    for node in road_graph.nodes() {
        let road = network.road(&node.road_id)?;
        let (id, kind, source) = match &road.junction_id {
            Some(j) => (
                format!("junction:{j}"),
                RegionKind::Junction,
                RegionSource::Junction { junction_id: j.clone() },
            ),
            None => {
                let k = slice_count(road.length, target_length);
                let s = road_s(network, node).unwrap_or(0.0);
                let j = slice_index(s, road.length, k);
                let width = road.length / k as f64;
                (
                    format!("road:{}:{j}", road.id),
                    RegionKind::RoadSegment,
                    RegionSource::Road {
                        road_id: road.id.clone(),
                        s_start: j as f64 * width,
                        s_end: if j + 1 == k { road.length } else { (j + 1) as f64 * width },
                    },
                )
            }
        };
        regions
            .entry(id.clone())
            .or_insert_with(|| Region {
                region_id: id.clone(),
                kind,
                node_ids: BTreeSet::new(),
                pedestrian_node_ids: BTreeSet::new(),
                source,
            })
            .node_ids
            .insert(node.id.clone());
        node_region.insert(&node.id, id);
    }

    let mut adjacency: BTreeMap<String, BTreeSet<String>> =
        regions.keys().map(|k| (k.clone(), BTreeSet::new())).collect();
    for e in road_graph.edges() {
        let (a, b) = (&node_region[e.from.as_str()], &node_region[e.to.as_str()]);
        if a != b {
            adjacency.get_mut(a).unwrap().insert(b.clone());
            adjacency.get_mut(b).unwrap().insert(a.clone());
        }
    }

    if let Some(ped) = pedestrian_graph {
        assign_pedestrian_nodes(road_graph, ped, &node_region, &mut regions);
    }

    Ok(RegionPartition {
        map_id: road_graph.map_id.clone(),
        target_length,
        regions,
        adjacency,
    })
}

fn assign_pedestrian_nodes(
    road_graph: &LaneGraph,
    ped: &LaneGraph,
    node_region: &BTreeMap<&str, String>,
    regions: &mut BTreeMap<String, Region>,
) {
    let mut by_road: BTreeMap<&str, Vec<&GraphNode>> = BTreeMap::new();
    for n in road_graph.nodes() {
        by_road.entry(n.road_id.as_str()).or_default().push(n);
    }
    let centroids: Vec<(String, f64, f64)> = regions
        .values()
        .map(|r| {
            let count = r.node_ids.len() as f64;
            let (sx, sy) = r.node_ids.iter().fold((0.0, 0.0), |(sx, sy), id| {
                let p = road_graph.node(id).unwrap().pose;
                (sx + p.x, sy + p.y)
            });
            (r.region_id.clone(), sx / count, sy / count)
        })
        .collect();

    for p in ped.nodes() {
        let nearest_road_node = by_road.get(p.road_id.as_str()).and_then(|nodes| {
            nodes
                .iter()
                .map(|n| (n.pose.distance(&p.pose), n.id.as_str()))
                .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)))
        });
        let target = match nearest_road_node {
            Some((_, id)) => Some(node_region[id].clone()),
            None => centroids
                .iter()
                .map(|(id, x, y)| ((p.pose.x - x).hypot(p.pose.y - y), id))
                .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)))
                .map(|(_, id)| id.clone()),
        };
        match target {
            Some(region) => {
                regions.get_mut(&region).unwrap().pedestrian_node_ids.insert(p.id.clone());
            }
            None => log::warn!("pedestrian node {} has no region to join", p.id),
        }
    }
}

/// An ordered, connected selection of regions. Each member after the first
/// is adjacent to some earlier member.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Roi(Vec<String>);

impl Roi {
    pub fn new(partition: &RegionPartition, initial: &str) -> Result<Roi> {
        partition.region(initial)?;
        Ok(Roi(vec![initial.to_string()]))
    }

    /// Checks a full selection list against the partition.
    pub fn from_regions(partition: &RegionPartition, ids: Vec<String>) -> Result<Roi> {
        let roi = Roi(ids);
        roi.validate(partition)?;
        Ok(roi)
    }

    /// Orders an arbitrary connected set of regions into a valid roi,
    /// growing from the first listed region and taking the smallest
    /// adjacent id at each step.
    pub fn from_set(partition: &RegionPartition, ids: &[String]) -> Result<Roi> {
        let Some(first) = ids.first() else {
            return Err(Error::domain("roi is empty"));
        };
        let mut rest: BTreeSet<&str> = BTreeSet::new();
        for id in ids {
            partition.region(id)?;
            rest.insert(id);
        }
        rest.remove(first.as_str());
        let mut order = vec![first.clone()];
        while !rest.is_empty() {
            let next = rest
                .iter()
                .copied()
                .find(|id| partition.neighbors(id).any(|n| order.iter().any(|m| m == n)))
                .ok_or_else(|| Error::domain("roi regions are not connected"))?;
            rest.remove(next);
            order.push(next.to_string());
        }
        Ok(Roi(order))
    }

    pub fn regions(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.0.iter().any(|r| r == id)
    }

    pub fn validate(&self, partition: &RegionPartition) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::domain("roi is empty"));
        }
        let mut seen = BTreeSet::new();
        for (i, id) in self.0.iter().enumerate() {
            partition.region(id)?;
            if !seen.insert(id.as_str()) {
                return Err(Error::domain(format!("region {id} appears twice in the roi")));
            }
            if i > 0 && !partition.neighbors(id).any(|n| self.0[..i].iter().any(|m| m == n)) {
                return Err(Error::domain(format!(
                    "region {id} is not adjacent to any earlier roi member"
                )));
            }
        }
        Ok(())
    }
}

/// Regions adjacent to the roi that are not yet part of it.
pub fn eligible_extensions(partition: &RegionPartition, roi: &Roi) -> Result<BTreeSet<String>> {
    let mut out = BTreeSet::new();
    for id in roi.regions() {
        partition.region(id)?;
        out.extend(partition.neighbors(id).map(str::to_string));
    }
    for id in roi.regions() {
        out.remove(id);
    }
    Ok(out)
}

pub fn expand_roi(partition: &RegionPartition, roi: &Roi, region_id: &str) -> Result<Roi> {
    partition.region(region_id)?;
    if roi.contains(region_id) {
        return Err(Error::AlreadyInRoi(region_id.to_string()));
    }
    let eligible = eligible_extensions(partition, roi)?;
    if !eligible.contains(region_id) {
        return Err(Error::NotEligible {
            region: region_id.to_string(),
            eligible: eligible.into_iter().collect(),
        });
    }
    let mut next = roi.clone();
    next.0.push(region_id.to_string());
    Ok(next)
}

/// Restricts `graph` to the roi. Road graphs keep the regions' road-bound
/// nodes, pedestrian graphs their pedestrian nodes. Lateral edges whose ends
/// lost every successor edge at the cut are dropped, so terminal nodes stay
/// exactly the nodes without outgoing successor, left or right edges.
pub fn induced_subgraph(graph: &LaneGraph, partition: &RegionPartition, roi: &Roi) -> Result<LaneGraph> {
    if roi.is_empty() {
        return Err(Error::domain("roi is empty"));
    }
    let mut keep: BTreeSet<&str> = BTreeSet::new();
    for id in roi.regions() {
        let region = partition.region(id)?;
        let ids = match graph.kind {
            GraphKind::Road => &region.node_ids,
            GraphKind::Pedestrian => &region.pedestrian_node_ids,
        };
        keep.extend(ids.iter().map(String::as_str));
    }
    let nodes: Vec<GraphNode> = graph
        .nodes()
        .filter(|n| keep.contains(n.id.as_str()))
        .cloned()
        .collect();
    let inside: Vec<_> = graph
        .edges()
        .iter()
        .filter(|e| keep.contains(e.from.as_str()) && keep.contains(e.to.as_str()))
        .cloned()
        .collect();
    let with_successor: BTreeSet<&str> = inside
        .iter()
        .filter(|e| e.relation == Relation::Successor)
        .map(|e| e.from.as_str())
        .collect();
    let edges = inside
        .iter()
        .filter(|e| {
            !matches!(e.relation, Relation::Left | Relation::Right)
                || (with_successor.contains(e.from.as_str()) && with_successor.contains(e.to.as_str()))
        })
        .cloned()
        .collect();
    LaneGraph::from_parts(graph.map_id.clone(), graph.kind, graph.spacing, nodes, edges)
}
