use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_PI_2;

use super::build::{check_spacing, lane_contacts, sample_lanes, sample_offsets};
use super::{edge_between, GraphKind, GraphNode, LaneGraph, NodeKind, Relation};
use crate::error::Result;
use crate::opendrive::{
    eval_reference_line, normalize_angle, ContactPoint, LaneType, Pose, RoadNetwork,
};

/// Crosswalk ends farther than this from any sidewalk node stay unattached.
pub const CROSSWALK_ATTACH_RADIUS: f64 = 5.0;

/// Builds the undirected pedestrian graph: sidewalk centerlines plus
/// crosswalk chains attached to the nearest sidewalk node at each curb.
pub fn build_pedestrian_graph(network: &RoadNetwork, map_id: &str, spacing: f64) -> Result<LaneGraph> {
    check_spacing(spacing)?;
    let mut nodes = BTreeMap::new();
    let lanes = sample_lanes(network, map_id, spacing, LaneType::Sidewalk, &mut nodes)?;

    // unordered pairs, so each undirected edge is stored once
    let mut pairs: BTreeSet<(String, String)> = BTreeSet::new();
    let mut add = |a: &str, b: &str| {
        if a != b {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            pairs.insert((lo.to_string(), hi.to_string()));
        }
    };
    let mut edges = Vec::new();
    for ids in lanes.values() {
        for w in ids.windows(2) {
            edges.push(edge_between(&nodes, &w[0], &w[1], Relation::Pedestrian));
        }
    }
    for (a, b) in lane_contacts(network, LaneType::Sidewalk) {
        let pick = |key, at| {
            lanes.get(key).map(|ids: &Vec<String>| match at {
                ContactPoint::Start => ids[0].clone(),
                ContactPoint::End => ids[ids.len() - 1].clone(),
            })
        };
        if let (Some(x), Some(y)) = (pick(&a.key, a.at), pick(&b.key, b.at)) {
            add(&x, &y);
        }
    }

    let sidewalk_nodes: Vec<String> = nodes.keys().cloned().collect();
    for (ordinal, cw) in network.crosswalk_objects.iter().enumerate() {
        let road = &network.roads[&cw.road_id];
        let s = cw.s.clamp(0.0, road.length);
        let reference = eval_reference_line(road, s)?;
        let center = reference.offset_left(cw.t);
        let across = normalize_angle(reference.heading + cw.heading + FRAC_PI_2);
        let (sin, cos) = across.sin_cos();
        let half = 0.5 * cw.extent.max(0.0);
        let (x0, y0) = (center.x - half * cos, center.y - half * sin);
        let section = road.section_index_at(s).unwrap_or(0);
        let object = if cw.id.is_empty() { ordinal.to_string() } else { cw.id.clone() };

        let offsets = if cw.extent > 0.0 {
            sample_offsets(cw.extent, spacing)
        } else {
            vec![0.0]
        };
        let mut chain = Vec::new();
        for (index, d) in offsets.into_iter().enumerate() {
            let id = format!("{map_id}:{}:cw:{object}:{index}", cw.road_id);
            nodes.insert(
                id.clone(),
                GraphNode {
                    id: id.clone(),
                    pose: Pose::new(x0 + d * cos, y0 + d * sin, across),
                    s_coord: d,
                    road_id: cw.road_id.clone(),
                    section,
                    lane_id: 0,
                    kind: NodeKind::Pedestrian,
                    actor: None,
                },
            );
            chain.push(id);
        }
        for w in chain.windows(2) {
            edges.push(edge_between(&nodes, &w[0], &w[1], Relation::Pedestrian));
        }
        let curb_ends = [chain[0].clone(), chain[chain.len() - 1].clone()];
        let mut attached = 0;
        for end in curb_ends.iter().collect::<BTreeSet<_>>() {
            let here = nodes[end].pose;
            let nearest = sidewalk_nodes
                .iter()
                .map(|id| (nodes[id].pose.distance(&here), id))
                .filter(|(d, _)| *d <= CROSSWALK_ATTACH_RADIUS)
                .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
            if let Some((_, target)) = nearest {
                add(end, target);
                attached += 1;
            }
        }
        if attached == 0 {
            log::warn!(
                "crosswalk {object} on road {} has no sidewalk within {CROSSWALK_ATTACH_RADIUS} m",
                cw.road_id
            );
        }
    }

    let chained: BTreeSet<(String, String)> = edges
        .iter()
        .map(|e| {
            if e.from < e.to {
                (e.from.clone(), e.to.clone())
            } else {
                (e.to.clone(), e.from.clone())
            }
        })
        .collect();
    for (a, b) in pairs.difference(&chained) {
        edges.push(edge_between(&nodes, a, b, Relation::Pedestrian));
    }

    LaneGraph::from_parts(map_id, GraphKind::Pedestrian, spacing, nodes.into_values(), edges)
}
