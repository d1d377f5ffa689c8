use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use super::{edge_between, GraphKind, GraphNode, LaneGraph, NodeKind, Relation};
use crate::error::{Error, Result};
use crate::opendrive::{
    eval_lane_center_in_section, normalize_angle, ContactPoint, LaneType, LinkTarget, Road,
    RoadLink, RoadNetwork,
    TravelDirection,
};

/// Distances `0, spacing, 2*spacing, ...` plus the end point `length`.
pub(crate) fn sample_offsets(length: f64, spacing: f64) -> Vec<f64> {
    let eps = 1e-9 * length.max(1.0);
    let mut out = Vec::new();
    let mut i = 0usize;
    loop {
        let d = i as f64 * spacing;
        if d >= length - eps {
            break;
        }
        out.push(d);
        i += 1;
    }
    out.push(length);
    out
}

pub(crate) fn check_spacing(spacing: f64) -> Result<()> {
    if spacing.is_finite() && spacing > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("spacing must be positive, got {spacing}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct LaneKey {
    pub road: String,
    pub section: usize,
    pub lane: i32,
}

/// A lane touching another lane at one of its s-ends.
#[derive(Debug, Clone)]
pub(crate) struct LaneEnd {
    pub key: LaneKey,
    pub at: ContactPoint,
}

pub(crate) fn node_id(map_id: &str, key: &LaneKey, index: usize) -> String {
    format!("{map_id}:{}:{}:{}:{index}", key.road, key.section, key.lane)
}

pub(crate) fn section_at(road: &Road, contact: ContactPoint) -> usize {
    match contact {
        ContactPoint::Start => 0,
        ContactPoint::End => road.lane_sections.len().saturating_sub(1),
    }
}

/// Samples every lane of `lane_type` and returns the nodes per lane in
/// sampling order. Driving lanes are ordered along their travel direction,
/// everything else along increasing s.
pub(crate) fn sample_lanes(
    network: &RoadNetwork,
    map_id: &str,
    spacing: f64,
    lane_type: LaneType,
    nodes: &mut BTreeMap<String, GraphNode>,
) -> Result<BTreeMap<LaneKey, Vec<String>>> {
    let kind = match lane_type {
        LaneType::Sidewalk => NodeKind::Pedestrian,
        _ => NodeKind::RoadBound,
    };
    let mut lanes = BTreeMap::new();
    for road in network.roads.values() {
        for (si, sec) in road.lane_sections.iter().enumerate() {
            for lane in sec.lanes.values().filter(|l| l.lane_type == lane_type) {
                let key = LaneKey {
                    road: road.id.clone(),
                    section: si,
                    lane: lane.id,
                };
                let reversed = lane_type == LaneType::Driving
                    && lane.travel_direction == TravelDirection::AgainstS;
                let mut ids = Vec::new();
                for (index, d) in sample_offsets(sec.length(), spacing).into_iter().enumerate() {
                    let s_ref = if reversed { sec.s_end - d } else { sec.s_start + d };
                    let mut pose = eval_lane_center_in_section(road, si, lane.id, s_ref)?;
                    if lane_type != LaneType::Driving
                        && lane.travel_direction == TravelDirection::AgainstS
                    {
                        // undirected lanes face along increasing s
                        pose.heading = normalize_angle(pose.heading + PI);
                    }
                    let id = node_id(map_id, &key, index);
                    nodes.insert(
                        id.clone(),
                        GraphNode {
                            id: id.clone(),
                            pose,
                            s_coord: d,
                            road_id: road.id.clone(),
                            section: si,
                            lane_id: lane.id,
                            kind,
                            actor: None,
                        },
                    );
                    ids.push(id);
                }
                lanes.insert(key, ids);
            }
        }
    }
    Ok(lanes)
}

/// Pairs of lane ends that touch, from section-to-section lane links, road
/// links and junction lane links. Only lanes of `lane_type` are paired.
pub(crate) fn lane_contacts(network: &RoadNetwork, lane_type: LaneType) -> Vec<(LaneEnd, LaneEnd)> {
    let is_kind = |road: &Road, section: usize, lane: i32| {
        road.lane_sections
            .get(section)
            .and_then(|s| s.lanes.get(&lane))
            .is_some_and(|l| l.lane_type == lane_type)
    };
    let end = |road: &str, section: usize, lane: i32, at: ContactPoint| LaneEnd {
        key: LaneKey {
            road: road.to_string(),
            section,
            lane,
        },
        at,
    };
    let mut out = Vec::new();
    let mut push = |a: LaneEnd, b: LaneEnd| {
        let ra = &network.roads[&a.key.road];
        let rb = &network.roads[&b.key.road];
        if is_kind(ra, a.key.section, a.key.lane) && is_kind(rb, b.key.section, b.key.lane) {
            out.push((a, b));
        }
    };

    for road in network.roads.values() {
        let secs = &road.lane_sections;
        for i in 0..secs.len().saturating_sub(1) {
            for lane in secs[i].lanes.values() {
                if let Some(next) = lane.successor {
                    push(
                        end(&road.id, i, lane.id, ContactPoint::End),
                        end(&road.id, i + 1, next, ContactPoint::Start),
                    );
                }
            }
            for lane in secs[i + 1].lanes.values() {
                if let Some(prev) = lane.predecessor {
                    push(
                        end(&road.id, i, prev, ContactPoint::End),
                        end(&road.id, i + 1, lane.id, ContactPoint::Start),
                    );
                }
            }
        }
        if secs.is_empty() {
            continue;
        }
        let links = [
            (&road.successor, ContactPoint::End, secs.len() - 1),
            (&road.predecessor, ContactPoint::Start, 0),
        ];
        for (link, own_end, own_sec) in links {
            let Some(link) = link else { continue };
            let LinkTarget::Road(other_id) = &link.target else {
                continue;
            };
            let other = &network.roads[other_id];
            if other.lane_sections.is_empty() {
                continue;
            }
            let contact = link.contact_point.unwrap_or(ContactPoint::Start);
            let other_sec = section_at(other, contact);
            for lane in secs[own_sec].lanes.values() {
                let target = match own_end {
                    ContactPoint::End => lane.successor,
                    ContactPoint::Start => lane.predecessor,
                };
                if let Some(t) = target {
                    push(
                        end(&road.id, own_sec, lane.id, own_end),
                        end(other_id, other_sec, t, contact),
                    );
                }
            }
        }
    }

    for junction in network.junctions.values() {
        for conn in &junction.connections {
            let incoming = &network.roads[&conn.incoming_road];
            let connecting = &network.roads[&conn.connecting_road];
            if incoming.lane_sections.is_empty() || connecting.lane_sections.is_empty() {
                continue;
            }
            let targets_junction = |link: &Option<RoadLink>| {
                matches!(link, Some(l) if l.target == LinkTarget::Junction(junction.id.clone()))
            };
            let incoming_end = if targets_junction(&incoming.successor) {
                ContactPoint::End
            } else if targets_junction(&incoming.predecessor) {
                ContactPoint::Start
            } else {
                log::warn!(
                    "junction {} connection {}: road {} does not link to the junction",
                    junction.id,
                    conn.id,
                    incoming.id
                );
                continue;
            };
            let in_sec = section_at(incoming, incoming_end);
            let conn_sec = section_at(connecting, conn.contact_point);
            for &(from, to) in &conn.lane_links {
                push(
                    end(&incoming.id, in_sec, from, incoming_end),
                    end(&connecting.id, conn_sec, to, conn.contact_point),
                );
            }
        }
    }
    out
}

fn exits_at(dir: TravelDirection, at: ContactPoint) -> bool {
    matches!(
        (dir, at),
        (TravelDirection::WithS, ContactPoint::End) | (TravelDirection::AgainstS, ContactPoint::Start)
    )
}

fn direction(network: &RoadNetwork, key: &LaneKey) -> TravelDirection {
    network.roads[&key.road].lane_sections[key.section].lanes[&key.lane].travel_direction
}

/// Builds the directed road graph over all driving lanes.
pub fn build_lane_graph(network: &RoadNetwork, map_id: &str, spacing: f64) -> Result<LaneGraph> {
    check_spacing(spacing)?;
    let mut nodes = BTreeMap::new();
    let lanes = sample_lanes(network, map_id, spacing, LaneType::Driving, &mut nodes)?;

    let mut edges = Vec::new();
    for ids in lanes.values() {
        for w in ids.windows(2) {
            edges.push(edge_between(&nodes, &w[0], &w[1], Relation::Successor));
        }
    }

    // lane-to-lane continuations, deduplicated across the redundant link sources
    let mut bridges = BTreeSet::new();
    for (a, b) in lane_contacts(network, LaneType::Driving) {
        let (da, db) = (direction(network, &a.key), direction(network, &b.key));
        let (from, to) = if exits_at(da, a.at) && !exits_at(db, b.at) {
            (&a.key, &b.key)
        } else if exits_at(db, b.at) && !exits_at(da, a.at) {
            (&b.key, &a.key)
        } else {
            log::warn!("lane link {a:?} <-> {b:?} has inconsistent travel directions");
            continue;
        };
        let (Some(from_ids), Some(to_ids)) = (lanes.get(from), lanes.get(to)) else {
            continue;
        };
        let last = from_ids.last().unwrap();
        let first = &to_ids[0];
        if last != first {
            bridges.insert((last.clone(), first.clone()));
        }
    }
    for (from, to) in &bridges {
        edges.push(edge_between(&nodes, from, to, Relation::Successor));
    }

    let has_successor: BTreeSet<&str> = edges.iter().map(|e| e.from.as_str()).collect();
    let mut lateral = Vec::new();
    for (key, ids) in &lanes {
        let road = &network.roads[&key.road];
        let sec = &road.lane_sections[key.section];
        // the next lane id towards the left of the reference line, skipping the center
        let neighbor_id = if key.lane == -1 { 1 } else { key.lane + 1 };
        let Some(neighbor) = sec.lanes.get(&neighbor_id) else {
            continue;
        };
        let own = &sec.lanes[&key.lane];
        if neighbor.lane_type != LaneType::Driving || neighbor.travel_direction != own.travel_direction {
            continue;
        }
        let other_key = LaneKey {
            lane: neighbor_id,
            ..key.clone()
        };
        let other_ids = &lanes[&other_key];
        // the higher id lies to the left when travelling with s
        let (towards, back) = match own.travel_direction {
            TravelDirection::WithS => (Relation::Left, Relation::Right),
            TravelDirection::AgainstS => (Relation::Right, Relation::Left),
        };
        for (a, b) in ids.iter().zip(other_ids) {
            if has_successor.contains(a.as_str()) && has_successor.contains(b.as_str()) {
                lateral.push(edge_between(&nodes, a, b, towards));
                lateral.push(edge_between(&nodes, b, a, back));
            }
        }
    }
    edges.extend(lateral);

    LaneGraph::from_parts(map_id, GraphKind::Road, spacing, nodes.into_values(), edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_rule() {
        assert_eq!(sample_offsets(7.0, 5.0), vec![0.0, 5.0, 7.0]);
        assert_eq!(sample_offsets(10.0, 5.0), vec![0.0, 5.0, 10.0]);
        assert_eq!(sample_offsets(3.0, 5.0), vec![0.0, 3.0]);
        assert_eq!(sample_offsets(100.0, 5.0).len(), 21);
    }

    #[test]
    fn zero_spacing_rejected() {
        let net = RoadNetwork::default();
        assert!(build_lane_graph(&net, "m", 0.0).is_err());
        assert!(build_lane_graph(&net, "m", -1.0).is_err());
        assert!(build_lane_graph(&net, "m", f64::NAN).is_err());
        assert!(build_lane_graph(&net, "m", 1.0).unwrap().is_empty());
    }
}
