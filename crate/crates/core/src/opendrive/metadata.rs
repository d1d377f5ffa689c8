use serde::{Deserialize, Serialize};

use super::{eval_reference_line, lane_outer_t, LaneType, RoadNetwork};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMetadata {
    pub map_id: String,
    pub junction_count: usize,
    pub crosswalk_count: usize,
    pub traffic_light_count: usize,
    /// Sum of driving-lane lengths, m.
    pub total_drivable_length: f64,
    /// (min_x, min_y, max_x, max_y)
    pub bounding_box: (f64, f64, f64, f64),
    pub speed_limit_range: Option<(f64, f64)>,
}

const BBOX_STEP: f64 = 1.0;

pub fn extract_metadata(network: &RoadNetwork, map_id: &str) -> MapMetadata {
    let total_drivable_length = network
        .roads
        .values()
        .flat_map(|r| &r.lane_sections)
        .map(|sec| {
            let driving = sec
                .lanes
                .values()
                .filter(|l| l.lane_type == LaneType::Driving)
                .count();
            driving as f64 * sec.length()
        })
        .sum();

    let speed_limit_range = network
        .roads
        .values()
        .filter_map(|r| r.speed_limit)
        .fold(None, |acc: Option<(f64, f64)>, v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        });

    MapMetadata {
        map_id: map_id.to_string(),
        junction_count: network.junctions.len(),
        crosswalk_count: network.crosswalk_objects.len(),
        traffic_light_count: network.signals.len(),
        total_drivable_length,
        bounding_box: bounding_box(network),
        speed_limit_range,
    }
}

fn bounding_box(network: &RoadNetwork) -> (f64, f64, f64, f64) {
    let mut bbox: Option<(f64, f64, f64, f64)> = None;
    let mut add = |x: f64, y: f64| {
        bbox = Some(match bbox {
            None => (x, y, x, y),
            Some((a, b, c, d)) => (a.min(x), b.min(y), c.max(x), d.max(y)),
        });
    };
    for road in network.roads.values() {
        let steps = (road.length / BBOX_STEP).ceil().max(1.0) as usize;
        for i in 0..=steps {
            let s = road.length * i as f64 / steps as f64;
            let Ok(reference) = eval_reference_line(road, s) else {
                continue;
            };
            add(reference.x, reference.y);
            let Some(sec_idx) = road.section_index_at(s) else {
                continue;
            };
            let sec = &road.lane_sections[sec_idx];
            for id in [sec.lanes.keys().next(), sec.lanes.keys().next_back()]
                .into_iter()
                .flatten()
            {
                let p = reference.offset_left(lane_outer_t(road, sec, *id, s));
                add(p.x, p.y);
            }
        }
    }
    bbox.unwrap_or((0.0, 0.0, 0.0, 0.0))
}
