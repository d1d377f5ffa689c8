//! Builds map bundles from the fixtures with the library itself.

#![allow(dead_code)]

use std::path::PathBuf;

use graphscene_core::lanegraph::{build_lane_graph, build_pedestrian_graph};
use graphscene_core::opendrive::{extract_metadata, parse_opendrive};
use graphscene_core::persist::digest_bytes;
use graphscene_core::regions::{segment_regions, Roi};
use graphscene_core::scenario::MapBundle;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

pub fn bundle(name: &str, spacing: f64, target: f64) -> MapBundle {
    let xml = std::fs::read_to_string(fixture_path(&format!("{name}.xodr"))).unwrap();
    let net = parse_opendrive(&xml).unwrap();
    let road = build_lane_graph(&net, name, spacing).unwrap();
    let ped = build_pedestrian_graph(&net, name, spacing).unwrap();
    let partition = segment_regions(&road, Some(&ped), &net, target).unwrap();
    MapBundle {
        map_id: name.to_string(),
        digest: digest_bytes(xml.as_bytes()),
        metadata: extract_metadata(&net, name),
        road_graph: road,
        pedestrian_graph: ped,
        partition,
    }
}

/// Roi over every region, grown in sorted order.
pub fn full_roi(b: &MapBundle) -> Roi {
    let ids: Vec<String> = b.partition.region_ids().map(str::to_string).collect();
    let mut order = vec![ids[0].clone()];
    while order.len() < ids.len() {
        let next = ids
            .iter()
            .find(|id| !order.contains(id) && order.iter().any(|m| b.partition.adjacency[m].contains(*id)))
            .expect("partition is connected")
            .clone();
        order.push(next);
    }
    Roi::from_regions(&b.partition, order).unwrap()
}
