//! OpenDRIVE road networks: the parsed model, reference-line and lane-center
//! evaluation, and the statistics shown in the map catalog.

mod geometry;
mod metadata;
mod parse;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use geometry::{
    normalize_angle, param_poly3_samples, poly3_samples, spiral_samples, GeometryKind,
    GeometrySample, GeometrySegment, ParamRange, Pose, MAX_CHORD_DEVIATION,
};
pub use metadata::{extract_metadata, MapMetadata};
pub use parse::{parse_opendrive, parse_opendrive_with, ParseOptions};

const S_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaneType {
    Driving,
    Sidewalk,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TravelDirection {
    WithS,
    AgainstS,
}

/// `a + b ds + c ds^2 + d ds^3`, valid from `s_offset` until the next entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicPoly {
    pub s_offset: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl CubicPoly {
    pub fn eval(&self, s: f64) -> f64 {
        let ds = s - self.s_offset;
        self.a + ds * (self.b + ds * (self.c + ds * self.d))
    }
}

/// Evaluates a piecewise cubic record list at `s` (0 when empty).
fn eval_piecewise(polys: &[CubicPoly], s: f64) -> f64 {
    let idx = polys.partition_point(|p| p.s_offset <= s + S_TOLERANCE);
    match idx {
        0 => polys.first().map_or(0.0, |p| p.eval(s)),
        i => polys[i - 1].eval(s),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadMark {
    pub s_offset: f64,
    pub mark_type: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lane {
    pub id: i32,
    pub lane_type: LaneType,
    /// Width records with `s_offset` relative to the lane section start.
    pub widths: Vec<CubicPoly>,
    pub travel_direction: TravelDirection,
    pub predecessor: Option<i32>,
    pub successor: Option<i32>,
    pub road_marks: Vec<RoadMark>,
}

impl Lane {
    /// Width at `ds` metres into the section, never negative.
    pub fn width_at(&self, ds: f64) -> f64 {
        eval_piecewise(&self.widths, ds).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneSection {
    pub s_start: f64,
    pub s_end: f64,
    /// Keyed by lane id; the center lane (0) is not stored.
    pub lanes: BTreeMap<i32, Lane>,
}

impl LaneSection {
    pub fn length(&self) -> f64 {
        self.s_end - self.s_start
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactPoint {
    Start,
    End,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "element", content = "id", rename_all = "snake_case")]
pub enum LinkTarget {
    Road(String),
    Junction(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoadLink {
    pub target: LinkTarget,
    pub contact_point: Option<ContactPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Road {
    pub id: String,
    pub name: String,
    pub length: f64,
    pub geometry: Vec<GeometrySegment>,
    pub lane_offsets: Vec<CubicPoly>,
    pub lane_sections: Vec<LaneSection>,
    pub predecessor: Option<RoadLink>,
    pub successor: Option<RoadLink>,
    pub junction_id: Option<String>,
    /// First declared speed limit, m/s.
    pub speed_limit: Option<f64>,
    /// Parsed for completeness; graphs are built in the z = 0 plane.
    pub elevation: Vec<CubicPoly>,
}

impl Road {
    pub fn section_index_at(&self, s: f64) -> Option<usize> {
        if self.lane_sections.is_empty() {
            return None;
        }
        let idx = self
            .lane_sections
            .partition_point(|sec| sec.s_start <= s + S_TOLERANCE);
        Some(idx.saturating_sub(1))
    }

    pub fn lane_offset_at(&self, s: f64) -> f64 {
        eval_piecewise(&self.lane_offsets, s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JunctionConnection {
    pub id: String,
    pub incoming_road: String,
    pub connecting_road: String,
    pub contact_point: ContactPoint,
    /// (incoming lane, connecting lane) pairs.
    pub lane_links: Vec<(i32, i32)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Junction {
    pub id: String,
    pub name: String,
    pub connections: Vec<JunctionConnection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub id: String,
    pub road_id: String,
    pub s: f64,
    pub t: f64,
    pub signal_type: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosswalkObject {
    pub id: String,
    pub road_id: String,
    pub s: f64,
    pub t: f64,
    /// Span across the road, along the object's lateral axis (m).
    pub extent: f64,
    /// Object heading relative to the reference line.
    pub heading: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RoadNetwork {
    pub name: String,
    pub roads: BTreeMap<String, Road>,
    pub junctions: BTreeMap<String, Junction>,
    /// Traffic lights only.
    pub signals: Vec<Signal>,
    /// Every other signal; counted but not used by the graphs.
    pub road_signs: Vec<Signal>,
    pub crosswalk_objects: Vec<CrosswalkObject>,
}

impl RoadNetwork {
    pub fn road(&self, id: &str) -> Result<&Road> {
        self.roads
            .get(id)
            .ok_or_else(|| Error::domain(format!("unknown road {id}")))
    }
}

/// Pose on the reference line of `road` at arc length `s`.
pub fn eval_reference_line(road: &Road, s: f64) -> Result<Pose> {
    if !(s >= -S_TOLERANCE && s <= road.length + S_TOLERANCE) {
        return Err(Error::domain(format!(
            "s = {s} outside road {} of length {}",
            road.id, road.length
        )));
    }
    let idx = road
        .geometry
        .partition_point(|g| g.s_offset <= s + S_TOLERANCE)
        .saturating_sub(1);
    let seg = road
        .geometry
        .get(idx)
        .ok_or_else(|| Error::Structural(format!("road {} has no geometry", road.id)))?;
    Ok(seg.eval(s - seg.s_offset))
}

/// Centerline pose of `lane_id` at `s`, using the lane section that covers `s`.
pub fn eval_lane_center(road: &Road, lane_id: i32, s: f64) -> Result<Pose> {
    let section = road
        .section_index_at(s)
        .ok_or_else(|| Error::domain(format!("road {} has no lane sections", road.id)))?;
    eval_lane_center_in_section(road, section, lane_id, s)
}

/// Like [`eval_lane_center`] but pinned to one section, so section end
/// points evaluate against the lanes that own them.
pub fn eval_lane_center_in_section(
    road: &Road,
    section: usize,
    lane_id: i32,
    s: f64,
) -> Result<Pose> {
    let sec = road
        .lane_sections
        .get(section)
        .ok_or_else(|| Error::domain(format!("road {} has no section {section}", road.id)))?;
    let lane = sec.lanes.get(&lane_id).ok_or_else(|| {
        Error::domain(format!(
            "lane {lane_id} not found in road {} section {section}",
            road.id
        ))
    })?;
    let reference = eval_reference_line(road, s)?;
    let t = lane_center_t(road, sec, lane_id, s);
    let mut pose = reference.offset_left(t);
    if lane.travel_direction == TravelDirection::AgainstS {
        pose.heading = normalize_angle(pose.heading + std::f64::consts::PI);
    }
    Ok(pose)
}

/// Lateral coordinate of a lane's centerline (positive left of the reference line).
fn lane_center_t(road: &Road, sec: &LaneSection, lane_id: i32, s: f64) -> f64 {
    let ds = s - sec.s_start;
    let width = |id: i32| sec.lanes.get(&id).map_or(0.0, |l| l.width_at(ds));
    let sign = f64::from(lane_id.signum());
    let inner: f64 = (1..lane_id.abs()).map(|k| width(k * lane_id.signum())).sum();
    road.lane_offset_at(s) + sign * (inner + 0.5 * width(lane_id))
}

/// Lateral coordinate of a lane's outer border.
pub(crate) fn lane_outer_t(road: &Road, sec: &LaneSection, lane_id: i32, s: f64) -> f64 {
    let ds = s - sec.s_start;
    let width = |id: i32| sec.lanes.get(&id).map_or(0.0, |l| l.width_at(ds));
    let sign = f64::from(lane_id.signum());
    let total: f64 = (1..=lane_id.abs()).map(|k| width(k * lane_id.signum())).sum();
    road.lane_offset_at(s) + sign * total
}
