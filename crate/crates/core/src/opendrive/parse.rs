use std::collections::{BTreeMap, BTreeSet};

use roxmltree::{Document, Node};

use super::geometry::{param_poly3_samples, poly3_samples, spiral_samples, ParamRange};
use super::*;

/// Gap allowed between consecutive geometry records and at the road end.
const TILING_TOLERANCE: f64 = 1e-2;

#[derive(Debug, Clone)]
pub struct ParseOptions {
    /// Signal `type` values counted as traffic lights.
    pub traffic_light_types: BTreeSet<String>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        let types = [
            "1000001", "1000002", "1000007", "1000008", "1000009", "1000010", "1000011",
            "1000012", "1000013",
        ];
        ParseOptions {
            traffic_light_types: types.iter().map(|s| s.to_string()).collect(),
        }
    }
}

pub fn parse_opendrive(document: &str) -> Result<RoadNetwork> {
    parse_opendrive_with(document, &ParseOptions::default())
}

pub fn parse_opendrive_with(document: &str, options: &ParseOptions) -> Result<RoadNetwork> {
    let doc = Document::parse(document).map_err(|e| {
        let pos = e.pos();
        Error::Xml {
            line: pos.row,
            column: pos.col,
            message: e.to_string(),
        }
    })?;
    let ctx = Ctx { doc: &doc };
    let root = doc.root_element();
    if root.tag_name().name() != "OpenDRIVE" {
        return Err(ctx.err(root, "root element is not <OpenDRIVE>"));
    }

    let mut network = RoadNetwork::default();
    let mut left_hand = false;
    if let Some(header) = child(root, "header") {
        network.name = header.attribute("name").unwrap_or_default().to_string();
    }
    if let Some(rule) = root.attribute("rule") {
        left_hand = rule.eq_ignore_ascii_case("LHT");
    }

    for node in root.children().filter(|n| n.has_tag_name("road")) {
        let road = ctx.road(node, left_hand, options, &mut network)?;
        if network.roads.insert(road.id.clone(), road).is_some() {
            return Err(ctx.err(node, "duplicate road id"));
        }
    }
    for node in root.children().filter(|n| n.has_tag_name("junction")) {
        let junction = ctx.junction(node)?;
        network.junctions.insert(junction.id.clone(), junction);
    }
    validate_links(&network)?;
    Ok(network)
}

struct Ctx<'a, 'input> {
    doc: &'a Document<'input>,
}

fn child<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Option<Node<'a, 'i>> {
    node.children().find(|n| n.has_tag_name(name))
}

fn children<'a, 'i: 'a>(node: Node<'a, 'i>, name: &'a str) -> impl Iterator<Item = Node<'a, 'i>> + 'a {
    node.children().filter(move |n| n.has_tag_name(name))
}

impl Ctx<'_, '_> {
    fn err(&self, node: Node, msg: impl std::fmt::Display) -> Error {
        let pos = self.doc.text_pos_at(node.range().start);
        Error::Xml {
            line: pos.row,
            column: pos.col,
            message: format!("<{}>: {msg}", node.tag_name().name()),
        }
    }

    fn num(&self, node: Node, attr: &str) -> Result<f64> {
        let raw = node
            .attribute(attr)
            .ok_or_else(|| self.err(node, format!("missing attribute {attr}")))?;
        raw.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.err(node, format!("attribute {attr}={raw:?} is not a number")))
    }

    fn num_or(&self, node: Node, attr: &str, default: f64) -> Result<f64> {
        match node.attribute(attr) {
            Some(_) => self.num(node, attr),
            None => Ok(default),
        }
    }

    fn int(&self, node: Node, attr: &str) -> Result<i32> {
        let raw = node
            .attribute(attr)
            .ok_or_else(|| self.err(node, format!("missing attribute {attr}")))?;
        raw.trim()
            .parse::<i32>()
            .map_err(|_| self.err(node, format!("attribute {attr}={raw:?} is not an integer")))
    }

    fn text(&self, node: Node, attr: &str) -> Result<String> {
        node.attribute(attr)
            .map(str::to_string)
            .ok_or_else(|| self.err(node, format!("missing attribute {attr}")))
    }

    fn poly(&self, node: Node, s_attr: &str) -> Result<CubicPoly> {
        Ok(CubicPoly {
            s_offset: self.num_or(node, s_attr, 0.0)?,
            a: self.num_or(node, "a", 0.0)?,
            b: self.num_or(node, "b", 0.0)?,
            c: self.num_or(node, "c", 0.0)?,
            d: self.num_or(node, "d", 0.0)?,
        })
    }

    fn road(
        &self,
        node: Node,
        left_hand: bool,
        options: &ParseOptions,
        network: &mut RoadNetwork,
    ) -> Result<Road> {
        let id = self.text(node, "id")?;
        let length = self.num(node, "length")?;
        if length <= 0.0 {
            return Err(Error::Structural(format!("road {id} has non-positive length")));
        }
        let left_hand = match node.attribute("rule") {
            Some(rule) => rule.eq_ignore_ascii_case("LHT"),
            None => left_hand,
        };
        let junction_id = node
            .attribute("junction")
            .filter(|j| !j.is_empty() && *j != "-1")
            .map(str::to_string);

        let (mut predecessor, mut successor) = (None, None);
        if let Some(link) = child(node, "link") {
            if let Some(p) = child(link, "predecessor") {
                predecessor = Some(self.road_link(p)?);
            }
            if let Some(s) = child(link, "successor") {
                successor = Some(self.road_link(s)?);
            }
        }

        let mut speed_limit = None;
        for ty in children(node, "type") {
            if let Some(speed) = child(ty, "speed") {
                if speed_limit.is_none() {
                    speed_limit = self.speed(speed)?;
                }
            }
        }

        let geometry = match child(node, "planView") {
            Some(pv) => self.plan_view(pv, &id)?,
            None => Vec::new(),
        };
        check_geometry_tiling(&id, length, &geometry)?;

        let mut elevation = Vec::new();
        if let Some(ep) = child(node, "elevationProfile") {
            for e in children(ep, "elevation") {
                elevation.push(self.poly(e, "s")?);
            }
        }

        let mut lane_offsets = Vec::new();
        let mut lane_sections = Vec::new();
        if let Some(lanes) = child(node, "lanes") {
            for lo in children(lanes, "laneOffset") {
                lane_offsets.push(self.poly(lo, "s")?);
            }
            for sec in children(lanes, "laneSection") {
                lane_sections.push(self.lane_section(sec, left_hand)?);
            }
        }
        lane_offsets.sort_by(|a, b| a.s_offset.total_cmp(&b.s_offset));
        lane_sections.sort_by(|a, b| a.s_start.total_cmp(&b.s_start));
        if let Some(first) = lane_sections.first() {
            if first.s_start.abs() > TILING_TOLERANCE {
                return Err(Error::Structural(format!(
                    "road {id}: first lane section starts at {}",
                    first.s_start
                )));
            }
        }
        for i in 0..lane_sections.len() {
            let end = lane_sections.get(i + 1).map_or(length, |n| n.s_start);
            if end - lane_sections[i].s_start <= 0.0 {
                return Err(Error::Structural(format!(
                    "road {id}: lane section {i} has empty s-range"
                )));
            }
            lane_sections[i].s_end = end;
        }
        if let Some(first) = lane_sections.first_mut() {
            first.s_start = 0.0;
        }

        if let Some(objects) = child(node, "objects") {
            for obj in children(objects, "object") {
                if obj.attribute("type") == Some("crosswalk") {
                    network.crosswalk_objects.push(self.crosswalk(obj, &id)?);
                }
            }
        }
        if let Some(signals) = child(node, "signals") {
            for sig in children(signals, "signal") {
                let signal = Signal {
                    id: sig.attribute("id").unwrap_or_default().to_string(),
                    road_id: id.clone(),
                    s: self.num_or(sig, "s", 0.0)?,
                    t: self.num_or(sig, "t", 0.0)?,
                    signal_type: sig.attribute("type").unwrap_or_default().to_string(),
                };
                if options.traffic_light_types.contains(&signal.signal_type) {
                    network.signals.push(signal);
                } else {
                    network.road_signs.push(signal);
                }
            }
        }

        Ok(Road {
            id,
            name: node.attribute("name").unwrap_or_default().to_string(),
            length,
            geometry,
            lane_offsets,
            lane_sections,
            predecessor,
            successor,
            junction_id,
            speed_limit,
            elevation,
        })
    }

    fn road_link(&self, node: Node) -> Result<RoadLink> {
        let element_id = self.text(node, "elementId")?;
        let target = match node.attribute("elementType").unwrap_or("road") {
            "junction" => LinkTarget::Junction(element_id),
            _ => LinkTarget::Road(element_id),
        };
        Ok(RoadLink {
            target,
            contact_point: self.contact_point(node)?,
        })
    }

    fn contact_point(&self, node: Node) -> Result<Option<ContactPoint>> {
        match node.attribute("contactPoint") {
            None => Ok(None),
            Some("start") => Ok(Some(ContactPoint::Start)),
            Some("end") => Ok(Some(ContactPoint::End)),
            Some(other) => Err(self.err(node, format!("unknown contactPoint {other:?}"))),
        }
    }

    fn speed(&self, node: Node) -> Result<Option<f64>> {
        let Some(raw) = node.attribute("max") else {
            return Ok(None);
        };
        // "no limit" / "undefined" are legal values
        let Ok(max) = raw.trim().parse::<f64>() else {
            return Ok(None);
        };
        let factor = match node.attribute("unit").unwrap_or("m/s") {
            "km/h" => 1.0 / 3.6,
            "mph" => 0.44704,
            "m/s" => 1.0,
            other => return Err(self.err(node, format!("unknown speed unit {other:?}"))),
        };
        Ok(Some(max * factor))
    }

    fn plan_view(&self, node: Node, road_id: &str) -> Result<Vec<GeometrySegment>> {
        let mut out = Vec::new();
        for g in children(node, "geometry") {
            let s_offset = self.num(g, "s")?;
            let origin = Pose::new(self.num(g, "x")?, self.num(g, "y")?, self.num(g, "hdg")?);
            let length = self.num(g, "length")?;
            if length <= 0.0 {
                // zero-length records appear in exported maps; they carry no shape
                if length == 0.0 {
                    continue;
                }
                return Err(Error::Structural(format!(
                    "road {road_id}: geometry at s={s_offset} has negative length"
                )));
            }
            let shape = g
                .children()
                .find(|c| c.is_element())
                .ok_or_else(|| self.err(g, "geometry without shape element"))?;
            let kind = match shape.tag_name().name() {
                "line" => GeometryKind::Line,
                "arc" => {
                    let curvature = self.num(shape, "curvature")?;
                    if curvature == 0.0 {
                        GeometryKind::Line
                    } else {
                        GeometryKind::Arc { curvature }
                    }
                }
                "spiral" => GeometryKind::Approximated {
                    samples: spiral_samples(
                        origin,
                        length,
                        self.num(shape, "curvStart")?,
                        self.num(shape, "curvEnd")?,
                    ),
                },
                "poly3" => GeometryKind::Approximated {
                    samples: poly3_samples(
                        origin,
                        length,
                        [
                            self.num_or(shape, "a", 0.0)?,
                            self.num_or(shape, "b", 0.0)?,
                            self.num_or(shape, "c", 0.0)?,
                            self.num_or(shape, "d", 0.0)?,
                        ],
                    ),
                },
                "paramPoly3" => {
                    let c = |p: &str| -> Result<[f64; 4]> {
                        Ok([
                            self.num_or(shape, &format!("a{p}"), 0.0)?,
                            self.num_or(shape, &format!("b{p}"), 0.0)?,
                            self.num_or(shape, &format!("c{p}"), 0.0)?,
                            self.num_or(shape, &format!("d{p}"), 0.0)?,
                        ])
                    };
                    let range = match shape.attribute("pRange") {
                        Some("arcLength") => ParamRange::ArcLength,
                        _ => ParamRange::Normalized,
                    };
                    GeometryKind::Approximated {
                        samples: param_poly3_samples(origin, length, c("U")?, c("V")?, range),
                    }
                }
                other => return Err(self.err(shape, format!("unsupported geometry <{other}>"))),
            };
            out.push(GeometrySegment {
                s_offset,
                origin_x: origin.x,
                origin_y: origin.y,
                heading: origin.heading,
                length,
                kind,
            });
        }
        out.sort_by(|a, b| a.s_offset.total_cmp(&b.s_offset));
        Ok(out)
    }

    fn lane_section(&self, node: Node, left_hand: bool) -> Result<LaneSection> {
        let s_start = self.num(node, "s")?;
        let mut lanes = BTreeMap::new();
        for side in ["left", "right"] {
            let Some(group) = child(node, side) else {
                continue;
            };
            for lane_node in children(group, "lane") {
                let lane = self.lane(lane_node, left_hand)?;
                if lane.id == 0 {
                    continue;
                }
                lanes.insert(lane.id, lane);
            }
        }
        Ok(LaneSection {
            s_start,
            s_end: s_start,
            lanes,
        })
    }

    fn lane(&self, node: Node, left_hand: bool) -> Result<Lane> {
        let id = self.int(node, "id")?;
        let lane_type = match node.attribute("type").unwrap_or("none") {
            "driving" => LaneType::Driving,
            "sidewalk" | "walking" => LaneType::Sidewalk,
            _ => LaneType::Other,
        };
        let right_side = id < 0;
        let travel_direction = if right_side != left_hand {
            TravelDirection::WithS
        } else {
            TravelDirection::AgainstS
        };
        let (mut predecessor, mut successor) = (None, None);
        if let Some(link) = child(node, "link") {
            if let Some(p) = child(link, "predecessor") {
                predecessor = Some(self.int(p, "id")?);
            }
            if let Some(s) = child(link, "successor") {
                successor = Some(self.int(s, "id")?);
            }
        }
        let mut widths = children(node, "width")
            .map(|w| self.poly(w, "sOffset"))
            .collect::<Result<Vec<_>>>()?;
        widths.sort_by(|a, b| a.s_offset.total_cmp(&b.s_offset));
        let road_marks = children(node, "roadMark")
            .map(|m| {
                Ok(RoadMark {
                    s_offset: self.num_or(m, "sOffset", 0.0)?,
                    mark_type: m.attribute("type").unwrap_or("none").to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Lane {
            id,
            lane_type,
            widths,
            travel_direction,
            predecessor,
            successor,
            road_marks,
        })
    }

    fn crosswalk(&self, node: Node, road_id: &str) -> Result<CrosswalkObject> {
        let mut extent = self.num_or(node, "width", 0.0)?;
        if extent <= 0.0 {
            // fall back to the lateral span of a local outline
            let vs: Vec<f64> = node
                .descendants()
                .filter(|n| n.has_tag_name("cornerLocal"))
                .filter_map(|n| n.attribute("v").and_then(|v| v.parse().ok()))
                .collect();
            if let (Some(lo), Some(hi)) = (
                vs.iter().copied().reduce(f64::min),
                vs.iter().copied().reduce(f64::max),
            ) {
                extent = hi - lo;
            }
        }
        Ok(CrosswalkObject {
            id: node.attribute("id").unwrap_or_default().to_string(),
            road_id: road_id.to_string(),
            s: self.num_or(node, "s", 0.0)?,
            t: self.num_or(node, "t", 0.0)?,
            extent,
            heading: self.num_or(node, "hdg", 0.0)?,
        })
    }

    fn junction(&self, node: Node) -> Result<Junction> {
        let id = self.text(node, "id")?;
        let mut connections = Vec::new();
        for c in children(node, "connection") {
            let lane_links = children(c, "laneLink")
                .map(|l| Ok((self.int(l, "from")?, self.int(l, "to")?)))
                .collect::<Result<Vec<_>>>()?;
            connections.push(JunctionConnection {
                id: c.attribute("id").unwrap_or_default().to_string(),
                incoming_road: self.text(c, "incomingRoad")?,
                connecting_road: self.text(c, "connectingRoad")?,
                contact_point: self.contact_point(c)?.unwrap_or(ContactPoint::Start),
                lane_links,
            });
        }
        Ok(Junction {
            id,
            name: node.attribute("name").unwrap_or_default().to_string(),
            connections,
        })
    }
}

fn check_geometry_tiling(road_id: &str, length: f64, geometry: &[GeometrySegment]) -> Result<()> {
    let Some(first) = geometry.first() else {
        return Err(Error::Structural(format!("road {road_id} has no geometry")));
    };
    let mut expected = 0.0;
    for (i, g) in geometry.iter().enumerate() {
        if (g.s_offset - expected).abs() > TILING_TOLERANCE {
            return Err(Error::Structural(format!(
                "road {road_id}: geometry {i} starts at s={} but previous ends at {expected}",
                g.s_offset
            )));
        }
        expected = g.s_offset + g.length;
    }
    if (expected - length).abs() > TILING_TOLERANCE || first.s_offset.abs() > TILING_TOLERANCE {
        return Err(Error::Structural(format!(
            "road {road_id}: geometry covers [{}, {expected}] but road length is {length}",
            first.s_offset
        )));
    }
    Ok(())
}

fn validate_links(network: &RoadNetwork) -> Result<()> {
    let check = |from: &str, link: &Option<RoadLink>| -> Result<()> {
        match link.as_ref().map(|l| &l.target) {
            Some(LinkTarget::Road(id)) if !network.roads.contains_key(id) => Err(
                Error::Structural(format!("road {from} links to missing road {id}")),
            ),
            Some(LinkTarget::Junction(id)) if !network.junctions.contains_key(id) => Err(
                Error::Structural(format!("road {from} links to missing junction {id}")),
            ),
            _ => Ok(()),
        }
    };
    for road in network.roads.values() {
        check(&road.id, &road.predecessor)?;
        check(&road.id, &road.successor)?;
        if let Some(j) = &road.junction_id {
            if !network.junctions.contains_key(j) {
                return Err(Error::Structural(format!(
                    "road {} belongs to missing junction {j}",
                    road.id
                )));
            }
        }
    }
    for junction in network.junctions.values() {
        for c in &junction.connections {
            for road in [&c.incoming_road, &c.connecting_road] {
                if !network.roads.contains_key(road) {
                    return Err(Error::Structural(format!(
                        "junction {} connection {} references missing road {road}",
                        junction.id, c.id
                    )));
                }
            }
        }
    }
    Ok(())
}
