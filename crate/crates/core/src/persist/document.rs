use serde::{Deserialize, Serialize};

use super::graphml::{graphml_to_graphs, graphs_to_graphml};
use super::{AssetCatalog, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::lanegraph::GraphKind;
use crate::regions::{induced_subgraph, Roi};
use crate::scenario::{ActorSpec, EnvironmentConfig, MapBundle, Scenario};

/// On-disk scenario: a JSON object whose `subgraph` field holds the road
/// and pedestrian subgraphs as one GraphML document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDocument {
    pub format_version: u32,
    pub scenario_id: String,
    pub map_id: String,
    pub map_digest: String,
    pub roi: Vec<String>,
    pub environment: EnvironmentConfig,
    pub offset_margin: f64,
    pub actors: Vec<ActorSpec>,
    pub ego: Option<String>,
    pub subgraph: String,
}

pub fn scenario_to_document(scenario: &Scenario) -> String {
    let doc = ScenarioDocument {
        format_version: FORMAT_VERSION,
        scenario_id: scenario.scenario_id.clone(),
        map_id: scenario.map_id.clone(),
        map_digest: scenario.map_digest.clone(),
        roi: scenario.roi.regions().to_vec(),
        environment: scenario.environment.clone(),
        offset_margin: scenario.offset_margin,
        actors: scenario.actors.clone(),
        ego: scenario.ego().map(str::to_string),
        subgraph: graphs_to_graphml(&[&scenario.road_graph, &scenario.pedestrian_graph]),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("scenario document serializes");
    text.push('\n');
    text
}

/// Reads the header fields without touching the map cache, for routing a
/// document to the right map.
pub fn read_document(text: &str) -> Result<ScenarioDocument> {
    let version = serde_json::from_str::<serde_json::Value>(text)
        .map_err(|e| Error::Format(format!("scenario document: {e}")))?
        .get("format_version")
        .and_then(|v| v.as_u64());
    if version != Some(FORMAT_VERSION as u64) {
        return Err(Error::Format(format!(
            "scenario document version {version:?} is not supported (expected {FORMAT_VERSION})"
        )));
    }
    serde_json::from_str(text).map_err(|e| Error::Format(format!("scenario document: {e}")))
}

/// Parses and fully validates a scenario document against the map it
/// references and the asset catalog.
pub fn document_to_scenario(text: &str, bundle: &MapBundle, catalog: &AssetCatalog) -> Result<Scenario> {
    let doc = read_document(text)?;
    if doc.map_id != bundle.map_id {
        return Err(Error::domain(format!(
            "document references map {}, not {}",
            doc.map_id, bundle.map_id
        )));
    }
    if doc.map_digest != bundle.digest {
        return Err(Error::StaleMap {
            map_id: doc.map_id,
            expected: doc.map_digest,
            actual: bundle.digest.clone(),
        });
    }
    let parsed = graphml_to_graphs(&doc.subgraph)?;
    for w in &parsed.warnings {
        log::warn!("scenario {}: {w}", doc.scenario_id);
    }
    let mut road = None;
    let mut pedestrian = None;
    for g in parsed.graphs {
        let slot = match g.kind {
            GraphKind::Road => &mut road,
            GraphKind::Pedestrian => &mut pedestrian,
        };
        if slot.replace(g).is_some() {
            return Err(Error::Format("subgraph holds two graphs of the same kind".to_string()));
        }
    }
    let (Some(road_graph), Some(pedestrian_graph)) = (road, pedestrian) else {
        return Err(Error::Format("subgraph must hold a road and a pedestrian graph".to_string()));
    };

    let mut problems = Vec::new();
    let roi = Roi::from_regions(&bundle.partition, doc.roi.clone());
    match &roi {
        Ok(roi) => {
            let expect_road = induced_subgraph(&bundle.road_graph, &bundle.partition, roi)?;
            let expect_ped = induced_subgraph(&bundle.pedestrian_graph, &bundle.partition, roi)?;
            if road_graph.stripped() != expect_road {
                problems.push("road subgraph does not match the roi on the cached map".to_string());
            }
            if pedestrian_graph.stripped() != expect_ped {
                problems.push("pedestrian subgraph does not match the roi on the cached map".to_string());
            }
        }
        Err(e) => problems.push(format!("roi: {e}")),
    }
    if let Some(ego) = &doc.ego {
        if !doc.actors.iter().any(|a| &a.actor_id == ego && a.is_ego) {
            problems.push(format!("ego {ego} does not match the actor flags"));
        }
    } else if doc.actors.iter().any(|a| a.is_ego) {
        problems.push("an actor is flagged as ego but no ego is named".to_string());
    }
    let scenario = Scenario {
        scenario_id: doc.scenario_id,
        map_id: doc.map_id,
        map_digest: doc.map_digest,
        roi: roi.unwrap_or_default(),
        environment: doc.environment,
        offset_margin: doc.offset_margin,
        actors: doc.actors,
        road_graph,
        pedestrian_graph,
    };
    if let Err(Error::Validation(more)) = scenario.validate(catalog) {
        problems.extend(more);
    }
    if problems.is_empty() {
        Ok(scenario)
    } else {
        Err(Error::Validation(problems))
    }
}
