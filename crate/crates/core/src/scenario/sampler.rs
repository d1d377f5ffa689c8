use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{new_scenario, ActorSpec, EnvironmentConfig, MapBundle, Scenario, ScenarioRng, TimeOfDay};
use crate::category::ActorCategory;
use crate::error::{Error, Result};
use crate::persist::AssetCatalog;
use crate::regions::{eligible_extensions, expand_roi, Roi};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub seed: u64,
    pub fill_percentage: f64,
    pub category_weights: BTreeMap<ActorCategory, f64>,
    /// Desired velocity bounds in m/s per category.
    pub velocity_ranges: BTreeMap<ActorCategory, (f64, f64)>,
    pub lateral_offset_range: (f64, f64),
    pub roi_region_count_range: (usize, usize),
    /// Make the first sampled vehicle the ego.
    pub designate_ego: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        use ActorCategory::*;
        let category_weights = [
            (NormalVehicle, 0.5),
            (Pedestrian, 0.2),
            (Bicycle, 0.05),
            (Motorcycle, 0.05),
            (Van, 0.1),
            (Truck, 0.05),
            (Bus, 0.05),
        ]
        .into_iter()
        .collect();
        let velocity_ranges = ActorCategory::ALL
            .into_iter()
            .map(|c| {
                let range = match c {
                    Pedestrian => (0.5, 2.0),
                    Bicycle => (2.0, 7.0),
                    _ => (3.0, 14.0),
                };
                (c, range)
            })
            .collect();
        SamplerConfig {
            seed: 0,
            fill_percentage: 0.5,
            category_weights,
            velocity_ranges,
            lateral_offset_range: (-0.5, 0.5),
            roi_region_count_range: (1, 4),
            designate_ego: true,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(0.0..=1.0).contains(&self.fill_percentage) {
            problems.push(format!("fill percentage {} is outside [0, 1]", self.fill_percentage));
        }
        if self.category_weights.values().any(|w| !(w.is_finite() && *w >= 0.0)) {
            problems.push("category weights must be finite and non-negative".to_string());
        }
        if !self.category_weights.values().any(|w| *w > 0.0) {
            problems.push("at least one category weight must be positive".to_string());
        }
        for c in ActorCategory::ALL {
            if self.category_weights.get(&c).copied().unwrap_or(0.0) <= 0.0 {
                continue;
            }
            match self.velocity_ranges.get(&c) {
                Some(&(lo, hi)) if lo > 0.0 && lo <= hi && hi.is_finite() => {}
                Some(r) => problems.push(format!("velocity range {r:?} for {c} must satisfy 0 < min <= max")),
                None => problems.push(format!("no velocity range for {c}")),
            }
        }
        let (lo, hi) = self.lateral_offset_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            problems.push(format!("lateral offset range {:?} is not ordered", self.lateral_offset_range));
        }
        let (lo, hi) = self.roi_region_count_range;
        if lo == 0 || lo > hi {
            problems.push(format!(
                "roi region count range {:?} must satisfy 1 <= min <= max",
                self.roi_region_count_range
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }

    fn draw_category(&self, rng: &mut ScenarioRng, allow_pedestrian: bool) -> ActorCategory {
        let weighted: Vec<(ActorCategory, f64)> = ActorCategory::ALL
            .into_iter()
            .filter(|c| allow_pedestrian || !c.is_pedestrian())
            .map(|c| (c, self.category_weights.get(&c).copied().unwrap_or(0.0)))
            .filter(|(_, w)| *w > 0.0)
            .collect();
        let Some(&(last, _)) = weighted.last() else {
            return ActorCategory::NormalVehicle;
        };
        let total: f64 = weighted.iter().map(|(_, w)| w).sum();
        let u = rng.unit() * total;
        let mut acc = 0.0;
        for (c, w) in &weighted {
            acc += w;
            if u < acc {
                return *c;
            }
        }
        last
    }
}

/// Draws one scenario. The result depends only on the maps, the catalog
/// and the configuration, seed included.
pub fn sample_scenario(maps: &[MapBundle], catalog: &AssetCatalog, config: &SamplerConfig) -> Result<Scenario> {
    config.validate()?;
    let mut maps: Vec<&MapBundle> = maps.iter().filter(|m| !m.partition.regions.is_empty()).collect();
    if maps.is_empty() {
        return Err(Error::domain("no map with selectable regions to sample from"));
    }
    if catalog.weather_presets.is_empty() {
        return Err(Error::domain("asset catalog has no weather presets"));
    }
    maps.sort_by(|a, b| a.map_id.cmp(&b.map_id));
    let mut rng = ScenarioRng::new(config.seed);

    let bundle = *rng.pick(&maps);
    let partition = &bundle.partition;
    let region_ids: Vec<&str> = partition.region_ids().collect();
    let (lo, hi) = config.roi_region_count_range;
    let target = rng.range_inclusive(lo, hi);
    let mut roi = Roi::new(partition, rng.pick(&region_ids))?;
    while roi.len() < target {
        let eligible: Vec<String> = eligible_extensions(partition, &roi)?.into_iter().collect();
        if eligible.is_empty() {
            break;
        }
        let next = rng.pick(&eligible).clone();
        roi = expand_roi(partition, &roi, &next)?;
    }

    let preset = rng.pick(&catalog.weather_presets);
    let time = match preset.implies_time {
        Some(t) => t,
        None => *rng.pick(&TimeOfDay::SYMBOLIC),
    };
    let environment = EnvironmentConfig {
        weather_preset: preset.id.clone(),
        time_of_day: time,
    };
    let mut scenario = new_scenario(
        format!("sampled-{:016x}", config.seed),
        bundle,
        roi,
        environment,
        catalog,
    )?;

    let max = scenario.max_allowable_actors();
    let count = (config.fill_percentage * max as f64).floor() as usize;
    if count == 0 && config.fill_percentage > 0.0 && max == 0 {
        log::warn!("seed {}: no eligible spawn nodes in the sampled roi", config.seed);
    }
    let mut road_pool = scenario.eligible_spawn_nodes();
    let mut ped_pool = scenario.eligible_pedestrian_nodes();
    let mut has_ego = false;

    for k in 0..count {
        let mut category = config.draw_category(&mut rng, true);
        if category.is_pedestrian() && ped_pool.is_empty() {
            category = config.draw_category(&mut rng, false);
        }
        let pool = if category.is_pedestrian() { &mut ped_pool } else { &mut road_pool };
        let spawn = pool.remove(rng.below(pool.len()));
        let models = catalog.models_of(category);
        let model = (!models.is_empty()).then(|| rng.pick(&models).id.clone());
        let (vlo, vhi) = config.velocity_ranges[&category];
        let desired_velocity = rng.range(vlo, vhi);
        let (olo, ohi) = config.lateral_offset_range;
        let lateral_offset = rng.range(olo, ohi).clamp(-scenario.offset_margin, scenario.offset_margin);
        let candidates: Vec<String> = scenario.goal_candidates(&spawn)?.into_iter().collect();
        let goal_node = rng.pick(&candidates).clone();
        let is_ego = config.designate_ego && !has_ego && !category.is_pedestrian();
        has_ego |= is_ego;
        let spec = ActorSpec {
            actor_id: format!("npc-{k:04}"),
            category,
            model,
            spawn_node: spawn,
            goal_node,
            desired_velocity,
            lateral_offset,
            is_ego,
        };
        scenario = scenario.place_actor(spec, catalog)?;
    }
    Ok(scenario)
}

/// `count` scenarios; scenario `i` uses seed `config.seed + i` (wrapping).
pub fn sample_batch(
    maps: &[MapBundle],
    catalog: &AssetCatalog,
    config: &SamplerConfig,
    count: usize,
) -> Result<Vec<Scenario>> {
    (0..count)
        .map(|i| {
            let cfg = SamplerConfig {
                seed: config.seed.wrapping_add(i as u64),
                ..config.clone()
            };
            sample_scenario(maps, catalog, &cfg)
        })
        .collect()
}
