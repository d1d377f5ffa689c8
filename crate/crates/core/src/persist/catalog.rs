use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::FORMAT_VERSION;
use crate::category::ActorCategory;
use crate::error::{Error, Result};
use crate::scenario::TimeOfDay;

const DEFAULT_CATALOG: &str = include_str!("../../assets/catalog.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherPreset {
    pub id: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub implies_time: Option<TimeOfDay>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorModel {
    pub id: String,
    pub category: ActorCategory,
    pub name: String,
    /// Bounding box length and width in metres.
    pub length: f64,
    pub width: f64,
}

/// Weather presets and actor blueprints available to scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetCatalog {
    pub format_version: u32,
    pub weather_presets: Vec<WeatherPreset>,
    pub models: Vec<ActorModel>,
}

impl AssetCatalog {
    /// The catalog bundled with the library.
    pub fn builtin() -> AssetCatalog {
        AssetCatalog::from_json(DEFAULT_CATALOG).expect("bundled catalog is valid")
    }

    pub fn from_json(text: &str) -> Result<AssetCatalog> {
        let catalog: AssetCatalog =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("asset catalog: {e}")))?;
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn load(path: &Path) -> Result<AssetCatalog> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        AssetCatalog::from_json(&text)
    }

    fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "asset catalog version {} is not supported (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        let mut problems = Vec::new();
        let mut seen = BTreeSet::new();
        for id in self.weather_presets.iter().map(|p| &p.id) {
            if !seen.insert(id) {
                problems.push(format!("duplicate weather preset {id}"));
            }
        }
        let mut seen = BTreeSet::new();
        for m in &self.models {
            if !seen.insert(&m.id) {
                problems.push(format!("duplicate model {}", m.id));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }

    pub fn preset(&self, id: &str) -> Option<&WeatherPreset> {
        self.weather_presets.iter().find(|p| p.id == id)
    }

    pub fn model(&self, id: &str) -> Option<&ActorModel> {
        self.models.iter().find(|m| m.id == id)
    }

    /// Models of one category, sorted by id.
    pub fn models_of(&self, category: ActorCategory) -> Vec<&ActorModel> {
        let mut out: Vec<_> = self.models.iter().filter(|m| m.category == category).collect();
        out.sort_by(|a, b| a.id.cmp(&b.id));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_catalog() {
        let c = AssetCatalog::builtin();
        assert_eq!(c.weather_presets.len(), 15);
        assert!(c.preset("HardRainNight").is_some());
        assert_eq!(c.preset("HardRainNight").unwrap().implies_time, Some(TimeOfDay::Night));
        for cat in ActorCategory::ALL {
            assert!(!c.models_of(cat).is_empty(), "{cat}");
        }
    }

    #[test]
    fn duplicates_rejected() {
        let text = r#"{"format_version":1,"weather_presets":[
            {"id":"A","name":"a"},{"id":"A","name":"b"}],"models":[]}"#;
        assert!(matches!(AssetCatalog::from_json(text), Err(Error::Validation(_))));
        let text = r#"{"format_version":9,"weather_presets":[],"models":[]}"#;
        assert!(matches!(AssetCatalog::from_json(text), Err(Error::Format(_))));
        let text = r#"{"format_version":1,"weather_presets":[],"models":[
            {"id":"m","category":"spaceship","name":"x","length":1,"width":1}]}"#;
        assert!(matches!(AssetCatalog::from_json(text), Err(Error::Format(_))));
    }
}
