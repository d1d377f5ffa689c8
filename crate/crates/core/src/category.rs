use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Semantic actor groups used for catalog models, placement rules and glyphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActorCategory {
    NormalVehicle,
    Pedestrian,
    Bicycle,
    Motorcycle,
    Van,
    Truck,
    Bus,
}

impl ActorCategory {
    pub const ALL: [ActorCategory; 7] = [
        ActorCategory::NormalVehicle,
        ActorCategory::Pedestrian,
        ActorCategory::Bicycle,
        ActorCategory::Motorcycle,
        ActorCategory::Van,
        ActorCategory::Truck,
        ActorCategory::Bus,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ActorCategory::NormalVehicle => "normal_vehicle",
            ActorCategory::Pedestrian => "pedestrian",
            ActorCategory::Bicycle => "bicycle",
            ActorCategory::Motorcycle => "motorcycle",
            ActorCategory::Van => "van",
            ActorCategory::Truck => "truck",
            ActorCategory::Bus => "bus",
        }
    }

    pub fn is_pedestrian(self) -> bool {
        self == ActorCategory::Pedestrian
    }
}

impl fmt::Display for ActorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ActorCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ActorCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Format(format!("unknown actor category {s:?}")))
    }
}
