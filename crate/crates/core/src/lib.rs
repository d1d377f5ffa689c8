pub mod category;
pub mod error;
pub mod lanegraph;
pub mod opendrive;
pub mod persist;
pub mod realize;
pub mod regions;
pub mod scenario;

pub use category::ActorCategory;
pub use error::{Error, Result};
