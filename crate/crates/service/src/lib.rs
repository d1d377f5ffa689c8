//! HTTP API over the scenario engine.
//!
//! Every endpoint speaks JSON unless noted. Failures carry an
//! [`error::ErrorBody`] with a stable `code`. Scenario mutations are
//! serialized per scenario id and written through to the cache directory
//! before they are acknowledged.

pub mod error;
pub mod routes;
pub mod state;

pub use error::{ApiError, ErrorBody};
pub use routes::{router, PlacedActor, ScenarioView};
pub use state::{AppState, MapStore, DEFAULT_UNDO_DEPTH};

/// Serves the API on an already bound listener until the task is dropped.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}
