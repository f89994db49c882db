//! HTTP service, storage and configuration around `waypoint-core`.

pub mod api;
pub mod config;
pub mod error;
pub mod store;

use std::net::SocketAddr;
use std::sync::Arc;

use anyhow::Context;

pub use api::{router, AppState};
pub use config::{Layer, Settings};
pub use store::FileStore;

/// Wires the store, model gateway and video backend described by `settings`.
pub fn build_state(settings: &Settings) -> anyhow::Result<AppState> {
    let store = FileStore::open(&settings.store).context("opening store")?;
    let mut state = AppState::new(
        store,
        settings.gateway()?,
        settings.backend()?,
        Arc::new(settings.transcript_cache()?),
    );
    state.engine = settings.engine();
    Ok(state)
}

/// Serves until ctrl-c.
pub async fn serve(settings: Settings) -> anyhow::Result<()> {
    let state = build_state(&settings)?;
    let app = router(state, settings.static_dir.clone());
    let addr = SocketAddr::from(([0, 0, 0, 0], settings.port));
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
