//! HTTP JSON API over a loaded session dataset.
//!
//! The dataset is an immutable [`Snapshot`] behind an atomic swap; every
//! handler clones the current `Arc` once and works on that, so a reload never
//! tears a request in half.

mod error;
mod routes;

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use sessionlens_core::embed::{EmbedParams, StreamKind};
use sessionlens_core::ingest::{load_dataset, Dataset};
use sessionlens_core::Embedding2D64;
use tokio::sync::OnceCell;

pub use error::{ApiError, ApiResult};
pub use routes::router;

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub data_root: PathBuf,
    /// Defaults for embedding parameters the client leaves out.
    pub embed: EmbedParams,
}

type EmbedSlot = Arc<OnceCell<ApiResult<Arc<Embedding2D64>>>>;

pub struct Snapshot {
    pub dataset: Dataset,
    embeddings: Mutex<HashMap<(StreamKind, EmbedParams), EmbedSlot>>,
}

impl Snapshot {
    pub fn new(dataset: Dataset) -> Self {
        Snapshot {
            dataset,
            embeddings: Mutex::new(HashMap::new()),
        }
    }

    /// Cached embedding; concurrent misses on one key compute it once.
    pub async fn embedding(self: &Arc<Self>, kind: StreamKind, params: EmbedParams) -> ApiResult<Arc<Embedding2D64>> {
        let slot = self
            .embeddings
            .lock()
            .expect("embedding cache poisoned")
            .entry((kind, params))
            .or_default()
            .clone();
        let snapshot = Arc::clone(self);
        slot.get_or_init(|| async move {
            tokio::task::spawn_blocking(move || {
                let sessions: Vec<_> = snapshot.dataset.sessions.iter().collect();
                sessionlens_core::embed::embed_sessions(&sessions, kind, params)
                    .map(Arc::new)
                    .map_err(ApiError::from)
            })
            .await
            .unwrap_or_else(|e| Err(ApiError::internal(format!("embedding task failed: {e}"))))
        })
        .await
        .clone()
    }

    pub fn cached_embeddings(&self) -> usize {
        self.embeddings.lock().expect("embedding cache poisoned").len()
    }
}

pub struct AppState {
    pub config: ServiceConfig,
    snapshot: RwLock<Arc<Snapshot>>,
}

impl AppState {
    pub fn new(config: ServiceConfig, dataset: Dataset) -> Self {
        AppState {
            config,
            snapshot: RwLock::new(Arc::new(Snapshot::new(dataset))),
        }
    }

    /// Loads the dataset named by `config`.
    pub fn load(config: ServiceConfig) -> sessionlens_core::Result<Self> {
        let dataset = load_dataset(&config.data_root)?;
        Ok(AppState::new(config, dataset))
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        Arc::clone(&self.snapshot.read().expect("snapshot lock poisoned"))
    }

    /// Re-reads the dataset and swaps it in, dropping the embedding cache with
    /// the old snapshot. On failure the current snapshot stays.
    pub fn reload(&self) -> sessionlens_core::Result<Arc<Snapshot>> {
        let dataset = load_dataset(&self.config.data_root)?;
        let fresh = Arc::new(Snapshot::new(dataset));
        *self.snapshot.write().expect("snapshot lock poisoned") = Arc::clone(&fresh);
        Ok(fresh)
    }
}

/// One log line per session with problems, plus a total.
pub fn log_quality(dataset: &Dataset) {
    let mut flagged = 0;
    for report in &dataset.reports {
        if report.is_clean() {
            continue;
        }
        flagged += 1;
        let absent: Vec<&str> = report
            .stream_presence
            .iter()
            .filter(|(_, p)| **p == sessionlens_core::ingest::Presence::Absent)
            .map(|(k, _)| k.as_str())
            .collect();
        tracing::warn!(
            session = %report.session_id,
            load = ?report.load,
            gaps = report.gaps.len(),
            absent = ?absent,
            diagnostics = ?report.diagnostics,
            "data quality"
        );
    }
    tracing::info!(
        dataset = %dataset.name,
        sessions = dataset.sessions.len(),
        reports = dataset.reports.len(),
        flagged,
        "dataset loaded"
    );
}
