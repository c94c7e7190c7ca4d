use std::sync::Arc;

use parking_lot::RwLock;
use pedscript_core::Formulary;
use pedscript_store::Store;

use crate::clock::{Clock, SystemClock};
use crate::error::ApiError;

/// Shared handler state. Cheap to clone.
#[derive(Clone)]
pub struct AppState {
    pub store: Arc<Store>,
    formulary: Arc<RwLock<Arc<Formulary>>>,
    pub clock: Arc<dyn Clock>,
}

impl AppState {
    pub fn new(store: Store, formulary: Formulary) -> Self {
        Self::with_clock(store, formulary, Arc::new(SystemClock))
    }

    pub fn with_clock(store: Store, formulary: Formulary, clock: Arc<dyn Clock>) -> Self {
        Self {
            store: Arc::new(store),
            formulary: Arc::new(RwLock::new(Arc::new(formulary))),
            clock,
        }
    }

    /// Snapshot of the current formulary. Holders keep the version they took.
    pub fn formulary(&self) -> Arc<Formulary> {
        Arc::clone(&self.formulary.read())
    }

    /// Swaps in a new formulary; in-flight requests finish on the old one.
    pub fn replace_formulary(&self, next: Formulary) {
        *self.formulary.write() = Arc::new(next);
    }

    /// Runs a store operation on the blocking pool.
    pub async fn blocking<T, F>(&self, f: F) -> Result<T, ApiError>
    where
        T: Send + 'static,
        F: FnOnce(&AppState) -> Result<T, ApiError> + Send + 'static,
    {
        let state = self.clone();
        tokio::task::spawn_blocking(move || f(&state))
            .await
            .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
    }
}
