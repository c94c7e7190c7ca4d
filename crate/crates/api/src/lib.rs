//! HTTP service for pediatric e-prescribing.
//!
//! Pediatricians look up patients, get formulary suggestions with
//! Clark's-rule doses, and issue prescriptions that carry a random
//! checksummed code. Pharmacists enter the code to verify and dispense.
//! The ministry sees de-identified aggregates.

pub mod clock;
pub mod error;
pub mod extract;
pub mod printable;
pub mod routes;
pub mod service;
pub mod state;

use std::time::Duration as StdDuration;

use tokio::net::TcpListener;

pub use clock::{Clock, ManualClock, SystemClock};
pub use error::{ApiError, ErrorBody};
pub use printable::PrintableDocument;
pub use routes::router;
pub use service::{MinistryReport, PrescriptionView, SuggestionEntry};
pub use state::AppState;

pub const SWEEP_INTERVAL: StdDuration = StdDuration::from_secs(300);

/// Periodically materializes expired prescriptions and drops dead sessions.
pub fn spawn_sweeper(state: AppState, every: StdDuration) -> tokio::task::JoinHandle<()> {
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(every);
        loop {
            tick.tick().await;
            let now = state.clock.now();
            let result = state
                .blocking(move |s| {
                    let expired = s.store.expire_sweep(now)?;
                    s.store.purge_sessions(now)?;
                    Ok(expired)
                })
                .await;
            match result {
                Ok(0) => {}
                Ok(n) => tracing::info!(expired = n, "expiry sweep"),
                Err(e) => tracing::warn!(error = ?e.body, "expiry sweep failed"),
            }
        }
    })
}

/// Serves until ctrl-c.
pub async fn serve(listener: TcpListener, state: AppState) -> std::io::Result<()> {
    let sweeper = spawn_sweeper(state.clone(), SWEEP_INTERVAL);
    let result = axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await;
    sweeper.abort();
    result
}
