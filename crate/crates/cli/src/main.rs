use std::fs::File;
use std::io::BufReader;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use chrono::Utc;
use clap::{Parser, Subcommand};
use pedscript_api::AppState;
use pedscript_core::{check_dose_cap, clarks_dose, kg_to_lb, AdultDose, Formulary};
use pedscript_store::{Fixtures, Store};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "pedscript", version, about = "Pediatric e-prescribing service")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = "PEDSCRIPT_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "PEDSCRIPT_HOST", default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        #[arg(long, env = "PEDSCRIPT_DB")]
        db: PathBuf,
        #[arg(long, env = "PEDSCRIPT_FORMULARY")]
        formulary: PathBuf,
    },
    /// Load users and patients from a fixtures file into the database.
    Seed {
        #[arg(long)]
        fixtures: PathBuf,
        #[arg(long, env = "PEDSCRIPT_DB")]
        db: PathBuf,
        /// Also validate a formulary file before it is deployed.
        #[arg(long, env = "PEDSCRIPT_FORMULARY")]
        formulary: Option<PathBuf>,
    },
    /// Print the Clark's-rule dose for a weight and adult dose.
    Dose {
        #[arg(long)]
        weight_kg: f64,
        #[arg(long)]
        adult_dose: f64,
        #[arg(long, default_value = "mg")]
        unit: String,
        /// Maximum child dose, in the same unit.
        #[arg(long)]
        cap: Option<f64>,
    },
}

fn load_formulary(path: &Path) -> Result<Formulary> {
    let file = File::open(path).with_context(|| format!("opening formulary {}", path.display()))?;
    Formulary::load(BufReader::new(file)).with_context(|| format!("loading formulary {}", path.display()))
}

fn dose(weight_kg: f64, adult_dose: f64, unit: String, cap: Option<f64>) -> Result<()> {
    let weight = kg_to_lb(weight_kg)?;
    let adult = AdultDose::new(adult_dose, unit, "")?;
    let mut child = clarks_dose(weight, &adult)?;
    child.flags = check_dose_cap(&child, cap);
    println!("weight: {weight_kg} kg = {:.4} lb", weight.value());
    println!("child dose: {:.2} {}", child.amount, child.unit);
    for flag in &child.flags {
        println!("flag: {flag:?}");
    }
    Ok(())
}

fn seed(fixtures: &Path, db: &Path, formulary: Option<&Path>) -> Result<()> {
    if let Some(path) = formulary {
        let f = load_formulary(path)?;
        println!("formulary ok: {} monographs, version {}", f.len(), f.version());
    }
    let file = File::open(fixtures).with_context(|| format!("opening fixtures {}", fixtures.display()))?;
    let fixtures =
        Fixtures::from_reader(BufReader::new(file)).with_context(|| format!("parsing fixtures {}", fixtures.display()))?;
    let store = Store::open(db).with_context(|| format!("opening database {}", db.display()))?;
    let summary = store.seed(&fixtures, Utc::now())?;
    println!(
        "seeded: {} users created, {} users already present, {} patients created",
        summary.users_created, summary.users_skipped, summary.patients_created
    );
    Ok(())
}

async fn serve(addr: SocketAddr, db: &Path, formulary: &Path) -> Result<()> {
    let formulary = load_formulary(formulary)?;
    let store = Store::open(db).with_context(|| format!("opening database {}", db.display()))?;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    tracing::info!(%addr, formulary = formulary.version(), drugs = formulary.len(), "listening");
    pedscript_api::serve(listener, AppState::new(store, formulary)).await?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Dose {
            weight_kg,
            adult_dose,
            unit,
            cap,
        } => dose(weight_kg, adult_dose, unit, cap),
        Command::Seed { fixtures, db, formulary } => seed(&fixtures, &db, formulary.as_deref()),
        Command::Serve {
            port,
            host,
            db,
            formulary,
        } => {
            tracing_subscriber::fmt()
                .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
                .init();
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(serve(SocketAddr::new(host, port), &db, &formulary))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
